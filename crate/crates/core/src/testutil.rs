//! Shared fixtures for unit tests.

use std::sync::OnceLock;

use crate::basis::{builtin_system, BuiltinSystem, SystemOverrides};
use crate::integrals::{build_integral_set, IntegralSet};
use crate::qubitops::{second_quantize, FermionOp, Mapping, ModeLayout, PauliSum};
use crate::scf::{mo_transform, solve_neo_hf, ScfOptions};

pub struct MoSystem {
    pub layout: ModeLayout,
    pub mo: IntegralSet,
    pub fermion: FermionOp,
    pub e_hf: f64,
}

impl MoSystem {
    pub fn hamiltonian(&self, mapping: Mapping) -> PauliSum {
        mapping.map(&self.fermion)
    }
}

/// Cached per process; the SCF runs once per system.
pub fn mo_system(which: BuiltinSystem) -> &'static MoSystem {
    static HHQ: OnceLock<MoSystem> = OnceLock::new();
    static PSH: OnceLock<MoSystem> = OnceLock::new();
    let cell = match which {
        BuiltinSystem::HHq => &HHQ,
        BuiltinSystem::PsH => &PSH,
    };
    cell.get_or_init(|| build(which))
}

fn build(which: BuiltinSystem) -> MoSystem {
    let spec = builtin_system(which, &SystemOverrides::default()).unwrap();
    let ao = build_integral_set(&spec).unwrap();
    let sol = solve_neo_hf(&ao, &ScfOptions::default()).unwrap();
    let mo = mo_transform(&ao, &sol).unwrap();
    let layout = ModeLayout::for_integrals(&mo);
    let fermion = second_quantize(&mo, &layout).unwrap();
    MoSystem { layout, mo, fermion, e_hf: sol.energy }
}
