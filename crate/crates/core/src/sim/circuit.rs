use std::fmt;

use crate::error::{Error, Result};
use crate::qubitops::PauliString;

/// Rotation angle `scale * θ[slot] + offset`, or the constant `offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub slot: Option<usize>,
    pub scale: f64,
    pub offset: f64,
}

impl Angle {
    pub fn fixed(value: f64) -> Self {
        Self {
            slot: None,
            scale: 0.0,
            offset: value,
        }
    }

    pub fn param(slot: usize, scale: f64) -> Self {
        Self {
            slot: Some(slot),
            scale,
            offset: 0.0,
        }
    }

    pub fn is_bound(&self) -> bool {
        self.slot.is_none()
    }

    pub fn value(&self, params: Option<&[f64]>) -> Result<f64> {
        match self.slot {
            None => Ok(self.offset),
            Some(k) => match params.and_then(|p| p.get(k)) {
                Some(t) => Ok(self.scale * t + self.offset),
                None => Err(Error::UnboundParameter(k)),
            },
        }
    }

    pub fn neg(self) -> Self {
        Self {
            slot: self.slot,
            scale: -self.scale,
            offset: -self.offset,
        }
    }

    fn bind(self, params: &[f64]) -> Result<Self> {
        Ok(Angle::fixed(self.value(Some(params))?))
    }
}

/// Gate kinds; every rotation is `exp(-iθP/2)` for its Pauli generator `P`.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Sx,
    /// Inverse of `Sx`; appears only in folded circuits.
    SxDg,
    Rz(Angle),
    Rxx(Angle),
    Ryy(Angle),
    Rzz(Angle),
    Cnot,
    PauliEvolution(PauliString, Angle),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::SxDg => "sxdg",
            GateKind::Rz(_) => "rz",
            GateKind::Rxx(_) => "rxx",
            GateKind::Ryy(_) => "ryy",
            GateKind::Rzz(_) => "rzz",
            GateKind::Cnot => "cx",
            GateKind::PauliEvolution(..) => "pauli_evolution",
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            GateKind::Rz(a) | GateKind::Rxx(a) | GateKind::Ryy(a) | GateKind::Rzz(a) | GateKind::PauliEvolution(_, a) => Some(a),
            _ => None,
        }
    }

    fn angle_mut(&mut self) -> Option<&mut Angle> {
        match self {
            GateKind::Rz(a) | GateKind::Rxx(a) | GateKind::Ryy(a) | GateKind::Rzz(a) | GateKind::PauliEvolution(_, a) => Some(a),
            _ => None,
        }
    }
}

/// A gate with its operand qubits. For `cx` the order is `[control, target]`;
/// for a Pauli evolution the operands are the string's support in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn x(q: usize) -> Self {
        Self { kind: GateKind::X, qubits: vec![q] }
    }

    pub fn sx(q: usize) -> Self {
        Self { kind: GateKind::Sx, qubits: vec![q] }
    }

    pub fn sxdg(q: usize) -> Self {
        Self { kind: GateKind::SxDg, qubits: vec![q] }
    }

    pub fn rz(q: usize, angle: Angle) -> Self {
        Self { kind: GateKind::Rz(angle), qubits: vec![q] }
    }

    pub fn rxx(a: usize, b: usize, angle: Angle) -> Self {
        Self { kind: GateKind::Rxx(angle), qubits: vec![a, b] }
    }

    pub fn ryy(a: usize, b: usize, angle: Angle) -> Self {
        Self { kind: GateKind::Ryy(angle), qubits: vec![a, b] }
    }

    pub fn rzz(a: usize, b: usize, angle: Angle) -> Self {
        Self { kind: GateKind::Rzz(angle), qubits: vec![a, b] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            qubits: vec![control, target],
        }
    }

    pub fn pauli_evolution(p: PauliString, angle: Angle) -> Self {
        let qubits = (0..64).filter(|q| p.support() >> q & 1 == 1).collect();
        Self {
            kind: GateKind::PauliEvolution(p, angle),
            qubits,
        }
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::X => GateKind::X,
            GateKind::Sx => GateKind::SxDg,
            GateKind::SxDg => GateKind::Sx,
            GateKind::Cnot => GateKind::Cnot,
            GateKind::Rz(a) => GateKind::Rz(a.neg()),
            GateKind::Rxx(a) => GateKind::Rxx(a.neg()),
            GateKind::Ryy(a) => GateKind::Ryy(a.neg()),
            GateKind::Rzz(a) => GateKind::Rzz(a.neg()),
            GateKind::PauliEvolution(p, a) => GateKind::PauliEvolution(*p, a.neg()),
        };
        Gate {
            kind,
            qubits: self.qubits.clone(),
        }
    }

    /// Pauli generator of a rotation gate.
    pub fn generator(&self) -> Option<PauliString> {
        let two = |a: char| {
            let mut p = PauliString::single(self.qubits[0], a);
            let q = PauliString::single(self.qubits[1], a);
            p.x |= q.x;
            p.z |= q.z;
            p
        };
        match &self.kind {
            GateKind::Rz(_) => Some(PauliString::single(self.qubits[0], 'Z')),
            GateKind::Rxx(_) => Some(two('X')),
            GateKind::Ryy(_) => Some(two('Y')),
            GateKind::Rzz(_) => Some(two('Z')),
            GateKind::PauliEvolution(p, _) => Some(*p),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if let GateKind::PauliEvolution(p, _) = &self.kind {
            let n = self.qubits.last().map_or(0, |q| q + 1);
            write!(f, "[{}]", p.label(n))?;
        }
        if let Some(a) = self.kind.angle() {
            match a.slot {
                None => write!(f, "({:.6})", a.offset)?,
                Some(k) => write!(f, "({}*t{} + {})", a.scale, k, a.offset)?,
            }
        }
        let qs: Vec<String> = self.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(f, " {}", qs.join(","))
    }
}

/// Ordered gate list over `n_qubits` with `n_params` free parameter slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        Self {
            n_qubits,
            n_params,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn set_n_params(&mut self, n: usize) {
        self.n_params = n;
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.validate_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    fn validate_gate(&self, gate: &Gate) -> Result<()> {
        let expected = match gate.kind {
            GateKind::X | GateKind::Sx | GateKind::SxDg | GateKind::Rz(_) => Some(1),
            GateKind::Rxx(_) | GateKind::Ryy(_) | GateKind::Rzz(_) | GateKind::Cnot => Some(2),
            GateKind::PauliEvolution(..) => None,
        };
        if let Some(k) = expected {
            if gate.arity() != k {
                return Err(Error::InvalidCircuit(format!("{} takes {k} qubits, got {}", gate.kind.name(), gate.arity())));
            }
        }
        for (i, &q) in gate.qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::InvalidCircuit(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
            }
            if gate.qubits[..i].contains(&q) {
                return Err(Error::InvalidCircuit(format!("{} repeats qubit {q}", gate.kind.name())));
            }
        }
        if let Some(Angle { slot: Some(k), .. }) = gate.kind.angle() {
            if *k >= self.n_params {
                return Err(Error::InvalidCircuit(format!("parameter slot {k} beyond {} slots", self.n_params)));
            }
        }
        Ok(())
    }

    /// First parameter slot that still needs a value.
    pub fn unbound_slot(&self) -> Option<usize> {
        self.gates.iter().find_map(|g| g.kind.angle().and_then(|a| a.slot))
    }

    /// Substitutes parameter values, leaving a circuit of constant angles.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.n_params {
            return Err(Error::DimensionMismatch(format!(
                "{} parameter values for {} slots",
                params.len(),
                self.n_params
            )));
        }
        let mut out = Circuit::new(self.n_qubits, 0);
        for g in &self.gates {
            let mut g = g.clone();
            if let Some(a) = g.kind.angle_mut() {
                *a = a.bind(params)?;
            }
            out.gates.push(g);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            n_params: self.n_params,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Appends `other`, which must act on the same register and slot table.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::InvalidCircuit(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        self.n_params = self.n_params.max(other.n_params);
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Circuit with the same register and slots but the given gates.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Circuit> {
        let mut out = Circuit::new(self.n_qubits, self.n_params);
        out.extend(gates)?;
        Ok(out)
    }

    /// Per-kind gate counts, keyed by gate name.
    pub fn counts(&self) -> std::collections::BTreeMap<&'static str, usize> {
        let mut m = std::collections::BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind.name()).or_insert(0) += 1;
        }
        m
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# qubits={} params={} gates={}", self.n_qubits, self.n_params, self.gates.len())?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}
