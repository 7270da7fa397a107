//! Device-basis transpilation and circuit resource accounting.
//!
//! Circuits are lowered to `{rz, sx, x, cx}`. Any Pauli rotation becomes a
//! per-qubit basis change, a CNOT parity ladder onto the last support qubit,
//! a single `rz`, and the mirrored uncompute. A small peephole pass then merges
//! adjacent `rz`, cancels `cx·cx` and `x·x`, folds `sx·sx` into `x` and drops
//! `rz` by multiples of `2π`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qubitops::PauliString;
use crate::sim::{Angle, Circuit, Gate, GateKind};

/// Gate kinds of the device basis.
pub const BASIS: [&str; 4] = ["rz", "sx", "x", "cx"];

fn hadamard(q: usize) -> [Gate; 3] {
    [
        Gate::rz(q, Angle::fixed(FRAC_PI_2)),
        Gate::sx(q),
        Gate::rz(q, Angle::fixed(FRAC_PI_2)),
    ]
}

/// `exp(-iθP/2)` in the device basis.
fn pauli_rotation(p: PauliString, angle: Angle, out: &mut Vec<Gate>) {
    let qs: Vec<usize> = (0..64).filter(|q| p.support() >> q & 1 == 1).collect();
    let Some(&last) = qs.last() else { return };
    for &q in &qs {
        match p.op(q) {
            'X' => out.extend(hadamard(q)),
            'Y' => out.push(Gate::sx(q)),
            _ => {}
        }
    }
    for w in qs.windows(2) {
        out.push(Gate::cnot(w[0], w[1]));
    }
    out.push(Gate::rz(last, angle));
    for w in qs.windows(2).rev() {
        out.push(Gate::cnot(w[0], w[1]));
    }
    for &q in &qs {
        match p.op(q) {
            'X' => out.extend(hadamard(q)),
            'Y' => out.extend([Gate::x(q), Gate::sx(q)]),
            _ => {}
        }
    }
}

fn two_qubit_pauli(a: usize, b: usize, op: char) -> PauliString {
    let mut label = vec!['I'; b.max(a) + 1];
    label[a] = op;
    label[b] = op;
    PauliString::from_label(&label.into_iter().collect::<String>()).expect("valid label")
}

/// Sum of two angles when the result is still a single affine slot.
fn merged(a: &Angle, b: &Angle) -> Option<Angle> {
    let slot = match (a.slot, b.slot) {
        (None, s) | (s, None) => s,
        (Some(x), Some(y)) if x == y => Some(x),
        _ => return None,
    };
    Some(Angle {
        slot,
        scale: if a.slot.is_some() { a.scale } else { 0.0 } + if b.slot.is_some() { b.scale } else { 0.0 },
        offset: a.offset + b.offset,
    })
}

fn is_trivial(a: &Angle) -> bool {
    let s = if a.slot.is_some() { a.scale } else { 0.0 };
    s == 0.0 && {
        let r = a.offset.rem_euclid(TAU);
        r < 1e-12 || TAU - r < 1e-12
    }
}

fn peephole(mut gates: Vec<Gate>) -> Vec<Gate> {
    loop {
        let mut changed = false;
        let mut alive = vec![true; gates.len()];
        for i in 0..gates.len() {
            if !alive[i] {
                continue;
            }
            if let GateKind::Rz(a) = &gates[i].kind {
                if is_trivial(a) {
                    alive[i] = false;
                    changed = true;
                    continue;
                }
            }
            let Some(j) = (i + 1..gates.len()).find(|&j| alive[j] && gates[j].qubits.iter().any(|q| gates[i].qubits.contains(q)))
            else {
                continue;
            };
            if gates[j].qubits != gates[i].qubits {
                continue;
            }
            match (&gates[i].kind, &gates[j].kind) {
                (GateKind::Rz(a), GateKind::Rz(b)) => {
                    if let Some(m) = merged(a, b) {
                        gates[j].kind = GateKind::Rz(m);
                        alive[i] = false;
                        changed = true;
                    }
                }
                (GateKind::Cnot, GateKind::Cnot) | (GateKind::X, GateKind::X) => {
                    alive[i] = false;
                    alive[j] = false;
                    changed = true;
                }
                (GateKind::Sx, GateKind::Sx) => {
                    gates[j].kind = GateKind::X;
                    alive[i] = false;
                    changed = true;
                }
                _ => {}
            }
        }
        gates = gates.into_iter().zip(alive).filter_map(|(g, keep)| keep.then_some(g)).collect();
        if !changed {
            return gates;
        }
    }
}

/// Lowers every gate to `{rz, sx, x, cx}` and applies the peephole pass.
/// Parameter slots survive: each rotation carries its angle on one `rz`.
pub fn transpile_basis(c: &Circuit) -> Result<Circuit> {
    let mut out = Vec::with_capacity(c.len() * 4);
    for g in c.gates() {
        let q = &g.qubits;
        match &g.kind {
            GateKind::X | GateKind::Sx | GateKind::Rz(_) | GateKind::Cnot => out.push(g.clone()),
            GateKind::SxDg => out.extend([Gate::x(q[0]), Gate::sx(q[0])]),
            GateKind::Rxx(a) => pauli_rotation(two_qubit_pauli(q[0], q[1], 'X'), *a, &mut out),
            GateKind::Ryy(a) => pauli_rotation(two_qubit_pauli(q[0], q[1], 'Y'), *a, &mut out),
            GateKind::Rzz(a) => pauli_rotation(two_qubit_pauli(q[0], q[1], 'Z'), *a, &mut out),
            GateKind::PauliEvolution(p, a) => pauli_rotation(*p, *a, &mut out),
        }
    }
    c.with_gates(peephole(out))
}

/// Qubit connectivity used to flag non-local two-qubit gates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub name: String,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    /// Nearest neighbours on `0 - 1 - … - (n-1)`.
    pub fn line(n: usize) -> Self {
        Topology {
            name: format!("line{n}"),
            edges: (1..n).map(|q| (q - 1, q)).collect(),
        }
    }

    pub fn from_edges(name: &str, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Topology {
            name: name.to_string(),
            edges: edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect(),
        }
    }

    pub fn connects(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
    pub two_qubit: usize,
    pub depth: usize,
    pub width: usize,
    /// `d·w`.
    pub heuristic: usize,
    pub epsilon: f64,
    /// `d·w·ε`; the circuit counts as feasible below one.
    pub ratio: f64,
    pub feasible: bool,
    pub topology: Option<String>,
    /// Qubit pairs acted on by multi-qubit gates without a connecting edge.
    pub violations: Vec<(usize, usize)>,
}

/// ASAP depth: each gate starts after the latest gate on any of its qubits.
pub fn depth(c: &Circuit) -> usize {
    let mut level = vec![0usize; c.n_qubits()];
    for g in c.gates() {
        let d = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            level[q] = d;
        }
    }
    level.into_iter().max().unwrap_or(0)
}

pub fn report(c: &Circuit, epsilon: f64, topology: Option<&Topology>) -> ResourceReport {
    let counts: BTreeMap<String, usize> = c.counts().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let d = depth(c);
    let w = c.n_qubits();
    let mut violations = BTreeSet::new();
    if let Some(t) = topology {
        for g in c.gates().iter().filter(|g| g.arity() > 1) {
            for (i, &a) in g.qubits.iter().enumerate() {
                for &b in &g.qubits[i + 1..] {
                    if !t.connects(a, b) {
                        violations.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
    }
    let ratio = (d * w) as f64 * epsilon;
    ResourceReport {
        total: c.len(),
        two_qubit: c.gates().iter().filter(|g| g.arity() > 1).count(),
        counts,
        depth: d,
        width: w,
        heuristic: d * w,
        epsilon,
        ratio,
        feasible: ratio < 1.0,
        topology: topology.map(|t| t.name.clone()),
        violations: violations.into_iter().collect(),
    }
}

impl ResourceReport {
    pub fn count(&self, kind: &str) -> usize {
        self.counts.get(kind).copied().unwrap_or(0)
    }

    pub const CSV_HEADER: &'static str = "label,rz,sx,x,cx,other,total,depth,width,dw,epsilon,ratio,feasible,violations";

    pub fn csv_row(&self, label: &str) -> String {
        let basis: usize = BASIS.iter().map(|k| self.count(k)).sum();
        let violations: Vec<String> = self.violations.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!(
            "{label},{},{},{},{},{},{},{},{},{},{},{:.6e},{},{}",
            self.count("rz"),
            self.count("sx"),
            self.count("x"),
            self.count("cx"),
            self.total - basis,
            self.total,
            self.depth,
            self.width,
            self.heuristic,
            self.epsilon,
            self.ratio,
            self.feasible,
            violations.join(" ")
        )
    }

    /// Aligned table, one row per labelled report.
    pub fn table(rows: &[(String, ResourceReport)]) -> String {
        let lw = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(5);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<lw$} {:>6} {:>6} {:>6} {:>6} {:>7} {:>6} {:>5} {:>8} {:>10}  feasible",
            "label", "rz", "sx", "x", "cx", "total", "depth", "width", "d*w", "d*w*eps"
        );
        for (label, r) in rows {
            let _ = writeln!(
                s,
                "{:<lw$} {:>6} {:>6} {:>6} {:>6} {:>7} {:>6} {:>5} {:>8} {:>10.4}  {}{}",
                label,
                r.count("rz"),
                r.count("sx"),
                r.count("x"),
                r.count("cx"),
                r.total,
                r.depth,
                r.width,
                r.heuristic,
                r.ratio,
                if r.feasible { "yes" } else { "no" },
                if r.violations.is_empty() {
                    String::new()
                } else {
                    format!(
                        "  (off-topology pairs: {})",
                        r.violations.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(", ")
                    )
                }
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{fidelity, run_with_params};
    use proptest::prelude::*;

    fn only_basis(c: &Circuit) -> bool {
        c.gates().iter().all(|g| BASIS.contains(&g.kind.name()))
    }

    fn equivalent(a: &Circuit, b: &Circuit, params: &[f64]) -> f64 {
        // a fixed entangled superposition in front of both, so relative phases matter
        let n = a.n_qubits();
        let mut prep = Circuit::new(n, a.n_params());
        for q in 0..n {
            prep.push(Gate::sx(q)).unwrap();
            prep.push(Gate::rz(q, Angle::fixed(0.7 * q as f64 + 0.2))).unwrap();
        }
        for q in 1..n {
            prep.push(Gate::cnot(q - 1, q)).unwrap();
            prep.push(Gate::sx(q)).unwrap();
        }
        let mut ca = prep.clone();
        ca.append(a).unwrap();
        let mut cb = prep;
        cb.append(b).unwrap();
        fidelity(&run_with_params(&ca, params, 0).unwrap(), &run_with_params(&cb, params, 0).unwrap())
    }

    #[test]
    fn rzz_is_three_gates() {
        let mut c = Circuit::new(2, 0);
        c.push(Gate::rzz(0, 1, Angle::fixed(0.4))).unwrap();
        let t = transpile_basis(&c).unwrap();
        let names: Vec<&str> = t.gates().iter().map(|g| g.kind.name()).collect();
        assert_eq!(names, ["cx", "rz", "cx"]);
        assert!(equivalent(&c, &t, &[]) > 1.0 - 1e-12);
    }

    #[test]
    fn rxx_and_ryy_are_equivalent() {
        for g in [Gate::rxx(0, 1, Angle::fixed(0.9)), Gate::ryy(1, 2, Angle::fixed(-1.3))] {
            let mut c = Circuit::new(3, 0);
            c.push(g).unwrap();
            let t = transpile_basis(&c).unwrap();
            assert!(only_basis(&t));
            assert!(equivalent(&c, &t, &[]) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn basis_circuits_only_get_peephole_merges() {
        let mut c = Circuit::new(2, 1);
        c.extend([
            Gate::rz(0, Angle::fixed(0.3)),
            Gate::rz(0, Angle::param(0, 2.0)),
            Gate::cnot(0, 1),
            Gate::cnot(0, 1),
            Gate::sx(1),
            Gate::x(1),
            Gate::x(1),
            Gate::rz(1, Angle::fixed(TAU)),
        ])
        .unwrap();
        let t = transpile_basis(&c).unwrap();
        let names: Vec<&str> = t.gates().iter().map(|g| g.kind.name()).collect();
        assert_eq!(names, ["rz", "sx"]);
        assert!(equivalent(&c, &t, &[0.37]) > 1.0 - 1e-12);
    }

    #[test]
    fn empty_circuit_report() {
        let r = report(&Circuit::new(4, 0), 1e-3, None);
        assert_eq!((r.depth, r.total, r.width), (0, 0, 4));
        assert!(r.feasible);
    }

    #[test]
    fn feasibility_threshold() {
        let mut c = Circuit::new(2, 0);
        for _ in 0..10 {
            c.push(Gate::cnot(0, 1)).unwrap();
        }
        // d = 10, w = 2
        assert!(report(&c, 0.049, None).feasible);
        assert!(!report(&c, 0.05, None).feasible);
    }

    #[test]
    fn topology_violations_are_listed() {
        let mut c = Circuit::new(4, 0);
        c.extend([Gate::cnot(0, 1), Gate::cnot(0, 3), Gate::cnot(3, 0)]).unwrap();
        let r = report(&c, 1e-3, Some(&Topology::line(4)));
        assert_eq!(r.violations, vec![(0, 3)]);
        let text = ResourceReport::table(&[("demo".into(), r.clone())]);
        assert!(text.contains("off-topology pairs: 0-3"));
        assert_eq!(r.csv_row("demo").split(',').count(), ResourceReport::CSV_HEADER.split(',').count());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let q = 0..n;
        let angle = prop_oneof![(-4.0f64..4.0).prop_map(Angle::fixed), (-2.0f64..2.0).prop_map(|s| Angle::param(0, s))];
        let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
        let label = proptest::collection::vec(0u8..4, n).prop_filter("non-identity", |v| v.iter().any(|&x| x != 0));
        prop_oneof![
            q.clone().prop_map(Gate::x),
            q.clone().prop_map(Gate::sx),
            q.clone().prop_map(Gate::sxdg),
            (q.clone(), angle.clone()).prop_map(|(q, a)| Gate::rz(q, a)),
            pair.clone().prop_map(|(a, b)| Gate::cnot(a, b)),
            (pair.clone(), angle.clone()).prop_map(|((a, b), t)| Gate::rxx(a, b, t)),
            (pair.clone(), angle.clone()).prop_map(|((a, b), t)| Gate::ryy(a, b, t)),
            (pair, angle.clone()).prop_map(|((a, b), t)| Gate::rzz(a, b, t)),
            (label, angle).prop_map(|(l, a)| {
                let s: String = l.iter().map(|&x| ['I', 'X', 'Y', 'Z'][x as usize]).collect();
                Gate::pauli_evolution(PauliString::from_label(&s).unwrap(), a)
            }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn transpilation_preserves_state(gates in proptest::collection::vec(arb_gate(4), 0..25), theta in -3.0f64..3.0) {
            let mut c = Circuit::new(4, 1);
            c.extend(gates).unwrap();
            let t = transpile_basis(&c).unwrap();
            prop_assert!(only_basis(&t));
            prop_assert!(equivalent(&c, &t, &[theta]) > 1.0 - 1e-10);
        }

        #[test]
        fn depth_is_monotone_under_insertion(gates in proptest::collection::vec(arb_gate(4), 0..20), extra in arb_gate(4), at in 0usize..20) {
            let mut c = Circuit::new(4, 1);
            c.extend(gates.clone()).unwrap();
            let mut longer = gates;
            longer.insert(at.min(longer.len()), extra);
            let mut c2 = Circuit::new(4, 1);
            c2.extend(longer).unwrap();
            prop_assert!(depth(&c2) >= depth(&c));
            let r = report(&c2, 1e-3, None);
            prop_assert_eq!(r.counts.values().sum::<usize>(), r.total);
            prop_assert!(r.depth <= r.total);
        }
    }
}
