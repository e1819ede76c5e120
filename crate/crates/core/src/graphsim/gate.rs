use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::pauli_core::CycleGraph;
use crate::Real;

/// Measurement basis of one qubit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn as_char(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'X' => Some(Basis::X),
            'Y' => Some(Basis::Y),
            'Z' => Some(Basis::Z),
            _ => None,
        }
    }
}

pub fn bases_to_string(bases: &[Basis]) -> String {
    bases.iter().map(|b| b.as_char()).collect()
}

pub fn parse_bases(s: &str) -> Result<Vec<Basis>, SimError> {
    s.chars()
        .map(|c| Basis::from_char(c).ok_or_else(|| SimError::Parse(format!("invalid basis '{c}' in \"{s}\""))))
        .collect()
}

/// One gate. `Rxy` rotates by `theta` about `cos(phi) X + sin(phi) Y`;
/// `Rxx(theta)` is `exp(-i theta X X)`.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub enum GateOp {
    Rz { qubit: usize, theta: f64 },
    Rxy { qubit: usize, phi: f64, theta: f64 },
    Cz { a: usize, b: usize },
    Rxx { a: usize, b: usize, theta: f64 },
    BasisRot { qubit: usize, basis: Basis },
}

pub type Mat2 = [[Complex<f64>; 2]; 2];

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

const IDENTITY: Mat2 = [
    [Complex { re: 1.0, im: 0.0 }, Complex { re: 0.0, im: 0.0 }],
    [Complex { re: 0.0, im: 0.0 }, Complex { re: 1.0, im: 0.0 }],
];

pub fn rz_matrix(theta: f64) -> Mat2 {
    [[Complex::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex::from_polar(1.0, theta / 2.0)]]
}

pub fn rxy_matrix(phi: f64, theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    let mis = c(0.0, -s);
    [[c(co, 0.0), mis * Complex::from_polar(1.0, -phi)], [mis * Complex::from_polar(1.0, phi), c(co, 0.0)]]
}

/// Rotation taking the `+1` eigenvector of the basis Pauli to `|0>`.
pub fn basis_matrix(basis: Basis) -> Mat2 {
    let h = FRAC_1_SQRT_2;
    match basis {
        Basis::X => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        // H . S^dagger
        Basis::Y => [[c(h, 0.0), c(0.0, -h)], [c(h, 0.0), c(0.0, h)]],
        Basis::Z => IDENTITY,
    }
}

impl GateOp {
    pub fn ry(qubit: usize, theta: f64) -> Self {
        GateOp::Rxy { qubit, phi: FRAC_PI_2, theta }
    }

    /// Qubits acted on (one or two).
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            GateOp::Rz { qubit, .. } | GateOp::Rxy { qubit, .. } | GateOp::BasisRot { qubit, .. } => vec![qubit],
            GateOp::Cz { a, b } | GateOp::Rxx { a, b, .. } => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateOp::Cz { .. } | GateOp::Rxx { .. })
    }

    /// 2x2 matrix of a single-qubit gate.
    pub fn matrix(&self) -> Option<Mat2> {
        match *self {
            GateOp::Rz { theta, .. } => Some(rz_matrix(theta)),
            GateOp::Rxy { phi, theta, .. } => Some(rxy_matrix(phi, theta)),
            GateOp::BasisRot { basis, .. } => Some(basis_matrix(basis)),
            _ => None,
        }
    }

    pub fn matrix_in<T: Real>(&self) -> Option<[[Complex<T>; 2]; 2]> {
        self.matrix().map(|m| {
            let cv = |z: Complex<f64>| Complex::new(T::from_f64_lossy(z.re), T::from_f64_lossy(z.im));
            [[cv(m[0][0]), cv(m[0][1])], [cv(m[1][0]), cv(m[1][1])]]
        })
    }

    fn validate(&self, n: usize) -> Result<(), SimError> {
        let t = self.targets();
        if t.iter().any(|&q| q >= n) {
            return Err(SimError::InvalidGate(format!("{self:?}: target out of range for {n} qubits")));
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(SimError::InvalidGate(format!("{self:?}: repeated target")));
        }
        let finite = match *self {
            GateOp::Rz { theta, .. } | GateOp::Rxx { theta, .. } => theta.is_finite(),
            GateOp::Rxy { phi, theta, .. } => phi.is_finite() && theta.is_finite(),
            _ => true,
        };
        if !finite {
            return Err(SimError::InvalidGate(format!("{self:?}: non-finite angle")));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    gate: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Basis>,
}

impl From<GateOp> for GateRecord {
    fn from(g: GateOp) -> Self {
        let rec = |gate: &str, targets: Vec<usize>, angle, phi, basis| GateRecord {
            gate: gate.to_string(),
            targets,
            angle,
            phi,
            basis,
        };
        match g {
            GateOp::Rz { qubit, theta } => rec("RZ", vec![qubit], Some(theta), None, None),
            GateOp::Rxy { qubit, phi, theta } => rec("RXY", vec![qubit], Some(theta), Some(phi), None),
            GateOp::Cz { a, b } => rec("CZ", vec![a, b], None, None, None),
            GateOp::Rxx { a, b, theta } => rec("RXX", vec![a, b], Some(theta), None, None),
            GateOp::BasisRot { qubit, basis } => rec("BASIS_ROT", vec![qubit], None, None, Some(basis)),
        }
    }
}

impl TryFrom<GateRecord> for GateOp {
    type Error = String;

    fn try_from(r: GateRecord) -> Result<Self, String> {
        let need_angle = || r.angle.ok_or_else(|| format!("{} gate needs an angle", r.gate));
        let one = || match r.targets.as_slice() {
            [q] => Ok(*q),
            _ => Err(format!("{} gate needs one target", r.gate)),
        };
        let two = || match r.targets.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(format!("{} gate needs two targets", r.gate)),
        };
        match r.gate.as_str() {
            "RZ" => Ok(GateOp::Rz { qubit: one()?, theta: need_angle()? }),
            "RXY" => Ok(GateOp::Rxy { qubit: one()?, phi: r.phi.unwrap_or(0.0), theta: need_angle()? }),
            "CZ" => {
                let (a, b) = two()?;
                Ok(GateOp::Cz { a, b })
            }
            "RXX" => {
                let (a, b) = two()?;
                Ok(GateOp::Rxx { a, b, theta: need_angle()? })
            }
            "BASIS_ROT" => {
                Ok(GateOp::BasisRot { qubit: one()?, basis: r.basis.ok_or("BASIS_ROT gate needs a basis")? })
            }
            other => Err(format!("unknown gate kind \"{other}\"")),
        }
    }
}

/// Layered circuit; gates within a layer act on disjoint qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    n: usize,
    layers: Vec<Vec<GateOp>>,
}

#[derive(Deserialize)]
struct RawCircuit {
    n: usize,
    layers: Vec<Vec<GateOp>>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = SimError;

    fn try_from(raw: RawCircuit) -> Result<Self, SimError> {
        let mut c = Circuit::new(raw.n);
        for layer in raw.layers {
            c.push_layer(layer)?;
        }
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, layers: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<GateOp>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateOp> {
        self.layers.iter().flatten()
    }

    pub fn push_layer(&mut self, layer: Vec<GateOp>) -> Result<(), SimError> {
        let mut used = 0u64;
        for g in &layer {
            g.validate(self.n)?;
            for q in g.targets() {
                if used >> q & 1 == 1 {
                    return Err(SimError::InvalidGate(format!("qubit {q} used twice in one layer")));
                }
                used |= 1 << q;
            }
        }
        self.layers.push(layer);
        Ok(())
    }

    /// Places each gate in the earliest layer after every earlier gate on its qubits.
    pub fn from_gates_asap(n: usize, gates: &[GateOp]) -> Result<Self, SimError> {
        let mut frontier = vec![0usize; n];
        let mut layers: Vec<Vec<GateOp>> = Vec::new();
        for g in gates {
            g.validate(n)?;
            let t = g.targets();
            let l = t.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            if layers.len() <= l {
                layers.resize_with(l + 1, Vec::new);
            }
            layers[l].push(*g);
            for q in t {
                frontier[q] = l + 1;
            }
        }
        let mut c = Circuit::new(n);
        for layer in layers {
            c.push_layer(layer)?;
        }
        Ok(c)
    }

    /// Qubits touched by no gate of layer `l`.
    pub fn idle_qubits(&self, l: usize) -> Vec<usize> {
        let mut used = vec![false; self.n];
        for g in &self.layers[l] {
            for q in g.targets() {
                used[q] = true;
            }
        }
        (0..self.n).filter(|&q| !used[q]).collect()
    }

    /// Duration of layer `l`: `t2` if it contains a two-qubit gate, else `t1`.
    pub fn layer_time(&self, l: usize, t1: f64, t2: f64) -> f64 {
        if self.layers[l].iter().any(GateOp::is_two_qubit) {
            t2
        } else {
            t1
        }
    }

    pub fn count_two_qubit(&self) -> usize {
        self.gates().filter(|g| g.is_two_qubit()).count()
    }
}

/// Which entangling gate the preparation circuit is written in.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum PrepForm {
    Cz,
    Rxx,
}

/// Cycle edges grouped into matchings: two for even `n`, three for odd `n`.
pub fn edge_coloring(graph: &CycleGraph) -> Vec<Vec<(usize, usize)>> {
    let n = graph.n();
    let mut colors: Vec<Vec<(usize, usize)>> = vec![Vec::new(), Vec::new()];
    for j in 0..n {
        let e = (j, graph.next(j));
        if n % 2 == 1 && j == n - 1 {
            colors.push(vec![e]);
        } else {
            colors[j % 2].push(e);
        }
    }
    colors
}

pub fn preparation_circuit(graph: &CycleGraph, form: PrepForm) -> Result<Circuit, SimError> {
    let n = graph.n();
    let colors = edge_coloring(graph);
    let plus: Vec<GateOp> = (0..n).map(|q| GateOp::ry(q, FRAC_PI_2)).collect();
    match form {
        PrepForm::Cz => {
            let mut c = Circuit::new(n);
            c.push_layer(plus)?;
            for color in colors {
                c.push_layer(color.into_iter().map(|(a, b)| GateOp::Cz { a, b }).collect())?;
            }
            Ok(c)
        }
        PrepForm::Rxx => {
            // CZ = RZ(-pi/2)^{(x)2} exp(-i pi/4 ZZ) up to phase, and
            // exp(-i pi/4 ZZ) = (B^+ (x) B^+) RXX(pi/4) (B (x) B) with B = RY(-pi/2).
            let mut gates = plus;
            let mut degree = vec![0usize; n];
            for (a, b) in colors.into_iter().flatten() {
                gates.push(GateOp::ry(a, -FRAC_PI_2));
                gates.push(GateOp::ry(b, -FRAC_PI_2));
                gates.push(GateOp::Rxx { a, b, theta: FRAC_PI_4 });
                gates.push(GateOp::ry(a, FRAC_PI_2));
                gates.push(GateOp::ry(b, FRAC_PI_2));
                degree[a] += 1;
                degree[b] += 1;
            }
            // Every RZ commutes with the remaining ZZ-type interactions, so defer them.
            for (q, d) in degree.into_iter().enumerate() {
                gates.push(GateOp::Rz { qubit: q, theta: -FRAC_PI_2 * d as f64 });
            }
            Circuit::from_gates_asap(n, &merge_single_qubit_runs(n, &gates))
        }
    }
}

/// `(phi, theta, alpha)` with `U = e^{i gamma} RZ(alpha) RXY(phi, theta)`.
pub fn decompose_rz_rxy(u: &Mat2) -> (f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let v: Vec<Complex<f64>> = {
        let g = Complex::from_polar(1.0, -det.arg() / 2.0);
        vec![u[0][0] * g, u[0][1] * g, u[1][0] * g, u[1][1] * g]
    };
    let (co, s) = (v[0].norm(), v[2].norm());
    let theta = 2.0 * s.atan2(co);
    const EPS: f64 = 1e-12;
    let (phi, alpha) = if s < EPS {
        (0.0, -2.0 * v[0].arg())
    } else if co < EPS {
        (0.0, 2.0 * (v[2].arg() + FRAC_PI_2))
    } else {
        let alpha = -2.0 * v[0].arg();
        (v[2].arg() + FRAC_PI_2 - alpha / 2.0, alpha)
    };
    (wrap_angle(phi), theta, wrap_angle(alpha))
}

/// Angle mapped into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

const MERGE_EPS: f64 = 1e-12;

fn emit_single(out: &mut Vec<GateOp>, q: usize, u: &Mat2) {
    let (phi, theta, alpha) = decompose_rz_rxy(u);
    if theta.abs() > MERGE_EPS {
        out.push(GateOp::Rxy { qubit: q, phi, theta });
    }
    // RZ(2 pi) = -I is a global phase.
    if alpha.abs() > MERGE_EPS {
        out.push(GateOp::Rz { qubit: q, theta: alpha });
    }
}

/// Fuses each maximal run of single-qubit gates on a qubit into at most `RXY` then `RZ`.
pub fn merge_single_qubit_runs(n: usize, gates: &[GateOp]) -> Vec<GateOp> {
    let mut pending: Vec<Option<Mat2>> = vec![None; n];
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        if let Some(m) = g.matrix() {
            let q = g.targets()[0];
            let acc = pending[q].unwrap_or(IDENTITY);
            pending[q] = Some(mat_mul(&m, &acc));
        } else {
            for q in g.targets() {
                if let Some(u) = pending[q].take() {
                    emit_single(&mut out, q, &u);
                }
            }
            out.push(*g);
        }
    }
    for (q, p) in pending.into_iter().enumerate() {
        if let Some(u) = p {
            emit_single(&mut out, q, &u);
        }
    }
    out
}

/// Preparation followed by basis changes, merged, without `RZ` gates that only
/// precede a computational-basis measurement.
pub fn measurement_circuit(prep: &Circuit, bases: &[Basis]) -> Result<Circuit, SimError> {
    let n = prep.n();
    if bases.len() != n {
        return Err(SimError::DimensionMismatch { expected: n, found: bases.len() });
    }
    let mut gates: Vec<GateOp> = prep.gates().copied().collect();
    for (q, &b) in bases.iter().enumerate() {
        if b != Basis::Z {
            gates.push(GateOp::BasisRot { qubit: q, basis: b });
        }
    }
    let mut merged = merge_single_qubit_runs(n, &gates);
    let mut settled = vec![false; n];
    let mut keep = vec![true; merged.len()];
    for (i, g) in merged.iter().enumerate().rev() {
        if let GateOp::Rz { qubit, .. } = *g {
            if !settled[qubit] {
                keep[i] = false;
                continue;
            }
        }
        for q in g.targets() {
            settled[q] = true;
        }
    }
    let mut idx = 0;
    merged.retain(|_| {
        let k = keep[idx];
        idx += 1;
        k
    });
    Circuit::from_gates_asap(n, &merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_up_to_phase(a: &Mat2, b: &Mat2) -> bool {
        // |tr(a^dagger b)| = 2 for equal-up-to-phase unitaries.
        let mut tr = c(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                tr += a[j][i].conj() * b[j][i];
            }
        }
        (tr.norm() - 2.0).abs() < 1e-10
    }

    #[test]
    fn decomposition_reconstructs() {
        let samples = [
            basis_matrix(Basis::X),
            basis_matrix(Basis::Y),
            rz_matrix(0.3),
            mat_mul(&rxy_matrix(0.7, 1.1), &rz_matrix(-2.0)),
            mat_mul(&rxy_matrix(FRAC_PI_2, PI), &rxy_matrix(0.0, PI)),
            IDENTITY,
        ];
        for u in samples {
            let (phi, theta, alpha) = decompose_rz_rxy(&u);
            let r = mat_mul(&rz_matrix(alpha), &rxy_matrix(phi, theta));
            assert!(close_up_to_phase(&u, &r), "{u:?}");
        }
    }

    #[test]
    fn even_cycle_two_cz_layers() {
        let g = CycleGraph::new(6).unwrap();
        let c = preparation_circuit(&g, PrepForm::Cz).unwrap();
        assert_eq!(c.depth(), 3);
        let l1: Vec<_> = c.layers()[1].iter().map(|g| g.targets()).collect();
        assert_eq!(l1, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        let l2: Vec<_> = c.layers()[2].iter().map(|g| g.targets()).collect();
        assert_eq!(l2, vec![vec![1, 2], vec![3, 4], vec![5, 0]]);
        let odd = preparation_circuit(&CycleGraph::new(5).unwrap(), PrepForm::Cz).unwrap();
        assert_eq!(odd.depth(), 4);
    }

    #[test]
    fn rxx_form_has_two_entangling_layers() {
        let g = CycleGraph::new(6).unwrap();
        let c = preparation_circuit(&g, PrepForm::Rxx).unwrap();
        assert_eq!(c.count_two_qubit(), 6);
        assert!(c.layers()[0].iter().all(|g| matches!(g, GateOp::Rxx { .. })));
        assert!(c.layers()[1].iter().all(|g| matches!(g, GateOp::Rxx { .. })));
    }

    #[test]
    fn measurement_circuit_drops_trailing_rz() {
        let g = CycleGraph::new(6).unwrap();
        let prep = preparation_circuit(&g, PrepForm::Rxx).unwrap();
        assert_eq!(prep.depth(), 4);
        let m = measurement_circuit(&prep, &[Basis::Z; 6]).unwrap();
        assert_eq!(m.depth(), 3);
        assert!(!m.gates().any(|g| matches!(g, GateOp::Rz { .. })));
        let mx = measurement_circuit(&prep, &[Basis::X; 6]).unwrap();
        assert_eq!(mx.depth(), 3);
        assert!(mx.layers()[2].iter().all(|g| matches!(g, GateOp::Rxy { .. })));
    }

    #[test]
    fn gate_json_round_trip() {
        let gates = vec![
            GateOp::Rz { qubit: 1, theta: 0.5 },
            GateOp::Rxy { qubit: 0, phi: 0.1, theta: 0.2 },
            GateOp::Cz { a: 0, b: 1 },
            GateOp::Rxx { a: 1, b: 2, theta: FRAC_PI_4 },
            GateOp::BasisRot { qubit: 2, basis: Basis::Y },
        ];
        let s = serde_json::to_string(&gates).unwrap();
        assert!(s.contains("\"gate\":\"RXX\""));
        let back: Vec<GateOp> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, gates);
        assert!(serde_json::from_str::<GateOp>(r#"{"gate":"CZ","targets":[0]}"#).is_err());
    }

    #[test]
    fn layer_disjointness_enforced() {
        let mut c = Circuit::new(3);
        let err = c.push_layer(vec![GateOp::Cz { a: 0, b: 1 }, GateOp::Rz { qubit: 1, theta: 0.0 }]);
        assert!(err.is_err());
        assert!(c.push_layer(vec![GateOp::Cz { a: 0, b: 3 }]).is_err());
    }
}
