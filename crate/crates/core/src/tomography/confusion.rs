use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TomographyError;
use crate::pauli_core::BinaryVector;

const TOL: f64 = 1e-9;

/// Serialized form: `M[observed][prepared]`, columns summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConfusionSpec {
    /// One 2x2 matrix per qubit.
    Tensor { qubits: Vec<[[f64; 2]; 2]> },
    /// `2^n x 2^n` matrix indexed by outcome bits (qubit `j` is bit `j`).
    Full { n: usize, matrix: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq)]
enum Model {
    Tensor { m: Vec<Matrix2<f64>>, inv: Vec<Matrix2<f64>> },
    Full { m: DMatrix<f64>, inv: DMatrix<f64> },
}

/// Readout confusion `p = M q` with its inverse cached.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionModel {
    n: usize,
    model: Model,
}

fn check_stochastic(
    cols: usize,
    col_sum: impl Fn(usize) -> f64,
    entries: impl Iterator<Item = f64>,
) -> Result<(), TomographyError> {
    for v in entries {
        if !(-TOL..=1.0 + TOL).contains(&v) {
            return Err(TomographyError::InvalidConfusion(format!("entry {v} is not a probability")));
        }
    }
    for c in 0..cols {
        let s = col_sum(c);
        if (s - 1.0).abs() > 1e-6 {
            return Err(TomographyError::InvalidConfusion(format!("column {c} sums to {s}")));
        }
    }
    Ok(())
}

impl ConfusionModel {
    pub fn identity(n: usize) -> Self {
        Self::from_flip_rates(&vec![(0.0, 0.0); n]).expect("identity is invertible")
    }

    /// Per-qubit model from `(P(read 1 | 0), P(read 0 | 1))`.
    pub fn from_flip_rates(rates: &[(f64, f64)]) -> Result<Self, TomographyError> {
        let qubits = rates.iter().map(|&(p, q)| [[1.0 - p, q], [p, 1.0 - q]]).collect();
        Self::from_spec(&ConfusionSpec::Tensor { qubits })
    }

    pub fn from_spec(spec: &ConfusionSpec) -> Result<Self, TomographyError> {
        match spec {
            ConfusionSpec::Tensor { qubits } => {
                let mut m = Vec::with_capacity(qubits.len());
                let mut inv = Vec::with_capacity(qubits.len());
                for (j, a) in qubits.iter().enumerate() {
                    let mj = Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
                    check_stochastic(2, |c| mj.column(c).sum(), mj.iter().copied())?;
                    let ij = mj
                        .try_inverse()
                        .filter(|i| i.iter().all(|v| v.is_finite()))
                        .ok_or_else(|| TomographyError::SingularConfusion(format!("qubit {j}")))?;
                    if (ij * mj - Matrix2::identity()).amax() > TOL {
                        return Err(TomographyError::SingularConfusion(format!("qubit {j}")));
                    }
                    m.push(mj);
                    inv.push(ij);
                }
                Ok(ConfusionModel { n: qubits.len(), model: Model::Tensor { m, inv } })
            }
            ConfusionSpec::Full { n, matrix } => {
                let d = 1usize << n;
                if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                    return Err(TomographyError::InvalidConfusion(format!("expected a {d}x{d} matrix")));
                }
                let m = DMatrix::from_fn(d, d, |r, c| matrix[r][c]);
                check_stochastic(d, |c| m.column(c).sum(), m.iter().copied())?;
                let inv =
                    m.clone().try_inverse().ok_or_else(|| TomographyError::SingularConfusion("full matrix".into()))?;
                if (&inv * &m - DMatrix::identity(d, d)).amax() > TOL {
                    return Err(TomographyError::SingularConfusion("full matrix is ill-conditioned".into()));
                }
                Ok(ConfusionModel { n: *n, model: Model::Full { m, inv } })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn to_spec(&self) -> ConfusionSpec {
        match &self.model {
            Model::Tensor { m, .. } => ConfusionSpec::Tensor {
                qubits: m.iter().map(|a| [[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]]).collect(),
            },
            Model::Full { m, .. } => ConfusionSpec::Full {
                n: self.n,
                matrix: (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect(),
            },
        }
    }

    /// `M^{-1} M` minus the identity, largest entry.
    pub fn inverse_residual(&self) -> f64 {
        match &self.model {
            Model::Tensor { m, inv } => {
                m.iter().zip(inv).map(|(a, i)| (i * a - Matrix2::identity()).amax()).fold(0.0, f64::max)
            }
            Model::Full { m, inv } => (inv * m - DMatrix::identity(m.nrows(), m.nrows())).amax(),
        }
    }

    /// `sum_z [M^{-1}]_{z,b} omega (-1)^{mask . z}`, the per-shot corrected value of
    /// an observable with diagonal form `omega Z^mask`.
    pub fn corrected_value(&self, mask: &BinaryVector, minus: bool, b: &BinaryVector) -> f64 {
        let v: f64 = match &self.model {
            Model::Tensor { inv, .. } => mask
                .ones_indices()
                .into_iter()
                .map(|j| {
                    let col = b.get(j) as usize;
                    inv[j][(0, col)] - inv[j][(1, col)]
                })
                .product(),
            Model::Full { inv, .. } => {
                let col = b.bits() as usize;
                (0..inv.nrows())
                    .map(|z| {
                        let s = if (z as u64 & mask.bits()).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                        s * inv[(z, col)]
                    })
                    .sum()
            }
        };
        if minus {
            -v
        } else {
            v
        }
    }

    /// `M q` for a distribution indexed by outcome bits.
    pub fn apply_to_distribution(&self, q: &[f64]) -> Vec<f64> {
        match &self.model {
            Model::Full { m, .. } => (m * nalgebra::DVector::from_column_slice(q)).iter().copied().collect(),
            Model::Tensor { m, .. } => {
                let mut p = q.to_vec();
                for (j, a) in m.iter().enumerate() {
                    let bit = 1usize << j;
                    for z in 0..p.len() {
                        if z & bit == 0 {
                            let (p0, p1) = (p[z], p[z | bit]);
                            p[z] = a[(0, 0)] * p0 + a[(0, 1)] * p1;
                            p[z | bit] = a[(1, 0)] * p0 + a[(1, 1)] * p1;
                        }
                    }
                }
                p
            }
        }
    }

    /// Draws the observed outcome for a prepared outcome `b`.
    pub fn corrupt<R: Rng + ?Sized>(&self, b: &BinaryVector, rng: &mut R) -> BinaryVector {
        match &self.model {
            Model::Tensor { m, .. } => {
                let mut out = *b;
                for (j, a) in m.iter().enumerate() {
                    let col = b.get(j) as usize;
                    out.set(j, rng.gen::<f64>() < a[(1, col)]);
                }
                out
            }
            Model::Full { m, .. } => {
                let col = b.bits() as usize;
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for r in 0..m.nrows() {
                    acc += m[(r, col)];
                    if u < acc {
                        return BinaryVector::from_bits(self.n, r as u64);
                    }
                }
                BinaryVector::from_bits(self.n, (m.nrows() - 1) as u64)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_corrects_nothing() {
        let c = ConfusionModel::identity(3);
        let mask: BinaryVector = "101".parse().unwrap();
        let b: BinaryVector = "100".parse().unwrap();
        assert_eq!(c.corrected_value(&mask, false, &b), -1.0);
        assert_eq!(c.inverse_residual(), 0.0);
    }

    #[test]
    fn tensor_matches_full() {
        let t = ConfusionModel::from_flip_rates(&[(0.02, 0.05), (0.01, 0.03)]).unwrap();
        let ConfusionSpec::Tensor { qubits } = t.to_spec() else { unreachable!() };
        let mut full = vec![vec![0.0; 4]; 4];
        for (r, row) in full.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = qubits[0][r & 1][c & 1] * qubits[1][r >> 1][c >> 1];
            }
        }
        let f = ConfusionModel::from_spec(&ConfusionSpec::Full { n: 2, matrix: full }).unwrap();
        assert!(f.inverse_residual() < 1e-9);
        for mask in 0..4 {
            for b in 0..4 {
                let (m, b) = (BinaryVector::from_bits(2, mask), BinaryVector::from_bits(2, b));
                assert_abs_diff_eq!(t.corrected_value(&m, true, &b), f.corrected_value(&m, true, &b), epsilon = 1e-12);
            }
        }
        let q = [0.1, 0.2, 0.3, 0.4];
        for (a, b) in t.apply_to_distribution(&q).iter().zip(f.apply_to_distribution(&q)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_and_invalid_rejected() {
        assert!(matches!(ConfusionModel::from_flip_rates(&[(0.5, 0.5)]), Err(TomographyError::SingularConfusion(_))));
        assert!(ConfusionModel::from_flip_rates(&[(0.2, 1.3)]).is_err());
    }
}
