use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConfusionModel, MeasurementPlan, PlannedStabilizer, ShotDataset, TomographyError};
use crate::pauli_core::{BinaryVector, PauliOperator, StabilizerGroup};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StabilizerEstimate<T: Real> {
    pub stabilizer: PauliOperator,
    /// X part of the stabilizer, which labels `S_x` for graph states.
    pub input: BinaryVector,
    pub clique: usize,
    pub shots: u64,
    pub mean: T,
    pub stderr: T,
    /// `|mean| > 1`, possible after readout correction.
    pub out_of_range: bool,
}

/// Sample covariances `Sigma_{S,T}` of the members of one clique.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CovarianceBlock<T: Real> {
    pub clique: usize,
    /// Indices into [`EstimationReport::estimates`].
    pub members: Vec<usize>,
    pub shots: u64,
    pub sigma: Vec<Vec<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EstimationReport<T: Real> {
    pub n: usize,
    pub spam_corrected: bool,
    pub estimates: Vec<StabilizerEstimate<T>>,
    pub blocks: Vec<CovarianceBlock<T>>,
}

impl<T: Real> EstimationReport<T> {
    pub fn find(&self, p: &PauliOperator) -> Option<&StabilizerEstimate<T>> {
        let u = p.unsigned();
        self.estimates.iter().find(|e| e.stabilizer.unsigned() == u)
    }

    /// Estimate of `<p>` with the sign of `p` applied.
    pub fn value_of(&self, p: &PauliOperator) -> Option<T> {
        self.find(p).map(|e| if e.stabilizer == *p { e.mean } else { -e.mean })
    }

    /// `Sigma_{S,T}` for estimates `i` and `j`, which must share a clique.
    pub fn covariance(&self, i: usize, j: usize) -> Result<T, TomographyError> {
        let (a, b) = (self.estimates.get(i), self.estimates.get(j));
        let (Some(a), Some(b)) = (a, b) else {
            return Err(TomographyError::UnknownStabilizer(format!("index {}", i.max(j))));
        };
        if a.clique != b.clique {
            return Err(TomographyError::CrossClique(a.stabilizer.to_string(), b.stabilizer.to_string()));
        }
        let block = &self.blocks[a.clique];
        let pos = |k| block.members.iter().position(|&m| m == k).expect("member of its block");
        Ok(block.sigma[pos(i)][pos(j)])
    }
}

fn estimate_with<T: Real>(
    plan: &MeasurementPlan,
    data: &ShotDataset,
    corrected: bool,
    value: impl Fn(&PlannedStabilizer, &BinaryVector) -> f64 + Sync,
) -> Result<EstimationReport<T>, TomographyError> {
    data.check(plan)?;
    let per_clique: Vec<(Vec<T>, Vec<Vec<T>>, u64)> = plan
        .cliques
        .par_iter()
        .zip(&data.cliques)
        .enumerate()
        .map(|(l, (clique, tally))| {
            let shots = tally.shots();
            if shots == 0 {
                return Err(TomographyError::NoShots(l));
            }
            let k = clique.members.len();
            let mut first = vec![T::zero(); k];
            let mut second = vec![vec![T::zero(); k]; k];
            for (b, &c) in &tally.tallies {
                let c = T::from_f64_lossy(c as f64);
                let v: Vec<T> = clique.members.iter().map(|m| T::from_f64_lossy(value(m, b))).collect();
                for s in 0..k {
                    first[s] += c * v[s];
                    for t in 0..=s {
                        second[s][t] += c * v[s] * v[t];
                    }
                }
            }
            let nt = T::from_f64_lossy(shots as f64);
            let mean: Vec<T> = first.into_iter().map(|f| f / nt).collect();
            let mut sigma = vec![vec![T::zero(); k]; k];
            for s in 0..k {
                for t in 0..=s {
                    let c = second[s][t] / nt - mean[s] * mean[t];
                    sigma[s][t] = c;
                    sigma[t][s] = c;
                }
            }
            Ok((mean, sigma, shots))
        })
        .collect::<Result<_, _>>()?;
    let mut estimates = Vec::with_capacity(plan.stabilizer_count());
    let mut blocks = Vec::with_capacity(plan.len());
    for (l, ((mean, sigma, shots), clique)) in per_clique.into_iter().zip(&plan.cliques).enumerate() {
        let start = estimates.len();
        let nt = T::from_f64_lossy(shots as f64);
        for (s, m) in clique.members.iter().enumerate() {
            let var = if sigma[s][s] > T::zero() { sigma[s][s] } else { T::zero() };
            estimates.push(StabilizerEstimate {
                stabilizer: m.stabilizer,
                input: m.stabilizer.xbits(),
                clique: l,
                shots,
                mean: mean[s],
                stderr: (var / nt).sqrt(),
                out_of_range: mean[s].abs() > T::one(),
            });
        }
        blocks.push(CovarianceBlock { clique: l, members: (start..estimates.len()).collect(), shots, sigma });
    }
    Ok(EstimationReport { n: plan.n, spam_corrected: corrected, estimates, blocks })
}

/// Raw estimates `mu_S = (1/N) sum_k omega_S (-1)^{f . b_k}` with covariance blocks.
pub fn estimate_expectations<T: Real>(
    plan: &MeasurementPlan,
    data: &ShotDataset,
) -> Result<EstimationReport<T>, TomographyError> {
    estimate_with(plan, data, false, |m, b| m.value(b))
}

/// Readout-corrected estimates: every shot contributes its inverse-confusion
/// column in place of the indicator of its outcome.
pub fn spam_correct<T: Real>(
    plan: &MeasurementPlan,
    data: &ShotDataset,
    confusion: &ConfusionModel,
) -> Result<EstimationReport<T>, TomographyError> {
    if confusion.n() != plan.n {
        return Err(TomographyError::DimensionMismatch { expected: plan.n, found: confusion.n() });
    }
    estimate_with(plan, data, true, |m, b| confusion.corrected_value(&m.mask, m.omega.is_minus(), b))
}

/// State fidelity with a stabilizer state and the witness `1/2 - F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FidelityEstimate<T: Real> {
    pub fidelity: T,
    pub stderr: T,
    pub witness: T,
    pub witness_stderr: T,
    /// Negative witness value: genuine multipartite entanglement detected.
    pub entangled: bool,
    pub spam_corrected: bool,
}

/// `F = 2^{-n} sum_S <S>` over the whole group; errors combine the covariance
/// blocks of each clique with weights `2^{-n}`.
pub fn fidelity_and_witness<T: Real>(
    report: &EstimationReport<T>,
    group: &StabilizerGroup,
) -> Result<FidelityEstimate<T>, TomographyError> {
    if group.n() != report.n {
        return Err(TomographyError::DimensionMismatch { expected: group.n(), found: report.n });
    }
    let index: HashMap<PauliOperator, usize> =
        report.estimates.iter().enumerate().map(|(i, e)| (e.stabilizer.unsigned(), i)).collect();
    // Weight per report entry: +-2^{-n} for group elements, 0 otherwise.
    let h = T::from_f64_lossy(0.5f64.powi(report.n as i32));
    let mut weight = vec![T::zero(); report.estimates.len()];
    let mut missing = Vec::new();
    for (c, p) in group.elements() {
        if c.is_zero() {
            continue;
        }
        match index.get(&p.unsigned()) {
            Some(&i) => weight[i] = if report.estimates[i].stabilizer == p { h } else { -h },
            None => missing.push(p.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(TomographyError::IncompleteCoverage(missing));
    }
    let mut f = h;
    for (w, e) in weight.iter().zip(&report.estimates) {
        f += *w * e.mean;
    }
    let mut var = T::zero();
    for b in &report.blocks {
        let mut s = T::zero();
        for (a, &i) in b.members.iter().enumerate() {
            for (c, &j) in b.members.iter().enumerate() {
                s += weight[i] * weight[j] * b.sigma[a][c];
            }
        }
        var += s / T::from_f64_lossy(b.shots as f64);
    }
    let stderr = if var > T::zero() { var.sqrt() } else { T::zero() };
    let witness = T::from_f64_lossy(0.5) - f;
    Ok(FidelityEstimate {
        fidelity: f,
        stderr,
        witness,
        witness_stderr: stderr,
        entangled: witness < T::zero(),
        spam_corrected: report.spam_corrected,
    })
}
