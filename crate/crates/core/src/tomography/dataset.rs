use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConfusionModel, MeasurementPlan, TomographyError};
use crate::graphsim::{noisy_sampler, Circuit, NoiseParams, StreamId, TrajectoryRng};
use crate::pauli_core::BinaryVector;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueTally {
    pub basis: String,
    pub tallies: BTreeMap<BinaryVector, u64>,
}

impl CliqueTally {
    pub fn shots(&self) -> u64 {
        self.tallies.values().sum()
    }

    pub fn record(&mut self, b: BinaryVector) {
        *self.tallies.entry(b).or_insert(0) += 1;
    }
}

/// Outcome tallies for every setting of one plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotDataset {
    pub plan_hash: String,
    pub cliques: Vec<CliqueTally>,
}

impl ShotDataset {
    pub fn empty(plan: &MeasurementPlan) -> Self {
        ShotDataset {
            plan_hash: plan.hash(),
            cliques: plan
                .cliques
                .iter()
                .map(|c| CliqueTally { basis: c.basis_string(), tallies: BTreeMap::new() })
                .collect(),
        }
    }

    /// Errors unless the dataset was taken with `plan`.
    pub fn check(&self, plan: &MeasurementPlan) -> Result<(), TomographyError> {
        if self.plan_hash != plan.hash() {
            return Err(TomographyError::PlanMismatch(format!(
                "dataset hash {} differs from the plan",
                self.plan_hash
            )));
        }
        if self.cliques.len() != plan.len() {
            return Err(TomographyError::PlanMismatch(format!(
                "{} settings for {} cliques",
                self.cliques.len(),
                plan.len()
            )));
        }
        for (l, (d, c)) in self.cliques.iter().zip(&plan.cliques).enumerate() {
            if d.basis != c.basis_string() {
                return Err(TomographyError::PlanMismatch(format!("setting {l} was measured in {}", d.basis)));
            }
            if d.tallies.keys().any(|b| b.len() != plan.n) {
                return Err(TomographyError::PlanMismatch(format!("setting {l} has outcomes of the wrong length")));
            }
        }
        Ok(())
    }

    /// Adds the tallies of another dataset for the same plan.
    pub fn merge(&mut self, other: &ShotDataset) -> Result<(), TomographyError> {
        if self.plan_hash != other.plan_hash || self.cliques.len() != other.cliques.len() {
            return Err(TomographyError::PlanMismatch("datasets use different plans".into()));
        }
        for (a, b) in self.cliques.iter_mut().zip(&other.cliques) {
            for (k, v) in &b.tallies {
                *a.tallies.entry(*k).or_insert(0) += v;
            }
        }
        Ok(())
    }
}

/// Simulates `shots` noisy readouts per setting; setting `l` uses setting id `l`.
///
/// An optional confusion model corrupts each outcome after the ideal readout,
/// drawing from the shot's own stream.
pub fn simulate_dataset(
    plan: &MeasurementPlan,
    prep: &Circuit,
    noise: &NoiseParams,
    shots: usize,
    rng: &TrajectoryRng,
    experiment: u64,
    readout: Option<&ConfusionModel>,
) -> Result<ShotDataset, TomographyError> {
    if shots == 0 {
        return Err(TomographyError::NoShots(0));
    }
    let mut data = ShotDataset::empty(plan);
    for (l, clique) in plan.cliques.iter().enumerate() {
        let sampler = noisy_sampler::<f64>(prep, noise, &clique.basis)?;
        let outcomes: Vec<BinaryVector> = (0..shots as u64)
            .into_par_iter()
            .map(|shot| {
                let mut r = rng.stream(StreamId { experiment, setting: l as u64, shot });
                let b = sampler.sample(&mut r);
                match readout {
                    Some(m) => m.corrupt(&b, &mut r),
                    None => b,
                }
            })
            .collect();
        for b in outcomes {
            data.cliques[l].record(b);
        }
    }
    Ok(data)
}
