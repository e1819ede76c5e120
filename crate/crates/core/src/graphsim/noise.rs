use serde::{Deserialize, Serialize};

use super::SimError;

/// Explicit crosstalk pairs for one entangling gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkEntry {
    pub gate: [usize; 2],
    pub pairs: Vec<[usize; 2]>,
}

/// Trapped-ion error model: depolarizing, joint bit-flip, idle dephasing, crosstalk.
///
/// Probabilities are per gate; times are in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p1d: f64,
    pub p2d: f64,
    #[serde(rename = "p2XX")]
    pub p2xx: f64,
    #[serde(rename = "T2")]
    pub dephasing_time: f64,
    pub t1: f64,
    pub t2: f64,
    pub pc: f64,
    /// `None` uses the index-neighbour rule of [`NoiseParams::crosstalk_for`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosstalk_pairs: Option<Vec<CrosstalkEntry>>,
}

pub const DEFAULT_T2: f64 = 0.2;
pub const DEFAULT_T1_GATE: f64 = 10e-6;
pub const DEFAULT_T2_GATE: f64 = 350e-6;
pub const DEFAULT_PC: f64 = 6e-4;

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams::with_rates(0.0, 0.0, 0.0)
    }
}

impl NoiseParams {
    /// No errors of any kind (zero rates and zero gate times, so nothing dephases).
    pub fn none() -> Self {
        NoiseParams { pc: 0.0, t1: 0.0, t2: 0.0, ..NoiseParams::default() }
    }

    /// Gate error rates with the fixed device constants for dephasing, timing and crosstalk.
    pub fn with_rates(p1d: f64, p2xx: f64, p2d: f64) -> Self {
        NoiseParams {
            p1d,
            p2d,
            p2xx,
            dephasing_time: DEFAULT_T2,
            t1: DEFAULT_T1_GATE,
            t2: DEFAULT_T2_GATE,
            pc: DEFAULT_PC,
            crosstalk_pairs: None,
        }
    }

    /// Best-fit device model: `(p1d, p2XX, p2d) = (1.2%, 3.5%, 3.5%)`.
    pub fn fitted() -> Self {
        NoiseParams::with_rates(0.012, 0.035, 0.035)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, p) in [("p1d", self.p1d), ("p2d", self.p2d), ("p2XX", self.p2xx), ("pc", self.pc)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidNoise(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.dephasing_time > 0.0 && self.dephasing_time.is_finite()) {
            return Err(SimError::InvalidNoise(format!("T2 = {} must be positive", self.dephasing_time)));
        }
        if !(self.t1 >= 0.0 && self.t2 >= 0.0 && self.t1.is_finite() && self.t2.is_finite()) {
            return Err(SimError::InvalidNoise("gate times must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Dephasing flip probability for an idle period `t`.
    pub fn p_idle(&self, t: f64) -> f64 {
        (1.0 - (-t / (2.0 * self.dephasing_time)).exp()) / 2.0
    }

    /// Infidelity of the entangling gate: `p2XX + (4/5) p2d`.
    pub fn two_qubit_infidelity(&self) -> f64 {
        self.p2xx + 0.8 * self.p2d
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1d == 0.0 && self.p2d == 0.0 && self.p2xx == 0.0 && self.pc == 0.0 && self.t1 == 0.0 && self.t2 == 0.0
    }

    /// Ion pairs that pick up an unintended `XX` during an `RXX` on `(a, b)`.
    ///
    /// Without an explicit list, each target is paired with the index neighbours
    /// of the other target in a linear chain of `n` ions.
    pub fn crosstalk_for(&self, a: usize, b: usize, n: usize) -> Vec<(usize, usize)> {
        if let Some(entries) = &self.crosstalk_pairs {
            return entries
                .iter()
                .filter(|e| e.gate == [a, b] || e.gate == [b, a])
                .flat_map(|e| e.pairs.iter().map(|p| (p[0], p[1])))
                .collect();
        }
        let mut out = Vec::new();
        let neighbours = |q: usize| [q.checked_sub(1), (q + 1 < n).then_some(q + 1)];
        for nb in neighbours(b).into_iter().flatten() {
            if nb != a {
                out.push((a, nb));
            }
        }
        for na in neighbours(a).into_iter().flatten() {
            if na != b {
                out.push((na, b));
            }
        }
        out
    }
}
