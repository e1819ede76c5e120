use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use cluster_games::classical_bounds::BoundsError;
use cluster_games::games::{GameError, GameInstance, GameKind, InputSetKind};
use cluster_games::graphsim::{NoiseParams, SimError};
use cluster_games::noise_fit::FitError;
use cluster_games::tomography::{ConfusionModel, ConfusionSpec, TomographyError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Refusal(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Config(_) => 2,
            CliError::Refusal(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidNoise(_) | SimError::InvalidShots | SimError::TooManyQubits(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::SearchTooLarge { .. } => CliError::Refusal(e.to_string()),
            BoundsError::Game(g) => g.into(),
            BoundsError::InvalidParameters(_) => CliError::Config(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<TomographyError> for CliError {
    fn from(e: TomographyError) -> Self {
        match e {
            TomographyError::Csv(_) | TomographyError::Io(_) => CliError::Io(e.to_string()),
            TomographyError::InvalidConfusion(_)
            | TomographyError::SingularConfusion(_)
            | TomographyError::InvalidArgument(_) => CliError::Config(e.to_string()),
            TomographyError::Sim(s) => s.into(),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::InvalidGrid(_) => CliError::Config(e.to_string()),
            FitError::Tomography(t) => t.into(),
            FitError::Sim(s) => s.into(),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// `"none"`, `"fitted"`, a path to a JSON file, or inline parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSource {
    Named(String),
    Inline(NoiseParams),
}

/// `"none"`, a path to a JSON confusion spec, or an inline spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReadoutSource {
    Named(String),
    Inline(ConfusionSpec),
}

/// Settings shared by every subcommand. The config file supplies defaults and flags override it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: Option<GameKind>,
    pub inputs: Option<String>,
    pub n: Option<usize>,
    pub depth: Option<usize>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<NoiseSource>,
    pub readout: Option<ReadoutSource>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
}

pub const DEFAULT_N: usize = 6;
pub const DEFAULT_SHOTS: usize = 5000;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        parse_json(path)
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(self, other: ExperimentConfig) -> Self {
        ExperimentConfig {
            game: other.game.or(self.game),
            inputs: other.inputs.or(self.inputs),
            n: other.n.or(self.n),
            depth: other.depth.or(self.depth),
            shots: other.shots.or(self.shots),
            seed: other.seed.or(self.seed),
            noise: other.noise.or(self.noise),
            readout: other.readout.or(self.readout),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
            workers: other.workers.or(self.workers),
        }
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    pub fn shots(&self) -> Result<usize, CliError> {
        match self.shots.unwrap_or(DEFAULT_SHOTS) {
            0 => Err(CliError::Config("--shots must be at least 1".into())),
            s => Ok(s),
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn require_seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config(format!("{command} needs --seed (or \"seed\" in the config file)")))
    }

    pub fn require_game(&self) -> Result<GameInstance, CliError> {
        let kind = self.game.ok_or_else(|| CliError::Config("--game is required".into()))?;
        let set: InputSetKind =
            self.inputs.as_deref().ok_or_else(|| CliError::Config("--inputs is required".into()))?.parse()?;
        Ok(GameInstance::build(kind, set, self.n())?)
    }

    /// The game if `--game` was given (inputs default to `full`).
    pub fn optional_game(&self) -> Result<Option<GameInstance>, CliError> {
        let Some(kind) = self.game else {
            return Ok(None);
        };
        let set: InputSetKind = self.inputs.as_deref().unwrap_or("full").parse()?;
        Ok(Some(GameInstance::build(kind, set, self.n())?))
    }

    pub fn noise(&self) -> Result<NoiseParams, CliError> {
        let noise = match &self.noise {
            None => NoiseParams::fitted(),
            Some(NoiseSource::Inline(p)) => p.clone(),
            Some(NoiseSource::Named(s)) => match s.as_str() {
                "none" => NoiseParams::none(),
                "fitted" => NoiseParams::fitted(),
                path => parse_json(Path::new(path))?,
            },
        };
        noise.validate()?;
        Ok(noise)
    }

    pub fn readout(&self) -> Result<Option<ConfusionModel>, CliError> {
        let spec = match &self.readout {
            None => return Ok(None),
            Some(ReadoutSource::Inline(s)) => s.clone(),
            Some(ReadoutSource::Named(s)) if s == "none" => return Ok(None),
            Some(ReadoutSource::Named(path)) => parse_json(Path::new(path))?,
        };
        Ok(Some(ConfusionModel::from_spec(&spec)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ExperimentConfig =
            serde_json::from_str(r#"{"game": "ss", "inputs": "hlf8", "shots": 10, "seed": 1, "noise": "none"}"#)
                .unwrap();
        let flags = ExperimentConfig { shots: Some(20), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.shots, Some(20));
        assert_eq!(merged.seed, Some(1));
        assert_eq!(merged.noise().unwrap(), NoiseParams::none());
        assert_eq!(merged.require_game().unwrap().inputs().len(), 8);
    }

    #[test]
    fn inline_noise_and_unknown_keys() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"noise": {"p1d": 0.01, "p2d": 0.02, "p2XX": 0.03, "T2": 0.2, "t1": 1e-5, "t2": 3.5e-4, "pc": 0.0}}"#,
        )
        .unwrap();
        assert_eq!(c.noise().unwrap().p2xx, 0.03);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sheds": 3}"#).is_err());
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let e = ExperimentConfig::default().require_seed("play").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
