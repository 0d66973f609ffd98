//! JSON experiment configuration. Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use q2ma_core::hamiltonian::{Hamiltonian, HamiltonianSpec, Model};
use q2ma_core::pea::PeaConfig;
use q2ma_core::qsa::{OutcomePolicy, MeasurementMode};
use q2ma_core::spectral::KickKind;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default)]
    pub kick: KickConfig,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Seed for measurement sampling.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lazy_chain: bool,
    #[serde(default)]
    pub allow_large: bool,
    #[serde(default)]
    pub anneal: Option<AnnealConfig>,
    #[serde(default)]
    pub leakage: Option<LeakageConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Ising,
    Tfim,
    #[serde(rename = "random2local")]
    RandomTwoLocal,
    Random,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub model: ModelName,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "J", default = "one")]
    pub j: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub periodic: bool,
    #[serde(default)]
    pub seed: u64,
    /// Diagonal entries for the `diagonal` model.
    #[serde(default)]
    pub energies: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl HamiltonianConfig {
    pub fn build(&self) -> Result<Hamiltonian, CliError> {
        if let ModelName::Diagonal = self.model {
            let energies = self
                .energies
                .as_ref()
                .ok_or_else(|| CliError::Config("diagonal model needs `energies`".into()))?;
            if let Some(n) = self.n {
                if energies.len() != 1 << n {
                    return Err(CliError::Config(format!("`energies` must have 2^{n} entries")));
                }
            }
            return Ok(Hamiltonian::diagonal(energies, "diagonal")?);
        }
        if self.energies.is_some() {
            return Err(CliError::Config("`energies` is only valid for the diagonal model".into()));
        }
        let n = self.n.ok_or_else(|| CliError::Config("hamiltonian needs `n`".into()))?;
        let model = match self.model {
            ModelName::Ising => Model::Ising,
            ModelName::Tfim => Model::TransverseIsing,
            ModelName::RandomTwoLocal => Model::RandomTwoLocal,
            ModelName::Random => Model::RandomDense,
            ModelName::Diagonal => unreachable!(),
        };
        let spec = HamiltonianSpec {
            model,
            n,
            j: self.j,
            h: self.h,
            periodic: self.periodic,
            seed: self.seed,
        };
        Ok(spec.build()?)
    }
}

/// `"uniform_spin_flips"`, `{"spin_flip": 0}`, `{"swap": [0, 1]}` and so on.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KickConfig {
    Identity,
    SpinFlip(usize),
    PhaseFlip(usize),
    Swap([usize; 2]),
    #[default]
    UniformSpinFlips,
    UniformFlipsXz,
}

impl KickConfig {
    pub fn kind(&self) -> KickKind {
        match *self {
            KickConfig::Identity => KickKind::Identity,
            KickConfig::SpinFlip(site) => KickKind::SpinFlip { site },
            KickConfig::PhaseFlip(site) => KickKind::PhaseFlip { site },
            KickConfig::Swap([a, b]) => KickKind::Swap { a, b },
            KickConfig::UniformSpinFlips => KickKind::UniformSpinFlips,
            KickConfig::UniformFlipsXz => KickKind::UniformFlipsXZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Exact,
    Pea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Abort,
    #[default]
    RetryStep,
    AcceptAndContinue,
    PostSelect,
}

impl PolicyName {
    pub fn policy(self) -> OutcomePolicy {
        match self {
            PolicyName::Abort => OutcomePolicy::Abort,
            PolicyName::RetryStep => OutcomePolicy::RetryStep,
            PolicyName::AcceptAndContinue => OutcomePolicy::AcceptAndContinue,
            PolicyName::PostSelect => OutcomePolicy::PostSelect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Steps {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeaSettings {
    pub bits: u32,
    #[serde(default = "one_u32")]
    pub repeats: u32,
}

fn one_u32() -> u32 {
    1
}

impl Default for PeaSettings {
    fn default() -> Self {
        Self { bits: 12, repeats: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    /// `d`, or a list of `d` values for a sweep. Derived from `epsilon` when absent.
    #[serde(default)]
    pub steps: Option<Steps>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default)]
    pub policy: PolicyName,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default)]
    pub pea: PeaSettings,
}

fn default_retries() -> usize {
    64
}

impl AnnealConfig {
    pub fn measurement_mode(&self, mode: ModeName) -> Result<MeasurementMode, CliError> {
        Ok(match mode {
            ModeName::Exact => MeasurementMode::Exact,
            ModeName::Pea => MeasurementMode::Pea(PeaConfig::new(self.pea.bits, self.pea.repeats)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageConfig {
    /// Window exponents `a` in `Δ = 2^{−a}`.
    #[serde(default = "default_bits")]
    pub bits: Vec<u32>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for LeakageConfig {
    fn default() -> Self {
        Self {
            bits: default_bits(),
            margin: default_margin(),
            threshold: default_threshold(),
        }
    }
}

fn default_bits() -> Vec<u32> {
    (3..=8).collect()
}

fn default_margin() -> f64 {
    q2ma_core::hamiltonian::DEFAULT_MARGIN
}

fn default_threshold() -> f64 {
    q2ma_core::pea::DEFAULT_LEAKAGE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub instances: Vec<InstanceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub kick: KickConfig,
    pub beta: f64,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn hamiltonian(&self) -> Result<&HamiltonianConfig, CliError> {
        self.hamiltonian
            .as_ref()
            .ok_or_else(|| CliError::Config("config needs a `hamiltonian` section".into()))
    }

    pub fn beta(&self) -> Result<f64, CliError> {
        let beta = self.beta.ok_or_else(|| CliError::Config("config needs `beta`".into()))?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(CliError::Config("`beta` must be finite and non-negative".into()));
        }
        Ok(beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kick_forms_parse() {
        let c = Config::from_json(r#"{"kick": "uniform_flips_xz"}"#).unwrap();
        assert_eq!(c.kick, KickConfig::UniformFlipsXz);
        let c = Config::from_json(r#"{"kick": {"spin_flip": 2}}"#).unwrap();
        assert_eq!(c.kick.kind(), KickKind::SpinFlip { site: 2 });
        let c = Config::from_json(r#"{"kick": {"swap": [0, 1]}}"#).unwrap();
        assert_eq!(c.kick.kind(), KickKind::Swap { a: 0, b: 1 });
        assert_eq!(Config::from_json("{}").unwrap().kick, KickConfig::UniformSpinFlips);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_json(r#"{"betta": 1.0}"#).is_err());
        assert!(Config::from_json(r#"{"hamiltonian": {"model": "ising", "n": 2, "K": 1}}"#).is_err());
        assert!(Config::from_json(r#"{"anneal": {"steps": 4, "speed": 2}}"#).is_err());
    }

    #[test]
    fn hamiltonian_section_matches_the_builders() {
        let c = Config::from_json(
            r#"{"hamiltonian": {"model": "tfim", "n": 2, "J": 1.0, "h": 0.5, "periodic": false, "seed": 0}}"#,
        )
        .unwrap();
        let h = c.hamiltonian().unwrap().build().unwrap();
        let direct = q2ma_core::hamiltonian::build_transverse_ising(2, 1.0, 0.5, false).unwrap();
        assert_eq!(h.matrix(), direct.matrix());
    }

    #[test]
    fn diagonal_model_needs_energies() {
        let c = Config::from_json(r#"{"hamiltonian": {"model": "diagonal"}}"#).unwrap();
        assert!(c.hamiltonian().unwrap().build().is_err());
        let c = Config::from_json(r#"{"hamiltonian": {"model": "diagonal", "energies": [0, 1]}}"#).unwrap();
        assert_eq!(c.hamiltonian().unwrap().build().unwrap().dim(), 2);
    }

    #[test]
    fn steps_accept_a_number_or_a_list() {
        let a: AnnealConfig = serde_json::from_str(r#"{"steps": 8}"#).unwrap();
        assert_eq!(a.steps, Some(Steps::One(8)));
        let a: AnnealConfig = serde_json::from_str(r#"{"steps": [8, 16]}"#).unwrap();
        assert_eq!(a.steps, Some(Steps::Many(vec![8, 16])));
        assert_eq!(a.policy, PolicyName::RetryStep);
        assert_eq!(a.max_retries, 64);
    }
}
