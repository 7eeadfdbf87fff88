//! Run configuration: TOML file sections merged with command-line flags.
//!
//! A config file may set `seed`, `out` and `threads` at the top level and
//! hold one table per experiment:
//!
//! ```toml
//! seed = 7
//!
//! [concentration]
//! n1 = 4
//! n2 = 64
//! epsilons = [0.05, 0.1]
//! ```
//!
//! Missing keys take their defaults; flags win over file values.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ball_gas::{BallGasConfig, Exclusion, DEFAULT_DIM_CAP};
use crate::error::{Error, Result};

fn config_error(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub concentration: Option<ConcentrationParams>,
    pub qet: Option<QetParams>,
    pub measure: Option<MeasureParams>,
    pub schmidt: Option<SchmidtParams>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error("config file", e.message().to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationParams {
    pub n1: usize,
    pub n2: usize,
    pub trials: usize,
    pub epsilons: Vec<f64>,
}

impl Default for ConcentrationParams {
    fn default() -> Self {
        Self {
            n1: 4,
            n2: 64,
            trials: 10_000,
            epsilons: vec![0.02, 0.05, 0.1, 0.2],
        }
    }
}

impl ConcentrationParams {
    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 {
            return Err(config_error("concentration.n1", "must be positive"));
        }
        if self.n2 == 0 {
            return Err(config_error("concentration.n2", "must be positive"));
        }
        if self.trials < 100 {
            return Err(config_error("concentration.trials", format!("must be at least 100, got {}", self.trials)));
        }
        check_grid("concentration.epsilons", &self.epsilons)
    }
}

fn check_grid(field: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(config_error(field, "must be non-empty"));
    }
    if grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(config_error(field, "entries must be positive and finite"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(config_error(field, "must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Uniformly random state in the energy shell.
    #[default]
    Random,
    /// Random state inside a single macro cell.
    Localized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QetParams {
    pub sites: usize,
    pub n_gas: usize,
    pub ball_hop: f64,
    pub gas_hop: f64,
    pub tilt: f64,
    pub eta: f64,
    /// Ball-gas repulsion; absent means hard-core exclusion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repulsion: Option<f64>,
    pub dim_cap: usize,
    pub shell_lo: f64,
    pub shell_hi: f64,
    /// Number of equal-width ball-position cells.
    pub cells: usize,
    /// Defaults to `100 / (smallest occupied level spacing)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Defaults to the count that samples the fastest shell frequency at
    /// least four times per period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_times: Option<usize>,
    /// Defaults to twice the largest temporal standard deviation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Defaults to half the smallest typical cell weight.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub initial: InitialState,
    /// Cell holding the localized initial state.
    pub initial_cell: usize,
}

impl Default for QetParams {
    fn default() -> Self {
        let model = BallGasConfig::default();
        Self {
            sites: model.sites,
            n_gas: model.n_gas,
            ball_hop: model.ball_hop,
            gas_hop: model.gas_hop,
            tilt: model.tilt,
            eta: model.eta,
            repulsion: None,
            dim_cap: DEFAULT_DIM_CAP,
            shell_lo: -3.0,
            shell_hi: -0.05,
            cells: 4,
            t_max: None,
            n_times: None,
            epsilon: None,
            threshold: None,
            initial: InitialState::Random,
            initial_cell: 0,
        }
    }
}

/// Upper limit on the number of time samples.
pub const MAX_TIMES: usize = 2_000_000;

impl QetParams {
    pub fn model_config(&self, seed: u64) -> BallGasConfig {
        BallGasConfig {
            sites: self.sites,
            n_gas: self.n_gas,
            ball_hop: self.ball_hop,
            gas_hop: self.gas_hop,
            tilt: self.tilt,
            exclusion: match self.repulsion {
                Some(repulsion) => Exclusion::Soft { repulsion },
                None => Exclusion::HardCore,
            },
            eta: self.eta,
            seed,
            dim_cap: self.dim_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(config_error("qet.sites", "need at least 2 sites"));
        }
        for (field, v) in [
            ("qet.ball_hop", self.ball_hop),
            ("qet.gas_hop", self.gas_hop),
            ("qet.tilt", self.tilt),
            ("qet.eta", self.eta),
            ("qet.shell_lo", self.shell_lo),
            ("qet.shell_hi", self.shell_hi),
        ] {
            if !v.is_finite() {
                return Err(config_error(field, "must be finite"));
            }
        }
        if self.eta < 0.0 {
            return Err(config_error("qet.eta", "must be non-negative"));
        }
        if !(self.shell_lo < self.shell_hi) {
            return Err(config_error(
                "qet.shell_lo",
                format!("need shell_lo < shell_hi, got [{}, {})", self.shell_lo, self.shell_hi),
            ));
        }
        if self.cells == 0 || self.cells > self.sites {
            return Err(config_error("qet.cells", format!("must lie in 1..={}", self.sites)));
        }
        if self.initial_cell >= self.cells {
            return Err(config_error("qet.initial_cell", format!("must be below cells = {}", self.cells)));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(config_error("qet.t_max", "must be positive and finite"));
            }
        }
        if let Some(n) = self.n_times {
            if !(2..=MAX_TIMES).contains(&n) {
                return Err(config_error("qet.n_times", format!("must lie in 2..={MAX_TIMES}")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(config_error("qet.epsilon", "must be positive"));
            }
        }
        if let Some(th) = self.threshold {
            if !(th > 0.0 && th < 1.0) {
                return Err(config_error("qet.threshold", "must lie in (0, 1)"));
            }
        }
        if let Some(r) = self.repulsion {
            if !r.is_finite() {
                return Err(config_error("qet.repulsion", "must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureParams {
    pub theta: f64,
    pub n_spins: usize,
    /// Complex amplitudes written as `"0.6"`, `"0.6+0.8i"` or `"0.8i"`.
    pub c_plus: String,
    pub c_minus: String,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self {
            theta: 0.451,
            n_spins: 50,
            c_plus: std::f64::consts::FRAC_1_SQRT_2.to_string(),
            c_minus: std::f64::consts::FRAC_1_SQRT_2.to_string(),
        }
    }
}

impl MeasureParams {
    pub fn amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let parse = |field: &str, s: &str| {
            s.trim()
                .parse::<Complex64>()
                .map_err(|_| config_error(field, format!("cannot parse complex number {s:?}")))
        };
        Ok((parse("measure.c_plus", &self.c_plus)?, parse("measure.c_minus", &self.c_minus)?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(config_error("measure.n_spins", "must be at least 1"));
        }
        if !self.theta.is_finite() {
            return Err(config_error("measure.theta", "must be finite"));
        }
        let (p, m) = self.amplitudes()?;
        let norm_sqr = p.norm_sqr() + m.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(config_error(
                "measure.c_plus",
                format!("|c_plus|^2 + |c_minus|^2 = {norm_sqr}, expected 1"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchmidtParams {
    pub n1: usize,
    pub n2: usize,
    pub trials: usize,
}

impl Default for SchmidtParams {
    fn default() -> Self {
        Self {
            n1: 3,
            n2: 4,
            trials: 200,
        }
    }
}

impl SchmidtParams {
    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 {
            return Err(config_error("schmidt.n1", "must be positive"));
        }
        if self.n2 == 0 {
            return Err(config_error("schmidt.n2", "must be positive"));
        }
        if self.trials == 0 {
            return Err(config_error("schmidt.trials", "must be positive"));
        }
        Ok(())
    }
}

/// A fully resolved experiment. Together with the seed it determines every
/// byte of the reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Concentration(ConcentrationParams),
    Qet(QetParams),
    Measure(MeasureParams),
    Schmidt(SchmidtParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Concentration(_) => "concentration",
            Experiment::Qet(_) => "qet",
            Experiment::Measure(_) => "measure",
            Experiment::Schmidt(_) => "schmidt",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Experiment::Concentration(p) => p.validate(),
            Experiment::Qet(p) => p.validate(),
            Experiment::Measure(p) => p.validate(),
            Experiment::Schmidt(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub experiment: Experiment,
    pub out: PathBuf,
    /// Worker count; `None` uses all available cores. Reports do not depend
    /// on it.
    pub threads: Option<usize>,
}

pub const DEFAULT_OUT: &str = "qetlab-out";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let f = ConfigFile::parse(
            "seed = 9\n[concentration]\nn1 = 2\nepsilons = [0.1, 0.2]\n[qet]\nrepulsion = 2.5\ninitial = \"localized\"\n",
        )
        .unwrap();
        assert_eq!(f.seed, Some(9));
        let c = f.concentration.unwrap();
        assert_eq!((c.n1, c.n2, c.trials), (2, 64, 10_000));
        let q = f.qet.unwrap();
        assert_eq!(q.initial, InitialState::Localized);
        assert_eq!(q.model_config(1).exclusion, Exclusion::Soft { repulsion: 2.5 });
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ConfigFile::parse("[measure]\nthetta = 1.0\n").unwrap_err();
        match err {
            Error::Config { reason, .. } => assert!(reason.contains("thetta")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_names_fields() {
        let p = ConcentrationParams {
            epsilons: vec![0.2, 0.1],
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config { field, .. }) if field == "concentration.epsilons"));
        let q = QetParams {
            shell_lo: 1.0,
            shell_hi: 0.0,
            ..Default::default()
        };
        assert!(matches!(q.validate(), Err(Error::Config { field, .. }) if field == "qet.shell_lo"));
        let m = MeasureParams {
            c_plus: "1".into(),
            c_minus: "1".into(),
            ..Default::default()
        };
        assert!(m.validate().is_err());
        let m = MeasureParams {
            c_plus: "0.6".into(),
            c_minus: "0.8i".into(),
            ..Default::default()
        };
        m.validate().unwrap();
    }
}
