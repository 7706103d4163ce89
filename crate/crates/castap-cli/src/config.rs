//! Experiment configuration: TOML schema, validation, conversion into the
//! library types, and the semantic config hash.

use castap::dictionary::{BoundFormula, PriorKnowledge};
use castap::geometry::ArrayGeometry;
use castap::signal::{RadarScenario, Target};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// Process exit code: 1 for configuration problems, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<castap::Error> for CliError {
    fn from(e: castap::Error) -> Self {
        match e {
            castap::Error::InvalidConfiguration(m) => CliError::Config(m),
            castap::Error::InvalidPrior(m) => CliError::Config(m),
            castap::Error::ShapeMismatch(m) => CliError::Numerical(m),
            castap::Error::NumericalRank(m) => CliError::Numerical(m),
            castap::Error::EmptyInput(m) => CliError::Numerical(m.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Array layout: a coprime pair or a uniform array.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArraySpec {
    Coprime { n1: u32, n2: u32 },
    Ula { n: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub doppler: f64,
    #[serde(default)]
    pub spatial_freq: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self {
            doppler: 0.1667,
            spatial_freq: 0.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub array: ArraySpec,
    pub m_pulses: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_tr")]
    pub t_r: f64,
    /// Ridge slope; exactly one of `beta` and `v_p` must be given.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub v_p: Option<f64>,
    #[serde(default)]
    pub psi_deg: f64,
    #[serde(default)]
    pub phi_deg: f64,
    #[serde(default = "default_n_clutter")]
    pub n_clutter: usize,
    #[serde(default = "default_cnr")]
    pub cnr_db: f64,
    #[serde(default = "one")]
    pub sigma_n2: f64,
    #[serde(default)]
    pub target: TargetSpec,
}

fn default_lambda() -> f64 {
    0.125
}
fn default_tr() -> f64 {
    1.0 / 4000.0
}
fn default_n_clutter() -> usize {
    361
}
fn default_cnr() -> f64 {
    40.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(default = "default_dv")]
    pub dv_pm: f64,
    #[serde(default = "default_dpsi")]
    pub dpsi_m_deg: f64,
    #[serde(default = "default_me")]
    pub m_e: usize,
    /// Azimuth grid size; omitted means five times the coarray size.
    #[serde(default)]
    pub n_angles: Option<usize>,
    #[serde(default)]
    pub bound_formula: BoundFormulaSpec,
}

fn default_dv() -> f64 {
    2.0
}
fn default_dpsi() -> f64 {
    1.0
}
fn default_me() -> usize {
    15
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            dv_pm: default_dv(),
            dpsi_m_deg: default_dpsi(),
            m_e: default_me(),
            n_angles: None,
            bound_formula: BoundFormulaSpec::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundFormulaSpec {
    #[default]
    Literal,
    Simplified,
}

impl From<BoundFormulaSpec> for BoundFormula {
    fn from(b: BoundFormulaSpec) -> Self {
        match b {
            BoundFormulaSpec::Literal => BoundFormula::Literal,
            BoundFormulaSpec::Simplified => BoundFormula::Simplified,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    RankValidation,
    VarianceCurve,
    SinrVsDoppler,
    SinrVsSamples,
    RobustnessSweep,
    DictionarySizeSweep,
    ChannelsSweep,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Training samples per trial.
    #[serde(default = "default_l")]
    pub l_samples: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Master seed; mandatory so runs never depend on the wall clock.
    pub seed: u64,
    #[serde(default = "default_m_bins")]
    pub m_bins: usize,
    /// Evaluate with the true covariance instead of sample estimates.
    #[serde(default)]
    pub known_covariance: bool,
    /// Target-Doppler sweep grid; omitted means -0.45..=0.45 step 0.05.
    #[serde(default)]
    pub doppler_grid: Option<Vec<f64>>,
    /// Sample-count grid for `sinr_vs_samples` and `variance_curve`.
    #[serde(default)]
    pub l_grid: Option<Vec<usize>>,
    /// CNR grid (dB) for `variance_curve`.
    #[serde(default)]
    pub cnr_grid_db: Option<Vec<f64>>,
    /// Channel counts for `channels_sweep`.
    #[serde(default)]
    pub m_bins_list: Option<Vec<usize>>,
    /// Dictionary size factors (units of `N_v * M_e`) for
    /// `dictionary_size_sweep`.
    #[serde(default)]
    pub dict_factors: Option<Vec<usize>>,
    /// Bound-perturbation ratios for `robustness_sweep`.
    #[serde(default)]
    pub ratio_grid: Option<Vec<f64>>,
    /// Emit the per-angle bandwidth/aperture breakdown in
    /// `rank_validation` output.
    #[serde(default)]
    pub rank_detail: bool,
    /// Output CSV path.
    #[serde(default)]
    pub out: Option<String>,
}

fn default_l() -> usize {
    5
}
fn default_trials() -> usize {
    500
}
fn default_m_bins() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub prior: PriorSpec,
    pub experiment: ExperimentSpec,
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let s = &self.scenario;
        match s.array {
            ArraySpec::Coprime { n1, n2 } => {
                if n1 < 2 || n2 <= n1 {
                    return Err(CliError::Config(format!(
                        "coprime pair needs 2 <= n1 < n2, got ({n1}, {n2})"
                    )));
                }
            }
            ArraySpec::Ula { n } => {
                if n == 0 {
                    return Err(CliError::Config("ULA needs n >= 1".into()));
                }
            }
        }
        if s.m_pulses == 0 {
            return Err(CliError::Config("m_pulses must be >= 1".into()));
        }
        if s.lambda <= 0.0 || s.t_r <= 0.0 {
            return Err(CliError::Config("lambda and t_r must be positive".into()));
        }
        if s.beta.is_some() && s.v_p.is_some() {
            return Err(CliError::Config("give either beta or v_p, not both".into()));
        }
        if s.n_clutter == 0 {
            return Err(CliError::Config("n_clutter must be >= 1".into()));
        }
        if !s.cnr_db.is_finite() || !s.sigma_n2.is_finite() || s.sigma_n2 < 0.0 {
            return Err(CliError::Config(
                "cnr_db must be finite and sigma_n2 finite and non-negative".into(),
            ));
        }
        if !(-0.5..0.5).contains(&s.target.doppler) || !(-0.5..0.5).contains(&s.target.spatial_freq)
        {
            return Err(CliError::Config(
                "normalized target frequencies must lie in [-0.5, 0.5)".into(),
            ));
        }
        let p = &self.prior;
        if p.dv_pm < 0.0 || p.dpsi_m_deg < 0.0 {
            return Err(CliError::Config("prior error bounds must be non-negative".into()));
        }
        if p.m_e == 0 {
            return Err(CliError::Config("m_e must be >= 1".into()));
        }
        let e = &self.experiment;
        if e.m_bins == 0 || e.m_bins.is_multiple_of(2) {
            return Err(CliError::Config("m_bins must be odd and >= 1".into()));
        }
        if e.l_samples == 0 {
            return Err(CliError::Config("l_samples must be >= 1".into()));
        }
        if let Some(grid) = &e.l_grid {
            if grid.contains(&0) {
                return Err(CliError::Config("l_grid entries must be >= 1".into()));
            }
        }
        if let Some(ms) = &e.m_bins_list {
            if ms.iter().any(|&m| m == 0 || m.is_multiple_of(2)) {
                return Err(CliError::Config("m_bins_list entries must be odd".into()));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> CliResult<ArrayGeometry> {
        let d0 = self.scenario.lambda / 2.0;
        match self.scenario.array {
            ArraySpec::Coprime { n1, n2 } => Ok(ArrayGeometry::coprime(n1, n2, d0)?),
            ArraySpec::Ula { n } => Ok(ArrayGeometry::ula(n, d0)?),
        }
    }

    pub fn scenario(&self) -> CliResult<RadarScenario> {
        let geom = self.geometry()?;
        let s = &self.scenario;
        let mut scen = RadarScenario::new(geom, s.m_pulses);
        scen.lambda = s.lambda;
        scen.t_r = s.t_r;
        scen.psi = s.psi_deg.to_radians();
        scen.phi = s.phi_deg.to_radians();
        scen.n_clutter = s.n_clutter;
        scen.cnr_db = s.cnr_db;
        scen.sigma_n2 = s.sigma_n2;
        scen.target = Target {
            doppler: s.target.doppler,
            spatial_freq: s.target.spatial_freq,
            amplitude: Complex64::new(s.target.amplitude, 0.0),
        };
        if let Some(v_p) = s.v_p {
            scen.v_p = v_p;
        } else if let Some(beta) = s.beta {
            scen = scen.with_beta(beta);
        }
        Ok(scen)
    }

    /// Prior knowledge with the measured values at the true parameters;
    /// per-trial draws replace them inside the runner.
    pub fn prior(&self, scen: &RadarScenario, n_v: usize) -> PriorKnowledge {
        PriorKnowledge {
            v_p_measured: scen.v_p,
            psi_measured: scen.psi,
            dv_pm: self.prior.dv_pm,
            dpsi_m: self.prior.dpsi_m_deg.to_radians(),
            m_e: self.prior.m_e,
            n_angles: self.prior.n_angles.unwrap_or(5 * n_v),
            bound_formula: self.prior.bound_formula.into(),
        }
    }

    /// Stable hash of the semantic content (the output path is excluded).
    pub fn config_hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.experiment.out = None;
        let canonical = toml::to_string(&semantic).expect("config serializes");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
