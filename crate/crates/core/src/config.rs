//! Scenario configuration: TOML file format, defaults, validation, and the
//! conversion into solver-facing types. Power levels enter in dBm and are
//! converted to watts at this boundary only.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::SchemeId;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, RadioConstants};
use crate::solver::{LinkEnv, SolverConfig};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1.0e-3 * 10f64.powf(dbm / 10.0)
}

/// How request states are averaged per layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Exact enumeration when the state space fits the budget, else Monte
    /// Carlo.
    Auto,
    /// Exact enumeration; errors when the state space exceeds the budget.
    Exact,
    /// Monte Carlo sampling regardless of the state-space size.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    /// Monte Carlo draws per layout.
    pub samples: usize,
    /// Largest state count still enumerated exactly.
    pub exact_budget: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { mode: SamplingMode::Auto, samples: 500, exact_budget: 10_000 }
    }
}

/// How the SIC margin is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaKind {
    AbsoluteWatts,
    NoiseMultiple,
}

/// SIC decoding margin: either a fixed power or a multiple of the noise
/// power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaMode {
    pub mode: ThetaKind,
    pub value: f64,
}

impl Default for ThetaMode {
    fn default() -> Self {
        Self { mode: ThetaKind::NoiseMultiple, value: 1.0 }
    }
}

/// Solver knobs exposed to the config file; mirrors
/// [`SolverConfig`](crate::solver::SolverConfig) except that the common-power
/// margin is derived from the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub mu_tol: f64,
    pub outer_tol_s: f64,
    pub antenna_tol_m: f64,
    pub p0_grid_points: usize,
    pub max_outer_iters: usize,
    pub golden_subintervals: usize,
    pub max_alt_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            mu_tol: 1e-6,
            outer_tol_s: 1e-4,
            antenna_tol_m: 1e-2,
            p0_grid_points: 32,
            max_outer_iters: 30,
            golden_subintervals: 8,
            max_alt_iters: 50,
        }
    }
}

/// Full scenario description. An empty file yields the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub carrier_freq_ghz: f64,
    /// Waveguide height above the user plane, meters.
    pub antenna_height_m: f64,
    pub noise_dbm: f64,
    /// Service region extent along the waveguide, meters.
    pub dx_m: f64,
    /// Service region extent across the waveguide, meters.
    pub dy_m: f64,
    pub num_contents: usize,
    pub content_size_mbits_min: f64,
    pub content_size_mbits_max: f64,
    pub bandwidth_mhz: f64,
    pub zipf_exponent: f64,
    pub power_budget_dbm: f64,
    pub theta_mode: ThetaMode,
    pub num_users: usize,
    /// When true the waveguide spans the region; otherwise
    /// `waveguide_length_m` must be given.
    pub waveguide_equals_dx: bool,
    pub waveguide_length_m: Option<f64>,
    pub seed: u64,
    /// Independent user layouts averaged per sweep point.
    pub layouts: usize,
    /// When false, the CSV wall-time column reports 0.0 so output is
    /// byte-reproducible.
    pub record_timing: bool,
    pub sampling: SamplingConfig,
    pub schemes: Vec<SchemeId>,
    pub solver: SolverSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_freq_ghz: 28.0,
            antenna_height_m: 3.0,
            noise_dbm: -90.0,
            dx_m: 120.0,
            dy_m: 40.0,
            num_contents: 30,
            content_size_mbits_min: 1.0,
            content_size_mbits_max: 20.0,
            bandwidth_mhz: 1.0,
            zipf_exponent: 0.5,
            power_budget_dbm: 25.0,
            theta_mode: ThetaMode::default(),
            num_users: 4,
            waveguide_equals_dx: true,
            waveguide_length_m: None,
            seed: 0,
            layouts: 10,
            record_timing: true,
            sampling: SamplingConfig::default(),
            schemes: SchemeId::ALL.to_vec(),
            solver: SolverSection::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(s).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config {
                    field: field.into(),
                    reason: format!("must be positive, got {v}"),
                })
            }
        }
        positive("carrier_freq_ghz", self.carrier_freq_ghz)?;
        positive("bandwidth_mhz", self.bandwidth_mhz)?;
        positive("antenna_height_m", self.antenna_height_m)?;
        positive("dx_m", self.dx_m)?;
        positive("dy_m", self.dy_m)?;
        positive("content_size_mbits_min", self.content_size_mbits_min)?;
        positive("content_size_mbits_max", self.content_size_mbits_max)?;
        if !self.noise_dbm.is_finite() {
            return Err(Error::Config { field: "noise_dbm".into(), reason: "must be finite".into() });
        }
        if !self.power_budget_dbm.is_finite() {
            return Err(Error::Config {
                field: "power_budget_dbm".into(),
                reason: "must be finite".into(),
            });
        }
        if self.content_size_mbits_max < self.content_size_mbits_min {
            return Err(Error::Config {
                field: "content_size_mbits_max".into(),
                reason: "must be at least content_size_mbits_min".into(),
            });
        }
        if self.num_users == 0 {
            return Err(Error::Config { field: "num_users".into(), reason: "must be at least 1".into() });
        }
        if self.num_contents == 0 {
            return Err(Error::Config {
                field: "num_contents".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.layouts == 0 {
            return Err(Error::Config { field: "layouts".into(), reason: "must be at least 1".into() });
        }
        if self.zipf_exponent < 0.0 || !self.zipf_exponent.is_finite() {
            return Err(Error::Config {
                field: "zipf_exponent".into(),
                reason: format!("must be nonnegative, got {}", self.zipf_exponent),
            });
        }
        if self.theta_mode.value < 0.0 || !self.theta_mode.value.is_finite() {
            return Err(Error::Config {
                field: "theta_mode.value".into(),
                reason: "must be nonnegative and finite".into(),
            });
        }
        match (self.waveguide_equals_dx, self.waveguide_length_m) {
            (true, Some(_)) => {
                return Err(Error::Config {
                    field: "waveguide_length_m".into(),
                    reason: "conflicts with waveguide_equals_dx = true".into(),
                })
            }
            (false, None) => {
                return Err(Error::Config {
                    field: "waveguide_length_m".into(),
                    reason: "required when waveguide_equals_dx = false".into(),
                })
            }
            (false, Some(l)) => positive("waveguide_length_m", l)?,
            (true, None) => {}
        }
        if self.schemes.is_empty() {
            return Err(Error::Config {
                field: "schemes".into(),
                reason: "at least one scheme required".into(),
            });
        }
        if self.sampling.samples == 0 {
            return Err(Error::Config {
                field: "sampling.samples".into(),
                reason: "must be at least 1".into(),
            });
        }
        self.solver_config().validate()?;
        Ok(())
    }

    pub fn waveguide_length(&self) -> f64 {
        if self.waveguide_equals_dx {
            self.dx_m
        } else {
            self.waveguide_length_m.unwrap_or(self.dx_m)
        }
    }

    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn power_budget_watts(&self) -> f64 {
        dbm_to_watts(self.power_budget_dbm)
    }

    pub fn theta_watts(&self) -> f64 {
        match self.theta_mode.mode {
            ThetaKind::AbsoluteWatts => self.theta_mode.value,
            ThetaKind::NoiseMultiple => self.theta_mode.value * self.noise_power_watts(),
        }
    }

    pub fn content_min_bits(&self) -> f64 {
        self.content_size_mbits_min * 1.0e6
    }

    pub fn content_max_bits(&self) -> f64 {
        self.content_size_mbits_max * 1.0e6
    }

    pub fn link_env(&self) -> LinkEnv<f64> {
        LinkEnv {
            geom: Geometry::new(self.dx_m, self.dy_m, self.antenna_height_m, self.waveguide_length()),
            radio: RadioConstants::new(
                self.carrier_freq_ghz * 1.0e9,
                self.bandwidth_mhz * 1.0e6,
                self.noise_power_watts(),
            ),
            power_budget: self.power_budget_watts(),
            theta: self.theta_watts(),
        }
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            mu_tol: self.solver.mu_tol,
            outer_tol: self.solver.outer_tol_s,
            antenna_tol: self.solver.antenna_tol_m,
            p0_grid_points: self.solver.p0_grid_points,
            p0_margin: 1e-6 * self.power_budget_watts(),
            max_outer_iters: self.solver.max_outer_iters,
            golden_subintervals: self.solver.golden_subintervals,
            max_alt_iters: self.solver.max_alt_iters,
        }
    }

    /// Overrides one sweepable parameter; only the parameters that drive the
    /// figure sweeps are accepted.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "power_budget_dbm" => self.power_budget_dbm = value,
            "zipf_exponent" => self.zipf_exponent = value,
            "dx_m" => self.dx_m = value,
            "dy_m" => self.dy_m = value,
            "num_users" => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::Config {
                        field: "num_users".into(),
                        reason: format!("sweep value must be a positive integer, got {value}"),
                    });
                }
                self.num_users = value as usize;
            }
            other => {
                return Err(Error::Config {
                    field: other.to_string(),
                    reason: "not a sweepable parameter (expected power_budget_dbm, \
                             zipf_exponent, dx_m, dy_m, num_users)"
                        .into(),
                })
            }
        }
        self.validate()
    }
}
