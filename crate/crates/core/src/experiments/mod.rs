//! Monte Carlo harness: seeded replications, estimators and the
//! verification suites comparing simulation output with the theory module.

pub mod config;
pub mod report;
pub mod runner;
pub mod stats;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GilbertError, Result};
use crate::geometry::ConvexWindow;
use crate::point_process::PointModel;
use crate::theory::RegimeSchedule;

pub use config::{load_config, parse_config};
pub use report::{ExperimentReport, Metric, Table, ToleranceRef, Verdict};
pub use runner::{run_grid_point, run_replications, GridPointRun, ReplicationRow, StatRequest};
pub use stats::{
    clopper_pearson_upper, empirical_moments, ks_statistic, ks_two_sample, log_log_slope, median,
    standard_normal_cdf, EmpiricalCdf, Moments,
};
pub use verify::{
    verify, verify_clt, verify_compound_poisson, verify_ldi, verify_moments, verify_multivariate,
    verify_order_statistics, verify_pp_conditions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerificationKind {
    Moments,
    #[serde(rename = "CLT")]
    Clt,
    MultivariateCov,
    CompoundPoisson,
    OrderStatistics,
    #[serde(rename = "LDI")]
    Ldi,
    PPConditions,
}

impl VerificationKind {
    pub const ALL: [VerificationKind; 7] = [
        Self::Moments,
        Self::Clt,
        Self::MultivariateCov,
        Self::CompoundPoisson,
        Self::OrderStatistics,
        Self::Ldi,
        Self::PPConditions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Moments => "Moments",
            Self::Clt => "CLT",
            Self::MultivariateCov => "MultivariateCov",
            Self::CompoundPoisson => "CompoundPoisson",
            Self::OrderStatistics => "OrderStatistics",
            Self::Ldi => "LDI",
            Self::PPConditions => "PPConditions",
        }
    }
}

impl fmt::Display for VerificationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VerificationKind {
    type Err = GilbertError;

    /// Case-insensitive; underscores and dashes are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-'))
            .collect::<String>()
            .to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name().to_ascii_lowercase() == key)
            .ok_or_else(|| {
                GilbertError::InvalidParameter(format!("unknown verification kind `{s}`"))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Poisson,
    Binomial,
}

/// Connection radius: fixed, or `δ = a · size^{−γ}` along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radius {
    Fixed(f64),
    Schedule(RegimeSchedule),
}

impl Radius {
    pub fn at(&self, size: f64) -> f64 {
        match self {
            Radius::Fixed(d) => *d,
            Radius::Schedule(s) => s.delta(size),
        }
    }

    pub fn schedule(&self) -> Option<&RegimeSchedule> {
        match self {
            Radius::Schedule(s) => Some(s),
            Radius::Fixed(_) => None,
        }
    }
}

/// Every pass/fail threshold used by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Multiple of the standard error allowed for mean-type checks.
    pub mean_se: f64,
    /// Relative tolerance for variances and covariances.
    pub var_rel: f64,
    pub ks: f64,
    /// KS tolerance for the smallest rescaled edge length.
    pub ks_first_order: f64,
    /// Absolute floor for entrywise comparison of normalised covariances.
    pub cov_abs: f64,
    /// Upper limit on the smallest eigenvalue in the dense regime.
    pub eigen: f64,
    /// Upper limit on the log-log slope of KS against `t`.
    pub ks_slope: f64,
    pub pp_rel: f64,
    pub rt_rel: f64,
    /// One-sided confidence of Clopper–Pearson upper limits.
    pub cp_confidence: f64,
    pub corr: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mean_se: 4.0,
            var_rel: 0.10,
            ks: 0.05,
            ks_first_order: 0.03,
            cov_abs: 0.1,
            eigen: 0.05,
            ks_slope: -0.3,
            pp_rel: 0.02,
            rt_rel: 0.01,
            cp_confidence: 0.999,
            corr: 0.05,
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: VerificationKind,
    pub window: ConvexWindow,
    pub model: ModelKind,
    /// Intensities `t`, or point counts `n`, one per grid point.
    pub grid: Vec<f64>,
    pub radius: Radius,
    pub alphas: Vec<f64>,
    pub reps: usize,
    /// Replications of the independent pilot run (medians for LDI).
    pub pilot_reps: usize,
    pub seed: u64,
    /// Scheduling only; results do not depend on it, so reports leave it out.
    #[serde(skip, default = "parallel_default")]
    pub parallel: bool,
    /// How many order statistics to track.
    pub order_count: usize,
    /// Draws from the compound Poisson limit used as reference.
    pub cp_draws: usize,
    /// Number of deviation levels `u`.
    pub u_points: usize,
    /// Levels `u` for the convergence conditions.
    pub u_values: Vec<f64>,
    pub tolerances: Tolerances,
}

fn parallel_default() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(kind: VerificationKind, window: ConvexWindow) -> Self {
        Self {
            kind,
            window,
            model: ModelKind::Poisson,
            grid: vec![100.0],
            radius: Radius::Fixed(0.05),
            alphas: vec![0.0],
            reps: 1000,
            pilot_reps: 1000,
            seed: 0,
            parallel: true,
            order_count: 5,
            cp_draws: 1_000_000,
            u_points: 20,
            u_values: vec![0.5, 1.0, 2.0],
            tolerances: Tolerances::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn point_model(&self, size: f64) -> PointModel {
        match self.model {
            ModelKind::Poisson => PointModel::Poisson { t: size },
            ModelKind::Binomial => PointModel::Binomial { n: size as usize },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(GilbertError::Config {
                key: key.into(),
                message,
            })
        };
        if self.reps < 2 {
            return bad(
                "reps",
                format!("need at least 2 replications, got {}", self.reps),
            );
        }
        if self.grid.is_empty() {
            return bad("t", "no intensity or point count given".into());
        }
        for &g in &self.grid {
            if !(g > 0.0 && g.is_finite()) {
                return bad("t", format!("grid value {g} is not positive"));
            }
            if self.model == ModelKind::Binomial && (g.fract() != 0.0 || g < 2.0) {
                return bad("n", format!("point count {g} must be an integer ≥ 2"));
            }
        }
        if let Radius::Fixed(d) = self.radius {
            if !(d > 0.0 && d.is_finite()) {
                return bad("delta", format!("radius {d} is not positive"));
            }
        }
        if let Radius::Schedule(s) = self.radius {
            if s.dim != self.dim() {
                return bad(
                    "schedule",
                    format!(
                        "schedule dimension {} differs from window dimension {}",
                        s.dim,
                        self.dim()
                    ),
                );
            }
        }
        if self.alphas.is_empty() {
            return bad("alphas", "at least one exponent is required".into());
        }
        let t = &self.tolerances;
        let all = [
            ("tol_mean_se", t.mean_se),
            ("tol_var_rel", t.var_rel),
            ("tol_ks", t.ks),
            ("tol_ks_first_order", t.ks_first_order),
            ("tol_cov_abs", t.cov_abs),
            ("tol_eigen", t.eigen),
            ("tol_pp_rel", t.pp_rel),
            ("tol_rt_rel", t.rt_rel),
            ("tol_cp_confidence", t.cp_confidence),
            ("tol_corr", t.corr),
        ];
        for (key, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, format!("tolerance {v} must be positive"));
            }
        }
        if t.cp_confidence >= 1.0 {
            return bad("tol_cp_confidence", "confidence must be below 1".into());
        }
        if !t.ks_slope.is_finite() {
            return bad("tol_ks_slope", "slope limit must be finite".into());
        }
        Ok(())
    }
}
