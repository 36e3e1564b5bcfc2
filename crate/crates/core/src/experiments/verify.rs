//! Verification suites. Each suite runs its own replications, compares them
//! with the matching theoretical quantity and records one [`Metric`] per
//! comparison. Statistical failures become `Fail` verdicts; only invalid
//! configurations return errors.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GilbertError, Result};
use crate::geometry::unit_ball_volume;
use crate::rng::{stream, StreamDomain};
use crate::theory::deviations::{ldi_bound, ldi_envelope, LdiInput, LdiMode};
use crate::theory::limits::{
    order_statistic_limit_cdf, pp_conditions, pp_conditions_limit, sample_compound_poisson,
    CompoundPoissonModel, EdgeLengthProcessLimit, ExponentConvention, LimitRegime,
};
use crate::theory::moments::{
    covariance_bounds, covariance_exact, expectation_bounds, expectation_exact, kolmogorov_bound,
    normalization, sigma_matrix, VarianceSource,
};
use crate::theory::{EdgeRegime, Regime, RegimeSchedule};

use super::report::{ExperimentReport, Metric, Table};
use super::runner::{run_grid_point, run_replications, GridPointRun};
use super::stats::{
    clopper_pearson_upper, correlation, empirical_moments, ks_statistic, ks_two_sample,
    log_log_slope, mean, median, standard_normal_cdf, standardize, variance,
};
use super::{ExperimentConfig, ModelKind, VerificationKind};

const EXPECTATION: &str = "expectation identity";
const EXPECTATION_BOUNDS: &str = "expectation sandwich";
const COVARIANCE: &str = "covariance identity";
const COVARIANCE_BOUNDS: &str = "covariance sandwich";
const NORMAL_APPROX: &str = "normal approximation in Kolmogorov distance";
const SIGMA: &str = "asymptotic covariance matrix";
const COMPOUND_POISSON: &str = "compound Poisson limit";
const ORDER_STATISTICS: &str = "order statistics of the edge-length process";
const POISSON_PROCESS: &str = "Poisson limit of the edge-length process";
const DEVIATION: &str = "median deviation inequality";
const DEVIATION_ENVELOPE: &str = "median deviation envelope";
const CONDITIONS: &str = "Poisson process convergence conditions";

/// Order statistics tracked when counting points in intervals.
const COUNT_DEPTH: usize = 16;

/// Runs the suite selected by `cfg.kind`.
pub fn verify(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        VerificationKind::Moments => verify_moments(cfg),
        VerificationKind::Clt => verify_clt(cfg),
        VerificationKind::MultivariateCov => verify_multivariate(cfg),
        VerificationKind::CompoundPoisson => verify_compound_poisson(cfg),
        VerificationKind::OrderStatistics => verify_order_statistics(cfg),
        VerificationKind::Ldi => verify_ldi(cfg),
        VerificationKind::PPConditions => verify_pp_conditions(cfg),
    }
}

fn require_poisson(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.model != ModelKind::Poisson {
        return Err(GilbertError::Unsupported(format!(
            "{} verification needs a Poisson model",
            cfg.kind
        )));
    }
    Ok(())
}

fn require_schedule(cfg: &ExperimentConfig) -> Result<RegimeSchedule> {
    cfg.radius
        .schedule()
        .copied()
        .ok_or_else(|| GilbertError::Config {
            key: "schedule".into(),
            message: format!("{} needs a schedule", cfg.kind),
        })
}

fn require_positive_alpha(cfg: &ExperimentConfig) -> Result<f64> {
    let a = cfg.alphas[0];
    if !(a > 0.0) {
        return Err(GilbertError::Config {
            key: "alphas".into(),
            message: format!("{} needs alpha > 0", cfg.kind),
        });
    }
    Ok(a)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Sample means and covariances against the exact moments.
pub fn verify_moments(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    require_poisson(cfg)?;
    let mut report = ExperimentReport::new(cfg);
    for run in run_replications(cfg)? {
        moment_checks(&mut report, cfg, &run, run.delta)?;
    }
    Ok(report)
}

/// Compares one grid point with the moments at radius `theory_delta`.
pub(crate) fn moment_checks(
    report: &mut ExperimentReport,
    cfg: &ExperimentConfig,
    run: &GridPointRun,
    theory_delta: f64,
) -> Result<()> {
    let w = &cfg.window;
    let (t, delta) = (run.size, theory_delta);
    let k = cfg.tolerances.mean_se;
    let rel = cfg.tolerances.var_rel;
    let mom = empirical_moments(&run.matrix())?;
    let alphas = &run.request.alphas;
    for (i, &a) in alphas.iter().enumerate() {
        let exact = expectation_exact(w, t, delta, a)?;
        let (lo, hi) = expectation_bounds(w, t, delta, a)?;
        let (m, se) = (mom.means[i], mom.std_errors[i]);
        report.push(
            Metric::new(format!("mean[t={t},alpha={a}]"), EXPECTATION)
                .empirical(m)
                .theory(exact)
                .se(se)
                .tolerance("mean_se", k)
                .verdict((m - exact).abs() <= k * se),
        );
        report.push(
            Metric::new(
                format!("mean_in_bounds[t={t},alpha={a}]"),
                EXPECTATION_BOUNDS,
            )
            .empirical(m)
            .interval(lo, hi)
            .se(se)
            .tolerance("mean_se", k)
            .verdict(m >= lo - k * se && m <= hi + k * se),
        );
    }
    for i in 0..alphas.len() {
        for j in i..alphas.len() {
            let (a, b) = (alphas[i], alphas[j]);
            let exact = covariance_exact(w, t, delta, a, b)?;
            let (lo, hi) = covariance_bounds(w, t, delta, a, b)?;
            let (c, se) = (mom.covariance[(i, j)], mom.cov_std_errors[(i, j)]);
            report.push(
                Metric::new(
                    format!("cov_in_bounds[t={t},alpha={a},beta={b}]"),
                    COVARIANCE_BOUNDS,
                )
                .empirical(c)
                .interval(lo, hi)
                .se(se)
                .tolerance("mean_se", k)
                .verdict(c >= lo - k * se && c <= hi + k * se),
            );
            let metric = Metric::new(format!("cov_rel[t={t},alpha={a},beta={b}]"), COVARIANCE)
                .empirical(c)
                .theory(exact)
                .se(se)
                .tolerance("var_rel", rel);
            report.push(if k * se > rel * exact.abs() {
                metric
                    .note("standard error too large for a relative check")
                    .inconclusive()
            } else {
                metric.verdict((c - exact).abs() <= rel * exact.abs())
            });
        }
    }
    Ok(())
}

/// Kolmogorov distance of the standardised functional to the normal law.
pub fn verify_clt(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    require_poisson(cfg)?;
    let mut report = ExperimentReport::new(cfg);
    let runs = run_replications(cfg)?;
    let tol = &cfg.tolerances;
    let mut table = Table::new("clt", &["t", "delta", "alpha", "ks", "kolmogorov_bound"]);
    for (i, &a) in cfg.alphas.iter().enumerate() {
        let mut ks_values = Vec::with_capacity(runs.len());
        for run in &runs {
            let t = run.size;
            let z = standardize(&run.column(i));
            let ks = ks_statistic(&z, standard_normal_cdf);
            ks_values.push(ks);
            let metric = Metric::new(format!("ks_within_bound[t={t},alpha={a}]"), NORMAL_APPROX)
                .empirical(ks)
                .note("standardised by the sample mean and deviation");
            let bound =
                match kolmogorov_bound(&cfg.window, t, run.delta, a, VarianceSource::LowerBound) {
                    Ok(b) => {
                        report.push(
                            metric
                                .theory(b)
                                .tolerance("kolmogorov_bound", b)
                                .verdict(ks <= b),
                        );
                        b
                    }
                    Err(GilbertError::DegenerateVariance(v)) => {
                        report.push(
                            metric
                                .note(format!("variance lower bound {v} is not positive"))
                                .inconclusive(),
                        );
                        f64::NAN
                    }
                    Err(e) => return Err(e),
                };
            table.push(vec![t, run.delta, a, ks, bound]);
        }
        let last = *ks_values.last().expect("non-empty grid");
        report.push(
            Metric::new(format!("ks_final[alpha={a}]"), NORMAL_APPROX)
                .empirical(last)
                .theory(0.0)
                .tolerance("ks", tol.ks)
                .verdict(last <= tol.ks),
        );
        if runs.len() >= 2 {
            let sizes: Vec<f64> = runs.iter().map(|r| r.size).collect();
            report.push(
                Metric::new(format!("ks_decreasing[alpha={a}]"), NORMAL_APPROX)
                    .empirical(ks_values[0] - last)
                    .tolerance("strict_decrease", 0.0)
                    .verdict(strictly_decreasing(&ks_values)),
            );
            let slope = log_log_slope(&sizes, &ks_values);
            report.push(
                Metric::new(format!("ks_slope[alpha={a}]"), NORMAL_APPROX)
                    .empirical(slope)
                    .theory(-0.5)
                    .tolerance("ks_slope", tol.ks_slope)
                    .verdict(slope <= tol.ks_slope),
            );
        }
    }
    report.tables.push(table);
    Ok(report)
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Covariance of the normalised vector against its asymptotic matrix.
pub fn verify_multivariate(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    require_poisson(cfg)?;
    let schedule = require_schedule(cfg)?;
    if cfg.alphas.len() < 2 {
        return Err(GilbertError::Config {
            key: "alphas".into(),
            message: "need at least two exponents".into(),
        });
    }
    let d = cfg.dim();
    let regime = schedule.regime();
    let sigma = sigma_matrix(&cfg.alphas, d, cfg.window.volume(), regime)?;
    let tol = &cfg.tolerances;
    let mut report = ExperimentReport::new(cfg);
    for run in run_replications(cfg)? {
        let t = run.size;
        let norms: Vec<f64> = cfg
            .alphas
            .iter()
            .map(|&a| normalization(t, run.delta, a, d))
            .collect();
        let scaled: Vec<Vec<f64>> = run
            .matrix()
            .into_iter()
            .map(|row| row.iter().zip(&norms).map(|(l, n)| l / n).collect())
            .collect();
        let mom = empirical_moments(&scaled)?;
        match regime {
            Regime::Dense => {
                let lambda = min_eigenvalue(&mom.covariance);
                report.push(
                    Metric::new(format!("min_eigenvalue[t={t}]"), SIGMA)
                        .empirical(lambda)
                        .theory(min_eigenvalue(&sigma))
                        .tolerance("eigen", tol.eigen)
                        .verdict(lambda <= tol.eigen),
                );
            }
            Regime::Sparse | Regime::Thermodynamic { .. } => {
                for i in 0..cfg.alphas.len() {
                    for j in i..cfg.alphas.len() {
                        let (c, se) = (mom.covariance[(i, j)], mom.cov_std_errors[(i, j)]);
                        let allowed = tol.cov_abs.max(tol.mean_se * se);
                        report.push(
                            Metric::new(format!("sigma[t={t},i={i},j={j}]"), SIGMA)
                                .empirical(c)
                                .theory(sigma[(i, j)])
                                .se(se)
                                .tolerance("max(cov_abs, mean_se*se)", allowed)
                                .verdict((c - sigma[(i, j)]).abs() <= allowed),
                        );
                    }
                }
                for (i, &a) in cfg.alphas.iter().enumerate() {
                    let column: Vec<f64> = scaled.iter().map(|r| r[i]).collect();
                    let ks = ks_statistic(&standardize(&column), standard_normal_cdf);
                    report.push(
                        Metric::new(format!("marginal_ks[t={t},alpha={a}]"), NORMAL_APPROX)
                            .empirical(ks)
                            .theory(0.0)
                            .tolerance("ks", tol.ks)
                            .verdict(ks <= tol.ks),
                    );
                }
            }
        }
    }
    Ok(report)
}

/// Rescaled functional against the compound Poisson limit.
pub fn verify_compound_poisson(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    require_poisson(cfg)?;
    let schedule = require_schedule(cfg)?;
    let alpha = require_positive_alpha(cfg)?;
    let c = schedule
        .edge_constant()
        .ok_or_else(|| GilbertError::Config {
            key: "schedule".into(),
            message: "compound Poisson limit needs t² δ^d to converge (gamma = 2/d)".into(),
        })?;
    let d = cfg.dim();
    let model = CompoundPoissonModel::new(c, d, alpha, cfg.window.volume())?;
    let mut rng = stream(cfg.seed, StreamDomain::Reference, 0, 0);
    let reference: Vec<f64> = (0..cfg.cp_draws)
        .map(|_| sample_compound_poisson(&model, &mut rng))
        .collect();

    let tol = &cfg.tolerances;
    let mut report = ExperimentReport::new(cfg);
    let mut table = Table::new("compound_poisson", &["t", "ks", "p_zero", "p_zero_limit"]);
    let runs = run_replications(cfg)?;
    let mut ks_values = Vec::new();
    let p = model.zero_probability();
    for run in &runs {
        let scale = run.size.powf(2.0 * alpha / d as f64);
        let z: Vec<f64> = run.column(0).iter().map(|l| l * scale).collect();
        let ks = ks_two_sample(&z, &reference);
        let zeros = run.rows.iter().filter(|r| r.edge_count == 0).count();
        table.push(vec![run.size, ks, zeros as f64 / run.rows.len() as f64, p]);
        ks_values.push(ks);
    }
    let last = runs.last().expect("non-empty grid");
    let ks_last = *ks_values.last().expect("non-empty grid");
    report.push(
        Metric::new("ks_final", COMPOUND_POISSON)
            .empirical(ks_last)
            .theory(0.0)
            .tolerance("ks", tol.ks)
            .verdict(ks_last <= tol.ks)
            .note(format!(
                "two-sample statistic against {} limit draws",
                cfg.cp_draws
            )),
    );
    if runs.len() >= 2 {
        report.push(
            Metric::new("ks_decreasing", COMPOUND_POISSON)
                .empirical(ks_values[0] - ks_last)
                .tolerance("strict_decrease", 0.0)
                .verdict(strictly_decreasing(&ks_values)),
        );
    }
    let r = last.rows.len() as f64;
    let p_hat = last.rows.iter().filter(|row| row.edge_count == 0).count() as f64 / r;
    let se = (p * (1.0 - p) / r).sqrt();
    report.push(
        Metric::new(format!("p_zero[t={}]", last.size), COMPOUND_POISSON)
            .empirical(p_hat)
            .theory(p)
            .se(se)
            .tolerance("mean_se", tol.mean_se)
            .verdict((p_hat - p).abs() <= tol.mean_se * se),
    );
    report.tables.push(table);
    Ok(report)
}

fn limit_regime(schedule: &RegimeSchedule) -> Result<LimitRegime> {
    match schedule.edge_regime() {
        EdgeRegime::EdgeInfinite => Ok(LimitRegime::EdgeInfinite),
        EdgeRegime::EdgeConstant { c } => Ok(LimitRegime::EdgeConstant { c }),
        EdgeRegime::EdgeVanishing => Err(GilbertError::Config {
            key: "schedule".into(),
            message: "the edge-length process has no limit when t² δ^d → 0".into(),
        }),
    }
}

/// Smallest rescaled edge lengths and interval counts against the limiting
/// Poisson process, at the largest grid point.
pub fn verify_order_statistics(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    require_poisson(cfg)?;
    let schedule = require_schedule(cfg)?;
    let alpha = require_positive_alpha(cfg)?;
    let regime = limit_regime(&schedule)?;
    let d = cfg.dim();
    let v = cfg.window.volume();
    let limit = EdgeLengthProcessLimit::new(regime, alpha, d, v)?;
    let mut deep = cfg.clone();
    deep.order_count = cfg.order_count.max(COUNT_DEPTH);
    let run = run_grid_point(
        &deep,
        cfg.grid.len() - 1,
        StreamDomain::Replication,
        cfg.reps,
    )?;
    let t = run.size;
    let scale = t.powf(2.0 * alpha / d as f64);
    let tol = &cfg.tolerances;
    let mut report = ExperimentReport::new(cfg);

    for m in 1..=cfg.order_count {
        let samples: Vec<f64> = run.order_column(m).iter().map(|s| s * scale).collect();
        let ks = ks_statistic(&samples, |u| {
            order_statistic_limit_cdf(m, u, &limit, ExponentConvention::FromIntensity)
        });
        let (name, value) = if m == 1 {
            ("ks_first_order", tol.ks_first_order)
        } else {
            ("ks", tol.ks)
        };
        report.push(
            Metric::new(format!("ks_order[t={t},m={m}]"), ORDER_STATISTICS)
                .empirical(ks)
                .theory(0.0)
                .tolerance(name, value)
                .verdict(ks <= value),
        );
    }

    let kappa = unit_ball_volume(d);
    let cap = match regime {
        LimitRegime::EdgeInfinite => f64::INFINITY,
        LimitRegime::EdgeConstant { c } => kappa / 2.0 * v * c,
    };
    let nu1 = 0.5f64.min(cap / 3.0);
    let level = |nu: f64| (2.0 * nu / (kappa * v)).powf(alpha / d as f64);
    let (u1, u2) = (level(nu1), level(2.0 * nu1));
    let depth = deep.order_count;
    let mut saturated = 0;
    let (mut n1, mut n2) = (Vec::new(), Vec::new());
    for row in &run.rows {
        let s: Vec<f64> = row.order_statistics.iter().map(|x| x * scale).collect();
        if s[depth - 1] <= u2 {
            saturated += 1;
        }
        n1.push(s.iter().filter(|&&x| x <= u1).count() as f64);
        n2.push(s.iter().filter(|&&x| x > u1 && x <= u2).count() as f64);
    }
    let r = run.rows.len() as f64;
    let corr = correlation(&n1, &n2);
    let mut metric = Metric::new(
        format!("interval_count_correlation[t={t}]"),
        POISSON_PROCESS,
    )
    .empirical(corr)
    .theory(0.0)
    .tolerance("corr", tol.corr)
    .verdict(corr.abs() <= tol.corr);
    if saturated > 0 {
        metric = metric.note(format!(
            "{saturated} replications exceeded the tracked depth"
        ));
    }
    report.push(metric);
    for (label, counts, nu) in [("[0,u1]", &n1, nu1), ("(u1,u2]", &n2, nu1)] {
        let (m, se) = (mean(counts), (variance(counts) / r).sqrt());
        report.push(
            Metric::new(
                format!("interval_count_mean[t={t},{label}]"),
                POISSON_PROCESS,
            )
            .empirical(m)
            .theory(nu)
            .se(se)
            .tolerance("mean_se", tol.mean_se)
            .verdict((m - nu).abs() <= tol.mean_se * se),
        );
    }
    if let LimitRegime::EdgeConstant { c } = regime {
        let top = c.powf(alpha / d as f64) * (1.0 + 1e-9);
        let beyond = run
            .rows
            .iter()
            .flat_map(|row| row.order_statistics.iter())
            .filter(|&&s| s.is_finite() && s * scale > top)
            .count();
        report.push(
            Metric::new(format!("support[t={t}]"), POISSON_PROCESS)
                .empirical(beyond as f64)
                .theory(0.0)
                .tolerance("support_rel", 1e-9)
                .verdict(beyond == 0),
        );
    }
    Ok(report)
}

/// Empirical deviation tails against the optimised bound and its envelope.
pub fn verify_ldi(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if let Some(&a) = cfg.alphas.iter().find(|a| !(**a >= 0.0)) {
        return Err(GilbertError::Config {
            key: "alphas".into(),
            message: format!("deviation bounds need alpha ≥ 0, got {a}"),
        });
    }
    if cfg.u_points == 0 {
        return Err(GilbertError::Config {
            key: "u_points".into(),
            message: "need at least one level".into(),
        });
    }
    let conf = cfg.tolerances.cp_confidence;
    let mut report = ExperimentReport::new(cfg);
    for g in 0..cfg.grid.len() {
        let pilot = run_grid_point(cfg, g, StreamDomain::Pilot, cfg.pilot_reps)?;
        let main = run_grid_point(cfg, g, StreamDomain::Replication, cfg.reps)?;
        let size = main.size;
        let mode = match cfg.model {
            ModelKind::Poisson => LdiMode::Poisson { t: size },
            ModelKind::Binomial => LdiMode::Binomial { n: size as usize },
        };
        for (i, &alpha) in cfg.alphas.iter().enumerate() {
            let m_hat = median(&pilot.column(i));
            let devs: Vec<f64> = main.column(i).iter().map(|l| (l - m_hat).abs()).collect();
            let max_dev = devs.iter().copied().fold(0.0, f64::max);
            let top = if max_dev > 0.0 { 1.2 * max_dev } else { 1.0 };
            let n = devs.len();
            let mut table = Table::new(
                &format!("ldi[size={size},alpha={alpha}]"),
                &[
                    "u",
                    "empirical_tail",
                    "cp_upper",
                    "ldi_bound",
                    "ldi_envelope",
                ],
            );
            for j in 1..=cfg.u_points {
                let u = top * j as f64 / cfg.u_points as f64;
                let k = devs.iter().filter(|&&x| x >= u).count();
                let upper = clopper_pearson_upper(k, n, conf);
                let input = LdiInput {
                    mode,
                    window: cfg.window.clone(),
                    delta: main.delta,
                    alpha,
                    median: m_hat,
                    u,
                };
                let bound = ldi_bound(&input)?;
                let envelope = ldi_envelope(&input)?;
                table.push(vec![u, k as f64 / n as f64, upper, bound, envelope]);
                let tag = format!("size={size},alpha={alpha},u={u:.6}");
                report.push(
                    Metric::new(format!("tail_below_bound[{tag}]"), DEVIATION)
                        .empirical(upper)
                        .theory(bound)
                        .tolerance("cp_confidence", conf)
                        .note("empirical value is the Clopper–Pearson upper limit")
                        .verdict(upper <= bound),
                );
                report.push(
                    Metric::new(format!("tail_below_envelope[{tag}]"), DEVIATION_ENVELOPE)
                        .empirical(upper)
                        .theory(envelope)
                        .tolerance("cp_confidence", conf)
                        .verdict(upper <= envelope),
                );
            }
            report.tables.push(table);
        }
    }
    Ok(report)
}

/// Tabulates the two convergence quantities along the grid.
pub fn verify_pp_conditions(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let schedule = require_schedule(cfg)?;
    let alpha = require_positive_alpha(cfg)?;
    let d = cfg.dim();
    let regime = schedule.edge_regime();
    let limit = match regime {
        EdgeRegime::EdgeInfinite => Some(LimitRegime::EdgeInfinite),
        EdgeRegime::EdgeConstant { c } => Some(LimitRegime::EdgeConstant { c }),
        EdgeRegime::EdgeVanishing => None,
    }
    .map(|r| EdgeLengthProcessLimit::new(r, alpha, d, cfg.window.volume()))
    .transpose()?;
    let tol = &cfg.tolerances;
    let inradius = cfg.window.inradius();
    let mut report = ExperimentReport::new(cfg);
    let mut table = Table::new(
        "pp_conditions",
        &["t", "u", "rho", "a_t", "a_limit", "r_t", "r_t_times_t"],
    );
    let t_last = *cfg.grid.last().expect("non-empty grid");
    for &u in &cfg.u_values {
        let target = limit.as_ref().map_or(0.0, |l| pp_conditions_limit(l, u));
        let mut a_values = Vec::new();
        let mut r_values = Vec::new();
        let mut interior = Vec::new();
        for &t in &cfg.grid {
            let c = pp_conditions(&cfg.window, t, cfg.radius.at(t), alpha, u)?;
            table.push(vec![t, u, c.rho, c.a_t, target, c.r_t, c.r_t * t]);
            a_values.push(c.a_t);
            r_values.push(c.r_t);
            if c.rho < inradius {
                interior.push(c.r_t * t);
            }
        }
        let a_last = *a_values.last().expect("non-empty grid");
        let metric = Metric::new(format!("a_t[t={t_last},u={u}]"), CONDITIONS)
            .empirical(a_last)
            .theory(target);
        report.push(if limit.is_some() {
            metric
                .tolerance("pp_rel", tol.pp_rel)
                .verdict((a_last / target - 1.0).abs() <= tol.pp_rel)
        } else {
            metric
                .tolerance("strict_decrease", 0.0)
                .verdict(strictly_decreasing(&a_values))
        });
        report.push(
            Metric::new(format!("r_t_decreasing[u={u}]"), CONDITIONS)
                .empirical(*r_values.last().expect("non-empty grid"))
                .theory(0.0)
                .tolerance("strict_decrease", 0.0)
                .verdict(strictly_decreasing(&r_values)),
        );
        let metric = Metric::new(format!("r_t_times_t_constant[u={u}]"), CONDITIONS)
            .theory(0.0)
            .tolerance("rt_rel", tol.rt_rel);
        report.push(if limit.is_none() {
            metric
                .note("r_t t tends to zero when t² δ^d → 0")
                .inconclusive()
        } else if interior.len() >= 2 {
            let hi = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = interior.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = hi / lo - 1.0;
            metric.empirical(spread).verdict(spread <= tol.rt_rel)
        } else {
            metric
                .note("fewer than two grid points with rho below the inradius")
                .inconclusive()
        });
    }
    report.tables.push(table);
    Ok(report)
}
