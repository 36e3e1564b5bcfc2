//! Flat `key = value` configuration files.
//!
//! ```text
//! # thermodynamic CLT run
//! kind = CLT
//! window = box:1x1
//! t = 500, 2000, 8000
//! schedule = 1, 0.5
//! alphas = 1
//! reps = 2000
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{GilbertError, Result};
use crate::geometry::ConvexWindow;
use crate::theory::RegimeSchedule;

use super::{ExperimentConfig, ModelKind, Radius, Tolerances, VerificationKind};

pub const SEED_ENV: &str = "GILBERT_SEED";

const KEYS: &[&str] = &[
    "kind",
    "window",
    "dim",
    "model",
    "t",
    "n",
    "delta",
    "schedule",
    "alphas",
    "reps",
    "pilot_reps",
    "seed",
    "parallel",
    "order_count",
    "cp_draws",
    "u_points",
    "u_values",
    "tol_mean_se",
    "tol_var_rel",
    "tol_ks",
    "tol_ks_first_order",
    "tol_cov_abs",
    "tol_eigen",
    "tol_ks_slope",
    "tol_pp_rel",
    "tol_rt_rel",
    "tol_cp_confidence",
    "tol_corr",
];

fn canonical(key: &str) -> Option<&'static str> {
    match key {
        "t_grid" => Some("t"),
        "n_grid" => Some("n"),
        "alpha" => Some("alphas"),
        _ => KEYS.iter().copied().find(|k| *k == key),
    }
}

/// Keys that cannot be combined; setting one removes the others.
fn exclusive(key: &str) -> &'static [&'static str] {
    match key {
        "t" => &["n"],
        "n" => &["t"],
        "delta" => &["schedule"],
        "schedule" => &["delta"],
        _ => &[],
    }
}

fn config_error(key: &str, message: impl Into<String>) -> GilbertError {
    GilbertError::Config {
        key: key.into(),
        message: message.into(),
    }
}

/// Unresolved key/value pairs, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<&'static str, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_error(line, format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let name = canonical(key).ok_or_else(|| config_error(key, "unknown key"))?;
            if raw.entries.contains_key(name) {
                return Err(config_error(key, "duplicate key"));
            }
            if let Some(other) = exclusive(name)
                .iter()
                .find(|k| raw.entries.contains_key(*k))
            {
                return Err(config_error(
                    key,
                    format!("cannot be combined with `{other}`"),
                ));
            }
            raw.entries.insert(name, value.trim().to_string());
        }
        Ok(raw)
    }

    /// Overrides one key, dropping any key it excludes.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let name = canonical(key).ok_or_else(|| config_error(key, "unknown key"))?;
        for other in exclusive(name) {
            self.entries.remove(other);
        }
        self.entries.insert(name, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        canonical(key)
            .and_then(|k| self.entries.get(k))
            .map(String::as_str)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let e = &self.entries;
        let kind: VerificationKind = match e.get("kind") {
            Some(v) => v
                .parse()
                .map_err(|_| config_error("kind", format!("unknown verification kind `{v}`")))?,
            None => return Err(config_error("kind", "missing")),
        };
        let dim = e
            .get("dim")
            .map(|v| parse_scalar::<usize>("dim", v))
            .transpose()?;
        let window = match e.get("window") {
            Some(v) => parse_window(v, dim)?,
            None => return Err(config_error("window", "missing")),
        };
        let mut cfg = ExperimentConfig::new(kind, window);
        let d = cfg.dim();

        let model = e
            .get("model")
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "poisson" => Ok(ModelKind::Poisson),
                "binomial" => Ok(ModelKind::Binomial),
                _ => Err(config_error(
                    "model",
                    format!("expected `poisson` or `binomial`, got `{v}`"),
                )),
            })
            .transpose()?;
        let grid_key = match (e.get("t"), e.get("n")) {
            (Some(_), None) => Some("t"),
            (None, Some(_)) => Some("n"),
            _ => None,
        };
        cfg.model = match (model, grid_key) {
            (Some(ModelKind::Poisson), Some("n")) => {
                return Err(config_error("n", "Poisson model takes `t`"))
            }
            (Some(ModelKind::Binomial), Some("t")) => {
                return Err(config_error("t", "binomial model takes `n`"))
            }
            (Some(m), _) => m,
            (None, Some("n")) => ModelKind::Binomial,
            _ => ModelKind::Poisson,
        };
        if let Some(key) = grid_key {
            cfg.grid = parse_list(key, &e[key])?;
        } else {
            let key = if cfg.model == ModelKind::Binomial {
                "n"
            } else {
                "t"
            };
            return Err(config_error(key, "missing"));
        }

        cfg.radius = match (e.get("delta"), e.get("schedule")) {
            (Some(v), None) => Radius::Fixed(parse_scalar("delta", v)?),
            (None, Some(v)) => {
                let parts = parse_list("schedule", v)?;
                if parts.len() != 2 {
                    return Err(config_error("schedule", "expected `a, gamma`"));
                }
                Radius::Schedule(
                    RegimeSchedule::new(parts[0], parts[1], d)
                        .map_err(|err| config_error("schedule", err.to_string()))?,
                )
            }
            _ => {
                return Err(config_error(
                    "delta",
                    "one of `delta` or `schedule` is required",
                ))
            }
        };

        if let Some(v) = e.get("alphas") {
            cfg.alphas = parse_list("alphas", v)?;
        }
        macro_rules! scalar {
            ($key:literal, $field:expr) => {
                if let Some(v) = e.get($key) {
                    $field = parse_scalar($key, v)?;
                }
            };
        }
        scalar!("reps", cfg.reps);
        cfg.pilot_reps = cfg.reps;
        scalar!("pilot_reps", cfg.pilot_reps);
        scalar!("seed", cfg.seed);
        scalar!("parallel", cfg.parallel);
        scalar!("order_count", cfg.order_count);
        scalar!("cp_draws", cfg.cp_draws);
        scalar!("u_points", cfg.u_points);
        if let Some(v) = e.get("u_values") {
            cfg.u_values = parse_list("u_values", v)?;
        }
        let t = &mut cfg.tolerances;
        scalar!("tol_mean_se", t.mean_se);
        scalar!("tol_var_rel", t.var_rel);
        scalar!("tol_ks", t.ks);
        scalar!("tol_ks_first_order", t.ks_first_order);
        scalar!("tol_cov_abs", t.cov_abs);
        scalar!("tol_eigen", t.eigen);
        scalar!("tol_ks_slope", t.ks_slope);
        scalar!("tol_pp_rel", t.pp_rel);
        scalar!("tol_rt_rel", t.rt_rel);
        scalar!("tol_cp_confidence", t.cp_confidence);
        scalar!("tol_corr", t.corr);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| config_error(key, format!("invalid value `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split(',')
        .map(|p| parse_scalar(key, p))
        .collect::<Result<_>>()?;
    if items.iter().any(|v| !v.is_finite()) {
        return Err(config_error(key, "values must be finite"));
    }
    Ok(items)
}

/// `box:1x1`, `ball:1@d=3`, or the short forms `box:1` / `ball:1` with an
/// explicit dimension.
pub fn parse_window(value: &str, dim: Option<usize>) -> Result<ConvexWindow> {
    let v = value.trim();
    let expanded = match (v.split_once(':'), dim) {
        (Some(("box", body)), Some(d)) if !body.contains('x') => vec![body.trim(); d].join("x"),
        (Some(("ball", body)), Some(d)) if !body.contains('@') => {
            format!("ball:{}@d={d}", body.trim())
        }
        _ => v.to_string(),
    };
    let expanded = if expanded.starts_with("ball:") || expanded.starts_with("box:") {
        expanded
    } else {
        format!("box:{expanded}")
    };
    let w: ConvexWindow = expanded
        .parse()
        .map_err(|e: GilbertError| config_error("window", e.to_string()))?;
    if let Some(d) = dim {
        if w.dim() != d {
            return Err(config_error(
                "dim",
                format!("window `{value}` has dimension {}, not {d}", w.dim()),
            ));
        }
    }
    Ok(w)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    RawConfig::parse(text)?.resolve()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Seed precedence: explicit flag, then the `GILBERT_SEED` environment
/// variable, then the configured value.
pub fn resolve_seed(flag: Option<u64>, configured: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_scalar(SEED_ENV, &v),
        Err(_) => Ok(configured),
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical text form; parsing it yields the same configuration.
pub fn to_config_string(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("kind", cfg.kind.to_string());
    put("window", cfg.window.to_string());
    put(
        "model",
        if cfg.model == ModelKind::Poisson {
            "poisson"
        } else {
            "binomial"
        }
        .into(),
    );
    put(
        if cfg.model == ModelKind::Poisson {
            "t"
        } else {
            "n"
        },
        join(&cfg.grid),
    );
    match cfg.radius {
        Radius::Fixed(d) => put("delta", d.to_string()),
        Radius::Schedule(s) => put("schedule", join(&[s.a, s.gamma])),
    }
    put("alphas", join(&cfg.alphas));
    put("reps", cfg.reps.to_string());
    put("pilot_reps", cfg.pilot_reps.to_string());
    put("seed", cfg.seed.to_string());
    put("parallel", cfg.parallel.to_string());
    put("order_count", cfg.order_count.to_string());
    put("cp_draws", cfg.cp_draws.to_string());
    put("u_points", cfg.u_points.to_string());
    put("u_values", join(&cfg.u_values));
    let Tolerances {
        mean_se,
        var_rel,
        ks,
        ks_first_order,
        cov_abs,
        eigen,
        ks_slope,
        pp_rel,
        rt_rel,
        cp_confidence,
        corr,
    } = cfg.tolerances;
    for (k, v) in [
        ("tol_mean_se", mean_se),
        ("tol_var_rel", var_rel),
        ("tol_ks", ks),
        ("tol_ks_first_order", ks_first_order),
        ("tol_cov_abs", cov_abs),
        ("tol_eigen", eigen),
        ("tol_ks_slope", ks_slope),
        ("tol_pp_rel", pp_rel),
        ("tol_rt_rel", rt_rel),
        ("tol_cp_confidence", cp_confidence),
        ("tol_corr", corr),
    ] {
        put(k, v.to_string());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "kind = moments\nwindow = box:1x1\nt = 100\ndelta = 0.05\n";

    #[test]
    fn minimal_file_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.kind, VerificationKind::Moments);
        assert_eq!(cfg.grid, vec![100.0]);
        assert_eq!(cfg.radius, Radius::Fixed(0.05));
        assert_eq!(cfg.model, ModelKind::Poisson);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\nkind = CLT # trailing\nwindow = box:1\ndim = 3\nt_grid = 10, 20\nschedule = 1, 0.5\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.dim(), 3);
        assert_eq!(cfg.grid, vec![10.0, 20.0]);
        assert_eq!(cfg.radius.at(100.0), 0.1);
    }

    #[test]
    fn rejects_bad_keys() {
        let err = parse_config(&format!("{MINIMAL}bogus = 1\n")).unwrap_err();
        assert_eq!(
            err,
            GilbertError::Config {
                key: "bogus".into(),
                message: "unknown key".into()
            }
        );
        let err = parse_config(&format!("{MINIMAL}t = 5\n")).unwrap_err();
        assert!(
            matches!(err, GilbertError::Config { ref key, ref message } if key == "t" && message == "duplicate key")
        );
        let err = parse_config(&format!("{MINIMAL}schedule = 1, 0.5\n")).unwrap_err();
        assert!(matches!(err, GilbertError::Config { ref key, .. } if key == "schedule"));
        let err = parse_config("kind = moments\nt = 1\ndelta = 0.1\n").unwrap_err();
        assert!(matches!(err, GilbertError::Config { ref key, .. } if key == "window"));
        let err = parse_config(&MINIMAL.replace("100", "-1")).unwrap_err();
        assert!(matches!(err, GilbertError::Config { ref key, .. } if key == "t"));
        let err = parse_config(&format!("{MINIMAL}reps = 1\n")).unwrap_err();
        assert!(matches!(err, GilbertError::Config { ref key, .. } if key == "reps"));
        let err = parse_config(&format!("{MINIMAL}tol_ks = 0\n")).unwrap_err();
        assert!(matches!(err, GilbertError::Config { ref key, .. } if key == "tol_ks"));
    }

    #[test]
    fn binomial_inferred_from_n() {
        let cfg = parse_config("kind = LDI\nwindow = box:1x1\nn = 500\ndelta = 0.05\n").unwrap();
        assert_eq!(cfg.model, ModelKind::Binomial);
        assert!(parse_config("kind = LDI\nwindow = box:1x1\nn = 500.5\ndelta = 0.05\n").is_err());
        assert!(parse_config(
            "kind = LDI\nwindow = box:1x1\nmodel = poisson\nn = 500\ndelta = 0.05\n"
        )
        .is_err());
    }

    #[test]
    fn overrides_replace_exclusive_keys() {
        let mut raw = RawConfig::parse(MINIMAL).unwrap();
        raw.set("schedule", "1, 0.5").unwrap();
        raw.set("t_grid", "100, 400").unwrap();
        let cfg = raw.resolve().unwrap();
        assert_eq!(cfg.radius.at(400.0), 0.05);
        assert!(raw.set("nonsense", "1").is_err());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = "kind = OrderStatistics\nwindow = ball:2@d=3\nt = 50, 100\nschedule = 1, 0.8\nalphas = 2\nreps = 17\nseed = 99\ntol_ks = 0.07\n";
        let cfg = parse_config(text).unwrap();
        let once = to_config_string(&cfg);
        let again = to_config_string(&parse_config(&once).unwrap());
        assert_eq!(once, again);
        assert_eq!(parse_config(&once).unwrap(), cfg);
    }

    #[test]
    fn schedule_consistency() {
        let cfg = parse_config("kind = CLT\nwindow = box:1x1\nt = 100, 10000\nschedule = 2, 0.5\n")
            .unwrap();
        let deltas: Vec<f64> = cfg.grid.iter().map(|&t| cfg.radius.at(t)).collect();
        assert_eq!(deltas, vec![0.2, 0.02]);
    }

    #[test]
    fn explicit_flag_wins() {
        assert_eq!(resolve_seed(Some(3), 5).unwrap(), 3);
    }

    #[test]
    fn window_short_forms() {
        assert_eq!(
            parse_window("ball:1", Some(3)).unwrap(),
            ConvexWindow::ball(1.0, 3).unwrap()
        );
        assert_eq!(
            parse_window("box:2", Some(2)).unwrap(),
            ConvexWindow::cuboid(vec![2.0, 2.0]).unwrap()
        );
        assert_eq!(
            parse_window("1x1", None).unwrap(),
            ConvexWindow::unit_square()
        );
        assert!(parse_window("box:1x1", Some(3)).is_err());
    }
}
