//! Experiment reports: named metrics with verdicts, plus tabular output.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::theory::PredictionValue;

use super::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The estimate is too noisy for the check to say anything.
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRef {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub empirical: Option<f64>,
    pub theory: Option<PredictionValue>,
    pub se: Option<f64>,
    pub tolerance: ToleranceRef,
    pub verdict: Verdict,
    pub paper_anchor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Metric {
    pub fn new(name: impl Into<String>, anchor: &str) -> Self {
        Self {
            name: name.into(),
            empirical: None,
            theory: None,
            se: None,
            tolerance: ToleranceRef {
                name: String::new(),
                value: 0.0,
            },
            verdict: Verdict::Inconclusive,
            paper_anchor: anchor.into(),
            note: None,
        }
    }

    pub fn empirical(mut self, v: f64) -> Self {
        self.empirical = Some(v);
        self
    }

    pub fn theory(mut self, v: f64) -> Self {
        self.theory = Some(PredictionValue::Scalar(v));
        self
    }

    pub fn interval(mut self, lo: f64, hi: f64) -> Self {
        self.theory = Some(PredictionValue::Interval { lo, hi });
        self
    }

    pub fn se(mut self, v: f64) -> Self {
        self.se = Some(v);
        self
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerance = ToleranceRef {
            name: name.into(),
            value,
        };
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn verdict(mut self, ok: bool) -> Self {
        self.verdict = Verdict::from_bool(ok);
        self
    }

    pub fn inconclusive(mut self) -> Self {
        self.verdict = Verdict::Inconclusive;
        self
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<5} {}", self.verdict, self.name)?;
        if let Some(e) = self.empirical {
            write!(f, " empirical={e:.6}")?;
        }
        match self.theory {
            Some(PredictionValue::Scalar(v)) => write!(f, " theory={v:.6}")?,
            Some(PredictionValue::Interval { lo, hi }) => write!(f, " theory=[{lo:.6}, {hi:.6}]")?,
            None => {}
        }
        if let Some(se) = self.se {
            write!(f, " se={se:.3e}")?;
        }
        write!(f, " {}={}", self.tolerance.name, self.tolerance.value)
    }
}

/// Named numeric table, written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub metrics: Vec<Metric>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Table>,
    pub seed: u64,
    pub version: String,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            metrics: Vec::new(),
            tables: Vec::new(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn push(&mut self, metric: Metric) {
        self.metrics.push(metric);
    }

    /// No metric failed. Inconclusive metrics do not count as failures.
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(|m| m.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Metric> {
        self.metrics.iter().filter(|m| m.verdict == Verdict::Fail)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::VerificationKind;
    use crate::geometry::ConvexWindow;

    #[test]
    fn json_has_schema_fields() {
        let cfg = ExperimentConfig::new(VerificationKind::Moments, ConvexWindow::unit_square());
        let mut r = ExperimentReport::new(&cfg);
        r.push(
            Metric::new("mean", "expectation identity")
                .empirical(1.0)
                .theory(1.1)
                .se(0.1)
                .tolerance("mean_se", 4.0)
                .verdict(true),
        );
        r.push(
            Metric::new("cov", "covariance sandwich")
                .empirical(1.0)
                .interval(0.0, 2.0)
                .tolerance("mean_se", 4.0)
                .verdict(false),
        );
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["config", "metrics", "seed", "version"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let m = &v["metrics"][1];
        for key in [
            "name",
            "empirical",
            "theory",
            "se",
            "tolerance",
            "verdict",
            "paper_anchor",
        ] {
            assert!(m.get(key).is_some(), "{key}");
        }
        assert_eq!(m["theory"]["lo"], 0.0);
        assert_eq!(m["verdict"], "fail");
        assert!(!r.passed());
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new("tails", &["u", "empirical_tail"]);
        t.push(vec![0.5, 0.25]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "u,empirical_tail\n0.5,0.25\n"
        );
    }
}
