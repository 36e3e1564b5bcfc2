//! Seeded replications. Replication `r` at grid point `g` always draws from
//! the stream `(seed, domain, g, r)`, so serial and parallel runs agree
//! bit for bit.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::{summarize, LengthPowerSpec};
use crate::point_process::sample;
use crate::rng::{stream, StreamDomain};

use super::ExperimentConfig;

/// Statistics gathered per replication.
#[derive(Debug, Clone, PartialEq)]
pub struct StatRequest {
    pub alphas: Vec<f64>,
    /// Exponent applied to the tracked order statistics.
    pub order_alpha: f64,
    pub order_count: usize,
}

impl StatRequest {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            alphas: cfg.alphas.clone(),
            order_alpha: cfg.alphas[0],
            order_count: cfg.order_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRow {
    pub rep: u64,
    pub n_points: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    /// `L^(α)` for each requested exponent.
    pub length_powers: Vec<f64>,
    /// Smallest `length^α` values, `+∞` when there are fewer edges.
    pub order_statistics: Vec<f64>,
}

/// All replications at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPointRun {
    pub grid_index: usize,
    pub size: f64,
    pub delta: f64,
    pub request: StatRequest,
    pub rows: Vec<ReplicationRow>,
}

impl GridPointRun {
    /// `L^(α_k)` across replications.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.length_powers[k]).collect()
    }

    /// Replications × exponents.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.length_powers.clone()).collect()
    }

    /// The `m`-th smallest `length^α` (1-based) across replications.
    pub fn order_column(&self, m: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.order_statistics[m - 1])
            .collect()
    }

    /// Columns `size, rep, alpha, L_value, n_points, max_degree, S1..Sm`, one
    /// row per replication and exponent.
    pub fn write_csv<W: Write>(&self, out: &mut W, header: bool) -> io::Result<()> {
        if header {
            write!(out, "size,rep,alpha,L_value,n_points,max_degree")?;
            for m in 1..=self.request.order_count {
                write!(out, ",S{m}")?;
            }
            writeln!(out)?;
        }
        for row in &self.rows {
            for (alpha, value) in self.request.alphas.iter().zip(&row.length_powers) {
                write!(
                    out,
                    "{},{},{alpha},{value},{},{}",
                    self.size, row.rep, row.n_points, row.max_degree
                )?;
                for s in &row.order_statistics {
                    write!(out, ",{s}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// `reps` replications at grid point `grid_index` of `cfg`, drawn from the
/// streams of `domain`.
pub fn run_grid_point(
    cfg: &ExperimentConfig,
    grid_index: usize,
    domain: StreamDomain,
    reps: usize,
) -> Result<GridPointRun> {
    let size = cfg.grid[grid_index];
    let delta = cfg.radius.at(size);
    let model = cfg.point_model(size);
    let request = StatRequest::from_config(cfg);
    let spec = LengthPowerSpec::new(request.alphas.clone())?;
    let one = |rep: u64| -> Result<ReplicationRow> {
        let mut rng = stream(cfg.seed, domain, grid_index as u64, rep);
        let s = sample(&cfg.window, model, &mut rng, cfg.seed, rep)?;
        let g = summarize(&s, delta, &spec, request.order_alpha, request.order_count);
        Ok(ReplicationRow {
            rep,
            n_points: s.len(),
            edge_count: g.edge_count,
            max_degree: g.max_degree,
            length_powers: g.length_powers,
            order_statistics: g.order_statistics,
        })
    };
    let rows = if cfg.parallel {
        (0..reps as u64)
            .into_par_iter()
            .map(one)
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..reps as u64).map(one).collect::<Result<Vec<_>>>()?
    };
    Ok(GridPointRun {
        grid_index,
        size,
        delta,
        request,
        rows,
    })
}

/// The main replications at every grid point.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<Vec<GridPointRun>> {
    cfg.validate()?;
    (0..cfg.grid.len())
        .map(|g| run_grid_point(cfg, g, StreamDomain::Replication, cfg.reps))
        .collect()
}
