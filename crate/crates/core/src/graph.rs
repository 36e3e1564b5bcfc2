//! Gilbert graph construction and edge statistics.
//!
//! Edges join points at distance at most `δ`. The grid search buckets points
//! into cells of width slightly above `δ` and compares each occupied cell with
//! itself and the forward half of its `3^d` neighbourhood. Distances are
//! evaluated exactly as the all-pairs oracle does, so both produce bitwise
//! identical lengths.

use std::collections::BinaryHeap;
use std::io::{self, Write};

use crate::error::{GilbertError, Result};
use crate::point_process::PointSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// Edges of the graph on `source` at radius `delta`, sorted by `(i, j)`.
#[derive(Debug, Clone)]
pub struct EdgeSet<'a> {
    pub edges: Vec<Edge>,
    pub delta: f64,
    pub source: &'a PointSample,
}

impl EdgeSet<'_> {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Writes `i,j,length` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "i,j,length")?;
        for e in &self.edges {
            writeln!(out, "{},{},{}", e.i, e.j, e.length)?;
        }
        Ok(())
    }
}

/// Exponents of the length-power functionals to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthPowerSpec {
    pub alphas: Vec<f64>,
}

impl LengthPowerSpec {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(GilbertError::InvalidParameter(
                "at least one exponent is required".into(),
            ));
        }
        for (k, a) in alphas.iter().enumerate() {
            if !a.is_finite() {
                return Err(GilbertError::InvalidParameter(format!(
                    "exponent {a} is not finite"
                )));
            }
            if alphas[..k].contains(a) {
                return Err(GilbertError::InvalidParameter(format!(
                    "exponent {a} appears twice"
                )));
            }
        }
        Ok(Self { alphas })
    }

    /// Every exponent exceeds `-d`, so expectations are finite.
    pub fn check_expectation(&self, dim: usize) -> Result<()> {
        self.check_above(-(dim as f64))
    }

    /// Every exponent exceeds `-d/2`, so variances are finite.
    pub fn check_variance(&self, dim: usize) -> Result<()> {
        self.check_above(-(dim as f64) / 2.0)
    }

    /// Every exponent is non-negative.
    pub fn check_nonnegative(&self) -> Result<()> {
        match self.alphas.iter().find(|&&a| a < 0.0) {
            Some(&a) => Err(GilbertError::NonIntegrable { alpha: a, min: 0.0 }),
            None => Ok(()),
        }
    }

    fn check_above(&self, min: f64) -> Result<()> {
        match self.alphas.iter().find(|&&a| a <= min) {
            Some(&a) => Err(GilbertError::NonIntegrable { alpha: a, min }),
            None => Ok(()),
        }
    }
}

/// `length^alpha` with exact shortcuts for small integer exponents.
#[inline]
pub fn length_pow(length: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if alpha == 1.0 {
        length
    } else if alpha == 2.0 {
        length * length
    } else if alpha.fract() == 0.0 && alpha.abs() <= 16.0 {
        length.powi(alpha as i32)
    } else {
        length.powf(alpha)
    }
}

#[inline(always)]
fn dist2<const D: usize>(a: &[f64], b: &[f64], dim: usize) -> f64 {
    let d = if D == 0 { dim } else { D };
    let mut s = 0.0;
    for k in 0..d {
        let t = a[k] - b[k];
        s += t * t;
    }
    s
}

/// Calls `f(i, j, length)` once per edge (unordered pair, `i < j`) in
/// unspecified order.
pub fn for_each_edge<F: FnMut(usize, usize, f64)>(sample: &PointSample, delta: f64, f: F) {
    assert!(delta > 0.0, "radius must be positive");
    match sample.dim() {
        1 => grid_pairs::<1, F>(sample, delta, f),
        2 => grid_pairs::<2, F>(sample, delta, f),
        3 => grid_pairs::<3, F>(sample, delta, f),
        _ => grid_pairs::<0, F>(sample, delta, f),
    }
}

/// Grid-accelerated edge set.
pub fn build_edges(sample: &PointSample, delta: f64) -> EdgeSet<'_> {
    let mut edges = Vec::new();
    for_each_edge(sample, delta, |i, j, length| {
        edges.push(Edge { i, j, length })
    });
    edges.sort_unstable_by_key(|e| (e.i, e.j));
    EdgeSet {
        edges,
        delta,
        source: sample,
    }
}

/// All-pairs oracle for [`build_edges`].
pub fn build_edges_bruteforce(sample: &PointSample, delta: f64) -> EdgeSet<'_> {
    assert!(delta > 0.0, "radius must be positive");
    let dim = sample.dim();
    let mut edges = Vec::new();
    for i in 0..sample.len() {
        let a = sample.point(i);
        for j in i + 1..sample.len() {
            let s = dist2::<0>(a, sample.point(j), dim);
            let length = s.sqrt();
            if s > 0.0 && length <= delta {
                edges.push(Edge { i, j, length });
            }
        }
    }
    EdgeSet {
        edges,
        delta,
        source: sample,
    }
}

fn grid_pairs<const D: usize, F: FnMut(usize, usize, f64)>(
    sample: &PointSample,
    delta: f64,
    mut f: F,
) {
    let n = sample.len();
    if n < 2 {
        return;
    }
    let dim = sample.dim();
    let (lo, hi) = sample.window.bounding_box();
    // Slightly wider than δ so that rounding in the cell index can never
    // separate two points at distance ≤ δ by more than one cell.
    let bits = (128 / dim as u32).min(40);
    let max_cells = ((1u64 << bits) - 2) as f64;
    let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let width = (delta * (1.0 + 4.0 * f64::EPSILON)).max(extent / max_cells);
    let ncell: Vec<u64> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (((h - l) / width).floor() as u64 + 1).max(1))
        .collect();
    let cell_of = |p: &[f64], k: usize| -> u64 {
        (((p[k] - lo[k]) / width).floor().max(0.0) as u64).min(ncell[k] - 1)
    };
    let pack = |c: &[u64]| -> u128 { c.iter().fold(0u128, |acc, &v| (acc << bits) | v as u128) };

    // Points reordered by cell, keeping their original indices.
    let mut order: Vec<(u128, usize)> = (0..n)
        .map(|i| {
            let p = sample.point(i);
            let mut key = 0u128;
            for k in 0..dim {
                key = (key << bits) | cell_of(p, k) as u128;
            }
            (key, i)
        })
        .collect();
    order.sort_unstable();
    let mut coords = Vec::with_capacity(n * dim);
    for &(_, i) in &order {
        coords.extend_from_slice(sample.point(i));
    }
    let pt = |s: usize| &coords[s * dim..(s + 1) * dim];

    // Occupied cells as (key, start, end) into the reordered buffer.
    let mut cells: Vec<(u128, usize, usize)> = Vec::new();
    for (s, &(key, _)) in order.iter().enumerate() {
        match cells.last_mut() {
            Some(last) if last.0 == key => last.2 = s + 1,
            _ => cells.push((key, s, s + 1)),
        }
    }

    // Offsets in {-1,0,1}^d whose first non-zero entry is +1.
    let mut stencil: Vec<Vec<i64>> = Vec::new();
    let total = 3usize.pow(dim as u32);
    for code in 0..total {
        let mut c = code;
        let off: Vec<i64> = (0..dim)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if off.iter().find(|&&v| v != 0) == Some(&1) {
            stencil.push(off);
        }
    }

    let limit = delta * delta * (1.0 + 8.0 * f64::EPSILON);
    let mut unpacked = vec![0u64; dim];
    let mut neighbour = vec![0u64; dim];
    let mask = (1u128 << bits) - 1;

    let emit = |a: usize, b: usize, f: &mut F| {
        let s = dist2::<D>(pt(a), pt(b), dim);
        if s <= limit && s > 0.0 {
            let length = s.sqrt();
            if length <= delta {
                let (i, j) = (order[a].1, order[b].1);
                if i < j {
                    f(i, j, length)
                } else {
                    f(j, i, length)
                }
            }
        }
    };

    for &(key, start, end) in &cells {
        for a in start..end {
            for b in a + 1..end {
                emit(a, b, &mut f);
            }
        }
        let mut k = key;
        for slot in unpacked.iter_mut().rev() {
            *slot = (k & mask) as u64;
            k >>= bits;
        }
        'offsets: for off in &stencil {
            for ((nb, &c), (&o, &nc)) in neighbour
                .iter_mut()
                .zip(&unpacked)
                .zip(off.iter().zip(&ncell))
            {
                let v = c as i64 + o;
                if v < 0 || v >= nc as i64 {
                    continue 'offsets;
                }
                *nb = v as u64;
            }
            let nkey = pack(&neighbour);
            if let Ok(pos) = cells.binary_search_by(|c| c.0.cmp(&nkey)) {
                let (_, s2, e2) = cells[pos];
                for a in start..end {
                    for b in s2..e2 {
                        emit(a, b, &mut f);
                    }
                }
            }
        }
    }
}

/// `Σ_edges length^α` for each exponent.
pub fn length_power(edges: &EdgeSet<'_>, spec: &LengthPowerSpec) -> Vec<f64> {
    spec.alphas
        .iter()
        .map(|&a| edges.edges.iter().map(|e| length_pow(e.length, a)).sum())
        .collect()
}

/// `Σ_{j ≠ idx} 1(‖X_idx − X_j‖ ≤ δ) ‖X_idx − X_j‖^α`.
pub fn local_statistic(sample: &PointSample, idx: usize, delta: f64, alpha: f64) -> f64 {
    let a = sample.point(idx);
    let dim = sample.dim();
    let mut total = 0.0;
    for j in (0..sample.len()).filter(|&j| j != idx) {
        let s = dist2::<0>(a, sample.point(j), dim);
        let length = s.sqrt();
        if s > 0.0 && length <= delta {
            total += length_pow(length, alpha);
        }
    }
    total
}

pub fn degrees(edges: &EdgeSet<'_>) -> Vec<usize> {
    let mut deg = vec![0usize; edges.source.len()];
    for e in &edges.edges {
        deg[e.i] += 1;
        deg[e.j] += 1;
    }
    deg
}

pub fn max_degree(edges: &EdgeSet<'_>) -> usize {
    degrees(edges).into_iter().max().unwrap_or(0)
}

/// The `m` smallest values of `length^α`, ascending, padded with `+∞`.
pub fn edge_length_order_statistics(edges: &EdgeSet<'_>, alpha: f64, m: usize) -> Vec<f64> {
    let mut smallest = SmallestK::new(m);
    for e in &edges.edges {
        smallest.push(e.length);
    }
    smallest.into_powers(alpha)
}

/// Keeps the `k` smallest values seen so far.
#[derive(Debug, Clone)]
struct SmallestK {
    k: usize,
    heap: BinaryHeap<OrdF64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl SmallestK {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn push(&mut self, v: f64) {
        if self.heap.len() < self.k {
            self.heap.push(OrdF64(v));
        } else if let Some(top) = self.heap.peek() {
            if v < top.0 {
                self.heap.pop();
                self.heap.push(OrdF64(v));
            }
        }
    }

    fn into_powers(self, alpha: f64) -> Vec<f64> {
        let k = self.k;
        let mut out: Vec<f64> = self
            .heap
            .into_sorted_vec()
            .into_iter()
            .map(|v| length_pow(v.0, alpha))
            .collect();
        out.resize(k, f64::INFINITY);
        out
    }
}

/// Everything a replication needs from one graph, gathered in a single pass
/// without storing the edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub length_powers: Vec<f64>,
    pub edge_count: usize,
    pub max_degree: usize,
    /// `m` smallest values of `length^α_order`, padded with `+∞`.
    pub order_statistics: Vec<f64>,
}

pub fn summarize(
    sample: &PointSample,
    delta: f64,
    spec: &LengthPowerSpec,
    order_alpha: f64,
    order_count: usize,
) -> GraphSummary {
    let mut sums = vec![0.0; spec.alphas.len()];
    let mut deg = vec![0u32; sample.len()];
    let mut smallest = SmallestK::new(order_count);
    let mut edge_count = 0;
    for_each_edge(sample, delta, |i, j, length| {
        for (s, &a) in sums.iter_mut().zip(&spec.alphas) {
            *s += length_pow(length, a);
        }
        deg[i] += 1;
        deg[j] += 1;
        edge_count += 1;
        if order_count > 0 {
            smallest.push(length);
        }
    });
    GraphSummary {
        length_powers: sums,
        edge_count,
        max_degree: deg.into_iter().max().unwrap_or(0) as usize,
        order_statistics: smallest.into_powers(order_alpha),
    }
}
