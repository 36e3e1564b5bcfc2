//! Poisson and binomial point processes in a window.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{GilbertError, Result};
use crate::geometry::ConvexWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointModel {
    /// Intensity `t`; the number of points is Poisson with mean `t V(W)`.
    Poisson { t: f64 },
    /// Exactly `n` independent uniform points.
    Binomial { n: usize },
}

/// One realisation of a point process. Coordinates are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    coords: Vec<f64>,
    dim: usize,
    pub window: ConvexWindow,
    pub model: PointModel,
    pub seed: u64,
    pub replication_index: u64,
}

impl PointSample {
    /// Wraps explicit coordinates; every point must lie in the window.
    pub fn from_points(window: ConvexWindow, points: &[Vec<f64>]) -> Result<Self> {
        let dim = window.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(GilbertError::InvalidParameter(format!(
                    "point has {} coordinates, window has dimension {dim}",
                    p.len()
                )));
            }
            if !window.contains(p) {
                return Err(GilbertError::InvalidParameter(format!(
                    "point {p:?} lies outside {window}"
                )));
            }
            coords.extend_from_slice(p);
        }
        let n = points.len();
        Ok(Self {
            coords,
            dim,
            window,
            model: PointModel::Binomial { n },
            seed: 0,
            replication_index: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Flat row-major coordinate buffer.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Poisson process of intensity `t`: `N ~ Poisson(t V(W))` uniform points.
pub fn sample_poisson<R: Rng + ?Sized>(
    window: &ConvexWindow,
    t: f64,
    rng: &mut R,
) -> Result<PointSample> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(GilbertError::InvalidParameter(format!(
            "intensity must be positive, got {t}"
        )));
    }
    let mean = t * window.volume();
    let n = Poisson::new(mean)
        .map_err(|e| GilbertError::InvalidParameter(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut s = uniform_points(window, n, rng);
    s.model = PointModel::Poisson { t };
    Ok(s)
}

/// Binomial process: exactly `n` independent uniform points.
pub fn sample_binomial<R: Rng + ?Sized>(
    window: &ConvexWindow,
    n: usize,
    rng: &mut R,
) -> Result<PointSample> {
    if n == 0 {
        return Err(GilbertError::InvalidParameter(
            "binomial process needs n ≥ 1".into(),
        ));
    }
    Ok(uniform_points(window, n, rng))
}

/// Samples from `model`, tagging the result with its seed coordinates.
pub fn sample<R: Rng + ?Sized>(
    window: &ConvexWindow,
    model: PointModel,
    rng: &mut R,
    seed: u64,
    replication_index: u64,
) -> Result<PointSample> {
    let mut s = match model {
        PointModel::Poisson { t } => sample_poisson(window, t, rng)?,
        PointModel::Binomial { n } => sample_binomial(window, n, rng)?,
    };
    s.seed = seed;
    s.replication_index = replication_index;
    Ok(s)
}

fn uniform_points<R: Rng + ?Sized>(window: &ConvexWindow, n: usize, rng: &mut R) -> PointSample {
    let dim = window.dim();
    let mut coords = vec![0.0; n * dim];
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(n);
    for chunk in coords.chunks_exact_mut(dim) {
        loop {
            window.sample_uniform_into(rng, chunk);
            if seen.insert(chunk.iter().map(|v| v.to_bits()).collect()) {
                break;
            }
        }
    }
    PointSample {
        coords,
        dim,
        window: window.clone(),
        model: PointModel::Binomial { n },
        seed: 0,
        replication_index: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamDomain};

    #[test]
    fn binomial_has_exact_count() {
        let w = ConvexWindow::unit_square();
        let mut rng = stream(1, StreamDomain::Auxiliary, 0, 0);
        for _ in 0..20 {
            assert_eq!(sample_binomial(&w, 5, &mut rng).unwrap().len(), 5);
        }
    }

    #[test]
    fn poisson_count_moments() {
        let w = ConvexWindow::unit_square();
        let reps = 10_000;
        let counts: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = stream(2, StreamDomain::Replication, 0, r);
                sample_poisson(&w, 100.0, &mut rng).unwrap().len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        assert!((mean - 100.0).abs() <= 0.4);
        assert!((var / 100.0 - 1.0).abs() <= 0.1);
    }

    #[test]
    fn disjoint_halves_are_uncorrelated() {
        let w = ConvexWindow::unit_square();
        let reps = 10_000;
        let pairs: Vec<(f64, f64)> = (0..reps)
            .map(|r| {
                let mut rng = stream(3, StreamDomain::Replication, 0, r);
                let s = sample_poisson(&w, 100.0, &mut rng).unwrap();
                let left = s.points().filter(|p| p[0] < 0.5).count() as f64;
                (left, s.len() as f64 - left)
            })
            .collect();
        let n = reps as f64;
        let (ma, mb) = pairs
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for &(a, b) in &pairs {
            sab += (a - ma) * (b - mb);
            saa += (a - ma).powi(2);
            sbb += (b - mb).powi(2);
        }
        assert!((sab / (saa * sbb).sqrt()).abs() <= 0.03);
    }

    #[test]
    fn same_stream_same_sample() {
        let w: ConvexWindow = "ball:1@d=3".parse().unwrap();
        let a = sample_poisson(&w, 50.0, &mut stream(4, StreamDomain::Replication, 0, 7)).unwrap();
        let b = sample_poisson(&w, 50.0, &mut stream(4, StreamDomain::Replication, 0, 7)).unwrap();
        assert_eq!(a, b);
        assert!(a.points().all(|p| w.contains(p)));
    }

    #[test]
    fn explicit_points_must_be_inside() {
        let w = ConvexWindow::unit_square();
        assert!(PointSample::from_points(w.clone(), &[vec![0.5, 1.5]]).is_err());
        assert_eq!(
            PointSample::from_points(w, &[vec![0.5, 0.5]])
                .unwrap()
                .len(),
            1
        );
    }
}
