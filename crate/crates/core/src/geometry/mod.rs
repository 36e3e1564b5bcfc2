//! Observation windows: axis-aligned boxes and centred balls.
//!
//! A box with side lengths `s` occupies `[0, s_1] × … × [0, s_d]`; a ball of
//! radius `R` is centred at the origin. Both carry closed-form volume,
//! surface area and (for the dimensions that admit one) covariogram.

mod covariogram;
mod sphere;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GilbertError, Result};

pub use covariogram::{box_angular_mean, covariogram_radial_integral, CovariogramEstimate};

/// Volume of the `j`-dimensional unit ball, `π^{j/2} / Γ(j/2 + 1)`.
pub fn unit_ball_volume(j: usize) -> f64 {
    // κ_j = κ_{j-2} · 2π / j
    let mut k = if j.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut i = if j.is_multiple_of(2) { 2 } else { 3 };
    while i <= j {
        k *= 2.0 * std::f64::consts::PI / i as f64;
        i += 2;
    }
    k
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowKind {
    Box { sides: Vec<f64> },
    Ball { radius: f64 },
}

/// A compact convex observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexWindow {
    kind: WindowKind,
    dim: usize,
}

impl ConvexWindow {
    pub fn cuboid(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() {
            return Err(GilbertError::InvalidWindow(
                "box needs at least one side".into(),
            ));
        }
        if let Some(s) = sides.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(GilbertError::InvalidWindow(format!(
                "side length {s} is not positive"
            )));
        }
        let dim = sides.len();
        Ok(Self {
            kind: WindowKind::Box { sides },
            dim,
        })
    }

    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GilbertError::InvalidWindow(format!(
                "radius {radius} is not positive"
            )));
        }
        if dim == 0 {
            return Err(GilbertError::InvalidWindow(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            kind: WindowKind::Ball { radius },
            dim,
        })
    }

    /// The unit square `[0,1]²`.
    pub fn unit_square() -> Self {
        Self {
            kind: WindowKind::Box {
                sides: vec![1.0, 1.0],
            },
            dim: 2,
        }
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volume(&self) -> f64 {
        match &self.kind {
            WindowKind::Box { sides } => sides.iter().product(),
            WindowKind::Ball { radius } => {
                unit_ball_volume(self.dim) * radius.powi(self.dim as i32)
            }
        }
    }

    pub fn surface_area(&self) -> f64 {
        match &self.kind {
            WindowKind::Box { sides } => {
                let mut total = 0.0;
                for i in 0..sides.len() {
                    let face: f64 = sides
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, s)| s)
                        .product();
                    total += face;
                }
                2.0 * total
            }
            WindowKind::Ball { radius } => {
                self.dim as f64 * unit_ball_volume(self.dim) * radius.powi(self.dim as i32 - 1)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            WindowKind::Box { sides } => sides.iter().map(|s| s * s).sum::<f64>().sqrt(),
            WindowKind::Ball { radius } => 2.0 * radius,
        }
    }

    /// Radius of the largest ball contained in the window.
    pub fn inradius(&self) -> f64 {
        match &self.kind {
            WindowKind::Box { sides } => 0.5 * sides.iter().copied().fold(f64::INFINITY, f64::min),
            WindowKind::Ball { radius } => *radius,
        }
    }

    /// Lower and upper corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            WindowKind::Box { sides } => (vec![0.0; self.dim], sides.clone()),
            WindowKind::Ball { radius } => (vec![-radius; self.dim], vec![*radius; self.dim]),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            WindowKind::Box { sides } => {
                x.iter().zip(sides).all(|(&xi, &s)| (0.0..=s).contains(&xi))
            }
            WindowKind::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius,
        }
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn distance_to_boundary(&self, y: &[f64]) -> f64 {
        match &self.kind {
            WindowKind::Box { sides } => y
                .iter()
                .zip(sides)
                .map(|(&v, &s)| v.min(s - v))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            WindowKind::Ball { radius } => (radius - norm(y)).max(0.0),
        }
    }

    /// Lower bound `V(W) − S(W)·δ` on the volume of the inner parallel set.
    /// May be negative.
    pub fn inner_parallel_volume_lower_bound(&self, delta: f64) -> f64 {
        self.volume() - self.surface_area() * delta
    }

    /// Draws one uniform point into `out` (length `dim`).
    pub fn sample_uniform_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.kind {
            WindowKind::Box { sides } => {
                for (o, &s) in out.iter_mut().zip(sides) {
                    *o = s * rng.random::<f64>();
                }
            }
            WindowKind::Ball { radius } if self.dim <= 4 => loop {
                let mut r2 = 0.0;
                for o in out.iter_mut() {
                    let v = rng.random::<f64>() * 2.0 - 1.0;
                    *o = v;
                    r2 += v * v;
                }
                if r2 <= 1.0 {
                    out.iter_mut().for_each(|o| *o *= radius);
                    break;
                }
            },
            WindowKind::Ball { radius } => {
                // Polar method: isotropic direction, radius ∝ U^{1/d}.
                let mut n2 = 0.0;
                while n2 == 0.0 {
                    n2 = 0.0;
                    for o in out.iter_mut() {
                        let g: f64 = rng.sample(StandardNormal);
                        *o = g;
                        n2 += g * g;
                    }
                }
                let scale = radius * rng.random::<f64>().powf(1.0 / self.dim as f64) / n2.sqrt();
                out.iter_mut().for_each(|o| *o *= scale);
            }
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.sample_uniform_into(rng, &mut x);
        x
    }
}

pub(crate) fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Textual form: `box:1x1`, `box:2x1x0.5`, `ball:1.0@d=3`.
impl fmt::Display for ConvexWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WindowKind::Box { sides } => {
                let parts: Vec<String> = sides.iter().map(|s| s.to_string()).collect();
                write!(f, "box:{}", parts.join("x"))
            }
            WindowKind::Ball { radius } => write!(f, "ball:{radius}@d={}", self.dim),
        }
    }
}

impl FromStr for ConvexWindow {
    type Err = GilbertError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| GilbertError::InvalidWindow(format!("`{s}`: {why}"));
        let (kind, body) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected `box:` or `ball:`"))?;
        match kind.trim() {
            "box" => {
                let sides = body
                    .split('x')
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .map_err(|_| bad("side lengths must be numbers"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::cuboid(sides)
            }
            "ball" => {
                let (r, d) = body
                    .split_once('@')
                    .ok_or_else(|| bad("ball needs `@d=<dim>`"))?;
                let radius = r
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad("radius must be a number"))?;
                let dim = d
                    .trim()
                    .strip_prefix("d=")
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .ok_or_else(|| bad("dimension must be written `d=<integer>`"))?;
                Self::ball(radius, dim)
            }
            other => Err(bad(&format!("unknown window kind `{other}`"))),
        }
    }
}

impl Serialize for ConvexWindow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConvexWindow {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert_relative_eq!(unit_ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(4), PI * PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn volumes_and_surfaces() {
        assert_eq!(ConvexWindow::unit_square().volume(), 1.0);
        assert_eq!("box:2x1x0.5".parse::<ConvexWindow>().unwrap().volume(), 1.0);
        let disc = ConvexWindow::ball(1.0, 2).unwrap();
        assert_relative_eq!(disc.volume(), PI);
        assert_relative_eq!(disc.surface_area(), 2.0 * PI);
        assert_eq!(ConvexWindow::unit_square().surface_area(), 4.0);
        assert_eq!(
            "box:1x1x1".parse::<ConvexWindow>().unwrap().surface_area(),
            6.0
        );
        assert_eq!("box:3".parse::<ConvexWindow>().unwrap().surface_area(), 2.0);
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["box:1x1", "box:2x1x0.5", "ball:1@d=3", "ball:0.25@d=2"] {
            let w: ConvexWindow = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
        let w: ConvexWindow = "ball:1.0@d=3".parse().unwrap();
        assert_eq!(w.dim(), 3);
    }

    #[test]
    fn rejects_malformed_windows() {
        for s in [
            "box:",
            "box:1x-1",
            "ball:1",
            "ball:1@d=0",
            "ball:-1@d=2",
            "cube:1",
            "box:1xa",
        ] {
            assert!(s.parse::<ConvexWindow>().is_err(), "{s} should be rejected");
        }
    }

    #[test]
    fn inner_parallel_bound() {
        let sq = ConvexWindow::unit_square();
        assert_relative_eq!(sq.inner_parallel_volume_lower_bound(0.1), 0.6);
        assert_eq!(sq.inner_parallel_volume_lower_bound(0.0), 1.0);
        let disc = ConvexWindow::ball(1.0, 2).unwrap();
        let bound = disc.inner_parallel_volume_lower_bound(0.1);
        assert_relative_eq!(bound, 0.8 * PI, max_relative = 1e-14);
        // exact inner set is the disc of radius 0.9
        assert!(0.81 * PI >= bound);
    }

    #[test]
    fn ball_samples_are_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2, 3, 5, 7] {
            let w = ConvexWindow::ball(1.3, dim).unwrap();
            for _ in 0..5000 {
                assert!(w.contains(&w.sample_uniform(&mut rng)));
            }
        }
    }

    #[test]
    fn box_sample_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let w = ConvexWindow::unit_square();
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let x = w.sample_uniform(&mut rng);
            sum[0] += x[0];
            sum[1] += x[1];
        }
        let se = (1.0f64 / 12.0).sqrt() / (n as f64).sqrt();
        for s in sum {
            assert!((s / n as f64 - 0.5).abs() <= 3.0 * se);
        }

        let w = "box:2x1".parse::<ConvexWindow>().unwrap();
        let hits = (0..n)
            .filter(|_| w.sample_uniform(&mut rng)[0] < 1.0)
            .count();
        let se = (0.25 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn high_dimensional_ball_radial_law() {
        // P(|X| ≤ R/2) = 2^{-d}
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = ConvexWindow::ball(1.0, 6).unwrap();
        let n = 200_000;
        let inner = (0..n)
            .filter(|_| norm(&w.sample_uniform(&mut rng)) <= 0.5)
            .count();
        let p = 0.5f64.powi(6);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((inner as f64 / n as f64 - p).abs() <= 4.0 * se);
    }
}
