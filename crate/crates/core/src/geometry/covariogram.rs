use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{norm, unit_ball_volume, ConvexWindow, WindowKind};
use crate::error::{GilbertError, Result};
use crate::quadrature::{power_weighted, Quadrature};

/// A covariogram value that may come from Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariogramEstimate {
    pub value: f64,
    pub estimated: bool,
    /// Standard error of the Monte Carlo estimate; zero for closed forms.
    pub std_error: f64,
}

impl ConvexWindow {
    /// `g_W(y) = V(W ∩ (W + y))` in closed form, or `None` for balls in
    /// dimension four and above.
    pub fn covariogram(&self, y: &[f64]) -> Option<f64> {
        assert_eq!(
            y.len(),
            self.dim,
            "vector dimension does not match the window"
        );
        match &self.kind {
            WindowKind::Box { sides } => Some(
                sides
                    .iter()
                    .zip(y)
                    .map(|(&s, &v)| (s - v.abs()).max(0.0))
                    .product(),
            ),
            WindowKind::Ball { radius } => ball_covariogram(*radius, self.dim, norm(y)),
        }
    }

    /// Closed form when available, otherwise `covariogram_mc` with
    /// `samples` draws and the `estimated` flag set.
    pub fn covariogram_or_estimate<R: Rng + ?Sized>(
        &self,
        y: &[f64],
        samples: usize,
        rng: &mut R,
    ) -> CovariogramEstimate {
        match self.covariogram(y) {
            Some(value) => CovariogramEstimate {
                value,
                estimated: false,
                std_error: 0.0,
            },
            None => self.covariogram_mc(y, samples, rng),
        }
    }

    /// Hit-or-miss estimate `V(W) · #{x_k ∈ W + y} / n` with `x_k` uniform in `W`.
    pub fn covariogram_mc<R: Rng + ?Sized>(
        &self,
        y: &[f64],
        samples: usize,
        rng: &mut R,
    ) -> CovariogramEstimate {
        assert!(samples >= 1, "covariogram_mc needs at least one sample");
        let vol = self.volume();
        if norm(y) >= self.diameter() {
            return CovariogramEstimate {
                value: 0.0,
                estimated: true,
                std_error: 0.0,
            };
        }
        let mut x = vec![0.0; self.dim];
        let mut shifted = vec![0.0; self.dim];
        let mut hits = 0usize;
        for _ in 0..samples {
            self.sample_uniform_into(rng, &mut x);
            for ((s, &xi), &yi) in shifted.iter_mut().zip(&x).zip(y) {
                *s = xi - yi;
            }
            if self.contains(&shifted) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        CovariogramEstimate {
            value: vol * p,
            estimated: true,
            std_error: vol * (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }

    /// `G(r) = ∫_{S^{d-1}} g_W(r u) du`, the covariogram integrated over the
    /// sphere of radius `r` (surface measure of the unit sphere).
    pub fn angular_covariogram(&self, r: f64) -> Result<f64> {
        let area = self.dim as f64 * unit_ball_volume(self.dim);
        match &self.kind {
            WindowKind::Box { sides } => Ok(area * box_angular_mean(sides, r)),
            WindowKind::Ball { radius } => ball_covariogram(*radius, self.dim, r)
                .map(|g| area * g)
                .ok_or_else(|| ball_unsupported(self.dim)),
        }
    }

    /// Kinks of `r ↦ G(r)`.
    pub(crate) fn radial_breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            WindowKind::Box { sides } => subset_norms(sides),
            WindowKind::Ball { radius } => vec![2.0 * radius],
        }
    }
}

/// `∫_{B(0,δ)} ‖y‖^α g_W(y) dy`, reduced to a one-dimensional radial integral
/// with the angular part in closed form (or nested quadrature for boxes in
/// three or more dimensions).
pub fn covariogram_radial_integral(window: &ConvexWindow, delta: f64, alpha: f64) -> Result<f64> {
    let d = window.dim() as f64;
    if alpha <= -d {
        return Err(GilbertError::NonIntegrable { alpha, min: -d });
    }
    if !(delta > 0.0) {
        return Err(GilbertError::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if let WindowKind::Ball { .. } = window.kind() {
        if window.dim() >= 4 {
            return Err(ball_unsupported(window.dim()));
        }
    }
    let hi = delta.min(window.diameter());
    let breaks = window.radial_breakpoints();
    let quad = Quadrature::with_rel_tol(1e-10);
    let p = alpha + d - 1.0;
    let mut failure = None;
    let value = power_weighted(
        &quad,
        p,
        0.0,
        hi,
        &breaks,
        |r| match window.angular_covariogram(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        true,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn ball_unsupported(dim: usize) -> GilbertError {
    GilbertError::Unsupported(format!(
        "closed-form covariogram of a ball in dimension {dim}"
    ))
}

fn ball_covariogram(radius: f64, dim: usize, r: f64) -> Option<f64> {
    let two_r = 2.0 * radius;
    if r >= two_r {
        return Some(0.0);
    }
    match dim {
        1 => Some(two_r - r),
        2 => {
            let v = 2.0 * radius * radius * (r / two_r).acos()
                - 0.5 * r * (4.0 * radius * radius - r * r).sqrt();
            Some(v.max(0.0))
        }
        3 => Some(PI / 12.0 * (4.0 * radius + r) * (two_r - r).powi(2)),
        _ => None,
    }
}

/// Euclidean norms of all non-empty subsets of `sides`.
pub(crate) fn subset_norms(sides: &[f64]) -> Vec<f64> {
    let k = sides.len();
    let mut out = Vec::with_capacity((1 << k) - 1);
    for mask in 1u32..(1 << k) {
        let s: f64 = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| sides[i] * sides[i])
            .sum();
        out.push(s.sqrt());
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Mean of `∏ (s_i − r|u_i|)_+` over the uniform distribution of `u` on
/// the unit sphere.
pub fn box_angular_mean(sides: &[f64], r: f64) -> f64 {
    match sides.len() {
        0 => 1.0,
        1 => (sides[0] - r).max(0.0),
        2 => rect_angular_mean(sides[0], sides[1], r),
        d => {
            let s1 = sides[0];
            let rest = &sides[1..];
            if r == 0.0 {
                return sides.iter().product();
            }
            // u_1 = sin φ, density ∝ cos^{d-2} φ on [-π/2, π/2]; symmetric in φ.
            let phi_max = (s1 / r).min(1.0).asin();
            let mut breaks: Vec<f64> = subset_norms(rest)
                .into_iter()
                .filter(|&k| k < r)
                .map(|k| (k / r).acos())
                .collect();
            breaks.push(phi_max);
            let c = sphere_slice_constant(d);
            let quad = Quadrature::with_rel_tol(1e-11);
            let integrand = |phi: f64| {
                let (sn, cs) = phi.sin_cos();
                cs.powi(d as i32 - 2) * (s1 - r * sn).max(0.0) * box_angular_mean(rest, r * cs)
            };
            2.0 * c * quad.estimate_with_breaks(integrand, 0.0, phi_max, &breaks)
        }
    }
}

/// `Γ(d/2) / (√π Γ((d−1)/2))`, the density constant of one coordinate of a
/// uniform point on `S^{d-1}`.
pub(crate) fn sphere_slice_constant(d: usize) -> f64 {
    let d = d as f64;
    (ln_gamma(d / 2.0) - ln_gamma((d - 1.0) / 2.0)).exp() / PI.sqrt()
}

/// Closed-form angular mean of `(a − r|cos θ|)_+ (b − r|sin θ|)_+`.
fn rect_angular_mean(a: f64, b: f64, r: f64) -> f64 {
    if r == 0.0 {
        return a * b;
    }
    let theta_a = (a / r).min(1.0).acos();
    let theta_b = (b / r).min(1.0).asin();
    if theta_a >= theta_b {
        return 0.0;
    }
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        a * b * t + a * r * c - b * r * s + 0.5 * r * r * s * s
    };
    // One quadrant, times four, over the full angle 2π.
    (2.0 / PI) * (f(theta_b) - f(theta_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> ConvexWindow {
        ConvexWindow::unit_square()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(unit_square().covariogram(&[0.5, 0.0]), Some(0.5));
        let ball3 = ConvexWindow::ball(1.0, 3).unwrap();
        assert_relative_eq!(
            ball3.covariogram(&[0.0; 3]).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-15
        );
        let disc = ConvexWindow::ball(1.0, 2).unwrap();
        let expected = 2.0 * 0.5f64.acos() - 0.5 * 3f64.sqrt();
        assert_relative_eq!(
            disc.covariogram(&[1.0, 0.0]).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected, 1.228_369_698, max_relative = 1e-8);
        assert!(ConvexWindow::ball(1.0, 4)
            .unwrap()
            .covariogram(&[0.0; 4])
            .is_none());
    }

    #[test]
    fn disc_overlap_matches_numeric_area() {
        // area of the lens between two unit discs at distance r, by slicing
        let disc = ConvexWindow::ball(1.0, 2).unwrap();
        for r in [0.0, 0.3, 1.0, 1.7] {
            let half = |x: f64| (1.0 - x * x).max(0.0).sqrt();
            let lens = Quadrature::default()
                .integrate_with_breaks(|x| 2.0 * half(x).min(half(x - r)), r - 1.0, 1.0, &[r / 2.0])
                .unwrap()
                .value;
            assert_relative_eq!(
                disc.covariogram(&[r, 0.0]).unwrap(),
                lens,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn mc_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = unit_square();
        assert_eq!(w.covariogram_mc(&[2.0, 0.0], 10, &mut rng).value, 0.0);
        assert_eq!(w.covariogram_mc(&[0.0, 0.0], 1000, &mut rng).value, 1.0);
        let est = w.covariogram_mc(&[0.5, 0.0], 1_000_000, &mut rng);
        assert!((est.value - 0.5).abs() <= 0.002);
        let ball = ConvexWindow::ball(1.0, 5).unwrap();
        let e = ball.covariogram_or_estimate(&[0.5, 0.0, 0.0, 0.0, 0.0], 1000, &mut rng);
        assert!(e.estimated);
    }

    #[test]
    fn rect_angular_mean_matches_direct_average() {
        for (a, b, r) in [
            (1.0f64, 1.0f64, 0.3f64),
            (1.0, 1.0, 1.2),
            (2.0, 0.5, 0.7),
            (1.0, 1.0, 1.5),
        ] {
            let direct = Quadrature::default()
                .integrate_with_breaks(
                    |t: f64| (a - r * t.cos().abs()).max(0.0) * (b - r * t.sin().abs()).max(0.0),
                    0.0,
                    2.0 * PI,
                    &[
                        PI / 2.0,
                        PI,
                        1.5 * PI,
                        (a / r).min(1.0).acos(),
                        (b / r).min(1.0).asin(),
                    ],
                )
                .unwrap()
                .value
                / (2.0 * PI);
            assert_relative_eq!(
                rect_angular_mean(a, b, r),
                direct,
                max_relative = 1e-9,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn cuboid_angular_mean_matches_nested_average() {
        // u_1 = z is uniform on [-1, 1] for S²; r stays below every side.
        let s = [1.0, 0.8, 0.6];
        let r = 0.25;
        let direct = {
            let q = Quadrature::with_rel_tol(1e-12);
            q.integrate(
                |z: f64| {
                    let rho = (1.0 - z * z).sqrt();
                    let inner = q
                        .integrate_with_breaks(
                            |t: f64| {
                                (s[1] - r * rho * t.cos().abs()) * (s[2] - r * rho * t.sin().abs())
                            },
                            0.0,
                            2.0 * PI,
                            &[PI / 2.0, PI, 1.5 * PI],
                        )
                        .unwrap()
                        .value
                        / (2.0 * PI);
                    0.5 * (s[0] - r * z.abs()) * inner
                },
                -1.0,
                1.0,
            )
            .unwrap()
            .value
        };
        assert_relative_eq!(box_angular_mean(&s, r), direct, max_relative = 1e-9);
    }

    #[test]
    fn unit_square_radial_integral_closed_form() {
        let d = 0.05;
        let expected = PI * d * d - 8.0 / 3.0 * d.powi(3) + d.powi(4) / 2.0;
        let v = covariogram_radial_integral(&unit_square(), d, 0.0).unwrap();
        assert_relative_eq!(v, expected, max_relative = 1e-10);
        assert_relative_eq!(v, 7.523_79e-3, max_relative = 1e-5);

        // general α for δ ≤ min side
        let (a, b) = (2.0, 0.5);
        let w = ConvexWindow::cuboid(vec![a, b]).unwrap();
        for alpha in [-1.5, -0.5, 0.0, 1.0, 2.5] {
            let dl: f64 = 0.3;
            let exact = 2.0 * PI * a * b * dl.powf(alpha + 2.0) / (alpha + 2.0)
                - 4.0 * (a + b) * dl.powf(alpha + 3.0) / (alpha + 3.0)
                + 2.0 * dl.powf(alpha + 4.0) / (alpha + 4.0);
            let v = covariogram_radial_integral(&w, dl, alpha).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn total_mass_identity() {
        for w in [
            "box:1x1",
            "box:2x0.5",
            "box:1x0.7x0.4",
            "ball:1@d=2",
            "ball:0.6@d=3",
            "box:1.5",
        ] {
            let w: ConvexWindow = w.parse().unwrap();
            let v = covariogram_radial_integral(&w, 10.0, 0.0).unwrap();
            assert_relative_eq!(v, w.volume().powi(2), max_relative = 1e-8);
        }
    }

    #[test]
    fn non_integrable_power() {
        let err = covariogram_radial_integral(&unit_square(), 0.1, -2.0).unwrap_err();
        assert!(matches!(err, GilbertError::NonIntegrable { .. }));
    }

    #[test]
    fn angular_average_lipschitz_band() {
        for w in [
            "box:1x1",
            "box:1x0.7x0.4",
            "ball:1@d=2",
            "ball:1@d=3",
            "box:2x1x0.5x0.8",
        ] {
            let w: ConvexWindow = w.parse().unwrap();
            let d = w.dim();
            let top = d as f64 * unit_ball_volume(d) * w.volume();
            let slope = unit_ball_volume(d - 1) * w.surface_area();
            for k in 1..40 {
                let r = w.diameter() * k as f64 / 40.0;
                let g = w.angular_covariogram(r).unwrap();
                assert!(g <= top * (1.0 + 1e-12));
                assert!(
                    g >= top - slope * r - 1e-9,
                    "{w} r={r}: {g} < {}",
                    top - slope * r
                );
            }
        }
    }
}
