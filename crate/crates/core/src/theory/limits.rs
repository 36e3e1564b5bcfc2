//! Limit objects for sparse graphs: the compound Poisson limit of the
//! rescaled functional, the Poisson limit of rescaled edge-length powers and
//! its order statistics, and the two quantities whose convergence drives it.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{GilbertError, Result};
use crate::geometry::{covariogram_radial_integral, unit_ball_volume, ConvexWindow};

/// `Z = Σ_{i ≤ Y} X_i` with `Y ~ Poisson(κ_d c V / 2)` and `X_i` of density
/// `(d/(αc)) u^{d/α − 1}` on `[0, c^{α/d}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundPoissonModel {
    pub c: f64,
    pub dim: usize,
    pub alpha: f64,
    pub volume: f64,
}

impl CompoundPoissonModel {
    pub fn new(c: f64, dim: usize, alpha: f64, volume: f64) -> Result<Self> {
        if !(c > 0.0 && alpha > 0.0 && volume > 0.0 && dim >= 1) {
            return Err(GilbertError::InvalidParameter(format!(
                "compound Poisson model needs c, alpha, volume > 0 (got c = {c}, alpha = {alpha}, V = {volume})"
            )));
        }
        Ok(Self {
            c,
            dim,
            alpha,
            volume,
        })
    }

    /// Mean of the Poisson number of summands.
    pub fn y_mean(&self) -> f64 {
        unit_ball_volume(self.dim) * self.c * self.volume / 2.0
    }

    /// Right end of the summand support, `c^{α/d}`.
    pub fn x_max(&self) -> f64 {
        self.c.powf(self.alpha / self.dim as f64)
    }

    pub fn x_mean(&self) -> f64 {
        let d = self.dim as f64;
        d / (d + self.alpha) * self.x_max()
    }

    pub fn mean(&self) -> f64 {
        self.y_mean() * self.x_mean()
    }

    /// `P(Z = 0) = exp(−E Y)`.
    pub fn zero_probability(&self) -> f64 {
        (-self.y_mean()).exp()
    }

    /// Distribution function of one summand, `u^{d/α} / c` on the support.
    pub fn x_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= self.x_max() {
            1.0
        } else {
            u.powf(self.dim as f64 / self.alpha) / self.c
        }
    }
}

/// Summand density.
pub fn cp_density(u: f64, model: &CompoundPoissonModel) -> f64 {
    if u < 0.0 || u > model.x_max() {
        return 0.0;
    }
    let k = model.dim as f64 / model.alpha;
    if u == 0.0 {
        return if k < 1.0 {
            f64::INFINITY
        } else if k == 1.0 {
            1.0 / model.c * k
        } else {
            0.0
        };
    }
    k / model.c * u.powf(k - 1.0)
}

/// One draw of `Z`, with summands by inversion `X = c^{α/d} U^{α/d}`.
pub fn sample_compound_poisson<R: Rng + ?Sized>(model: &CompoundPoissonModel, rng: &mut R) -> f64 {
    let y = Poisson::new(model.y_mean())
        .expect("positive Poisson mean")
        .sample(rng) as u64;
    let exponent = model.alpha / model.dim as f64;
    let scale = model.x_max();
    (0..y)
        .map(|_| scale * rng.random::<f64>().powf(exponent))
        .sum()
}

/// Whether the expected number of edges diverges or stays bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRegime {
    EdgeInfinite,
    EdgeConstant { c: f64 },
}

/// Limiting Poisson process of the rescaled edge-length powers
/// `t^{2α/d} ‖x − y‖^α` on the half line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLengthProcessLimit {
    pub regime: LimitRegime,
    pub alpha: f64,
    pub dim: usize,
    pub volume: f64,
}

/// Exponent of `u` in the limiting intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentConvention {
    /// `u^{d/α}`, obtained by integrating the intensity density.
    #[default]
    FromIntensity,
    /// `u^{2α/d}`, the alternative form kept for comparison.
    AsPrinted,
}

impl EdgeLengthProcessLimit {
    pub fn new(regime: LimitRegime, alpha: f64, dim: usize, volume: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(GilbertError::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if let LimitRegime::EdgeConstant { c } = regime {
            if !(c > 0.0) {
                return Err(GilbertError::InvalidParameter(format!(
                    "edge constant must be positive, got {c}"
                )));
            }
        }
        Ok(Self {
            regime,
            alpha,
            dim,
            volume,
        })
    }

    fn intensity(&self, u: f64, convention: ExponentConvention) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let d = self.dim as f64;
        let power = match convention {
            ExponentConvention::FromIntensity => u.powf(d / self.alpha),
            ExponentConvention::AsPrinted => u.powf(2.0 * self.alpha / d),
        };
        let power = match self.regime {
            LimitRegime::EdgeInfinite => power,
            LimitRegime::EdgeConstant { c } => power.min(c),
        };
        unit_ball_volume(self.dim) / 2.0 * self.volume * power
    }
}

/// `ν([0, u]) = (κ_d/2) V u^{d/α}`, capped at `(κ_d/2) V c` when the
/// expected edge count stays bounded.
pub fn pp_intensity(limit: &EdgeLengthProcessLimit, u: f64) -> f64 {
    limit.intensity(u, ExponentConvention::FromIntensity)
}

/// Limiting `P(S_m > u) = e^{−ν} Σ_{j<m} ν^j / j!` with `ν = ν([0, u])`.
pub fn order_statistic_tail(
    m: usize,
    u: f64,
    limit: &EdgeLengthProcessLimit,
    convention: ExponentConvention,
) -> f64 {
    assert!(m >= 1, "order statistic index starts at 1");
    let nu = limit.intensity(u, convention);
    if nu == 0.0 {
        1.0
    } else if nu == f64::INFINITY {
        0.0
    } else {
        gamma_ur(m as f64, nu)
    }
}

/// Limiting distribution function `P(S_m ≤ u)`.
pub fn order_statistic_limit_cdf(
    m: usize,
    u: f64,
    limit: &EdgeLengthProcessLimit,
    convention: ExponentConvention,
) -> f64 {
    1.0 - order_statistic_tail(m, u, limit, convention)
}

/// The mean-count and local-mass quantities at intensity `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpConditions {
    /// Truncation radius `min{δ, u^{1/α} t^{−2/d}}`.
    pub rho: f64,
    /// Expected number of pairs at distance at most `rho`.
    pub a_t: f64,
    /// `t κ_d ρ^d`, the interior value of `t sup_y λ(B(y, ρ) ∩ W)`.
    pub r_t: f64,
}

pub fn pp_conditions(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alpha: f64,
    u: f64,
) -> Result<PpConditions> {
    if !(u > 0.0 && alpha > 0.0) {
        return Err(GilbertError::InvalidParameter(format!(
            "need u > 0 and alpha > 0, got u = {u}, alpha = {alpha}"
        )));
    }
    let d = window.dim();
    let rho = delta.min(u.powf(1.0 / alpha) * t.powf(-2.0 / d as f64));
    let a_t = 0.5 * t * t * covariogram_radial_integral(window, rho, 0.0)?;
    let r_t = t * unit_ball_volume(d) * rho.powi(d as i32);
    Ok(PpConditions { rho, a_t, r_t })
}

/// Limit of `a_t(u)`: `(κ_d/2) V u^{d/α}`, or `(κ_d/2) V min{u^{d/α}, c}`.
pub fn pp_conditions_limit(limit: &EdgeLengthProcessLimit, u: f64) -> f64 {
    pp_intensity(limit, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;
    use crate::rng::{stream, StreamDomain};
    use crate::theory::moments::expectation_exact;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn planar(c: f64, alpha: f64) -> CompoundPoissonModel {
        CompoundPoissonModel::new(c, 2, alpha, 1.0).unwrap()
    }

    #[test]
    fn density_examples() {
        let m = planar(1.0, 2.0);
        for u in [0.0, 0.3, 0.99, 1.0] {
            assert_relative_eq!(cp_density(u, &m), 1.0);
        }
        assert_eq!(cp_density(1.01, &m), 0.0);
        for (c, alpha) in [(1.0, 2.0), (2.5, 1.0), (0.7, 3.0), (1.3, 0.5)] {
            let m = planar(c, alpha);
            let q = Quadrature::with_rel_tol(1e-12);
            let mass = q
                .integrate(|u| cp_density(u, &m), 0.0, m.x_max())
                .unwrap()
                .value;
            assert_relative_eq!(mass, 1.0, max_relative = 1e-10);
            let mean = q
                .integrate(|u| u * cp_density(u, &m), 0.0, m.x_max())
                .unwrap()
                .value;
            assert_relative_eq!(mean, m.x_mean(), max_relative = 1e-10);
        }
        assert_relative_eq!(planar(1.0, 2.0).x_mean(), 0.5);
    }

    #[test]
    fn sampler_mean_and_atom() {
        let m = planar(1.0, 2.0);
        let mut rng = stream(0, StreamDomain::Reference, 0, 0);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_compound_poisson(&m, &mut rng))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - PI / 4.0).abs() <= 3.0 * (var / n as f64).sqrt());
        let p0 = draws.iter().filter(|&&z| z == 0.0).count() as f64 / n as f64;
        let p = (-PI / 2.0f64).exp();
        assert!((p0 - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt());

        let tiny = planar(1e-4, 2.0);
        let big = (0..10_000)
            .filter(|_| sample_compound_poisson(&tiny, &mut rng) > 1e-3)
            .count();
        assert!(big < 10);
    }

    #[test]
    fn mean_matches_rescaled_expectation() {
        // t^{2α/d} E L along δ_t = (c/t²)^{1/d}
        let w = ConvexWindow::unit_square();
        let (c, alpha, t) = (1.0f64, 2.0, 1e3f64);
        let delta = (c / (t * t)).sqrt();
        let scaled = t.powf(2.0 * alpha / 2.0) * expectation_exact(&w, t, delta, alpha).unwrap();
        assert_relative_eq!(scaled, planar(c, alpha).mean(), max_relative = 0.01);
    }

    #[test]
    fn intensity_examples() {
        let inf = EdgeLengthProcessLimit::new(LimitRegime::EdgeInfinite, 2.0, 2, 1.0).unwrap();
        assert_relative_eq!(pp_intensity(&inf, 1.0), PI / 2.0);
        assert_eq!(pp_intensity(&inf, 0.0), 0.0);
        let cst =
            EdgeLengthProcessLimit::new(LimitRegime::EdgeConstant { c: 1.0 }, 2.0, 2, 1.0).unwrap();
        assert_eq!(pp_intensity(&cst, 1.0), pp_intensity(&cst, 3.0));
        assert!(pp_intensity(&cst, 0.5) < pp_intensity(&cst, 1.0));
    }

    #[test]
    fn order_statistic_examples() {
        let inf = EdgeLengthProcessLimit::new(LimitRegime::EdgeInfinite, 2.0, 2, 1.0).unwrap();
        let conv = ExponentConvention::FromIntensity;
        assert_relative_eq!(
            order_statistic_tail(1, 1.0, &inf, conv),
            (-PI / 2.0).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            order_statistic_tail(1, 1.0, &inf, conv),
            0.2079,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            order_statistic_limit_cdf(1, 1.0, &inf, conv),
            1.0 - 0.2079,
            max_relative = 1e-3
        );
        for m in 1..6 {
            assert_eq!(order_statistic_tail(m, 0.0, &inf, conv), 1.0);
        }
        for k in 1..50 {
            let u = k as f64 * 0.1;
            let nu = pp_intensity(&inf, u);
            assert_relative_eq!(
                order_statistic_tail(1, u, &inf, conv),
                (-nu).exp(),
                max_relative = 1e-12
            );
            let two = order_statistic_tail(2, u, &inf, conv);
            assert_relative_eq!(two, (-nu).exp() * (1.0 + nu), max_relative = 1e-12);
            assert!(two >= order_statistic_tail(1, u, &inf, conv));
        }
        let alt = EdgeLengthProcessLimit::new(LimitRegime::EdgeInfinite, 1.0, 2, 1.0).unwrap();
        let printed = order_statistic_tail(1, 2.0, &alt, ExponentConvention::AsPrinted);
        assert_relative_eq!(printed, (-PI / 2.0 * 2.0).exp(), max_relative = 1e-12);
    }

    #[test]
    fn conditions_converge() {
        let w = ConvexWindow::unit_square();
        let alpha = 2.0;
        let inf = EdgeLengthProcessLimit::new(LimitRegime::EdgeInfinite, alpha, 2, 1.0).unwrap();
        for u in [0.5, 1.0, 2.0] {
            let limit = pp_conditions_limit(&inf, u);
            let a3 = pp_conditions(&w, 1e3, 1e3f64.powf(-0.8), alpha, u).unwrap();
            let a5 = pp_conditions(&w, 1e5, 1e5f64.powf(-0.8), alpha, u).unwrap();
            assert!((a3.a_t / limit - 1.0).abs() <= 0.02);
            assert!((a5.a_t / limit - 1.0).abs() <= (a3.a_t / limit - 1.0).abs());
            assert_relative_eq!(a5.r_t * 1e5, PI * u, max_relative = 1e-12);
        }
        let cst = EdgeLengthProcessLimit::new(LimitRegime::EdgeConstant { c: 1.0 }, alpha, 2, 1.0)
            .unwrap();
        for u in [0.5, 1.0, 2.0] {
            let t = 1e5;
            let a = pp_conditions(&w, t, 1.0 / t, alpha, u).unwrap();
            assert!((a.a_t / pp_conditions_limit(&cst, u) - 1.0).abs() <= 0.02);
        }
    }
}
