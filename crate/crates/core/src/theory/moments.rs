//! Mean and covariance of the length-power functionals, their explicit
//! bounds, the asymptotic covariance matrix, and the normal-approximation
//! error bounds built from them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Regime;
use crate::error::{GilbertError, Result};
use crate::geometry::{covariogram_radial_integral, unit_ball_volume, ConvexWindow, WindowKind};
use crate::quadrature::{power_weighted, Quadrature};

fn kappa(d: usize) -> f64 {
    unit_ball_volume(d)
}

fn check_mean_exponent(d: usize, alpha: f64) -> Result<()> {
    if alpha <= -(d as f64) {
        return Err(GilbertError::NonIntegrable {
            alpha,
            min: -(d as f64),
        });
    }
    Ok(())
}

fn check_covariance_exponents(d: usize, alpha: f64, beta: f64) -> Result<()> {
    let df = d as f64;
    if alpha <= -df || beta <= -df || alpha + beta <= -df {
        return Err(GilbertError::DivergentCovariance {
            alpha,
            beta,
            dim: d,
        });
    }
    Ok(())
}

fn check_variance_exponent(d: usize, alpha: f64) -> Result<()> {
    let min = -(d as f64) / 2.0;
    if alpha <= min {
        return Err(GilbertError::NonIntegrable { alpha, min });
    }
    Ok(())
}

/// `E L = (t²/2) ∫_{B(0,δ)} ‖y‖^α g_W(y) dy`.
pub fn expectation_exact(window: &ConvexWindow, t: f64, delta: f64, alpha: f64) -> Result<f64> {
    check_mean_exponent(window.dim(), alpha)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * t * t * covariogram_radial_integral(window, delta, alpha)?)
}

/// Lower and upper bound on `E L` from the Lipschitz bound on the angular
/// covariogram.
pub fn expectation_bounds(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    let d = window.dim();
    check_mean_exponent(d, alpha)?;
    let df = d as f64;
    let upper =
        df * kappa(d) / (2.0 * (alpha + df)) * t * t * delta.powf(alpha + df) * window.volume();
    let correction = kappa(d - 1) / (2.0 * (alpha + df + 1.0))
        * t
        * t
        * delta.powf(alpha + df + 1.0)
        * window.surface_area();
    Ok((upper - correction, upper))
}

/// `Cov(L^(α), L^(β)) = t³ ∫_W h_α h_β dy + (t²/2) ∫_{B(0,δ)} ‖y‖^{α+β} g_W(y) dy`
/// where `h_γ(y) = ∫_W 1(‖y − x‖ ≤ δ) ‖y − x‖^γ dx`.
pub fn covariance_exact(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let d = window.dim();
    check_covariance_exponents(d, alpha, beta)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let pair = 0.5 * t * t * covariogram_radial_integral(window, delta, alpha + beta)?;
    let local = Quadrature::with_rel_tol(1e-10);
    let triple = window_integral(window, delta, |y| {
        let ha = window
            .local_power_integral_with(y, delta, alpha, &local, false)
            .unwrap_or(f64::NAN);
        if alpha == beta {
            ha * ha
        } else {
            ha * window
                .local_power_integral_with(y, delta, beta, &local, false)
                .unwrap_or(f64::NAN)
        }
    })?;
    Ok(t * t * t * triple + pair)
}

/// Sandwich for the covariance using `V(W) − S(W)δ` as a lower bound on the
/// inner parallel volume.
pub fn covariance_bounds(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    let d = window.dim();
    check_covariance_exponents(d, alpha, beta)?;
    let (s1, s2) = sigma_constants(d, alpha, beta);
    let df = d as f64;
    let scale = s1 * t * t * delta.powf(alpha + beta + df)
        + s2 * t.powi(3) * delta.powf(alpha + beta + 2.0 * df);
    Ok((
        scale * window.inner_parallel_volume_lower_bound(delta),
        scale * window.volume(),
    ))
}

/// `(σ₁, σ₂) = (dκ_d / (2(α+β+d)), d²κ_d² / ((α+d)(β+d)))`.
pub fn sigma_constants(d: usize, alpha: f64, beta: f64) -> (f64, f64) {
    let df = d as f64;
    let k = kappa(d);
    (
        df * k / (2.0 * (alpha + beta + df)),
        df * df * k * k / ((alpha + df) * (beta + df)),
    )
}

/// Scale `max{t δ^{α+d/2}, t^{3/2} δ^{α+d}}` that makes `L^(α)` order one.
pub fn normalization(t: f64, delta: f64, alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    (t * delta.powf(alpha + df / 2.0)).max(t.powf(1.5) * delta.powf(alpha + df))
}

/// Asymptotic covariance matrix of the normalised vector
/// `(L^(α_1), …, L^(α_m)) / normalization` in the given regime.
pub fn sigma_matrix(alphas: &[f64], d: usize, volume: f64, regime: Regime) -> Result<DMatrix<f64>> {
    for &a in alphas {
        check_variance_exponent(d, a)?;
    }
    let m = alphas.len();
    let df = d as f64;
    let k = kappa(d);
    let s1 = DMatrix::from_fn(m, m, |i, j| {
        df * k * volume / 2.0 / (alphas[i] + alphas[j] + df)
    });
    let s2 = DMatrix::from_fn(m, m, |i, j| {
        df * df * k * k * volume / ((alphas[i] + df) * (alphas[j] + df))
    });
    Ok(match regime {
        Regime::Sparse => s1,
        Regime::Thermodynamic { c } if c <= 1.0 => s1 + s2 * c,
        Regime::Thermodynamic { c } => s1 / c + s2,
        Regime::Dense => s2,
    })
}

/// Leading-order variance of `L^(α)`.
pub fn variance_asymptotic(window: &ConvexWindow, t: f64, delta: f64, alpha: f64) -> Result<f64> {
    let d = window.dim();
    check_variance_exponent(d, alpha)?;
    let df = d as f64;
    let k = kappa(d);
    let first = df * k / (2.0 * (2.0 * alpha + df)) * t * t * delta.powf(2.0 * alpha + df);
    let second =
        df * df * k * k / (alpha + df).powi(2) * t.powi(3) * delta.powf(2.0 * alpha + 2.0 * df);
    Ok((first + second) * window.volume())
}

/// Closed-form upper estimates of the three integrals in the
/// normal-approximation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MBounds {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl MBounds {
    /// `√M11 + 2√M12 + √M22`.
    pub fn combined(&self) -> f64 {
        self.m11.sqrt() + 2.0 * self.m12.sqrt() + self.m22.sqrt()
    }
}

pub fn m_bounds(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
) -> Result<MBounds> {
    let d = window.dim();
    check_variance_exponent(d, alpha)?;
    check_variance_exponent(d, beta)?;
    let df = d as f64;
    let k = kappa(d);
    let v = window.volume();
    let e = 2.0 * alpha + 2.0 * beta;
    let dk = df * k;
    let four = dk.powi(4) * v * t.powi(5) * delta.powf(e + 4.0 * df)
        / ((alpha + df).powi(2) * (beta + df).powi(2));
    let three = dk.powi(3) * v * t.powi(4) * delta.powf(e + 3.0 * df)
        / ((alpha + df).powi(2) * (2.0 * beta + df));
    let two = 6.0 * dk * dk * v * t.powi(3) * delta.powf(e + 2.0 * df)
        / ((2.0 * alpha + df).sqrt() * (2.0 * beta + df).sqrt() * (alpha + beta + df));
    let one = dk * v * t * t * delta.powf(e + df) / (2.0 * (alpha + beta) + 3.0 * df);
    Ok(MBounds {
        m11: four,
        m12: 2.0 * four + three,
        m22: 3.0 * three + two + one,
    })
}

/// Which variance enters the denominator of [`kolmogorov_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSource {
    /// Lower end of [`covariance_bounds`]; cheap and conservative.
    #[default]
    LowerBound,
    /// [`covariance_exact`].
    Exact,
}

/// Kolmogorov distance bound `621 (√M11 + 2√M12 + √M22) / Var L`.
pub fn kolmogorov_bound(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alpha: f64,
    source: VarianceSource,
) -> Result<f64> {
    let m = m_bounds(window, t, delta, alpha, alpha)?;
    let var = match source {
        VarianceSource::LowerBound => covariance_bounds(window, t, delta, alpha, alpha)?.0,
        VarianceSource::Exact => covariance_exact(window, t, delta, alpha, alpha)?,
    };
    if !(var > 0.0) {
        return Err(GilbertError::DegenerateVariance(var));
    }
    Ok(621.0 * m.combined() / var)
}

/// Smooth-function distance bound between the normalised vector and its
/// Gaussian limit `N(Σ)`.
pub fn d3_bound(
    window: &ConvexWindow,
    t: f64,
    delta: f64,
    alphas: &[f64],
    regime: Regime,
) -> Result<f64> {
    let d = window.dim();
    let m = alphas.len();
    let sigma = sigma_matrix(alphas, d, window.volume(), regime)?;
    let norms: Vec<f64> = alphas
        .iter()
        .map(|&a| normalization(t, delta, a, d))
        .collect();
    let mut cov = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let c =
                covariance_exact(window, t, delta, alphas[i], alphas[j])? / (norms[i] * norms[j]);
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    let first: f64 = 0.5 * (&sigma - &cov).iter().map(|v| v.abs()).sum::<f64>();
    let df = d as f64;
    let scale = (t * t * delta.powf(df)).max(t.powi(3) * delta.powf(2.0 * df));
    let mut terms = 0.0;
    for &ai in alphas {
        for &aj in alphas {
            terms += m_bounds(window, t, delta, ai, aj)?.combined() / (scale * delta.powf(ai + aj));
        }
    }
    let spread: f64 = (0..m).map(|i| cov[(i, i)].sqrt()).sum::<f64>() + 1.0;
    Ok(first + 4.0 * 2f64.sqrt() * m as f64 * spread * terms)
}

/// `∫_W f(y) dy` for integrands that depend on `y` only through its position
/// relative to the boundary (invariant under the symmetries of the window),
/// with kinks where the distance to the boundary crosses `δ`.
pub(crate) fn window_integral<F: Fn(&[f64]) -> f64>(
    window: &ConvexWindow,
    delta: f64,
    f: F,
) -> Result<f64> {
    match window.kind() {
        WindowKind::Box { sides } => {
            let outer = Quadrature {
                rel_tol: 1e-8,
                ..Quadrature::default()
            };
            let half = 0.5 * sides[0];
            let breaks = coordinate_breaks(sides, delta, &[]);
            let mut y = vec![0.0];
            let inner = |v: f64| {
                y[0] = v;
                half_box_nested(sides, delta, &y, &f)
            };
            let r = outer.integrate_with_breaks(inner, 0.0, half, &breaks)?;
            Ok(r.value * 2f64.powi(sides.len() as i32))
        }
        WindowKind::Ball { radius } => {
            let d = window.dim();
            let quad = Quadrature {
                rel_tol: 1e-8,
                ..Quadrature::default()
            };
            let mut y = vec![0.0; d];
            let shell = power_weighted(
                &quad,
                d as f64 - 1.0,
                0.0,
                *radius,
                &[radius - delta],
                |s| {
                    y[0] = s;
                    f(&y)
                },
                true,
            )?;
            Ok(d as f64 * kappa(d) * shell)
        }
    }
}

fn half_box_nested<F: Fn(&[f64]) -> f64>(sides: &[f64], delta: f64, prefix: &[f64], f: &F) -> f64 {
    let k = prefix.len();
    if k == sides.len() {
        return f(prefix);
    }
    let quad = Quadrature::with_rel_tol(1e-9);
    let breaks = coordinate_breaks(sides, delta, prefix);
    let mut y = prefix.to_vec();
    y.push(0.0);
    quad.estimate_with_breaks(
        |v| {
            y[k] = v;
            half_box_nested(sides, delta, &y, f)
        },
        0.0,
        0.5 * sides[k],
        &breaks,
    )
}

/// Values of the next coordinate at which some boundary face, edge or corner
/// enters the `δ`-ball around the point.
fn coordinate_breaks(sides: &[f64], delta: f64, prefix: &[f64]) -> Vec<f64> {
    let k = prefix.len();
    let s = sides[k];
    let mut partial = vec![0.0];
    for (j, &v) in prefix.iter().enumerate() {
        let near = v.min(sides[j] - v);
        let far = sides[j] - near;
        let mut next = Vec::with_capacity(partial.len() * 3);
        for &p in &partial {
            next.push(p);
            next.push(p + near * near);
            next.push(p + far * far);
        }
        partial = next;
    }
    let mut out = Vec::new();
    for p in partial {
        let r2 = delta * delta - p;
        if r2 > 0.0 {
            let r = r2.sqrt();
            out.push(r);
            out.push(s - r);
        }
    }
    out.retain(|&b| b > 0.0 && b < 0.5 * s);
    out
}
