//! Concentration bounds for the length functional: Chernoff tails, the
//! optimised deviation bounds for binomial and Poisson input and their
//! closed-form envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{GilbertError, Result};
use crate::geometry::{unit_ball_volume, ConvexWindow};

/// `inf_{s ≥ 0} exp(a(e^s − 1) − s y)`, attained at `s = ln(y/a)` when `y > a`.
pub fn chernoff_poisson_tail(a: f64, y: f64) -> f64 {
    assert!(a > 0.0, "Poisson mean must be positive");
    if y <= a {
        return 1.0;
    }
    (y - a + y * (a / y).ln()).exp()
}

/// Chernoff bound for a binomial `Bin(m, p)` tail, through `a = m p`.
pub fn chernoff_binomial_tail(m: u64, p: f64, y: f64) -> f64 {
    assert!(m >= 1 && p > 0.0 && p < 1.0, "need m ≥ 1 and p in (0, 1)");
    chernoff_poisson_tail(m as f64 * p, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LdiMode {
    Binomial { n: usize },
    Poisson { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdiInput {
    pub mode: LdiMode,
    pub window: ConvexWindow,
    pub delta: f64,
    pub alpha: f64,
    /// Median of the functional, usually estimated from a pilot run.
    pub median: f64,
    pub u: f64,
}

impl LdiInput {
    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(GilbertError::InvalidParameter(format!(
                "deviation bounds need alpha ≥ 0, got {}",
                self.alpha
            )));
        }
        if !(self.delta > 0.0) {
            return Err(GilbertError::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.median >= 0.0 && self.median.is_finite() && self.u >= 0.0) {
            return Err(GilbertError::InvalidParameter(format!(
                "need finite median ≥ 0 and u ≥ 0, got m = {}, u = {}",
                self.median, self.u
            )));
        }
        if self.u + self.median == 0.0 {
            return Err(GilbertError::DegenerateInput("u + median is zero".into()));
        }
        match self.mode {
            LdiMode::Binomial { n } if n < 2 => Err(GilbertError::InvalidParameter(format!(
                "binomial mode needs n ≥ 2, got {n}"
            ))),
            LdiMode::Poisson { t } if !(t > 0.0) => Err(GilbertError::InvalidParameter(format!(
                "intensity must be positive, got {t}"
            ))),
            _ => Ok(()),
        }
    }

    /// Effective intensity: `t`, or `n / V(W)`.
    fn intensity(&self) -> f64 {
        match self.mode {
            LdiMode::Poisson { t } => t,
            LdiMode::Binomial { n } => n as f64 / self.window.volume(),
        }
    }

    /// `ln(t V) / (t κ δ^d)`, or `ln(n) V / (n κ δ^d)`.
    fn log_term(&self) -> f64 {
        let d = self.window.dim();
        let kd = unit_ball_volume(d) * self.delta.powi(d as i32);
        match self.mode {
            LdiMode::Poisson { t } => (t * self.window.volume()).ln() / (t * kd),
            LdiMode::Binomial { n } => (n as f64).ln() * self.window.volume() / (n as f64 * kd),
        }
    }

    /// `u² / (8 λ² κ² δ^{2d+α} (u + m))` with `λ` the effective intensity.
    fn quadratic_term(&self) -> f64 {
        let d = self.window.dim() as f64;
        let k = unit_ball_volume(self.window.dim());
        let lambda = self.intensity();
        self.u * self.u
            / (8.0
                * lambda
                * lambda
                * k
                * k
                * self.delta.powf(2.0 * d + self.alpha)
                * (self.u + self.median))
    }
}

/// `A(s) + √(Q/s + A(s)²)` with `A(s) = (L + e^s − 1) / (2s)`.
pub fn ldi_objective(input: &LdiInput, s: f64) -> f64 {
    objective(input.log_term(), input.quadratic_term(), s)
}

fn objective(l: f64, q: f64, s: f64) -> f64 {
    let a = (l + s.exp_m1()) / (2.0 * s);
    a + (q / s + a * a).sqrt()
}

const LN_S_LO: f64 = -20.0;
const LN_S_HI: f64 = 10.0;
const GRID: usize = 301;
const GOLDEN_REL_TOL: f64 = 1e-10;

/// Infimum over `s > 0` of [`ldi_objective`].
pub fn ldi_xstar(input: &LdiInput) -> Result<f64> {
    input.validate()?;
    let (l, q) = (input.log_term(), input.quadratic_term());
    let f = |x: f64| objective(l, q, x.exp());
    let step = (LN_S_HI - LN_S_LO) / (GRID - 1) as f64;
    let values: Vec<f64> = (0..GRID).map(|k| f(LN_S_LO + k as f64 * step)).collect();
    let mut best = f64::INFINITY;
    for k in 0..GRID {
        let left = if k == 0 { f64::INFINITY } else { values[k - 1] };
        let right = if k + 1 == GRID {
            f64::INFINITY
        } else {
            values[k + 1]
        };
        if values[k] <= left && values[k] <= right {
            let lo = LN_S_LO + k.saturating_sub(1) as f64 * step;
            let hi = LN_S_LO + (k + 1).min(GRID - 1) as f64 * step;
            best = best.min(golden_section(&f, lo, hi)).min(values[k]);
        }
    }
    if !best.is_finite() {
        return Err(GilbertError::DegenerateInput(format!(
            "deviation objective has no finite minimum (L = {l}, Q = {q})"
        )));
    }
    Ok(best)
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        let (lo, hi) = (fc.min(fd), fc.max(fd));
        if (b - a).abs() < 1e-14 || hi - lo <= GOLDEN_REL_TOL * 1e-2 * lo.abs() && (b - a) < 1e-6 {
            break;
        }
    }
    fc.min(fd)
}

/// The optimised bound on `P(|L − m| ≥ u)`, clamped to 1.
pub fn ldi_bound(input: &LdiInput) -> Result<f64> {
    let x = ldi_xstar(input)?;
    let d = input.window.dim() as f64;
    let k = unit_ball_volume(input.window.dim());
    let lambda = input.intensity();
    let denom = 8.0 * lambda * k * input.delta.powf(d + input.alpha) * x * (input.u + input.median);
    Ok((8.0 * (-input.u * input.u / denom).exp()).min(1.0))
}

/// The closed-form envelope of [`ldi_bound`], clamped to 1.
pub fn ldi_envelope(input: &LdiInput) -> Result<f64> {
    input.validate()?;
    let d = input.window.dim() as f64;
    let k = unit_ball_volume(input.window.dim());
    let da = input.delta.powf(input.alpha);
    let scale = match input.mode {
        LdiMode::Poisson { t } => {
            (t * input.window.volume()).ln() * da + 2.0 * t * k * input.delta.powf(d + input.alpha)
        }
        LdiMode::Binomial { n } => {
            let n = n as f64;
            n.ln() * da + 2.0 * n * k * input.delta.powf(d + input.alpha) / input.window.volume()
        }
    };
    let um = input.u + input.median;
    let first = input.u * input.u / (8.0 * scale * um);
    let second = input.u / (8.0 * da * um).sqrt();
    Ok((8.0 * (-0.5 * first.min(second)).exp()).min(1.0))
}

/// Shape of the deviation exponent along `δ_t ∝ t^{−1/d}`:
/// `min{t^{(2α−d)/d} u², t^{α/(3d)} u^{1/3}, t^{(3α−d)/(4d)} u^{3/4}}`.
pub fn thermo_exponent(u: f64, t: f64, alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    let a = t.powf((2.0 * alpha - d) / d) * u * u;
    let b = t.powf(alpha / (3.0 * d)) * u.cbrt();
    let c = t.powf((3.0 * alpha - d) / (4.0 * d)) * u.powf(0.75);
    a.min(b).min(c)
}

/// Exponent shape implied by the envelope on the same schedule:
/// `min{u² t^{2α/d} / (t ln t), u t^{α/d} / √t, √u t^{α/(2d)}}`.
pub fn envelope_exponent_shape(u: f64, t: f64, alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    let a = u * u * t.powf(2.0 * alpha / d) / (t * t.ln());
    let b = u * t.powf(alpha / d) / t.sqrt();
    let c = u.sqrt() * t.powf(alpha / (2.0 * d));
    a.min(b).min(c)
}

/// Sparse binomial graphs with `n² δ_n^d = C`: the threshold
/// `9 B² δ_n^α ln n` and the decay shape `n^{1−B}` of its exceedance
/// probability.
pub fn sparse_bound_check(n: usize, c: f64, b: f64, alpha: f64, d: usize) -> Result<(f64, f64)> {
    if !(c > 0.0 && b > 0.0) || n < 2 || d == 0 {
        return Err(GilbertError::InvalidParameter(format!(
            "need C > 0, B > 0, n ≥ 2, d ≥ 1 (got C = {c}, B = {b}, n = {n}, d = {d})"
        )));
    }
    let n = n as f64;
    let delta = sparse_delta(n, c, d);
    Ok((9.0 * b * b * delta.powf(alpha) * n.ln(), n.powf(1.0 - b)))
}

/// `δ_n = (C / n²)^{1/d}`.
pub fn sparse_delta(n: f64, c: f64, d: usize) -> f64 {
    (c / (n * n)).powf(1.0 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use statrs::distribution::{Binomial, DiscreteCDF, Poisson};
    use std::f64::consts::{E, PI};

    fn poisson_input(t: f64, delta: f64, median: f64, u: f64) -> LdiInput {
        LdiInput {
            mode: LdiMode::Poisson { t },
            window: ConvexWindow::unit_square(),
            delta,
            alpha: 0.0,
            median,
            u,
        }
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_poisson_tail(1.0, 1.0), 1.0);
        assert_eq!(chernoff_poisson_tail(1.0, 0.5), 1.0);
        assert_relative_eq!(
            chernoff_poisson_tail(1.0, 4.0),
            E.powi(3) / 256.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            chernoff_binomial_tail(10, 0.1, 4.0),
            E.powi(3) / 256.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn chernoff_dominates_exact_tails() {
        for a in [0.1, 0.5, 1.0, 3.0, 10.0, 40.0] {
            let p = Poisson::new(a).unwrap();
            for y in 0..120u64 {
                let exact = if y == 0 { 1.0 } else { p.sf(y - 1) };
                assert!(
                    chernoff_poisson_tail(a, y as f64) >= exact * (1.0 - 1e-12),
                    "a = {a}, y = {y}"
                );
            }
        }
        for (m, pr) in [(10u64, 0.1), (50, 0.3), (200, 0.02), (5, 0.9)] {
            let b = Binomial::new(pr, m).unwrap();
            for y in 1..=m {
                let exact = b.sf(y - 1);
                assert!(chernoff_binomial_tail(m, pr, y as f64) >= exact * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn xstar_with_unit_log_term() {
        // ln(tV)/(t κ δ²) = 1 with V = 1, d = 2
        let t = 100.0f64;
        let delta = (t.ln() / (t * PI)).sqrt();
        let input = poisson_input(t, delta, 1.0, 0.0);
        assert_relative_eq!(input.log_term(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(ldi_xstar(&input).unwrap(), E, max_relative = 1e-9);
    }

    #[test]
    fn xstar_collapses_at_zero_u() {
        for (t, delta) in [(100.0, 0.05), (1e4, 0.01), (50.0, 0.3)] {
            let input = poisson_input(t, delta, 3.0, 0.0);
            let l = input.log_term();
            let two_a = |s: f64| (l + s.exp_m1()) / s;
            let brute = (1..200_000)
                .map(|k| two_a(k as f64 * 1e-4))
                .fold(f64::INFINITY, f64::min);
            assert_relative_eq!(ldi_xstar(&input).unwrap(), brute, max_relative = 1e-7);
        }
    }

    #[test]
    fn xstar_is_near_optimal_and_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut prev = 0.0;
        for k in 0..40 {
            let input = poisson_input(200.0, 0.05, 20.0, k as f64 * 2.5);
            let x = ldi_xstar(&input).unwrap();
            assert!(x >= prev);
            prev = x;
            for _ in 0..1000 {
                let s = (rng.random::<f64>() * 30.0 - 20.0).exp();
                assert!(x <= ldi_objective(&input, s) * (1.0 + 1e-8));
            }
        }
        assert!(matches!(
            ldi_xstar(&poisson_input(10.0, 0.1, 0.0, 0.0)),
            Err(GilbertError::DegenerateInput(_))
        ));
    }

    #[test]
    fn bounds_clamp_and_decay() {
        assert_eq!(
            ldi_bound(&poisson_input(100.0, 0.05, 30.0, 0.0)).unwrap(),
            1.0
        );
        assert_eq!(
            ldi_envelope(&poisson_input(100.0, 0.05, 30.0, 0.0)).unwrap(),
            1.0
        );
        let mut prev = 1.0;
        let mut strict = false;
        for k in 1..200 {
            let b = ldi_bound(&poisson_input(100.0, 0.05, 30.0, k as f64 * 5.0)).unwrap();
            assert!(b <= prev);
            if prev < 1.0 {
                strict = true;
                assert!(b < prev);
            }
            prev = b;
        }
        assert!(strict);
        let far = ldi_envelope(&poisson_input(100.0, 0.05, 30.0, 1e6)).unwrap();
        assert!(far < 1e-60);
    }

    #[test]
    fn binomial_uses_window_volume() {
        let w = ConvexWindow::cuboid(vec![2.0, 1.0]).unwrap();
        let input = LdiInput {
            mode: LdiMode::Binomial { n: 400 },
            window: w,
            delta: 0.1,
            alpha: 1.0,
            median: 5.0,
            u: 10.0,
        };
        let expected = 400f64.ln() * 2.0 / (400.0 * PI * 0.01);
        assert_relative_eq!(input.log_term(), expected, max_relative = 1e-12);
        let b = ldi_bound(&input).unwrap();
        let e = ldi_envelope(&input).unwrap();
        assert!(b > 0.0 && b <= 1.0 && e > 0.0 && e <= 1.0);
    }

    #[test]
    fn thermo_shapes() {
        assert_relative_eq!(
            thermo_exponent(1.0, 100.0, 0.0, 2),
            0.01,
            max_relative = 1e-12
        );
        let mut prev = 0.0;
        for k in 1..100 {
            let e = thermo_exponent(k as f64 * 0.5, 1e3, 1.0, 2);
            assert!(e >= prev);
            prev = e;
        }
        assert!(envelope_exponent_shape(1.0, 100.0, 0.0, 2) > 0.0);
    }

    #[test]
    fn sparse_threshold() {
        let (thr, shape) = sparse_bound_check(10_000, 1.0, 2.0, 0.0, 2).unwrap();
        assert_relative_eq!(thr, 36.0 * 1e4f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(thr, 331.6, max_relative = 1e-3);
        assert_relative_eq!(shape, 1e-4, max_relative = 1e-12);
        assert_relative_eq!(sparse_delta(1e4, 1.0, 2), 1e-4, max_relative = 1e-12);
        let thresholds: Vec<f64> = [10, 100, 1000, 10_000]
            .iter()
            .map(|&n| sparse_bound_check(n, 1.0, 2.0, 0.0, 2).unwrap().0)
            .collect();
        assert!(thresholds.windows(2).all(|w| w[1] > w[0]));
    }
}
