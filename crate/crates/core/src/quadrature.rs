//! Globally adaptive Gauss–Kronrod (G7/K15) quadrature on finite intervals.
//!
//! Intervals are bisected in order of decreasing error estimate until the
//! summed error drops below `max(abs_tol, rel_tol * |I|)`. Caller-supplied
//! breakpoints (kinks of the integrand) seed the initial partition.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{GilbertError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

/// Tolerances and the evaluation cap for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_evals: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    /// Integrates over `[a, b]`, splitting first at every breakpoint strictly
    /// inside the interval. Breakpoints need not be sorted.
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<Integral> {
        let run = self.run(f, a, b, breaks);
        let tol = self.abs_tol.max(self.rel_tol * run.value.abs());
        if run.abs_error <= tol || run.at_roundoff {
            Ok(Integral {
                value: run.value,
                abs_error: run.abs_error,
                evals: run.evals,
            })
        } else {
            Err(GilbertError::QuadratureNotConverged {
                estimate: run.value,
                error: run.abs_error,
                evals: run.evals,
            })
        }
    }

    /// Like [`integrate_with_breaks`](Self::integrate_with_breaks) but returns
    /// the best estimate even when the evaluation cap is hit. Used for inner
    /// integrals of nested quadratures, whose outer level reports failure.
    pub fn estimate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> f64 {
        self.run(f, a, b, breaks).value
    }

    fn run<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, breaks: &[f64]) -> RunState {
        if a == b {
            return RunState {
                value: 0.0,
                abs_error: 0.0,
                evals: 0,
                at_roundoff: true,
            };
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&x| x > lo && x < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut heap = BinaryHeap::new();
        let mut left = lo;
        for &c in cuts.iter().chain(std::iter::once(&hi)) {
            heap.push(kronrod15(&mut f, left, c));
            left = c;
        }
        let mut evals = 15 * heap.len();
        let mut value: f64 = heap.iter().map(|p| p.value).sum();
        let mut error: f64 = heap.iter().map(|p| p.error).sum();
        let mut at_roundoff = false;

        loop {
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol || evals + 30 > self.max_evals {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * (hi - lo) {
                // Cannot split further in floating point; keep the panel as is.
                at_roundoff = true;
                heap.push(Panel {
                    error: 0.0,
                    ..worst
                });
                error -= worst.error;
                continue;
            }
            let l = kronrod15(&mut f, worst.a, mid);
            let r = kronrod15(&mut f, mid, worst.b);
            evals += 30;
            value += l.value + r.value - worst.value;
            error += l.error + r.error - worst.error;
            heap.push(l);
            heap.push(r);
        }
        // Re-sum to shed accumulated cancellation from the running totals.
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        RunState {
            value: sign * value,
            abs_error: error,
            evals,
            at_roundoff,
        }
    }
}

struct RunState {
    value: f64,
    abs_error: f64,
    evals: usize,
    at_roundoff: bool,
}

/// `∫_lo^hi r^p f(r) dr` for `p > -1`.
///
/// For negative `p` the substitution `v = r^(p+1)` removes the endpoint
/// singularity at zero; breakpoints are mapped accordingly.
pub(crate) fn power_weighted<F: FnMut(f64) -> f64>(
    quad: &Quadrature,
    p: f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    mut f: F,
    strict: bool,
) -> Result<f64> {
    debug_assert!(p > -1.0);
    if hi <= lo {
        return Ok(0.0);
    }
    if p < 0.0 {
        let q = p + 1.0;
        let inv = 1.0 / q;
        let mapped: Vec<f64> = breaks.iter().map(|&b| b.max(0.0).powf(q)).collect();
        let g = |v: f64| f(v.max(0.0).powf(inv));
        let (vlo, vhi) = (lo.powf(q), hi.powf(q));
        let value = if strict {
            quad.integrate_with_breaks(g, vlo, vhi, &mapped)?.value
        } else {
            quad.estimate_with_breaks(g, vlo, vhi, &mapped)
        };
        Ok(value * inv)
    } else {
        let g = |r: f64| {
            if r > 0.0 {
                r.powf(p) * f(r)
            } else if p == 0.0 {
                f(r)
            } else {
                0.0
            }
        };
        if strict {
            Ok(quad.integrate_with_breaks(g, lo, hi, breaks)?.value)
        } else {
            Ok(quad.estimate_with_breaks(g, lo, hi, breaks))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_rule_is_exact_for_low_degree_polynomials() {
        for k in 0..=21 {
            let panel = kronrod15(&mut |x: f64| x.powi(k), 0.0, 1.0);
            assert_relative_eq!(panel.value, 1.0 / (k as f64 + 1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn smooth_integral() {
        let q = Quadrature::default();
        let r = q.integrate(f64::sin, 0.0, std::f64::consts::PI).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let q = Quadrature::default();
        let r = q
            .integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3])
            .unwrap();
        assert_relative_eq!(r.value, 0.5 * (0.09 + 0.49), max_relative = 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = Quadrature::default();
        let r = q.integrate(|x: f64| x * x, 1.0, 0.0).unwrap();
        assert_relative_eq!(r.value, -1.0 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn singular_power_weight() {
        let q = Quadrature::default();
        // ∫_0^1 r^-0.9 (1 + r) dr = 10 + 1/1.1
        let v = power_weighted(&q, -0.9, 0.0, 1.0, &[], |r| 1.0 + r, true).unwrap();
        assert_relative_eq!(v, 10.0 + 1.0 / 1.1, max_relative = 1e-10);
    }

    #[test]
    fn eval_cap_reports_non_convergence() {
        let q = Quadrature {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_evals: 45,
        };
        let err = q
            .integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, GilbertError::QuadratureNotConverged { .. }));
    }
}
