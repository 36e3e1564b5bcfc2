use std::f64::consts::PI;

use statrs::function::beta::beta_reg;

use super::covariogram::sphere_slice_constant;
use super::{norm, unit_ball_volume, ConvexWindow, WindowKind};
use crate::error::Result;
use crate::quadrature::{power_weighted, Quadrature};

impl ConvexWindow {
    /// Fraction of the sphere `∂B(y, r)` that lies inside the window, for `y`
    /// in the window.
    pub fn sphere_fraction(&self, y: &[f64], r: f64) -> f64 {
        match &self.kind {
            WindowKind::Box { sides } => {
                let lo: Vec<f64> = y.to_vec();
                let hi: Vec<f64> = sides.iter().zip(y).map(|(s, v)| s - v).collect();
                slab_fraction(&lo, &hi, r)
            }
            WindowKind::Ball { radius } => ball_sphere_fraction(*radius, self.dim, norm(y), r),
        }
    }

    /// Radii at which `r ↦ sphere_fraction(y, r)` has a kink.
    fn fraction_breakpoints(&self, y: &[f64]) -> Vec<f64> {
        match &self.kind {
            WindowKind::Box { sides } => {
                let lo: Vec<f64> = y.to_vec();
                let hi: Vec<f64> = sides.iter().zip(y).map(|(s, v)| s - v).collect();
                slab_kinks(&lo, &hi)
            }
            WindowKind::Ball { radius } => {
                let s = norm(y);
                vec![radius - s, radius + s]
            }
        }
    }

    /// `h_γ(y) = ∫_W 1(‖y − x‖ ≤ δ) ‖y − x‖^γ dx`.
    ///
    /// The part of the ball inside the window is integrated in closed form;
    /// only the shell that meets the boundary goes through quadrature.
    pub fn local_power_integral(&self, y: &[f64], delta: f64, gamma: f64) -> Result<f64> {
        self.local_power_integral_with(y, delta, gamma, &Quadrature::with_rel_tol(1e-10), true)
    }

    pub(crate) fn local_power_integral_with(
        &self,
        y: &[f64],
        delta: f64,
        gamma: f64,
        quad: &Quadrature,
        strict: bool,
    ) -> Result<f64> {
        let d = self.dim as f64;
        let area = d * unit_ball_volume(self.dim);
        let p = gamma + d - 1.0;
        let rho0 = self.distance_to_boundary(y).min(delta);
        let inner = if rho0 > 0.0 {
            rho0.powf(p + 1.0) / (p + 1.0)
        } else {
            0.0
        };
        if rho0 >= delta {
            return Ok(area * inner);
        }
        let breaks = self.fraction_breakpoints(y);
        let shell = power_weighted(
            quad,
            p,
            rho0,
            delta,
            &breaks,
            |r| self.sphere_fraction(y, r),
            strict,
        )?;
        Ok(area * (inner + shell))
    }
}

fn ball_sphere_fraction(radius: f64, dim: usize, s: f64, r: f64) -> f64 {
    if r + s <= radius {
        return 1.0;
    }
    if r >= radius + s || s == 0.0 {
        return 0.0;
    }
    // Points y + r u with ⟨u, ŷ⟩ ≤ c stay inside.
    let c = ((radius * radius - s * s - r * r) / (2.0 * s * r)).clamp(-1.0, 1.0);
    match dim {
        1 => {
            // two endpoints y ± r
            (((s + r) <= radius) as u8 as f64 + ((r - s) <= radius) as u8 as f64) / 2.0
        }
        2 => (PI - c.acos()) / PI,
        3 => (1.0 + c) / 2.0,
        _ => {
            let a = (dim as f64 - 1.0) / 2.0;
            beta_reg(a, a, (1.0 + c) / 2.0)
        }
    }
}

/// Fraction of the unit sphere of radius `r` centred at the origin inside the
/// box `∏ [−lo_i, hi_i]`.
fn slab_fraction(lo: &[f64], hi: &[f64], r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    if lo.iter().chain(hi).all(|&v| v >= r) {
        return 1.0;
    }
    match lo.len() {
        1 => ((hi[0] >= r) as u8 as f64 + (lo[0] >= r) as u8 as f64) / 2.0,
        2 => arc_fraction(lo, hi, r),
        d => {
            // u_1 = sin φ with density c_d cos^{d-2} φ on [-π/2, π/2].
            let z_lo = (-lo[0] / r).max(-1.0);
            let z_hi = (hi[0] / r).min(1.0);
            if z_lo >= z_hi {
                return 0.0;
            }
            let (p_lo, p_hi) = (z_lo.asin(), z_hi.asin());
            let kinks = slab_kinks(&lo[1..], &hi[1..]);
            let mut breaks = Vec::with_capacity(2 * kinks.len());
            for k in kinks.into_iter().filter(|&k| k < r) {
                let phi = (k / r).acos();
                breaks.push(phi);
                breaks.push(-phi);
            }
            let quad = Quadrature::with_rel_tol(1e-11);
            let integrand = |phi: f64| {
                let (_, cs) = phi.sin_cos();
                cs.powi(d as i32 - 2) * slab_fraction(&lo[1..], &hi[1..], r * cs)
            };
            sphere_slice_constant(d) * quad.estimate_with_breaks(integrand, p_lo, p_hi, &breaks)
        }
    }
}

/// Exact arc-length fraction of a circle of radius `r` inside the rectangle
/// `[−lo_1, hi_1] × [−lo_2, hi_2]`.
fn arc_fraction(lo: &[f64], hi: &[f64], r: f64) -> f64 {
    let tau = 2.0 * PI;
    let mut angles = vec![0.0, tau];
    for c in [-lo[0] / r, hi[0] / r] {
        if c.abs() < 1.0 {
            let a = c.acos();
            angles.push(a);
            angles.push(tau - a);
        }
    }
    for c in [-lo[1] / r, hi[1] / r] {
        if c.abs() < 1.0 {
            let a = c.asin();
            angles.push(a.rem_euclid(tau));
            angles.push(PI - a);
        }
    }
    angles.sort_by(f64::total_cmp);
    let inside = |t: f64| {
        let (s, c) = t.sin_cos();
        let (x, y) = (r * c, r * s);
        x >= -lo[0] && x <= hi[0] && y >= -lo[1] && y <= hi[1]
    };
    let mut total = 0.0;
    for w in angles.windows(2) {
        if w[1] > w[0] && inside(0.5 * (w[0] + w[1])) {
            total += w[1] - w[0];
        }
    }
    total / tau
}

/// Radii where the sphere starts crossing a new face or edge of the box.
fn slab_kinks(lo: &[f64], hi: &[f64]) -> Vec<f64> {
    // Each coordinate contributes nothing, its lower or its upper distance.
    let d = lo.len();
    let mut out = Vec::new();
    let mut choice = vec![0u8; d];
    loop {
        let mut i = 0;
        while i < d && choice[i] == 2 {
            choice[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
        choice[i] += 1;
        let s: f64 = (0..d)
            .map(|k| match choice[k] {
                1 => lo[k] * lo[k],
                2 => hi[k] * hi[k],
                _ => 0.0,
            })
            .sum();
        out.push(s.sqrt());
    }
    out.retain(|&v| v > 0.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
