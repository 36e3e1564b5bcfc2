//! Exact mean and covariance of the length-power functionals next to their
//! two-sided bounds and the asymptotic variance.

use gilbert::geometry::ConvexWindow;
use gilbert::theory::moments::{
    covariance_bounds, covariance_exact, expectation_bounds, expectation_exact, variance_asymptotic,
};

fn main() -> gilbert::Result<()> {
    let w = ConvexWindow::unit_square();
    let (t, delta) = (200.0, 0.05);
    for alpha in [0.0, 1.0] {
        let (lo, hi) = expectation_bounds(&w, t, delta, alpha)?;
        println!(
            "alpha = {alpha}: E L = {:.4} in [{lo:.4}, {hi:.4}]",
            expectation_exact(&w, t, delta, alpha)?
        );
        let (clo, chi) = covariance_bounds(&w, t, delta, alpha, alpha)?;
        println!(
            "           Var L = {:.4} in [{clo:.4}, {chi:.4}], leading order {:.4}",
            covariance_exact(&w, t, delta, alpha, alpha)?,
            variance_asymptotic(&w, t, delta, alpha)?
        );
    }
    Ok(())
}
