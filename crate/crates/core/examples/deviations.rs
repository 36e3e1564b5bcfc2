//! Optimised deviation bound and its envelope for a Poisson and a binomial
//! input over a range of deviations `u`.

use gilbert::geometry::ConvexWindow;
use gilbert::theory::deviations::{ldi_bound, ldi_envelope, ldi_xstar, LdiInput, LdiMode};

fn main() -> gilbert::Result<()> {
    for mode in [LdiMode::Poisson { t: 500.0 }, LdiMode::Binomial { n: 500 }] {
        println!("{mode:?}");
        for u in [250.0, 500.0, 1000.0, 2000.0] {
            let input = LdiInput {
                mode,
                window: ConvexWindow::unit_square(),
                delta: 0.05,
                alpha: 0.0,
                median: 390.0,
                u,
            };
            println!(
                "  u = {u:<5} x* = {:.4}  bound = {:.3e}  envelope = {:.3e}",
                ldi_xstar(&input)?,
                ldi_bound(&input)?,
                ldi_envelope(&input)?
            );
        }
    }
    Ok(())
}
