//! Covariogram of a box and of a ball: closed form against Monte Carlo.

use gilbert::geometry::ConvexWindow;
use gilbert::rng::{stream, StreamDomain};

fn main() -> gilbert::Result<()> {
    let mut rng = stream(1, StreamDomain::Auxiliary, 0, 0);
    for window in [
        ConvexWindow::cuboid(vec![1.0, 2.0])?,
        ConvexWindow::ball(1.0, 3)?,
    ] {
        println!("{window}");
        for r in [0.0, 0.25, 0.5, 1.0, 1.5] {
            let mut y = vec![0.0; window.dim()];
            y[0] = r;
            let exact = window.covariogram(&y).expect("closed form");
            let mc = window.covariogram_mc(&y, 200_000, &mut rng);
            println!(
                "  r = {r:<5} g = {exact:.5}  mc = {:.5} ± {:.5}",
                mc.value, mc.std_error
            );
        }
    }
    Ok(())
}
