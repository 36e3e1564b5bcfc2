//! A small normal-approximation check along the schedule `δ = t^{-1/2}`.

use gilbert::experiments::{verify, ExperimentConfig, Radius, VerificationKind};
use gilbert::geometry::ConvexWindow;
use gilbert::theory::RegimeSchedule;

fn main() -> gilbert::Result<()> {
    let mut cfg = ExperimentConfig::new(VerificationKind::Clt, ConvexWindow::unit_square());
    cfg.grid = vec![250.0, 500.0, 1000.0];
    cfg.radius = Radius::Schedule(RegimeSchedule::new(1.0, 0.5, 2)?);
    cfg.alphas = vec![1.0];
    cfg.reps = 400;
    cfg.seed = 17;
    let report = verify(&cfg)?;
    for m in &report.metrics {
        println!("{m}");
    }
    Ok(())
}
