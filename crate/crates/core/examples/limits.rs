//! Limit laws: the compound Poisson limit when the expected edge count stays
//! bounded, and the order statistics of rescaled edge lengths.

use gilbert::rng::{stream, StreamDomain};
use gilbert::theory::limits::{
    order_statistic_limit_cdf, sample_compound_poisson, CompoundPoissonModel,
    EdgeLengthProcessLimit, ExponentConvention, LimitRegime,
};

fn main() -> gilbert::Result<()> {
    let model = CompoundPoissonModel::new(1.0, 2, 2.0, 1.0)?;
    let mut rng = stream(3, StreamDomain::Reference, 0, 0);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| sample_compound_poisson(&model, &mut rng))
        .collect();
    let zeros = draws.iter().filter(|&&x| x == 0.0).count() as f64 / draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    println!(
        "P(Z = 0) = {:.4} (sampled {zeros:.4}), E Z = {:.4} (sampled {mean:.4})",
        model.zero_probability(),
        model.mean()
    );

    let limit = EdgeLengthProcessLimit::new(LimitRegime::EdgeInfinite, 2.0, 2, 1.0)?;
    for u in [0.25, 0.5, 1.0, 2.0] {
        let row: Vec<String> = (1..=3)
            .map(|m| {
                format!(
                    "{:.4}",
                    order_statistic_limit_cdf(m, u, &limit, ExponentConvention::FromIntensity)
                )
            })
            .collect();
        println!("u = {u:<4} P(S_1..3 <= u) = {}", row.join("  "));
    }
    Ok(())
}
