//! One Poisson sample in the unit square, its Gilbert graph and a few
//! length-power functionals.

use gilbert::geometry::ConvexWindow;
use gilbert::graph::{build_edges, length_power, max_degree, LengthPowerSpec};
use gilbert::point_process::sample_poisson;
use gilbert::rng::{stream, StreamDomain};

fn main() -> gilbert::Result<()> {
    let window = ConvexWindow::unit_square();
    let mut rng = stream(7, StreamDomain::Replication, 0, 0);
    let points = sample_poisson(&window, 500.0, &mut rng)?;
    let edges = build_edges(&points, 0.04);
    let spec = LengthPowerSpec::new(vec![0.0, 1.0, 2.0])?;
    let values = length_power(&edges, &spec);
    println!(
        "{} points, {} edges, max degree {}",
        points.len(),
        edges.len(),
        max_degree(&edges)
    );
    for (a, v) in spec.alphas.iter().zip(values) {
        println!("L^({a}) = {v:.6}");
    }
    Ok(())
}
