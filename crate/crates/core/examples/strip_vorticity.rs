//! Second vorticity in the strip from the integral equation, and its
//! residual against an independently computed source.
//!
//! cargo run --release --example strip_vorticity -- [K] [h2]

use std::f64::consts::PI;

use muskat::model::{build_initial_graph, Geometry, GridSpec, Preset};
use muskat::quadrature::QuadratureConfig;
use muskat::vorticity::{fredholm_residual, omega2_strip};
use muskat::PhysicalParams;

fn bump(x: f64) -> f64 {
    0.3 * (-x * x).exp() - 0.2 * (-(x - 1.5) * (x - 1.5) * 2.0).exp()
}

fn main() -> muskat::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().ok());
    let k = args.next().flatten().unwrap_or(0.5);
    let h2 = args.next().flatten().unwrap_or(1.0);
    let cfg = QuadratureConfig::default();
    let params = PhysicalParams::with_contrast(k, 4.0 * PI, h2, Geometry::Strip)?;
    let graph = build_initial_graph(&Preset::Formula(bump), &GridSpec::new(96), Geometry::Strip)?;
    let w = omega2_strip(&params, &graph, &cfg)?;
    println!("carrier nodes: {}, budget {:.2e}", w.carrier.nodes.len(), w.budget);
    for (x, v) in graph.nodes().iter().zip(&w.omega2).step_by(8) {
        println!("  x={x:+.3}  w2={v:+.6e}");
    }
    println!("residual {:.3e}", fredholm_residual(&params, &graph, &w, &cfg)?);
    Ok(())
}
