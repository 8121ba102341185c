//! A localized bump relaxing in the plane and in the strip.
//!
//! cargo run --release --example line_evolution -- [t_end]

use std::f64::consts::PI;

use muskat::model::{build_initial_graph, Geometry, GridSpec, Preset};
use muskat::stepper::{run, StepperConfig};
use muskat::PhysicalParams;

fn bump(x: f64) -> f64 {
    0.4 * (-x * x).exp()
}

fn main() -> muskat::Result<()> {
    let t_end: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let cfg = StepperConfig { dt: 2e-3, t_end, output_every: 25, ..StepperConfig::default() };
    for (geometry, h2) in [(Geometry::Plane, 1.0), (Geometry::Strip, 1.0)] {
        let graph = build_initial_graph(&Preset::Formula(bump), &GridSpec::new(64), geometry)?;
        let params = PhysicalParams::with_contrast(0.5, 4.0 * PI, h2, geometry)?;
        let out = run(&params, &graph, &cfg)?;
        println!("{geometry}: {:?} after {} steps", out.termination, out.steps);
        for r in &out.series {
            let d = r.diagnostics;
            println!("  t={:.3}  sup={:.6e}  l2={:.6e}  gap={:.4}", d.time, d.sup_norm, d.l2_norm, d.min_gap);
        }
    }
    Ok(())
}
