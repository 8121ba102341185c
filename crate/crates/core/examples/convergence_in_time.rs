//! Self-convergence of the RK4 driver on a smooth periodic datum.
//!
//! cargo run --release --example convergence_in_time -- [dt]

use std::f64::consts::{FRAC_PI_2, PI};

use muskat::model::{build_initial_graph, Geometry, GridSpec, Preset};
use muskat::stepper::{temporal_order, StepperConfig};
use muskat::PhysicalParams;

fn main() -> muskat::Result<()> {
    let dt: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let g = build_initial_graph(&Preset::Cosine { amplitude: 0.2, mode: 1 }, &GridSpec::new(32), Geometry::Torus)?;
    let p = PhysicalParams::with_contrast(1.0 / 3.0, 4.0 * PI, FRAC_PI_2, Geometry::Torus)?;
    let cfg = StepperConfig { dt, t_end: 0.2, ..StepperConfig::default() };
    println!("{:?}", temporal_order(&p, &g, &cfg)?);
    Ok(())
}
