//! Evolves one of the standard periodic data on the torus and prints the
//! decay of the sup norm for several contrasts.
//!
//! cargo run --release --example evolve_torus -- [case1|case2|case3] [t_end]

use std::f64::consts::{FRAC_PI_2, PI};

use muskat::model::{build_initial_graph, Geometry, GridSpec, Preset};
use muskat::stepper::{run, StepperConfig};
use muskat::PhysicalParams;

fn main() -> muskat::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = match args.next().as_deref() {
        Some("case2") => Preset::Case2,
        Some("case3") => Preset::Case3,
        _ => Preset::Case1,
    };
    let t_end: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let graph = build_initial_graph(&preset, &GridSpec::new(120), Geometry::Torus)?;
    let cfg = StepperConfig { t_end, output_every: 100, ..StepperConfig::default() };
    for k in [-1.0 / 3.0, 0.0, 1.0 / 3.0] {
        let params = PhysicalParams::with_contrast(k, 4.0 * PI, FRAC_PI_2, Geometry::Torus)?;
        let start = std::time::Instant::now();
        let out = run(&params, &graph, &cfg)?;
        println!("K = {k:+.4}  ({:?}, {:.1} s)", out.termination, start.elapsed().as_secs_f64());
        for r in &out.series {
            let d = r.diagnostics;
            println!("  t={:.3}  sup={:.6e}  slope={:.6e}  l2={:.6e}  budget={:.1e}", d.time, d.sup_norm, d.slope_sup_norm, d.l2_norm, r.budget);
        }
    }
    Ok(())
}
