//! Runs one periodic datum for the five contrasts of the numerical section
//! and reports the decay orderings of the sup norm and of the slope.
//!
//! cargo run --release --example figure_orderings -- [case1|case2|case3] [t_end]

use std::f64::consts::{FRAC_PI_2, PI};

use muskat::model::{build_initial_graph, Geometry, GridSpec, Preset};
use muskat::stepper::{run, RunResult, StepperConfig};
use muskat::PhysicalParams;

const CONTRASTS: [f64; 5] = [-999.0 / 1001.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 999.0 / 1001.0];

fn at(run: &RunResult, t: f64) -> Option<(f64, f64)> {
    run.series
        .iter()
        .find(|r| (r.diagnostics.time - t).abs() < 1e-9)
        .map(|r| (r.diagnostics.sup_norm, r.diagnostics.slope_sup_norm))
}

fn main() -> muskat::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "case1".into());
    let preset = match name.as_str() {
        "case2" => Preset::Case2,
        "case3" => Preset::Case3,
        _ => Preset::Case1,
    };
    let t_end: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let graph = build_initial_graph(&preset, &GridSpec::new(120), Geometry::Torus)?;
    let cfg = StepperConfig { t_end, ..StepperConfig::default() };
    let mut runs = Vec::new();
    for k in CONTRASTS {
        let params = PhysicalParams::with_contrast(k, 4.0 * PI, FRAC_PI_2, Geometry::Torus)?;
        let start = std::time::Instant::now();
        let out = run(&params, &graph, &cfg)?;
        let sup_rise = out.series.windows(2).map(|w| w[1].diagnostics.sup_norm - w[0].diagnostics.sup_norm).fold(f64::NEG_INFINITY, f64::max);
        let l2_rise = out.series.windows(2).map(|w| w[1].diagnostics.l2_norm - w[0].diagnostics.l2_norm).fold(f64::NEG_INFINITY, f64::max);
        let last = out.series.last().unwrap().diagnostics;
        println!(
            "{name} K={k:+.6}: {:?} at t={:.3} after {:.1} s; max sup rise {sup_rise:.2e}, max l2 rise {l2_rise:.2e}",
            out.termination,
            last.time,
            start.elapsed().as_secs_f64()
        );
        runs.push(out);
    }
    let half = 0.5f64.min(t_end);
    let v: Vec<_> = runs.iter().map(|r| at(r, half)).collect();
    if let (Some(m), Some(z), Some(p)) = (v[1], v[2], v[3]) {
        println!("t={half}: sup  -1/3 {:.6e}  0 {:.6e}  +1/3 {:.6e}", m.0, z.0, p.0);
        println!("t={half}: slope -1/3 {:.6e}  0 {:.6e}  +1/3 {:.6e}", m.1, z.1, p.1);
    }
    Ok(())
}
