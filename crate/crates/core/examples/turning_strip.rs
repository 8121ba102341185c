//! Finite-depth turning: the zRNE shape scaled into the strip, its
//! functional for a few contrasts and the admissible-contrast bound.
//!
//! cargo run --release --example turning_strip [-- h2 scale]

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use muskat::model::{Geometry, PhysicalParams};
use muskat::quadrature::QuadratureConfig;
use muskat::turning::{k_threshold_strip, make_curve, Family, TurningEvaluator};
use muskat::vorticity::delta_threshold;

fn main() -> muskat::error::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().ok());
    let h2 = args.next().flatten().unwrap_or(FRAC_PI_4);
    let scale = args.next().flatten().unwrap_or(0.5);
    let curve = make_curve(Family::ZRNE, 0.0, 0.0, FRAC_PI_2, 0.0)?.rescaled(scale, h2)?;
    let cfg = QuadratureConfig { trap_dx: 1e-6, trap_dxt: 1e-3, ..Default::default() };
    let eval = TurningEvaluator::new(&curve, Geometry::Strip, &cfg)?;
    let delta = delta_threshold(h2)?;
    println!("h2={h2}  scale={scale}  delta={delta:.6}");
    for k in [-0.5f64, -0.2, 0.0, 0.2, 0.5] {
        if k.abs() >= delta {
            continue;
        }
        let params = PhysicalParams::with_contrast(k, 4.0 * PI, h2, Geometry::Strip)?;
        let r = eval.report(&params)?;
        println!(
            "  K={k:+.2}  i1={:+.6}  i2={:+.6}  E1={:.2e}  E2={:.2e}  certified={}",
            r.i1,
            r.i2,
            r.ledger.total_e1(),
            r.ledger.total_e2(),
            r.certified_negative
        );
    }
    let (i1, _) = eval.i1()?;
    let t = k_threshold_strip(&curve, h2, i1)?;
    println!("threshold {:.6e}  (C(h2)={:.4}, d1={:.4}, d2={:.4}, |G|_1={:.4})", t.value, t.c_h2, t.d1_sup, t.d2_sup, t.g_l1_sup);
    Ok(())
}
