//! Turning functional for the named curves on the torus and the line.
//!
//! cargo run --release --example turning [-- dxt]

use std::f64::consts::{FRAC_PI_2, PI};

use muskat::model::{Geometry, PhysicalParams};
use muskat::quadrature::QuadratureConfig;
use muskat::turning::{make_curve, Family, TurningEvaluator};

fn main() -> muskat::error::Result<()> {
    let dxt: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let cfg = QuadratureConfig { trap_dx: 1e-7, trap_dxt: dxt, ..Default::default() };
    let ks = [-999.0 / 1001.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 999.0 / 1001.0];
    for (family, geometry) in [(Family::ZTNE, Geometry::Torus), (Family::ZRNE, Geometry::Plane)] {
        let curve = make_curve(family, 0.0, 0.0, FRAC_PI_2, 0.0)?;
        let eval = TurningEvaluator::new(&curve, geometry, &cfg)?;
        println!("{} on {:?}", family.name(), geometry);
        for k in ks {
            let params = PhysicalParams::with_contrast(k, 4.0 * PI, FRAC_PI_2, geometry)?;
            let r = eval.report(&params)?;
            println!(
                "  K={k:+.4}  i1={:+.6}  i2={:+.6}  E1={:.2e}  E2={:.2e}  certified={}",
                r.i1,
                r.i2,
                r.ledger.total_e1(),
                r.ledger.total_e2(),
                r.certified_negative
            );
            if std::env::var("LEDGER").is_ok() {
                println!("    {:?}", r.ledger);
            }
        }
    }
    Ok(())
}
