//! Growth rates of small cosines on the torus against the linear rate
//! (A/2)|m|(1 - K e^{-2 h2 |m|}).
//!
//! cargo run --release --example dispersion

use std::f64::consts::{FRAC_PI_2, PI};

use muskat::evolution::rhs;
use muskat::model::{build_initial_graph, Geometry, GridSpec, Preset};
use muskat::quadrature::QuadratureConfig;
use muskat::PhysicalParams;

fn main() -> muskat::Result<()> {
    let (a, h2, eps) = (4.0 * PI, FRAC_PI_2, 1e-6);
    let cfg = QuadratureConfig::default();
    let centre = 32;
    for k in [-999.0 / 1001.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 999.0 / 1001.0] {
        let params = PhysicalParams::with_contrast(k, a, h2, Geometry::Torus)?;
        for m in 1..=3u32 {
            let g = build_initial_graph(&Preset::Cosine { amplitude: eps, mode: m }, &GridSpec::new(64), Geometry::Torus)?;
            let r = rhs(&params, &g, &cfg)?;
            let observed = -r.values[centre] / g.values()[centre];
            let m = m as f64;
            let linear = 0.5 * a * m * (1.0 - k * (-2.0 * h2 * m).exp());
            println!("K={k:+.4} m={m}  observed {observed:.8}  linear {linear:.8}  rel {:.1e}", (observed / linear - 1.0).abs());
        }
    }
    Ok(())
}
