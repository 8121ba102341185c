//! The solvability threshold and the resolvent kernel G of the strip.
//!
//! cargo run --release --example resolvent_kernel -- [h2]

use std::f64::consts::FRAC_PI_4;

use muskat::vorticity::{delta_threshold, g_kernel, GGrid};

fn main() -> muskat::Result<()> {
    let h2: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(FRAC_PI_4);
    println!("delta({h2:.6}) = {:.12}", delta_threshold(h2)?);
    for k in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let g = g_kernel(h2, k, &GGrid::default())?;
        println!(
            "K={k:+.2}  G(0)={:+.6e}  G(1)={:+.6e}  |G|_1={:.6}  |G|_2={:.6}",
            g.at(0, 1),
            g.values[g.half + (1.0 / g.spacing).round() as usize],
            g.l1_norm,
            g.l2_norm_x()
        );
    }
    Ok(())
}
