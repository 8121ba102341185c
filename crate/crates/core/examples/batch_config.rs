//! Drives the batch front end from a config string: a short contrast
//! sweep, then a turning check, with the files written to a directory.
//!
//! cargo run --release --example batch_config -- [out_dir]

use muskat::cli::{parse_config, simulate_command, turning_command};

fn main() -> muskat::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "muskat_out".into());
    let sim = format!(
        "geometry=torus\nkappa1=1\nkappa2=1\nrho_jump=12.566370614359172\nh2=1.5707963267948966\n\
         N=64\ndt=0.001\nt_end=0.05\noutput_every=10\npreset=case2\n\
         contrasts=-0.3333333333333333,0,0.3333333333333333\noutput={dir}/case2.csv\n"
    );
    let cfg = parse_config(&sim)?;
    print!("{}", cfg.to_text());
    let out = simulate_command(&cfg);
    print!("{}", out.summary);
    println!("exit {} ({} files)", out.exit_code, out.files.len());

    let turn = format!(
        "geometry=torus\nkappa1=1\nkappa2=2\nrho_jump=12.566370614359172\nh2=1.5707963267948966\n\
         family=zTNE\ntrap_dx=1e-6\ntrap_dxt=1e-3\nreport={dir}/turning.txt\n"
    );
    let out = turning_command(&parse_config(&turn)?);
    print!("{}", out.summary);
    println!("exit {}", out.exit_code);
    Ok(())
}
