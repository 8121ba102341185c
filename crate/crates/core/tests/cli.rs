use std::path::PathBuf;
use std::process::Command;

use muskat::cli::{
    parse_config, parse_series_csv, simulate_command, turning_command, write_series_csv, EXIT_CONFIG, EXIT_NOT_CERTIFIED,
    EXIT_OK, EXIT_SLOPE_BLOWUP,
};
use muskat::model::build_initial_graph;
use muskat::stepper::run;
use muskat::turning::TurningReport;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("muskat-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

const TORUS: &str = "geometry=torus\nkappa1=1\nrho_jump=12.566370614359172\nh2=1.5707963267948966\n";

#[test]
fn turning_zt_ne_certifies() {
    let d = scratch("zt");
    let text = format!("{TORUS}kappa2=2\nfamily=zTNE\ntrap_dx=1e-6\ntrap_dxt=1e-3\nreport={}\n", d.join("r.txt").display());
    let out = turning_command(&parse_config(&text).unwrap());
    assert_eq!(out.exit_code, EXIT_OK, "{}", out.summary);
    let r = TurningReport::from_kv(&std::fs::read_to_string(d.join("r.txt")).unwrap()).unwrap();
    assert!(r.i1 <= -0.6 && r.certified_negative);
}

#[test]
fn turning_zr_ne_certifies_and_flat_does_not() {
    let d = scratch("zr");
    let base = format!(
        "geometry=plane\nkappa1=1\nkappa2=0.5\nrho_jump=12.566370614359172\nh2=1.5707963267948966\nfamily=zRNE\ntrap_dx=1e-6\ntrap_dxt=1e-3\nreport={}\n",
        d.join("r.txt").display()
    );
    let out = turning_command(&parse_config(&base).unwrap());
    assert_eq!(out.exit_code, EXIT_OK, "{}", out.summary);
    let flat = format!("{base}z2_scale=0\n");
    let out = turning_command(&parse_config(&flat).unwrap());
    assert_eq!(out.exit_code, EXIT_NOT_CERTIFIED, "{}", out.summary);
    let r = TurningReport::from_kv(&std::fs::read_to_string(d.join("r.txt")).unwrap()).unwrap();
    assert_eq!((r.i1, r.i2), (0.0, 0.0));
}

#[test]
fn turning_bad_curve_is_a_config_error() {
    let text = format!("{TORUS}kappa2=1\nfamily=zT\na=5\nb=1.5\nreport=/dev/null\n");
    assert_eq!(turning_command(&parse_config(&text).unwrap()).exit_code, EXIT_CONFIG);
}

#[test]
fn flat_preset_gives_constant_columns_and_identical_files() {
    let d = scratch("flat");
    let text = format!("{TORUS}kappa2=1\nN=16\npreset=flat\nflat_level=0.3\nt_end=0.005\noutput={}\n", d.join("s.csv").display());
    let cfg = parse_config(&text).unwrap();
    let out = simulate_command(&cfg);
    assert_eq!(out.exit_code, EXIT_OK);
    let first = std::fs::read(d.join("s.csv")).unwrap();
    let plot = std::fs::read_to_string(d.join("s.gp")).unwrap();
    assert!(plot.contains("-$2") && plot.contains("$3"));
    let rows = parse_series_csv(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r[1..], rows[0][1..]);
    }
    simulate_command(&cfg);
    assert_eq!(std::fs::read(d.join("s.csv")).unwrap(), first);
}

#[test]
fn csv_reproduces_the_series() {
    let text = format!("{TORUS}kappa2=1\nN=24\npreset=case2\nt_end=0.003\n");
    let cfg = parse_config(&text).unwrap();
    let g = build_initial_graph(&cfg.initial_preset(), &cfg.grid(), cfg.geometry).unwrap();
    let res = run(&cfg.params().unwrap(), &g, &cfg.stepper()).unwrap();
    let rows = parse_series_csv(&write_series_csv(&res.series)).unwrap();
    for (row, r) in rows.iter().zip(&res.series) {
        let d = &r.diagnostics;
        assert_eq!(row, &[d.time, d.sup_norm, d.slope_sup_norm, d.l2_norm, d.min_gap, d.dh_sup, r.budget]);
    }
}

#[test]
fn contrast_sweep_writes_one_csv_per_run() {
    let d = scratch("sweep");
    let text = format!(
        "{TORUS}kappa2=1\nN=16\npreset=case1\nt_end=0.002\ncontrasts=-0.998001998001998,-0.3333333333333333,0,0.3333333333333333,0.998001998001998\noutput={}\n",
        d.join("k.csv").display()
    );
    let out = simulate_command(&parse_config(&text).unwrap());
    assert_eq!(out.files.len(), 6, "{}", out.summary);
    for i in 0..5 {
        let rows = parse_series_csv(&std::fs::read_to_string(d.join(format!("k_{i}.csv"))).unwrap()).unwrap();
        assert!(!rows.is_empty());
    }
}

#[test]
fn unstable_datum_hits_the_slope_cap() {
    let text = "geometry=torus\nkappa1=1\nkappa2=1\nrho_jump=-12.566370614359172\nh2=3\nN=32\nslope_cap=10\n\
                preset=cosine\ncosine_amplitude=0.02\ncosine_mode=4\noutput_every=50\n";
    let d = scratch("unstable");
    let text = format!("{text}output={}\n", d.join("u.csv").display());
    let out = simulate_command(&parse_config(&text).unwrap());
    assert_eq!(out.exit_code, EXIT_SLOPE_BLOWUP, "{}", out.summary);
}

#[test]
fn binary_exit_codes() {
    let d = scratch("bin");
    let bad = d.join("bad.cfg");
    std::fs::write(&bad, "geometry=plane\nbogus=1\n").unwrap();
    let st = Command::new(env!("CARGO_BIN_EXE_muskat")).args(["simulate"]).arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_CONFIG));
    let missing = Command::new(env!("CARGO_BIN_EXE_muskat")).args(["turning", "/nonexistent.cfg"]).status().unwrap();
    assert_eq!(missing.code(), Some(EXIT_CONFIG));
    let good = d.join("good.cfg");
    std::fs::write(&good, format!("{TORUS}kappa2=1\nN=16\npreset=flat\nt_end=0.002\noutput={}\n", d.join("o.csv").display())).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_muskat")).arg("show").arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let shown = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_config(&shown).unwrap(), parse_config(&std::fs::read_to_string(&good).unwrap()).unwrap());
    let st = Command::new(env!("CARGO_BIN_EXE_muskat")).arg("simulate").arg(&good).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_OK));
}
