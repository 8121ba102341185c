//! Batch front end: flat key=value configs, the two subcommands, CSV and
//! gnuplot emission.
//!
//! A config is one `key=value` per line; `#` starts a comment. Required
//! keys are `geometry`, `kappa1`, `kappa2`, `rho_jump` and `h2`; every other
//! key has a default (see [`RunConfig::default_for`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{build_initial_graph, validate_params, Geometry, GridSpec, PhysicalParams, Preset, RawParams};
use crate::quadrature::QuadratureConfig;
use crate::stepper::{run, RunRecord, StepperConfig, Termination};
use crate::turning::{make_curve, Family, TurningCurve, TurningEvaluator, TurningReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SLOPE_BLOWUP: i32 = 4;
pub const EXIT_NOT_CERTIFIED: i32 = 5;

pub const CSV_HEADER: &str = "t,sup_norm,slope_sup_norm,l2_norm,min_gap,dh_sup,budget";

/// Initial data expressible in a config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetChoice {
    Case1,
    Case2,
    Case3,
    Flat,
    Cosine,
}

impl PresetChoice {
    fn name(self) -> &'static str {
        match self {
            PresetChoice::Case1 => "case1",
            PresetChoice::Case2 => "case2",
            PresetChoice::Case3 => "case3",
            PresetChoice::Flat => "flat",
            PresetChoice::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurningBlock {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    /// Multiplies z2; lets the named shapes sit above a shallower jump.
    pub z2_scale: f64,
    pub window_lo: f64,
    pub l2: f64,
}

impl Default for TurningBlock {
    fn default() -> Self {
        TurningBlock { family: Family::ZTNE, a: 5.0, b: 3.0, delta: 0.2, z2_scale: 1.0, window_lo: 0.1, l2: 2.0 * std::f64::consts::PI }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub kappa1: f64,
    pub kappa2: f64,
    pub rho_jump: f64,
    pub h2: f64,
    pub n: usize,
    pub half_width: f64,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub slope_cap: f64,
    pub budget_factor: f64,
    pub preset: PresetChoice,
    pub flat_level: f64,
    /// Amplitude and wavenumber of the cosine preset.
    pub cosine_amplitude: f64,
    pub cosine_mode: u32,
    /// When non-empty, `simulate` runs once per contrast with kappa1 kept
    /// and kappa2 = kappa1 (1 - K) / (1 + K).
    pub contrasts: Vec<f64>,
    pub quad: QuadratureConfig,
    pub output: PathBuf,
    pub plot: Option<PathBuf>,
    pub report: PathBuf,
    pub turning: TurningBlock,
}

const KEYS: &[&str] = &[
    "geometry",
    "kappa1",
    "kappa2",
    "rho_jump",
    "h2",
    "N",
    "half_width",
    "dt",
    "t_end",
    "output_every",
    "slope_cap",
    "budget_factor",
    "preset",
    "flat_level",
    "cosine_amplitude",
    "cosine_mode",
    "contrasts",
    "lobatto_tol",
    "trunc_radius",
    "trap_dx",
    "trap_dxt",
    "output",
    "plot",
    "report",
    "family",
    "a",
    "b",
    "delta",
    "z2_scale",
    "window_lo",
    "L2",
];

const REQUIRED: &[&str] = &["geometry", "kappa1", "kappa2", "rho_jump", "h2"];

impl RunConfig {
    /// Defaults for everything except the physical parameters.
    pub fn default_for(geometry: Geometry, kappa1: f64, kappa2: f64, rho_jump: f64, h2: f64) -> RunConfig {
        let s = StepperConfig::default();
        RunConfig {
            geometry,
            kappa1,
            kappa2,
            rho_jump,
            h2,
            n: 120,
            half_width: GridSpec::new(120).half_width,
            dt: s.dt,
            t_end: s.t_end,
            output_every: s.output_every,
            slope_cap: s.slope_cap,
            budget_factor: s.budget_factor,
            preset: PresetChoice::Case1,
            flat_level: 0.0,
            cosine_amplitude: 0.1,
            cosine_mode: 1,
            contrasts: Vec::new(),
            quad: QuadratureConfig::default(),
            output: PathBuf::from("muskat_series.csv"),
            plot: None,
            report: PathBuf::from("turning_report.txt"),
            turning: TurningBlock::default(),
        }
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        validate_params(&self.raw(self.kappa2))
    }

    fn raw(&self, kappa2: f64) -> RawParams {
        RawParams { kappa1: self.kappa1, kappa2, rho_jump: self.rho_jump, h2: self.h2, geometry: self.geometry }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            dt: self.dt,
            t_end: self.t_end,
            output_every: self.output_every,
            slope_cap: self.slope_cap,
            budget_factor: self.budget_factor,
            quad: self.quad,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { half_width: self.half_width, ..GridSpec::new(self.n) }
    }

    pub fn initial_preset(&self) -> Preset {
        match self.preset {
            PresetChoice::Case1 => Preset::Case1,
            PresetChoice::Case2 => Preset::Case2,
            PresetChoice::Case3 => Preset::Case3,
            PresetChoice::Flat => Preset::Flat(self.flat_level),
            PresetChoice::Cosine => Preset::Cosine { amplitude: self.cosine_amplitude, mode: self.cosine_mode },
        }
    }

    /// Plot script path: `plot` if given, else `output` with extension `gp`.
    pub fn plot_path(&self) -> PathBuf {
        self.plot.clone().unwrap_or_else(|| self.output.with_extension("gp"))
    }

    /// The curve named by the turning block, at this config's h2.
    pub fn curve(&self) -> Result<TurningCurve> {
        let t = &self.turning;
        let curve = if t.z2_scale == 1.0 {
            make_curve(t.family, t.a, t.b, self.h2, t.delta)?
        } else {
            // The named shape is built at its own depth and moved.
            let native = match t.family {
                Family::ZTNE | Family::ZRNE => std::f64::consts::FRAC_PI_2,
                _ => self.h2,
            };
            make_curve(t.family, t.a, t.b, native, t.delta)?.rescaled(t.z2_scale, self.h2)?
        };
        let curve = curve.with_window(t.window_lo)?;
        if curve.is_periodic() {
            Ok(curve)
        } else {
            curve.with_l2(t.l2)
        }
    }

    /// Serializes every field; `parse_config` of the result gives `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("geometry", self.geometry.to_string());
        put("kappa1", fmt_f(self.kappa1));
        put("kappa2", fmt_f(self.kappa2));
        put("rho_jump", fmt_f(self.rho_jump));
        put("h2", fmt_f(self.h2));
        put("N", self.n.to_string());
        put("half_width", fmt_f(self.half_width));
        put("dt", fmt_f(self.dt));
        put("t_end", fmt_f(self.t_end));
        put("output_every", self.output_every.to_string());
        put("slope_cap", fmt_f(self.slope_cap));
        put("budget_factor", fmt_f(self.budget_factor));
        put("preset", self.preset.name().to_string());
        put("flat_level", fmt_f(self.flat_level));
        put("cosine_amplitude", fmt_f(self.cosine_amplitude));
        put("cosine_mode", self.cosine_mode.to_string());
        put("contrasts", self.contrasts.iter().map(|k| fmt_f(*k)).collect::<Vec<_>>().join(","));
        put("lobatto_tol", fmt_f(self.quad.lobatto_tol));
        put("trunc_radius", fmt_f(self.quad.trunc_radius));
        put("trap_dx", fmt_f(self.quad.trap_dx));
        put("trap_dxt", fmt_f(self.quad.trap_dxt));
        put("output", self.output.display().to_string());
        if let Some(p) = &self.plot {
            put("plot", p.display().to_string());
        }
        put("report", self.report.display().to_string());
        put("family", self.turning.family.name().to_string());
        put("a", fmt_f(self.turning.a));
        put("b", fmt_f(self.turning.b));
        put("delta", fmt_f(self.turning.delta));
        put("z2_scale", fmt_f(self.turning.z2_scale));
        put("window_lo", fmt_f(self.turning.window_lo));
        put("L2", fmt_f(self.turning.l2));
        s
    }
}

/// Shortest decimal that reads back to the same binary64.
fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

fn mismatch(key: &str, value: &str) -> Error {
    Error::TypeMismatch { key: key.to_string(), value: value.to_string() }
}

fn num(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| mismatch(key, value))
}

fn count(key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| mismatch(key, value))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::UnknownKey(k.to_string()));
        }
        if map.insert(k, v).is_some() {
            return Err(Error::Parse(format!("key `{k}` given twice")));
        }
    }
    for k in REQUIRED {
        if !map.contains_key(k) {
            return Err(Error::MissingRequired(k.to_string()));
        }
    }
    let geometry: Geometry = map["geometry"].parse().map_err(|_| mismatch("geometry", map["geometry"]))?;
    let mut c = RunConfig::default_for(
        geometry,
        num("kappa1", map["kappa1"])?,
        num("kappa2", map["kappa2"])?,
        num("rho_jump", map["rho_jump"])?,
        num("h2", map["h2"])?,
    );
    for (&k, &v) in &map {
        match k {
            "N" => c.n = count(k, v)?,
            "half_width" => c.half_width = num(k, v)?,
            "dt" => c.dt = num(k, v)?,
            "t_end" => c.t_end = num(k, v)?,
            "output_every" => c.output_every = count(k, v)?,
            "slope_cap" => c.slope_cap = num(k, v)?,
            "budget_factor" => c.budget_factor = num(k, v)?,
            "preset" => {
                c.preset = match v {
                    "case1" => PresetChoice::Case1,
                    "case2" => PresetChoice::Case2,
                    "case3" => PresetChoice::Case3,
                    "flat" => PresetChoice::Flat,
                    "cosine" => PresetChoice::Cosine,
                    _ => return Err(mismatch(k, v)),
                }
            }
            "flat_level" => c.flat_level = num(k, v)?,
            "cosine_amplitude" => c.cosine_amplitude = num(k, v)?,
            "cosine_mode" => c.cosine_mode = v.parse().map_err(|_| mismatch(k, v))?,
            "contrasts" => {
                c.contrasts = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(k, s))
                    .collect::<Result<_>>()?
            }
            "lobatto_tol" => c.quad.lobatto_tol = num(k, v)?,
            "trunc_radius" => c.quad.trunc_radius = num(k, v)?,
            "trap_dx" => c.quad.trap_dx = num(k, v)?,
            "trap_dxt" => c.quad.trap_dxt = num(k, v)?,
            "output" => c.output = PathBuf::from(v),
            "plot" => c.plot = Some(PathBuf::from(v)),
            "report" => c.report = PathBuf::from(v),
            "family" => c.turning.family = Family::parse(v).map_err(|_| mismatch(k, v))?,
            "a" => c.turning.a = num(k, v)?,
            "b" => c.turning.b = num(k, v)?,
            "delta" => c.turning.delta = num(k, v)?,
            "z2_scale" => c.turning.z2_scale = num(k, v)?,
            "window_lo" => c.turning.window_lo = num(k, v)?,
            "L2" => c.turning.l2 = num(k, v)?,
            _ => {}
        }
    }
    validate(&c)?;
    Ok(c)
}

fn validate(c: &RunConfig) -> Result<()> {
    c.params()?;
    c.quad.validate()?;
    let bad = |m: String| Err(Error::InvalidParameter(m));
    if !(c.dt > 0.0 && c.dt.is_finite()) {
        return bad(format!("dt must be positive, got {}", c.dt));
    }
    if !(c.t_end >= 0.0 && c.t_end.is_finite()) {
        return bad(format!("t_end must be non-negative, got {}", c.t_end));
    }
    if c.output_every == 0 {
        return bad("output_every must be at least 1".into());
    }
    if !(c.slope_cap > 0.0) || !(c.budget_factor > 0.0) || !(c.half_width > 0.0) {
        return bad("slope_cap, budget_factor and half_width must be positive".into());
    }
    if let Some(k) = c.contrasts.iter().find(|k| !(k.abs() < 1.0)) {
        return bad(format!("contrast {k} outside (-1, 1)"));
    }
    Ok(())
}

/// Exit code for an error that stopped a command.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::GapCollapse(_)
        | Error::NonFinite(_)
        | Error::ToleranceNotMet { .. }
        | Error::SingularArgument
        | Error::OutOfStrip
        | Error::DegenerateGrid(_)
        | Error::StageConstraintViolated { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

pub fn exit_code_for_termination(t: Termination) -> i32 {
    match t {
        Termination::TimeReached => EXIT_OK,
        Termination::SlopeBlowup => EXIT_SLOPE_BLOWUP,
        Termination::GapCollapse | Termination::NonFinite | Termination::BudgetExceeded => EXIT_NUMERICAL,
    }
}

pub fn write_series_csv(series: &[RunRecord]) -> String {
    let mut s = String::with_capacity(160 * (series.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in series {
        let d = &r.diagnostics;
        let row = [d.time, d.sup_norm, d.slope_sup_norm, d.l2_norm, d.min_gap, d.dh_sup, r.budget];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Rows of a series CSV, in header order.
pub fn parse_series_csv(text: &str) -> Result<Vec<[f64; 7]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("bad CSV header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 7 {
                return Err(Error::Parse(format!("row {}: expected 7 columns, got {}", i + 1, cells.len())));
            }
            let mut row = [0.0; 7];
            for (slot, c) in row.iter_mut().zip(cells) {
                *slot = c.parse().map_err(|_| Error::Parse(format!("row {}: bad number `{c}`", i + 1)))?;
            }
            Ok(row)
        })
        .collect()
}

/// Gnuplot script with the two figure types: -||f||_inf and ||f'||_inf
/// against time, one curve per CSV.
pub fn plot_script(csvs: &[(PathBuf, String)], stem: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let plot = |s: &mut String, out: &str, ylabel: &str, using: &str| {
        let _ = writeln!(s, "set output '{out}'");
        let _ = writeln!(s, "set ylabel \"{ylabel}\"");
        let parts: Vec<String> = csvs
            .iter()
            .map(|(p, title)| format!("\"{}\" using 1:({using}) with lines title \"{title}\"", p.display()))
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    };
    plot(&mut s, &format!("{stem}_sup.png"), "-||f||_inf", "-$2");
    plot(&mut s, &format!("{stem}_slope.png"), "||f'||_inf", "$3");
    s
}

/// What a command did.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn indexed(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{i}{ext}"))
}

fn config_failure(e: &Error) -> CommandOutcome {
    CommandOutcome { exit_code: exit_code_for(e), files: Vec::new(), summary: format!("error: {e}") }
}

/// Runs the evolution for the config (once per entry of `contrasts`, or
/// once), writing one CSV per run and a plot script. The exit code is the
/// largest over the runs.
pub fn simulate_command(config: &RunConfig) -> CommandOutcome {
    let runs: Vec<(f64, PathBuf)> = if config.contrasts.is_empty() {
        vec![(config.kappa2, config.output.clone())]
    } else {
        config
            .contrasts
            .iter()
            .enumerate()
            .map(|(i, k)| (config.kappa1 * (1.0 - k) / (1.0 + k), indexed(&config.output, i)))
            .collect()
    };
    let mut files = Vec::new();
    let mut csvs = Vec::new();
    let mut summary = String::new();
    let mut code = EXIT_OK;
    for (kappa2, path) in runs {
        let params = match validate_params(&config.raw(kappa2)) {
            Ok(p) => p,
            Err(e) => return config_failure(&e),
        };
        let initial = match build_initial_graph(&config.initial_preset(), &config.grid(), config.geometry) {
            Ok(g) => g,
            Err(e) => return config_failure(&e),
        };
        let result = match run(&params, &initial, &config.stepper()) {
            Ok(r) => r,
            Err(e) => {
                code = code.max(exit_code_for(&e));
                let _ = writeln!(summary, "K={:.6}: error: {e}", params.k());
                continue;
            }
        };
        if let Err(e) = write_file(&path, &write_series_csv(&result.series)) {
            return config_failure(&e);
        }
        let _ = writeln!(
            summary,
            "K={:.6}: {:?} after {} steps (t={}), wrote {}",
            params.k(),
            result.termination,
            result.steps,
            result.final_state.time(),
            path.display()
        );
        code = code.max(exit_code_for_termination(result.termination));
        csvs.push((path.clone(), format!("K={:.4}", params.k())));
        files.push(path);
    }
    if !csvs.is_empty() {
        let gp = config.plot_path();
        let stem = gp.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "muskat".into());
        if let Err(e) = write_file(&gp, &plot_script(&csvs, &stem)) {
            return config_failure(&e);
        }
        files.push(gp);
    }
    CommandOutcome { exit_code: code, files, summary }
}

/// Evaluates the turning functional for the config's curve and geometry
/// and writes the report block.
pub fn turning_command(config: &RunConfig) -> CommandOutcome {
    let report = (|| -> Result<TurningReport> {
        let params = config.params()?;
        let curve = config.curve()?;
        TurningEvaluator::new(&curve, config.geometry, &config.quad)?.report(&params)
    })();
    let report = match report {
        Ok(r) => r,
        Err(e) => return config_failure(&e),
    };
    let text = report.to_kv();
    if let Err(e) = write_file(&config.report, &text) {
        return config_failure(&e);
    }
    let exit_code = if report.certified_negative { EXIT_OK } else { EXIT_NOT_CERTIFIED };
    CommandOutcome { exit_code, files: vec![config.report.clone()], summary: text }
}
