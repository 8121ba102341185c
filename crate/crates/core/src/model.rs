//! Physical parameters, the sampled interface and its diagnostics.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{BoundaryMode, SplineRep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Plane,
    Torus,
    Strip,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Plane => "plane",
            Geometry::Torus => "torus",
            Geometry::Strip => "strip",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane" => Ok(Geometry::Plane),
            "torus" => Ok(Geometry::Torus),
            "strip" => Ok(Geometry::Strip),
            other => Err(Error::TypeMismatch { key: "geometry".into(), value: other.into() }),
        }
    }
}

/// Unvalidated parameter set, as read from a config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub rho_jump: f64,
    pub h2: f64,
    pub geometry: Geometry,
}

/// Validated parameters. Gravity and viscosity are 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    kappa1: f64,
    kappa2: f64,
    rho_jump: f64,
    h2: f64,
    geometry: Geometry,
}

pub fn validate_params(raw: &RawParams) -> Result<PhysicalParams> {
    let RawParams { kappa1, kappa2, rho_jump, h2, geometry } = *raw;
    for (name, v) in [("kappa1", kappa1), ("kappa2", kappa2), ("rho_jump", rho_jump), ("h2", h2)] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} is not finite")));
        }
    }
    if !(kappa1 > 0.0 && kappa2 > 0.0) {
        return Err(Error::NonPositivePermeability { kappa1, kappa2 });
    }
    if geometry == Geometry::Strip && !(h2 > 0.0 && h2 < FRAC_PI_2) {
        return Err(Error::StripDepthOutOfRange(h2));
    }
    if !(h2 > 0.0) {
        return Err(Error::InvalidParameter(format!("h2 must be positive, got {h2}")));
    }
    Ok(PhysicalParams { kappa1, kappa2, rho_jump, h2, geometry })
}

impl PhysicalParams {
    /// Parameters with kappa1 = 1 and kappa2 chosen to give contrast `k`.
    pub fn with_contrast(k: f64, rho_jump: f64, h2: f64, geometry: Geometry) -> Result<Self> {
        if !(k > -1.0 && k < 1.0) {
            return Err(Error::InvalidParameter(format!("contrast {k} outside (-1, 1)")));
        }
        validate_params(&RawParams { kappa1: 1.0, kappa2: (1.0 - k) / (1.0 + k), rho_jump, h2, geometry })
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }
    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }
    pub fn rho_jump(&self) -> f64 {
        self.rho_jump
    }
    pub fn h2(&self) -> f64 {
        self.h2
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Permeability contrast (kappa1 - kappa2)/(kappa1 + kappa2).
    pub fn k(&self) -> f64 {
        (self.kappa1 - self.kappa2) / (self.kappa1 + self.kappa2)
    }

    /// kappa1 * (rho2 - rho1), the velocity scale of the first vorticity.
    pub fn amplitude(&self) -> f64 {
        self.kappa1 * self.rho_jump
    }

    /// Denser fluid below.
    pub fn is_stable(&self) -> bool {
        self.rho_jump > 0.0
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            kappa1: self.kappa1,
            kappa2: self.kappa2,
            rho_jump: self.rho_jump,
            h2: self.h2,
            geometry: self.geometry,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Preset {
    Case1,
    Case2,
    Case3,
    Flat(f64),
    /// `amplitude * cos(mode * x)`; periodic geometry only.
    Cosine { amplitude: f64, mode: u32 },
    /// Explicit (x, f) samples; x must be strictly increasing and uniform.
    Table(Vec<(f64, f64)>),
    /// Any closed-form datum.
    Formula(fn(f64) -> f64),
}

const TROUGH: f64 = FRAC_PI_2 - 1e-6;

pub fn case1(x: f64) -> f64 {
    -TROUGH * (-x.powi(12)).exp()
}

pub fn case2(x: f64) -> f64 {
    -TROUGH * (x * x).cos()
}

pub fn case3(x: f64) -> f64 {
    let c = x.cos();
    -TROUGH * (-(x - 2.0).powi(12)).exp() - TROUGH * (-(x + 2.0).powi(12)).exp() + (-x * x).exp() * c * c
}

impl PartialEq for Preset {
    fn eq(&self, other: &Preset) -> bool {
        match (self, other) {
            (Preset::Case1, Preset::Case1) | (Preset::Case2, Preset::Case2) | (Preset::Case3, Preset::Case3) => true,
            (Preset::Flat(a), Preset::Flat(b)) => a.to_bits() == b.to_bits(),
            (Preset::Table(a), Preset::Table(b)) => a == b,
            (Preset::Formula(a), Preset::Formula(b)) => std::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}

impl Preset {
    pub fn name(&self) -> String {
        match self {
            Preset::Case1 => "case1".into(),
            Preset::Case2 => "case2".into(),
            Preset::Case3 => "case3".into(),
            Preset::Flat(c) => format!("flat({c})"),
            Preset::Cosine { amplitude, mode } => format!("cosine({amplitude}, {mode})"),
            Preset::Table(_) => "table".into(),
            Preset::Formula(_) => "formula".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    /// Half-width of the plane/strip grid.
    pub half_width: f64,
    /// Largest |f - baseline| allowed at the two outermost nodes on each side.
    pub decay_tol: f64,
    /// Allow flat-at-infinity presets on the torus by restriction to [-pi, pi).
    pub periodize: bool,
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        GridSpec { n, half_width: 8.0, decay_tol: 1e-10, periodize: true }
    }
}

/// Interface samples with their spline. Plane and strip graphs equal
/// `baseline` outside the node span.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState {
    nodes: Vec<f64>,
    values: Vec<f64>,
    time: f64,
    spline: SplineRep,
    geometry: Geometry,
    baseline: f64,
}

/// Uniform nodes covering one period, symmetric about 0 (x_0 = -pi for even n).
pub fn torus_nodes(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let mid = (n / 2) as f64;
    (0..n).map(|i| (i as f64 - mid) * h).collect()
}

/// Uniform nodes on [-half_width, half_width], exactly symmetric about 0.
pub fn line_nodes(n: usize, half_width: f64) -> Vec<f64> {
    let h = 2.0 * half_width / (n - 1) as f64;
    let mid = 0.5 * (n - 1) as f64;
    (0..n).map(|i| (i as f64 - mid) * h).collect()
}

pub fn build_initial_graph(preset: &Preset, grid: &GridSpec, geometry: Geometry) -> Result<GraphState> {
    if grid.n < 8 {
        return Err(Error::GridTooSmall(grid.n));
    }
    let flat_at_infinity = matches!(preset, Preset::Case1 | Preset::Case2 | Preset::Case3 | Preset::Formula(_));
    if geometry == Geometry::Torus && flat_at_infinity && !grid.periodize {
        return Err(Error::PresetDomainMismatch(preset.name()));
    }
    if geometry != Geometry::Torus && matches!(preset, Preset::Cosine { .. }) {
        return Err(Error::InvalidParameter(format!("{} does not decay; use the torus", preset.name())));
    }
    let (nodes, values, baseline) = match preset {
        Preset::Table(rows) => {
            if rows.len() < 8 {
                return Err(Error::GridTooSmall(rows.len()));
            }
            let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
            if x.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::TableNotMonotone);
            }
            let h = x[1] - x[0];
            if x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
                return Err(Error::TableNotUniform);
            }
            if geometry == Geometry::Torus {
                let period = h * x.len() as f64;
                if (period - 2.0 * PI).abs() > 1e-9 {
                    return Err(Error::DegenerateGrid("torus table must cover one period uniformly".into()));
                }
            }
            (x, rows.iter().map(|r| r.1).collect(), 0.0)
        }
        _ => {
            let x = match geometry {
                Geometry::Torus => torus_nodes(grid.n),
                _ => line_nodes(grid.n, grid.half_width),
            };
            let (f, base): (Box<dyn Fn(f64) -> f64>, f64) = match preset {
                Preset::Case1 => (Box::new(case1), 0.0),
                Preset::Case2 => (Box::new(case2), 0.0),
                Preset::Case3 => (Box::new(case3), 0.0),
                Preset::Flat(c) => {
                    let c = *c;
                    (Box::new(move |_| c), if geometry == Geometry::Torus { 0.0 } else { c })
                }
                Preset::Cosine { amplitude, mode } => {
                    let (a, m) = (*amplitude, *mode as f64);
                    (Box::new(move |t: f64| a * (m * t).cos()), 0.0)
                }
                Preset::Formula(g) => (Box::new(*g), 0.0),
                Preset::Table(_) => unreachable!(),
            };
            let v = x.iter().map(|&t| f(t)).collect();
            (x, v, base)
        }
    };
    GraphState::from_parts(nodes, values, 0.0, geometry, baseline, grid.decay_tol)
}

impl GraphState {
    fn from_parts(
        nodes: Vec<f64>,
        values: Vec<f64>,
        time: f64,
        geometry: Geometry,
        baseline: f64,
        decay_tol: f64,
    ) -> Result<GraphState> {
        let n = nodes.len();
        if n < 8 {
            return Err(Error::GridTooSmall(n));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interface values".into()));
        }
        if geometry != Geometry::Torus {
            let ends = [values[0], values[1], values[n - 2], values[n - 1]];
            let worst = ends.iter().map(|v| (v - baseline).abs()).fold(0.0, f64::max);
            if worst >= decay_tol {
                return Err(Error::DecayViolated(worst));
            }
        }
        let spline = match geometry {
            Geometry::Torus => SplineRep::build(&nodes, &values, BoundaryMode::Periodic { period: 2.0 * PI })?,
            _ => {
                let shifted: Vec<f64> = values.iter().map(|v| v - baseline).collect();
                SplineRep::build(&nodes, &shifted, BoundaryMode::NaturalZeroExtension)?
            }
        };
        Ok(GraphState { nodes, values, time, spline, geometry, baseline })
    }

    /// Same grid and far field, new values. The decay check is not repeated.
    pub fn with_values(&self, values: Vec<f64>, time: f64) -> Result<GraphState> {
        GraphState::from_parts(self.nodes.clone(), values, time, self.geometry, self.baseline, f64::INFINITY)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn spline(&self) -> &SplineRep {
        &self.spline
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn baseline(&self) -> f64 {
        self.baseline
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    /// f, f', f'' anywhere (baseline outside the span on the line).
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let mut d = self.spline.eval_with_derivs(x);
        d[0] += self.baseline;
        d
    }

    /// f' at every node.
    pub fn slopes(&self) -> Vec<f64> {
        self.nodes.iter().map(|&x| self.spline.deriv(x)).collect()
    }

    pub fn min_gap(&self, h2: f64) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min).min(self.baseline) + h2
    }

    /// Gap and strip-amplitude checks.
    pub fn check_admissible(&self, params: &PhysicalParams) -> Result<()> {
        let gap = self.min_gap(params.h2());
        if !(gap > 0.0) {
            return Err(Error::GapCollapse(gap));
        }
        if params.geometry() == Geometry::Strip {
            let sup = self.values.iter().map(|v| v.abs()).fold(self.baseline.abs(), f64::max);
            if !(sup < FRAC_PI_2) {
                return Err(Error::StripAmplitude(sup));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub sup_norm: f64,
    pub slope_sup_norm: f64,
    pub l2_norm: f64,
    pub min_gap: f64,
    pub dh_sup: f64,
    pub d_sup: Option<f64>,
    pub rayleigh_taylor_stable: bool,
}

/// Grid-level norms and distance quantities; sups run over node pairs.
pub fn diagnostics(state: &GraphState, params: &PhysicalParams) -> Result<DiagnosticsRecord> {
    let h2 = params.h2();
    let f = state.values();
    let x = state.nodes();
    let n = f.len();
    let min_gap = state.min_gap(h2);
    if !(min_gap > 0.0) {
        return Err(Error::GapCollapse(min_gap));
    }
    let sup_norm = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let slope_sup_norm = state.slopes().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let h = state.spacing();
    let sq: f64 = f.iter().map(|v| v * v).sum();
    let l2 = match state.geometry() {
        Geometry::Torus => h * sq,
        _ => h * (sq - 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1])),
    };
    let mut dh_sup: f64 = 0.0;
    let mut d_sup: f64 = 0.0;
    for i in 0..n {
        let g = f[i] + h2;
        for j in 0..n {
            let u = x[i] - x[j];
            let dh = match state.geometry() {
                Geometry::Plane => 1.0 / (u * u + g * g),
                Geometry::Torus => 1.0 / crate::kernels::cosh_minus_cos(g, u),
                Geometry::Strip => 1.0 / crate::kernels::cosh_minus_cos(u, g),
            };
            dh_sup = dh_sup.max(dh);
            if state.geometry() == Geometry::Strip {
                d_sup = d_sup.max(1.0 / crate::kernels::cosh_plus_cos(u, f[i] + f[j]));
            }
        }
    }
    Ok(DiagnosticsRecord {
        time: state.time(),
        sup_norm,
        slope_sup_norm,
        l2_norm: l2.max(0.0).sqrt(),
        min_gap,
        dh_sup,
        d_sup: (state.geometry() == Geometry::Strip).then_some(d_sup),
        rayleigh_taylor_stable: params.is_stable(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contrast_and_validation() {
        let raw = RawParams { kappa1: 1.0, kappa2: 1.0, rho_jump: 4.0 * PI, h2: FRAC_PI_2, geometry: Geometry::Torus };
        let p = validate_params(&raw).unwrap();
        assert_eq!(p.k(), 0.0);
        assert!(p.is_stable());
        let p = PhysicalParams::with_contrast(-999.0 / 1001.0, 4.0 * PI, FRAC_PI_2, Geometry::Torus).unwrap();
        assert!((p.k() + 999.0 / 1001.0).abs() < 1e-15);
        assert!((p.kappa2() - 1000.0).abs() < 1e-9);
        let bad = RawParams { kappa2: -1.0, ..raw };
        assert!(matches!(validate_params(&bad), Err(Error::NonPositivePermeability { .. })));
        let strip = RawParams { geometry: Geometry::Strip, ..raw };
        assert_eq!(validate_params(&strip), Err(Error::StripDepthOutOfRange(FRAC_PI_2)));
        let unstable = validate_params(&RawParams { rho_jump: -1.0, ..raw }).unwrap();
        assert!(!unstable.is_stable());
    }

    #[test]
    fn presets() {
        let g = build_initial_graph(&Preset::Case1, &GridSpec::new(120), Geometry::Torus).unwrap();
        let mid = g.nodes().iter().position(|x| *x == 0.0).unwrap();
        assert_eq!(g.values()[mid], -(FRAC_PI_2 - 1e-6));
        let flat = build_initial_graph(&Preset::Flat(0.0), &GridSpec::new(16), Geometry::Plane).unwrap();
        assert!(flat.values().iter().all(|v| *v == 0.0));
        let c3 = build_initial_graph(&Preset::Case3, &GridSpec::new(120), Geometry::Torus).unwrap();
        let want = -2.0 * (FRAC_PI_2 - 1e-6) * (-(2.0f64.powi(12))).exp() + 1.0;
        assert_eq!(c3.values()[mid], want);
        let no_flag = GridSpec { periodize: false, ..GridSpec::new(120) };
        assert!(matches!(
            build_initial_graph(&Preset::Case1, &no_flag, Geometry::Torus),
            Err(Error::PresetDomainMismatch(_))
        ));
        let rows = vec![(0.0, 0.0), (2.0, 0.0), (1.0, 0.0), (3.0, 0.0), (4.0, 0.0), (5.0, 0.0), (6.0, 0.0), (7.0, 0.0)];
        assert_eq!(build_initial_graph(&Preset::Table(rows), &GridSpec::new(8), Geometry::Plane), Err(Error::TableNotMonotone));
    }

    #[test]
    fn diagnostics_of_flat_and_case1() {
        let p = PhysicalParams::with_contrast(0.0, 4.0 * PI, FRAC_PI_2, Geometry::Plane).unwrap();
        let g = build_initial_graph(&Preset::Flat(0.0), &GridSpec::new(16), Geometry::Plane).unwrap();
        let d = diagnostics(&g, &p).unwrap();
        assert_eq!(d.min_gap, FRAC_PI_2);
        assert_eq!(d.sup_norm, 0.0);
        assert_eq!(d.l2_norm, 0.0);
        assert!((d.dh_sup - 4.0 / (PI * PI)).abs() < 1e-15);

        let p = PhysicalParams::with_contrast(0.0, 4.0 * PI, FRAC_PI_2, Geometry::Torus).unwrap();
        let g = build_initial_graph(&Preset::Case1, &GridSpec::new(120), Geometry::Torus).unwrap();
        let d = diagnostics(&g, &p).unwrap();
        assert!((d.min_gap - 1e-6).abs() < 1e-15);
        assert_eq!(diagnostics(&g, &p).unwrap(), d);
    }

    #[test]
    fn flat_sup_norm_is_exact() {
        for c in [0.3, -0.7, 1.25] {
            let p = PhysicalParams::with_contrast(0.2, 1.0, FRAC_PI_2, Geometry::Plane).unwrap();
            let g = build_initial_graph(&Preset::Flat(c), &GridSpec::new(32), Geometry::Plane).unwrap();
            assert_eq!(diagnostics(&g, &p).unwrap().sup_norm, c.abs());
        }
    }
}
