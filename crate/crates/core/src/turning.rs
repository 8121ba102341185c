//! The turning functional `d/dalpha v1(0)` for explicit odd curves.
//!
//! A curve with `z1'(0) = 0`, `z1' > 0` elsewhere and `z2'(0) > 0` has a
//! vertical tangent at the origin; when `d/dalpha v1(0) < 0` the tangent
//! tilts past the vertical and the interface stops being a graph. The
//! functional splits into `i1`, from the interface vorticity, and `i2`,
//! from the vorticity carried by the permeability jump. Both are trapezoid
//! sums on fixed windows, with an error ledger for the mesh, the
//! window and the truncation.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::model::{Geometry, PhysicalParams};
use crate::parallel::try_map;
use crate::quadrature::{integrate_panel, CompensatedSum, QuadratureConfig};
use crate::vorticity::{delta_threshold, g_kernel, linear_convolve, GGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ZT,
    ZR,
    ZTNE,
    ZRNE,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ZT => "zT",
            Family::ZR => "zR",
            Family::ZTNE => "zTNE",
            Family::ZRNE => "zRNE",
            Family::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        match s {
            "zT" => Ok(Family::ZT),
            "zR" => Ok(Family::ZR),
            "zTNE" => Ok(Family::ZTNE),
            "zRNE" => Ok(Family::ZRNE),
            "custom" => Ok(Family::Custom),
            _ => Err(Error::InvalidParameter(format!("unknown curve family `{s}`"))),
        }
    }

    /// The two numerical-evidence curves, for which the ledger uses the
    /// fixed allocations.
    fn allocated_ledger(self) -> bool {
        matches!(self, Family::ZTNE | Family::ZRNE)
    }
}

/// `[z1, z2, z1', z2']` at alpha.
pub type CurveFn = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

#[derive(Clone)]
pub struct TurningCurve {
    family: Family,
    a: f64,
    b: f64,
    h2: f64,
    delta_exp: f64,
    periodic: bool,
    custom: Option<CurveFn>,
    /// z2 vanishes for |alpha| >= support.
    support: f64,
    /// Lower end of the first trapezoid window.
    window_lo: f64,
    /// Truncation of the outer integral of `i2` on the line.
    l2: f64,
}

impl std::fmt::Debug for TurningCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TurningCurve")
            .field("family", &self.family)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("h2", &self.h2)
            .field("delta_exp", &self.delta_exp)
            .field("periodic", &self.periodic)
            .field("support", &self.support)
            .finish()
    }
}

fn violated(msg: impl Into<String>) -> Error {
    Error::ConstraintViolated(msg.into())
}

/// Builds one of the named families. `a`, `b` are used by zT and zR,
/// `delta_exp` by zR; zTNE and zRNE need h2 = pi/2.
pub fn make_curve(family: Family, a: f64, b: f64, h2: f64, delta_exp: f64) -> Result<TurningCurve> {
    if !(h2.is_finite() && h2 > 0.0) {
        return Err(violated(format!("h2 must be positive, got {h2}")));
    }
    match family {
        Family::ZT | Family::ZR => {
            if !(b > 2.0 && b <= a && a.is_finite()) {
                return Err(violated(format!("need 2 < b <= a, got a={a}, b={b}")));
            }
            if family == Family::ZT && !(h2 > 1.0) {
                return Err(violated(format!("zT needs h2 > 1, got {h2}")));
            }
            if family == Family::ZR {
                if !(delta_exp > 0.0 && delta_exp < 0.25) {
                    return Err(violated(format!("zR needs 0 < delta < 1/4, got {delta_exp}")));
                }
                if !(h2 - h2.powf(delta_exp) > 1.0) {
                    return Err(violated(format!("zR needs 1 < h2 - h2^delta, got {}", h2 - h2.powf(delta_exp))));
                }
            }
        }
        Family::ZTNE | Family::ZRNE => {
            if (h2 - FRAC_PI_2).abs() > 1e-12 {
                return Err(violated(format!("{} is defined for h2 = pi/2, got {h2}", family.name())));
            }
        }
        Family::Custom => return Err(violated("custom curves are built with TurningCurve::custom")),
    }
    let periodic = matches!(family, Family::ZT | Family::ZTNE);
    let support = match family {
        Family::ZT | Family::ZTNE => PI,
        Family::ZR => PI * (1.0 - 1.0 / b),
        _ => PI,
    };
    let curve = TurningCurve { family, a, b, h2, delta_exp, periodic, custom: None, support, window_lo: 0.1, l2: 2.0 * PI };
    curve.verify()?;
    Ok(curve)
}

impl TurningCurve {
    /// A user curve. `support` is where z2 stops (z2 = 0 beyond it on the
    /// line; on the torus it should be pi).
    pub fn custom(f: CurveFn, periodic: bool, h2: f64, support: f64) -> Result<TurningCurve> {
        if !(support > 0.0 && support.is_finite()) || (periodic && support > PI) {
            return Err(violated(format!("bad support {support}")));
        }
        let curve = TurningCurve {
            family: Family::Custom,
            a: 0.0,
            b: 0.0,
            h2,
            delta_exp: 0.0,
            periodic,
            custom: Some(f),
            support,
            window_lo: 0.1,
            l2: 2.0 * PI,
        };
        curve.verify()?;
        Ok(curve)
    }

    /// The same curve with z2 multiplied by `scale`, placed above a jump at
    /// depth `h2`. Used to fit the named shapes into the strip.
    pub fn rescaled(&self, scale: f64, h2: f64) -> Result<TurningCurve> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(violated(format!("scale must be non-negative, got {scale}")));
        }
        let base = self.clone();
        let f: CurveFn = Arc::new(move |a| {
            let mut e = base.eval(a);
            e[1] *= scale;
            e[3] *= scale;
            e
        });
        let mut c = TurningCurve::custom(f, self.periodic, h2, self.support)?;
        c.window_lo = self.window_lo;
        c.l2 = self.l2;
        Ok(c)
    }

    pub fn with_window(mut self, lo: f64) -> Result<TurningCurve> {
        if !(lo > 0.0 && lo < self.support) {
            return Err(violated(format!("window start {lo} outside (0, {})", self.support)));
        }
        self.window_lo = lo;
        Ok(self)
    }

    pub fn with_l2(mut self, l2: f64) -> Result<TurningCurve> {
        if !(l2 > self.support) {
            return Err(violated(format!("L2={l2} must exceed the support {}", self.support)));
        }
        self.l2 = l2;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn h2(&self) -> f64 {
        self.h2
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
    pub fn support(&self) -> f64 {
        self.support
    }
    pub fn window_lo(&self) -> f64 {
        self.window_lo
    }
    pub fn l2(&self) -> f64 {
        self.l2
    }

    fn verify(&self) -> Result<()> {
        let e0 = self.eval(0.0);
        if e0[2].abs() > 1e-14 || e0[0].abs() > 1e-14 || e0[1].abs() > 1e-14 {
            return Err(violated("need z(0) = 0 and z1'(0) = 0"));
        }
        // A custom curve may be identically flat; the functional is then 0.
        let flat_ok = self.family == Family::Custom && e0[3] == 0.0;
        if !(e0[3] > 0.0 || flat_ok) {
            return Err(violated(format!("need z2'(0) > 0, got {}", e0[3])));
        }
        let span = if self.periodic { PI } else { self.support + 2.0 };
        let n = 4000;
        for k in 1..=n {
            let x = span * k as f64 / n as f64;
            let p = self.eval(x);
            let m = self.eval(-x);
            let scale = 1.0 + p[0].abs() + p[1].abs();
            if (p[0] + m[0]).abs() > 1e-12 * scale || (p[1] + m[1]).abs() > 1e-12 * scale {
                return Err(violated(format!("curve is not odd at alpha={x}")));
            }
            if !(p[2] > 0.0) {
                return Err(violated(format!("need z1' > 0 away from 0, fails at alpha={x}")));
            }
            if !(self.h2 + p[1] > 0.0 && self.h2 + m[1] > 0.0) {
                return Err(violated(format!("curve meets the jump line near alpha={x}")));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(violated(format!("non-finite curve value at alpha={x}")));
            }
        }
        Ok(())
    }

    /// `[z1, z2, z1', z2']`.
    pub fn eval(&self, alpha: f64) -> [f64; 4] {
        match self.family {
            Family::Custom => (self.custom.as_ref().expect("custom curve without evaluator"))(alpha),
            Family::ZT => {
                let (s, c) = alpha.sin_cos();
                let (z2, d2) = self.piecewise(alpha, self.h2 / 2.0);
                [alpha - s, z2, 1.0 - c, d2]
            }
            Family::ZR => {
                let (s, c) = alpha.sin_cos();
                let e = (-alpha * alpha).exp();
                let (z2, d2) = self.piecewise(alpha, self.h2.powf(self.delta_exp));
                [alpha - s * e, z2, 1.0 - (c - 2.0 * alpha * s) * e, d2]
            }
            Family::ZTNE | Family::ZRNE => {
                let (s, c) = alpha.sin_cos();
                let (s3, c3) = (3.0 * alpha).sin_cos();
                let ep = (-(alpha + 2.0) * (alpha + 2.0)).exp();
                let em = (-(alpha - 2.0) * (alpha - 2.0)).exp();
                let bump = ep + em;
                let dbump = -2.0 * (alpha + 2.0) * ep - 2.0 * (alpha - 2.0) * em;
                let mut z2 = s3 / 3.0 - s * bump;
                let mut d2 = c3 - c * bump - s * dbump;
                if self.family == Family::ZTNE {
                    [alpha - s, z2, 1.0 - c, d2]
                } else {
                    if alpha.abs() >= PI {
                        z2 = 0.0;
                        d2 = 0.0;
                    }
                    let e = (-alpha * alpha / 100.0).exp();
                    [alpha - s * e, z2, 1.0 - (c - alpha * s / 50.0) * e, d2]
                }
            }
        }
    }

    /// z2 and z2' of the five-piece profile with well depth `depth`.
    fn piecewise(&self, alpha: f64, depth: f64) -> (f64, f64) {
        let sign = if alpha < 0.0 { -1.0 } else { 1.0 };
        let x = alpha.abs();
        let (a, b) = (self.a, self.b);
        let pa = PI / a;
        let pb = PI / b;
        let slope = -depth / (FRAC_PI_2 - pb);
        let (v, d) = if x <= pa {
            ((a * x).sin() / a, (a * x).cos())
        } else if x < pb {
            let w = PI / (pa - pb);
            let arg = w * (x - pa);
            (arg.sin() / b, w * arg.cos() / b)
        } else if x < FRAC_PI_2 {
            (slope * (x - pb), slope)
        } else if x < PI * (1.0 - 1.0 / b) {
            (-slope * (x - PI + pb), -slope)
        } else {
            (0.0, 0.0)
        };
        (sign * v, d)
    }

    /// The first-integral density for `geometry`, zero at the origin.
    pub fn density(&self, geometry: Geometry, beta: f64) -> f64 {
        if beta == 0.0 {
            return 0.0;
        }
        match geometry {
            Geometry::Torus => self.torus_density(beta),
            Geometry::Plane => self.plane_density(beta),
            Geometry::Strip => self.strip_density(beta),
        }
    }

    /// Trapezoid integral of the density over (lo, hi), without the factor
    /// z2'(0). The pieces `I_a`, `I_b` of the existence argument are windows
    /// of this.
    pub fn window_integral(&self, geometry: Geometry, lo: f64, hi: f64, dx: f64) -> Result<f64> {
        trapezoid(|b| self.density(geometry, b), lo, hi, intervals(lo, hi, dx))
    }

    /// Integrand of the first turning integral on the torus, without the
    /// factor z2'(0).
    pub fn torus_density(&self, beta: f64) -> f64 {
        let [z1, z2, d1, _] = self.eval(beta);
        let den = crate::kernels::cosh_minus_cos(z2, z1);
        d1 * z1.sin() * z2.sinh() / (den * den)
    }

    /// Same on the line.
    pub fn plane_density(&self, beta: f64) -> f64 {
        let [z1, z2, d1, _] = self.eval(beta);
        let r = z1 * z1 + z2 * z2;
        4.0 * d1 * z1 * z2 / (r * r)
    }

    /// Same in the strip (the two kernels of the finite-depth display).
    pub fn strip_density(&self, beta: f64) -> f64 {
        let [z1, z2, d1, _] = self.eval(beta);
        let m = crate::kernels::cosh_minus_cos(z1, z2);
        let p = crate::kernels::cosh_plus_cos(z1, z2);
        let common = d1 * z1.sinh() * z2.sin();
        2.0 * (common / (m * m) + common / (p * p))
    }
}

/// Composite trapezoid rule with `n` intervals, compensated and summed in a
/// fixed order.
pub fn trapezoid<F: Fn(f64) -> f64 + Sync>(f: F, lo: f64, hi: f64, n: usize) -> Result<f64> {
    if n == 0 || !(hi > lo) {
        return Err(Error::InvalidParameter(format!("trapezoid needs lo < hi and n >= 1 ({lo}, {hi}, {n})")));
    }
    const CHUNK: usize = 1 << 16;
    let h = (hi - lo) / n as f64;
    let chunks = n.div_ceil(CHUNK);
    let parts = try_map(chunks, |c| {
        let mut s = CompensatedSum::default();
        let start = c * CHUNK;
        let end = ((c + 1) * CHUNK).min(n);
        for i in start..end {
            s.add(f(lo + i as f64 * h));
        }
        Ok(s.value())
    })?;
    let mut s = CompensatedSum::default();
    for p in parts {
        s.add(p);
    }
    s.add(0.5 * (f(hi) - f(lo)));
    let v = h * s.value();
    if !v.is_finite() {
        return Err(Error::NonFinite("trapezoid sum".into()));
    }
    Ok(v)
}

fn intervals(lo: f64, hi: f64, dx: f64) -> usize {
    (((hi - lo) / dx).round() as usize).max(1)
}

/// max |f| on n + 1 equispaced samples.
fn sampled_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n).map(|i| f(lo + (hi - lo) * i as f64 / n as f64).abs()).fold(0.0, f64::max)
}

/// max |f''| by central second differences on n + 1 samples.
fn sampled_second_derivative<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let v: Vec<f64> = (0..=n).map(|i| f(lo + h * i as f64)).collect();
    v.windows(3).map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (h * h)).abs()).fold(0.0, f64::max)
}

/// Error allocations, split as in section 6: `e1_*` belong to `i1`, `e2_*`
/// to `i2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorLedger {
    /// The neglected window (0, lo) of the first integral.
    pub e1_pv: f64,
    /// Trapezoid error of the first integral.
    pub e1_i: f64,
    /// End panel next to the support of z2 (line only).
    pub e1_z2: f64,
    /// Trapezoid error of the outer second integral.
    pub e2_i: f64,
    /// Error in the sampled omega2, propagated to `i2`.
    pub e2_w: f64,
    /// Truncation of the outer second integral.
    pub e2_r: f64,
}

impl ErrorLedger {
    pub fn total_e1(&self) -> f64 {
        self.e1_pv + self.e1_i + self.e1_z2
    }
    pub fn total_e2(&self) -> f64 {
        self.e2_i + self.e2_w + self.e2_r
    }

    /// Defining bound of each component.
    pub fn formulas(geometry: Geometry, allocated: bool) -> [(&'static str, &'static str); 6] {
        let pv = if allocated { "allocation 1e-3" } else { "lo * max|I1 density| on (0, lo)" };
        let i1 = if allocated { "dx^2 (pi - 0.1) / 6 * 1e5" } else { "(hi - lo) dx^2 / 12 * max|I1 density''|" };
        let i2 = if allocated { "dxt^2 / 4 * 50" } else { "prefactor * (hi - lo) dxt^2 / 12 * max|outer''|" };
        let z2 = match geometry {
            Geometry::Torus => "0",
            _ if allocated => "dx * 0.2 * 4 pi^2",
            _ => "dx * max|I1 density| near the support",
        };
        let r = match geometry {
            Geometry::Torus => "0",
            Geometry::Plane => "z2'(0) C(L2) / pi * int_L2^inf beta^2/(beta^2+h2^2)^2",
            Geometry::Strip => "z2'(0) / 2 pi * sup|omega2| * 8 exp(-L)",
        };
        [
            ("e1_pv", pv),
            ("e1_i", i1),
            ("e1_z2", z2),
            ("e2_i", i2),
            ("e2_w", "prefactor * 2 * |K| width dxt^2 / 12 * max|inner''| * int|outer kernel|"),
            ("e2_r", r),
        ]
    }
}

pub const FLOATING_POINT_CAVEAT: &str =
    "certified_negative is evaluated in floating point; rounding errors are not enclosed";

#[derive(Debug, Clone, PartialEq)]
pub struct TurningReport {
    pub geometry: Geometry,
    pub family: Family,
    pub k: f64,
    pub h2: f64,
    pub dx: f64,
    pub dx_tilde: f64,
    pub i1: f64,
    pub i2: f64,
    pub ledger: ErrorLedger,
    /// The a priori bound on |omega2| stated for the zT family.
    pub omega2_bound: Option<f64>,
    pub certified_negative: bool,
}

fn certify(i1: f64, i2: f64, l: &ErrorLedger) -> bool {
    i1 + i2.abs() + l.total_e1() + l.total_e2() < 0.0
}

impl TurningReport {
    fn new(base: &Base, k: f64, i2: f64, e2: [f64; 3], omega2_bound: Option<f64>) -> TurningReport {
        let ledger = ErrorLedger { e1_pv: base.e1[0], e1_i: base.e1[1], e1_z2: base.e1[2], e2_i: e2[0], e2_w: e2[1], e2_r: e2[2] };
        TurningReport {
            geometry: base.geometry,
            family: base.family,
            k,
            h2: base.h2,
            dx: base.dx,
            dx_tilde: base.dxt,
            i1: base.i1,
            i2,
            certified_negative: certify(base.i1, i2, &ledger),
            ledger,
            omega2_bound,
        }
    }

    /// The functional itself.
    pub fn value(&self) -> f64 {
        self.i1 + self.i2
    }

    /// Flat key=value block.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let geom = match self.geometry {
            Geometry::Plane => "plane",
            Geometry::Torus => "torus",
            Geometry::Strip => "strip",
        };
        let l = &self.ledger;
        let _ = writeln!(s, "geometry={geom}");
        let _ = writeln!(s, "family={}", self.family.name());
        for (k, v) in [
            ("K", self.k),
            ("h2", self.h2),
            ("dx", self.dx),
            ("dx_tilde", self.dx_tilde),
            ("i1", self.i1),
            ("i2", self.i2),
            ("e1_pv", l.e1_pv),
            ("e1_i", l.e1_i),
            ("e1_z2", l.e1_z2),
            ("e2_i", l.e2_i),
            ("e2_w", l.e2_w),
            ("e2_r", l.e2_r),
            ("total_e1", l.total_e1()),
            ("total_e2", l.total_e2()),
        ] {
            let _ = writeln!(s, "{k}={v:.16e}");
        }
        if let Some(b) = self.omega2_bound {
            let _ = writeln!(s, "omega2_bound={b:.16e}");
        }
        let _ = writeln!(s, "certified_negative={}", self.certified_negative);
        let _ = writeln!(s, "# {FLOATING_POINT_CAVEAT}");
        s
    }

    /// Inverse of `to_kv`. The verdict is recomputed and must agree.
    pub fn from_kv(text: &str) -> Result<TurningReport> {
        let mut map = std::collections::HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("no `=` in `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| map.get(k).ok_or_else(|| Error::MissingRequired(k.into()));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::TypeMismatch { key: k.into(), value: map[k].clone() })
        };
        let geometry = match get("geometry")?.as_str() {
            "plane" => Geometry::Plane,
            "torus" => Geometry::Torus,
            "strip" => Geometry::Strip,
            other => return Err(Error::TypeMismatch { key: "geometry".into(), value: other.into() }),
        };
        let ledger = ErrorLedger {
            e1_pv: num("e1_pv")?,
            e1_i: num("e1_i")?,
            e1_z2: num("e1_z2")?,
            e2_i: num("e2_i")?,
            e2_w: num("e2_w")?,
            e2_r: num("e2_r")?,
        };
        let (i1, i2) = (num("i1")?, num("i2")?);
        let certified_negative = certify(i1, i2, &ledger);
        let stated = get("certified_negative")?;
        if stated != &certified_negative.to_string() {
            return Err(Error::Parse(format!("certified_negative={stated} disagrees with the fields")));
        }
        Ok(TurningReport {
            geometry,
            family: Family::parse(get("family")?)?,
            k: num("K")?,
            h2: num("h2")?,
            dx: num("dx")?,
            dx_tilde: num("dx_tilde")?,
            i1,
            i2,
            ledger,
            omega2_bound: if map.contains_key("omega2_bound") { Some(num("omega2_bound")?) } else { None },
            certified_negative,
        })
    }
}

/// The mesh-dependent pieces that do not involve K.
#[derive(Debug, Clone)]
struct Base {
    geometry: Geometry,
    family: Family,
    h2: f64,
    dx: f64,
    dxt: f64,
    dz2_0: f64,
    i1: f64,
    e1: [f64; 3],
}

/// omega2 for K = 1 on the outer grid, plus the parts of the `i2` ledger
/// that scale with |K|.
#[derive(Debug, Clone)]
struct UnitSecond {
    i2: f64,
    e2: [f64; 3],
}

/// Evaluates the functional for one curve and mesh at any number of
/// contrasts; `i1` and everything linear in K are computed once.
pub struct TurningEvaluator<'c> {
    curve: &'c TurningCurve,
    geometry: Geometry,
    cfg: QuadratureConfig,
    base: OnceLock<Base>,
    unit: OnceLock<UnitSecond>,
    strip_source: OnceLock<StripSource>,
}

impl<'c> TurningEvaluator<'c> {
    pub fn new(curve: &'c TurningCurve, geometry: Geometry, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        match geometry {
            Geometry::Torus if !curve.periodic => {
                return Err(Error::InvalidParameter("the periodic functional needs a periodic curve".into()))
            }
            Geometry::Plane | Geometry::Strip if curve.periodic => {
                return Err(Error::InvalidParameter("the line functionals need a curve flat at infinity".into()))
            }
            _ => {}
        }
        if geometry == Geometry::Strip {
            let h2 = curve.h2;
            if !(h2 > 0.0 && h2 < FRAC_PI_2) {
                return Err(Error::DepthOutOfRange(h2));
            }
            let span = curve.support + 2.0;
            let sup = sampled_max(|a| curve.eval(a)[1], -span, span, 20000);
            if !(sup < FRAC_PI_2) {
                return Err(Error::StripAmplitude(sup));
            }
        }
        Ok(TurningEvaluator {
            curve,
            geometry,
            cfg: *cfg,
            base: OnceLock::new(),
            unit: OnceLock::new(),
            strip_source: OnceLock::new(),
        })
    }

    fn check_params(&self, params: &PhysicalParams) -> Result<()> {
        if params.geometry() != self.geometry {
            return Err(Error::InvalidParameter(format!(
                "parameters are for {:?}, evaluator for {:?}",
                params.geometry(),
                self.geometry
            )));
        }
        if (params.h2() - self.curve.h2).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("h2 {} differs from the curve's {}", params.h2(), self.curve.h2)));
        }
        Ok(())
    }

    fn base(&self) -> Result<&Base> {
        if let Some(b) = self.base.get() {
            return Ok(b);
        }
        let b = self.compute_base()?;
        Ok(self.base.get_or_init(|| b))
    }

    /// `i1` (with its factor z2'(0)) and its ledger.
    pub fn i1(&self) -> Result<(f64, [f64; 3])> {
        let b = self.base()?;
        Ok((b.i1, b.e1))
    }

    fn compute_base(&self) -> Result<Base> {
        let c = self.curve;
        let dx = self.cfg.trap_dx;
        let dz2_0 = c.eval(0.0)[3];
        let lo = c.window_lo;
        let density = |x: f64| -> f64 {
            match self.geometry {
                Geometry::Torus => c.torus_density(x),
                Geometry::Plane => c.plane_density(x),
                Geometry::Strip => c.strip_density(x),
            }
        };
        let hi = match self.geometry {
            Geometry::Torus => PI,
            _ => c.support - dx,
        };
        let i1 = dz2_0 * trapezoid(density, lo, hi, intervals(lo, hi, dx))?;
        let allocated = c.family.allocated_ledger();
        let scaled = |x: f64| dz2_0 * density(x);
        let e1_pv = if allocated { 1e-3 } else { lo * sampled_max(scaled, 1e-9, lo, 20000) };
        let e1_i = if allocated {
            dx * dx * (PI - 0.1) / 6.0 * 1e5
        } else {
            (hi - lo) * dx * dx / 12.0 * sampled_second_derivative(scaled, lo, hi, 200_000)
        };
        let e1_z2 = match self.geometry {
            Geometry::Torus => 0.0,
            _ if allocated => dx * 0.2 * 4.0 * PI * PI,
            _ => dx * sampled_max(scaled, c.support - 0.01, c.support, 1000),
        };
        Ok(Base {
            geometry: self.geometry,
            family: c.family,
            h2: c.h2,
            dx,
            dxt: self.cfg.trap_dxt,
            dz2_0,
            i1,
            e1: [e1_pv, e1_i, e1_z2],
        })
    }

    pub fn report(&self, params: &PhysicalParams) -> Result<TurningReport> {
        self.check_params(params)?;
        let base = self.base()?.clone();
        let k = params.k();
        match self.geometry {
            Geometry::Torus | Geometry::Plane => {
                let unit = match self.unit.get() {
                    Some(u) => u,
                    None => {
                        let u = self.unit_second(&base)?;
                        self.unit.get_or_init(|| u)
                    }
                };
                let e2 = [unit.e2[0] * k.abs(), unit.e2[1] * k.abs(), unit.e2[2] * k.abs()];
                let bound = (self.curve.family == Family::ZT)
                    .then(|| 4.0 * PI / ((self.curve.h2 / 2.0).cosh() - 1.0));
                Ok(TurningReport::new(&base, k, k * unit.i2, e2, bound))
            }
            Geometry::Strip => {
                let (i2, e2) = self.strip_second(&base, params)?;
                Ok(TurningReport::new(&base, k, i2, e2, None))
            }
        }
    }

    /// Inner trapezoid nodes over the support with their weights.
    fn inner_nodes(&self) -> (Vec<[f64; 4]>, f64) {
        let s = self.curve.support;
        let (lo, n) = if self.geometry == Geometry::Torus {
            (-PI, intervals(-PI, PI, self.cfg.trap_dxt))
        } else {
            (-s, intervals(-s, s, self.cfg.trap_dxt))
        };
        let h = 2.0 * (-lo) / n as f64;
        // The torus rule is periodic: n nodes of equal weight. On the line
        // the end nodes carry half weight.
        let count = if self.geometry == Geometry::Torus { n } else { n + 1 };
        let nodes = (0..count)
            .map(|j| {
                let mut g = lo + h * j as f64;
                if self.geometry != Geometry::Torus && (j == 0 || j == n) {
                    // z2' may jump at the support; use the interior limit.
                    g *= 1.0 - 4.0 * f64::EPSILON;
                }
                let w = if self.geometry != Geometry::Torus && (j == 0 || j == n) { 0.5 * h } else { h };
                let mut e = self.curve.eval(g);
                e[3] *= w;
                e
            })
            .collect();
        (nodes, h)
    }

    fn unit_second(&self, base: &Base) -> Result<UnitSecond> {
        let c = self.curve;
        let h2 = c.h2;
        let dxt = self.cfg.trap_dxt;
        let (inner, h_in) = self.inner_nodes();
        match self.geometry {
            Geometry::Torus => {
                // omega2(beta) = K * sum w z1' sin(beta - z1) / (cosh(h2 + z2) - cos(beta - z1))
                let pre: Vec<[f64; 4]> = inner
                    .iter()
                    .map(|e| {
                        let (s, co) = e[0].sin_cos();
                        let w = h_in * e[2];
                        [s, co, (h2 + e[1]).cosh(), w]
                    })
                    .collect();
                let omega = |beta: f64| -> f64 {
                    let (sb, cb) = beta.sin_cos();
                    let mut acc = CompensatedSum::default();
                    for p in &pre {
                        let sn = sb * p[1] - cb * p[0];
                        let cs = cb * p[1] + sb * p[0];
                        acc.add(p[3] * sn / (p[2] - cs));
                    }
                    acc.value()
                };
                let ch = h2.cosh();
                let kernel = |beta: f64| {
                    let d = ch - beta.cos();
                    (-1.0 + ch * beta.cos()) / (d * d)
                };
                let n = intervals(0.0, PI, dxt);
                let hb = PI / n as f64;
                let sums = try_map(n + 1, |i| {
                    let beta = hb * i as f64;
                    Ok(omega(beta) + omega(-beta))
                })?;
                let pref = base.dz2_0 / (4.0 * PI);
                let outer: Vec<f64> = sums.iter().enumerate().map(|(i, s)| s * kernel(hb * i as f64)).collect();
                let i2 = pref * trapezoid_samples(&outer, hb);
                let e2_i = if c.family.allocated_ledger() {
                    dxt * dxt / 4.0 * 50.0
                } else {
                    pref * PI * hb * hb / 12.0 * second_difference_max(&outer, hb)
                };
                let m2 = self.inner_second_derivative(|beta, g| {
                    let [z1, z2, d1, _] = c.eval(g);
                    d1 * (beta - z1).sin() / ((h2 + z2).cosh() - (beta - z1).cos())
                }, PI);
                let ew = 2.0 * PI * h_in * h_in / 12.0 * m2;
                let kernel_l1 = trapezoid(|b| kernel(b).abs(), 0.0, PI, 4096)?;
                Ok(UnitSecond { i2, e2: [e2_i, pref * 2.0 * ew * kernel_l1, 0.0] })
            }
            Geometry::Plane => {
                // omega2(beta) = 2K sum w (h2 + z2) z2' / ((h2 + z2)^2 + (beta - z1)^2)
                let pre: Vec<[f64; 3]> = inner
                    .iter()
                    .map(|e| {
                        let g = h2 + e[1];
                        [e[0], g * g, 2.0 * g * e[3]]
                    })
                    .collect();
                let omega = |beta: f64| -> f64 {
                    let mut acc = CompensatedSum::default();
                    for p in &pre {
                        let u = beta - p[0];
                        acc.add(p[2] / (p[1] + u * u));
                    }
                    acc.value()
                };
                let kernel = |beta: f64| {
                    let d = beta * beta + h2 * h2;
                    beta * beta / (d * d)
                };
                let l2 = c.l2;
                let n = intervals(0.0, l2, dxt);
                let hb = l2 / n as f64;
                let sums = try_map(n + 1, |i| {
                    let beta = hb * i as f64;
                    Ok(omega(beta) + omega(-beta))
                })?;
                let pref = base.dz2_0 / (2.0 * PI);
                let outer: Vec<f64> = sums.iter().enumerate().map(|(i, s)| s * kernel(hb * i as f64)).collect();
                let i2 = -pref * trapezoid_samples(&outer, hb);
                let e2_i = if c.family.allocated_ledger() {
                    dxt * dxt / 4.0 * 50.0
                } else {
                    pref * l2 * hb * hb / 12.0 * second_difference_max(&outer, hb)
                };
                let s = c.support;
                let m2 = self.inner_second_derivative(|beta, g| {
                    let [z1, z2, _, d2] = c.eval(g);
                    let gg = h2 + z2;
                    2.0 * gg * d2 / (gg * gg + (beta - z1) * (beta - z1))
                }, l2);
                let ew = 2.0 * s * h_in * h_in / 12.0 * m2;
                let kernel_l1 = tail_kernel(h2, 0.0);
                let e2_w = pref * 2.0 * ew * kernel_l1;
                // Tail of the outer integral with the bound C(beta) on omega2.
                let (zmax, dmax) = if c.family.allocated_ledger() {
                    (3.0 - h2, 2.0)
                } else {
                    (sampled_max(|a| c.eval(a)[1], -s, s, 20000), sampled_max(|a| c.eval(a)[3], -s, s, 20000))
                };
                let dist = (0..=20000)
                    .map(|j| {
                        let g = -s + 2.0 * s * j as f64 / 20000.0;
                        let [z1, z2, _, _] = c.eval(g);
                        (h2 + z2).powi(2) + (l2 - z1.abs()).powi(2)
                    })
                    .fold(f64::INFINITY, f64::min);
                let c_l2 = 4.0 * PI * (h2 + zmax) * dmax / dist;
                let e2_r = base.dz2_0 * c_l2 / PI * tail_kernel(h2, l2);
                Ok(UnitSecond { i2, e2: [e2_i, e2_w, e2_r] })
            }
            Geometry::Strip => unreachable!("the strip functional is not linear in K"),
        }
    }

    /// max over beta in [-span, span] of |d^2/dgamma^2 integrand(beta, gamma)|
    /// on the support, sampled.
    fn inner_second_derivative<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F, span: f64) -> f64 {
        let s = if self.geometry == Geometry::Torus { PI } else { self.curve.support * (1.0 - 1e-9) };
        let nb = 64;
        let ng = 8192;
        let rows = try_map(nb + 1, |i| {
            let beta = -span + 2.0 * span * i as f64 / nb as f64;
            Ok(sampled_second_derivative(|g| f(beta, g), -s, s, ng))
        })
        .unwrap_or_default();
        // Sampling misses the exact maximum; pad it.
        2.0 * rows.into_iter().fold(0.0, f64::max)
    }
}

/// Trapezoid rule over uniformly spaced samples.
fn trapezoid_samples(v: &[f64], h: f64) -> f64 {
    let mut s = CompensatedSum::default();
    for x in &v[1..v.len() - 1] {
        s.add(*x);
    }
    s.add(0.5 * (v[0] + v[v.len() - 1]));
    h * s.value()
}

fn second_difference_max(v: &[f64], h: f64) -> f64 {
    v.windows(3).map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (h * h)).abs()).fold(0.0, f64::max)
}

/// int_l^inf beta^2 / (beta^2 + c^2)^2 d beta.
fn tail_kernel(c: f64, l: f64) -> f64 {
    (FRAC_PI_2 - (l / c).atan()) / (2.0 * c) + l / (2.0 * (l * l + c * c))
}

/// Half-width and spacing of the uniform line grid for the strip.
pub const STRIP_HALF_WIDTH: f64 = 40.0;
pub const STRIP_SPACING: f64 = 1.0 / 64.0;

/// The explicit part of the strip omega2 for K = 1, on the uniform grid.
#[derive(Debug, Clone)]
struct StripSource {
    r: Vec<f64>,
    /// Sampled error bound of the inner trapezoid, per unit K.
    err: f64,
}

impl TurningEvaluator<'_> {
    fn strip_grid(&self) -> (usize, f64) {
        let half = (STRIP_HALF_WIDTH / STRIP_SPACING).round() as usize;
        (half, STRIP_SPACING)
    }

    fn strip_source(&self, amplitude: f64) -> Result<StripSource> {
        let c = self.curve;
        let h2 = c.h2;
        let (inner, h_in) = self.inner_nodes();
        let pre: Vec<[f64; 7]> = inner
            .iter()
            .map(|e| {
                let (sh, ch) = (e[0].sinh(), e[0].cosh());
                let up = h2 + e[1];
                let dn = e[1] - h2;
                [ch, sh, up.sin(), up.cos(), dn.sin(), dn.cos(), e[3]]
            })
            .collect();
        let (half, hc) = self.strip_grid();
        let r = try_map(2 * half + 1, |j| {
            let beta = (j as f64 - half as f64) * hc;
            let (sb, cb) = (beta.sinh(), beta.cosh());
            let mut acc = CompensatedSum::default();
            for p in &pre {
                let chd = cb * p[0] - sb * p[1];
                acc.add(p[6] * (p[2] / (chd - p[3]) - p[4] / (chd + p[5])));
            }
            Ok(amplitude / (2.0 * PI) * acc.value())
        })?;
        let s = c.support;
        let m2 = self.inner_second_derivative(
            |beta, g| {
                let [z1, z2, _, d2] = c.eval(g);
                let chd = (beta - z1).cosh();
                d2 * ((h2 + z2).sin() / (chd - (h2 + z2).cos()) - (z2 - h2).sin() / (chd + (z2 - h2).cos()))
            },
            STRIP_HALF_WIDTH.min(10.0),
        );
        Ok(StripSource { r, err: amplitude / (2.0 * PI) * 2.0 * s * h_in * h_in / 12.0 * m2 })
    }

    /// i2 from omega2 = R - (K / 2 pi) G * R on a grid with `stride` times
    /// the base spacing.
    fn strip_i2(&self, src: &StripSource, k: f64, dz2_0: f64, stride: usize) -> Result<(f64, f64, f64)> {
        let h2 = self.curve.h2;
        let (half, hc0) = self.strip_grid();
        let hc = hc0 * stride as f64;
        let r: Vec<f64> = src.r.iter().step_by(stride).map(|v| k * v).collect();
        let n = r.len();
        let m = (n - 1) / 2;
        debug_assert_eq!(half / stride, m);
        let grid = GGrid { spacing: hc, half_width: 80.0 };
        let g = g_kernel(h2, k, &grid)?;
        let conv = linear_convolve(&r, &g.values);
        let omega: Vec<f64> = (0..n).map(|t| r[t] - k / (2.0 * PI) * hc * conv[t + g.half]).collect();
        let (ch, c2) = (h2.cos(), (2.0 * h2).cos());
        let kernel = |beta: f64| {
            let cb = beta.cosh();
            let m1 = cb - ch;
            let p1 = cb + ch;
            (1.0 - cb * ch) / (m1 * m1) + (-cb * ch - c2) / (p1 * p1)
        };
        // omega2(-beta) at beta_t is the mirrored sample.
        let outer: Vec<f64> = (0..n).map(|t| omega[n - 1 - t] * kernel((t as f64 - m as f64) * hc)).collect();
        let pref = dz2_0 / (4.0 * PI);
        let i2 = pref * trapezoid_samples(&outer, hc);
        let sup = omega.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let e2_i = pref * 2.0 * STRIP_HALF_WIDTH * hc * hc / 12.0 * second_difference_max(&outer, hc);
        Ok((i2, e2_i, sup * g.l1_norm))
    }

    fn strip_second(&self, base: &Base, params: &PhysicalParams) -> Result<(f64, [f64; 3])> {
        let k = params.k();
        let delta = delta_threshold(self.curve.h2)?;
        if !(k.abs() < delta) {
            return Err(Error::SolvabilityViolated { k, delta });
        }
        let src = match self.strip_source.get() {
            Some(s) => s,
            None => {
                let s = self.strip_source(params.amplitude())?;
                self.strip_source.get_or_init(|| s)
            }
        };
        if k == 0.0 {
            return Ok((0.0, [0.0; 3]));
        }
        let (i2, e2_i, _) = self.strip_i2(src, k, base.dz2_0, 1)?;
        let (coarse, _, _) = self.strip_i2(src, k, base.dz2_0, 2)?;
        let h2 = self.curve.h2;
        let grid = GGrid { spacing: STRIP_SPACING, half_width: 80.0 };
        let g1 = g_kernel(h2, k, &grid)?.l1_norm;
        let pref = base.dz2_0 / (4.0 * PI);
        let (ch, c2) = (h2.cos(), (2.0 * h2).cos());
        let kernel_l1 = 2.0
            * trapezoid(
                |b: f64| {
                    let cb = b.cosh();
                    ((1.0 - cb * ch) / (cb - ch).powi(2) + (-cb * ch - c2) / (cb + ch).powi(2)).abs()
                },
                0.0,
                STRIP_HALF_WIDTH,
                65536,
            )?;
        let ew = k.abs() * src.err * (1.0 + k.abs() * g1 / (2.0 * PI));
        let e2_w = pref * ew * kernel_l1 + (i2 - coarse).abs();
        let sup = src.r.iter().map(|v| v.abs()).fold(0.0, f64::max) * k.abs() * (1.0 + k.abs() * g1 / (2.0 * PI));
        let e2_r = pref * 2.0 * sup * 8.0 * (-STRIP_HALF_WIDTH).exp();
        Ok((i2, [e2_i, e2_w, e2_r]))
    }
}

pub fn turning_functional_torus(curve: &TurningCurve, params: &PhysicalParams, cfg: &QuadratureConfig) -> Result<TurningReport> {
    TurningEvaluator::new(curve, Geometry::Torus, cfg)?.report(params)
}

pub fn turning_functional_plane(curve: &TurningCurve, params: &PhysicalParams, cfg: &QuadratureConfig) -> Result<TurningReport> {
    TurningEvaluator::new(curve, Geometry::Plane, cfg)?.report(params)
}

pub fn turning_functional_strip(curve: &TurningCurve, params: &PhysicalParams, cfg: &QuadratureConfig) -> Result<TurningReport> {
    TurningEvaluator::new(curve, Geometry::Strip, cfg)?.report(params)
}

/// The factors of the admissible-contrast bound and the bound itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KThreshold {
    pub value: f64,
    pub c_h2: f64,
    pub d1_sup: f64,
    pub d2_sup: f64,
    pub dz2_sup: f64,
    /// sup over the contrast sweep of the L1 norm of G.
    pub g_l1_sup: f64,
}

/// The constant C(h2) bounding the finite-depth `i2` kernel.
pub fn strip_kernel_constant(h2: f64) -> Result<f64> {
    let (ch, c2) = (h2.cos(), (2.0 * h2).cos());
    let f = |b: f64| {
        let cb = b.cosh();
        (cb * ch + 1.0) / (cb - ch).powi(2) + (cb * ch + c2) / (cb + ch).powi(2)
    };
    let mut s = CompensatedSum::default();
    let breaks = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 48.0];
    for w in breaks.windows(2) {
        s.add(integrate_panel(f, w[0], w[1], 1e-12)?);
    }
    Ok(2.0 * s.value() / (4.0 * PI))
}

/// Contrast below which the finite-depth curve still turns, given its
/// homogeneous first integral `i1_value` = -a^2.
pub fn k_threshold_strip(curve: &TurningCurve, h2: f64, i1_value: f64) -> Result<KThreshold> {
    if !(i1_value < 0.0) {
        return Err(Error::NonNegativeI1(i1_value));
    }
    if !(h2 > 0.0 && h2 < FRAC_PI_2) {
        return Err(Error::DepthOutOfRange(h2));
    }
    if curve.periodic {
        return Err(Error::InvalidParameter("the strip threshold needs a curve flat at infinity".into()));
    }
    let c_h2 = strip_kernel_constant(h2)?;
    let span = curve.support + 4.0;
    let ng = 801;
    let nb = 801;
    let bmax = 20.0;
    let rows = try_map(ng, |i| {
        let g = -span + 2.0 * span * i as f64 / (ng - 1) as f64;
        let [z1, z2, _, _] = curve.eval(g);
        let mut d1: f64 = 0.0;
        let mut d2: f64 = 0.0;
        for j in 0..nb {
            let b = -bmax + 2.0 * bmax * j as f64 / (nb - 1) as f64;
            let num = (0.5 * b).cosh().powi(2);
            let arg = z1 - (g - b);
            d1 = d1.max(num / (arg.cosh() - (z2 + h2).cos()));
            d2 = d2.max(num / (arg.cosh() + (z2 - h2).cos()));
        }
        // |beta| -> infinity limits.
        let e = (g - z1).exp();
        d1 = d1.max(0.5 * e).max(0.5 / e);
        d2 = d2.max(0.5 * e).max(0.5 / e);
        Ok((d1, d2))
    })?;
    let d1_sup = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let d2_sup = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let dz2_sup = sampled_max(|a| curve.eval(a)[3], -span, span, 40000);
    let delta = delta_threshold(h2)?;
    let mut g_l1_sup: f64 = 0.0;
    for j in 0..=40 {
        let k = -0.99 + 0.0495 * j as f64;
        if k.abs() < delta {
            g_l1_sup = g_l1_sup.max(g_kernel(h2, k, &GGrid::default())?.l1_norm);
        }
    }
    let dz2_0 = curve.eval(0.0)[3];
    let value = -i1_value
        / (c_h2 * 8.0 * dz2_0 * dz2_sup * (d1_sup + d2_sup) * (1.0 + g_l1_sup / (2.0 * PI).sqrt()));
    Ok(KThreshold { value, c_h2, d1_sup, d2_sup, dz2_sup, g_l1_sup })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_curve_values() {
        let zt = make_curve(Family::ZT, 5.0, 3.0, FRAC_PI_2, 0.0).unwrap();
        assert!((zt.eval(PI / 10.0)[1] - 0.2).abs() < 1e-15);
        let ne = make_curve(Family::ZTNE, 0.0, 0.0, FRAC_PI_2, 0.0).unwrap();
        assert_eq!(ne.eval(0.0)[1], 0.0);
        assert!((ne.eval(0.0)[3] - (1.0 - 2.0 * (-4.0f64).exp())).abs() < 1e-15);
        assert!(matches!(make_curve(Family::ZT, 5.0, 1.5, FRAC_PI_2, 0.0), Err(Error::ConstraintViolated(_))));
        assert!(matches!(make_curve(Family::ZTNE, 0.0, 0.0, 1.0, 0.0), Err(Error::ConstraintViolated(_))));
        assert!(matches!(make_curve(Family::ZR, 5.0, 3.0, 1.5, 0.2), Err(Error::ConstraintViolated(_))));
    }

    #[test]
    fn piecewise_profile_is_continuous() {
        let zt = make_curve(Family::ZT, 7.0, 3.0, 2.0, 0.0).unwrap();
        for x in [PI / 7.0, PI / 3.0, FRAC_PI_2, PI * (1.0 - 1.0 / 3.0)] {
            let l = zt.eval(x - 1e-12)[1];
            let r = zt.eval(x + 1e-12)[1];
            assert!((l - r).abs() < 1e-9, "jump at {x}: {l} vs {r}");
        }
        assert!((zt.eval(FRAC_PI_2)[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_compensated_and_exact_for_lines() {
        let v = trapezoid(|x| 3.0 * x + 1.0, 0.0, 2.0, 1_000_000).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
        assert!(trapezoid(|x| x, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn tail_kernel_closed_form() {
        let want = trapezoid(|b| b * b / (b * b + 2.0).powi(2), 0.0, 400.0, 4_000_000).unwrap() + 1.0 / 400.0;
        assert!((tail_kernel(2f64.sqrt(), 0.0) - want).abs() < 1e-6);
        assert!((tail_kernel(1.0, 0.0) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn report_round_trip() {
        let r = TurningReport {
            geometry: Geometry::Torus,
            family: Family::ZTNE,
            k: -1.0 / 3.0,
            h2: FRAC_PI_2,
            dx: 1e-7,
            dx_tilde: 1e-3,
            i1: -0.7,
            i2: 0.05,
            ledger: ErrorLedger { e1_pv: 1e-3, e1_i: 1e-9, e1_z2: 0.0, e2_i: 1e-5, e2_w: 1e-4, e2_r: 0.0 },
            omega2_bound: None,
            certified_negative: true,
        };
        let text = r.to_kv();
        assert!(text.contains(FLOATING_POINT_CAVEAT));
        assert_eq!(TurningReport::from_kv(&text).unwrap(), r);
        let bad = text.replace("certified_negative=true", "certified_negative=false");
        assert!(TurningReport::from_kv(&bad).is_err());
    }
}
