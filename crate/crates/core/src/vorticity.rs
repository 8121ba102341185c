//! Vorticity amplitudes: `omega1` on the interface and `omega2` on the
//! permeability jump `y = -h2`, in all three geometries.
//!
//! In the strip, `omega2` solves the second-kind equation
//! `w + (K/2pi) int w(b) s(x-b) db = R` with `s(x) = sin 2h2/(cosh x + cos 2h2)`.
//! It is inverted with the resolvent kernel `G`, which satisfies
//! `G + (K/2pi) s*G = s`, so that `w = R - (K/2pi) G*R`.

use std::f64::consts::{FRAC_PI_2, PI};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernels::{cosh_minus_cos, cosh_plus_cos};
use crate::model::{Geometry, GraphState, PhysicalParams};
use crate::parallel::try_map;
use crate::quadrature::{integrate_cached, Estimate, PanelCache, QuadratureConfig, SplineRep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Integrand carries the slope of the interface.
    Deriv,
    /// Integrated-by-parts form with the bare kernel.
    Kernel,
    /// Strip: explicit sources plus resolvent convolution.
    Resolvent,
}

/// Nodes on which `omega2` is sampled for later integration. On the torus
/// these are the graph nodes; on the line they extend past the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Carrier {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Position of graph node i in `nodes`.
    pub graph_index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GKernelSample {
    pub h2: f64,
    pub k: f64,
    pub spacing: f64,
    /// G at (j - half) * spacing.
    pub values: Vec<f64>,
    pub half: usize,
    pub l1_norm: f64,
    /// Fourier transform of G (unitary convention) at the DFT frequencies.
    pub spectrum: Vec<f64>,
    pub dzeta: f64,
}

impl GKernelSample {
    pub fn grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| (j as f64 - self.half as f64) * self.spacing).collect()
    }

    /// G at `j * stride * spacing`, zero past the sampled range.
    pub fn at(&self, j: isize, stride: usize) -> f64 {
        let idx = self.half as isize + j * stride as isize;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    pub fn l2_norm_x(&self) -> f64 {
        (self.spacing * self.values.iter().map(|g| g * g).sum::<f64>()).sqrt()
    }

    pub fn l2_norm_zeta(&self) -> f64 {
        (self.dzeta * self.spectrum.iter().map(|g| g * g).sum::<f64>()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticitySample {
    pub omega1: Vec<f64>,
    /// omega2 at the graph nodes.
    pub omega2: Vec<f64>,
    pub formulation: Formulation,
    pub carrier: Carrier,
    /// Largest estimated quadrature error over the carrier nodes.
    pub budget: f64,
    pub g_kernel: Option<GKernelSample>,
    /// Strip only: the explicit source term R on the carrier.
    pub source: Option<Vec<f64>>,
}

/// Uniform mesh for the resolvent transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GGrid {
    pub spacing: f64,
    pub half_width: f64,
}

impl Default for GGrid {
    fn default() -> Self {
        GGrid { spacing: 160.0 / 16384.0, half_width: 80.0 }
    }
}

/// Source-side data at one abscissa, shared by every target.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Src {
    pub beta: f64,
    pub f: f64,
    pub fp: f64,
    pub w2: f64,
    /// sin, cos of beta/2 (torus only).
    pub sb: f64,
    pub cb: f64,
    /// sinh, cosh of f/2.
    pub shf: f64,
    pub chf: f64,
    /// g = h2 + f, sinh(g) and sinh^2(g/2).
    pub g: f64,
    pub sh_g: f64,
    pub s2g: f64,
    /// Spline piece holding beta and the local offset in it.
    pub piece: usize,
    pub t: f64,
}

/// Position, interface values and spline location only.
pub(crate) fn src_core(graph: &GraphState, h2: f64, beta: f64) -> Src {
    let (piece, t, f, fp, g) = match graph.spline().locate(beta) {
        Some((i, t)) => {
            let c = graph.spline().piece(i);
            let rest = t * (c[1] + t * (c[2] + t * c[3]));
            let base = graph.baseline() + c[0];
            // h2 + f summed from the small end: the gap can be far below |f|.
            (i, t, base + rest, c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]), (h2 + base) + rest)
        }
        None => (usize::MAX, 0.0, graph.baseline(), 0.0, h2 + graph.baseline()),
    };
    let (sb, cb) = if graph.geometry() == Geometry::Torus { (0.5 * beta).sin_cos() } else { (0.0, 0.0) };
    Src { beta, f, fp, g, sb, cb, piece, t, ..Default::default() }
}

/// Adds what the interface self-interaction needs.
pub(crate) fn src_slope(graph: &GraphState, h2: f64, beta: f64) -> Src {
    let s = src_core(graph, h2, beta);
    let e = (0.5 * s.f).exp();
    Src { shf: 0.5 * (e - 1.0 / e), chf: 0.5 * (e + 1.0 / e), ..s }
}

/// Adds what the kernels at the jump need.
pub(crate) fn src_gap(graph: &GraphState, h2: f64, beta: f64) -> Src {
    let s = src_core(graph, h2, beta);
    let sg = (0.5 * s.g).sinh();
    let cg = (1.0 + sg * sg).sqrt();
    Src { sh_g: 2.0 * sg * cg, s2g: sg * sg, ..s }
}

/// Only the carried omega2 and the position. omega2 is `c0 f' + w`.
pub(crate) fn src_weight(graph: &GraphState, w: &SplineRep, c0: f64, beta: f64) -> Src {
    let (sb, cb) = if graph.geometry() == Geometry::Torus { (0.5 * beta).sin_cos() } else { (0.0, 0.0) };
    let w2 = if c0 == 0.0 { w.eval(beta) } else { c0 * graph.spline().deriv(beta) + w.eval(beta) };
    Src { beta, sb, cb, w2, ..Default::default() }
}

/// Limit of omega2 / f' as the interface closes on the jump, in the
/// unbounded geometries. The velocity carries omega2 as this multiple of the
/// interface slope plus an interpolated remainder, so that near contact the
/// two vorticities are discretized alike and cancel as they should when K
/// is close to 1.
pub fn contact_factor(params: &PhysicalParams) -> f64 {
    match params.geometry() {
        Geometry::Strip => 0.0,
        _ => params.amplitude() * params.k(),
    }
}

/// `values - c0 f'` at `nodes`.
pub(crate) fn contact_remainder(graph: &GraphState, nodes: &[f64], values: &[f64], c0: f64) -> Vec<f64> {
    if c0 == 0.0 {
        return values.to_vec();
    }
    nodes.iter().zip(values).map(|(&x, v)| v - c0 * graph.spline().deriv(x)).collect()
}

pub(crate) fn make_src(graph: &GraphState, h2: f64, beta: f64) -> Src {
    let s = src_gap(graph, h2, beta);
    let e = (0.5 * s.f).exp();
    Src { shf: 0.5 * (e - 1.0 / e), chf: 0.5 * (e + 1.0 / e), ..s }
}

/// `x - beta`, `f(x) - f(beta)` and `f'(x) - f'(beta)` for node `i` and a
/// source in one of the two spline pieces touching it, computed from the
/// piece polynomial without cancellation. `None` for other sources.
pub(crate) fn local_differences(graph: &GraphState, i: usize, s: &Src) -> Option<(f64, f64, f64)> {
    let sp = graph.spline();
    let np = sp.n_pieces();
    let before = if i > 0 { i - 1 } else if graph.geometry() == Geometry::Torus { np - 1 } else { usize::MAX };
    let tx = if s.piece == i {
        0.0
    } else if s.piece == before {
        sp.width(before)
    } else {
        return None;
    };
    let c = sp.piece(s.piece);
    let t = s.t;
    let u = tx - t;
    let df = u * (c[1] + c[2] * (tx + t) + c[3] * (tx * tx + tx * t + t * t));
    let dp = u * (2.0 * c[2] + 3.0 * c[3] * (tx + t));
    Some((u, df, dp))
}

/// Target-side data at one node.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Tgt {
    pub x: f64,
    pub f: f64,
    pub p: f64,
    pub q: f64,
    /// Periodic image of x on the far side of the period (torus only).
    pub x_img: Option<f64>,
    pub sx: f64,
    pub cx: f64,
    pub shf: f64,
    pub chf: f64,
    pub g: f64,
    pub sh_g: f64,
    pub s2g: f64,
}

pub(crate) fn make_tgt(graph: &GraphState, h2: f64, x: f64, f_node: f64) -> Tgt {
    let [_, p, q] = graph.eval(x);
    let g = h2 + f_node;
    let sg = (0.5 * g).sinh();
    let (sx, cx) = (0.5 * x).sin_cos();
    let x_img = (graph.geometry() == Geometry::Torus).then(|| if x < 0.0 { x + 2.0 * PI } else { x - 2.0 * PI });
    Tgt {
        x,
        f: f_node,
        p,
        q,
        x_img,
        sx,
        cx,
        shf: (0.5 * f_node).sinh(),
        chf: (0.5 * f_node).cosh(),
        g,
        sh_g: g.sinh(),
        s2g: sg * sg,
    }
}

/// x - beta, reduced to [-pi, pi] on the torus by a single exact
/// subtraction from the nearer image of x.
#[inline]
pub(crate) fn offset(t: &Tgt, s: &Src) -> f64 {
    let u = t.x - s.beta;
    match t.x_img {
        Some(xi) if u.abs() > PI => xi - s.beta,
        _ => u,
    }
}

/// sin and cos of (x - beta)/2: directly near the target, where the
/// product formula would cancel, and from cached half angles elsewhere.
#[inline]
pub(crate) fn half_angle(t: &Tgt, s: &Src) -> (f64, f64) {
    let u = offset(t, s);
    if u.abs() < NEAR {
        (0.5 * u).sin_cos()
    } else {
        (t.sx * s.cb - t.cx * s.sb, t.cx * s.cb + t.sx * s.sb)
    }
}

const NEAR: f64 = 0.25;

/// Panel breaks over the graph: one period on the torus, the node span on
/// the line.
pub(crate) fn graph_breaks(graph: &GraphState) -> Vec<f64> {
    let mut b = graph.nodes().to_vec();
    if graph.geometry() == Geometry::Torus {
        b.push(b[0] + 2.0 * PI);
    }
    b
}

pub(crate) fn graph_cache(graph: &GraphState, h2: f64) -> PanelCache<Src> {
    PanelCache::build(graph_breaks(graph), |b| make_src(graph, h2, b))
}

pub fn omega1(params: &PhysicalParams, graph: &GraphState) -> Vec<f64> {
    let a = params.amplitude();
    graph.slopes().iter().map(|p| -a * p).collect()
}

fn check_gap(params: &PhysicalParams, graph: &GraphState) -> Result<()> {
    let gap = graph.min_gap(params.h2());
    if !(gap > 0.0) {
        return Err(Error::GapCollapse(gap));
    }
    Ok(())
}

fn graph_carrier(graph: &GraphState, values: Vec<f64>) -> Carrier {
    Carrier { nodes: graph.nodes().to_vec(), values, graph_index: (0..graph.len()).collect() }
}

fn assemble(ests: Vec<Estimate>, pref: f64) -> (Vec<f64>, f64) {
    let budget = ests.iter().map(|e| pref.abs() * e.error).fold(0.0, f64::max);
    (ests.iter().map(|e| pref * e.value).collect(), budget)
}

pub fn omega2_torus(
    params: &PhysicalParams,
    graph: &GraphState,
    formulation: Formulation,
    cfg: &QuadratureConfig,
) -> Result<VorticitySample> {
    check_gap(params, graph)?;
    let h2 = params.h2();
    let pref = params.amplitude() * params.k() / (2.0 * PI);
    let n = graph.len();
    let (values, budget) = if pref == 0.0 {
        (vec![0.0; n], 0.0)
    } else {
        let cache = graph_cache(graph, h2);
        let make = |b: f64| src_gap(graph, h2, b);
        let ests = try_map(n, |i| {
            let t = make_tgt(graph, h2, graph.nodes()[i], graph.values()[i]);
            match formulation {
                // The kernel at the target's own gap integrates to zero over
                // the period; subtracting it removes the near-singular peak.
                Formulation::Kernel => integrate_cached(
                    &cache,
                    |s| {
                        let (su, cu) = half_angle(&t, s);
                        let (_, df, _) = local_differences(graph, i, s).unwrap_or((0.0, t.f - s.f, 0.0));
                        let ds2 = (0.5 * df).sinh() * (0.5 * (t.g + s.g)).sinh();
                        su * cu * ds2 / ((s.s2g + su * su) * (t.s2g + su * su))
                    },
                    make,
                    None,
                    cfg.lobatto_tol,
                ),
                _ => integrate_cached(
                    &cache,
                    |s| {
                        let (su, _) = half_angle(&t, s);
                        0.5 * s.sh_g * s.fp / (s.s2g + su * su)
                    },
                    make,
                    None,
                    cfg.lobatto_tol,
                ),
            }
        })?;
        assemble(ests, pref)
    };
    let formulation = if formulation == Formulation::Kernel { Formulation::Kernel } else { Formulation::Deriv };
    Ok(VorticitySample {
        omega1: omega1(params, graph),
        omega2: values.clone(),
        formulation,
        carrier: graph_carrier(graph, values),
        budget,
        g_kernel: None,
        source: None,
    })
}

/// Graph nodes continued by geometrically growing steps out to `radius`.
pub fn plane_carrier_nodes(graph: &GraphState, radius: f64) -> (Vec<f64>, Vec<usize>) {
    let x = graph.nodes();
    let n = x.len();
    let h = graph.spacing();
    let mut right = Vec::new();
    let mut step = h;
    let mut pos = x[n - 1];
    while pos + step < radius {
        pos += step;
        right.push(pos);
        step *= 1.15;
    }
    if pos < radius {
        right.push(radius);
    }
    let mut nodes: Vec<f64> = right.iter().rev().map(|v| -v).collect();
    let offset = nodes.len();
    nodes.extend_from_slice(x);
    nodes.extend_from_slice(&right);
    (nodes, (offset..offset + n).collect())
}

pub fn omega2_plane(
    params: &PhysicalParams,
    graph: &GraphState,
    formulation: Formulation,
    cfg: &QuadratureConfig,
) -> Result<VorticitySample> {
    check_gap(params, graph)?;
    let h2 = params.h2();
    let pref = params.amplitude() * params.k() / PI;
    let (nodes, graph_index) = plane_carrier_nodes(graph, cfg.trunc_radius.max(graph.nodes()[graph.len() - 1]));
    let m = nodes.len();
    let n = graph.len();
    let (values, budget) = if pref == 0.0 {
        (vec![0.0; m], 0.0)
    } else {
        let cache = graph_cache(graph, h2);
        let make = |b: f64| src_gap(graph, h2, b);
        let x = graph.nodes();
        let (lo, hi) = (x[0], x[x.len() - 1]);
        let c = h2 + graph.baseline();
        let first = graph_index[0];
        let ests = try_map(m, |j| {
            let xi = nodes[j];
            let node = (j >= first && j < first + n).then(|| j - first);
            match (formulation, node) {
                (Formulation::Kernel, Some(i)) => {
                    // Subtract the kernel frozen at the target's gap and add
                    // its integral over the graph span back in closed form.
                    let gx = h2 + graph.values()[i];
                    let e = integrate_cached(
                        &cache,
                        |s| {
                            let (u, df, _) = local_differences(graph, i, s).unwrap_or((xi - s.beta, gx - s.g, 0.0));
                            u * df * (gx + s.g) / ((u * u + s.g * s.g) * (u * u + gx * gx))
                        },
                        make,
                        None,
                        cfg.lobatto_tol,
                    )?;
                    let frozen = 0.5 * (((xi - lo).powi(2) + gx * gx) / ((xi - hi).powi(2) + gx * gx)).ln();
                    let outside = 0.5 * (((xi - hi).powi(2) + c * c) / ((xi - lo).powi(2) + c * c)).ln();
                    Ok(Estimate { value: e.value + frozen + outside, error: e.error })
                }
                (Formulation::Kernel, None) => {
                    let e = integrate_cached(
                        &cache,
                        |s| {
                            let u = xi - s.beta;
                            u / (u * u + s.g * s.g)
                        },
                        make,
                        None,
                        cfg.lobatto_tol,
                    )?;
                    let outside = 0.5 * (((xi - hi).powi(2) + c * c) / ((xi - lo).powi(2) + c * c)).ln();
                    Ok(Estimate { value: e.value + outside, error: e.error })
                }
                _ => integrate_cached(
                    &cache,
                    |s| {
                        let u = xi - s.beta;
                        s.fp * s.g / (u * u + s.g * s.g)
                    },
                    make,
                    None,
                    cfg.lobatto_tol,
                ),
            }
        })?;
        assemble(ests, pref)
    };
    let formulation = if formulation == Formulation::Kernel { Formulation::Kernel } else { Formulation::Deriv };
    Ok(VorticitySample {
        omega1: omega1(params, graph),
        omega2: graph_index.iter().map(|&j| values[j]).collect(),
        formulation,
        carrier: Carrier { nodes, values, graph_index },
        budget,
        g_kernel: None,
        source: None,
    })
}

fn check_depth(h2: f64) -> Result<()> {
    if !(h2 > 0.0 && h2 < FRAC_PI_2) {
        return Err(Error::DepthOutOfRange(h2));
    }
    Ok(())
}

/// The kernel of the finite-depth equation, sin 2h2 / (cosh x + cos 2h2).
pub fn strip_kernel(h2: f64, x: f64) -> f64 {
    (2.0 * h2).sin() / cosh_plus_cos(x, 2.0 * h2)
}

/// DFT of the sampled kernel on a zero-padded grid. Returns the raw spectrum
/// (sum of samples times phases), the padded length and the sample count.
fn kernel_spectrum(h2: f64, grid: &GGrid) -> (Vec<Complex<f64>>, usize, usize) {
    let dx = grid.spacing;
    let half = (grid.half_width / dx).ceil() as usize;
    let len = 4 * half;
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for k in 0..2 * half {
        let j = k as isize - half as isize;
        let idx = j.rem_euclid(len as isize) as usize;
        buf[idx] = Complex::new(strip_kernel(h2, j as f64 * dx), 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    (buf, len, half)
}

/// Largest |K| for which the finite-depth equation is uniquely solvable.
pub fn delta_threshold(h2: f64) -> Result<f64> {
    delta_threshold_on(h2, &GGrid::default())
}

pub fn delta_threshold_on(h2: f64, grid: &GGrid) -> Result<f64> {
    check_depth(h2)?;
    let (spec, _, _) = kernel_spectrum(h2, grid);
    let norm = grid.spacing / (2.0 * PI).sqrt();
    let peak = spec.iter().map(|z| norm * z.norm()).fold(0.0, f64::max);
    Ok(((2.0 * PI).sqrt() / peak).min(1.0))
}

pub fn g_kernel(h2: f64, k: f64, grid: &GGrid) -> Result<GKernelSample> {
    check_depth(h2)?;
    let dx = grid.spacing;
    let (spec, len, half) = kernel_spectrum(h2, grid);
    let norm = dx / (2.0 * PI).sqrt();
    let peak = spec.iter().map(|z| norm * z.norm()).fold(0.0, f64::max);
    let delta = ((2.0 * PI).sqrt() / peak).min(1.0);
    if !(k.abs() < delta) {
        return Err(Error::SolvabilityViolated { k, delta });
    }
    let c = k * dx / (2.0 * PI);
    let mut ghat: Vec<Complex<f64>> = spec.iter().map(|s| s / (1.0 + c * s)).collect();
    let spectrum: Vec<f64> = ghat.iter().map(|z| norm * z.re).collect();
    FftPlanner::new().plan_fft_inverse(len).process(&mut ghat);
    let values: Vec<f64> = (0..2 * half + 1)
        .map(|k| {
            let j = k as isize - half as isize;
            ghat[j.rem_euclid(len as isize) as usize].re / len as f64
        })
        .collect();
    let l1_norm = dx * values.iter().map(|g| g.abs()).sum::<f64>();
    Ok(GKernelSample {
        h2,
        k,
        spacing: dx,
        values,
        half,
        l1_norm,
        spectrum,
        dzeta: 2.0 * PI / (len as f64 * dx),
    })
}

/// c[k] = sum_i a[i] b[k - i], full length.
pub(crate) fn linear_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out = a.len() + b.len() - 1;
    let len = out.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut pa: Vec<Complex<f64>> = (0..len).map(|i| Complex::new(*a.get(i).unwrap_or(&0.0), 0.0)).collect();
    let mut pb: Vec<Complex<f64>> = (0..len).map(|i| Complex::new(*b.get(i).unwrap_or(&0.0), 0.0)).collect();
    fwd.process(&mut pa);
    fwd.process(&mut pb);
    for (x, y) in pa.iter_mut().zip(&pb) {
        *x *= y;
    }
    inv.process(&mut pa);
    pa[..out].iter().map(|z| z.re / len as f64).collect()
}

/// Distance of the strip source and kernel from their nearest complex
/// singularity; the convolution mesh resolves it.
pub const STRIP_PAD: f64 = 25.0;
const STRIP_RESOLUTION: f64 = 4.0;
const STRIP_MAX_REFINE: usize = 64;

/// Uniform carrier for the strip: the graph nodes refined `m` times and
/// padded by `STRIP_PAD` on each side.
pub fn strip_carrier_nodes(graph: &GraphState, h2: f64) -> (Vec<f64>, Vec<usize>, usize) {
    let h = graph.spacing();
    let n = graph.len();
    let d = graph.min_gap(h2).min(PI - 2.0 * h2);
    let m = ((h * STRIP_RESOLUTION / d).ceil() as usize).clamp(1, STRIP_MAX_REFINE);
    let hc = h / m as f64;
    let pad = (STRIP_PAD / hc).ceil() as usize;
    let mid = 0.5 * (n - 1) as f64;
    let total = (n - 1) * m + 2 * pad + 1;
    let nodes = (0..total)
        .map(|j| {
            let j = j as f64 - pad as f64;
            (j / m as f64 - mid) * h
        })
        .collect();
    let index = (0..n).map(|i| pad + i * m).collect();
    (nodes, index, m)
}

/// R(x) = (K A / 2pi) [J1(x) - J2(x)] at the given points.
fn strip_source(
    params: &PhysicalParams,
    graph: &GraphState,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<Estimate>> {
    let h2 = params.h2();
    let pref = params.k() * params.amplitude() / (2.0 * PI);
    let cache = graph_cache(graph, h2);
    let make = |b: f64| src_gap(graph, h2, b);
    let ests = try_map(points.len(), |i| {
        let x = points[i];
        integrate_cached(
            &cache,
            |s| {
                let u = x - s.beta;
                let up = s.g;
                let dn = s.f - h2;
                s.fp * (up.sin() / cosh_minus_cos(u, up) - dn.sin() / cosh_plus_cos(u, dn))
            },
            make,
            None,
            cfg.lobatto_tol,
        )
    })?;
    Ok(ests.into_iter().map(|e| e.scaled(pref)).collect())
}

pub fn omega2_strip(params: &PhysicalParams, graph: &GraphState, cfg: &QuadratureConfig) -> Result<VorticitySample> {
    check_gap(params, graph)?;
    let h2 = params.h2();
    check_depth(h2)?;
    let k = params.k();
    let (nodes, graph_index, m) = strip_carrier_nodes(graph, h2);
    let hc = graph.spacing() / m as f64;
    let mc = nodes.len();
    let stride = (hc / GGrid::default().spacing).ceil() as usize;
    let g_grid = GGrid { spacing: hc / stride as f64, half_width: (nodes[mc - 1] - nodes[0]).max(80.0) };
    let g = g_kernel(h2, k, &g_grid)?;
    if k == 0.0 {
        let zeros = vec![0.0; mc];
        return Ok(VorticitySample {
            omega1: omega1(params, graph),
            omega2: vec![0.0; graph.len()],
            formulation: Formulation::Resolvent,
            carrier: Carrier { nodes, values: zeros.clone(), graph_index },
            budget: 0.0,
            g_kernel: Some(g),
            source: Some(zeros),
        });
    }
    let ests = strip_source(params, graph, &nodes, cfg)?;
    let r: Vec<f64> = ests.iter().map(|e| e.value).collect();
    let gc: Vec<f64> = (0..2 * mc - 1).map(|j| g.at(j as isize - (mc as isize - 1), stride)).collect();
    let conv = linear_convolve(&gc, &r);
    let c = k / (2.0 * PI) * hc;
    let values: Vec<f64> = (0..mc).map(|i| r[i] - c * conv[i + mc - 1]).collect();
    let gain = 1.0 + k.abs() / (2.0 * PI) * g.l1_norm;
    let quad = ests.iter().map(|e| e.error).fold(0.0, f64::max);
    let edge = r[0].abs().max(r[mc - 1].abs());
    Ok(VorticitySample {
        omega1: omega1(params, graph),
        omega2: graph_index.iter().map(|&j| values[j]).collect(),
        formulation: Formulation::Resolvent,
        carrier: Carrier { nodes, values, graph_index },
        budget: gain * (quad + edge),
        g_kernel: Some(g),
        source: Some(r),
    })
}

/// Dispatch on the geometry with its default formulation.
pub fn omega2(params: &PhysicalParams, graph: &GraphState, cfg: &QuadratureConfig) -> Result<VorticitySample> {
    match params.geometry() {
        Geometry::Plane => omega2_plane(params, graph, Formulation::Deriv, cfg),
        Geometry::Torus => omega2_torus(params, graph, Formulation::Deriv, cfg),
        Geometry::Strip => omega2_strip(params, graph, cfg),
    }
}

/// Sup over graph nodes of |w + (K/2pi) int w s - R|, with the source R
/// recomputed by adaptive quadrature and the integral by the trapezoid rule
/// on the carrier mesh.
pub fn fredholm_residual(
    params: &PhysicalParams,
    graph: &GraphState,
    sample: &VorticitySample,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let h2 = params.h2();
    let k = params.k();
    let nodes = &sample.carrier.nodes;
    let w = &sample.carrier.values;
    let hc = nodes[1] - nodes[0];
    let r = strip_source(params, graph, graph.nodes(), cfg)?;
    let mut worst: f64 = 0.0;
    for (i, &ci) in sample.carrier.graph_index.iter().enumerate() {
        let x = nodes[ci];
        let integral: f64 = nodes.iter().zip(w).map(|(b, wb)| wb * strip_kernel(h2, x - b)).sum::<f64>() * hc;
        let res = w[ci] + k / (2.0 * PI) * integral - r[i].value;
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_graph, GridSpec, Preset};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn delta_is_one() {
        assert!((delta_threshold(FRAC_PI_4).unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(delta_threshold(2.0), Err(Error::DepthOutOfRange(_))));
    }

    #[test]
    fn g_reduces_to_s_without_contrast() {
        let g = g_kernel(0.6, 0.0, &GGrid::default()).unwrap();
        assert!((g.at(0, 1) - 0.6f64.tan()).abs() < 1e-12);
        let g = g_kernel(FRAC_PI_4, 0.5, &GGrid::default()).unwrap();
        let asym = (1..g.half).map(|j| (g.at(j as isize, 1) - g.at(-(j as isize), 1)).abs()).fold(0.0, f64::max);
        assert!(asym <= 1e-10);
        assert!((g.l2_norm_x() - g.l2_norm_zeta()).abs() <= 1e-8 * g.l2_norm_x());
    }

    #[test]
    fn flat_and_zero_contrast() {
        let cfg = QuadratureConfig::default();
        let grid = GridSpec::new(32);
        let g = build_initial_graph(&Preset::Flat(0.0), &grid, Geometry::Torus).unwrap();
        let p = PhysicalParams::with_contrast(0.5, 2.0 * PI, 1.0, Geometry::Torus).unwrap();
        let w = omega2_torus(&p, &g, Formulation::Kernel, &cfg).unwrap();
        assert!(w.omega2.iter().all(|v| v.abs() < 1e-12));
        let p0 = PhysicalParams::with_contrast(0.0, 2.0 * PI, 2.0, Geometry::Plane).unwrap();
        let g = build_initial_graph(&Preset::Case3, &GridSpec::new(64), Geometry::Plane).unwrap();
        let w = omega2_plane(&p0, &g, Formulation::Deriv, &cfg).unwrap();
        assert!(w.omega2.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let a = [1.0, -2.0, 0.5, 3.0];
        let b = [0.25, 4.0, -1.0];
        let c = linear_convolve(&a, &b);
        for k in 0..6 {
            let want: f64 = (0..4).filter(|i| k >= *i && k - i < 3).map(|i| a[i] * b[k - i]).sum();
            assert!((c[k] - want).abs() < 1e-12);
        }
    }
}
