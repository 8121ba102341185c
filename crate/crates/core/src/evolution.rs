//! Right-hand side of the graph equations `df/dt = ...` in each geometry.

use std::f64::consts::PI;

use crate::error::Result;
use crate::kernels::{cosh_minus_cos, cosh_plus_cos, desingularized_limit};
use crate::model::{Geometry, GraphState, PhysicalParams};
use crate::parallel::try_map;
use crate::quadrature::{integrate_cached, Estimate, BoundaryMode, PanelCache, QuadratureConfig, SplineRep, Splice};
use crate::vorticity::{graph_breaks, half_angle, local_differences, make_src, make_tgt, src_slope, src_weight, contact_factor, contact_remainder, omega2_plane, omega2_strip, omega2_torus,
    Formulation, Src, VorticitySample};

#[derive(Debug, Clone, PartialEq)]
pub struct RhsSample {
    pub values: Vec<f64>,
    pub omega1_part: Vec<f64>,
    pub omega2_part: Vec<f64>,
    /// Largest per-node bound on quadrature and truncation error.
    pub budget: f64,
    pub vorticity: VorticitySample,
}

impl RhsSample {
    fn assemble(parts: Vec<(f64, f64, f64)>, vorticity: VorticitySample) -> RhsSample {
        let omega1_part: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let omega2_part: Vec<f64> = parts.iter().map(|p| p.1).collect();
        let values = omega1_part.iter().zip(&omega2_part).map(|(a, b)| a + b).collect();
        let budget = parts.iter().map(|p| p.2).fold(0.0, f64::max) + vorticity.budget;
        RhsSample { values, omega1_part, omega2_part, budget, vorticity }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Source cache carrying omega2 interpolated from `w`.
fn weighted_cache(
    graph: &GraphState,
    h2: f64,
    breaks: Vec<f64>,
    w: &SplineRep,
    c0: f64,
) -> PanelCache<Src> {
    PanelCache::build(breaks, |b| Src { w2: src_weight(graph, w, c0, b).w2, ..make_src(graph, h2, b) })
}

pub fn rhs_torus(params: &PhysicalParams, graph: &GraphState, cfg: &QuadratureConfig) -> Result<RhsSample> {
    rhs_torus_with(params, graph, Formulation::Deriv, cfg)
}

pub fn rhs_torus_with(
    params: &PhysicalParams,
    graph: &GraphState,
    formulation: Formulation,
    cfg: &QuadratureConfig,
) -> Result<RhsSample> {
    let h2 = params.h2();
    let vort = omega2_torus(params, graph, formulation, cfg)?;
    let with_w2 = vort.omega2.iter().any(|v| *v != 0.0);
    let c0 = contact_factor(params);
    let rest = contact_remainder(graph, graph.nodes(), &vort.omega2, c0);
    let w = SplineRep::build(graph.nodes(), &rest, BoundaryMode::Periodic { period: 2.0 * PI })?;
    let cache = weighted_cache(graph, h2, graph_breaks(graph), &w, c0);
    let make1 = |b: f64| src_slope(graph, h2, b);
    let make2 = |b: f64| src_weight(graph, &w, c0, b);
    let p1 = params.amplitude() / (4.0 * PI);
    let p2 = 1.0 / (4.0 * PI);
    let x0 = graph.nodes()[0];
    let wrap = x0 + 2.0 * PI;
    let parts = try_map(graph.len(), |i| {
        let t = make_tgt(graph, h2, graph.nodes()[i], graph.values()[i]);
        let pts = [t.x, wrap];
        let splice = Splice {
            points: if i == 0 { &pts[..] } else { &pts[..1] },
            limit: desingularized_limit(Geometry::Torus, t.p, t.q),
        };
        let e1 = if p1 == 0.0 {
            Default::default()
        } else {
            integrate_cached(
                &cache,
                |s| {
                    if let Some((u, df, dp)) = local_differences(graph, i, s) {
                        let (su, cu) = (0.5 * u).sin_cos();
                        let sd = (0.5 * df).sinh();
                        return su * cu * dp / (sd * sd + su * su);
                    }
                    let (su, cu) = half_angle(&t, s);
                    let sd = t.shf * s.chf - t.chf * s.shf;
                    su * cu * (t.p - s.fp) / (sd * sd + su * su)
                },
                make1,
                Some(splice),
                cfg.lobatto_tol,
            )?
        };
        // omega2 is split into its value at the target plus a remainder, so
        // the near-singular kernel only meets a factor vanishing at x; the
        // constant part integrates to 2 pi p w2(x) over the period.
        let e2 = if with_w2 {
            let wx = vort.omega2[i];
            let e = integrate_cached(
                &cache,
                |s| {
                    let (su, cu) = half_angle(&t, s);
                    (t.p * t.sh_g + 2.0 * su * cu) * (s.w2 - wx) / (2.0 * (t.s2g + su * su))
                },
                make2,
                None,
                cfg.lobatto_tol,
            )?;
            Estimate { value: e.value + 2.0 * PI * t.p * wx, error: e.error }
        } else {
            Default::default()
        };
        Ok((p1 * e1.value, p2 * e2.value, p1.abs() * e1.error + p2 * e2.error))
    })?;
    Ok(RhsSample::assemble(parts, vort))
}

pub fn rhs_plane(params: &PhysicalParams, graph: &GraphState, cfg: &QuadratureConfig) -> Result<RhsSample> {
    rhs_plane_with(params, graph, Formulation::Deriv, cfg)
}

pub fn rhs_plane_with(
    params: &PhysicalParams,
    graph: &GraphState,
    formulation: Formulation,
    cfg: &QuadratureConfig,
) -> Result<RhsSample> {
    let h2 = params.h2();
    let a = params.amplitude();
    let vort = omega2_plane(params, graph, formulation, cfg)?;
    let with_w2 = vort.carrier.values.iter().any(|v| *v != 0.0);
    let x = graph.nodes();
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let b = graph.baseline();
    let p1 = a / (2.0 * PI);
    let p2 = 1.0 / (2.0 * PI);

    let cache1 = PanelCache::build(graph_breaks(graph), |s| make_src(graph, h2, s));
    let make1 = |s: f64| src_slope(graph, h2, s);
    let c0 = contact_factor(params);
    let rest = contact_remainder(graph, &vort.carrier.nodes, &vort.carrier.values, c0);
    let w = SplineRep::build(&vort.carrier.nodes, &rest, BoundaryMode::NaturalZeroExtension)?;
    let cache2 = weighted_cache(graph, h2, vort.carrier.nodes.clone(), &w, c0);
    let make2 = |s: f64| src_weight(graph, &w, c0, s);

    let (c_lo, c_hi) = (vort.carrier.nodes[0], vort.carrier.nodes[vort.carrier.nodes.len() - 1]);
    // Far-field bound for omega2 beyond the carrier: |w(x)| <= c1 / dist^2.
    let l = c_hi;
    let l_dom = hi.max(-lo);
    let theta = 1.0 - l_dom / l;
    let fp_l1: f64 = graph.slopes().iter().map(|p| p.abs()).sum::<f64>() * graph.spacing();
    let g_max = graph.values().iter().cloned().fold(b, f64::max) + h2;
    let c1 = params.k().abs() * a.abs() / PI * fp_l1 * g_max;

    let parts = try_map(graph.len(), |i| {
        let t = make_tgt(graph, h2, x[i], graph.values()[i]);
        let pts = [t.x];
        let splice = Splice { points: &pts, limit: desingularized_limit(Geometry::Plane, t.p, t.q) };
        let e1 = integrate_cached(
            &cache1,
            |s| {
                let (u, d, dp) = local_differences(graph, i, s).unwrap_or((t.x - s.beta, t.f - s.f, t.p - s.fp));
                dp * u / (u * u + d * d)
            },
            make1,
            Some(splice),
            cfg.lobatto_tol,
        )?;
        let c = t.f - b;
        let outside = 0.5 * t.p * (((t.x - hi).powi(2) + c * c) / ((t.x - lo).powi(2) + c * c)).ln();
        let g = t.g;
        let (v2, err2) = if with_w2 {
            let wx = vort.omega2[i];
            let e2 = integrate_cached(
                &cache2,
                |s| {
                    let u = t.x - s.beta;
                    (s.w2 - wx) * (u + t.p * g) / (u * u + g * g)
                },
                make2,
                None,
                cfg.lobatto_tol,
            )?;
            let (dl, dh) = (t.x - c_lo, t.x - c_hi);
            let frozen = 0.5 * ((dl * dl + g * g) / (dh * dh + g * g)).ln() + t.p * ((dl / g).atan() - (dh / g).atan());
            let e2 = Estimate { value: e2.value + wx * frozen, error: e2.error };
            let cc = c1 * (1.0 + t.p.abs() * g / (theta * l)) / theta.powi(3);
            let tail = 2.0 * cc / (2.0 * l * l);
            (p2 * e2.value, p2 * (e2.error + tail))
        } else {
            (0.0, 0.0)
        };
        Ok((p1 * (e1.value + outside), v2, p1.abs() * e1.error + err2))
    })?;
    Ok(RhsSample::assemble(parts, vort))
}

pub fn rhs_strip(params: &PhysicalParams, graph: &GraphState, cfg: &QuadratureConfig) -> Result<RhsSample> {
    let h2 = params.h2();
    graph.check_admissible(params)?;
    let vort = omega2_strip(params, graph, cfg)?;
    let with_w2 = vort.carrier.values.iter().any(|v| *v != 0.0);
    let x = graph.nodes();
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let b = graph.baseline();
    let p1 = params.amplitude() / (4.0 * PI);
    let p2 = 1.0 / (4.0 * PI);

    let cache1 = PanelCache::build(graph_breaks(graph), |s| make_src(graph, h2, s));
    let make1 = |s: f64| src_slope(graph, h2, s);
    let c0 = contact_factor(params);
    let rest = contact_remainder(graph, &vort.carrier.nodes, &vort.carrier.values, c0);
    let w = SplineRep::build(&vort.carrier.nodes, &rest, BoundaryMode::NaturalZeroExtension)?;
    let cache2 = weighted_cache(graph, h2, vort.carrier.nodes.clone(), &w, c0);
    let make2 = |s: f64| src_weight(graph, &w, c0, s);
    let cv = &vort.carrier.values;
    let (c_lo, c_hi) = (vort.carrier.nodes[0], vort.carrier.nodes[cv.len() - 1]);
    let edge = cv[0].abs().max(cv[cv.len() - 1].abs());

    let parts = try_map(graph.len(), |i| {
        let t = make_tgt(graph, h2, x[i], graph.values()[i]);
        let pts = [t.x];
        let splice = Splice { points: &pts, limit: desingularized_limit(Geometry::Strip, t.p, t.q) };
        let e1 = integrate_cached(
            &cache1,
            |s| {
                let (u, d, dp) = local_differences(graph, i, s).unwrap_or((t.x - s.beta, t.f - s.f, t.p - s.fp));
                let sh = u.sinh();
                dp * sh / cosh_minus_cos(u, d) + (t.p + s.fp) * sh / cosh_plus_cos(u, t.f + s.f)
            },
            make1,
            Some(splice),
            cfg.lobatto_tol,
        )?;
        let (cm, cp) = (t.f - b, t.f + b);
        let outside = t.p
            * (cosh_minus_cos(t.x - hi, cm).ln() - cosh_minus_cos(t.x - lo, cm).ln()
                + cosh_plus_cos(t.x - hi, cp).ln()
                - cosh_plus_cos(t.x - lo, cp).ln());
        let (v2, err2) = if with_w2 {
            let (up, dn) = (t.g, t.f - h2);
            let (s_up, s_dn) = (up.sin(), dn.sin());
            let wx = cv[vort.carrier.graph_index[i]];
            let e2 = integrate_cached(
                &cache2,
                |s| {
                    let u = t.x - s.beta;
                    let sh = u.sinh();
                    (s.w2 - wx) * (sh + t.p * s_up) / cosh_minus_cos(u, up)
                        + s.w2 * (t.p * s_dn - sh) / cosh_plus_cos(u, dn)
                },
                make2,
                None,
                cfg.lobatto_tol,
            )?;
            // Closed form of the frozen near-singular term over the carrier.
            let (dl, dh) = (t.x - c_lo, t.x - c_hi);
            let arc = |v: f64| 2.0 * ((0.5 * v).tanh() / (0.5 * up).tan()).atan();
            let frozen = cosh_minus_cos(dl, up).ln() - cosh_minus_cos(dh, up).ln() + t.p * (arc(dl) - arc(dh));
            let e2 = Estimate { value: e2.value + wx * frozen, error: e2.error };
            (p2 * e2.value, p2 * (e2.error + 4.0 * edge))
        } else {
            (0.0, 0.0)
        };
        Ok((p1 * (e1.value + outside), v2, p1.abs() * e1.error + err2))
    })?;
    Ok(RhsSample::assemble(parts, vort))
}

pub fn rhs(params: &PhysicalParams, graph: &GraphState, cfg: &QuadratureConfig) -> Result<RhsSample> {
    match params.geometry() {
        Geometry::Plane => rhs_plane(params, graph, cfg),
        Geometry::Torus => rhs_torus(params, graph, cfg),
        Geometry::Strip => rhs_strip(params, graph, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_graph, GridSpec, Preset};

    fn params(k: f64, h2: f64, geom: Geometry) -> PhysicalParams {
        PhysicalParams::with_contrast(k, 4.0 * PI, h2, geom).unwrap()
    }

    #[test]
    fn flat_states_are_fixed() {
        let cfg = QuadratureConfig::default();
        for geom in [Geometry::Plane, Geometry::Torus, Geometry::Strip] {
            for c in [0.0, 0.3, -0.3] {
                let g = build_initial_graph(&Preset::Flat(c), &GridSpec::new(32), geom).unwrap();
                let r = rhs(&params(0.5, 1.0, geom), &g, &cfg).unwrap();
                assert!(r.sup_norm() <= 1e-10, "{geom} {c}: {}", r.sup_norm());
            }
        }
    }

    #[test]
    fn torus_trough_rises() {
        let cfg = QuadratureConfig::default();
        let g = build_initial_graph(&Preset::Case1, &GridSpec::new(64), Geometry::Torus).unwrap();
        let at0 = |k| {
            let r = rhs_torus(&params(k, PI / 2.0, Geometry::Torus), &g, &cfg).unwrap();
            r.values[32]
        };
        let (neg, zero, pos) = (at0(-1.0 / 3.0), at0(0.0), at0(1.0 / 3.0));
        assert!(zero > 0.0);
        assert!(neg > pos, "{neg} {zero} {pos}");
    }
}
