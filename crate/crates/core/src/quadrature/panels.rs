//! Composite integration over a fixed panel partition.
//!
//! Source-side data (spline values and whatever else an integrand needs) is
//! evaluated once per rule abscissa and shared by every target node; only
//! panels that fail the error test are re-evaluated during bisection.

use super::lobatto::{abscissae, apply_rule, refine_panel, Estimate};
use crate::error::Result;

/// Per-abscissa source data for every panel of a partition.
#[derive(Debug, Clone)]
pub struct PanelCache<P> {
    breaks: Vec<f64>,
    points: Vec<[P; 7]>,
}

impl<P: Copy> PanelCache<P> {
    pub fn build<M: Fn(f64) -> P>(breaks: Vec<f64>, make: M) -> Self {
        let points = breaks
            .windows(2)
            .map(|w| {
                let mut x = abscissae(w[0], w[1]);
                // One-sided samples, so a jump at a break stays outside the panel.
                x[0] = x[0].next_up().min(x[3]);
                x[6] = x[6].next_down().max(x[3]);
                x.map(&make)
            })
            .collect();
        PanelCache { breaks, points }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn n_panels(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self, panel: usize) -> &[P; 7] {
        &self.points[panel]
    }

    pub fn span(&self) -> f64 {
        self.breaks[self.breaks.len() - 1] - self.breaks[0]
    }
}

/// A removable singularity: wherever the integrand is sampled exactly at
/// one of `points`, `limit` is used instead.
#[derive(Debug, Clone, Copy)]
pub struct Splice<'a> {
    pub points: &'a [f64],
    pub limit: f64,
}

/// Integrates `eval` over all panels of `cache`. Panels failing the
/// Lobatto/Kronrod test are bisected using `make` to build fresh source data.
/// The absolute tolerance is `tol * max(1, |first estimate|)`, shared out in
/// proportion to panel length.
pub fn integrate_cached<P, E, M>(
    cache: &PanelCache<P>,
    eval: E,
    make: M,
    splice: Option<Splice<'_>>,
    tol: f64,
) -> Result<Estimate>
where
    P: Copy,
    E: Fn(&P) -> f64,
    M: Fn(f64) -> P,
{
    let np = cache.n_panels();
    let mut vals: Vec<[f64; 7]> = Vec::with_capacity(np);
    let mut first = 0.0;
    for j in 0..np {
        let mut v = cache.points[j].map(|p| eval(&p));
        if let Some(s) = splice {
            if s.points.contains(&cache.breaks[j]) {
                v[0] = s.limit;
            }
            if s.points.contains(&cache.breaks[j + 1]) {
                v[6] = s.limit;
            }
        }
        first += apply_rule(cache.breaks[j], cache.breaks[j + 1], &v).value;
        vals.push(v);
    }
    let abs_tol = tol * first.abs().max(1.0);
    let span = cache.span();
    let mut total = Estimate::default();
    for (j, v) in vals.into_iter().enumerate() {
        let (a, b) = (cache.breaks[j], cache.breaks[j + 1]);
        let budget = abs_tol * (b - a) / span;
        let e = apply_rule(a, b, &v);
        if e.error <= budget && e.value.is_finite() {
            total += e;
            continue;
        }
        let mut g = |x: f64| match splice {
            Some(s) if s.points.contains(&x) => s.limit,
            _ => eval(&make(x)),
        };
        total += refine_panel(&mut g, a, b, v, budget)?;
    }
    Ok(total)
}

/// Principal-value style integral of a graph integrand with a removable
/// singularity at `singular`, one of the `breaks`. The panels on either side
/// of it use `limit` in place of the 0/0 sample; all other panels are regular.
pub fn pv_integrate_singular<F: Fn(f64) -> f64>(
    integrand: F,
    breaks: &[f64],
    singular: f64,
    limit: f64,
    tol: f64,
) -> Result<Estimate> {
    let cache = PanelCache::build(breaks.to_vec(), |x| x);
    let pts = [singular];
    integrate_cached(&cache, |x| integrand(*x), |x| x, Some(Splice { points: &pts, limit }), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_term1(f: impl Fn(f64) -> (f64, f64), x: f64) -> impl Fn(f64) -> f64 {
        let (fx, px) = f(x);
        move |b| {
            let (fb, pb) = f(b);
            (px - pb) * (x - b) / ((x - b).powi(2) + (fx - fb).powi(2))
        }
    }

    #[test]
    fn flat_data_gives_zero() {
        let breaks: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
        let g = plane_term1(|_| (0.3, 0.0), 0.0);
        let e = pv_integrate_singular(g, &breaks, breaks[10], 0.0, 1e-10).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn parabola_against_subtraction() {
        // f = x^2/2 on [-1, 1], node at 0: integrand is -b*(-b)/(b^2 + b^4/4)
        // = 1/(1 + b^2/4), integral = 4 atan(1/2).
        let breaks: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
        let g = plane_term1(|b| (0.5 * b * b, b), 0.0);
        let e = pv_integrate_singular(g, &breaks, breaks[10], 1.0, 1e-12).unwrap();
        let want = 4.0 * 0.5f64.atan();
        assert!((e.value - want).abs() < 1e-6, "{} vs {want}", e.value);
        // symmetric data: twice the one-sided integral
        let half = pv_integrate_singular(plane_term1(|b| (0.5 * b * b, b), 0.0), &breaks[10..], 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value - 2.0 * half.value).abs() < 1e-10);
    }

    #[test]
    fn halving_singular_panels_is_invariant() {
        let f = |b: f64| ((b + 0.2).sin() * 0.4, (b + 0.2).cos() * 0.4);
        let breaks: Vec<f64> = (0..=30).map(|i| -1.0 + 0.1 * i as f64).collect();
        let x = breaks[15];
        let (p, q) = (f(x).1, -0.4 * (x + 0.2).sin());
        let limit = q / (1.0 + p * p);
        let a = pv_integrate_singular(plane_term1(f, x), &breaks, breaks[15], limit, 1e-12).unwrap();
        let mut fine = breaks.clone();
        fine.insert(16, 0.55);
        fine.insert(15, 0.45);
        let b = pv_integrate_singular(plane_term1(f, x), &fine, breaks[15], limit, 1e-12).unwrap();
        assert!((a.value - b.value).abs() <= 1e-8 * a.value.abs());
    }
}
