//! Improper integrals over the line truncated to [-L, L] with a reported
//! bound on the neglected tails.

use super::lobatto::integrate_panel_estimate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    /// Integral over [-L, L].
    pub value: f64,
    /// Bound on the part with |beta| > L.
    pub tail_estimate: f64,
}

/// Bound on both tails of an integrand with |g(beta)| <= c / |beta|^p for
/// |beta| >= l.
pub fn tail_bound(c: f64, p: f64, l: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidDecay(p));
    }
    Ok(2.0 * c.abs() / ((p - 1.0) * l.powf(p - 1.0)))
}

/// Breakpoints for [-l, l]: eight panels on [-1, 1], then doubling widths.
pub fn line_breaks(l: f64) -> Vec<f64> {
    let mut pos: Vec<f64> = (1..=4).map(|k| 0.25 * k as f64).collect();
    let mut r: f64 = 2.0;
    while r < l {
        pos.push(r);
        r *= 2.0;
    }
    pos.retain(|&x| x < l);
    pos.push(l);
    let mut b: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    b.push(0.0);
    b.extend(pos);
    b
}

pub fn truncated_line_integral<F: Fn(f64) -> f64>(
    integrand: F,
    l: f64,
    c: f64,
    p: f64,
    tol: f64,
) -> Result<TailBound> {
    let tail_estimate = tail_bound(c, p, l)?;
    let breaks = line_breaks(l);
    let mut value = 0.0;
    for w in breaks.windows(2) {
        value += integrate_panel_estimate(&integrand, w[0], w[1], tol)?.value;
    }
    Ok(TailBound { value, tail_estimate })
}
