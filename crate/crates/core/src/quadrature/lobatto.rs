//! Adaptive Gauss-Lobatto quadrature with a 4-point Lobatto rule and its
//! 7-point Kronrod extension as error estimator.

use crate::error::{Error, Result};

/// Abscissae on [-1, 1]; the Lobatto rule uses indices 0, 2, 4, 6.
pub const NODES: [f64; 7] = [
    -1.0,
    -0.816_496_580_927_726,
    -0.447_213_595_499_958,
    0.0,
    0.447_213_595_499_958,
    0.816_496_580_927_726,
    1.0,
];

pub const KRONROD_WEIGHTS: [f64; 7] = [
    11.0 / 210.0,
    72.0 / 245.0,
    125.0 / 294.0,
    16.0 / 35.0,
    125.0 / 294.0,
    72.0 / 245.0,
    11.0 / 210.0,
];

pub const LOBATTO_WEIGHTS: [f64; 4] = [1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0];

pub const MAX_LEVELS: usize = 60;

const ROUNDING_WIDTH: f64 = 256.0 * f64::EPSILON;
const ROUNDING_SLACK: f64 = 64.0;

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, o: Estimate) {
        self.value += o.value;
        self.error += o.error;
    }
}

impl Estimate {
    pub fn scaled(self, c: f64) -> Estimate {
        Estimate { value: c * self.value, error: c.abs() * self.error }
    }
}

/// The seven rule abscissae mapped to [a, b].
#[inline]
pub fn abscissae(a: f64, b: f64) -> [f64; 7] {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut x = [0.0; 7];
    for (xi, t) in x.iter_mut().zip(NODES) {
        *xi = m + r * t;
    }
    x[0] = a;
    x[6] = b;
    x
}

/// One application of both rules to precomputed values.
#[inline]
pub fn apply_rule(a: f64, b: f64, v: &[f64; 7]) -> Estimate {
    let r = 0.5 * (b - a);
    let k = KRONROD_WEIGHTS.iter().zip(v).map(|(w, f)| w * f).sum::<f64>() * r;
    let l = (LOBATTO_WEIGHTS[0] * (v[0] + v[6]) + LOBATTO_WEIGHTS[1] * (v[2] + v[4])) * r;
    Estimate { value: k, error: (k - l).abs() }
}

/// Bisects until each piece meets its share of `budget`, starting from the
/// rule values `v` already known on [a, b].
pub fn refine_panel<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    v: [f64; 7],
    budget: f64,
) -> Result<Estimate> {
    refine(f, a, b, v, budget, 0)
}

fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    v: [f64; 7],
    budget: f64,
    level: usize,
) -> Result<Estimate> {
    let e = apply_rule(a, b, &v);
    if !e.value.is_finite() || !e.error.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    if e.error <= budget {
        return Ok(e);
    }
    // Below this width the abscissae themselves are quantized and a modest
    // excess is rounding noise; accept it and pass the error on.
    if b - a <= ROUNDING_WIDTH * a.abs().max(b.abs()).max(1.0) {
        return if e.error <= ROUNDING_SLACK * budget { Ok(e) } else { Err(Error::ToleranceNotMet { a, b }) };
    }
    let m = 0.5 * (a + b);
    if level >= MAX_LEVELS || !(m > a && m < b) {
        return Err(Error::ToleranceNotMet { a, b });
    }
    let mut fill = |lo: f64, hi: f64, f0: f64, f6: f64| {
        let x = abscissae(lo, hi);
        let mut w = [f0, 0.0, 0.0, 0.0, 0.0, 0.0, f6];
        for k in 1..6 {
            w[k] = f(x[k]);
        }
        w
    };
    let vl = fill(a, m, v[0], v[3]);
    let vr = fill(m, b, v[3], v[6]);
    let l = refine(f, a, m, vl, 0.5 * budget, level + 1)?;
    let r = refine(f, m, b, vr, 0.5 * budget, level + 1)?;
    Ok(l + r)
}

/// Adaptive integral of `f` over [a, b] with estimated error at most
/// `tol * max(1, |result|)`.
pub fn integrate_panel_estimate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::default());
    }
    let x = abscissae(a, b);
    let mut v = [0.0; 7];
    for (vi, xi) in v.iter_mut().zip(x) {
        *vi = f(xi);
    }
    let first = apply_rule(a, b, &v);
    let budget = tol * first.value.abs().max(1.0);
    refine_panel(&mut f, a, b, v, budget)
}

pub fn integrate_panel<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_panel_estimate(f, a, b, tol).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_nodes() {
        assert!((KRONROD_WEIGHTS.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!((NODES[5] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((NODES[4] - 1.0 / 5.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        for deg in 0..=9 {
            let got = {
                let x = abscissae(0.0, 1.0);
                let v = x.map(|t| t.powi(deg));
                apply_rule(0.0, 1.0, &v).value
            };
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn basic_integrals() {
        let v = integrate_panel(|x| x * x, 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let v = integrate_panel(f64::sin, 0.0, std::f64::consts::PI, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
        let v = integrate_panel(|x| 1.0 / (x + 1e-6).sqrt(), 0.0, 1.0, 1e-8).unwrap();
        let want = 2.0 * ((1.0f64 + 1e-6).sqrt() - 1e-3);
        assert!((v - want).abs() < 1e-8 * want);
    }

    #[test]
    fn hopeless_integrand_fails() {
        let r = integrate_panel(|x: f64| if x > 0.3 { 1.0 / (x - 0.3) } else { 0.0 }, 0.0, 1.0, 1e-8);
        assert!(r.is_err());
    }
}
