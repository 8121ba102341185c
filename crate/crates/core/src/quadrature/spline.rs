//! C2 cubic interpolating splines, periodic or natural with zero extension.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryMode {
    /// Closed curve of the given period; the last piece joins x_{N-1} to x_0 + period.
    Periodic { period: f64 },
    /// Natural end conditions; the spline is identically 0 outside the knot span.
    NaturalZeroExtension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineRep {
    knots: Vec<f64>,
    /// Per piece: S(x_i + t) = c0 + c1 t + c2 t^2 + c3 t^3.
    coef: Vec<[f64; 4]>,
    widths: Vec<f64>,
    mode: BoundaryMode,
    uniform: Option<f64>,
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve; `sub[0]` is the (0, n-1) corner and
/// `sup[n-1]` the (n-1, 0) corner.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let beta = sub[0];
    let alpha = sup[n - 1];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &bb, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

impl SplineRep {
    pub fn build(nodes: &[f64], values: &[f64], mode: BoundaryMode) -> Result<SplineRep> {
        let n = nodes.len();
        if n < 4 {
            return Err(Error::DegenerateGrid(format!("{n} nodes, need at least 4")));
        }
        if values.len() != n {
            return Err(Error::DegenerateGrid("nodes and values differ in length".into()));
        }
        if nodes.iter().chain(values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spline data".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateGrid("nodes not strictly increasing".into()));
        }
        let (npieces, widths) = match mode {
            BoundaryMode::Periodic { period } => {
                let last = nodes[0] + period - nodes[n - 1];
                if !(last > 0.0) {
                    return Err(Error::DegenerateGrid("period shorter than node span".into()));
                }
                let mut w: Vec<f64> = nodes.windows(2).map(|p| p[1] - p[0]).collect();
                w.push(last);
                (n, w)
            }
            BoundaryMode::NaturalZeroExtension => {
                (n - 1, nodes.windows(2).map(|p| p[1] - p[0]).collect::<Vec<_>>())
            }
        };
        let y = |i: usize| values[i % n];
        let slope: Vec<f64> = (0..npieces).map(|i| (y(i + 1) - y(i)) / widths[i]).collect();

        let m: Vec<f64> = match mode {
            BoundaryMode::Periodic { .. } => {
                let mut sub = vec![0.0; n];
                let mut diag = vec![0.0; n];
                let mut sup = vec![0.0; n];
                let mut rhs = vec![0.0; n];
                for i in 0..n {
                    let hl = widths[(i + n - 1) % n];
                    let hr = widths[i];
                    sub[i] = hl;
                    diag[i] = 2.0 * (hl + hr);
                    sup[i] = hr;
                    rhs[i] = 6.0 * (slope[i] - slope[(i + n - 1) % n]);
                }
                solve_cyclic(&sub, &diag, &sup, &rhs)
            }
            BoundaryMode::NaturalZeroExtension => {
                let k = n - 2;
                let mut sub = vec![0.0; k];
                let mut diag = vec![0.0; k];
                let mut sup = vec![0.0; k];
                let mut rhs = vec![0.0; k];
                for j in 0..k {
                    let i = j + 1;
                    sub[j] = widths[i - 1];
                    diag[j] = 2.0 * (widths[i - 1] + widths[i]);
                    sup[j] = widths[i];
                    rhs[j] = 6.0 * (slope[i] - slope[i - 1]);
                }
                let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
                let mut m = vec![0.0; n];
                m[1..n - 1].copy_from_slice(&inner);
                m
            }
        };

        let coef = (0..npieces)
            .map(|i| {
                let h = widths[i];
                let (m0, m1) = (m[i], m[(i + 1) % n]);
                [
                    y(i),
                    slope[i] - h * (2.0 * m0 + m1) / 6.0,
                    0.5 * m0,
                    (m1 - m0) / (6.0 * h),
                ]
            })
            .collect();

        let h0 = widths[0];
        let uniform = widths
            .iter()
            .all(|w| (w - h0).abs() <= 1e-12 * h0)
            .then_some(h0);

        Ok(SplineRep { knots: nodes.to_vec(), coef, widths, mode, uniform })
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_pieces(&self) -> usize {
        self.coef.len()
    }

    pub fn piece(&self, i: usize) -> [f64; 4] {
        self.coef[i]
    }

    pub fn width(&self, i: usize) -> f64 {
        self.widths[i]
    }

    /// Piece index and local offset for `x`, or `None` outside the span of a
    /// natural spline.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let x0 = self.knots[0];
        let n = self.knots.len();
        match self.mode {
            BoundaryMode::Periodic { period } => {
                let mut t = x - x0;
                t -= period * (t / period).floor();
                let i = match self.uniform {
                    Some(h) => ((t / h) as usize).min(n - 1),
                    None => self.knots.partition_point(|k| *k - x0 <= t).saturating_sub(1),
                };
                Some((i, t - (self.knots[i] - x0)))
            }
            BoundaryMode::NaturalZeroExtension => {
                let xe = self.knots[n - 1];
                if !(x >= x0 && x <= xe) {
                    return None;
                }
                let i = match self.uniform {
                    Some(h) => (((x - x0) / h) as usize).min(n - 2),
                    None => self.knots.partition_point(|k| *k <= x).saturating_sub(1).min(n - 2),
                };
                Some((i, x - self.knots[i]))
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some((i, t)) => {
                let c = &self.coef[i];
                c[0] + t * (c[1] + t * (c[2] + t * c[3]))
            }
            None => 0.0,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.eval_with_derivs(x)[1]
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        self.eval_with_derivs(x)[2]
    }

    /// Value, first and second derivative.
    pub fn eval_with_derivs(&self, x: f64) -> [f64; 3] {
        match self.locate(x) {
            Some((i, t)) => {
                let c = &self.coef[i];
                [
                    c[0] + t * (c[1] + t * (c[2] + t * c[3])),
                    c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]),
                    2.0 * c[2] + 6.0 * t * c[3],
                ]
            }
            None => [0.0; 3],
        }
    }
}
