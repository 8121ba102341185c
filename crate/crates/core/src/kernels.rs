//! Birkhoff-Rott kernels for the plane, the horizontally periodic domain and
//! the strip of depth pi/2, plus the on-diagonal limits of the self-induced
//! graph integrands.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::model::Geometry;

/// Points closer than this to the kernel's singular set are rejected.
pub const SINGULAR_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub u: f64,
    pub v: f64,
}

impl KernelValue {
    pub fn new(u: f64, v: f64) -> Self {
        KernelValue { u, v }
    }
}

impl std::ops::Add for KernelValue {
    type Output = KernelValue;
    fn add(self, o: KernelValue) -> KernelValue {
        KernelValue::new(self.u + o.u, self.v + o.v)
    }
}

/// cosh(a) - cos(b) without cancellation near a = b = 0.
#[inline]
pub fn cosh_minus_cos(a: f64, b: f64) -> f64 {
    let s = (0.5 * a).sinh();
    let t = (0.5 * b).sin();
    2.0 * (s * s + t * t)
}

/// cosh(a) + cos(b), accurate when a is near 0 and b near +-pi.
#[inline]
pub fn cosh_plus_cos(a: f64, b: f64) -> f64 {
    let sa = (0.25 * a).sinh();
    let sb_minus = (FRAC_PI_4 - 0.25 * b).sin();
    let sb_plus = (FRAC_PI_4 + 0.25 * b).sin();
    let c = (0.5 * a).cosh();
    let minus = 2.0 * (sa * sa + sb_minus * sb_minus);
    let plus = 2.0 * (sa * sa + sb_plus * sb_plus);
    // cosh(a/2) -+ sin(b/2), take the accurate factor from the identities
    // and keep the product form 2(c - s)(c + s).
    let s = (0.5 * b).sin();
    let lo = if s >= 0.0 { minus } else { plus };
    let hi = if s >= 0.0 { c + s } else { c - s };
    2.0 * lo * hi
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    x - two_pi * (x / two_pi).round()
}

pub fn bs_plane(x: f64, y: f64, mu: f64, nu: f64) -> Result<KernelValue> {
    let dx = x - mu;
    let dy = y - nu;
    if dx.abs() < SINGULAR_EPS && dy.abs() < SINGULAR_EPS {
        return Err(Error::SingularArgument);
    }
    let r2 = dx * dx + dy * dy;
    let c = 1.0 / (2.0 * PI * r2);
    Ok(KernelValue::new(-dy * c, dx * c))
}

pub fn bs_torus(x: f64, y: f64, mu: f64, nu: f64) -> Result<KernelValue> {
    let dx = x - mu;
    let dy = y - nu;
    if wrap_angle(dx).abs() < SINGULAR_EPS && dy.abs() < SINGULAR_EPS {
        return Err(Error::SingularArgument);
    }
    let d = cosh_minus_cos(dy, dx);
    let c = 1.0 / (4.0 * PI * d);
    Ok(KernelValue::new(-dy.sinh() * c, dx.sin() * c))
}

/// Direct and image parts of the strip kernel, kept apart.
pub fn bs_strip_parts(x: f64, y: f64, mu: f64, nu: f64) -> Result<(KernelValue, KernelValue)> {
    if y.abs() >= FRAC_PI_2 || nu.abs() >= FRAC_PI_2 {
        return Err(Error::OutOfStrip);
    }
    let dx = x - mu;
    let dy = y - nu;
    if dx.abs() < SINGULAR_EPS && dy.abs() < SINGULAR_EPS {
        return Err(Error::SingularArgument);
    }
    let sy = y + nu;
    let dm = cosh_minus_cos(dx, dy);
    let dp = cosh_plus_cos(dx, sy);
    let sh = dx.sinh();
    let c = 1.0 / (4.0 * PI);
    let direct = KernelValue::new(-dy.sin() / dm * c, sh / dm * c);
    let image = KernelValue::new(-sy.sin() / dp * c, -sh / dp * c);
    Ok((direct, image))
}

pub fn bs_strip(x: f64, y: f64, mu: f64, nu: f64) -> Result<KernelValue> {
    let (d, i) = bs_strip_parts(x, y, mu, nu)?;
    Ok(d + i)
}

/// Limit as beta -> x of the self-induced integrand of the first vorticity
/// term, without the overall amplitude prefactor. `p` is the slope and `q`
/// the curvature f'' at the node.
pub fn desingularized_limit(geometry: Geometry, p: f64, q: f64) -> f64 {
    let base = q / (1.0 + p * p);
    match geometry {
        Geometry::Plane => base,
        Geometry::Torus | Geometry::Strip => 2.0 * base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_values() {
        let k = bs_plane(0.0, 1.0, 0.0, 0.0).unwrap();
        assert!((k.u + 1.0 / (2.0 * PI)).abs() < 1e-15 && k.v == 0.0);
        let k = bs_plane(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(k.u == 0.0 && (k.v - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let a = bs_plane(0.3, -0.2, 1.1, 0.5).unwrap();
        let b = bs_plane(1.1, 0.5, 0.3, -0.2).unwrap();
        assert!((a.u + b.u).abs() < 1e-15 && (a.v + b.v).abs() < 1e-15);
        assert_eq!(bs_plane(1.0, 2.0, 1.0, 2.0), Err(Error::SingularArgument));
    }

    #[test]
    fn torus_values() {
        let k = bs_torus(PI, 0.0, 0.0, 0.0).unwrap();
        assert!(k.u.abs() < 1e-16 && k.v.abs() < 1e-16);
        let k = bs_torus(0.0, 1.0, 0.0, 0.0).unwrap();
        let want = -(1.0f64.sinh()) / (1.0f64.cosh() - 1.0) / (4.0 * PI);
        assert!((k.u - want).abs() < 1e-14 && k.v == 0.0);
        let a = bs_torus(0.7 + 2.0 * PI, 0.1, -0.4, 0.9).unwrap();
        let b = bs_torus(0.7, 0.1, -0.4, 0.9).unwrap();
        assert!((a.u - b.u).abs() < 1e-14 && (a.v - b.v).abs() < 1e-14);
        assert_eq!(bs_torus(2.0 * PI, 0.0, 0.0, 0.0), Err(Error::SingularArgument));
    }

    #[test]
    fn strip_values() {
        let k = bs_strip(1.0, 0.0, 0.0, 0.0).unwrap();
        let (s, c) = (1.0f64.sinh(), 1.0f64.cosh());
        let want = (s / (c - 1.0) - s / (c + 1.0)) / (4.0 * PI);
        assert!((k.v - want).abs() < 1e-14);
        assert!(k.u.abs() < 1e-16);
        let near_wall = bs_strip(0.0, FRAC_PI_2 - 1e-3, 1.0, 0.0).unwrap();
        assert!(near_wall.u.is_finite() && near_wall.v.is_finite());
        assert_eq!(bs_strip(0.0, 2.0, 0.0, 0.0), Err(Error::OutOfStrip));
    }

    #[test]
    fn stable_identities() {
        for &(a, b) in &[(0.3f64, 1.2f64), (1e-5, 2e-5), (2.0, -0.7), (0.0, 3.0)] {
            let direct = a.cosh() - b.cos();
            assert!((cosh_minus_cos(a, b) - direct).abs() < 1e-14 * (1.0 + direct.abs()));
            let direct = a.cosh() + b.cos();
            assert!((cosh_plus_cos(a, b) - direct).abs() < 1e-14 * (1.0 + direct.abs()));
        }
        // near the image singularity the product form keeps relative accuracy
        let a: f64 = 1e-6;
        let b = PI - 1e-6;
        let v = cosh_plus_cos(a, b);
        let want = a * a / 2.0 + (1e-6f64).powi(2) / 2.0;
        assert!((v - want).abs() < 1e-6 * want);
    }
}
