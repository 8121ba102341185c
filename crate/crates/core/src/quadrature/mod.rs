//! Spline representation of the interface and one-dimensional integration.

pub mod lobatto;
pub mod panels;
pub mod spline;
pub mod tail;

pub use lobatto::{integrate_panel, integrate_panel_estimate, Estimate};
pub use panels::{integrate_cached, pv_integrate_singular, PanelCache, Splice};
pub use spline::{BoundaryMode, SplineRep};
pub use tail::{tail_bound, truncated_line_integral, TailBound};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Relative tolerance of the adaptive Lobatto rule.
    pub lobatto_tol: f64,
    /// Half-width of truncated line integrals.
    pub trunc_radius: f64,
    /// Trapezoid mesh for the first turning integral.
    pub trap_dx: f64,
    /// Trapezoid mesh for the second turning integral and its inner vorticity.
    pub trap_dxt: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { lobatto_tol: 1e-8, trunc_radius: 200.0, trap_dx: 1e-7, trap_dxt: 1e-4 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lobatto_tol, self.trunc_radius, self.trap_dx, self.trap_dxt];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("quadrature settings must be positive".into()));
        }
        if self.trap_dx > self.trap_dxt {
            return Err(Error::InvalidParameter("trap_dx must not exceed trap_dxt".into()));
        }
        Ok(())
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}
