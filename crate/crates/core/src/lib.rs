//! Contour dynamics for the Muskat problem with a jump in permeability.
//!
//! The interface between two fluids in a porous medium is a graph
//! `y = f(x, t)`; below the fixed line `y = -h2` the permeability changes
//! from `kappa1` to `kappa2`. The crate evolves `f` in three geometries (the
//! plane, the horizontally periodic domain, the strip of depth pi/2) and
//! evaluates the turning-wave functional `d/dalpha v1(0)` for explicit curves
//! with an error ledger.

pub mod error;
pub mod evolution;
pub mod kernels;
pub mod model;
pub mod parallel;
pub mod quadrature;
pub mod stepper;
pub mod turning;
pub mod cli;
pub mod vorticity;

pub use error::{Error, Result};
pub use model::{Geometry, PhysicalParams};
