//! Dissipative (inelastic) dispersing billiards on the unit torus.
//!
//! The crate simulates a point particle bouncing among circular scatterers
//! with a velocity-dependent normal restitution coefficient, and provides
//! the machinery needed to compare the microscopic cooling dynamics with
//! its averaged description:
//!
//! * [`geometry`] — scatterer tables, boundary parametrization, horizon
//!   certification, free-path bounds.
//! * [`dynamics`] — the elastic billiard map, the inelastic extended map
//!   on `(s, phi, c)`, physical-time bookkeeping, and analytic Jacobians.
//! * [`dissipation`] — restitution model families, contraction condition
//!   checks, unstable-cone parameters, and cone invariance/expansion
//!   diagnostics.
//! * [`averaging`] — the per-collision speed increment, its average over
//!   the invariant measure, the limiting drift `h(c)`, the averaged
//!   initial value problem, and the closed-form cooling line.
//! * [`ensemble`] — reproducible Monte Carlo ensembles, interpolated slow
//!   paths, convergence reports, and cooling-line fits.
//!
//! All domain computation is in 64-bit floats ([`Real`]); the reusable
//! numeric kernels in [`numeric`] are generic over the scalar type.

pub mod averaging;
pub mod dissipation;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod io;
pub mod numeric;

/// Scalar type used by the billiard domain modules.
pub type Real = f64;

pub use error::{Error, ErrorClass};
