//! Scalar-generic numeric kernels: quadrature, fixed-step integration,
//! compensated summation, seed derivation, and least squares.
//!
//! The kernels are generic over [`Float`] so they work for `f32` and `f64`;
//! the billiard modules instantiate them at [`crate::Real`].

pub mod fit;
pub mod kahan;
pub mod quad;
pub mod rk4;
pub mod seed;

/// Floating-point scalar usable by the numeric kernels.
pub trait Float:
    num_traits::Float + num_traits::FloatConst + num_traits::NumAssign + std::fmt::Debug + 'static
{
}

impl<T> Float for T where
    T: num_traits::Float + num_traits::FloatConst + num_traits::NumAssign + std::fmt::Debug + 'static
{
}
