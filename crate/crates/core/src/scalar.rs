//! Scalar abstraction for the numerical core.
//!
//! Everything in this crate is generic over a [`Real`] scalar so the same
//! kernels run in `f32` or `f64`. Concrete aliases for the common `f64`
//! instantiation live at the crate root.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every solver and model in this crate.
///
/// `f64` is the type the file formats and tolerances are written for; `f32`
/// exists for cheap experimentation.
pub trait Real:
    nalgebra::RealField + Copy + Default + FromPrimitive + ToPrimitive + std::iter::Sum
{
    /// Shorthand for embedding an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Widen to `f64` (exact for `f64`, rounded for `f32`).
    fn to64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
