//! Real scalar abstraction shared by every numeric routine in this crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the rate model and optimizer are generic over (`f32` or `f64`).
pub trait Scalar: Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` constant into this scalar.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled tolerance used by the iterative solvers.
    fn solver_tol() -> Self;
}

impl Scalar for f32 {
    fn solver_tol() -> Self {
        1e-6
    }
}

impl Scalar for f64 {
    fn solver_tol() -> Self {
        1e-12
    }
}

/// Complex number over a [`Scalar`].
pub type Cx<T> = Complex<T>;
