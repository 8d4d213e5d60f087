//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the kinematics, signal model and solver are written against.
///
/// `f64` is the working precision; `f32` is supported with correspondingly
/// looser default tolerances.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Tolerance for exact algebraic identities (round trips, light-speed invariance).
    const ALGEBRAIC_TOL: f64;
    /// Tolerance for quantities derived through several operations.
    const DERIVED_TOL: f64;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn algebraic_tol() -> Self {
        Self::lit(Self::ALGEBRAIC_TOL)
    }

    #[inline]
    fn derived_tol() -> Self {
        Self::lit(Self::DERIVED_TOL)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const ALGEBRAIC_TOL: f64 = 1e-12;
    const DERIVED_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    const ALGEBRAIC_TOL: f64 = 1e-5;
    const DERIVED_TOL: f64 = 1e-4;
}

/// Tolerance pair used across the crate. Both values are configurable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    pub algebraic: T,
    pub derived: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            algebraic: T::algebraic_tol(),
            derived: T::derived_tol(),
        }
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
#[inline]
pub(crate) fn approx_eq_rel<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerances_per_type() {
        let t64 = Tolerances::<f64>::default();
        assert_eq!(t64.algebraic, 1e-12);
        assert_eq!(t64.derived, 1e-9);
        let t32 = Tolerances::<f32>::default();
        assert!(t32.algebraic > f32::EPSILON);
    }

    #[test]
    fn relative_comparison_scales() {
        assert!(approx_eq_rel(1e6, 1e6 + 1e-4, 1e-9));
        assert!(!approx_eq_rel(1.0, 1.0 + 1e-6, 1e-9));
    }
}
