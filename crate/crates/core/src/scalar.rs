//! Scalar abstraction: every numerical routine in this crate is generic over
//! a floating-point type. `f64` is the type the CLI and the experiment suite
//! run on; `f32` compiles and works at correspondingly looser tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar usable throughout the crate.
///
/// Blanket-implemented for any type with the required `num_traits` bounds,
/// in particular `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + Sum<Self>
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Lossy view as `f64` (exact for `f64` itself).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssignOps
        + Sum<T>
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Total-order wrapper for non-NaN scalars, for use in heaps and sorts.
///
/// All distances and lengths in this crate are finite by construction; a NaN
/// here means an internal bug, so comparison panics on NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrdF<S>(pub S);

impl<S: Real> Eq for OrdF<S> {}

impl<S: Real> PartialOrd for OrdF<S> {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Real> Ord for OrdF<S> {
    #[inline]
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("NaN in ordered float comparison")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifts_constants_in_both_widths() {
        assert_eq!(<f64 as Real>::of(0.25), 0.25);
        assert_eq!(<f32 as Real>::of(0.25), 0.25f32);
    }

    #[test]
    fn ord_wrapper_sorts() {
        let mut v = vec![OrdF(3.0f64), OrdF(1.0), OrdF(2.0)];
        v.sort();
        assert_eq!(v[0].0, 1.0);
        assert_eq!(v[2].0, 3.0);
    }
}
