use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed};

/// Coefficient and matrix-entry type.
///
/// All algorithms in this crate are written against this trait, so the same
/// code runs over any field-like scalar. Zero tests and equality are taken at
/// face value, which makes every result exact when the scalar is exact; the
/// crate-level alias [`crate::Rat`] (arbitrary-precision rationals) is the
/// instantiation used by the CLI and by every certificate format. `f32`/`f64`
/// also satisfy the bounds for quick approximate experiments.
pub trait Scalar:
    Num + Signed + FromPrimitive + FromStr + Clone + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Num + Signed + FromPrimitive + FromStr + Clone + Debug + Display + Send + Sync + 'static
{
}

/// Converts a small integer into a scalar. Panics only if the scalar type
/// cannot represent the value, which cannot happen for the types this crate
/// is instantiated with.
pub(crate) fn from_i64<S: Scalar>(v: i64) -> S {
    S::from_i64(v).expect("scalar type must represent small integers")
}
