//! Scalar abstractions.
//!
//! Field math is generic over a real floating type `R: Real` (`f32` or
//! `f64`). Matrices additionally admit complex entries so that group
//! elements can live in an anti-Hermitian representation; those entries are
//! described by [`Scalar`].

use core::fmt::{Debug, Display};
use core::iter::Sum;
use core::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::Serialize;

/// Real floating point type used for all field values: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + Scalar<Real = Self>
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values at all, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Ceiling on the 1-norm condition number of any matrix we invert.
    ///
    /// `1e12` in double precision; capped at `0.01 / eps` for narrower
    /// types so the ceiling stays meaningful.
    fn cond_limit() -> Self {
        let cap = Self::lit(0.01) / Self::epsilon();
        Self::lit(1e12).min(cap)
    }

    /// Absolute tolerance for exact-arithmetic identities on unit-normalized
    /// entries: `1e-12`, widened for narrow types.
    fn identity_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix entry type: a real [`Real`] or a `Complex<R>`.
pub trait Scalar: Copy + NumAssign + Neg<Output = Self> + Debug + Send + Sync + 'static {
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;

    /// Absolute value (modulus for complex entries).
    fn modulus(self) -> Self::Real;

    fn is_finite_entry(self) -> bool;

    fn conjugate(self) -> Self;

    /// Real part, `self` for real scalars.
    fn real_part(self) -> Self::Real;
}

macro_rules! impl_real_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            type Real = $t;
            #[inline]
            fn from_real(r: $t) -> Self { r }
            #[inline]
            fn modulus(self) -> $t { self.abs() }
            #[inline]
            fn is_finite_entry(self) -> bool { <$t>::is_finite(self) }
            #[inline]
            fn conjugate(self) -> Self { self }
            #[inline]
            fn real_part(self) -> $t { self }
        }
    )*};
}

impl_real_scalar!(f32, f64);

impl<R: Real> Scalar for Complex<R> {
    type Real = R;
    #[inline]
    fn from_real(r: R) -> Self {
        Complex::new(r, R::zero())
    }
    #[inline]
    fn modulus(self) -> R {
        self.norm()
    }
    #[inline]
    fn is_finite_entry(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn conjugate(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn real_part(self) -> R {
        self.re
    }
}
