//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar the geometry is generic over.
///
/// Implemented for `f32` and `f64`. The two dense-eigenvalue hooks are routed
/// through `nalgebra` per concrete type so that the generic code only ever sees
/// the `num-traits` method set.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance used when callers do not supply one.
    fn default_rel_tol() -> Self;
    /// Absolute floor used when callers do not supply one.
    fn default_abs_tol() -> Self;
    /// Eigenvalues of a dense square matrix given row-major.
    fn eigenvalues(n: usize, row_major: &[Self]) -> Vec<Complex<Self>>;

    /// Converts an `f64` literal. Panics only for values not representable at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $rel:expr, $abs:expr) => {
        impl Real for $t {
            #[inline]
            fn default_rel_tol() -> Self {
                $rel
            }
            #[inline]
            fn default_abs_tol() -> Self {
                $abs
            }
            fn eigenvalues(n: usize, row_major: &[Self]) -> Vec<Complex<Self>> {
                assert_eq!(row_major.len(), n * n);
                if n == 0 {
                    return Vec::new();
                }
                let m = nalgebra::DMatrix::<$t>::from_row_slice(n, n, row_major);
                m.complex_eigenvalues().iter().map(|z| Complex::new(z.re, z.im)).collect()
            }
        }
    };
}

impl_real!(f64, 1e-9, 1e-12);
impl_real!(f32, 1e-4, 1e-6);

/// Relative tolerance with an absolute floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol<T> {
    pub rel: T,
    pub abs: T,
}

impl<T: Real> Default for Tol<T> {
    fn default() -> Self {
        Tol { rel: T::default_rel_tol(), abs: T::default_abs_tol() }
    }
}

impl<T: Real> Tol<T> {
    pub fn new(rel: T, abs: T) -> Self {
        Tol { rel, abs }
    }

    /// Same tolerance with the relative part replaced; the floor scales along.
    pub fn with_rel(rel: T) -> Self {
        let d = Self::default();
        Tol { rel, abs: d.abs * rel / d.rel }
    }

    /// `|x| <= abs + rel * scale`.
    #[inline]
    pub fn small(&self, x: T, scale: T) -> bool {
        x.abs() <= self.abs + self.rel * scale.abs()
    }

    /// `|a - b| <= abs + rel * max(|a|, |b|)`.
    #[inline]
    pub fn close(&self, a: T, b: T) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }

    /// Residual normalised so that `<= rel` means pass.
    #[inline]
    pub fn normalized(&self, x: T, scale: T) -> T {
        x.abs() / (self.abs / self.rel + scale.abs())
    }

    /// Tolerance loosened by `factor`, for checks that compound several operations.
    pub fn scaled(&self, factor: T) -> Self {
        Tol { rel: self.rel * factor, abs: self.abs * factor }
    }
}
