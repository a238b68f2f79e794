//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Machine epsilon of the type.
    fn epsilon() -> Self;

    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal is representable")
    }

    /// Tolerance `spec`, floored at a small multiple of machine epsilon so
    /// thresholds stated for double precision stay meaningful in `f32`.
    fn tol(spec: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        let t = Self::lit(spec);
        if t > floor {
            t
        } else {
            floor
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

pub type C<R> = Complex<R>;
pub type CMatrix<R> = DMatrix<Complex<R>>;
pub type RVector<R> = DVector<R>;

#[inline]
pub fn c<R: Real>(re: R, im: R) -> C<R> {
    Complex::new(re, im)
}

/// `re + i·im` from `f64` parts.
#[inline]
pub fn cf<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(R::lit(re), R::lit(im))
}

#[inline]
pub fn cr<R: Real>(re: R) -> C<R> {
    Complex::new(re, R::zero())
}

/// The imaginary unit.
#[inline]
pub fn imag<R: Real>() -> C<R> {
    Complex::new(R::zero(), R::one())
}
