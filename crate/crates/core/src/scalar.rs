//! Ground-field scalars.
//!
//! Geometry code is generic over [`Field`]; the closed [`Scalar`] union is the
//! dynamically tagged form used at I/O boundaries, where mixing variants is
//! rejected instead of promoted.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numberfield::FieldElement;

/// Default tolerance for float comparisons (projective and metric).
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("mixed scalar variants: {0} with {1}")]
    MixedVariant(&'static str, &'static str),
    #[error("elements of different number fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
}

/// Arithmetic needed by the Möbius and circle code.
///
/// Constants are produced from an existing element (`zero_like`, `one_like`)
/// because number-field elements carry their field.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, n: i64) -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
    /// Exact zero test for exact fields, `|x| <= tol` for floats.
    fn is_zero_tol(&self, tol: f64) -> bool;
    /// Whether arithmetic is exact (no rounding).
    fn is_exact(&self) -> bool;
    /// Numeric value under the default complex embedding.
    fn to_complex(&self) -> Complex64;
    /// Complex conjugation, when the field is closed under it.
    fn conj(&self) -> Option<Self>;

    /// A nonzero `y` with `conj(y) = -y`, when the field has one.
    fn pure_imaginary_like(&self) -> Option<Self> {
        None
    }

    fn divide(&self, rhs: &Self) -> Option<Self> {
        rhs.inverse().map(|r| self.times(&r))
    }

    fn magnitude_hint(&self) -> f64 {
        self.to_complex().norm()
    }
}

impl Field for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_int_like(&self, n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        if self.norm_sqr() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn is_zero_tol(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn pure_imaginary_like(&self) -> Option<Self> {
        Some(Complex64::new(0.0, 1.0))
    }
    fn conj(&self) -> Option<Self> {
        Some(Complex64::conj(self))
    }
}

impl Field for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn from_int_like(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(self), 0.0)
    }
    fn conj(&self) -> Option<Self> {
        Some(self.clone())
    }
}

/// `a + b i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl Field for GaussRat {
    fn zero_like(&self) -> Self {
        GaussRat::from_ints(0, 0)
    }
    fn one_like(&self) -> Self {
        GaussRat::from_ints(1, 0)
    }
    fn from_int_like(&self, n: i64) -> Self {
        GaussRat::from_ints(n, 0)
    }
    fn plus(&self, rhs: &Self) -> Self {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
    fn minus(&self, rhs: &Self) -> Self {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
    fn times(&self, rhs: &Self) -> Self {
        GaussRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
    fn negated(&self) -> Self {
        GaussRat::new(-&self.re, -&self.im)
    }
    fn inverse(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(GaussRat::new(&self.re / &n, -&self.im / &n))
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn pure_imaginary_like(&self) -> Option<Self> {
        Some(GaussRat::from_ints(0, 1))
    }
    fn conj(&self) -> Option<Self> {
        Some(GaussRat::new(self.re.clone(), -&self.im))
    }
}

/// Rational to f64 that survives numerators and denominators beyond f64 range.
pub fn rat_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    // scale to ~60 significant bits on each side before dividing
    let n_shift = (nb - 60).max(0);
    let d_shift = (db - 60).max(0);
    let n = (q.numer().abs() >> n_shift as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> d_shift as usize).to_f64().unwrap_or(1.0);
    let mant = n / d;
    let exp = n_shift - d_shift;
    let v = mant * 2f64.powi(exp.clamp(-2000, 2000) as i32);
    if q.is_negative() {
        -v
    } else {
        v
    }
}

/// The closed scalar union. Arithmetic between different variants fails.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Gaussian(GaussRat),
    NumberField(FieldElement),
    Complex { value: Complex64, tol: f64 },
}

impl Scalar {
    pub fn complex(value: Complex64) -> Self {
        Scalar::Complex {
            value,
            tol: DEFAULT_TOL,
        }
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Scalar::Rational(BigRational::new(n.into(), d.into()))
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Scalar::Rational(_) => "rational",
            Scalar::Gaussian(_) => "gaussian",
            Scalar::NumberField(_) => "number-field",
            Scalar::Complex { .. } => "complex",
        }
    }

    pub fn try_add(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.combine(rhs, |a, b| a.plus(b), |a, b| a.plus(b), |a, b| a.plus(b), |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.combine(rhs, |a, b| a.minus(b), |a, b| a.minus(b), |a, b| a.minus(b), |a, b| a - b)
    }

    pub fn try_mul(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.combine(rhs, |a, b| a.times(b), |a, b| a.times(b), |a, b| a.times(b), |a, b| a * b)
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        let inv = rhs.try_inverse()?;
        self.try_mul(&inv)
    }

    pub fn try_inverse(&self) -> Result<Scalar, ScalarError> {
        let out = match self {
            Scalar::Rational(q) => q.inverse().map(Scalar::Rational),
            Scalar::Gaussian(g) => g.inverse().map(Scalar::Gaussian),
            Scalar::NumberField(x) => x.inverse().map(Scalar::NumberField),
            Scalar::Complex { value, tol } => value
                .inverse()
                .map(|v| Scalar::Complex { value: v, tol: *tol }),
        };
        out.ok_or(ScalarError::DivisionByZero)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Gaussian(g) => g.is_zero_tol(0.0),
            Scalar::NumberField(x) => x.is_zero(),
            Scalar::Complex { value, tol } => value.norm() <= *tol,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Rational(q) => q.to_complex(),
            Scalar::Gaussian(g) => g.to_complex(),
            Scalar::NumberField(x) => x.to_complex(),
            Scalar::Complex { value, .. } => *value,
        }
    }

    fn combine(
        &self,
        rhs: &Scalar,
        fq: impl Fn(&BigRational, &BigRational) -> BigRational,
        fg: impl Fn(&GaussRat, &GaussRat) -> GaussRat,
        fn_: impl Fn(&FieldElement, &FieldElement) -> FieldElement,
        fc: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(fq(a, b))),
            (Scalar::Gaussian(a), Scalar::Gaussian(b)) => Ok(Scalar::Gaussian(fg(a, b))),
            (Scalar::NumberField(a), Scalar::NumberField(b)) => {
                if !a.same_field(b) {
                    return Err(ScalarError::FieldMismatch);
                }
                Ok(Scalar::NumberField(fn_(a, b)))
            }
            (Scalar::Complex { value: a, tol }, Scalar::Complex { value: b, tol: tb }) => {
                Ok(Scalar::Complex {
                    value: fc(*a, *b),
                    tol: tol.max(*tb),
                })
            }
            _ => Err(ScalarError::MixedVariant(
                self.variant_name(),
                rhs.variant_name(),
            )),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{q}"),
            Scalar::Gaussian(g) => write!(f, "{}+{}i", g.re, g.im),
            Scalar::NumberField(x) => write!(f, "{x}"),
            Scalar::Complex { value, .. } => write!(f, "{value}"),
        }
    }
}
