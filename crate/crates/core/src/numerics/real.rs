//! Extended-precision real and complex scalars.
//!
//! [`Real`] is a thin newtype over an MPFR float. Binary operations on two
//! references produce a value at the larger of the two operand precisions;
//! operations with an owned left operand reuse its storage and precision.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Binary mantissa precision shared by every value in one computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    pub const MIN_BITS: u32 = 64;
    pub const DEFAULT_BITS: u32 = 256;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidParameter(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// `2^exp` at this precision.
    pub fn pow2(self, exp: i32) -> Real {
        Real::from_f64(1.0, self).mul_pow2(exp)
    }

    /// Unit roundoff `2^(offset - bits)`, the usual shape of a tolerance.
    pub fn eps_scaled(self, offset: i32) -> Real {
        self.pow2(offset - self.bits as i32)
    }

    /// Significant decimal digits carried by this precision, `ceil(bits * log10 2)`.
    pub fn decimal_digits(self) -> usize {
        (self.bits as f64 * std::f64::consts::LOG10_2).ceil() as usize
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            bits: Self::DEFAULT_BITS,
        }
    }
}

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn from_f64(value: f64, prec: Precision) -> Self {
        Real(Float::with_val(prec.bits(), value))
    }

    pub fn from_int(value: i64, prec: Precision) -> Self {
        Real(Float::with_val(prec.bits(), value))
    }

    pub fn zero(prec: Precision) -> Self {
        Self::from_int(0, prec)
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_int(1, prec)
    }

    pub fn pi(prec: Precision) -> Self {
        Real(Float::with_val(prec.bits(), Constant::Pi))
    }

    /// Parses a decimal literal exactly rounded to the requested precision.
    pub fn parse(text: &str, prec: Precision) -> Result<Self> {
        let parsed = Float::parse(text.trim()).map_err(|e| {
            Error::InvalidParameter(format!("cannot parse `{text}` as a real: {e}"))
        })?;
        Ok(Real(Float::with_val(prec.bits(), parsed)))
    }

    pub fn from_float(value: Float) -> Self {
        Real(value)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn precision(&self) -> Precision {
        Precision {
            bits: self.0.prec(),
        }
    }

    /// Same value re-rounded to another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        Real(Float::with_val(prec.bits(), &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_sign_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    fn unary(&self, f: impl FnOnce(Float) -> Float) -> Real {
        Real(f(self.0.clone()))
    }

    pub fn abs(&self) -> Real {
        self.unary(Float::abs)
    }

    pub fn square(&self) -> Real {
        self.unary(Float::square)
    }

    pub fn sqrt(&self) -> Real {
        self.unary(Float::sqrt)
    }

    pub fn ln(&self) -> Real {
        self.unary(Float::ln)
    }

    pub fn exp(&self) -> Real {
        self.unary(Float::exp)
    }

    pub fn sin(&self) -> Real {
        self.unary(Float::sin)
    }

    pub fn cos(&self) -> Real {
        self.unary(Float::cos)
    }

    pub fn sinh(&self) -> Real {
        self.unary(Float::sinh)
    }

    pub fn cosh(&self) -> Real {
        self.unary(Float::cosh)
    }

    pub fn gamma(&self) -> Real {
        self.unary(Float::gamma)
    }

    pub fn atan2(&self, x: &Real) -> Real {
        Real(self.0.clone().atan2(&x.0))
    }

    pub fn powf(&self, exponent: &Real) -> Real {
        Real(self.0.clone().pow(&exponent.0))
    }

    pub fn powi(&self, exponent: i32) -> Real {
        Real(self.0.clone().pow(exponent))
    }

    /// Exact scaling by `2^exp`.
    pub fn mul_pow2(&self, exp: i32) -> Real {
        Real(self.0.clone() << exp)
    }

    pub fn max_ref<'a>(&'a self, other: &'a Real) -> &'a Real {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Decimal string with `digits` significant digits, never locale- or engine-dependent.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits.max(1)))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(24))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{}", self.to_decimal(digits))
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0.$method(&rhs.0))
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                let prec = self.0.prec().max(rhs.0.prec());
                Real(Float::with_val(prec, (&self.0).$method(&rhs.0)))
            }
        }
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let prec = self.0.prec().max(rhs.0.prec());
                Real(Float::with_val(prec, (&self.0).$method(&rhs.0)))
            }
        }
        impl $trait<f64> for Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                Real(self.0.$method(rhs))
            }
        }
        impl $trait<f64> for &Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                Real(Float::with_val(self.0.prec(), (&self.0).$method(rhs)))
            }
        }
        impl $trait<Real> for f64 {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                let prec = rhs.0.prec();
                Real(Float::with_val(prec, self.$method(&rhs.0)))
            }
        }
        impl $trait<&Real> for f64 {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(Float::with_val(rhs.0.prec(), self.$method(&rhs.0)))
            }
        }
        impl $assign_trait<Real> for Real {
            fn $assign(&mut self, rhs: Real) {
                self.0.$assign(&rhs.0);
            }
        }
        impl $assign_trait<&Real> for Real {
            fn $assign(&mut self, rhs: &Real) {
                self.0.$assign(&rhs.0);
            }
        }
        impl $assign_trait<f64> for Real {
            fn $assign(&mut self, rhs: f64) {
                self.0.$assign(rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl<'a> Sum<&'a Real> for Real {
    /// Panics on an empty iterator: the precision would be unknown.
    fn sum<I: Iterator<Item = &'a Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of empty sequence of reals").clone();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Sum<Real> for Real {
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of empty sequence of reals");
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Complex number with [`Real`] parts. Only the field operations and the few
/// elementary functions needed for pole-avoiding evaluations are provided.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: Real) -> Self {
        let im = Real::zero(re.precision());
        Self { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        Self {
            re: Real::from_f64(re, prec),
            im: Real::from_f64(im, prec),
        }
    }

    pub fn precision(&self) -> Precision {
        self.re.precision()
    }

    pub fn abs(&self) -> Real {
        Real(self.re.0.clone().hypot(&self.im.0))
    }

    pub fn square(&self) -> Complex {
        self * self
    }

    pub fn scale(&self, k: &Real) -> Complex {
        Complex::new(&self.re * k, &self.im * k)
    }

    pub fn recip(&self) -> Complex {
        let den = self.re.square() + self.im.square();
        Complex::new(&self.re / &den, -(&self.im / &den))
    }

    /// `sin(x + iy) = sin x cosh y + i cos x sinh y`.
    pub fn sin(&self) -> Complex {
        Complex::new(
            self.re.sin() * self.im.cosh(),
            self.re.cos() * self.im.sinh(),
        )
    }

    /// Principal branch.
    pub fn ln(&self) -> Complex {
        Complex::new(self.abs().ln(), self.im.atan2(&self.re))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

fn c_add(a: &Complex, b: &Complex) -> Complex {
    Complex::new(&a.re + &b.re, &a.im + &b.im)
}

fn c_sub(a: &Complex, b: &Complex) -> Complex {
    Complex::new(&a.re - &b.re, &a.im - &b.im)
}

fn c_mul(a: &Complex, b: &Complex) -> Complex {
    Complex::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re)
}

fn c_div(a: &Complex, b: &Complex) -> Complex {
    let den = b.re.square() + b.im.square();
    Complex::new(
        (&a.re * &b.re + &a.im * &b.im) / &den,
        (&a.im * &b.re - &a.re * &b.im) / den,
    )
}

macro_rules! complex_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident, $f:ident) => {
        impl $trait<&Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                $f(self, rhs)
            }
        }
        impl $trait<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                $f(&self, &rhs)
            }
        }
        impl $trait<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                $f(&self, rhs)
            }
        }
        impl $trait<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                $f(self, &rhs)
            }
        }
        impl $trait<&Real> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: &Real) -> Complex {
                $f(self, &Complex::from_real(rhs.clone()))
            }
        }
        impl $trait<Real> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Real) -> Complex {
                $f(&self, &Complex::from_real(rhs))
            }
        }
        impl $trait<f64> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: f64) -> Complex {
                $f(self, &Complex::from_f64(rhs, 0.0, self.precision()))
            }
        }
        impl $trait<f64> for Complex {
            type Output = Complex;
            fn $method(self, rhs: f64) -> Complex {
                let prec = self.precision();
                $f(&self, &Complex::from_f64(rhs, 0.0, prec))
            }
        }
        impl $assign_trait<&Complex> for Complex {
            fn $assign(&mut self, rhs: &Complex) {
                *self = $f(self, rhs);
            }
        }
        impl $assign_trait<Complex> for Complex {
            fn $assign(&mut self, rhs: Complex) {
                *self = $f(self, &rhs);
            }
        }
    };
}

complex_binop!(Add, add, AddAssign, add_assign, c_add);
complex_binop!(Sub, sub, SubAssign, sub_assign, c_sub);
complex_binop!(Mul, mul, MulAssign, mul_assign, c_mul);
complex_binop!(Div, div, DivAssign, div_assign, c_div);
