//! Scalar abstraction shared by the exact and floating polynomial backends.
//!
//! The quartic algebra is generic over a field: `BigRational` gives exact
//! verification of the determinantal identities, `Complex64` carries the
//! analytic reconstruction.  `near_zero` is the only place the two differ in
//! spirit: rationals compare exactly and ignore the tolerance, floats compare
//! against it.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_int(n: i64) -> Self;

    /// A float proxy for the magnitude, used only to pick pivots and to
    /// normalize tolerances.  It never feeds back into exact arithmetic.
    fn approx_abs(&self) -> f64;

    /// Exact zero test for rationals (the tolerance is ignored), `|x| <= tol`
    /// for floats.
    fn near_zero(&self, tol: f64) -> bool;

    /// Parse from a token stream: one token `p/q` (or a plain integer) for
    /// rationals, two tokens `re im` for complex floats.
    fn parse_tokens<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<Self, String>;

    /// Inverse of `parse_tokens`; round-trips exactly for rationals and to
    /// full f64 precision for complex floats.
    fn format_tokens(&self) -> String;
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn approx_abs(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        match self.to_f64() {
            Some(v) if v.is_finite() && v != 0.0 => v.abs(),
            _ => {
                // numerator and denominator both overflow f64: order by bit length
                let shift = self.numer().bits() as i64 - self.denom().bits() as i64;
                if shift >= 0 {
                    f64::MAX
                } else {
                    f64::MIN_POSITIVE
                }
            }
        }
    }

    fn near_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn parse_tokens<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<Self, String> {
        let tok = tokens.next().ok_or("missing rational token")?;
        BigRational::from_str(tok).map_err(|e| format!("bad rational {tok:?}: {e}"))
    }

    fn format_tokens(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for Complex64 {
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn approx_abs(&self) -> f64 {
        self.norm()
    }

    fn near_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn parse_tokens<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<Self, String> {
        let re = tokens.next().ok_or("missing real part")?;
        let im = tokens.next().ok_or("missing imaginary part")?;
        let re = f64::from_str(re).map_err(|e| format!("bad real part {re:?}: {e}"))?;
        let im = f64::from_str(im).map_err(|e| format!("bad imaginary part {im:?}: {e}"))?;
        Ok(Complex64::new(re, im))
    }

    fn format_tokens(&self) -> String {
        format!("{:.17e} {:.17e}", self.re, self.im)
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)` for floats; exact equality for
/// rationals.
pub fn close<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    let scale = 1f64.max(a.approx_abs()).max(b.approx_abs());
    (a.clone() - b.clone()).near_zero(tol * scale)
}

/// Signed magnitude of a rational used in messages; keeps exactness out of
/// the picture for floats.
pub fn rel_err<S: Scalar>(a: &S, b: &S) -> f64 {
    let diff = (a.clone() - b.clone()).approx_abs();
    let scale = 1f64.max(a.approx_abs()).max(b.approx_abs());
    diff / scale
}
