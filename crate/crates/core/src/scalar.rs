//! Scalar abstraction shared by the interval, address, construction and
//! density layers.
//!
//! Everything that is geometry is written once against [`Scalar`]. The exact
//! instantiation is [`Rational`](crate::Rational); `f64`/`f32` instantiations
//! are useful for plotting and quick exploration but certify nothing.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar:
    Num
    + Signed
    + PartialOrd
    + Clone
    + Debug
    + Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// `true` when arithmetic never rounds.
    const EXACT: bool;

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("every scalar type holds small integers")
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_int(numer) / Self::from_int(denom)
    }

    /// `base^exp` for any integer exponent.
    fn powi(base: i64, exp: i64) -> Self {
        let magnitude = usize::try_from(exp.unsigned_abs()).expect("exponent fits in usize");
        let p = num_traits::pow(Self::from_int(base), magnitude);
        if exp < 0 {
            Self::one() / p
        } else {
            p
        }
    }

    fn pow2(exp: i64) -> Self {
        Self::powi(2, exp)
    }

    fn pow10(exp: i64) -> Self {
        Self::powi(10, exp)
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }

    /// Canonical text form; `"p/q"` (or `"p"`) for rationals.
    fn render(&self) -> String {
        self.to_string()
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        s.trim().parse::<Self>().map_err(|_| Error::ParseScalar {
            input: s.to_string(),
        })
    }

    /// Scientific decimal with `sig` significant digits. Advisory only.
    fn to_decimal(&self, sig: usize) -> String;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn parse_scalar(s: &str) -> Result<Self> {
        let t = s.trim();
        // `Ratio::from_str` tolerates a few forms we do not want across the
        // I/O boundary (e.g. "+3"); keep to "[-]p[/q]".
        let well_formed = {
            let body = t.strip_prefix('-').unwrap_or(t);
            let mut pieces = body.splitn(2, '/');
            let numer_ok = pieces
                .next()
                .is_some_and(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
            let denom_ok = pieces
                .next()
                .is_none_or(|q| !q.is_empty() && q.bytes().all(|b| b.is_ascii_digit()));
            numer_ok && denom_ok
        };
        if !well_formed {
            return Err(Error::ParseScalar {
                input: s.to_string(),
            });
        }
        t.parse::<BigRational>().map_err(|_| Error::ParseScalar {
            input: s.to_string(),
        })
    }

    fn to_decimal(&self, sig: usize) -> String {
        rational_to_scientific(self, sig)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_decimal(&self, sig: usize) -> String {
        format!("{:.*e}", sig.saturating_sub(1), self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn to_decimal(&self, sig: usize) -> String {
        format!("{:.*e}", sig.saturating_sub(1), self)
    }
}

pub fn max_of<T: Scalar>(a: &T, b: &T) -> T {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn min_of<T: Scalar>(a: &T, b: &T) -> T {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Total order for sorting; incomparable values (NaN) sort as equal.
pub fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn pow10_int(e: u64) -> BigInt {
    num_traits::pow(BigInt::from(10u8), e as usize)
}

/// Formats like `{:.Ne}` on floats, but from the exact value.
fn rational_to_scientific(q: &BigRational, sig: usize) -> String {
    let sig = sig.max(1);
    if q.is_zero() {
        return format!("{:.*e}", sig - 1, 0.0f64);
    }
    let num = q.numer().abs();
    let den = q.denom().clone();

    // scaled(e) = (num * 10^-e, den * 10^e) with only non-negative powers
    let scaled = |e: i64| -> (BigInt, BigInt) {
        if e >= 0 {
            (num.clone(), &den * pow10_int(e as u64))
        } else {
            (&num * pow10_int(e.unsigned_abs()), den.clone())
        }
    };

    let mut exp = num.to_string().len() as i64 - den.to_string().len() as i64;
    loop {
        let (n, d) = scaled(exp);
        if n < d {
            exp -= 1;
            continue;
        }
        let (n, d) = scaled(exp + 1);
        if n >= d {
            exp += 1;
            continue;
        }
        break;
    }

    // mantissa digits = round(|q| * 10^(sig-1-exp)), half away from zero
    let shift = sig as i64 - 1 - exp;
    let (n, d) = if shift >= 0 {
        (&num * pow10_int(shift as u64), den.clone())
    } else {
        (num.clone(), &den * pow10_int(shift.unsigned_abs()))
    };
    let two = BigInt::from(2u8);
    let mut digits = (&n * &two + &d) / (&d * &two);
    if digits >= pow10_int(sig as u64) {
        digits /= BigInt::from(10u8);
        exp += 1;
    }
    let text = digits.to_string();
    let sign = if q.is_negative() { "-" } else { "" };
    if sig == 1 {
        format!("{sign}{text}e{exp}")
    } else {
        format!("{sign}{}.{}e{exp}", &text[..1], &text[1..])
    }
}
