//! Exact complex scalars with rational real and imaginary parts.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Scalar = Complex<Rational>;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn real(num: i64, den: i64) -> Scalar {
    Scalar::new(rat(num, den), Rational::zero())
}

pub fn from_real(r: Rational) -> Scalar {
    Scalar::new(r, Rational::zero())
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// `|z|^2` as an exact rational.
pub fn abs_sq(z: &Scalar) -> Rational {
    &z.re * &z.re + &z.im * &z.im
}

pub fn is_real(z: &Scalar) -> bool {
    z.im.is_zero()
}

/// Builds a scalar from the `[re_num, re_den, im_num, im_den]` wire form.
pub fn from_parts(parts: [i64; 4]) -> Result<Scalar> {
    if parts[1] == 0 || parts[3] == 0 {
        return Err(Error::InvalidScenario(format!("zero denominator in scalar {parts:?}")));
    }
    Ok(Scalar::new(rat(parts[0], parts[1]), rat(parts[2], parts[3])))
}

fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text form: `3/4`, `-1/2i`, `1/3+2i`, `0`.
pub fn format(z: &Scalar) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => fmt_rational(&z.re),
        (true, false) => format!("{}i", fmt_rational(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { "-" } else { "+" };
            format!("{}{}{}i", fmt_rational(&z.re), sign, fmt_rational(&z.im.abs()))
        }
    }
}

fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(text.parse().ok()?)),
    }
}

/// Inverse of [`format`].
pub fn parse(text: &str) -> Result<Scalar> {
    let bad = || Error::InvalidScenario(format!("cannot parse scalar {text:?}"));
    let t = text.trim();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(from_real(parse_rational(t).ok_or_else(bad)?));
    };
    // split at the last sign that is not the leading one
    let split = body
        .char_indices()
        .skip(1)
        .filter(|(_, c)| *c == '+' || *c == '-')
        .map(|(i, _)| i)
        .last();
    match split {
        Some(at) => {
            let re = parse_rational(&body[..at]).ok_or_else(bad)?;
            let im = parse_rational(body[at..].trim_start_matches('+')).ok_or_else(bad)?;
            Ok(Scalar::new(re, im))
        }
        None => {
            let im = if body.is_empty() || body == "+" {
                Rational::one()
            } else if body == "-" {
                -Rational::one()
            } else {
                parse_rational(body).ok_or_else(bad)?
            };
            Ok(Scalar::new(Rational::zero(), im))
        }
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact square root of a nonnegative rational, when it is itself rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

pub fn pow(z: &Scalar, n: u32) -> Scalar {
    let mut acc = one();
    for _ in 0..n {
        acc *= z;
    }
    acc
}

/// Serde adapters writing scalars in their [`format`] text form.
pub mod text {
    use super::Scalar;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(z))
    }

    pub mod option {
        use super::Scalar;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(z: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
            match z {
                Some(z) => s.serialize_some(&super::super::format(z)),
                None => s.serialize_none(),
            }
        }
    }
}

pub fn rational_text(r: &Rational) -> String {
    fmt_rational(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse_agree() {
        let cases = [
            real(3, 4),
            real(-5, 1),
            zero(),
            Scalar::new(rat(1, 3), rat(2, 1)),
            Scalar::new(rat(-1, 3), rat(-2, 7)),
            Scalar::new(int(0), rat(-1, 2)),
        ];
        for z in cases {
            let text = format(&z);
            assert_eq!(parse(&text).unwrap(), z, "{text}");
        }
        assert_eq!(format(&real(1, 10)), "1/10");
        assert_eq!(format(&Scalar::new(int(1), int(-1))), "1-1i");
    }

    #[test]
    fn wire_parts() {
        assert_eq!(from_parts([1, 10, 0, 1]).unwrap(), real(1, 10));
        assert!(from_parts([1, 0, 0, 1]).is_err());
    }

    #[test]
    fn sqrt_of_squares_only() {
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
        assert_eq!(rational_sqrt(&rat(-1, 1)), None);
    }
}
