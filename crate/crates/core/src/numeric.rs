//! Exact arithmetic shared by every module: rationals, the accuracy
//! parameter and integer powers of `1 + eps`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used for weights, ratios and augmentation factors.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("cannot parse rational `{0}`")]
    Parse(String),
    #[error("epsilon must be 1/k for a positive integer k, got {0}")]
    NotReciprocal(String),
    #[error("epsilon {got} outside the allowed range (0, {max}]")]
    EpsilonRange { got: String, max: String },
    #[error("value does not fit the integer range: {0}")]
    Overflow(String),
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"3"`, `"3/2"` or `"-1/4"`.
pub fn parse_rational(s: &str) -> Result<Rational, NumericError> {
    let s = s.trim();
    let err = || NumericError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Numerator and denominator as `i128`, if they fit.
pub fn to_i128_pair(r: &Rational) -> Result<(i128, i128), NumericError> {
    let n = r.numer().to_i128();
    let d = r.denom().to_i128();
    match (n, d) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(NumericError::Overflow(format_rational(r))),
    }
}

/// Common-denominator integer image of a list of rationals: returns
/// `(scaled, denominator)` with `values[i] == scaled[i] / denominator`.
pub fn common_scale(values: &[Rational]) -> Result<(Vec<i128>, BigInt), NumericError> {
    let mut den = BigInt::one();
    for v in values {
        den = den.lcm(v.denom());
    }
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let scaled = v.numer() * (&den / v.denom());
        out.push(
            scaled
                .to_i128()
                .ok_or_else(|| NumericError::Overflow(scaled.to_string()))?,
        );
    }
    Ok((out, den))
}

/// The accuracy parameter, always of the form `1/k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Epsilon {
    k: u64,
}

impl Epsilon {
    pub fn reciprocal(k: u64) -> Result<Self, NumericError> {
        if k == 0 {
            return Err(NumericError::NotReciprocal("1/0".into()));
        }
        Ok(Self { k })
    }

    pub fn from_rational(r: &Rational) -> Result<Self, NumericError> {
        if !r.is_positive() || !r.numer().is_one() {
            return Err(NumericError::NotReciprocal(format_rational(r)));
        }
        let k = r
            .denom()
            .to_u64()
            .ok_or_else(|| NumericError::NotReciprocal(format_rational(r)))?;
        Self::reciprocal(k)
    }

    /// `1/eps`.
    pub fn inverse(&self) -> u64 {
        self.k
    }

    pub fn value(&self) -> Rational {
        rational(1, self.k as i64)
    }

    /// `1 + eps` as an exact rational.
    pub fn base(&self) -> Rational {
        rational(self.k as i64 + 1, self.k as i64)
    }

    /// Errors unless `eps <= 1/min_inverse`.
    pub fn ensure_at_most(&self, min_inverse: u64) -> Result<(), NumericError> {
        if self.k < min_inverse {
            return Err(NumericError::EpsilonRange {
                got: self.to_string(),
                max: format!("1/{min_inverse}"),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.k)
    }
}

impl FromStr for Epsilon {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Epsilon::from_rational(&parse_rational(s)?)
    }
}

/// `(1 + eps)^t` exactly.
pub fn power_of_base(eps: Epsilon, t: u32) -> Rational {
    let k = BigInt::from(eps.inverse());
    let num = num_traits::pow(&k + 1u32, t as usize);
    let den = num_traits::pow(k, t as usize);
    Rational::new(num, den)
}

/// Largest `(1 + eps)^t <= value` for `value >= 1`, with its exponent.
pub fn floor_power(eps: Epsilon, value: &Rational) -> (u32, Rational) {
    assert!(value >= &Rational::one(), "floor_power needs value >= 1");
    let base = eps.base();
    let mut t = 0u32;
    let mut cur = Rational::one();
    loop {
        let next = &cur * &base;
        if &next > value {
            return (t, cur);
        }
        cur = next;
        t += 1;
    }
}

/// The integer grid `c_t = ceil((1 + eps)^t)`; returns the least `c_t >= d`.
///
/// Integer demands can only sit on this grid, and for every `d >= 1` the
/// chosen value satisfies `d <= c_t <= (1 + eps) d`.
pub fn ceil_power_at_least(eps: Epsilon, d: u64) -> u64 {
    if d <= 1 {
        return 1;
    }
    let k = BigUint::from(eps.inverse());
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let target = BigUint::from(d);
    loop {
        let (q, r) = num.div_rem(&den);
        let c = if r.is_zero() { q } else { q + 1u32 };
        if c >= target {
            return c.to_u64().expect("grid value bounded by 2d");
        }
        num *= &k + 1u32;
        den *= &k;
    }
}

/// Exact comparison `count <= log_{1+eps}(bound) + 1`, i.e.
/// `(1 + eps)^(count - 1) <= bound`.
pub fn count_within_log_bound(eps: Epsilon, count: u64, bound: &Rational) -> bool {
    if count == 0 {
        return true;
    }
    power_of_base(eps, (count - 1) as u32) <= *bound
}
