//! Exact rational helpers.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Q = num_rational::BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"7"`, `"-3"` or `"p/q"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    match t.split_once('/') {
        None => t.parse::<BigInt>().map(Q::from_integer).map_err(|_| bad()),
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
    }
}

/// Lossy conversion used only by the simulator and reports.
pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn sum<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Q {
    xs.into_iter().fold(Q::zero(), |acc, x| acc + x)
}

/// Largest `g` such that every entry is an integer multiple of `g`.
///
/// Denominators are cleared with their LCM, the integer GCD is taken and
/// the result is scaled back. Zero entries are ignored; an all-zero input
/// has no such `g`.
pub fn gcd_combined<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Result<Q> {
    let xs: Vec<&Q> = xs.into_iter().collect();
    let lcm = xs.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let mut g = BigInt::zero();
    for x in &xs {
        let scaled = x.numer().abs() * (&lcm / x.denom());
        g = g.gcd(&scaled);
    }
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(Q::new(g, lcm))
}

/// Common denominator of a list: every entry times the result is integral.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

pub fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

/// Serialises as a JSON integer when integral and small, else `"p/q"`.
pub fn to_json(x: &Q) -> serde_json::Value {
    use num_traits::ToPrimitive;
    if x.is_integer() {
        if let Some(v) = x.numer().to_i64() {
            return serde_json::Value::from(v);
        }
    }
    serde_json::Value::String(x.to_string())
}

pub fn from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(q(i)),
            None => Err(Error::ParseRational(n.to_string())),
        },
        serde_json::Value::String(s) => parse_q(s),
        other => Err(Error::ParseRational(other.to_string())),
    }
}

/// `serde(with = ...)` adaptor for a single rational.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_json(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// `serde(with = ...)` adaptor for a vector of rationals.
pub mod serde_qvec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        xs.iter().map(to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let vs = Vec::<serde_json::Value>::deserialize(d)?;
        vs.iter()
            .map(|v| from_json(v).map_err(serde::de::Error::custom))
            .collect()
    }
}
