//! Serde adapters that write exact integers and rationals as decimal strings,
//! so values beyond 2^53 survive JSON round trips.

use std::fmt::Display;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

/// Any `Display + FromStr` value as a JSON string.
pub mod display {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(D::Error::custom)
    }
}

/// Renders a rational as `"p/q"`, always with an explicit denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(raw: &str) -> Result<BigRational, String> {
    let (p, q) = raw
        .split_once('/')
        .ok_or_else(|| format!("expected p/q, got {raw:?}"))?;
    let p: BigInt = p.trim().parse().map_err(|e| format!("{e}"))?;
    let q: BigInt = q.trim().parse().map_err(|e| format!("{e}"))?;
    if q == BigInt::from(0) {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(p, q))
}

/// A `BigRational` as a `"p/q"` string.
pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(D::Error::custom)
    }
}
