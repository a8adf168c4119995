//! Serde adapters for values JSON cannot carry natively.
//!
//! Infinite reals are written as the strings `"inf"` / `"-inf"`, and
//! arbitrary-precision integers as numbers when they fit in a `u64`,
//! otherwise as decimal strings.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Num(f64),
    Text(String),
}

pub fn real_to_json(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        serde_json::json!("nan")
    } else if x > 0.0 {
        serde_json::json!("inf")
    } else {
        serde_json::json!("-inf")
    }
}

fn real_from_repr<E: de::Error>(r: RealRepr) -> Result<f64, E> {
    match r {
        RealRepr::Num(x) => Ok(x),
        RealRepr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(E::custom(format!("invalid real `{s}`"))),
        },
    }
}

pub mod ext_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        real_to_json(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        real_from_repr(RealRepr::deserialize(d)?)
    }
}

pub mod ext_f64_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|&x| real_to_json(x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<RealRepr>::deserialize(d)?
            .into_iter()
            .map(real_from_repr)
            .collect()
    }
}

pub fn big_to_json(x: &BigUint) -> serde_json::Value {
    match x.to_u64() {
        Some(v) => serde_json::json!(v),
        None => serde_json::json!(x.to_string()),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BigRepr {
    Num(u64),
    Text(String),
}

fn big_from_repr<E: de::Error>(r: BigRepr) -> Result<BigUint, E> {
    match r {
        BigRepr::Num(v) => Ok(BigUint::from(v)),
        BigRepr::Text(s) => s
            .parse()
            .map_err(|_| E::custom(format!("invalid integer `{s}`"))),
    }
}

pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        big_to_json(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        big_from_repr(BigRepr::deserialize(d)?)
    }
}

pub mod big_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(big_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<BigRepr>::deserialize(d)?
            .into_iter()
            .map(big_from_repr)
            .collect()
    }
}

pub mod big_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[(BigUint, BigUint)], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|(a, b)| [big_to_json(a), big_to_json(b)])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<(BigUint, BigUint)>, D::Error> {
        Vec::<(BigRepr, BigRepr)>::deserialize(d)?
            .into_iter()
            .map(|(a, b)| Ok((big_from_repr(a)?, big_from_repr(b)?)))
            .collect()
    }
}
