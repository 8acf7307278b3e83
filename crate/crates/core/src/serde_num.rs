//! Serde adapters for big numbers: integers and rationals as decimal
//! strings, floats as their exact decimal expansion plus precision.

use rug::{Float, Integer, Rational};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytic::{exact_decimal, float_from_exact_decimal};

#[derive(Serialize, Deserialize)]
struct FloatRepr {
    precision: u32,
    value: String,
}

fn float_repr(x: &Float) -> FloatRepr {
    FloatRepr {
        precision: x.prec(),
        value: exact_decimal(x),
    }
}

fn float_back<E: serde::de::Error>(r: FloatRepr) -> Result<Float, E> {
    float_from_exact_decimal(&r.value, r.precision)
        .ok_or_else(|| E::custom(format!("{} is not exact at {} bits", r.value, r.precision)))
}

fn parse_int<E: serde::de::Error>(s: &str) -> Result<Integer, E> {
    Integer::from_str_radix(s, 10).map_err(E::custom)
}

pub mod integer {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Integer, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        parse_int(&String::deserialize(d)?)
    }
}

pub mod integer_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[Integer], s: S) -> Result<S::Ok, S::Error> {
        x.iter()
            .map(Integer::to_string)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Integer>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_int(s))
            .collect()
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        Rational::from_str_radix(&s, 10).map_err(D::Error::custom)
    }
}

pub mod float {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Float, s: S) -> Result<S::Ok, S::Error> {
        float_repr(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Float, D::Error> {
        float_back(FloatRepr::deserialize(d)?)
    }
}

pub mod float_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[Float], s: S) -> Result<S::Ok, S::Error> {
        x.iter().map(float_repr).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Float>, D::Error> {
        Vec::<FloatRepr>::deserialize(d)?
            .into_iter()
            .map(float_back)
            .collect()
    }
}

pub mod float_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Float>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(float_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Float>, D::Error> {
        Option::<FloatRepr>::deserialize(d)?
            .map(float_back)
            .transpose()
    }
}
