//! Serde adapters that write `BigInt` as an exact JSON integer and read it
//! back only from integer literals.
//!
//! Relies on serde_json's `arbitrary_precision` number representation, so
//! values of any size round-trip without going through `f64`.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Number;

/// Borrowed integer that serializes as a JSON number.
pub struct Int<'a>(pub &'a BigInt);

impl Serialize for Int<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = Number::from_str(&self.0.to_string()).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

/// Owned integer that deserializes from a JSON integer literal.
pub struct OwnedInt(pub BigInt);

impl<'de> Deserialize<'de> for OwnedInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = Number::deserialize(d)?;
        let text = n.to_string();
        if text.contains(['.', 'e', 'E']) {
            return Err(D::Error::custom(format!("expected an integer, found {text}")));
        }
        BigInt::from_str(&text)
            .map(OwnedInt)
            .map_err(|_| D::Error::custom(format!("expected an integer, found {text}")))
    }
}

pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    Int(x).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    OwnedInt::deserialize(d).map(|x| x.0)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(Int))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Ok(Vec::<OwnedInt>::deserialize(d)?.into_iter().map(|x| x.0).collect())
    }
}

pub mod rows {
    use super::*;

    struct Row<'a>(&'a [BigInt]);

    impl Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::vec::serialize(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(rows: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rows.iter().map(|r| Row(r)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Ok(Vec::<Vec<OwnedInt>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.0).collect())
            .collect())
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(Int).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Ok(Option::<OwnedInt>::deserialize(d)?.map(|x| x.0))
    }
}

/// Converts an integer into a `serde_json::Value` without loss.
pub fn to_value(x: &BigInt) -> serde_json::Value {
    serde_json::Value::Number(Number::from_str(&x.to_string()).expect("integer literal"))
}
