//! Floating-point values as they appear in emitted documents.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Significant digits kept in every emitted float.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// An `f64` written with [`SIGNIFICANT_DIGITS`] significant digits.
/// Infinities and NaN are written as the strings `"inf"`, `"-inf"` and
/// `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Real {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

/// Rounds `v` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_nan() {
            f.write_str("nan")
        } else if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{}", round_significant(self.0))
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(round_significant(self.0))
        } else {
            s.collect_str(self)
        }
    }
}

struct RealVisitor;

impl Visitor<'_> for RealVisitor {
    type Value = Real;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
        Ok(Real(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
        match v {
            "inf" => Ok(Real(f64::INFINITY)),
            "-inf" => Ok(Real(f64::NEG_INFINITY)),
            "nan" => Ok(Real(f64::NAN)),
            other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Real, D::Error> {
        d.deserialize_any(RealVisitor)
    }
}

/// Logarithm base for emitted log-scale quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn from_bits_flag(bits: bool) -> Self {
        if bits {
            Units::Bits
        } else {
            Units::Nats
        }
    }

    /// Converts a natural-log quantity.
    pub fn log(self, nats: f64) -> Real {
        match self {
            Units::Nats => Real(nats),
            Units::Bits => Real(nats / std::f64::consts::LN_2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(
            round_significant(0.069_336_464_195_073_91),
            0.069_336_464_195_1
        );
        assert_eq!(round_significant(1.0), 1.0);
        assert_eq!(
            serde_json::to_string(&Real(1.0 / 3.0)).unwrap(),
            "0.333333333333"
        );
    }

    #[test]
    fn non_finite_round_trip() {
        for v in [f64::INFINITY, f64::NEG_INFINITY] {
            let s = serde_json::to_string(&Real(v)).unwrap();
            assert_eq!(serde_json::from_str::<Real>(&s).unwrap(), Real(v));
        }
        let nan: Real = serde_json::from_str("\"nan\"").unwrap();
        assert!(nan.0.is_nan());
        assert!(serde_json::from_str::<Real>("\"infinity\"").is_err());
    }

    #[test]
    fn bits() {
        assert_eq!(Units::Bits.log(std::f64::consts::LN_2), Real(1.0));
        assert_eq!(Units::Nats.log(0.5), Real(0.5));
    }
}
