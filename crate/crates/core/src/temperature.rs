//! Inverse temperatures as an extended real with exact limit variants.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Resource parameter of a node.
///
/// `Finite` always carries a nonzero finite value; the limits `0` and `±∞`
/// have their own variants so that the limit operators (expectation, max,
/// min) are evaluated exactly rather than approximated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    Zero,
    PosInf,
    NegInf,
}

impl InverseTemperature {
    /// Maps a float onto the matching variant. NaN is rejected.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::InvalidTemperature("NaN".into()))
        } else if value == 0.0 {
            Ok(Self::Zero)
        } else if value == f64::INFINITY {
            Ok(Self::PosInf)
        } else if value == f64::NEG_INFINITY {
            Ok(Self::NegInf)
        } else {
            Ok(Self::Finite(value))
        }
    }

    /// Shorthand for a finite temperature; panics on zero or non-finite input.
    pub fn finite(value: f64) -> Self {
        assert!(
            value.is_finite() && value != 0.0,
            "finite inverse temperature must be nonzero and finite, got {value}"
        );
        Self::Finite(value)
    }

    /// The extended-real value this temperature stands for.
    pub fn as_f64(self) -> f64 {
        match self {
            Self::Finite(b) => b,
            Self::Zero => 0.0,
            Self::PosInf => f64::INFINITY,
            Self::NegInf => f64::NEG_INFINITY,
        }
    }

    /// `1/β` with `1/±∞ = 0`; `None` at zero.
    pub fn reciprocal(self) -> Option<f64> {
        match self {
            Self::Finite(b) => Some(1.0 / b),
            Self::PosInf | Self::NegInf => Some(0.0),
            Self::Zero => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    fn rank(self) -> (i8, f64) {
        match self {
            Self::NegInf => (0, 0.0),
            Self::Finite(b) if b < 0.0 => (1, b),
            Self::Zero => (2, 0.0),
            Self::Finite(b) => (3, b),
            Self::PosInf => (4, 0.0),
        }
    }
}

impl Eq for InverseTemperature {}

impl PartialOrd for InverseTemperature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for InverseTemperature {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ra, va) = self.rank();
        let (rb, vb) = other.rank();
        ra.cmp(&rb).then(va.total_cmp(&vb))
    }
}

impl fmt::Display for InverseTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(b) => write!(f, "{b}"),
            Self::Zero => write!(f, "0"),
            Self::PosInf => write!(f, "inf"),
            Self::NegInf => write!(f, "-inf"),
        }
    }
}

impl std::str::FromStr for InverseTemperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => Ok(Self::PosInf),
            "-inf" => Ok(Self::NegInf),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidTemperature(format!("`{other}`")))?;
                if !v.is_finite() {
                    return Err(Error::InvalidTemperature(format!(
                        "`{other}`: use \"inf\" or \"-inf\""
                    )));
                }
                Self::new(v)
            }
        }
    }
}

impl Serialize for InverseTemperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(b) => serializer.serialize_f64(*b),
            Self::Zero => serializer.serialize_u64(0),
            Self::PosInf => serializer.serialize_str("inf"),
            Self::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for InverseTemperature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct BetaVisitor;

        impl Visitor<'_> for BetaVisitor {
            type Value = InverseTemperature;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite numbers are not allowed; use \"inf\""));
                }
                InverseTemperature::new(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "inf" => Ok(InverseTemperature::PosInf),
                    "-inf" => Ok(InverseTemperature::NegInf),
                    _ => Err(E::custom(format!("unknown temperature string `{v}`"))),
                }
            }
        }

        deserializer.deserialize_any(BetaVisitor)
    }
}
