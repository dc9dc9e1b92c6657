use std::fmt;

use serde::{Deserialize, Serialize};

use super::BitSet;

/// An element of one of the supported carriers.
///
/// The variant must match the descriptor the value is used with; descriptors
/// check this on every operation. `Scalar` covers both bounded and extended
/// scalars, with `f64::INFINITY` as the top of the extended half-line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeValue {
    Scalar(#[serde(with = "ext_real")] f64),
    Tuple(Vec<LatticeValue>),
    Set(BitSet),
    Vector(Vec<f64>),
    Downset(BitSet),
}

impl LatticeValue {
    pub fn scalar(x: f64) -> Self {
        LatticeValue::Scalar(x)
    }

    pub fn infinity() -> Self {
        LatticeValue::Scalar(f64::INFINITY)
    }

    pub fn tuple(items: impl IntoIterator<Item = LatticeValue>) -> Self {
        LatticeValue::Tuple(items.into_iter().collect())
    }

    pub fn set(items: impl IntoIterator<Item = usize>) -> Self {
        LatticeValue::Set(BitSet::from_indices(items))
    }

    pub fn vector(items: impl IntoIterator<Item = f64>) -> Self {
        LatticeValue::Vector(items.into_iter().collect())
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            LatticeValue::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[LatticeValue]> {
        match self {
            LatticeValue::Tuple(items) => Some(items),
            _ => None,
        }
    }

    /// Set members of either a `Set` or a `Downset`.
    pub fn as_bits(&self) -> Option<&BitSet> {
        match self {
            LatticeValue::Set(s) | LatticeValue::Downset(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            LatticeValue::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LatticeValue::Scalar(_) => "scalar",
            LatticeValue::Tuple(_) => "tuple",
            LatticeValue::Set(_) => "set",
            LatticeValue::Vector(_) => "vector",
            LatticeValue::Downset(_) => "downset",
        }
    }
}

fn write_reals(f: &mut fmt::Formatter<'_>, xs: &[f64]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for LatticeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeValue::Scalar(x) => write!(f, "{x}"),
            LatticeValue::Tuple(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
            LatticeValue::Set(s) | LatticeValue::Downset(s) => write!(f, "{s:?}"),
            LatticeValue::Vector(v) => {
                f.write_str("[")?;
                write_reals(f, v)?;
                f.write_str("]")
            }
        }
    }
}

/// `a + b` on the extended half-line.
pub fn ext_add(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        a + b
    }
}

/// `a * b` on the extended half-line with `0 * inf = 0`.
pub fn ext_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// `max(0, a - b)` where `inf - x = inf` for finite `x` and `x - inf = 0`.
pub fn ext_sub_clamped(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        0.0
    } else if a.is_infinite() {
        f64::INFINITY
    } else {
        (a - b).max(0.0)
    }
}

/// Serde adapter writing `f64::INFINITY` as the string `"inf"`.
pub mod ext_real {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}
