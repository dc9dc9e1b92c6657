use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ext_add, ext_mul, BitSet, LatticeDescriptor, LatticeValue};
use crate::residuated::ResiduatedLogic;

/// Per-edge map from the source lattice into the target lattice, applied to
/// a payment before the target's pay-in aggregator sees it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Conversion {
    #[default]
    Identity,
    /// `x -> rate * x` on scalars.
    Linear { rate: f64 },
    /// `x -> rate * x * (1 - min(alpha * x, beta))` on scalars.
    Slippage { rate: f64, alpha: f64, beta: f64 },
    /// `(q, mu) -> (rate * q, mu ⊗ coefficients)` on quantity-quality pairs.
    Quality {
        rate: f64,
        coefficients: Vec<f64>,
        logic: ResiduatedLogic,
    },
    /// `S -> S ∩ mask` on finite sets.
    SetMask { mask: BitSet },
    /// Replaces each listed element by its image set; unlisted elements map
    /// to themselves.
    SetDowngrade { images: Vec<(usize, BitSet)> },
    /// Relabels set or downset elements through `(source, target)` pairs,
    /// dropping unmatched ones. Downset results are down-closed in the target.
    LabelMatch { pairs: Vec<(usize, usize)> },
    /// `y_t = sum_s matrix[t][s] * x_s` on tuples of bucket scalars.
    Kernel { matrix: Vec<Vec<f64>> },
    /// Moves component `from_side` of a token pair into component `to_side`.
    Token { from_side: usize, to_side: usize },
}

fn scalar_of(v: &LatticeValue) -> Result<f64> {
    v.as_scalar()
        .ok_or_else(|| Error::DescriptorMismatch(format!("expected a scalar payment, found {}", v.kind_name())))
}

fn check_rate(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{name} must be finite and nonnegative, got {x}"
        )))
    }
}

impl Conversion {
    pub fn is_identity(&self) -> bool {
        matches!(self, Conversion::Identity)
    }

    /// Parameter domain checks that do not need the lattices.
    pub fn check_params(&self) -> Result<()> {
        match self {
            Conversion::Linear { rate } => check_rate("rate", *rate),
            Conversion::Slippage { rate, alpha, beta } => {
                check_rate("rate", *rate)?;
                check_rate("alpha", *alpha)?;
                if !(0.0..1.0).contains(beta) {
                    return Err(Error::InvalidParams(format!(
                        "slippage cap beta must lie in [0, 1), got {beta}"
                    )));
                }
                Ok(())
            }
            Conversion::Quality { rate, coefficients, .. } => {
                check_rate("rate", *rate)?;
                if coefficients.iter().any(|c| !(0.0..=1.0).contains(c)) {
                    return Err(Error::InvalidParams("quality coefficients must lie in [0, 1]".into()));
                }
                Ok(())
            }
            Conversion::Kernel { matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidParams("kernel matrix must be square".into()));
                }
                if let Some(k) = matrix.iter().flatten().find(|k| !(k.is_finite() && **k >= 0.0)) {
                    return Err(Error::InvalidParams(format!(
                        "kernel entry {k} is negative or not finite"
                    )));
                }
                Ok(())
            }
            Conversion::Token { from_side, to_side } => {
                if *from_side > 1 || *to_side > 1 {
                    return Err(Error::InvalidParams("token sides must be 0 or 1".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, target: &LatticeDescriptor, v: &LatticeValue) -> Result<LatticeValue> {
        Ok(match self {
            Conversion::Identity => v.clone(),
            Conversion::Linear { rate } => LatticeValue::Scalar(ext_mul(*rate, scalar_of(v)?)),
            Conversion::Slippage { rate, alpha, beta } => {
                let x = scalar_of(v)?;
                let s = ext_mul(*alpha, x).min(*beta);
                LatticeValue::Scalar(ext_mul(ext_mul(*rate, x), 1.0 - s))
            }
            Conversion::Quality {
                rate,
                coefficients,
                logic,
            } => {
                let (q, mu) = match v.as_tuple() {
                    Some([LatticeValue::Scalar(q), LatticeValue::Vector(mu)]) => (*q, mu),
                    _ => {
                        return Err(Error::DescriptorMismatch(
                            "quality conversion expects a (quantity, quality) pair".into(),
                        ))
                    }
                };
                if mu.len() != coefficients.len() {
                    return Err(Error::DescriptorMismatch(format!(
                        "quality vector of length {} for {} coefficients",
                        mu.len(),
                        coefficients.len()
                    )));
                }
                LatticeValue::tuple([
                    LatticeValue::Scalar(ext_mul(*rate, q)),
                    LatticeValue::Vector(logic.tnorm_vec(mu, coefficients)?),
                ])
            }
            Conversion::SetMask { mask } => match v {
                LatticeValue::Set(s) => LatticeValue::Set(s.intersection(mask)),
                _ => return Err(Error::DescriptorMismatch("set mask expects a set payment".into())),
            },
            Conversion::SetDowngrade { images } => match v {
                LatticeValue::Set(s) => {
                    let mut out = BitSet::new();
                    for i in s.iter() {
                        match images.iter().find(|(from, _)| *from == i) {
                            Some((_, image)) => out = out.union(image),
                            None => out.insert(i),
                        }
                    }
                    LatticeValue::Set(out)
                }
                _ => return Err(Error::DescriptorMismatch("set downgrade expects a set payment".into())),
            },
            Conversion::LabelMatch { pairs } => {
                let s = v
                    .as_bits()
                    .ok_or_else(|| Error::DescriptorMismatch("label match expects a set or downset payment".into()))?;
                let mapped: BitSet = pairs
                    .iter()
                    .filter(|(from, _)| s.contains(*from))
                    .map(|(_, to)| *to)
                    .collect();
                match target.poset() {
                    Some(poset) => LatticeValue::Downset(poset.downclosure(&mapped)),
                    None => LatticeValue::Set(mapped),
                }
            }
            Conversion::Kernel { matrix } => {
                let xs = v
                    .as_tuple()
                    .ok_or_else(|| Error::DescriptorMismatch("kernel expects a tuple of buckets".into()))?
                    .iter()
                    .map(scalar_of)
                    .collect::<Result<Vec<_>>>()?;
                if xs.len() != matrix.len() {
                    return Err(Error::DescriptorMismatch(format!(
                        "{} buckets for a {}x{} kernel",
                        xs.len(),
                        matrix.len(),
                        matrix.len()
                    )));
                }
                LatticeValue::Tuple(
                    matrix
                        .iter()
                        .map(|row| {
                            let y = row
                                .iter()
                                .zip(&xs)
                                .fold(0.0, |acc, (k, x)| ext_add(acc, ext_mul(*k, *x)));
                            LatticeValue::Scalar(y)
                        })
                        .collect(),
                )
            }
            Conversion::Token { from_side, to_side } => {
                let amount = match v.as_tuple() {
                    Some(items) if items.len() == 2 => scalar_of(&items[*from_side])?,
                    _ => return Err(Error::DescriptorMismatch("token route expects a token pair".into())),
                };
                let mut out = [LatticeValue::Scalar(0.0), LatticeValue::Scalar(0.0)];
                out[*to_side] = LatticeValue::Scalar(amount);
                LatticeValue::tuple(out)
            }
        })
    }
}
