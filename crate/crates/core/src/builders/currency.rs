use serde::{Deserialize, Serialize};

use super::{check_nonneg, labels_or_default, resolve};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{Conversion, EdgeParams, LiabilityNetwork, NetworkBuilder, NodeKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Slippage {
    #[default]
    None,
    /// `s(x) = min(alpha * x, beta)`.
    LinearCapped { alpha: f64, beta: f64 },
}

/// Conversion on the edge `from -> to`; edges without an entry convert at
/// rate 1 without slippage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrencyEdge {
    pub from: String,
    pub to: String,
    pub rate: f64,
    #[serde(default)]
    pub slippage: Slippage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrencyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub liabilities: Vec<Vec<f64>>,
    pub assets: Vec<f64>,
    #[serde(default)]
    pub conversions: Vec<CurrencyEdge>,
}

fn conversion_of(c: &CurrencyEdge) -> Result<Conversion> {
    check_nonneg("conversion rate", c.rate)?;
    match c.slippage {
        Slippage::None if c.rate == 1.0 => Ok(Conversion::Identity),
        Slippage::None => Ok(Conversion::Linear { rate: c.rate }),
        Slippage::LinearCapped { alpha, beta } => {
            check_nonneg("slippage alpha", alpha)?;
            // x (1 - min(alpha x, beta)) has slope 1 - 2 alpha x below the cap,
            // which stays nonnegative up to the kink exactly when beta <= 1/2.
            if !(0.0..=0.5).contains(&beta) {
                return Err(Error::InvalidParams(format!(
                    "slippage cap {beta} breaks monotonicity of the conversion (needs 0 <= beta <= 0.5)"
                )));
            }
            Ok(Conversion::Slippage {
                rate: c.rate,
                alpha,
                beta,
            })
        }
    }
}

impl CurrencyParams {
    pub fn build(&self) -> Result<LiabilityNetwork> {
        let n = self.assets.len();
        if self.liabilities.len() != n || self.liabilities.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParams(format!("liability matrix must be {n}x{n}")));
        }
        let labels = labels_or_default(&self.labels, n)?;
        let mut conv = vec![vec![Conversion::Identity; n]; n];
        for c in &self.conversions {
            let (i, j) = (resolve(&labels, &c.from)?, resolve(&labels, &c.to)?);
            conv[i][j] = conversion_of(c)?;
        }
        let mut b = NetworkBuilder::new();
        for l in &labels {
            b.vertex(l.clone(), LatticeDescriptor::extended_nonneg(), NodeKind::CurrencySum);
        }
        for (i, row) in self.liabilities.iter().enumerate() {
            for (j, &l) in row.iter().enumerate() {
                check_nonneg("liability", l)?;
                if i == j && l != 0.0 {
                    return Err(Error::InvalidParams(format!("`{}` owes itself {l}", labels[i])));
                }
                if l > 0.0 {
                    let params = EdgeParams {
                        conversion: conv[i][j].clone(),
                        ..EdgeParams::default()
                    };
                    b.edge_with(i, j, LatticeValue::Scalar(l), params);
                }
            }
        }
        for &a in &self.assets {
            check_nonneg("external asset", a)?;
        }
        let assets: Vec<_> = self.assets.iter().map(|&a| LatticeValue::Scalar(a)).collect();
        b.build()?.augment_resources(&assets)
    }
}

pub fn build_multicurrency(
    liabilities: &[Vec<f64>],
    assets: &[f64],
    conversions: Vec<CurrencyEdge>,
) -> Result<LiabilityNetwork> {
    CurrencyParams {
        labels: None,
        liabilities: liabilities.to_vec(),
        assets: assets.to_vec(),
        conversions,
    }
    .build()
}
