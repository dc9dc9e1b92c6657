use serde::{Deserialize, Serialize};

use super::resolve;
use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{Conversion, EdgeParams, LiabilityNetwork, NetworkBuilder, NodeKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub label: String,
    pub reserves: [f64; 2],
    /// External trade entering the pool, per token.
    #[serde(default)]
    pub inflow: [f64; 2],
}

/// Swap output of `from` on token `side`, delivered to `to` as its token
/// `to_side` (defaults to `side`) and capped at `max_flow`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmmLink {
    pub from: String,
    pub to: String,
    pub side: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_side: Option<usize>,
    pub max_flow: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmmParams {
    pub pools: Vec<Pool>,
    #[serde(default)]
    pub links: Vec<AmmLink>,
}

fn pair(a: f64, b: f64) -> LatticeValue {
    LatticeValue::tuple([LatticeValue::Scalar(a), LatticeValue::Scalar(b)])
}

impl AmmParams {
    pub fn build(&self) -> Result<LiabilityNetwork> {
        let labels: Vec<String> = self.pools.iter().map(|p| p.label.clone()).collect();
        let e = LatticeDescriptor::extended_nonneg();
        let lattice = LatticeDescriptor::product(vec![e.clone(), e])?;
        let mut b = NetworkBuilder::new();
        let mut exogenous = Vec::with_capacity(self.pools.len());
        for p in &self.pools {
            let [x, y] = p.reserves;
            if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "pool `{}` needs positive reserves",
                    p.label
                )));
            }
            if p.inflow.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(Error::InvalidParams(format!(
                    "pool `{}` inflow must be nonnegative",
                    p.label
                )));
            }
            b.vertex(
                p.label.clone(),
                lattice.clone(),
                NodeKind::AmmConstantProduct { kappa: x * y },
            );
            exogenous.push(pair(x + p.inflow[0], y + p.inflow[1]));
        }
        for l in &self.links {
            let (i, j) = (resolve(&labels, &l.from)?, resolve(&labels, &l.to)?);
            let to_side = l.to_side.unwrap_or(l.side);
            if l.side > 1 || to_side > 1 {
                return Err(Error::InvalidParams("token sides are 0 or 1".into()));
            }
            if !(l.max_flow.is_finite() && l.max_flow >= 0.0) {
                return Err(Error::InvalidParams(format!("max flow {} must be finite", l.max_flow)));
            }
            let mut cap = [0.0, 0.0];
            cap[l.side] = l.max_flow;
            let params = EdgeParams {
                conversion: Conversion::Token {
                    from_side: l.side,
                    to_side,
                },
                ..EdgeParams::default()
            };
            b.edge_with(i, j, pair(cap[0], cap[1]), params);
        }
        b.build()?.augment_resources(&exogenous)
    }
}

pub fn build_amm(pools: Vec<Pool>, links: Vec<AmmLink>) -> Result<LiabilityNetwork> {
    AmmParams { pools, links }.build()
}
