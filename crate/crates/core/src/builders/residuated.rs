use serde::{Deserialize, Serialize};

use super::{check_nonneg, resolve};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{Conversion, EdgeParams, LiabilityNetwork, NetworkBuilder, NodeKind};
use crate::residuated::ResiduatedLogic;

/// Liability `(quantity, quality)` on `from -> to`, optionally converted at
/// the target by a rate and per-attribute coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityEdge {
    pub from: String,
    pub to: String,
    pub quantity: f64,
    pub quality: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResiduatedParams {
    pub labels: Vec<String>,
    pub logic: ResiduatedLogic,
    /// Number of quality attributes.
    pub dim: usize,
    pub edges: Vec<QualityEdge>,
    /// External quantity per vertex; it arrives with neutral (all-ones)
    /// quality.
    pub assets: Vec<f64>,
}

pub(crate) fn quality_pair(q: f64, mu: Vec<f64>) -> LatticeValue {
    LatticeValue::tuple([LatticeValue::Scalar(q), LatticeValue::Vector(mu)])
}

impl ResiduatedParams {
    pub fn build(&self) -> Result<LiabilityNetwork> {
        let n = self.labels.len();
        if self.assets.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} assets for {n} vertices",
                self.assets.len()
            )));
        }
        let lattice = LatticeDescriptor::product(vec![
            LatticeDescriptor::extended_nonneg(),
            LatticeDescriptor::unit_vector(self.dim)?,
        ])?;
        let mut b = NetworkBuilder::new();
        for l in &self.labels {
            b.vertex(
                l.clone(),
                lattice.clone(),
                NodeKind::ResiduatedQuality { logic: self.logic },
            );
        }
        for e in &self.edges {
            let (i, j) = (resolve(&self.labels, &e.from)?, resolve(&self.labels, &e.to)?);
            check_nonneg("quantity", e.quantity)?;
            if e.quality.len() != self.dim {
                return Err(Error::InvalidParams(format!(
                    "edge {} -> {} has {} quality attributes, expected {}",
                    e.from,
                    e.to,
                    e.quality.len(),
                    self.dim
                )));
            }
            let conversion = match (&e.rate, &e.coefficients) {
                (None, None) => Conversion::Identity,
                (rate, coefficients) => {
                    let coefficients = coefficients.clone().unwrap_or_else(|| vec![1.0; self.dim]);
                    if coefficients.len() != self.dim {
                        return Err(Error::InvalidParams("coefficient dimension mismatch".into()));
                    }
                    Conversion::Quality {
                        rate: rate.unwrap_or(1.0),
                        coefficients,
                        logic: self.logic,
                    }
                }
            };
            let params = EdgeParams {
                conversion,
                ..EdgeParams::default()
            };
            b.edge_with(i, j, quality_pair(e.quantity, e.quality.clone()), params);
        }
        let mut exogenous = Vec::with_capacity(n);
        for &a in &self.assets {
            check_nonneg("external asset", a)?;
            exogenous.push(quality_pair(a, vec![1.0; self.dim]));
        }
        b.build()?.augment_resources(&exogenous)
    }
}

pub fn build_residuated(params: &ResiduatedParams) -> Result<LiabilityNetwork> {
    params.build()
}

fn qedge(from: &str, to: &str, quantity: f64, quality: [f64; 2]) -> QualityEdge {
    QualityEdge {
        from: from.into(),
        to: to.into(),
        quantity,
        quality: quality.to_vec(),
        rate: None,
        coefficients: None,
    }
}

/// The four-bank compliance network: the cycle A -> B -> C -> A with D
/// between B and C, two attributes under Lukasiewicz logic and no external
/// assets.
pub fn compliance_params() -> ResiduatedParams {
    ResiduatedParams {
        labels: ["A", "B", "C", "D"].map(String::from).to_vec(),
        logic: ResiduatedLogic::Lukasiewicz,
        dim: 2,
        edges: vec![
            qedge("A", "B", 1000.0, [0.9, 0.8]),
            qedge("B", "C", 800.0, [0.85, 0.75]),
            qedge("C", "A", 900.0, [0.8, 0.7]),
            qedge("B", "D", 500.0, [0.85, 0.8]),
            qedge("D", "C", 400.0, [0.75, 0.7]),
        ],
        assets: vec![0.0; 4],
    }
}

pub fn build_compliance_network() -> Result<LiabilityNetwork> {
    compliance_params().build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{greatest_clearing, SolveOptions};

    #[test]
    fn bank_c_aggregation() {
        let net = build_compliance_network().unwrap();
        let c = net.vertex_index("C").unwrap();
        let mut pays = net.edge_payments(&net.bottom()).unwrap();
        let bc = net.regular_in(c)[0];
        let dc = net.regular_in(c)[1];
        pays[bc] = quality_pair(800.0, vec![0.7, 0.7]);
        pays[dc] = quality_pair(400.0, vec![0.75, 0.7]);
        let got = net.pay_in(c, &pays).unwrap();
        let t = got.as_tuple().unwrap();
        assert_eq!(t[0], LatticeValue::scalar(1200.0));
        let mu = t[1].as_vector().unwrap();
        assert!((mu[0] - 0.45).abs() < 1e-12 && (mu[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn cycle_quality_decays() {
        let net = build_compliance_network().unwrap();
        assert!(net.validate(300, 1).unwrap().passed());
        let sec = greatest_clearing(&net, SolveOptions::default()).unwrap();
        for v in ["A", "B", "C"] {
            let x = &sec.values[net.vertex_index(v).unwrap()];
            assert_eq!(x.as_tuple().unwrap()[1], LatticeValue::vector([0.0, 0.0]));
        }
    }
}
