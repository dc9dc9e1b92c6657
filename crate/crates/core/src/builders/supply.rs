use serde::{Deserialize, Serialize};

use super::resolve;
use crate::builders::residuated::quality_pair;
use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{EdgeParams, LiabilityNetwork, NetworkBuilder, NodeKind, Section, SupplyRole};
use crate::residuated::ResiduatedLogic;
use crate::solver::{greatest_clearing, SolveOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupplyNode {
    pub label: String,
    /// Upper bound on the quantity the node can hold.
    pub capacity: f64,
    pub role: SupplyRole,
    /// Raw material entering from outside the network.
    #[serde(default)]
    pub supply: f64,
    /// Quality of that material; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supply_quality: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupplyEdge {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub quantity: f64,
    /// Best quality the edge can carry; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportion: Option<f64>,
    /// Carries quality only, no material.
    #[serde(default)]
    pub info_only: bool,
}

/// Threshold adaptation between solves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adaptation {
    pub delta: Vec<f64>,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
}

fn default_rounds() -> usize {
    100
}

fn default_dim() -> usize {
    3
}

fn default_logic() -> ResiduatedLogic {
    ResiduatedLogic::Godel
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupplyParams {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_logic")]
    pub logic: ResiduatedLogic,
    pub nodes: Vec<SupplyNode>,
    pub edges: Vec<SupplyEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation: Option<Adaptation>,
}

impl SupplyParams {
    fn labels(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.label.clone()).collect()
    }

    pub fn build(&self) -> Result<LiabilityNetwork> {
        let labels = self.labels();
        let ones = vec![1.0; self.dim];
        let mut b = NetworkBuilder::new();
        let mut exogenous = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let lattice = LatticeDescriptor::product(vec![
                LatticeDescriptor::bounded(n.capacity)?,
                LatticeDescriptor::unit_vector(self.dim)?,
            ])?;
            if let SupplyRole::Manufacturer { thresholds, .. } = &n.role {
                if thresholds.iter().any(|t| *t >= 1.0) {
                    return Err(Error::InvalidParams(format!(
                        "manufacturer `{}` has a threshold of 1, which makes production degenerate",
                        n.label
                    )));
                }
            }
            b.vertex(
                n.label.clone(),
                lattice,
                NodeKind::SupplyTransform {
                    logic: self.logic,
                    role: n.role.clone(),
                },
            );
            exogenous.push(quality_pair(
                n.supply,
                n.supply_quality.clone().unwrap_or_else(|| ones.clone()),
            ));
        }
        let mut proportion_sums = vec![0.0; self.nodes.len()];
        for e in &self.edges {
            let (i, j) = (resolve(&labels, &e.from)?, resolve(&labels, &e.to)?);
            if let Some(p) = e.proportion {
                proportion_sums[i] += p;
            }
            let quantity = if e.info_only { 0.0 } else { e.quantity };
            let params = EdgeParams {
                proportion: e.proportion,
                info_only: e.info_only,
                ..EdgeParams::default()
            };
            b.edge_with(
                i,
                j,
                quality_pair(quantity, e.quality.clone().unwrap_or_else(|| ones.clone())),
                params,
            );
        }
        if let Some(v) = proportion_sums.iter().position(|s| *s > 1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "proportions out of `{}` exceed 1",
                labels[v]
            )));
        }
        b.build()?.augment_resources(&exogenous)
    }
}

pub fn build_supply_chain(params: &SupplyParams) -> Result<LiabilityNetwork> {
    params.build()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOutcome {
    /// Parameters with the final thresholds and testing memory.
    pub params: SupplyParams,
    pub section: Section,
    pub rounds: usize,
    pub converged: bool,
}

fn quality_of(v: &LatticeValue) -> Result<Vec<f64>> {
    v.as_tuple()
        .and_then(|t| t.get(1))
        .and_then(LatticeValue::as_vector)
        .map(<[f64]>::to_vec)
        .ok_or_else(|| Error::DescriptorMismatch("expected a (quantity, quality) value".into()))
}

/// Alternates greatest clearing with threshold and memory updates until
/// neither changes.
///
/// After each solve a manufacturer's thresholds become
/// `min(theta, feedback + delta)`, where the feedback is the meet of the
/// qualities paid to it by testers, and each tester's memory becomes its
/// own quality in the section. Without an adaptation stanza this is a single
/// solve.
pub fn solve_adaptive(params: &SupplyParams, opts: SolveOptions) -> Result<AdaptiveOutcome> {
    let mut params = params.clone();
    let (delta, max_rounds) = match &params.adaptation {
        Some(a) if a.delta.len() != params.dim => {
            return Err(Error::InvalidParams("adaptation delta has the wrong dimension".into()))
        }
        Some(a) => (a.delta.clone(), a.max_rounds),
        None => (vec![0.0; params.dim], 1),
    };
    let mut rounds = 0;
    loop {
        let net = params.build()?;
        let section = greatest_clearing(&net, opts)?;
        rounds += 1;
        if params.adaptation.is_none() {
            return Ok(AdaptiveOutcome {
                params,
                section,
                rounds,
                converged: true,
            });
        }
        let pays = net.edge_payments(&section.values)?;
        let mut changed = false;
        let mut next = params.nodes.clone();
        for (v, node) in next.iter_mut().enumerate() {
            match &mut node.role {
                SupplyRole::Manufacturer { thresholds, .. } => {
                    let mut feedback: Option<Vec<f64>> = None;
                    for &e in net.regular_in(v) {
                        let src = net.edge(e).source;
                        if matches!(params.nodes[src].role, SupplyRole::Tester { .. }) {
                            let q = quality_of(&pays[e])?;
                            feedback = Some(match feedback {
                                None => q,
                                Some(f) => f.iter().zip(&q).map(|(a, b)| a.min(*b)).collect(),
                            });
                        }
                    }
                    if let Some(fb) = feedback {
                        for ((t, f), d) in thresholds.iter_mut().zip(&fb).zip(&delta) {
                            let nt = t.min(f + d);
                            if nt != *t {
                                *t = nt;
                                changed = true;
                            }
                        }
                    }
                }
                SupplyRole::Tester { previous, .. } => {
                    let q = quality_of(&section.values[v])?;
                    if *previous != q {
                        *previous = q;
                        changed = true;
                    }
                }
                SupplyRole::Relay => {}
            }
        }
        params.nodes = next;
        if !changed || rounds >= max_rounds {
            return Ok(AdaptiveOutcome {
                params,
                section,
                rounds,
                converged: !changed,
            });
        }
    }
}

fn node(label: &str, capacity: f64, role: SupplyRole, supply: f64, quality: Option<[f64; 3]>) -> SupplyNode {
    SupplyNode {
        label: label.into(),
        capacity,
        role,
        supply,
        supply_quality: quality.map(|q| q.to_vec()),
    }
}

fn material(from: &str, to: &str, quantity: f64) -> SupplyEdge {
    SupplyEdge {
        from: from.into(),
        to: to.into(),
        quantity,
        quality: None,
        proportion: None,
        info_only: false,
    }
}

fn info(from: &str, to: &str, quality: Option<[f64; 3]>) -> SupplyEdge {
    SupplyEdge {
        from: from.into(),
        to: to.into(),
        quantity: 0.0,
        quality: quality.map(|q| q.to_vec()),
        proportion: None,
        info_only: true,
    }
}

/// A twelve-node production network: three suppliers, three manufacturers,
/// two assembly plants, two testers and two distribution centers, with
/// testing feedback into the manufacturers and between the testers.
pub fn supply_chain_example() -> SupplyParams {
    let manufacturer = |t: [f64; 3]| SupplyRole::Manufacturer {
        thresholds: t.to_vec(),
        gamma: 2.0,
    };
    let tester = || SupplyRole::Tester {
        omega: 0.95,
        previous: vec![1.0; 3],
    };
    SupplyParams {
        dim: 3,
        logic: ResiduatedLogic::Godel,
        nodes: vec![
            node("S1", 200.0, SupplyRole::Relay, 100.0, Some([0.9, 0.85, 0.95])),
            node("S2", 200.0, SupplyRole::Relay, 100.0, Some([0.92, 0.9, 0.9])),
            node("S3", 200.0, SupplyRole::Relay, 100.0, Some([0.88, 0.93, 0.91])),
            node("M1", 300.0, manufacturer([0.8, 0.8, 0.85]), 0.0, None),
            node("M2", 300.0, manufacturer([0.7, 0.7, 0.7]), 0.0, None),
            node("M3", 300.0, manufacturer([0.7, 0.75, 0.7]), 0.0, None),
            node("A1", 400.0, SupplyRole::Relay, 0.0, None),
            node("A2", 400.0, SupplyRole::Relay, 0.0, None),
            node("T1", 0.0, tester(), 0.0, None),
            node("T2", 0.0, tester(), 0.0, None),
            node("D1", 500.0, SupplyRole::Relay, 0.0, None),
            node("D2", 500.0, SupplyRole::Relay, 0.0, None),
        ],
        edges: vec![
            material("S1", "M1", 100.0),
            material("S2", "M2", 70.0),
            material("S2", "M1", 30.0),
            material("S3", "M3", 100.0),
            material("M1", "A1", 60.0),
            material("M1", "A2", 60.0),
            material("M2", "A2", 70.0),
            material("M3", "A1", 100.0),
            material("A1", "D1", 200.0),
            material("A2", "D2", 200.0),
            info("A1", "T1", None),
            info("A2", "T2", None),
            info("T1", "M1", Some([0.85, 0.92, 0.88])),
            info("T1", "M3", None),
            info("T2", "M2", None),
            info("T2", "M1", None),
            info("T1", "T2", None),
            info("T2", "T1", None),
        ],
        adaptation: Some(Adaptation {
            delta: vec![0.02; 3],
            max_rounds: 100,
        }),
    }
}
