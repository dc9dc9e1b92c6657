//! The network spec file: one JSON document, either builder-backed
//! (`{"domain": ..., "params": {...}}`) or explicit
//! (`{"vertices": [...], "edges": [...], "node_kinds": [...]}`).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::builders::{
    AmmParams, CurrencyParams, EnParams, PermissionParams, ResiduatedParams, SupplyParams, TermParams,
};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{Edge, EdgeParams, EdgeTag, LiabilityNetwork, NodeBehavior, NodeKind, Quiver};
use crate::multivalued::{Correspondence, MvNetwork, NegotiationParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", content = "params", rename_all = "snake_case")]
pub enum DomainSpec {
    EisenbergNoe(EnParams),
    Multicurrency(CurrencyParams),
    Amm(AmmParams),
    Residuated(ResiduatedParams),
    SupplyChain(SupplyParams),
    Permission(PermissionParams),
    TermStructure(TermParams),
    Negotiation(NegotiationParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub label: String,
    pub lattice: LatticeDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "is_regular")]
    pub tag: EdgeTag,
    pub liability: LatticeValue,
    #[serde(flatten)]
    pub params: EdgeParams,
}

fn is_regular(t: &EdgeTag) -> bool {
    *t == EdgeTag::Regular
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitNetwork {
    pub vertices: Vec<VertexSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
    pub node_kinds: Vec<NodeKind>,
}

impl ExplicitNetwork {
    pub fn from_network(net: &LiabilityNetwork) -> Self {
        let vertices = (0..net.vertex_count())
            .map(|v| VertexSpec {
                label: net.label(v).to_string(),
                lattice: net.lattice(v).clone(),
            })
            .collect();
        let edges = net
            .quiver()
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| EdgeSpec {
                from: net.label(edge.source).to_string(),
                to: net.label(edge.target).to_string(),
                tag: edge.tag,
                liability: net.liability(e).clone(),
                params: net.edge_params(e).clone(),
            })
            .collect();
        ExplicitNetwork {
            vertices,
            edges,
            node_kinds: net.node_kinds().to_vec(),
        }
    }

    pub fn build(&self, custom: &dyn Fn(&str) -> Option<Arc<dyn NodeBehavior>>) -> Result<LiabilityNetwork> {
        let labels: Vec<String> = self.vertices.iter().map(|v| v.label.clone()).collect();
        let find = |name: &str| {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::InvalidNetwork(format!("edge refers to unknown vertex `{name}`")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            edges.push(Edge {
                source: find(&e.from)?,
                target: find(&e.to)?,
                tag: e.tag,
            });
        }
        let kinds = self
            .node_kinds
            .iter()
            .map(|k| match k {
                NodeKind::Custom { name, behavior: None } => custom(name)
                    .map(|b| NodeKind::custom(name.clone(), b))
                    .ok_or_else(|| Error::InvalidNetwork(format!("no custom node kind registered as `{name}`"))),
                k => Ok(k.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        LiabilityNetwork::new(
            labels,
            Quiver::new(self.vertices.len(), edges)?,
            self.vertices.iter().map(|v| v.lattice.clone()).collect(),
            self.edges.iter().map(|e| e.liability.clone()).collect(),
            self.edges.iter().map(|e| e.params.clone()).collect(),
            kinds,
        )
    }
}

/// Set-valued maps by vertex label; unlisted vertices keep singletons.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MvSpec {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pay_in: BTreeMap<String, Correspondence>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub distributor: BTreeMap<String, Correspondence>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkSource {
    Domain(DomainSpec),
    Explicit(ExplicitNetwork),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub source: NetworkSource,
    pub multivalued: Option<MvSpec>,
}

/// A loaded spec: the base network, plus the multivalued network when the
/// spec describes one.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub network: LiabilityNetwork,
    pub multivalued: Option<MvNetwork>,
}

fn no_custom(_: &str) -> Option<Arc<dyn NodeBehavior>> {
    None
}

impl SpecFile {
    pub fn domain(d: DomainSpec) -> Self {
        SpecFile {
            source: NetworkSource::Domain(d),
            multivalued: None,
        }
    }

    pub fn explicit(net: &LiabilityNetwork) -> Self {
        SpecFile {
            source: NetworkSource::Explicit(ExplicitNetwork::from_network(net)),
            multivalued: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut obj) = value else {
            return Err(Error::InvalidNetwork("spec must be a JSON object".into()));
        };
        match obj.remove("schema_version") {
            Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION as u64) => {}
            Some(v) => {
                return Err(Error::InvalidNetwork(format!(
                    "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
                )))
            }
            None => return Err(Error::InvalidNetwork("missing schema_version".into())),
        }
        let multivalued = match obj.remove("multivalued") {
            Some(v) => Some(serde_json::from_value(v)?),
            None => None,
        };
        let source = if obj.contains_key("domain") {
            NetworkSource::Domain(serde_json::from_value(Value::Object(obj))?)
        } else if obj.contains_key("vertices") {
            NetworkSource::Explicit(serde_json::from_value(Value::Object(obj))?)
        } else {
            return Err(Error::InvalidNetwork(
                "spec needs either `domain` and `params` or `vertices`, `edges` and `node_kinds`".into(),
            ));
        };
        Ok(SpecFile { source, multivalued })
    }

    pub fn to_value(&self) -> Result<Value> {
        let body = match &self.source {
            NetworkSource::Domain(d) => serde_json::to_value(d)?,
            NetworkSource::Explicit(x) => serde_json::to_value(x)?,
        };
        let Value::Object(body) = body else {
            unreachable!("spec bodies serialize as objects")
        };
        let mut obj = Map::new();
        obj.insert("schema_version".into(), SCHEMA_VERSION.into());
        obj.extend(body);
        if let Some(mv) = &self.multivalued {
            obj.insert("multivalued".into(), serde_json::to_value(mv)?);
        }
        Ok(Value::Object(obj))
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_value()?)?)
    }

    pub fn load(&self) -> Result<Loaded> {
        self.load_with(&no_custom)
    }

    /// Like [`load`](Self::load), resolving custom node kinds through `custom`.
    pub fn load_with(&self, custom: &dyn Fn(&str) -> Option<Arc<dyn NodeBehavior>>) -> Result<Loaded> {
        let (network, mv) = match &self.source {
            NetworkSource::Domain(DomainSpec::Negotiation(p)) => {
                let mv = p.build()?;
                (mv.base().clone(), Some(mv))
            }
            NetworkSource::Domain(d) => (build_domain(d)?, None),
            NetworkSource::Explicit(x) => (x.build(custom)?, None),
        };
        let multivalued = match (&self.multivalued, mv) {
            (None, mv) => mv,
            (Some(spec), mv) => {
                let n = network.vertex_count();
                let (mut inagg, mut dist) = match &mv {
                    Some(m) => (
                        (0..n).map(|v| m.pay_in_correspondence(v).clone()).collect::<Vec<_>>(),
                        (0..n)
                            .map(|v| m.distributor_correspondence(v).clone())
                            .collect::<Vec<_>>(),
                    ),
                    None => (vec![Correspondence::Singleton; n], vec![Correspondence::Singleton; n]),
                };
                for (map, target) in [(&spec.pay_in, &mut inagg), (&spec.distributor, &mut dist)] {
                    for (label, c) in map {
                        let v = network
                            .vertex_index(label)
                            .ok_or_else(|| Error::InvalidNetwork(format!("unknown vertex `{label}` in multivalued")))?;
                        target[v] = c.clone();
                    }
                }
                Some(MvNetwork::new(network.clone(), inagg, dist)?)
            }
        };
        Ok(Loaded { network, multivalued })
    }
}

fn build_domain(d: &DomainSpec) -> Result<LiabilityNetwork> {
    match d {
        DomainSpec::EisenbergNoe(p) => p.build(),
        DomainSpec::Multicurrency(p) => p.build(),
        DomainSpec::Amm(p) => p.build(),
        DomainSpec::Residuated(p) => p.build(),
        DomainSpec::SupplyChain(p) => p.build(),
        DomainSpec::Permission(p) => p.build(),
        DomainSpec::TermStructure(p) => p.build(),
        DomainSpec::Negotiation(p) => Ok(p.build()?.base().clone()),
    }
}
