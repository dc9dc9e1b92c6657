use serde::{Deserialize, Serialize};

use super::resolve;
use crate::error::{Error, Result};
use crate::lattice::{BitSet, LatticeDescriptor, LatticeValue};
use crate::model::{Conversion, EdgeParams, EdgeTag, LiabilityNetwork, NetworkBuilder, NodeKind};
use crate::solver::{iterate, SolveOptions};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetConversion {
    #[default]
    Identity,
    /// Keeps only the listed permissions.
    Mask { keep: Vec<String> },
    /// Replaces each listed permission by its image set.
    Downgrade { map: Vec<(String, Vec<String>)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermissionEntity {
    pub label: String,
    #[serde(default)]
    pub inherent: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermissionEdge {
    pub from: String,
    pub to: String,
    /// Required delegation; defaults to nothing.
    #[serde(default)]
    pub min: Vec<String>,
    /// Permitted delegation; defaults to the whole universe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<Vec<String>>,
    #[serde(default)]
    pub conversion: SetConversion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermissionParams {
    pub universe: Vec<String>,
    pub entities: Vec<PermissionEntity>,
    #[serde(default)]
    pub edges: Vec<PermissionEdge>,
}

fn index(universe: &[String], name: &str) -> Result<usize> {
    universe
        .iter()
        .position(|u| u == name)
        .ok_or_else(|| Error::InvalidParams(format!("unknown permission `{name}`")))
}

fn bits(universe: &[String], names: &[String]) -> Result<BitSet> {
    names.iter().map(|n| index(universe, n)).collect()
}

impl PermissionParams {
    pub fn build(&self) -> Result<LiabilityNetwork> {
        let lattice = LatticeDescriptor::finite_set(self.universe.iter().cloned())?;
        let labels: Vec<String> = self.entities.iter().map(|e| e.label.clone()).collect();
        let mut b = NetworkBuilder::new();
        for l in &labels {
            b.vertex(l.clone(), lattice.clone(), NodeKind::PermissionUnion);
        }
        for e in &self.edges {
            let (i, j) = (resolve(&labels, &e.from)?, resolve(&labels, &e.to)?);
            let min = bits(&self.universe, &e.min)?;
            let max = match &e.max {
                Some(m) => bits(&self.universe, m)?,
                None => BitSet::full(self.universe.len()),
            };
            if !min.is_subset(&max) {
                return Err(Error::InvalidParams(format!(
                    "minimum delegation on {} -> {} exceeds the maximum",
                    e.from, e.to
                )));
            }
            let conversion = match &e.conversion {
                SetConversion::Identity => Conversion::Identity,
                SetConversion::Mask { keep } => Conversion::SetMask {
                    mask: bits(&self.universe, keep)?,
                },
                SetConversion::Downgrade { map } => Conversion::SetDowngrade {
                    images: map
                        .iter()
                        .map(|(from, to)| Ok((index(&self.universe, from)?, bits(&self.universe, to)?)))
                        .collect::<Result<_>>()?,
                },
            };
            let params = EdgeParams {
                conversion,
                min_delegation: Some(LatticeValue::Set(min)),
                ..EdgeParams::default()
            };
            b.edge_with(i, j, LatticeValue::Set(max), params);
        }
        let inherent = self
            .entities
            .iter()
            .map(|e| bits(&self.universe, &e.inherent).map(LatticeValue::Set))
            .collect::<Result<Vec<_>>>()?;
        b.build()?.augment_with(&inherent, EdgeTag::NonDelegatableLoop)
    }
}

pub fn build_permission_network(params: &PermissionParams) -> Result<LiabilityNetwork> {
    params.build()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelegationViolation {
    pub edge: usize,
    pub from: String,
    pub to: String,
    pub missing: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinDelegationReport {
    pub valid: bool,
    pub violations: Vec<DelegationViolation>,
}

/// Edges whose payment under `x` misses part of the required delegation.
pub fn check_min_delegation(net: &LiabilityNetwork, x: &[LatticeValue]) -> Result<MinDelegationReport> {
    let pays = net.edge_payments(x)?;
    let mut violations = Vec::new();
    for (e, p) in pays.iter().enumerate() {
        let Some(min) = &net.edge_params(e).min_delegation else {
            continue;
        };
        let (need, have) = match (min.as_bits(), p.as_bits()) {
            (Some(n), Some(h)) => (n, h),
            _ => return Err(Error::Unsupported("minimum delegation needs set payments".into())),
        };
        let missing = need.difference(have);
        if !missing.is_empty() {
            let edge = net.edge(e);
            violations.push(DelegationViolation {
                edge: e,
                from: net.label(edge.source).to_string(),
                to: net.label(edge.target).to_string(),
                missing: missing.iter().collect(),
            });
        }
    }
    Ok(MinDelegationReport {
        valid: violations.is_empty(),
        violations,
    })
}

/// Least clearing section meeting every minimum delegation, if one exists
/// that is least among all valid sections.
///
/// A section is valid exactly when each vertex holds the union `m_v` of the
/// minimum delegations on its out-edges. The least fixed point `z` of
/// `x -> phi(x) ∨ m` lies below every valid section; when `z` is itself a
/// clearing section it is the least valid one, and otherwise `None` is
/// returned.
pub fn least_privilege_section(net: &LiabilityNetwork, max_iters: usize) -> Result<Option<Vec<LatticeValue>>> {
    let mut need: Vec<LatticeValue> = net.bottom();
    for e in 0..net.edge_count() {
        if let Some(min) = &net.edge_params(e).min_delegation {
            let s = net.edge(e).source;
            need[s] = net.lattice(s).join(&need[s], min)?;
        }
    }
    let mut x = need.clone();
    for _ in 0..=max_iters {
        let y = net.values_join(&net.phi(&x)?, &need)?;
        if y == x {
            let opts = SolveOptions { max_iters: 0, tol: 0.0 };
            return Ok(iterate(net, x, opts).ok().map(|s| s.values));
        }
        x = y;
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        residual: f64::NAN,
        last: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{least_clearing, SolveOptions};

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn entity(label: &str, inherent: &[&str]) -> PermissionEntity {
        PermissionEntity {
            label: label.into(),
            inherent: names(inherent),
        }
    }

    fn pedge(from: &str, to: &str, conversion: SetConversion) -> PermissionEdge {
        PermissionEdge {
            from: from.into(),
            to: to.into(),
            min: vec![],
            max: None,
            conversion,
        }
    }

    #[test]
    fn admin_propagates_down_chain() {
        let p = PermissionParams {
            universe: names(&["read", "write", "admin"]),
            entities: vec![entity("A", &["admin"]), entity("B", &[]), entity("C", &[])],
            edges: vec![
                pedge("A", "B", SetConversion::Identity),
                pedge("B", "C", SetConversion::Identity),
            ],
        };
        let net = p.build().unwrap();
        assert!(net.validate(100, 0).unwrap().passed());
        let sec = least_clearing(&net, SolveOptions::default()).unwrap();
        assert!(sec.values.iter().all(|x| x.as_bits().unwrap().contains(2)));
    }

    #[test]
    fn downgrade_replaces_admin() {
        let p = PermissionParams {
            universe: names(&["read", "write", "admin"]),
            entities: vec![entity("A", &["admin"]), entity("B", &[])],
            edges: vec![pedge(
                "A",
                "B",
                SetConversion::Downgrade {
                    map: vec![("admin".into(), names(&["read"]))],
                },
            )],
        };
        let net = p.build().unwrap();
        let sec = least_clearing(&net, SolveOptions::default()).unwrap();
        assert_eq!(sec.values[1], LatticeValue::set([0]));
    }

    #[test]
    fn minimum_delegation_witness() {
        let mut e = pedge("A", "B", SetConversion::Identity);
        e.min = names(&["read"]);
        let p = PermissionParams {
            universe: names(&["read", "write"]),
            entities: vec![entity("A", &[]), entity("B", &[])],
            edges: vec![e],
        };
        let net = p.build().unwrap();
        let report = check_min_delegation(&net, &net.bottom()).unwrap();
        assert!(!report.valid);
        assert_eq!(report.violations[0].missing, vec![0]);
        // A never acquires read, so no section is valid.
        assert_eq!(least_privilege_section(&net, 100).unwrap(), None);
    }

    #[test]
    fn rejects_min_above_max() {
        let mut e = pedge("A", "B", SetConversion::Identity);
        e.min = names(&["write"]);
        e.max = Some(names(&["read"]));
        let p = PermissionParams {
            universe: names(&["read", "write"]),
            entities: vec![entity("A", &[]), entity("B", &[])],
            edges: vec![e],
        };
        assert!(p.build().is_err());
    }
}
