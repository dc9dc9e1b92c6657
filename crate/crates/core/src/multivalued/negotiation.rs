//! Negotiation networks: parties hold downsets of acceptable positions and
//! exchange concessions.

use serde::{Deserialize, Serialize};

use super::{Correspondence, MvBounds, MvNetwork};
use crate::builders::resolve;
use crate::error::{Error, Result};
use crate::lattice::{BitSet, FinitePoset, LatticeDescriptor, LatticeValue};
use crate::model::{EdgeTag, NetworkBuilder, NodeKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Party {
    pub label: String,
    /// Positions the party can secure alone; closed downward.
    #[serde(default)]
    pub batna: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegotiationOffer {
    pub from: String,
    pub to: String,
    /// Most the sender will concede; closed downward.
    #[serde(default)]
    pub max_concession: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegotiationParams {
    pub positions: Vec<String>,
    /// Cover pairs `(lower, upper)` of the position order.
    #[serde(default)]
    pub order: Vec<(String, String)>,
    pub parties: Vec<Party>,
    #[serde(default)]
    pub offers: Vec<NegotiationOffer>,
    /// How many steps below the maximal concession a sender may offer.
    #[serde(default)]
    pub flexibility: usize,
}

/// Positions the sender could concede beyond what the receiver already holds
/// alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZopaEdge {
    pub edge: usize,
    pub from: String,
    pub to: String,
    pub gain: Vec<String>,
    pub empty: bool,
}

impl NegotiationParams {
    pub fn poset(&self) -> Result<FinitePoset> {
        let idx = |name: &str| {
            self.positions
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| Error::InvalidParams(format!("unknown position `{name}`")))
        };
        let covers = self
            .order
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        FinitePoset::new(self.positions.clone(), covers)
    }

    fn downset(&self, poset: &FinitePoset, names: &[String], what: &str) -> Result<LatticeValue> {
        let mut s = BitSet::new();
        for n in names {
            s.insert(
                poset
                    .index_of(n)
                    .ok_or_else(|| Error::InvalidParams(format!("unknown position `{n}` in {what}")))?,
            );
        }
        Ok(LatticeValue::Downset(poset.downclosure(&s)))
    }

    pub fn build(&self) -> Result<MvNetwork> {
        let poset = self.poset()?;
        let lattice = LatticeDescriptor::downset(poset.clone());
        let labels: Vec<String> = self.parties.iter().map(|p| p.label.clone()).collect();
        let mut b = NetworkBuilder::new();
        for l in &labels {
            b.vertex(l.clone(), lattice.clone(), NodeKind::PermissionUnion);
        }
        for o in &self.offers {
            let (i, j) = (resolve(&labels, &o.from)?, resolve(&labels, &o.to)?);
            if i == j {
                return Err(Error::InvalidParams(format!(
                    "party `{}` cannot offer to itself",
                    o.from
                )));
            }
            let cap = self.downset(&poset, &o.max_concession, "a concession")?;
            b.edge(i, j, cap);
        }
        let batna = self
            .parties
            .iter()
            .map(|p| self.downset(&poset, &p.batna, "a BATNA"))
            .collect::<Result<Vec<_>>>()?;
        let base = b.build()?.augment_with(&batna, EdgeTag::OverflowLoop)?;
        let n = base.vertex_count();
        let dist = Correspondence::IntervalAround {
            below: self.flexibility,
            above: 0,
        };
        MvNetwork::new(base, vec![Correspondence::Singleton; n], vec![dist; n])
    }
}

pub fn build_negotiation(params: &NegotiationParams) -> Result<MvNetwork> {
    params.build()
}

impl MvNetwork {
    /// For each offer edge, what the sender's upper boundary could concede
    /// that the receiver's BATNA lacks.
    pub fn zopa(&self, bounds: &MvBounds) -> Result<Vec<ZopaEdge>> {
        let net = self.base();
        let mut out = Vec::new();
        for (e, edge) in net.quiver().edges().iter().enumerate() {
            if edge.tag != EdgeTag::Regular {
                continue;
            }
            let (s, t) = (edge.source, edge.target);
            let d = net.lattice(t);
            let offer = d.meet(&bounds.hi[s], net.liability(e))?;
            let offer = net.edge_params(e).conversion.apply(d, &offer)?;
            let own = net.exogenous(t).cloned().unwrap_or_else(|| d.bottom());
            let (Some(o), Some(b)) = (offer.as_bits(), own.as_bits()) else {
                return Err(Error::DescriptorMismatch("negotiation states are downsets".into()));
            };
            let gain = o.difference(b);
            let names = d.labels().unwrap_or(&[]);
            out.push(ZopaEdge {
                edge: e,
                from: net.label(s).to_string(),
                to: net.label(t).to_string(),
                gain: gain.iter().filter_map(|i| names.get(i).cloned()).collect(),
                empty: gain.is_empty(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multivalued::MvInit;
    use crate::solver::SolveOptions;

    fn two_party(batna_a: &[&str], batna_b: &[&str], concession: &[&str]) -> NegotiationParams {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        NegotiationParams {
            positions: v(&["p", "q"]),
            order: vec![("p".into(), "q".into())],
            parties: vec![
                Party {
                    label: "A".into(),
                    batna: v(batna_a),
                },
                Party {
                    label: "B".into(),
                    batna: v(batna_b),
                },
            ],
            offers: vec![
                NegotiationOffer {
                    from: "A".into(),
                    to: "B".into(),
                    max_concession: v(concession),
                },
                NegotiationOffer {
                    from: "B".into(),
                    to: "A".into(),
                    max_concession: v(concession),
                },
            ],
            flexibility: 1,
        }
    }

    fn ds(items: &[usize]) -> LatticeValue {
        LatticeValue::Downset(BitSet::from_indices(items.iter().copied()))
    }

    #[test]
    fn empty_concessions_leave_batnas() {
        let mv = two_party(&["p"], &["q"], &[]).build().unwrap();
        let b = mv.solve_boundaries(MvInit::Top, SolveOptions::default()).unwrap();
        assert_eq!(b.hi, vec![ds(&[0]), ds(&[0, 1])]);
        assert_eq!(b.lo, b.hi);
        let z = mv.zopa(&b).unwrap();
        assert!(z.iter().all(|e| e.empty));
    }

    #[test]
    fn full_concessions_spread_the_better_position() {
        let mv = two_party(&["p"], &["q"], &["q"]).build().unwrap();
        let b = mv.envelope(SolveOptions::default()).unwrap();
        assert_eq!(b.hi, vec![ds(&[0, 1]), ds(&[0, 1])]);
        let z = mv.zopa(&b).unwrap();
        let ab = z.iter().find(|e| e.from == "A").unwrap();
        assert!(ab.empty);
        let ba = z.iter().find(|e| e.from == "B").unwrap();
        assert_eq!(ba.gain, vec!["q".to_string()]);
    }

    #[test]
    fn unknown_positions_are_rejected() {
        assert!(two_party(&["r"], &[], &[]).build().is_err());
    }
}
