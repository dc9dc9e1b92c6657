use serde::{Deserialize, Serialize};

use super::{check_nonneg, labels_or_default};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{EdgeTag, LiabilityNetwork, NetworkBuilder, NodeKind};

/// Interbank liabilities `liabilities[i][j]` owed by `i` to `j`, and external
/// assets per bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub liabilities: Vec<Vec<f64>>,
    pub assets: Vec<f64>,
}

impl EnParams {
    pub fn build(&self) -> Result<LiabilityNetwork> {
        let n = self.assets.len();
        if self.liabilities.len() != n || self.liabilities.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParams(format!("liability matrix must be {n}x{n}")));
        }
        let labels = labels_or_default(&self.labels, n)?;
        let mut b = NetworkBuilder::new();
        for l in labels {
            b.vertex(l, LatticeDescriptor::extended_nonneg(), NodeKind::EnProportional);
        }
        for (i, row) in self.liabilities.iter().enumerate() {
            for (j, &l) in row.iter().enumerate() {
                check_nonneg("liability", l)?;
                if i == j && l != 0.0 {
                    return Err(Error::InvalidParams(format!("bank {i} owes itself {l}")));
                }
                if l > 0.0 {
                    b.edge(i, j, LatticeValue::Scalar(l));
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

pub fn build_eisenberg_noe(liabilities: &[Vec<f64>], assets: &[f64]) -> Result<LiabilityNetwork> {
    EnParams {
        labels: None,
        liabilities: liabilities.to_vec(),
        assets: assets.to_vec(),
    }
    .build()
}

/// Total paid on regular edges by each vertex of a scalar network. For an
/// interbank network this is the clearing payment vector `min(x, total owed)`.
pub fn payment_vector(net: &LiabilityNetwork, values: &[LatticeValue]) -> Result<Vec<f64>> {
    let pays = net.edge_payments(values)?;
    let mut out = vec![0.0; net.vertex_count()];
    for (e, p) in pays.iter().enumerate() {
        let edge = net.edge(e);
        if edge.tag == EdgeTag::Regular {
            out[edge.source] += p
                .as_scalar()
                .ok_or_else(|| Error::Unsupported("payment vectors need scalar payments".into()))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{greatest_clearing, least_clearing, SolveOptions};

    fn s(x: f64) -> LatticeValue {
        LatticeValue::scalar(x)
    }

    #[test]
    fn two_cycle() {
        let net = build_eisenberg_noe(&[vec![0.0, 10.0], vec![10.0, 0.0]], &[0.0, 0.0]).unwrap();
        let o = SolveOptions::default();
        assert_eq!(greatest_clearing(&net, o).unwrap().values, vec![s(10.0), s(10.0)]);
        assert_eq!(least_clearing(&net, o).unwrap().values, vec![s(0.0), s(0.0)]);
        assert!(net.validate(200, 0).unwrap().passed());
    }

    #[test]
    fn three_cycle_payments() {
        let l = vec![vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 2.0], vec![2.0, 0.0, 0.0]];
        let net = build_eisenberg_noe(&l, &[1.0, 0.0, 0.0]).unwrap();
        let sec = greatest_clearing(&net, SolveOptions::default()).unwrap();
        assert_eq!(payment_vector(&net, &sec.values).unwrap(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn no_creditors_keeps_assets() {
        let net = build_eisenberg_noe(&[vec![0.0, 0.0], vec![3.0, 0.0]], &[4.0, 1.0]).unwrap();
        let sec = greatest_clearing(&net, SolveOptions::default()).unwrap();
        assert_eq!(sec.values, vec![s(5.0), s(1.0)]);
        let pays = net.edge_payments(&sec.values).unwrap();
        let overflow = net.overflow_loop(0).unwrap();
        assert_eq!(pays[overflow], s(5.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_eisenberg_noe(&[vec![0.0, -1.0], vec![0.0, 0.0]], &[0.0, 0.0]).is_err());
        assert!(build_eisenberg_noe(&[vec![1.0]], &[0.0]).is_err());
        assert!(build_eisenberg_noe(&[vec![0.0]], &[0.0, 1.0]).is_err());
    }
}
