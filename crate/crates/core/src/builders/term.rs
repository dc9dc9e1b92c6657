use serde::{Deserialize, Serialize};

use super::{check_nonneg, resolve};
use crate::error::{Error, Result};
use crate::lattice::{ext_add, ext_mul, LatticeDescriptor, LatticeValue};
use crate::model::{Conversion, EdgeParams, LiabilityNetwork, NetworkBuilder, NodeKind};

/// Payment rates per time bucket on `from -> to`, with an optional kernel
/// applied at the target (`identity` when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEdge {
    pub from: String,
    pub to: String,
    pub rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<Vec<f64>>>,
}

/// The horizon `[0, horizon]` is cut into `buckets` equal intervals; a rate
/// `r` in a bucket is an amount `r * horizon / buckets`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermParams {
    pub labels: Vec<String>,
    pub buckets: usize,
    pub horizon: f64,
    pub edges: Vec<TermEdge>,
    /// External amount per vertex and bucket.
    pub assets: Vec<Vec<f64>>,
}

impl TermParams {
    pub fn build(&self) -> Result<LiabilityNetwork> {
        let n = self.labels.len();
        let k = self.buckets;
        if k == 0 {
            return Err(Error::InvalidParams("at least one time bucket is needed".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "horizon {} must be positive",
                self.horizon
            )));
        }
        if self.assets.len() != n || self.assets.iter().any(|a| a.len() != k) {
            return Err(Error::InvalidParams(format!(
                "assets must be {n} vectors of {k} buckets"
            )));
        }
        let width = self.horizon / k as f64;
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let (i, j) = (resolve(&self.labels, &e.from)?, resolve(&self.labels, &e.to)?);
            if e.rates.len() != k {
                return Err(Error::InvalidParams(format!(
                    "edge {} -> {} needs {k} rates",
                    e.from, e.to
                )));
            }
            let amounts: Vec<f64> = e.rates.iter().map(|r| r * width).collect();
            for a in &amounts {
                check_nonneg("bucket liability", *a)?;
            }
            let conversion = match &e.kernel {
                None => Conversion::Identity,
                Some(m) => {
                    if m.len() != k {
                        return Err(Error::InvalidParams(format!(
                            "kernel on {} -> {} must be {k}x{k}",
                            e.from, e.to
                        )));
                    }
                    Conversion::Kernel { matrix: m.clone() }
                }
            };
            conversion.check_params()?;
            edges.push((i, j, amounts, conversion));
        }

        // Each bucket is bounded by the larger of the largest possible pay-in
        // and the total owed, so the top state pays every liability in full.
        // Both sums follow the aggregators' order to keep reductions exact.
        let mut upper: Vec<Vec<f64>> = self
            .assets
            .iter()
            .map(|a| a.iter().map(|x| 0.0 + x).collect())
            .collect();
        for a in self.assets.iter().flatten() {
            check_nonneg("external asset", *a)?;
        }
        for (_, j, amounts, conversion) in &edges {
            let incoming: Vec<f64> = match conversion {
                Conversion::Kernel { matrix } => matrix
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(amounts)
                            .fold(0.0, |acc, (m, x)| ext_add(acc, ext_mul(*m, *x)))
                    })
                    .collect(),
                _ => amounts.clone(),
            };
            for (u, x) in upper[*j].iter_mut().zip(incoming) {
                *u = ext_add(*u, x);
            }
        }

        let mut owed = vec![vec![0.0; k]; n];
        for (i, _, amounts, _) in &edges {
            for (o, a) in owed[*i].iter_mut().zip(amounts) {
                *o += a;
            }
        }
        for (u, o) in upper.iter_mut().flatten().zip(owed.iter().flatten()) {
            *u = u.max(*o);
        }

        let mut b = NetworkBuilder::new();
        for (l, u) in self.labels.iter().zip(&upper) {
            let buckets = u
                .iter()
                .map(|&x| LatticeDescriptor::bounded(x))
                .collect::<Result<Vec<_>>>()?;
            b.vertex(l.clone(), LatticeDescriptor::product(buckets)?, NodeKind::TermStructure);
        }
        let bucket_tuple = |xs: &[f64]| LatticeValue::Tuple(xs.iter().map(|&x| LatticeValue::Scalar(x)).collect());
        for (i, j, amounts, conversion) in edges {
            let params = EdgeParams {
                conversion,
                ..EdgeParams::default()
            };
            b.edge_with(i, j, bucket_tuple(&amounts), params);
        }
        let exogenous: Vec<_> = self.assets.iter().map(|a| bucket_tuple(a)).collect();
        b.build()?.augment_resources(&exogenous)
    }
}

pub fn build_term_structure(params: &TermParams) -> Result<LiabilityNetwork> {
    params.build()
}
