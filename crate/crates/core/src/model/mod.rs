//! Liability networks and the clearing operator.

mod conversion;
mod node;
mod validate;

use serde::{Deserialize, Serialize};

pub use conversion::Conversion;
pub use node::{amm_output, production_scaling, Distribution, NodeBehavior, NodeCtx, NodeKind, SupplyRole};
pub use validate::{CheckResult, ValidationReport, Witness};

use crate::error::{Error, Result};
use crate::lattice::{Height, LatticeDescriptor, LatticeValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    #[default]
    Regular,
    /// Injects external resources; its liability is the injected amount.
    ExogenousLoop,
    /// Absorbs whatever the regular edges do not carry.
    OverflowLoop,
    /// Holds what may not be passed on (permission networks).
    NonDelegatableLoop,
}

impl EdgeTag {
    pub fn is_loop_tag(self) -> bool {
        self != EdgeTag::Regular
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    #[serde(default)]
    pub tag: EdgeTag,
}

/// Directed multigraph. Parallel edges and regular self-loops are allowed;
/// tagged loops must be self-loops, at most one per tag and vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuiverRepr", into = "QuiverRepr")]
pub struct Quiver {
    vertex_count: usize,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct QuiverRepr {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl TryFrom<QuiverRepr> for Quiver {
    type Error = Error;

    fn try_from(r: QuiverRepr) -> Result<Self> {
        Quiver::new(r.vertex_count, r.edges)
    }
}

impl From<Quiver> for QuiverRepr {
    fn from(q: Quiver) -> Self {
        QuiverRepr {
            vertex_count: q.vertex_count,
            edges: q.edges,
        }
    }
}

impl Quiver {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut out_edges = vec![Vec::new(); vertex_count];
        let mut in_edges = vec![Vec::new(); vertex_count];
        let mut seen_loops = std::collections::HashSet::new();
        for (id, e) in edges.iter().enumerate() {
            if e.source >= vertex_count || e.target >= vertex_count {
                return Err(Error::InvalidNetwork(format!(
                    "edge {id} ({} -> {}) leaves the {vertex_count} vertices",
                    e.source, e.target
                )));
            }
            if e.tag.is_loop_tag() {
                if e.source != e.target {
                    return Err(Error::InvalidNetwork(format!(
                        "{:?} edge {id} is not a self-loop",
                        e.tag
                    )));
                }
                if !seen_loops.insert((e.source, e.tag)) {
                    return Err(Error::InvalidNetwork(format!(
                        "vertex {} has more than one {:?}",
                        e.source, e.tag
                    )));
                }
            }
            out_edges[e.source].push(id);
            in_edges[e.target].push(id);
        }
        Ok(Quiver {
            vertex_count,
            edges,
            out_edges,
            in_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn loop_of(&self, v: usize, tag: EdgeTag) -> Option<usize> {
        self.out_edges[v].iter().copied().find(|&e| self.edges[e].tag == tag)
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Edge data beyond the nominal liability.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    /// Distribution basis used by the source's distributor. Defaults to the
    /// liability; setting it differently is how a distributor can overrun
    /// the liability bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<LatticeValue>,
    #[serde(default, skip_serializing_if = "Conversion::is_identity")]
    pub conversion: Conversion,
    /// Explicit share of the source's quantity; if any out-edge of a vertex
    /// sets one, edges without one get zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportion: Option<f64>,
    /// Carries quality information but no quantity.
    #[serde(default, skip_serializing_if = "is_false")]
    pub info_only: bool,
    /// Minimum delegation required on a permission edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_delegation: Option<LatticeValue>,
}

/// A quiver with a lattice and node kind per vertex and a nominal liability
/// per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct LiabilityNetwork {
    labels: Vec<String>,
    quiver: Quiver,
    lattices: Vec<LatticeDescriptor>,
    liabilities: Vec<LatticeValue>,
    edge_params: Vec<EdgeParams>,
    node_kinds: Vec<NodeKind>,
    regular_out: Vec<Vec<usize>>,
    regular_in: Vec<Vec<usize>>,
}

/// A per-vertex assignment with solver diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub values: Vec<LatticeValue>,
    /// Applications of the clearing operator before `values` was reached.
    pub iterations: usize,
    /// Per-vertex distance between `values` and its image.
    pub residual: Vec<f64>,
}

impl Section {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Result of checking whether an assignment is a clearing section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClearingCheck {
    pub is_clearing: bool,
    pub residual: Vec<f64>,
    /// Vertices whose state differs from its image.
    pub failing: Vec<usize>,
}

/// Incremental construction of a [`LiabilityNetwork`].
#[derive(Default)]
pub struct NetworkBuilder {
    labels: Vec<String>,
    lattices: Vec<LatticeDescriptor>,
    kinds: Vec<NodeKind>,
    edges: Vec<Edge>,
    liabilities: Vec<LatticeValue>,
    params: Vec<EdgeParams>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, label: impl Into<String>, lattice: LatticeDescriptor, kind: NodeKind) -> usize {
        self.labels.push(label.into());
        self.lattices.push(lattice);
        self.kinds.push(kind);
        self.labels.len() - 1
    }

    pub fn edge(&mut self, source: usize, target: usize, liability: LatticeValue) -> usize {
        self.edge_with(source, target, liability, EdgeParams::default())
    }

    pub fn edge_with(&mut self, source: usize, target: usize, liability: LatticeValue, params: EdgeParams) -> usize {
        self.push(
            Edge {
                source,
                target,
                tag: EdgeTag::Regular,
            },
            liability,
            params,
        )
    }

    pub fn loop_edge(&mut self, vertex: usize, tag: EdgeTag, liability: LatticeValue) -> usize {
        self.push(
            Edge {
                source: vertex,
                target: vertex,
                tag,
            },
            liability,
            EdgeParams::default(),
        )
    }

    fn push(&mut self, edge: Edge, liability: LatticeValue, params: EdgeParams) -> usize {
        self.edges.push(edge);
        self.liabilities.push(liability);
        self.params.push(params);
        self.edges.len() - 1
    }

    pub fn build(self) -> Result<LiabilityNetwork> {
        LiabilityNetwork::new(
            self.labels,
            Quiver::new(self.kinds.len(), self.edges)?,
            self.lattices,
            self.liabilities,
            self.params,
            self.kinds,
        )
    }
}

impl LiabilityNetwork {
    pub fn new(
        labels: Vec<String>,
        quiver: Quiver,
        lattices: Vec<LatticeDescriptor>,
        liabilities: Vec<LatticeValue>,
        edge_params: Vec<EdgeParams>,
        node_kinds: Vec<NodeKind>,
    ) -> Result<Self> {
        let n = quiver.vertex_count();
        let m = quiver.edges().len();
        if labels.len() != n || lattices.len() != n || node_kinds.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{n} vertices but {} labels, {} lattices and {} node kinds",
                labels.len(),
                lattices.len(),
                node_kinds.len()
            )));
        }
        if liabilities.len() != m || edge_params.len() != m {
            return Err(Error::InvalidNetwork(format!(
                "{m} edges but {} liabilities and {} parameter sets",
                liabilities.len(),
                edge_params.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidNetwork(format!("duplicate vertex label `{l}`")));
            }
        }
        let mut regular_out = vec![Vec::new(); n];
        let mut regular_in = vec![Vec::new(); n];
        for (id, e) in quiver.edges().iter().enumerate() {
            let src = &lattices[e.source];
            let tgt = &lattices[e.target];
            let context = |err: Error| {
                Error::InvalidNetwork(format!(
                    "edge {id} ({} -> {}): {err}",
                    labels[e.source], labels[e.target]
                ))
            };
            src.conforms(&liabilities[id]).map_err(context)?;
            let p = &edge_params[id];
            if let Some(c) = &p.claim {
                src.conforms(c).map_err(context)?;
            }
            if let Some(min) = &p.min_delegation {
                src.conforms(min).map_err(context)?;
                if !src.leq(min, &liabilities[id]).map_err(context)? {
                    return Err(context(Error::InvalidParams(
                        "minimum delegation exceeds the maximum".into(),
                    )));
                }
            }
            if let Some(pr) = p.proportion {
                if !(0.0..=1.0).contains(&pr) {
                    return Err(context(Error::InvalidParams(format!(
                        "proportion {pr} is outside [0, 1]"
                    ))));
                }
            }
            p.conversion.check_params().map_err(context)?;
            if e.tag == EdgeTag::Regular {
                // Converting the extremes catches shape errors early.
                for v in [src.bottom(), src.top()] {
                    let converted = p.conversion.apply(tgt, &v).map_err(context)?;
                    tgt.conforms(&tgt.clamp(converted)).map_err(context)?;
                }
                regular_out[e.source].push(id);
                regular_in[e.target].push(id);
            } else if !p.conversion.is_identity() {
                return Err(context(Error::InvalidParams("loops cannot carry conversions".into())));
            }
        }
        let net = LiabilityNetwork {
            labels,
            quiver,
            lattices,
            liabilities,
            edge_params,
            node_kinds,
            regular_out,
            regular_in,
        };
        for v in 0..n {
            net.node_kinds[v].check(&NodeCtx::new(&net, v))?;
        }
        Ok(net)
    }

    pub fn vertex_count(&self) -> usize {
        self.quiver.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.quiver.edges().len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn edge(&self, e: usize) -> &Edge {
        self.quiver.edge(e)
    }

    pub fn lattice(&self, v: usize) -> &LatticeDescriptor {
        &self.lattices[v]
    }

    pub fn lattices(&self) -> &[LatticeDescriptor] {
        &self.lattices
    }

    pub fn liability(&self, e: usize) -> &LatticeValue {
        &self.liabilities[e]
    }

    pub fn liabilities(&self) -> &[LatticeValue] {
        &self.liabilities
    }

    pub fn edge_params(&self, e: usize) -> &EdgeParams {
        &self.edge_params[e]
    }

    pub fn all_edge_params(&self) -> &[EdgeParams] {
        &self.edge_params
    }

    pub fn claim(&self, e: usize) -> &LatticeValue {
        self.edge_params[e].claim.as_ref().unwrap_or(&self.liabilities[e])
    }

    pub fn node_kind(&self, v: usize) -> &NodeKind {
        &self.node_kinds[v]
    }

    pub fn node_kinds(&self) -> &[NodeKind] {
        &self.node_kinds
    }

    pub fn regular_out(&self, v: usize) -> &[usize] {
        &self.regular_out[v]
    }

    pub fn regular_in(&self, v: usize) -> &[usize] {
        &self.regular_in[v]
    }

    pub fn exogenous_loop(&self, v: usize) -> Option<usize> {
        self.quiver.loop_of(v, EdgeTag::ExogenousLoop)
    }

    pub fn overflow_loop(&self, v: usize) -> Option<usize> {
        self.quiver.loop_of(v, EdgeTag::OverflowLoop)
    }

    pub fn nondelegatable_loop(&self, v: usize) -> Option<usize> {
        self.quiver.loop_of(v, EdgeTag::NonDelegatableLoop)
    }

    /// The loop that receives the distributor's surplus: overflow if
    /// present, otherwise the non-delegatable loop.
    pub fn surplus_loop(&self, v: usize) -> Option<usize> {
        self.overflow_loop(v).or_else(|| self.nondelegatable_loop(v))
    }

    /// Exogenous amount injected at `v`, if it has an exogenous loop.
    pub fn exogenous(&self, v: usize) -> Option<&LatticeValue> {
        self.exogenous_loop(v).map(|e| &self.liabilities[e])
    }

    pub fn bottom(&self) -> Vec<LatticeValue> {
        self.lattices.iter().map(LatticeDescriptor::bottom).collect()
    }

    pub fn top(&self) -> Vec<LatticeValue> {
        self.lattices.iter().map(LatticeDescriptor::top).collect()
    }

    /// Sum of vertex lattice heights.
    pub fn total_height(&self) -> Height {
        self.lattices
            .iter()
            .try_fold(0, |acc, d| d.height().finite().map(|h| acc + h))
            .map_or(Height::Unbounded, Height::Finite)
    }

    pub fn is_finite(&self) -> bool {
        self.lattices.iter().all(LatticeDescriptor::is_finite)
    }

    /// Adds an exogenous loop with liability `exogenous[v]` and an overflow
    /// loop with liability top to every vertex.
    pub fn augment_resources(&self, exogenous: &[LatticeValue]) -> Result<LiabilityNetwork> {
        self.augment_with(exogenous, EdgeTag::OverflowLoop)
    }

    /// Like [`augment_resources`](Self::augment_resources) with a chosen
    /// surplus loop tag.
    pub fn augment_with(&self, exogenous: &[LatticeValue], surplus_tag: EdgeTag) -> Result<LiabilityNetwork> {
        if !matches!(surplus_tag, EdgeTag::OverflowLoop | EdgeTag::NonDelegatableLoop) {
            return Err(Error::InvalidParams(format!("{surplus_tag:?} cannot absorb surplus")));
        }
        let n = self.vertex_count();
        if exogenous.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} exogenous values for {n} vertices",
                exogenous.len()
            )));
        }
        if (0..n).any(|v| self.exogenous_loop(v).is_some() || self.surplus_loop(v).is_some()) {
            return Err(Error::InvalidNetwork("network is already resource-augmented".into()));
        }
        for (v, x) in exogenous.iter().enumerate() {
            self.lattices[v]
                .conforms(x)
                .map_err(|e| Error::InvalidParams(format!("exogenous value at `{}`: {e}", self.labels[v])))?;
        }
        let mut edges = self.quiver.edges().to_vec();
        let mut liabilities = self.liabilities.clone();
        let mut params = self.edge_params.clone();
        for (v, iota) in exogenous.iter().enumerate() {
            for (tag, liab) in [
                (EdgeTag::ExogenousLoop, iota.clone()),
                (surplus_tag, self.lattices[v].top()),
            ] {
                edges.push(Edge {
                    source: v,
                    target: v,
                    tag,
                });
                liabilities.push(liab);
                params.push(EdgeParams::default());
            }
        }
        LiabilityNetwork::new(
            self.labels.clone(),
            Quiver::new(n, edges)?,
            self.lattices.clone(),
            liabilities,
            params,
            self.node_kinds.clone(),
        )
    }

    /// Checks that `x` assigns a conforming value to every vertex.
    pub fn check_values(&self, x: &[LatticeValue]) -> Result<()> {
        if x.len() != self.vertex_count() {
            return Err(Error::InvalidValue(format!(
                "{} values for {} vertices",
                x.len(),
                self.vertex_count()
            )));
        }
        for (v, (d, xv)) in self.lattices.iter().zip(x).enumerate() {
            d.conforms(xv)
                .map_err(|e| Error::InvalidValue(format!("vertex `{}`: {e}", self.labels[v])))?;
        }
        Ok(())
    }

    fn ctx(&self, v: usize) -> NodeCtx<'_> {
        NodeCtx::new(self, v)
    }

    /// Payments on every out-edge of `v` (including loops) for state `x_v`,
    /// in out-edge order.
    pub fn distribute(&self, v: usize, x_v: &LatticeValue) -> Result<Vec<(usize, LatticeValue)>> {
        let d = self.node_kinds[v].distribute(&self.ctx(v), x_v)?;
        let regular = &self.regular_out[v];
        if d.regular.len() != regular.len() {
            return Err(Error::InvalidNetwork(format!(
                "distributor at `{}` produced {} payments for {} edges",
                self.labels[v],
                d.regular.len(),
                regular.len()
            )));
        }
        let surplus_loop = self.surplus_loop(v);
        let mut regular_pays = regular.iter().zip(d.regular);
        let mut surplus = Some(d.surplus);
        let lattice = &self.lattices[v];
        let mut out = Vec::with_capacity(self.quiver.out_edges(v).len());
        for &e in self.quiver.out_edges(v) {
            let pay = match self.quiver.edge(e).tag {
                EdgeTag::Regular => {
                    let (_, p) = regular_pays.next().expect("regular payments match regular edges");
                    p
                }
                EdgeTag::ExogenousLoop => self.liabilities[e].clone(),
                _ if Some(e) == surplus_loop => surplus.take().unwrap_or_else(|| lattice.bottom()),
                _ => lattice.bottom(),
            };
            out.push((e, lattice.clamp(pay)));
        }
        Ok(out)
    }

    /// `p_e = dist_{s(e)}(x_{s(e)})_e` for every edge.
    pub fn edge_payments(&self, x: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        self.check_values(x)?;
        self.edge_payments_unchecked(x)
    }

    pub(crate) fn edge_payments_unchecked(&self, x: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        let mut pays: Vec<Option<LatticeValue>> = vec![None; self.edge_count()];
        for (v, xv) in x.iter().enumerate() {
            for (e, p) in self.distribute(v, xv)? {
                pays[e] = Some(p);
            }
        }
        Ok(pays.into_iter().map(|p| p.expect("every edge has a source")).collect())
    }

    /// Converted regular in-payments of `v`, in in-edge order.
    pub fn converted_inflows(&self, v: usize, payments: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        let tgt = &self.lattices[v];
        self.regular_in[v]
            .iter()
            .map(|&e| {
                self.edge_params[e]
                    .conversion
                    .apply(tgt, &payments[e])
                    .map(|c| tgt.clamp(c))
            })
            .collect()
    }

    /// Pay-in aggregate at `v` given payments on all edges (only `v`'s
    /// in-edges and exogenous loop are read).
    pub fn pay_in(&self, v: usize, payments: &[LatticeValue]) -> Result<LatticeValue> {
        let inflows = self.converted_inflows(v, payments)?;
        let exo = self.exogenous_loop(v).map(|e| &payments[e]);
        let raw = self.node_kinds[v].pay_in(&self.ctx(v), &inflows, exo)?;
        Ok(self.lattices[v].clamp(raw))
    }

    /// Pay-out aggregate at `v` of its out-edge payments. The exogenous loop
    /// is ignored.
    pub fn pay_out(&self, v: usize, out_payments: &[(usize, LatticeValue)]) -> Result<LatticeValue> {
        let surplus_loop = self.surplus_loop(v);
        let mut regular = Vec::new();
        let mut surplus = None;
        for (e, p) in out_payments {
            match self.quiver.edge(*e).tag {
                EdgeTag::Regular => regular.push(p.clone()),
                _ if Some(*e) == surplus_loop => surplus = Some(p),
                _ => {}
            }
        }
        let raw = self.node_kinds[v].pay_out(&self.ctx(v), &regular, surplus)?;
        Ok(self.lattices[v].clamp(raw))
    }

    /// The clearing operator.
    pub fn phi(&self, x: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        self.check_values(x)?;
        self.phi_unchecked(x)
    }

    pub(crate) fn phi_unchecked(&self, x: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        let pays = self.edge_payments_unchecked(x)?;
        (0..self.vertex_count()).map(|v| self.pay_in(v, &pays)).collect()
    }

    /// Per-vertex distances between `x` and `phi(x)`; `x` is clearing when
    /// every vertex agrees within `tol` (exactly on finite carriers).
    pub fn is_clearing_section(&self, x: &[LatticeValue], tol: f64) -> Result<ClearingCheck> {
        let y = self.phi(x)?;
        let mut residual = Vec::with_capacity(x.len());
        let mut failing = Vec::new();
        for (v, d) in self.lattices.iter().enumerate() {
            residual.push(d.distance(&x[v], &y[v])?);
            if !d.close(&x[v], &y[v], tol)? {
                failing.push(v);
            }
        }
        Ok(ClearingCheck {
            is_clearing: failing.is_empty(),
            residual,
            failing,
        })
    }

    pub fn validate(&self, samples: usize, seed: u64) -> Result<ValidationReport> {
        validate::validate(self, samples, seed)
    }

    /// Vertex-wise leq.
    pub fn section_leq(&self, a: &[LatticeValue], b: &[LatticeValue]) -> Result<bool> {
        for (d, (x, y)) in self.lattices.iter().zip(a.iter().zip(b)) {
            if !d.leq(x, y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn section_close(&self, a: &[LatticeValue], b: &[LatticeValue], tol: f64) -> Result<bool> {
        for (d, (x, y)) in self.lattices.iter().zip(a.iter().zip(b)) {
            if !d.close(x, y, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Vertex-wise meet.
    pub fn values_meet(&self, a: &[LatticeValue], b: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        self.lattices
            .iter()
            .zip(a.iter().zip(b))
            .map(|(d, (x, y))| d.meet(x, y))
            .collect()
    }

    pub fn values_join(&self, a: &[LatticeValue], b: &[LatticeValue]) -> Result<Vec<LatticeValue>> {
        self.lattices
            .iter()
            .zip(a.iter().zip(b))
            .map(|(d, (x, y))| d.join(x, y))
            .collect()
    }

    /// Every assignment of a finite network, vertex 0 varying slowest.
    pub fn enumerate_assignments(&self) -> Result<Vec<Vec<LatticeValue>>> {
        let mut acc: Vec<Vec<LatticeValue>> = vec![Vec::new()];
        let mut size = 1usize;
        for d in &self.lattices {
            let elems = d.enumerate()?;
            size = size.saturating_mul(elems.len());
            if size > crate::lattice::ENUMERATION_LIMIT {
                return Err(Error::Unsupported("payment lattice too large to enumerate".into()));
            }
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    elems.iter().map(move |e| {
                        let mut next = prefix.clone();
                        next.push(e.clone());
                        next
                    })
                })
                .collect();
        }
        Ok(acc)
    }

    /// Fixed points of the clearing operator by exhaustive search.
    pub fn brute_force_fixed_points(&self) -> Result<Vec<Vec<LatticeValue>>> {
        let mut fix = Vec::new();
        for x in self.enumerate_assignments()? {
            if self.phi_unchecked(&x)? == x {
                fix.push(x);
            }
        }
        Ok(fix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> LatticeValue {
        LatticeValue::scalar(x)
    }

    fn en_pair() -> LiabilityNetwork {
        let mut b = NetworkBuilder::new();
        let e = LatticeDescriptor::extended_nonneg();
        let a = b.vertex("A", e.clone(), NodeKind::EnProportional);
        let c = b.vertex("B", e, NodeKind::EnProportional);
        b.edge(a, c, s(10.0));
        b.edge(c, a, s(10.0));
        b.build().unwrap().augment_resources(&[s(0.0), s(0.0)]).unwrap()
    }

    #[test]
    fn quiver_rules() {
        let tagged_non_loop = Edge {
            source: 0,
            target: 1,
            tag: EdgeTag::OverflowLoop,
        };
        assert!(Quiver::new(2, vec![tagged_non_loop]).is_err());
        let lp = Edge {
            source: 0,
            target: 0,
            tag: EdgeTag::ExogenousLoop,
        };
        assert!(Quiver::new(1, vec![lp, lp]).is_err());
        assert!(Quiver::new(
            1,
            vec![Edge {
                source: 0,
                target: 3,
                tag: EdgeTag::Regular
            }]
        )
        .is_err());
        // Parallel regular edges and regular self-loops are fine.
        let r = Edge {
            source: 0,
            target: 0,
            tag: EdgeTag::Regular,
        };
        assert!(Quiver::new(1, vec![r, r]).is_ok());
    }

    #[test]
    fn augmentation_structure() {
        let net = en_pair();
        assert_eq!(net.edge_count(), 6);
        let loops = net.quiver().edges().iter().filter(|e| e.tag.is_loop_tag()).count();
        assert_eq!(loops, 4);
        assert!(net.augment_resources(&[s(0.0), s(0.0)]).is_err());
    }

    #[test]
    fn phi_two_cycle() {
        let net = en_pair();
        assert_eq!(net.phi(&[s(4.0), s(7.0)]).unwrap(), vec![s(7.0), s(4.0)]);
        assert!(net.is_clearing_section(&[s(10.0), s(10.0)], 1e-9).unwrap().is_clearing);
        let bad = net.is_clearing_section(&[s(10.0), s(9.0)], 1e-9).unwrap();
        assert!(!bad.is_clearing);
        assert_eq!(bad.residual, vec![1.0, 1.0]);
    }

    #[test]
    fn overflow_payment() {
        let mut b = NetworkBuilder::new();
        let e = LatticeDescriptor::extended_nonneg();
        let v = b.vertex("V", e.clone(), NodeKind::EnProportional);
        let w = b.vertex("W", e, NodeKind::EnProportional);
        b.edge(v, w, s(4.0));
        b.edge(v, w, s(6.0));
        let net = b.build().unwrap().augment_resources(&[s(0.0), s(0.0)]).unwrap();
        let pays = net.distribute(v, &s(12.0)).unwrap();
        let overflow = net.overflow_loop(v).unwrap();
        let on_overflow = pays.iter().find(|(e, _)| *e == overflow).unwrap();
        assert_eq!(on_overflow.1, s(2.0));
        assert_eq!(net.pay_out(v, &pays).unwrap(), s(12.0));
    }

    #[test]
    fn edge_payment_examples() {
        let mut b = NetworkBuilder::new();
        let e = LatticeDescriptor::extended_nonneg();
        let v = b.vertex("V", e.clone(), NodeKind::EnProportional);
        let w = b.vertex("W", e.clone(), NodeKind::EnProportional);
        let u = b.vertex("U", e, NodeKind::EnProportional);
        let e1 = b.edge(v, w, s(4.0));
        let e2 = b.edge(v, u, s(2.0));
        let net = b.build().unwrap().augment_resources(&[s(0.0), s(0.0), s(0.0)]).unwrap();
        let p = net.edge_payments(&[s(6.0), s(0.0), s(0.0)]).unwrap();
        assert_eq!((p[e1].clone(), p[e2].clone()), (s(4.0), s(2.0)));
        let p = net.edge_payments(&[s(3.0), s(0.0), s(0.0)]).unwrap();
        assert_eq!((p[e1].clone(), p[e2].clone()), (s(2.0), s(1.0)));
        let p = net.edge_payments(&net.bottom()).unwrap();
        assert!(p
            .iter()
            .zip(net.quiver().edges())
            .filter(|(_, e)| e.tag == EdgeTag::Regular)
            .all(|(x, _)| *x == s(0.0)));
    }

    #[test]
    fn single_vertex_exogenous() {
        let mut b = NetworkBuilder::new();
        b.vertex("V", LatticeDescriptor::extended_nonneg(), NodeKind::EnProportional);
        let net = b.build().unwrap().augment_resources(&[s(5.0)]).unwrap();
        assert_eq!(net.phi(&[s(0.0)]).unwrap(), vec![s(5.0)]);
        assert_eq!(net.phi(&[s(f64::INFINITY)]).unwrap(), vec![s(5.0)]);
    }

    #[test]
    fn rejects_nonconforming_liability() {
        let mut b = NetworkBuilder::new();
        let a = b.vertex("A", LatticeDescriptor::bounded(5.0).unwrap(), NodeKind::EnProportional);
        b.edge(a, a, s(6.0));
        assert!(b.build().is_err());
    }
}
