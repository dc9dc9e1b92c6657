use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Conversion, EdgeParams, LiabilityNetwork};
use crate::error::{Error, Result};
use crate::lattice::{ext_add, ext_mul, ext_sub_clamped, BitSet, LatticeDescriptor, LatticeKind, LatticeValue};
use crate::residuated::ResiduatedLogic;

/// Output of a distributor: one payment per regular out-edge, in the order
/// of [`NodeCtx::regular_out`], plus whatever is left for the surplus loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub regular: Vec<LatticeValue>,
    pub surplus: LatticeValue,
}

/// The maps attached to one vertex.
///
/// Implementors see only the regular edges; the network routes the
/// exogenous loop into `pay_in` and the surplus into the overflow or
/// non-delegatable loop. All three maps must be monotone and `pay_out` must
/// invert `distribute`.
pub trait NodeBehavior: Send + Sync + fmt::Debug {
    /// Structural checks run once when the network is built.
    fn check(&self, _ctx: &NodeCtx<'_>) -> Result<()> {
        Ok(())
    }

    fn distribute(&self, ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution>;

    /// `inflows` are already converted into this vertex's lattice and follow
    /// the order of [`NodeCtx::regular_in`].
    fn pay_in(
        &self,
        ctx: &NodeCtx<'_>,
        inflows: &[LatticeValue],
        exogenous: Option<&LatticeValue>,
    ) -> Result<LatticeValue>;

    fn pay_out(
        &self,
        ctx: &NodeCtx<'_>,
        regular: &[LatticeValue],
        surplus: Option<&LatticeValue>,
    ) -> Result<LatticeValue>;
}

/// A vertex as seen by its own maps.
#[derive(Clone, Copy)]
pub struct NodeCtx<'a> {
    net: &'a LiabilityNetwork,
    vertex: usize,
}

impl<'a> NodeCtx<'a> {
    pub(crate) fn new(net: &'a LiabilityNetwork, vertex: usize) -> Self {
        NodeCtx { net, vertex }
    }

    pub fn network(&self) -> &'a LiabilityNetwork {
        self.net
    }

    pub fn vertex(&self) -> usize {
        self.vertex
    }

    pub fn lattice(&self) -> &'a LatticeDescriptor {
        self.net.lattice(self.vertex)
    }

    pub fn regular_out(&self) -> &'a [usize] {
        self.net.regular_out(self.vertex)
    }

    pub fn regular_in(&self) -> &'a [usize] {
        self.net.regular_in(self.vertex)
    }

    pub fn liability(&self, edge: usize) -> &'a LatticeValue {
        self.net.liability(edge)
    }

    /// Distribution basis of an edge: its claim if set, else its liability.
    pub fn claim(&self, edge: usize) -> &'a LatticeValue {
        self.net.claim(edge)
    }

    pub fn params(&self, edge: usize) -> &'a EdgeParams {
        self.net.edge_params(edge)
    }

    fn fail(&self, msg: impl fmt::Display) -> Error {
        Error::InvalidNetwork(format!("vertex `{}`: {msg}", self.net.label(self.vertex)))
    }
}

/// Roles in a supply network. All roles share the quantity-quality
/// distributor; they differ in how they aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SupplyRole {
    /// Sums quantities and combines qualities (suppliers, assembly, distribution).
    Relay,
    /// Scales summed quantity by the threshold production factor.
    Manufacturer { thresholds: Vec<f64>, gamma: f64 },
    /// Emits no quantity; quality is capped by `omega ⊗ previous`.
    Tester { omega: f64, previous: Vec<f64> },
}

/// The parametric catalog of vertex maps.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    /// Proportional sharing of a scalar with overflow.
    EnProportional,
    /// Same maps as `EnProportional`; in-edges carry currency conversions.
    CurrencySum,
    /// Quantity-quality pairs: quantities add, qualities combine by t-norm.
    ResiduatedQuality { logic: ResiduatedLogic },
    SupplyTransform {
        #[serde(default = "godel")]
        logic: ResiduatedLogic,
        role: SupplyRole,
    },
    /// Sets or downsets: delegate what is held, union what arrives.
    PermissionUnion,
    /// Token-pair pool with swap output `y - kappa / x`.
    AmmConstantProduct { kappa: f64 },
    /// Tuples of bucket scalars with per-bucket proportional sharing.
    TermStructure,
    /// Maps registered in code under `name`.
    Custom {
        name: String,
        #[serde(skip)]
        behavior: Option<Arc<dyn NodeBehavior>>,
    },
}

fn godel() -> ResiduatedLogic {
    ResiduatedLogic::Godel
}

impl fmt::Debug for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::EnProportional => f.write_str("EnProportional"),
            NodeKind::CurrencySum => f.write_str("CurrencySum"),
            NodeKind::ResiduatedQuality { logic } => write!(f, "ResiduatedQuality({logic:?})"),
            NodeKind::SupplyTransform { logic, role } => write!(f, "SupplyTransform({logic:?}, {role:?})"),
            NodeKind::PermissionUnion => f.write_str("PermissionUnion"),
            NodeKind::AmmConstantProduct { kappa } => write!(f, "AmmConstantProduct({kappa})"),
            NodeKind::TermStructure => f.write_str("TermStructure"),
            NodeKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Custom kinds compare by name.
impl PartialEq for NodeKind {
    fn eq(&self, other: &Self) -> bool {
        use NodeKind::*;
        match (self, other) {
            (EnProportional, EnProportional)
            | (CurrencySum, CurrencySum)
            | (PermissionUnion, PermissionUnion)
            | (TermStructure, TermStructure) => true,
            (ResiduatedQuality { logic: a }, ResiduatedQuality { logic: b }) => a == b,
            (SupplyTransform { logic: a, role: r }, SupplyTransform { logic: b, role: s }) => a == b && r == s,
            (AmmConstantProduct { kappa: a }, AmmConstantProduct { kappa: b }) => a == b,
            (Custom { name: a, .. }, Custom { name: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl NodeKind {
    pub fn custom(name: impl Into<String>, behavior: Arc<dyn NodeBehavior>) -> Self {
        NodeKind::Custom {
            name: name.into(),
            behavior: Some(behavior),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            NodeKind::EnProportional => "en_proportional",
            NodeKind::CurrencySum => "currency_sum",
            NodeKind::ResiduatedQuality { .. } => "residuated_quality",
            NodeKind::SupplyTransform { .. } => "supply_transform",
            NodeKind::PermissionUnion => "permission_union",
            NodeKind::AmmConstantProduct { .. } => "amm_constant_product",
            NodeKind::TermStructure => "term_structure",
            NodeKind::Custom { name, .. } => name,
        }
    }

    fn custom_behavior(&self) -> Result<&dyn NodeBehavior> {
        match self {
            NodeKind::Custom { behavior: Some(b), .. } => Ok(b.as_ref()),
            NodeKind::Custom { name, behavior: None } => Err(Error::InvalidNetwork(format!(
                "custom node kind `{name}` has no registered behavior"
            ))),
            _ => unreachable!("only called on custom kinds"),
        }
    }

    pub(crate) fn check(&self, ctx: &NodeCtx<'_>) -> Result<()> {
        match self {
            NodeKind::EnProportional | NodeKind::CurrencySum => {
                scalar_leaf(ctx.lattice()).ok_or_else(|| ctx.fail("proportional nodes need a scalar lattice"))?;
                finite_scalar_claims(ctx)
            }
            NodeKind::ResiduatedQuality { .. } => quality_dim(ctx).map(|_| ()),
            NodeKind::SupplyTransform { role, .. } => {
                let dim = quality_dim(ctx)?;
                check_role(ctx, role, dim)
            }
            NodeKind::PermissionUnion => match ctx.lattice().kind() {
                LatticeKind::FiniteSet { .. } | LatticeKind::Downset { .. } => Ok(()),
                _ => Err(ctx.fail("permission nodes need a finite set or downset lattice")),
            },
            NodeKind::AmmConstantProduct { kappa } => {
                if !(kappa.is_finite() && *kappa > 0.0) {
                    return Err(ctx.fail(format!("pool invariant {kappa} must be positive")));
                }
                match ctx.lattice().components() {
                    Some([a, b])
                        if matches!(a.kind(), LatticeKind::ExtendedNonneg)
                            && matches!(b.kind(), LatticeKind::ExtendedNonneg) => {}
                    _ => return Err(ctx.fail("pools need a pair of extended scalars")),
                }
                for &e in ctx.regular_out() {
                    amm_side(ctx, e)?;
                }
                Ok(())
            }
            NodeKind::TermStructure => {
                let buckets = ctx
                    .lattice()
                    .components()
                    .ok_or_else(|| ctx.fail("term structure nodes need a tuple of buckets"))?;
                if !buckets.iter().all(|b| matches!(b.kind(), LatticeKind::Bounded { .. })) {
                    return Err(ctx.fail("term structure buckets must be bounded scalars"));
                }
                Ok(())
            }
            NodeKind::Custom { .. } => self.custom_behavior()?.check(ctx),
        }
    }

    pub(crate) fn distribute(&self, ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution> {
        match self {
            NodeKind::EnProportional | NodeKind::CurrencySum => scalar_distribute(ctx, x),
            NodeKind::ResiduatedQuality { .. } | NodeKind::SupplyTransform { .. } => quality_distribute(ctx, x),
            NodeKind::PermissionUnion => permission_distribute(ctx, x),
            NodeKind::AmmConstantProduct { kappa } => amm_distribute(ctx, *kappa, x),
            NodeKind::TermStructure => term_distribute(ctx, x),
            NodeKind::Custom { .. } => self.custom_behavior()?.distribute(ctx, x),
        }
    }

    pub(crate) fn pay_in(
        &self,
        ctx: &NodeCtx<'_>,
        inflows: &[LatticeValue],
        exogenous: Option<&LatticeValue>,
    ) -> Result<LatticeValue> {
        match self {
            NodeKind::EnProportional
            | NodeKind::CurrencySum
            | NodeKind::AmmConstantProduct { .. }
            | NodeKind::TermStructure => sum_values(ctx.lattice(), exogenous, inflows),
            NodeKind::ResiduatedQuality { logic } => {
                quality_pay_in(ctx, *logic, &SupplyRole::Relay, inflows, exogenous)
            }
            NodeKind::SupplyTransform { logic, role } => quality_pay_in(ctx, *logic, role, inflows, exogenous),
            NodeKind::PermissionUnion => join_values(ctx.lattice(), exogenous, inflows),
            NodeKind::Custom { .. } => self.custom_behavior()?.pay_in(ctx, inflows, exogenous),
        }
    }

    pub(crate) fn pay_out(
        &self,
        ctx: &NodeCtx<'_>,
        regular: &[LatticeValue],
        surplus: Option<&LatticeValue>,
    ) -> Result<LatticeValue> {
        match self {
            NodeKind::EnProportional | NodeKind::CurrencySum | NodeKind::TermStructure => {
                sum_values(ctx.lattice(), surplus, regular)
            }
            NodeKind::ResiduatedQuality { .. } | NodeKind::SupplyTransform { .. } => {
                quality_pay_out(ctx, regular, surplus)
            }
            NodeKind::PermissionUnion | NodeKind::AmmConstantProduct { .. } => {
                join_values(ctx.lattice(), surplus, regular)
            }
            NodeKind::Custom { .. } => self.custom_behavior()?.pay_out(ctx, regular, surplus),
        }
    }
}

fn scalar_leaf(d: &LatticeDescriptor) -> Option<()> {
    matches!(d.kind(), LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. }).then_some(())
}

fn finite_scalar_claims(ctx: &NodeCtx<'_>) -> Result<()> {
    for &e in ctx.regular_out() {
        match ctx.claim(e).as_scalar() {
            Some(c) if c.is_finite() => {}
            _ => return Err(ctx.fail(format!("edge {e} needs a finite scalar claim"))),
        }
    }
    Ok(())
}

fn quality_dim(ctx: &NodeCtx<'_>) -> Result<usize> {
    match ctx.lattice().components() {
        Some([q, mu]) if scalar_leaf(q).is_some() => match mu.kind() {
            LatticeKind::UnitVector { dim } => {
                for &e in ctx.regular_out() {
                    let claim_q = ctx.claim(e).as_tuple().and_then(|t| t[0].as_scalar());
                    if !claim_q.is_some_and(f64::is_finite) {
                        return Err(ctx.fail(format!("edge {e} needs a finite quantity claim")));
                    }
                }
                Ok(*dim)
            }
            _ => Err(ctx.fail("quality nodes need a (scalar, unit vector) lattice")),
        },
        _ => Err(ctx.fail("quality nodes need a (scalar, unit vector) lattice")),
    }
}

fn check_role(ctx: &NodeCtx<'_>, role: &SupplyRole, dim: usize) -> Result<()> {
    match role {
        SupplyRole::Relay => Ok(()),
        SupplyRole::Manufacturer { thresholds, gamma } => {
            if thresholds.len() != dim {
                return Err(ctx.fail(format!("{} thresholds for {dim} quality attributes", thresholds.len())));
            }
            if let Some(t) = thresholds.iter().find(|t| !(0.0..1.0).contains(*t)) {
                return Err(ctx.fail(format!("threshold {t} must lie in [0, 1)")));
            }
            if !(gamma.is_finite() && *gamma > 1.0) {
                return Err(ctx.fail(format!("production exponent {gamma} must exceed 1")));
            }
            Ok(())
        }
        SupplyRole::Tester { omega, previous } => {
            if !(*omega > 0.0 && *omega < 1.0) {
                return Err(ctx.fail(format!("memory weight {omega} must lie in (0, 1)")));
            }
            if previous.len() != dim || previous.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(ctx.fail("previous quality must be a unit vector of the lattice dimension"));
            }
            Ok(())
        }
    }
}

/// Proportional split of a scalar amount over out-edges.
///
/// Without explicit proportions the shares follow the claims, and an amount
/// at or above the total claim pays every claim in full. Returns the edge
/// payments and what is left over.
pub(crate) fn split_scalar(x: f64, claims: &[f64], proportions: &[Option<f64>], info_only: &[bool]) -> (Vec<f64>, f64) {
    let explicit = proportions.iter().any(Option::is_some);
    let total = claims
        .iter()
        .zip(info_only)
        .filter(|(_, info)| !**info)
        .fold(0.0, |acc, (c, _)| acc + c);
    let pays: Vec<f64> = claims
        .iter()
        .zip(proportions)
        .zip(info_only)
        .map(|((&c, p), &info)| {
            if info {
                return 0.0;
            }
            let share = if explicit {
                ext_mul(p.unwrap_or(0.0), x)
            } else if total == 0.0 {
                0.0
            } else if x >= total {
                c
            } else {
                c * x / total
            };
            share.min(c)
        })
        .collect();
    let paid = pays.iter().fold(0.0, |acc, p| acc + p);
    (pays, ext_sub_clamped(x, paid))
}

fn scalar_distribute(ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution> {
    let x = x.as_scalar().ok_or_else(|| ctx.fail("expected a scalar state"))?;
    let out = ctx.regular_out();
    let claims: Vec<f64> = out.iter().map(|&e| ctx.claim(e).as_scalar().unwrap_or(0.0)).collect();
    let props: Vec<Option<f64>> = out.iter().map(|&e| ctx.params(e).proportion).collect();
    let info: Vec<bool> = out.iter().map(|&e| ctx.params(e).info_only).collect();
    let (pays, surplus) = split_scalar(x, &claims, &props, &info);
    Ok(Distribution {
        regular: pays.into_iter().map(LatticeValue::Scalar).collect(),
        surplus: LatticeValue::Scalar(surplus),
    })
}

fn quality_parts(v: &LatticeValue) -> Option<(f64, &[f64])> {
    match v.as_tuple()? {
        [LatticeValue::Scalar(q), LatticeValue::Vector(mu)] => Some((*q, mu)),
        _ => None,
    }
}

fn quality_value(q: f64, mu: Vec<f64>) -> LatticeValue {
    LatticeValue::tuple([LatticeValue::Scalar(q), LatticeValue::Vector(mu)])
}

fn quality_distribute(ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution> {
    let (q, mu) = quality_parts(x).ok_or_else(|| ctx.fail("expected a (quantity, quality) state"))?;
    let out = ctx.regular_out();
    let mut claims = Vec::with_capacity(out.len());
    let mut caps = Vec::with_capacity(out.len());
    for &e in out {
        let (c, cap) = quality_parts(ctx.claim(e)).ok_or_else(|| ctx.fail(format!("edge {e} claim is not a pair")))?;
        claims.push(c);
        caps.push(cap);
    }
    let props: Vec<Option<f64>> = out.iter().map(|&e| ctx.params(e).proportion).collect();
    let info: Vec<bool> = out.iter().map(|&e| ctx.params(e).info_only).collect();
    let (pays, surplus) = split_scalar(q, &claims, &props, &info);
    let regular = pays
        .into_iter()
        .zip(caps)
        .map(|(p, cap)| quality_value(p, mu.iter().zip(cap).map(|(m, c)| m.min(*c)).collect()))
        .collect();
    Ok(Distribution {
        regular,
        surplus: quality_value(surplus, mu.to_vec()),
    })
}

/// Production factor `min_i max(0, (q_i - theta_i) / (1 - theta_i))^gamma`.
pub fn production_scaling(quality: &[f64], thresholds: &[f64], gamma: f64) -> f64 {
    quality
        .iter()
        .zip(thresholds)
        .map(|(q, t)| ((q - t) / (1.0 - t)).max(0.0).powf(gamma))
        .fold(1.0, f64::min)
}

fn quality_pay_in(
    ctx: &NodeCtx<'_>,
    logic: ResiduatedLogic,
    role: &SupplyRole,
    inflows: &[LatticeValue],
    exogenous: Option<&LatticeValue>,
) -> Result<LatticeValue> {
    let dim = match ctx.lattice().components() {
        Some([_, mu]) => match mu.kind() {
            LatticeKind::UnitVector { dim } => *dim,
            _ => return Err(ctx.fail("expected a unit vector quality")),
        },
        _ => return Err(ctx.fail("expected a (quantity, quality) lattice")),
    };
    let mut quantity = 0.0;
    let mut quality = vec![1.0; dim];
    for v in exogenous.into_iter().chain(inflows) {
        let (q, mu) = quality_parts(v).ok_or_else(|| ctx.fail("expected (quantity, quality) payments"))?;
        quantity = ext_add(quantity, q);
        quality = logic.tnorm_vec(&quality, mu)?;
    }
    Ok(match role {
        SupplyRole::Relay => quality_value(quantity, quality),
        SupplyRole::Manufacturer { thresholds, gamma } => {
            let factor = production_scaling(&quality, thresholds, *gamma);
            quality_value(ext_mul(quantity, factor), quality)
        }
        SupplyRole::Tester { omega, previous } => {
            let memory: Vec<f64> = previous
                .iter()
                .map(|p| logic.tnorm(*omega, *p))
                .collect::<Result<_>>()?;
            quality_value(0.0, quality.iter().zip(memory).map(|(q, m)| q.min(m)).collect())
        }
    })
}

fn quality_pay_out(
    ctx: &NodeCtx<'_>,
    regular: &[LatticeValue],
    surplus: Option<&LatticeValue>,
) -> Result<LatticeValue> {
    let bottom = ctx.lattice().bottom();
    let (_, zero) = quality_parts(&bottom).ok_or_else(|| ctx.fail("expected a (quantity, quality) lattice"))?;
    let mut quantity = 0.0;
    let mut quality = zero.to_vec();
    for v in regular.iter().chain(surplus) {
        let (q, mu) = quality_parts(v).ok_or_else(|| ctx.fail("expected (quantity, quality) payments"))?;
        quantity = ext_add(quantity, q);
        for (acc, m) in quality.iter_mut().zip(mu) {
            *acc = acc.max(*m);
        }
    }
    Ok(quality_value(quantity, quality))
}

fn permission_distribute(ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution> {
    let held = x.as_bits().ok_or_else(|| ctx.fail("expected a set state"))?;
    let wrap = |s: BitSet| match x {
        LatticeValue::Downset(_) => LatticeValue::Downset(s),
        _ => LatticeValue::Set(s),
    };
    let mut delegable = BitSet::new();
    let mut regular = Vec::new();
    for &e in ctx.regular_out() {
        let cap = ctx
            .claim(e)
            .as_bits()
            .ok_or_else(|| ctx.fail(format!("edge {e} claim is not a set")))?;
        delegable = delegable.union(cap);
        regular.push(wrap(held.intersection(cap)));
    }
    // A set difference of downsets need not be a downset, so downset
    // vertices keep their whole state on the surplus loop.
    let surplus = match x {
        LatticeValue::Downset(_) => x.clone(),
        _ => LatticeValue::Set(held.difference(&delegable)),
    };
    Ok(Distribution { regular, surplus })
}

fn amm_side(ctx: &NodeCtx<'_>, e: usize) -> Result<usize> {
    match ctx.params(e).conversion {
        Conversion::Token { from_side, .. } => Ok(from_side),
        _ => Err(ctx.fail(format!("pool edge {e} needs a token route conversion"))),
    }
}

/// Swap output on `side` for a pool holding `state` under invariant `kappa`.
pub fn amm_output(state: [f64; 2], side: usize, kappa: f64) -> f64 {
    let other = state[1 - side];
    if other == 0.0 {
        0.0
    } else {
        ext_sub_clamped(state[side], kappa / other)
    }
}

fn pair_of(v: &LatticeValue) -> Option<[f64; 2]> {
    match v.as_tuple()? {
        [LatticeValue::Scalar(a), LatticeValue::Scalar(b)] => Some([*a, *b]),
        _ => None,
    }
}

fn amm_distribute(ctx: &NodeCtx<'_>, kappa: f64, x: &LatticeValue) -> Result<Distribution> {
    let state = pair_of(x).ok_or_else(|| ctx.fail("expected a token pair state"))?;
    let out = ctx.regular_out();
    let mut sides = Vec::with_capacity(out.len());
    let mut caps = Vec::with_capacity(out.len());
    for &e in out {
        let side = amm_side(ctx, e)?;
        let cap = pair_of(ctx.claim(e)).ok_or_else(|| ctx.fail(format!("edge {e} claim is not a token pair")))?;
        sides.push(side);
        caps.push(cap[side]);
    }
    let mut regular = vec![LatticeValue::Scalar(0.0); out.len()];
    for side in 0..2 {
        let idx: Vec<usize> = (0..out.len()).filter(|&i| sides[i] == side).collect();
        if idx.is_empty() {
            continue;
        }
        let h = amm_output(state, side, kappa);
        let claims: Vec<f64> = idx.iter().map(|&i| caps[i]).collect();
        let (pays, _) = split_scalar(h, &claims, &vec![None; idx.len()], &vec![false; idx.len()]);
        for (&i, p) in idx.iter().zip(pays) {
            let mut pair = [LatticeValue::Scalar(0.0), LatticeValue::Scalar(0.0)];
            pair[side] = LatticeValue::Scalar(p);
            regular[i] = LatticeValue::tuple(pair);
        }
    }
    Ok(Distribution {
        regular,
        surplus: x.clone(),
    })
}

fn term_distribute(ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution> {
    let buckets = scalars(x).ok_or_else(|| ctx.fail("expected a tuple of bucket scalars"))?;
    let out = ctx.regular_out();
    let claims: Vec<Vec<f64>> = out
        .iter()
        .map(|&e| scalars(ctx.claim(e)).ok_or_else(|| ctx.fail(format!("edge {e} claim is not a bucket tuple"))))
        .collect::<Result<_>>()?;
    let info: Vec<bool> = out.iter().map(|&e| ctx.params(e).info_only).collect();
    let mut regular = vec![Vec::with_capacity(buckets.len()); out.len()];
    let mut surplus = Vec::with_capacity(buckets.len());
    for (t, &xt) in buckets.iter().enumerate() {
        let ct: Vec<f64> = claims.iter().map(|c| c[t]).collect();
        let (pays, rest) = split_scalar(xt, &ct, &vec![None; out.len()], &info);
        for (r, p) in regular.iter_mut().zip(pays) {
            r.push(LatticeValue::Scalar(p));
        }
        surplus.push(LatticeValue::Scalar(rest));
    }
    Ok(Distribution {
        regular: regular.into_iter().map(LatticeValue::Tuple).collect(),
        surplus: LatticeValue::Tuple(surplus),
    })
}

fn scalars(v: &LatticeValue) -> Option<Vec<f64>> {
    v.as_tuple()?.iter().map(LatticeValue::as_scalar).collect()
}

/// Componentwise sum of scalars, starting from `first` or bottom.
fn sum_values(d: &LatticeDescriptor, first: Option<&LatticeValue>, rest: &[LatticeValue]) -> Result<LatticeValue> {
    let mut acc = d.bottom();
    for v in first.into_iter().chain(rest) {
        acc = add_values(&acc, v)?;
    }
    Ok(acc)
}

fn add_values(a: &LatticeValue, b: &LatticeValue) -> Result<LatticeValue> {
    match (a, b) {
        (LatticeValue::Scalar(x), LatticeValue::Scalar(y)) => Ok(LatticeValue::Scalar(ext_add(*x, *y))),
        (LatticeValue::Tuple(xs), LatticeValue::Tuple(ys)) if xs.len() == ys.len() => Ok(LatticeValue::Tuple(
            xs.iter()
                .zip(ys)
                .map(|(x, y)| add_values(x, y))
                .collect::<Result<_>>()?,
        )),
        _ => Err(Error::DescriptorMismatch(format!(
            "cannot add {} and {} values",
            a.kind_name(),
            b.kind_name()
        ))),
    }
}

fn join_values(d: &LatticeDescriptor, first: Option<&LatticeValue>, rest: &[LatticeValue]) -> Result<LatticeValue> {
    let mut acc = d.bottom();
    for v in first.into_iter().chain(rest) {
        acc = d.join(&acc, v)?;
    }
    Ok(acc)
}
