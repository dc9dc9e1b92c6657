#![allow(dead_code)]

use std::sync::Arc;

use clearing_core::builders::{PermissionEdge, PermissionEntity, PermissionParams, SetConversion};
use clearing_core::lattice::{FinitePoset, LatticeDescriptor, LatticeValue};
use clearing_core::model::{
    Conversion, Distribution, EdgeParams, EdgeTag, LiabilityNetwork, NetworkBuilder, NodeBehavior, NodeCtx, NodeKind,
};
use clearing_core::Result;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_lattice(rng: &mut ChaCha8Rng) -> LatticeDescriptor {
    if rng.gen_bool(0.5) {
        LatticeDescriptor::finite_set_n(rng.gen_range(1..=3)).unwrap()
    } else {
        let k = rng.gen_range(2..=3);
        let mut covers = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if rng.gen_bool(0.4) {
                    covers.push((i, j));
                }
            }
        }
        let names = (0..k).map(|i| format!("p{i}")).collect();
        LatticeDescriptor::downset(FinitePoset::new(names, covers).unwrap())
    }
}

fn pick(rng: &mut ChaCha8Rng, d: &LatticeDescriptor, top_bias: f64) -> LatticeValue {
    if rng.gen_bool(top_bias) {
        return d.top();
    }
    d.enumerate().unwrap().choose(rng).unwrap().clone()
}

fn element_count(d: &LatticeDescriptor) -> usize {
    d.labels().map_or(0, <[String]>::len)
}

/// A resource-augmented permission-style net on 2 to 4 vertices with set or
/// downset carriers; the product of carrier sizes is at most 4096.
pub fn random_finite_net(rng: &mut ChaCha8Rng) -> LiabilityNetwork {
    let n = rng.gen_range(2..=4);
    let shared = random_lattice(rng);
    let lattices: Vec<LatticeDescriptor> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.7) {
                shared.clone()
            } else {
                random_lattice(rng)
            }
        })
        .collect();
    let mut b = NetworkBuilder::new();
    for (v, d) in lattices.iter().enumerate() {
        b.vertex(format!("V{v}"), d.clone(), NodeKind::PermissionUnion);
    }
    // Half the nets get a full-capacity ring on the shared carrier, which
    // makes many fixed points likely.
    if rng.gen_bool(0.5) {
        for v in 0..n {
            let t = (v + 1) % n;
            if lattices[v] == lattices[t] {
                b.edge(v, t, lattices[v].top());
            }
        }
    }
    let m = rng.gen_range(n - 1..=2 * n);
    for _ in 0..m {
        let s = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n - 1);
        if t >= s {
            t += 1;
        }
        let conversion = if lattices[s] == lattices[t] && rng.gen_bool(0.8) {
            Conversion::Identity
        } else {
            let mut pairs = Vec::new();
            for i in 0..element_count(&lattices[s]) {
                let k = element_count(&lattices[t]);
                if rng.gen_bool(0.8) {
                    pairs.push((i, i % k));
                } else if rng.gen_bool(0.5) {
                    pairs.push((i, rng.gen_range(0..k)));
                }
            }
            Conversion::LabelMatch { pairs }
        };
        let liab = pick(rng, &lattices[s], 0.7);
        b.edge_with(
            s,
            t,
            liab,
            EdgeParams {
                conversion,
                ..EdgeParams::default()
            },
        );
    }
    let exo: Vec<LatticeValue> = lattices
        .iter()
        .map(|d| {
            if rng.gen_bool(0.85) {
                d.bottom()
            } else {
                pick(rng, d, 0.0)
            }
        })
        .collect();
    let tag = if rng.gen_bool(0.5) {
        EdgeTag::OverflowLoop
    } else {
        EdgeTag::NonDelegatableLoop
    };
    b.build().unwrap().augment_with(&exo, tag).unwrap()
}

/// Random permission parameters with minimum delegations.
pub fn random_permission_params(rng: &mut ChaCha8Rng) -> PermissionParams {
    let u = rng.gen_range(1..=3);
    let universe: Vec<String> = ["read", "write", "admin"][..u].iter().map(|s| s.to_string()).collect();
    let n = rng.gen_range(2..=3);
    let subset = |rng: &mut ChaCha8Rng, from: &[String], p: f64| -> Vec<String> {
        from.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
    };
    let entities = (0..n)
        .map(|i| PermissionEntity {
            label: format!("E{i}"),
            inherent: subset(rng, &universe, 0.25),
        })
        .collect();
    let m = rng.gen_range(1..=2 * n);
    let edges = (0..m)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            let max = subset(rng, &universe, 0.7);
            let min = subset(rng, &max, 0.4);
            PermissionEdge {
                from: format!("E{s}"),
                to: format!("E{t}"),
                min,
                max: Some(max),
                conversion: SetConversion::Identity,
            }
        })
        .collect();
    PermissionParams {
        universe,
        entities,
        edges,
    }
}

/// Liability matrix with zero diagonal and nonnegative assets.
pub fn random_en(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut l = vec![vec![0.0; n]; n];
    for (i, row) in l.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j && rng.gen_bool(0.6) {
                *x = (rng.gen_range(0.0..20.0_f64) * 100.0).round() / 100.0;
            }
        }
    }
    let a = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                (rng.gen_range(0.0..10.0_f64) * 100.0).round() / 100.0
            }
        })
        .collect();
    (l, a)
}

/// Greatest clearing payment vector by damped descent from the total
/// obligations: `p <- (1 - w) p + w min(pbar, a + Pi^T p)`.
pub fn en_damped_oracle(l: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let pbar: Vec<f64> = l.iter().map(|r| r.iter().sum()).collect();
    let rel = |i: usize, j: usize| if pbar[i] > 0.0 { l[i][j] / pbar[i] } else { 0.0 };
    let w = 0.5;
    let mut p = pbar.clone();
    for _ in 0..2_000_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let inflow: f64 = (0..n).map(|j| rel(j, i) * p[j]).sum();
                (1.0 - w) * p[i] + w * pbar[i].min(a[i] + inflow)
            })
            .collect();
        let delta = next.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        p = next;
        if delta < 1e-14 {
            break;
        }
    }
    p
}

/// `max_i |p_i - min(pbar_i, a_i + sum_j Pi_ji p_j)|`.
pub fn en_residual(l: &[Vec<f64>], a: &[f64], p: &[f64]) -> f64 {
    let n = a.len();
    let pbar: Vec<f64> = l.iter().map(|r| r.iter().sum()).collect();
    (0..n)
        .map(|i| {
            let inflow: f64 = (0..n)
                .filter(|&j| pbar[j] > 0.0)
                .map(|j| l[j][i] / pbar[j] * p[j])
                .sum();
            (p[i] - pbar[i].min(a[i] + inflow)).abs()
        })
        .fold(0.0, f64::max)
}

/// Scalar node whose pay-in falls as inflows rise.
#[derive(Debug)]
pub struct Antitone;

impl NodeBehavior for Antitone {
    fn distribute(&self, ctx: &NodeCtx<'_>, x: &LatticeValue) -> Result<Distribution> {
        let regular = ctx.regular_out().iter().map(|_| LatticeValue::scalar(0.0)).collect();
        Ok(Distribution {
            regular,
            surplus: x.clone(),
        })
    }

    fn pay_in(
        &self,
        _ctx: &NodeCtx<'_>,
        inflows: &[LatticeValue],
        _exo: Option<&LatticeValue>,
    ) -> Result<LatticeValue> {
        let total: f64 = inflows.iter().filter_map(LatticeValue::as_scalar).sum();
        Ok(LatticeValue::scalar((10.0 - total).max(0.0)))
    }

    fn pay_out(
        &self,
        _ctx: &NodeCtx<'_>,
        _regular: &[LatticeValue],
        surplus: Option<&LatticeValue>,
    ) -> Result<LatticeValue> {
        Ok(surplus.cloned().unwrap_or(LatticeValue::scalar(0.0)))
    }
}

fn s(x: f64) -> LatticeValue {
    LatticeValue::scalar(x)
}

/// Claim of 8 on an edge whose liability is 5.
pub fn defect_liability_bound() -> LiabilityNetwork {
    let mut b = NetworkBuilder::new();
    let e = LatticeDescriptor::extended_nonneg();
    let x = b.vertex("X", e.clone(), NodeKind::EnProportional);
    let y = b.vertex("Y", e, NodeKind::EnProportional);
    b.edge_with(
        x,
        y,
        s(5.0),
        EdgeParams {
            claim: Some(s(8.0)),
            ..EdgeParams::default()
        },
    );
    b.build().unwrap().augment_resources(&[s(3.0), s(0.0)]).unwrap()
}

/// A proportional node with no overflow loop loses any excess over its
/// liabilities.
pub fn defect_factorization() -> LiabilityNetwork {
    let mut b = NetworkBuilder::new();
    let e = LatticeDescriptor::extended_nonneg();
    let x = b.vertex("X", e.clone(), NodeKind::EnProportional);
    let y = b.vertex("Y", e, NodeKind::EnProportional);
    b.edge(x, y, s(5.0));
    b.loop_edge(x, EdgeTag::ExogenousLoop, s(1.0));
    b.build().unwrap()
}

/// Vertex `Y` aggregates through the antitone custom map.
pub fn defect_antitone() -> LiabilityNetwork {
    let mut b = NetworkBuilder::new();
    let e = LatticeDescriptor::extended_nonneg();
    let x = b.vertex("X", e.clone(), NodeKind::EnProportional);
    let y = b.vertex("Y", e, NodeKind::custom("antitone", Arc::new(Antitone)));
    b.edge(x, y, s(5.0));
    b.build().unwrap().augment_resources(&[s(2.0), s(0.0)]).unwrap()
}
