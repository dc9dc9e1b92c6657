//! Multivalued liability networks: set-valued aggregators and distributors
//! over a single-valued base network.

mod correspondence;
mod negotiation;

pub use correspondence::{step, Correspondence};
pub use negotiation::{build_negotiation, NegotiationOffer, NegotiationParams, Party, ZopaEdge};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeValue};
use crate::model::{EdgeTag, LiabilityNetwork};
use crate::solver::SolveOptions;

/// Largest number of payment combinations examined at one vertex.
pub const COMBINATION_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MvInit {
    Bottom,
    Top,
}

/// Per-vertex interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvBounds {
    pub lo: Vec<LatticeValue>,
    pub hi: Vec<LatticeValue>,
    pub iterations: usize,
}

impl MvBounds {
    /// Whether every element of every `sets[v]` lies in `[lo_v, hi_v]`.
    pub fn contains(&self, net: &MvNetwork, sets: &[Vec<LatticeValue>]) -> Result<bool> {
        for (v, set) in sets.iter().enumerate() {
            let d = net.base.lattice(v);
            for x in set {
                if !(d.leq(&self.lo[v], x)? && d.leq(x, &self.hi[v])?) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvFailure {
    pub vertex: usize,
    pub element: LatticeValue,
    /// 1: not producible from the neighbours' sets. 2: no distribution of it
    /// is usable by every creditor.
    pub condition: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvCheck {
    pub clearing: bool,
    pub failures: Vec<MvFailure>,
}

#[derive(Clone, Debug)]
pub struct MvNetwork {
    base: LiabilityNetwork,
    inagg: Vec<Correspondence>,
    dist: Vec<Correspondence>,
}

impl MvNetwork {
    pub fn new(base: LiabilityNetwork, inagg: Vec<Correspondence>, dist: Vec<Correspondence>) -> Result<Self> {
        let n = base.vertex_count();
        if inagg.len() != n || dist.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{n} vertices but {} pay-in and {} distributor correspondences",
                inagg.len(),
                dist.len()
            )));
        }
        for v in 0..n {
            inagg[v].check(base.lattice(v))?;
            dist[v].check(base.lattice(v))?;
        }
        let net = MvNetwork { base, inagg, dist };
        if let Some((v, x)) = net.conservation_violation()? {
            return Err(Error::InvalidNetwork(format!(
                "some distribution of {} at `{}` does not recombine to it",
                net.base.lattice(v).render(&x),
                net.base.label(v)
            )));
        }
        Ok(net)
    }

    /// Every map a singleton.
    pub fn lift(base: LiabilityNetwork) -> Self {
        let n = base.vertex_count();
        MvNetwork {
            base,
            inagg: vec![Correspondence::Singleton; n],
            dist: vec![Correspondence::Singleton; n],
        }
    }

    pub fn base(&self) -> &LiabilityNetwork {
        &self.base
    }

    pub fn pay_in_correspondence(&self, v: usize) -> &Correspondence {
        &self.inagg[v]
    }

    pub fn distributor_correspondence(&self, v: usize) -> &Correspondence {
        &self.dist[v]
    }

    /// First state whose set-valued distribution can fail to pay out to
    /// itself. Only vertices with a non-singleton distributor are examined.
    fn conservation_violation(&self) -> Result<Option<(usize, LatticeValue)>> {
        for v in 0..self.base.vertex_count() {
            if self.dist[v].is_singleton() {
                continue;
            }
            for x in self.base.lattice(v).enumerate()? {
                let sets = self.payment_sets(v, &x)?;
                let mut bad = false;
                for_each_choice(&sets, &mut |choice| {
                    if !bad && self.base.pay_out(v, choice)? != x {
                        bad = true;
                    }
                    Ok(())
                })?;
                if bad {
                    return Ok(Some((v, x)));
                }
            }
        }
        Ok(None)
    }

    /// Possible payments on each out-edge of `v` in state `x`. Regular edges
    /// are capped by their liability.
    pub fn payment_sets(&self, v: usize, x: &LatticeValue) -> Result<Vec<(usize, Vec<LatticeValue>)>> {
        let d = self.base.lattice(v);
        let mut out = Vec::new();
        for (e, p) in self.base.distribute(v, x)? {
            if self.base.edge(e).tag != EdgeTag::Regular {
                out.push((e, vec![p]));
                continue;
            }
            let liab = self.base.liability(e);
            let mut set: Vec<LatticeValue> = Vec::new();
            for c in self.dist[v].image(d, &p)? {
                let c = d.meet(&c, liab)?;
                if !set.contains(&c) {
                    set.push(c);
                }
            }
            out.push((e, set));
        }
        Ok(out)
    }

    fn selected_payments(&self, x: &[LatticeValue], greatest: bool) -> Result<Vec<LatticeValue>> {
        let mut pays = vec![None; self.base.edge_count()];
        for (v, xv) in x.iter().enumerate() {
            let d = self.base.lattice(v);
            for (e, p) in self.base.distribute(v, xv)? {
                let p = if self.base.edge(e).tag == EdgeTag::Regular && !self.dist[v].is_singleton() {
                    let c = if greatest {
                        self.dist[v].max_of(d, &p)?
                    } else {
                        self.dist[v].min_of(d, &p)?
                    };
                    d.meet(&c, self.base.liability(e))?
                } else {
                    p
                };
                pays[e] = Some(p);
            }
        }
        Ok(pays.into_iter().map(|p| p.expect("every edge has a source")).collect())
    }

    /// The single-valued system built from least (or greatest) selections.
    pub fn phi_selection(&self, x: &[LatticeValue], greatest: bool) -> Result<Vec<LatticeValue>> {
        self.base.check_values(x)?;
        let pays = self.selected_payments(x, greatest)?;
        (0..self.base.vertex_count())
            .map(|v| {
                let z = self.base.pay_in(v, &pays)?;
                let d = self.base.lattice(v);
                if greatest {
                    self.inagg[v].max_of(d, &z)
                } else {
                    self.inagg[v].min_of(d, &z)
                }
            })
            .collect()
    }

    fn fix_selection(
        &self,
        start: Vec<LatticeValue>,
        greatest: bool,
        opts: SolveOptions,
    ) -> Result<(Vec<LatticeValue>, usize)> {
        let mut x = start;
        for k in 0..=opts.max_iters {
            let y = self.phi_selection(&x, greatest)?;
            if self.base.section_close(&x, &y, opts.tol)? {
                return Ok((x, k));
            }
            if k == opts.max_iters {
                let mut residual: f64 = 0.0;
                for (v, d) in self.base.lattices().iter().enumerate() {
                    residual = residual.max(d.distance(&x[v], &y[v])?);
                }
                return Err(Error::NonConvergence {
                    iterations: k,
                    residual,
                    last: y,
                });
            }
            x = y;
        }
        unreachable!()
    }

    /// Iterates the least-selection and greatest-selection systems from
    /// `init` to their fixed points.
    pub fn solve_boundaries(&self, init: MvInit, opts: SolveOptions) -> Result<MvBounds> {
        let start = match init {
            MvInit::Bottom => self.base.bottom(),
            MvInit::Top => self.base.top(),
        };
        let (lo, a) = self.fix_selection(start.clone(), false, opts)?;
        let (hi, b) = self.fix_selection(start, true, opts)?;
        Ok(MvBounds {
            lo,
            hi,
            iterations: a.max(b),
        })
    }

    /// Least fixed point of the least-selection system and greatest fixed
    /// point of the greatest-selection system. Every element of every
    /// multivalued clearing section lies between them.
    pub fn envelope(&self, opts: SolveOptions) -> Result<MvBounds> {
        let (lo, a) = self.fix_selection(self.base.bottom(), false, opts)?;
        let (hi, b) = self.fix_selection(self.base.top(), true, opts)?;
        Ok(MvBounds {
            lo,
            hi,
            iterations: a.max(b),
        })
    }

    fn require_finite(&self) -> Result<()> {
        if self.base.is_finite() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "explicit multivalued sections need finite payment lattices".into(),
            ))
        }
    }

    /// Checks both clearing conditions for an explicit family of nonempty sets.
    pub fn check_section(&self, sets: &[Vec<LatticeValue>]) -> Result<MvCheck> {
        self.require_finite()?;
        let n = self.base.vertex_count();
        if sets.len() != n {
            return Err(Error::InvalidValue(format!("{} sets for {n} vertices", sets.len())));
        }
        for (v, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidValue(format!("empty set at `{}`", self.base.label(v))));
            }
            for x in set {
                self.base.lattice(v).conforms(x)?;
            }
        }
        // Possible payments on each edge given the sets.
        let mut offers: Vec<Vec<LatticeValue>> = vec![Vec::new(); self.base.edge_count()];
        let mut own: Vec<Vec<PaymentSets>> = Vec::with_capacity(n);
        for (v, set) in sets.iter().enumerate() {
            let mut per = Vec::with_capacity(set.len());
            for x in set {
                let ps = self.payment_sets(v, x)?;
                for (e, s) in &ps {
                    for p in s {
                        if !offers[*e].contains(p) {
                            offers[*e].push(p.clone());
                        }
                    }
                }
                per.push(ps);
            }
            own.push(per);
        }
        let mut producible: Vec<Vec<LatticeValue>> = vec![Vec::new(); n];
        let mut accepted: Vec<Vec<LatticeValue>> = vec![Vec::new(); self.base.edge_count()];
        let mut template: Vec<LatticeValue> = (0..self.base.edge_count())
            .map(|e| self.base.lattice(self.base.edge(e).source).bottom())
            .collect();
        for v in 0..n {
            if let Some(e) = self.base.exogenous_loop(v) {
                template[e] = self.base.liability(e).clone();
            }
        }
        for w in 0..n {
            let ins = self.base.regular_in(w).to_vec();
            let choices: Vec<(usize, Vec<LatticeValue>)> = ins.iter().map(|&e| (e, offers[e].clone())).collect();
            let d = self.base.lattice(w);
            let mut pays = template.clone();
            for_each_choice(&choices, &mut |choice| {
                for (e, p) in choice {
                    pays[*e] = p.clone();
                }
                let z = self.base.pay_in(w, &pays)?;
                let img = self.inagg[w].image(d, &z)?;
                let hits = img.iter().any(|c| sets[w].contains(c));
                for c in img {
                    if !producible[w].contains(&c) {
                        producible[w].push(c);
                    }
                }
                if hits {
                    for (e, p) in choice {
                        if !accepted[*e].contains(p) {
                            accepted[*e].push(p.clone());
                        }
                    }
                }
                Ok(())
            })?;
        }
        let mut failures = Vec::new();
        for (v, set) in sets.iter().enumerate() {
            for (i, x) in set.iter().enumerate() {
                if !producible[v].contains(x) {
                    failures.push(MvFailure {
                        vertex: v,
                        element: x.clone(),
                        condition: 1,
                        edge: None,
                    });
                }
                for (e, s) in &own[v][i] {
                    if self.base.edge(*e).tag != EdgeTag::Regular {
                        continue;
                    }
                    if !s.iter().any(|p| accepted[*e].contains(p)) {
                        failures.push(MvFailure {
                            vertex: v,
                            element: x.clone(),
                            condition: 2,
                            edge: Some(*e),
                        });
                    }
                }
            }
        }
        Ok(MvCheck {
            clearing: failures.is_empty(),
            failures,
        })
    }

    /// All multivalued clearing sections, by brute force over families of
    /// nonempty subsets. Refuses when there are more than `limit` families.
    pub fn enumerate_sections(&self, limit: usize) -> Result<Vec<Vec<Vec<LatticeValue>>>> {
        self.require_finite()?;
        let elems: Vec<Vec<LatticeValue>> = self
            .base
            .lattices()
            .iter()
            .map(LatticeDescriptor::enumerate)
            .collect::<Result<_>>()?;
        let mut total: usize = 1;
        for e in &elems {
            if e.len() >= usize::BITS as usize - 1 {
                return Err(Error::Unsupported("carrier too large to enumerate subsets".into()));
            }
            total = total
                .checked_mul((1usize << e.len()) - 1)
                .filter(|&t| t <= limit)
                .ok_or_else(|| Error::Unsupported(format!("more than {limit} candidate families")))?;
        }
        let mut out = Vec::new();
        let mut masks = vec![1usize; elems.len()];
        'outer: for _ in 0..total {
            let sets: Vec<Vec<LatticeValue>> = masks
                .iter()
                .zip(&elems)
                .map(|(m, es)| {
                    es.iter()
                        .enumerate()
                        .filter(|(i, _)| m >> i & 1 == 1)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            if self.check_section(&sets)?.clearing {
                out.push(sets);
            }
            for (m, es) in masks.iter_mut().zip(&elems) {
                *m += 1;
                if *m < 1 << es.len() {
                    continue 'outer;
                }
                *m = 1;
            }
        }
        Ok(out)
    }
}

/// Possible payments per out-edge, keyed by edge id.
type PaymentSets = Vec<(usize, Vec<LatticeValue>)>;
type EdgePayment = (usize, LatticeValue);

/// Calls `f` on every way of picking one value per entry.
fn for_each_choice(sets: &[(usize, Vec<LatticeValue>)], f: &mut dyn FnMut(&[EdgePayment]) -> Result<()>) -> Result<()> {
    let mut count: usize = 1;
    for (_, s) in sets {
        if s.is_empty() {
            return Ok(());
        }
        count = count
            .checked_mul(s.len())
            .filter(|&c| c <= COMBINATION_LIMIT)
            .ok_or_else(|| Error::Unsupported(format!("more than {COMBINATION_LIMIT} payment combinations")))?;
    }
    let mut idx = vec![0usize; sets.len()];
    let mut choice: Vec<(usize, LatticeValue)> = sets.iter().map(|(e, s)| (*e, s[0].clone())).collect();
    loop {
        f(&choice)?;
        let mut k = 0;
        loop {
            if k == sets.len() {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < sets[k].1.len() {
                choice[k].1 = sets[k].1[idx[k]].clone();
                break;
            }
            idx[k] = 0;
            choice[k].1 = sets[k].1[0].clone();
            k += 1;
        }
    }
}
