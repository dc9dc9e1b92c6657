use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EdgeTag, LiabilityNetwork};
use crate::error::Result;
use crate::lattice::{LatticeDescriptor, LatticeValue};

/// Finite domains up to this size are checked exhaustively.
const EXHAUSTIVE_LIMIT: usize = 256;
const MAX_WITNESSES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Witness {
    LiabilityBound {
        edge: usize,
        source: String,
        target: String,
        payment: LatticeValue,
        liability: LatticeValue,
    },
    Factorization {
        vertex: String,
        input: LatticeValue,
        recombined: LatticeValue,
    },
    DistributorMonotonicity {
        vertex: String,
        edge: usize,
        lower: LatticeValue,
        upper: LatticeValue,
        lower_payment: LatticeValue,
        upper_payment: LatticeValue,
    },
    AggregatorMonotonicity {
        vertex: String,
        lower: Vec<LatticeValue>,
        upper: Vec<LatticeValue>,
        lower_image: LatticeValue,
        upper_image: LatticeValue,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub passed: bool,
    /// True when every input of every vertex was covered.
    pub exhaustive: bool,
    pub cases: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

impl CheckResult {
    fn new() -> Self {
        CheckResult {
            passed: true,
            exhaustive: true,
            cases: 0,
            violations: 0,
            witnesses: Vec::new(),
        }
    }

    fn fail(&mut self, w: Witness) {
        self.passed = false;
        self.violations += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    /// One-line description for reports.
    pub fn summary(&self) -> String {
        match (self.passed, self.exhaustive) {
            (true, true) => format!("pass (exhaustive, {} cases)", self.cases),
            (true, false) => format!("pass (no violation found in {} samples)", self.cases),
            (false, _) => format!("FAIL ({} of {} cases)", self.violations, self.cases),
        }
    }
}

/// Outcome of the three structural checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    pub liability_bound: CheckResult,
    pub factorization: CheckResult,
    pub monotonicity: CheckResult,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.liability_bound.passed && self.factorization.passed && self.monotonicity.passed
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.liability_bound
            .witnesses
            .iter()
            .chain(&self.factorization.witnesses)
            .chain(&self.monotonicity.witnesses)
    }
}

/// Largest finite absolute scalar inside `v`.
fn magnitude(v: &LatticeValue) -> f64 {
    match v {
        LatticeValue::Scalar(x) if x.is_finite() => x.abs(),
        LatticeValue::Scalar(_) => 0.0,
        LatticeValue::Tuple(items) => items.iter().map(magnitude).fold(0.0, f64::max),
        LatticeValue::Vector(xs) => xs.iter().copied().fold(0.0, f64::max),
        LatticeValue::Set(_) | LatticeValue::Downset(_) => 0.0,
    }
}

/// Inputs to check a vertex map on: all elements of a small finite lattice,
/// otherwise the extremes plus random samples.
fn inputs(
    d: &LatticeDescriptor,
    samples: usize,
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> Result<(Vec<LatticeValue>, bool)> {
    if d.cardinality().is_some_and(|n| n <= EXHAUSTIVE_LIMIT) {
        return Ok((d.enumerate()?, true));
    }
    let mut out = vec![d.bottom(), d.top()];
    out.extend((0..samples).map(|_| d.sample(rng, scale)));
    Ok((out, false))
}

pub(super) fn validate(net: &LiabilityNetwork, samples: usize, seed: u64) -> Result<ValidationReport> {
    let scale = 1.0 + 2.0 * net.liabilities().iter().map(magnitude).fold(0.0, f64::max);
    Ok(ValidationReport {
        samples,
        seed,
        liability_bound: liability_bound(net)?,
        factorization: factorization(net, samples, seed, scale)?,
        monotonicity: monotonicity(net, samples, seed, scale)?,
    })
}

fn liability_bound(net: &LiabilityNetwork) -> Result<CheckResult> {
    let mut r = CheckResult::new();
    for v in 0..net.vertex_count() {
        let d = net.lattice(v);
        for (e, p) in net.distribute(v, &d.top())? {
            r.cases += 1;
            if !d.leq(&p, net.liability(e))? {
                let edge = net.edge(e);
                r.fail(Witness::LiabilityBound {
                    edge: e,
                    source: net.label(edge.source).to_string(),
                    target: net.label(edge.target).to_string(),
                    payment: p,
                    liability: net.liability(e).clone(),
                });
            }
        }
    }
    Ok(r)
}

fn factorization(net: &LiabilityNetwork, samples: usize, seed: u64, scale: f64) -> Result<CheckResult> {
    let mut r = CheckResult::new();
    for v in 0..net.vertex_count() {
        let d = net.lattice(v);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (xs, exhaustive) = inputs(d, samples, &mut rng, scale)?;
        r.exhaustive &= exhaustive;
        for x in xs {
            r.cases += 1;
            let back = net.pay_out(v, &net.distribute(v, &x)?)?;
            let tol = d.tolerance() * (1.0 + magnitude(&x));
            if !d.close(&x, &back, tol)? {
                r.fail(Witness::Factorization {
                    vertex: net.label(v).to_string(),
                    input: x,
                    recombined: back,
                });
            }
        }
    }
    Ok(r)
}

fn monotonicity(net: &LiabilityNetwork, samples: usize, seed: u64, scale: f64) -> Result<CheckResult> {
    let mut r = CheckResult::new();
    for v in 0..net.vertex_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1) ^ (v as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
        distributor_monotone(net, v, samples, &mut rng, scale, &mut r)?;
        aggregator_monotone(net, v, samples, &mut rng, scale, &mut r)?;
    }
    Ok(r)
}

fn comparable_pairs(
    d: &LatticeDescriptor,
    samples: usize,
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> Result<(Vec<(LatticeValue, LatticeValue)>, bool)> {
    if d.cardinality().is_some_and(|n| n <= EXHAUSTIVE_LIMIT) {
        let elems = d.enumerate()?;
        let mut pairs = Vec::new();
        for a in &elems {
            for b in &elems {
                if a != b && d.leq(a, b)? {
                    pairs.push((a.clone(), b.clone()));
                }
            }
        }
        return Ok((pairs, true));
    }
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let a = d.sample(rng, scale);
        let c = d.sample(rng, scale);
        let b = d.join(&a, &c)?;
        pairs.push((a, b));
    }
    Ok((pairs, false))
}

fn distributor_monotone(
    net: &LiabilityNetwork,
    v: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
    scale: f64,
    r: &mut CheckResult,
) -> Result<()> {
    let d = net.lattice(v);
    let (pairs, exhaustive) = comparable_pairs(d, samples, rng, scale)?;
    r.exhaustive &= exhaustive;
    for (a, b) in pairs {
        r.cases += 1;
        let pa = net.distribute(v, &a)?;
        let pb = net.distribute(v, &b)?;
        for ((e, x), (_, y)) in pa.into_iter().zip(pb) {
            if !d.leq(&x, &y)? {
                r.fail(Witness::DistributorMonotonicity {
                    vertex: net.label(v).to_string(),
                    edge: e,
                    lower: a.clone(),
                    upper: b.clone(),
                    lower_payment: x,
                    upper_payment: y,
                });
                break;
            }
        }
    }
    Ok(())
}

fn aggregator_monotone(
    net: &LiabilityNetwork,
    v: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
    scale: f64,
    r: &mut CheckResult,
) -> Result<()> {
    let ins = net.regular_in(v);
    let sources: Vec<&LatticeDescriptor> = ins.iter().map(|&e| net.lattice(net.edge(e).source)).collect();
    let d = net.lattice(v);

    // Template payment vector; only in-edges and the exogenous loop are read.
    let mut template: Vec<LatticeValue> = (0..net.edge_count())
        .map(|e| net.lattice(net.edge(e).source).bottom())
        .collect();
    for (e, edge) in net.quiver().edges().iter().enumerate() {
        if edge.tag == EdgeTag::ExogenousLoop {
            template[e] = net.liability(e).clone();
        }
    }
    let image = |inputs: &[LatticeValue]| -> Result<LatticeValue> {
        let mut pays = template.clone();
        for (&e, p) in ins.iter().zip(inputs) {
            pays[e] = p.clone();
        }
        net.pay_in(v, &pays)
    };
    let tuple_leq = |a: &[LatticeValue], b: &[LatticeValue]| -> Result<bool> {
        for ((s, x), y) in sources.iter().zip(a).zip(b) {
            if !s.leq(x, y)? {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let domain = sources.iter().try_fold(1usize, |acc, s| {
        s.cardinality()
            .and_then(|n| acc.checked_mul(n))
            .filter(|n| *n <= EXHAUSTIVE_LIMIT)
    });
    let check = |a: Vec<LatticeValue>,
                 b: Vec<LatticeValue>,
                 fa: LatticeValue,
                 fb: LatticeValue,
                 r: &mut CheckResult|
     -> Result<()> {
        r.cases += 1;
        if !d.leq(&fa, &fb)? {
            r.fail(Witness::AggregatorMonotonicity {
                vertex: net.label(v).to_string(),
                lower: a,
                upper: b,
                lower_image: fa,
                upper_image: fb,
            });
        }
        Ok(())
    };

    if domain.is_some() {
        let mut tuples: Vec<Vec<LatticeValue>> = vec![Vec::new()];
        for s in &sources {
            let elems = s.enumerate()?;
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    elems.iter().map(move |e| {
                        let mut n = t.clone();
                        n.push(e.clone());
                        n
                    })
                })
                .collect();
        }
        let images = tuples.iter().map(|t| image(t)).collect::<Result<Vec<_>>>()?;
        for (i, a) in tuples.iter().enumerate() {
            for (j, b) in tuples.iter().enumerate() {
                if i != j && tuple_leq(a, b)? {
                    check(a.clone(), b.clone(), images[i].clone(), images[j].clone(), r)?;
                }
            }
        }
    } else {
        r.exhaustive = false;
        for _ in 0..samples {
            let mut a = Vec::with_capacity(sources.len());
            let mut b = Vec::with_capacity(sources.len());
            for s in &sources {
                let x = s.sample(rng, scale);
                let c = s.sample(rng, scale);
                b.push(s.join(&x, &c)?);
                a.push(x);
            }
            let fa = image(&a)?;
            let fb = image(&b)?;
            check(a, b, fa, fb, r)?;
        }
    }
    Ok(())
}
