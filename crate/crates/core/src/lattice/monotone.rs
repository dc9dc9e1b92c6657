use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{LatticeDescriptor, LatticeValue};
use crate::error::Result;

/// How many witnesses a report keeps.
const MAX_WITNESSES: usize = 8;

/// A pair `a <= b` whose images are out of order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneWitness {
    pub a: LatticeValue,
    pub b: LatticeValue,
    pub fa: LatticeValue,
    pub fb: LatticeValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub pairs_checked: usize,
    pub exhaustive: bool,
    /// Total number of violating pairs seen.
    pub violation_count: usize,
    /// The first few violating pairs.
    pub violations: Vec<MonotoneWitness>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, a: &LatticeValue, b: &LatticeValue, fa: LatticeValue, fb: LatticeValue) {
        self.violation_count += 1;
        if self.violations.len() < MAX_WITNESSES {
            self.violations.push(MonotoneWitness {
                a: a.clone(),
                b: b.clone(),
                fa,
                fb,
            });
        }
    }
}

/// Checks `f` on `samples` random comparable pairs `a <= a ∨ c`.
///
/// The result depends only on the arguments and `seed`. Scalars are sampled
/// from `[0, 10]`; use [`check_monotone_sampled_scaled`] to change that.
pub fn check_monotone_sampled<F>(
    f: F,
    d_in: &LatticeDescriptor,
    d_out: &LatticeDescriptor,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityReport>
where
    F: Fn(&LatticeValue) -> Result<LatticeValue>,
{
    check_monotone_sampled_scaled(f, d_in, d_out, samples, seed, 10.0)
}

pub fn check_monotone_sampled_scaled<F>(
    f: F,
    d_in: &LatticeDescriptor,
    d_out: &LatticeDescriptor,
    samples: usize,
    seed: u64,
    scale: f64,
) -> Result<MonotonicityReport>
where
    F: Fn(&LatticeValue) -> Result<LatticeValue>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MonotonicityReport {
        pairs_checked: 0,
        exhaustive: false,
        violation_count: 0,
        violations: Vec::new(),
    };
    for _ in 0..samples {
        let a = d_in.sample(&mut rng, scale);
        let c = d_in.sample(&mut rng, scale);
        let b = d_in.join(&a, &c)?;
        let fa = f(&a)?;
        let fb = f(&b)?;
        report.pairs_checked += 1;
        if !d_out.leq(&fa, &fb)? {
            report.record(&a, &b, fa, fb);
        }
    }
    Ok(report)
}

/// Checks `f` on every comparable pair of a finite lattice.
pub fn check_monotone_exhaustive<F>(
    f: F,
    d_in: &LatticeDescriptor,
    d_out: &LatticeDescriptor,
) -> Result<MonotonicityReport>
where
    F: Fn(&LatticeValue) -> Result<LatticeValue>,
{
    let elems = d_in.enumerate()?;
    let images = elems.iter().map(&f).collect::<Result<Vec<_>>>()?;
    let mut report = MonotonicityReport {
        pairs_checked: 0,
        exhaustive: true,
        violation_count: 0,
        violations: Vec::new(),
    };
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            if i == j || !d_in.leq(a, b)? {
                continue;
            }
            report.pairs_checked += 1;
            if !d_out.leq(&images[i], &images[j])? {
                report.record(a, b, images[i].clone(), images[j].clone());
            }
        }
    }
    Ok(report)
}
