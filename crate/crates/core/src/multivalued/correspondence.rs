//! Set-valued maps layered on top of a single-valued base map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BitSet, LatticeDescriptor, LatticeKind, LatticeValue};

/// A correspondence `C` composed after a base map `f`, giving `x -> C(f(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Correspondence {
    Singleton,
    /// Every element between `down^below(z)` and `up^above(z)`, where `up`
    /// adds the minimal missing elements and `down` drops the maximal ones.
    IntervalAround {
        below: usize,
        above: usize,
    },
    /// Lookup table over the whole carrier.
    Explicit {
        table: Vec<(LatticeValue, Vec<LatticeValue>)>,
    },
}

impl Correspondence {
    pub fn interval(slack: usize) -> Self {
        Correspondence::IntervalAround {
            below: slack,
            above: slack,
        }
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self, Correspondence::Singleton)
    }

    /// The image of `z`, deduplicated.
    pub fn image(&self, d: &LatticeDescriptor, z: &LatticeValue) -> Result<Vec<LatticeValue>> {
        match self {
            Correspondence::Singleton => Ok(vec![z.clone()]),
            Correspondence::IntervalAround { below, above } => {
                let lo = iterate_step(d, z, *below, false)?;
                let hi = iterate_step(d, z, *above, true)?;
                let mut out = Vec::new();
                for c in d.enumerate()? {
                    if d.leq(&lo, &c)? && d.leq(&c, &hi)? {
                        out.push(c);
                    }
                }
                Ok(out)
            }
            Correspondence::Explicit { table } => table
                .iter()
                .find(|(k, _)| k == z)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::InvalidParams(format!("explicit table has no entry for {}", d.render(z)))),
        }
    }

    /// Least element of the image of `z`.
    pub fn min_of(&self, d: &LatticeDescriptor, z: &LatticeValue) -> Result<LatticeValue> {
        match self {
            Correspondence::Singleton => Ok(z.clone()),
            Correspondence::IntervalAround { below, .. } => iterate_step(d, z, *below, false),
            Correspondence::Explicit { .. } => extremum(d, &self.image(d, z)?, false),
        }
    }

    /// Greatest element of the image of `z`.
    pub fn max_of(&self, d: &LatticeDescriptor, z: &LatticeValue) -> Result<LatticeValue> {
        match self {
            Correspondence::Singleton => Ok(z.clone()),
            Correspondence::IntervalAround { above, .. } => iterate_step(d, z, *above, true),
            Correspondence::Explicit { .. } => extremum(d, &self.image(d, z)?, true),
        }
    }

    /// Checks that the correspondence is usable on `d`: finite carrier for
    /// non-singletons, and for tables full coverage, nonempty images with a
    /// least and greatest element, and upper and lower monotonicity.
    pub fn check(&self, d: &LatticeDescriptor) -> Result<()> {
        if self.is_singleton() {
            return Ok(());
        }
        if !d.is_finite() {
            return Err(Error::Unsupported(format!(
                "set-valued maps need a finite carrier, found {}",
                d.kind_name()
            )));
        }
        let Correspondence::Explicit { table } = self else {
            return Ok(());
        };
        let elems = d.enumerate()?;
        for (k, img) in table {
            d.conforms(k)?;
            if img.is_empty() {
                return Err(Error::InvalidParams(format!("empty image at {}", d.render(k))));
            }
            for c in img {
                d.conforms(c)?;
            }
            extremum(d, img, false)?;
            extremum(d, img, true)?;
        }
        for a in &elems {
            let ia = self.image(d, a)?;
            for b in &elems {
                if a == b || !d.leq(a, b)? {
                    continue;
                }
                let ib = self.image(d, b)?;
                // upper: every point above a has a point above it over b
                for p in &ia {
                    if !any_leq(d, p, &ib, true)? {
                        return Err(Error::InvalidParams(format!(
                            "table is not upper monotone at {} <= {}",
                            d.render(a),
                            d.render(b)
                        )));
                    }
                }
                for q in &ib {
                    if !any_leq(d, q, &ia, false)? {
                        return Err(Error::InvalidParams(format!(
                            "table is not lower monotone at {} <= {}",
                            d.render(a),
                            d.render(b)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// With `up`: is some `c` in `set` with `p <= c`; otherwise some `c <= p`.
fn any_leq(d: &LatticeDescriptor, p: &LatticeValue, set: &[LatticeValue], up: bool) -> Result<bool> {
    for c in set {
        let ok = if up { d.leq(p, c)? } else { d.leq(c, p)? };
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

fn extremum(d: &LatticeDescriptor, set: &[LatticeValue], greatest: bool) -> Result<LatticeValue> {
    for c in set {
        let mut ok = true;
        for o in set {
            let rel = if greatest { d.leq(o, c)? } else { d.leq(c, o)? };
            if !rel {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(c.clone());
        }
    }
    Err(Error::InvalidParams(format!(
        "image has no {} element",
        if greatest { "greatest" } else { "least" }
    )))
}

fn iterate_step(d: &LatticeDescriptor, z: &LatticeValue, k: usize, up: bool) -> Result<LatticeValue> {
    let mut cur = z.clone();
    for _ in 0..k {
        let next = step(d, &cur, up)?;
        if next == cur {
            break;
        }
        cur = next;
    }
    Ok(cur)
}

/// One monotone step up or down on a finite carrier.
pub fn step(d: &LatticeDescriptor, z: &LatticeValue, up: bool) -> Result<LatticeValue> {
    match (d.kind(), z) {
        (LatticeKind::Downset { poset }, LatticeValue::Downset(s)) => Ok(LatticeValue::Downset(if up {
            s.union(&poset.minimal_outside(s))
        } else {
            s.difference(&poset.maximal_in(s))
        })),
        (LatticeKind::FiniteSet { universe }, LatticeValue::Set(_)) => Ok(LatticeValue::Set(if up {
            BitSet::full(universe.len())
        } else {
            BitSet::new()
        })),
        (LatticeKind::Product { components }, LatticeValue::Tuple(items)) if components.len() == items.len() => {
            let parts = components
                .iter()
                .zip(items)
                .map(|(c, x)| step(c, x, up))
                .collect::<Result<Vec<_>>>()?;
            Ok(LatticeValue::Tuple(parts))
        }
        _ => Err(Error::Unsupported(format!(
            "interval steps are not defined on {}",
            d.kind_name()
        ))),
    }
}
