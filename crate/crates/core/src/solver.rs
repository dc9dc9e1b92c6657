//! Fixed-point solvers for clearing sections.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeValue;
use crate::model::{LiabilityNetwork, Section};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Residual at which a continuous iterate counts as fixed. Finite carriers
    /// always require exact equality.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 10_000,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Least,
    Greatest,
}

fn residuals(net: &LiabilityNetwork, x: &[LatticeValue], y: &[LatticeValue]) -> Result<Vec<f64>> {
    net.lattices()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(d, (a, b))| d.distance(a, b))
        .collect()
}

fn max_of(r: &[f64]) -> f64 {
    r.iter().copied().fold(0.0, f64::max)
}

/// Iterates the clearing operator from `start` until the iterate is fixed
/// within `opts.tol`.
pub fn iterate(net: &LiabilityNetwork, start: Vec<LatticeValue>, opts: SolveOptions) -> Result<Section> {
    net.check_values(&start)?;
    let mut x = start;
    for k in 0..=opts.max_iters {
        let y = net.phi_unchecked(&x)?;
        if net.section_close(&x, &y, opts.tol)? {
            let residual = residuals(net, &x, &y)?;
            return Ok(Section {
                values: x,
                iterations: k,
                residual,
            });
        }
        if k == opts.max_iters {
            let residual = max_of(&residuals(net, &x, &y)?);
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

/// Kleene iteration from bottom.
pub fn least_clearing(net: &LiabilityNetwork, opts: SolveOptions) -> Result<Section> {
    iterate(net, net.bottom(), opts)
}

/// Kleene iteration from top.
pub fn greatest_clearing(net: &LiabilityNetwork, opts: SolveOptions) -> Result<Section> {
    iterate(net, net.top(), opts)
}

pub fn solve(net: &LiabilityNetwork, direction: Direction, opts: SolveOptions) -> Result<Section> {
    match direction {
        Direction::Least => least_clearing(net, opts),
        Direction::Greatest => greatest_clearing(net, opts),
    }
}

/// The iterates `x_0 = start, x_1, ..., x_k` where `x_k` is the first fixed
/// iterate (within `opts.tol`).
pub fn kleene_iterates(
    net: &LiabilityNetwork,
    start: Vec<LatticeValue>,
    opts: SolveOptions,
) -> Result<Vec<Vec<LatticeValue>>> {
    net.check_values(&start)?;
    let mut seq = vec![start];
    for _ in 0..opts.max_iters {
        let x = seq.last().expect("nonempty");
        let y = net.phi_unchecked(x)?;
        if net.section_close(x, &y, opts.tol)? {
            return Ok(seq);
        }
        seq.push(y);
    }
    let x = seq.pop().expect("nonempty");
    let residual = max_of(&residuals(net, &x, &net.phi_unchecked(&x)?)?);
    Err(Error::NonConvergence {
        iterations: opts.max_iters,
        residual,
        last: x,
    })
}

fn state_key(x: &[LatticeValue]) -> Result<String> {
    Ok(serde_json::to_string(x)?)
}

/// Iterates from an arbitrary start on a finite network until an exact fixed
/// point is reached.
///
/// Plain iteration from an arbitrary point can revisit a state (a two-vertex
/// exchange of one permission cycles with period 2). When a cycle is found
/// the join `z` of its states satisfies `z <= phi(z)`, and ascending from `z`
/// terminates at a fixed point.
pub fn solve_from(net: &LiabilityNetwork, x0: Vec<LatticeValue>, max_iters: usize) -> Result<Section> {
    if !net.is_finite() {
        return Err(Error::Unsupported(
            "arbitrary-start solving needs finite payment lattices".into(),
        ));
    }
    net.check_values(&x0)?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut trail: Vec<Vec<LatticeValue>> = Vec::new();
    let mut x = x0;
    let mut k = 0;
    while k <= max_iters {
        let y = net.phi_unchecked(&x)?;
        if y == x {
            return Ok(Section {
                residual: vec![0.0; x.len()],
                values: x,
                iterations: k,
            });
        }
        if let Some(&start) = seen.get(&state_key(&x)?) {
            log::debug!("cycle of length {} after {k} steps", trail.len() - start);
            let mut z = trail[start].clone();
            for s in &trail[start + 1..] {
                z = net.values_join(&z, s)?;
            }
            let budget = SolveOptions {
                max_iters: max_iters - k,
                tol: 0.0,
            };
            let mut sec = iterate(net, z, budget)?;
            sec.iterations += k;
            return Ok(sec);
        }
        seen.insert(state_key(&x)?, trail.len());
        trail.push(x);
        x = y;
        k += 1;
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        residual: max_of(&residuals(net, &x, &net.phi_unchecked(&x)?)?),
        last: x,
    })
}

fn require_clearing(net: &LiabilityNetwork, s: &Section, tol: f64, name: &str) -> Result<()> {
    let check = net.is_clearing_section(&s.values, tol)?;
    if check.is_clearing {
        Ok(())
    } else {
        Err(Error::NotClearing(format!(
            "{name} fails at vertices {:?}",
            check.failing.iter().map(|&v| net.label(v)).collect::<Vec<_>>()
        )))
    }
}

/// Meet of two clearing sections inside the lattice of clearing sections.
///
/// The vertex-wise meet `m` of two fixed points satisfies `phi(m) <= m`; it is
/// returned directly when it is itself fixed, and otherwise the descending
/// iteration from `m` reaches the greatest fixed point below both.
pub fn section_meet(net: &LiabilityNetwork, a: &Section, b: &Section, opts: SolveOptions) -> Result<Section> {
    require_clearing(net, a, opts.tol, "first argument")?;
    require_clearing(net, b, opts.tol, "second argument")?;
    let m = net.values_meet(&a.values, &b.values)?;
    iterate(net, m, opts)
}

/// Join of two clearing sections inside the lattice of clearing sections.
pub fn section_join(net: &LiabilityNetwork, a: &Section, b: &Section, opts: SolveOptions) -> Result<Section> {
    require_clearing(net, a, opts.tol, "first argument")?;
    require_clearing(net, b, opts.tol, "second argument")?;
    let j = net.values_join(&a.values, &b.values)?;
    iterate(net, j, opts)
}
