//! Acceptance suite: one PASS/FAIL line per criterion.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

mod common;

use std::process::ExitCode;
use std::time::Instant;

use clearing_core::builders::{
    build_compliance_network, build_eisenberg_noe, build_multicurrency, check_min_delegation, least_privilege_section,
    payment_vector, supply_chain_example, CurrencyEdge, Slippage, TermEdge, TermParams,
};
use clearing_core::lattice::{FinitePoset, LatticeDescriptor, LatticeValue};
use clearing_core::model::{production_scaling, EdgeTag, LiabilityNetwork, NetworkBuilder, NodeKind, Section, Witness};
use clearing_core::multivalued::{Correspondence, MvInit, MvNetwork};
use clearing_core::residuated::{ResiduatedLogic, ALL_LOGICS};
use clearing_core::sim::{run, Init, Schedule};
use clearing_core::solver::{
    greatest_clearing, kleene_iterates, least_clearing, section_join, section_meet, solve_from, SolveOptions,
};
use common::*;
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const GRID_TOL: f64 = 1e-12;

fn c01_residuated_laws() -> Outcome {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut checks = 0usize;
    for logic in ALL_LOGICS {
        let t = |a, b| logic.tnorm(a, b).unwrap();
        let r = |a, b| logic.residuum(a, b).unwrap();
        for &x in &grid {
            ensure!((t(x, 1.0) - x).abs() <= GRID_TOL, "{logic:?}: {x} ⊗ 1 != {x}");
            ensure!(t(x, 0.0).abs() <= GRID_TOL, "{logic:?}: {x} ⊗ 0 != 0");
            ensure!((r(1.0, x) - x).abs() <= GRID_TOL, "{logic:?}: 1 -> {x} != {x}");
            for &y in &grid {
                ensure!(
                    (t(x, y) - t(y, x)).abs() <= GRID_TOL,
                    "{logic:?}: not commutative at {x}, {y}"
                );
                let implies_one = (r(x, y) - 1.0).abs() <= GRID_TOL;
                ensure!(
                    implies_one == (x <= y + GRID_TOL),
                    "{logic:?}: {x} -> {y} = 1 iff {x} <= {y} fails"
                );
                for &z in &grid {
                    checks += 1;
                    let left = t(x, y) <= z + GRID_TOL;
                    let right = x <= r(y, z) + GRID_TOL;
                    ensure!(left == right, "{logic:?}: adjunction fails at ({x}, {y}, {z})");
                    ensure!(
                        (t(t(x, y), z) - t(x, t(y, z))).abs() <= GRID_TOL,
                        "{logic:?}: not associative at ({x}, {y}, {z})"
                    );
                    ensure!(
                        t(x, r(x, y)) <= y + GRID_TOL,
                        "{logic:?}: modus ponens fails at {x}, {y}"
                    );
                    if x <= y {
                        ensure!(t(x, z) <= t(y, z) + GRID_TOL, "{logic:?}: t-norm not monotone");
                        ensure!(
                            r(y, z) <= r(x, z) + GRID_TOL,
                            "{logic:?}: residuum not antitone in its first argument"
                        );
                        ensure!(
                            r(z, x) <= r(z, y) + GRID_TOL,
                            "{logic:?}: residuum not monotone in its second argument"
                        );
                    }
                }
            }
        }
    }
    Ok(format!("{checks} grid triples over 3 logics"))
}

fn c02_worked_numerics() -> Outcome {
    let net = ok(build_compliance_network())?;
    let c = net.vertex_index("C").ok_or("no vertex C")?;
    let mut pays = ok(net.edge_payments(&net.bottom()))?;
    let ins = net.regular_in(c).to_vec();
    let pair = |q: f64, mu: [f64; 2]| LatticeValue::tuple([LatticeValue::scalar(q), LatticeValue::vector(mu)]);
    for &e in &ins {
        let src = net.label(net.edge(e).source);
        pays[e] = match src {
            "B" => pair(800.0, [0.7, 0.7]),
            "D" => pair(400.0, [0.75, 0.7]),
            other => return Err(format!("unexpected creditor {other} of C")),
        };
    }
    let got = ok(net.pay_in(c, &pays))?;
    let t = got.as_tuple().ok_or("C is not a pair")?;
    let mu = t[1].as_vector().ok_or("no quality vector")?;
    ensure!(t[0] == LatticeValue::scalar(1200.0), "quantity at C is {:?}", t[0]);
    ensure!(
        (mu[0] - 0.45).abs() < 1e-12 && (mu[1] - 0.4).abs() < 1e-12,
        "quality at C is {mu:?}"
    );

    let q = ok(ResiduatedLogic::Godel.tnorm_vec(&[0.9, 0.85, 0.95], &[0.85, 0.92, 0.88]))?;
    ensure!(q == vec![0.85, 0.85, 0.88], "Godel meet is {q:?}");
    let f = production_scaling(&q, &[0.8, 0.8, 0.85], 2.0);
    ensure!((f - 0.04).abs() <= 1e-12, "production scaling is {f}");
    ok(supply_chain_example().build())?;
    Ok(format!(
        "C = (1200, ({:.2}, {:.2})), meet {q:?}, scaling {f:.12}",
        mu[0], mu[1]
    ))
}

fn c03_compliance_decay() -> Outcome {
    let net = ok(build_compliance_network())?;
    let opts = SolveOptions {
        max_iters: 1_000_000,
        tol: 1e-12,
    };
    let sec = ok(greatest_clearing(&net, opts))?;
    for v in ["A", "B", "C"] {
        let x = &sec.values[net.vertex_index(v).ok_or("missing bank")?];
        let mu = x.as_tuple().and_then(|t| t[1].as_vector()).ok_or("not a pair")?;
        ensure!(mu.iter().all(|&m| m == 0.0), "quality at {v} is {mu:?}");
    }
    let labels = ["A", "B", "C", "D"];
    let idx = |s: &str| labels.iter().position(|l| *l == s).unwrap();
    let mut l = vec![vec![0.0; 4]; 4];
    for (s, t, q) in [
        ("A", "B", 1000.0),
        ("B", "C", 800.0),
        ("C", "A", 900.0),
        ("B", "D", 500.0),
        ("D", "C", 400.0),
    ] {
        l[idx(s)][idx(t)] = q;
    }
    let a = vec![0.0; 4];
    let p = en_damped_oracle(&l, &a);
    let pbar: Vec<f64> = l.iter().map(|r| r.iter().sum()).collect();
    let mut worst: f64 = 0.0;
    for (i, label) in labels.iter().enumerate() {
        let resources: f64 = a[i] + (0..4).map(|j| l[j][i] / pbar[j] * p[j]).sum::<f64>();
        let v = net.vertex_index(label).ok_or("missing bank")?;
        let q = sec.values[v]
            .as_tuple()
            .and_then(|t| t[0].as_scalar())
            .ok_or("no quantity")?;
        worst = worst.max((q - resources).abs());
    }
    ensure!(
        worst <= 1e-9,
        "quantities differ from the interbank oracle by {worst:e}"
    );
    Ok(format!("qualities 0 at A, B, C; quantity gap {worst:.1e}"))
}

struct FiniteCase {
    seed: u64,
    net: LiabilityNetwork,
    fix: Vec<Vec<LatticeValue>>,
}

fn finite_cases() -> Vec<FiniteCase> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < 40 {
        seed += 1;
        let mut r = rng(1000 + seed);
        let net = random_finite_net(&mut r);
        let size: usize = net.lattices().iter().map(|d| d.cardinality().unwrap()).product();
        if size > 4096 {
            continue;
        }
        let fix = net.brute_force_fixed_points().unwrap();
        out.push(FiniteCase { seed, net, fix });
    }
    out
}

fn as_section(values: &[LatticeValue]) -> Section {
    Section {
        values: values.to_vec(),
        iterations: 0,
        residual: Vec::new(),
    }
}

fn c04_tarski(cases: &[FiniteCase]) -> Outcome {
    let opts = SolveOptions::default();
    let mut pairs = 0;
    let mut vertexwise = 0;
    for c in cases {
        let net = &c.net;
        ensure!(!c.fix.is_empty(), "seed {}: no fixed points", c.seed);
        let least = ok(least_clearing(net, opts))?.values;
        let greatest = ok(greatest_clearing(net, opts))?.values;
        ensure!(
            c.fix.contains(&least),
            "seed {}: least section not a fixed point",
            c.seed
        );
        ensure!(
            c.fix.contains(&greatest),
            "seed {}: greatest section not a fixed point",
            c.seed
        );
        for x in &c.fix {
            ensure!(
                ok(net.section_leq(&least, x))?,
                "seed {}: a fixed point lies below the least",
                c.seed
            );
            ensure!(
                ok(net.section_leq(x, &greatest))?,
                "seed {}: a fixed point lies above the greatest",
                c.seed
            );
        }
        let step = (c.fix.len() / 20).max(1);
        for a in c.fix.iter().step_by(step) {
            for b in c.fix.iter().step_by(step) {
                pairs += 1;
                let m = ok(section_meet(net, &as_section(a), &as_section(b), opts))?.values;
                let j = ok(section_join(net, &as_section(a), &as_section(b), opts))?.values;
                if ok(net.values_meet(a, b))? == m {
                    vertexwise += 1;
                }
                ensure!(
                    c.fix.contains(&m) && c.fix.contains(&j),
                    "seed {}: meet or join left Fix",
                    c.seed
                );
                // m is the greatest fixed point below both; j the least above both.
                for x in &c.fix {
                    if ok(net.section_leq(x, a))? && ok(net.section_leq(x, b))? {
                        ensure!(ok(net.section_leq(x, &m))?, "seed {}: meet is not greatest", c.seed);
                    }
                    if ok(net.section_leq(a, x))? && ok(net.section_leq(b, x))? {
                        ensure!(ok(net.section_leq(&j, x))?, "seed {}: join is not least", c.seed);
                    }
                }
            }
        }
    }
    let total: usize = cases.iter().map(|c| c.fix.len()).sum();
    Ok(format!(
        "{} nets, {total} fixed points, {pairs} meet/join pairs ({vertexwise} meets already vertex-wise)",
        cases.len()
    ))
}

fn c05_iteration_bound(cases: &[FiniteCase]) -> Outcome {
    let opts = SolveOptions::default();
    let mut worst = 0.0f64;
    for c in cases {
        let h = c.net.total_height().finite().ok_or("infinite height")?;
        let lo = ok(least_clearing(&c.net, opts))?.iterations;
        let hi = ok(greatest_clearing(&c.net, opts))?.iterations;
        ensure!(
            lo <= h && hi <= h,
            "seed {}: {lo} and {hi} iterations exceed height {h}",
            c.seed
        );
        worst = worst.max(lo.max(hi) as f64 / h as f64);
    }
    Ok(format!(
        "{} nets, worst ratio iterations/height {worst:.2}",
        cases.len()
    ))
}

fn c06_arbitrary_start(cases: &[FiniteCase]) -> Outcome {
    let mut runs = 0;
    for c in cases {
        let mut r = rng(77 + c.seed);
        let elems: Vec<Vec<LatticeValue>> = c.net.lattices().iter().map(|d| d.enumerate().unwrap()).collect();
        for _ in 0..50 {
            let x0: Vec<LatticeValue> = elems.iter().map(|e| e.choose(&mut r).unwrap().clone()).collect();
            let sec = ok(solve_from(&c.net, x0, 10_000))?;
            ensure!(
                c.fix.contains(&sec.values),
                "seed {}: solve_from ended outside Fix",
                c.seed
            );
            runs += 1;
        }
    }
    Ok(format!("{runs} random starts, all terminated in Fix"))
}

fn c07_en_oracle() -> Outcome {
    let opts = SolveOptions {
        max_iters: 1_000_000,
        tol: 1e-13,
    };
    let mut worst_res = 0.0f64;
    let mut worst_gap = 0.0f64;
    for k in 0..60 {
        let mut r = rng(5000 + k);
        let n = r.gen_range(2..=6);
        let (l, a) = random_en(&mut r, n);
        let net = ok(build_eisenberg_noe(&l, &a))?;
        let sec = ok(greatest_clearing(&net, opts))?;
        let p = ok(payment_vector(&net, &sec.values))?;
        let oracle = en_damped_oracle(&l, &a);
        let res = en_residual(&l, &a, &p);
        let gap = p.iter().zip(&oracle).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure!(res <= 1e-9, "instance {k}: residual {res:e}");
        ensure!(gap <= 1e-8, "instance {k}: oracle gap {gap:e}");
        worst_res = worst_res.max(res);
        worst_gap = worst_gap.max(gap);
    }
    Ok(format!(
        "60 instances, max residual {worst_res:.1e}, max oracle gap {worst_gap:.1e}"
    ))
}

fn c08_distributed(cases: &[FiniteCase]) -> Outcome {
    let opts = SolveOptions::default();
    let mut async_runs = 0;
    for c in cases {
        let net = &c.net;
        for (init, start) in [(Init::Bottom, net.bottom()), (Init::Top, net.top())] {
            let seq = ok(kleene_iterates(net, start, opts))?;
            let (sec, trace) = ok(run(net, init, &Schedule::synchronous()))?;
            ensure!(
                trace.rounds.len() == seq.len(),
                "seed {}: {} rounds for {} iterates",
                c.seed,
                trace.rounds.len(),
                seq.len()
            );
            for (round, x) in trace.rounds.iter().zip(seq.iter().skip(1).chain(seq.last())) {
                ensure!(&round.states == x, "seed {}: round {} differs", c.seed, round.index);
            }
            ensure!(
                &sec.values == seq.last().unwrap(),
                "seed {}: final states differ",
                c.seed
            );
        }
        for s in 0..10 {
            let (sec, _) = ok(run(net, Init::Bottom, &Schedule::async_random(s)))?;
            ensure!(
                c.fix.contains(&sec.values),
                "seed {}: async run {s} ended outside Fix",
                c.seed
            );
            async_runs += 1;
        }
    }
    Ok(format!(
        "{} nets bit-identical from bottom and top, {async_runs} async runs in Fix",
        cases.len()
    ))
}

fn flat(values: Vec<LatticeValue>) -> Vec<LatticeValue> {
    values.into_iter().map(|x| x.as_tuple().unwrap()[0].clone()).collect()
}

fn c09_reductions(cases: &[FiniteCase]) -> Outcome {
    let opts = SolveOptions {
        max_iters: 1_000_000,
        tol: 1e-12,
    };
    for k in 0..30 {
        let mut r = rng(9000 + k);
        let n = r.gen_range(2..=5);
        let (l, a) = random_en(&mut r, n);
        let en = ok(build_eisenberg_noe(&l, &a))?;
        let lo = ok(least_clearing(&en, opts))?.values;
        let hi = ok(greatest_clearing(&en, opts))?.values;

        let mut unit = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if l[i][j] > 0.0 {
                    unit.push(CurrencyEdge {
                        from: format!("V{i}"),
                        to: format!("V{j}"),
                        rate: 1.0,
                        slippage: Slippage::None,
                    });
                }
            }
        }
        let fx = ok(build_multicurrency(&l, &a, unit))?;
        ensure!(
            ok(least_clearing(&fx, opts))?.values == lo,
            "instance {k}: unit-rate least differs"
        );
        ensure!(
            ok(greatest_clearing(&fx, opts))?.values == hi,
            "instance {k}: unit-rate greatest differs"
        );

        let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if l[i][j] > 0.0 {
                    edges.push(TermEdge {
                        from: labels[i].clone(),
                        to: labels[j].clone(),
                        rates: vec![l[i][j]],
                        kernel: None,
                    });
                }
            }
        }
        let term = TermParams {
            labels,
            buckets: 1,
            horizon: 1.0,
            edges,
            assets: a.iter().map(|x| vec![*x]).collect(),
        };
        let tnet = ok(term.build())?;
        ensure!(
            flat(ok(least_clearing(&tnet, opts))?.values) == lo,
            "instance {k}: one-bucket least differs"
        );
        ensure!(
            flat(ok(greatest_clearing(&tnet, opts))?.values) == hi,
            "instance {k}: one-bucket greatest differs"
        );

        let mv = MvNetwork::lift(en.clone());
        let b = ok(mv.solve_boundaries(MvInit::Bottom, opts))?;
        ensure!(
            b.lo == lo && b.hi == lo,
            "instance {k}: lifted bottom boundaries differ"
        );
        let t = ok(mv.solve_boundaries(MvInit::Top, opts))?;
        ensure!(t.lo == hi && t.hi == hi, "instance {k}: lifted top boundaries differ");
    }
    for c in cases {
        let mv = MvNetwork::lift(c.net.clone());
        let o = SolveOptions::default();
        let b = ok(mv.solve_boundaries(MvInit::Bottom, o))?;
        let t = ok(mv.solve_boundaries(MvInit::Top, o))?;
        ensure!(
            b.lo == ok(least_clearing(&c.net, o))?.values && b.hi == b.lo,
            "seed {}: lifted least differs",
            c.seed
        );
        ensure!(
            t.hi == ok(greatest_clearing(&c.net, o))?.values && t.lo == t.hi,
            "seed {}: lifted greatest differs",
            c.seed
        );
    }
    Ok(format!(
        "30 interbank instances x 3 reductions and {} lifted finite nets, all exact",
        cases.len()
    ))
}

fn c10_permission() -> Outcome {
    let mut nets = 0;
    let mut with_valid = 0;
    let mut literal_holds = 0;
    let mut literal_fails = 0;
    let mut no_least = 0;
    for k in 0..60 {
        let mut r = rng(12_000 + k);
        let params = random_permission_params(&mut r);
        let net = ok(params.build())?;
        nets += 1;
        let fix = ok(net.brute_force_fixed_points())?;
        let mut valid = Vec::new();
        for x in &fix {
            if ok(check_min_delegation(&net, x))?.valid {
                valid.push(x.clone());
            }
        }
        for a in &valid {
            for b in &fix {
                if ok(net.section_leq(a, b))? {
                    ensure!(valid.contains(b), "net {k}: a fixed point above a valid one is invalid");
                }
            }
        }
        let mut least_valid = None;
        for a in &valid {
            let mut below_all = true;
            for b in &valid {
                below_all &= ok(net.section_leq(a, b))?;
            }
            if below_all {
                least_valid = Some(a.clone());
            }
        }
        if !valid.is_empty() {
            with_valid += 1;
            if least_valid.is_none() {
                no_least += 1;
            }
        }
        let computed = ok(least_privilege_section(&net, 10_000))?;
        ensure!(
            computed == least_valid,
            "net {k}: least-privilege search gives {computed:?}, brute force {least_valid:?}"
        );
        let inherent: Vec<LatticeValue> = (0..net.vertex_count())
            .map(|v| net.exogenous(v).cloned().unwrap())
            .collect();
        let from_inherent = ok(solve_from(&net, inherent, 10_000))?.values;
        if let Some(lv) = &least_valid {
            if ok(check_min_delegation(&net, &from_inherent))?.valid {
                ensure!(
                    &from_inherent == lv,
                    "net {k}: valid start-from-inherent section is not least"
                );
                literal_holds += 1;
            } else {
                literal_fails += 1;
            }
        }
    }
    Ok(format!(
        "{nets} nets, {with_valid} with valid sections, upset property holds, least valid found exactly; \
         iteration from inherent permissions equals it on {literal_holds}, misses a required delegation on {literal_fails} \
         ({no_least} nets without a least valid section)"
    ))
}

fn tiny_mv(seed: u64) -> Option<MvNetwork> {
    let mut r = rng(seed);
    let n = r.gen_range(2..=3);
    let lattices: Vec<LatticeDescriptor> = (0..n)
        .map(|_| {
            let covers = if r.gen_bool(0.5) { vec![(0, 1)] } else { vec![] };
            LatticeDescriptor::downset(FinitePoset::new(vec!["p".into(), "q".into()], covers).unwrap())
        })
        .collect();
    let mut b = NetworkBuilder::new();
    for (v, d) in lattices.iter().enumerate() {
        b.vertex(format!("V{v}"), d.clone(), NodeKind::PermissionUnion);
    }
    for _ in 0..r.gen_range(1..=n + 1) {
        let s = r.gen_range(0..n);
        let mut t = r.gen_range(0..n - 1);
        if t >= s {
            t += 1;
        }
        let elems = lattices[s].enumerate().unwrap();
        let liab = elems.choose(&mut r).unwrap().clone();
        let pairs = vec![(0, 0), (1, 1)];
        b.edge_with(
            s,
            t,
            liab,
            clearing_core::model::EdgeParams {
                conversion: clearing_core::model::Conversion::LabelMatch { pairs },
                ..Default::default()
            },
        );
    }
    let exo: Vec<LatticeValue> = lattices
        .iter()
        .map(|d| d.enumerate().unwrap().choose(&mut r).unwrap().clone())
        .collect();
    let base = b.build().ok()?.augment_with(&exo, EdgeTag::OverflowLoop).ok()?;
    let inagg = (0..n)
        .map(|v| match r.gen_range(0..4) {
            0 => Correspondence::Singleton,
            1 => Correspondence::interval(1),
            2 => Correspondence::IntervalAround { below: 0, above: 1 },
            _ => {
                // z -> [z ∧ a, z ∨ b] with a <= b
                let d = base.lattice(v);
                let elems = d.enumerate().unwrap();
                let a = elems.choose(&mut r).unwrap().clone();
                let b = d.join(&a, elems.choose(&mut r).unwrap()).unwrap();
                let table = elems
                    .iter()
                    .map(|z| {
                        let lo = d.meet(z, &a).unwrap();
                        let hi = d.join(z, &b).unwrap();
                        let img = elems
                            .iter()
                            .filter(|c| d.leq(&lo, c).unwrap() && d.leq(c, &hi).unwrap())
                            .cloned()
                            .collect();
                        (z.clone(), img)
                    })
                    .collect();
                Correspondence::Explicit { table }
            }
        })
        .collect();
    let dist = (0..n)
        .map(|_| {
            if r.gen_bool(0.5) {
                Correspondence::Singleton
            } else {
                Correspondence::IntervalAround { below: 1, above: 0 }
            }
        })
        .collect();
    MvNetwork::new(base, inagg, dist).ok()
}

fn c11_multivalued() -> Outcome {
    let opts = SolveOptions::default();
    let mut nets = 0;
    let mut sections = 0;
    let mut tight = 0;
    let mut seed = 0;
    while nets < 25 {
        seed += 1;
        let Some(mv) = tiny_mv(20_000 + seed) else { continue };
        nets += 1;
        let all = ok(mv.enumerate_sections(100_000))?;
        let env = ok(mv.envelope(opts))?;
        for s in &all {
            ensure!(
                ok(env.contains(&mv, s))?,
                "seed {seed}: section {s:?} escapes the boundary"
            );
        }
        sections += all.len();
        // Tightness: does the envelope equal the extreme elements?
        let n = mv.base().vertex_count();
        let mut lo_hit = vec![false; n];
        let mut hi_hit = vec![false; n];
        for s in &all {
            for v in 0..n {
                lo_hit[v] |= s[v].contains(&env.lo[v]);
                hi_hit[v] |= s[v].contains(&env.hi[v]);
            }
        }
        if lo_hit.iter().chain(&hi_hit).all(|&h| h) {
            tight += 1;
        }
    }
    Ok(format!(
        "{nets} tiny nets, {sections} enumerated sections all inside [lo*, hi*]; boundary attained on {tight} nets"
    ))
}

fn c12_seeded_defects() -> Outcome {
    let report = ok(defect_liability_bound().validate(200, 1))?;
    ensure!(!report.liability_bound.passed, "liability defect not caught");
    match report.liability_bound.witnesses.first() {
        Some(Witness::LiabilityBound {
            edge,
            payment,
            liability,
            source,
            target,
        }) => {
            ensure!(*edge == 0 && source == "X" && target == "Y", "wrong edge in witness");
            let (p, l) = (payment.as_scalar().unwrap(), liability.as_scalar().unwrap());
            ensure!(p > l && l == 5.0, "witness payment {p} does not exceed liability {l}");
        }
        w => return Err(format!("unexpected liability witness {w:?}")),
    }

    let net = defect_factorization();
    let report = ok(net.validate(200, 1))?;
    ensure!(
        report.liability_bound.passed,
        "factorization fixture also breaks the liability bound"
    );
    ensure!(!report.factorization.passed, "factorization defect not caught");
    match report.factorization.witnesses.first() {
        Some(Witness::Factorization {
            vertex,
            input,
            recombined,
        }) => {
            ensure!(vertex == "X", "witness at {vertex}");
            let v = net.vertex_index(vertex).unwrap();
            let again = ok(net.pay_out(v, &ok(net.distribute(v, input))?))?;
            ensure!(&again == recombined && again != *input, "witness does not reproduce");
        }
        w => return Err(format!("unexpected factorization witness {w:?}")),
    }

    let net = defect_antitone();
    let report = ok(net.validate(200, 1))?;
    ensure!(
        report.liability_bound.passed && report.factorization.passed,
        "antitone fixture breaks other checks"
    );
    ensure!(!report.monotonicity.passed, "antitone aggregator not caught");
    let y = net.vertex_index("Y").unwrap();
    for w in &report.monotonicity.witnesses {
        match w {
            Witness::AggregatorMonotonicity {
                vertex,
                lower_image,
                upper_image,
                ..
            } => {
                ensure!(vertex == "Y", "witness at {vertex}");
                ensure!(
                    !ok(net.lattice(y).leq(lower_image, upper_image))?,
                    "witness images are ordered"
                );
            }
            w => return Err(format!("unexpected monotonicity witness {w:?}")),
        }
    }
    Ok("liability bound, factorization and monotonicity defects each rejected with a reproducible witness".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = finite_cases();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("residuated laws", Box::new(c01_residuated_laws)),
        ("worked numerics", Box::new(c02_worked_numerics)),
        ("compliance decay", Box::new(c03_compliance_decay)),
        ("fixed-point lattice structure", Box::new(|| c04_tarski(&cases))),
        ("iteration bound", Box::new(|| c05_iteration_bound(&cases))),
        ("arbitrary-start convergence", Box::new(|| c06_arbitrary_start(&cases))),
        ("interbank oracle", Box::new(c07_en_oracle)),
        ("distributed agreement", Box::new(|| c08_distributed(&cases))),
        ("reductions", Box::new(|| c09_reductions(&cases))),
        ("permission upset", Box::new(c10_permission)),
        ("multivalued soundness", Box::new(c11_multivalued)),
        ("seeded defects", Box::new(c12_seeded_defects)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag} {name}: {detail} [{:.2}s]",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
