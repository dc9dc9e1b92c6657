//! Message-passing simulation of distributed clearing.
//!
//! Every vertex keeps its own state and a cache holding the latest payment
//! received on each in-edge. An activated vertex recomputes its state from
//! the cache with its pay-in aggregator and then sends its distributor output
//! on every out-edge. Caches start as the distribution of the initial state.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeValue;
use crate::model::{LiabilityNetwork, Section};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Every vertex is activated each round against the previous round's
    /// messages.
    Synchronous,
    /// One uniformly drawn vertex per round.
    AsyncRandom { seed: u64 },
    /// One vertex per round, cycling through `order`.
    AsyncRoundRobin { order: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub mode: ScheduleMode,
    pub max_rounds: usize,
    /// A state change smaller than this does not lower a stability signal.
    pub tol: f64,
}

impl Schedule {
    pub fn synchronous() -> Self {
        Schedule {
            mode: ScheduleMode::Synchronous,
            max_rounds: 10_000,
            tol: 1e-9,
        }
    }

    pub fn async_random(seed: u64) -> Self {
        Schedule {
            mode: ScheduleMode::AsyncRandom { seed },
            ..Schedule::synchronous()
        }
    }

    pub fn round_robin(order: Vec<usize>) -> Self {
        Schedule {
            mode: ScheduleMode::AsyncRoundRobin { order },
            ..Schedule::synchronous()
        }
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Bottom,
    Top,
    Given(Vec<LatticeValue>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub edge: usize,
    pub value: LatticeValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub index: usize,
    pub activated: Vec<usize>,
    pub messages: Vec<Message>,
    /// Every vertex's state after the round.
    pub states: Vec<LatticeValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationMode {
    /// A synchronous round changed no state.
    StateFixpoint,
    /// The stabilization signals covered every vertex.
    SignalProtocol,
    /// The round budget ran out.
    Budget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub initial: Vec<LatticeValue>,
    pub rounds: Vec<Round>,
    pub terminated_at: usize,
    pub termination_mode: TerminationMode,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    round: usize,
    vertex: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<&'a LatticeValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a LatticeValue>,
}

impl Trace {
    /// Writes one JSON record per message and per state of an activated
    /// vertex, in simulation order. Round 0 lists the initial states.
    pub fn write_jsonl<W: Write>(&self, net: &LiabilityNetwork, mut w: W) -> Result<()> {
        let mut line = |rec: &TraceRecord| -> Result<()> {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")
                .map_err(|e| Error::Unsupported(format!("trace write failed: {e}")))
        };
        for (v, s) in self.initial.iter().enumerate() {
            line(&TraceRecord {
                round: 0,
                vertex: v,
                edge: None,
                value: None,
                state: Some(s),
            })?;
        }
        for r in &self.rounds {
            for &v in &r.activated {
                line(&TraceRecord {
                    round: r.index,
                    vertex: v,
                    edge: None,
                    value: None,
                    state: Some(&r.states[v]),
                })?;
            }
            for m in &r.messages {
                line(&TraceRecord {
                    round: r.index,
                    vertex: net.edge(m.edge).source,
                    edge: Some(m.edge),
                    value: Some(&m.value),
                    state: None,
                })?;
            }
        }
        Ok(())
    }

    pub fn message_count(&self) -> usize {
        self.rounds.iter().map(|r| r.messages.len()).sum()
    }
}

/// Stabilization-signal termination detection.
///
/// A vertex raises its signal when an activation leaves its state unchanged.
/// Any change lowers every signal, since neighbours may now see new inputs.
/// Termination is declared once all signals are up, which takes at least one
/// activation of every vertex after the last change.
#[derive(Clone, Debug)]
pub struct TerminationDetector {
    raised: Vec<bool>,
    count: usize,
}

impl TerminationDetector {
    pub fn new(vertex_count: usize) -> Self {
        TerminationDetector {
            raised: vec![false; vertex_count],
            count: 0,
        }
    }

    /// Records an activation of `v`; returns whether termination holds.
    pub fn observe(&mut self, v: usize, changed: bool) -> bool {
        if changed {
            self.raised.iter_mut().for_each(|r| *r = false);
            self.count = 0;
        } else if !self.raised[v] {
            self.raised[v] = true;
            self.count += 1;
        }
        self.terminated()
    }

    pub fn terminated(&self) -> bool {
        self.count == self.raised.len()
    }
}

fn send(
    net: &LiabilityNetwork,
    v: usize,
    state: &LatticeValue,
    cache: &mut [LatticeValue],
    out: &mut Vec<Message>,
) -> Result<()> {
    for (e, p) in net.distribute(v, state)? {
        cache[e] = p.clone();
        out.push(Message { edge: e, value: p });
    }
    Ok(())
}

/// Runs the simulation. Returns the final section and the trace; running out
/// of rounds yields [`Error::BudgetExhausted`] carrying the trace.
pub fn run(net: &LiabilityNetwork, init: Init, schedule: &Schedule) -> Result<(Section, Trace)> {
    let n = net.vertex_count();
    let x0 = match init {
        Init::Bottom => net.bottom(),
        Init::Top => net.top(),
        Init::Given(x) => {
            net.check_values(&x)?;
            x
        }
    };
    let synchronous = match &schedule.mode {
        ScheduleMode::Synchronous => true,
        ScheduleMode::AsyncRandom { .. } => false,
        ScheduleMode::AsyncRoundRobin { order } => {
            let mut seen = vec![false; n];
            for &v in order {
                if v >= n || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidParams(format!(
                        "round-robin order {order:?} is not a permutation"
                    )));
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidParams(format!(
                    "round-robin order {order:?} misses vertices"
                )));
            }
            false
        }
    };
    if !synchronous && !net.is_finite() {
        return Err(Error::Unsupported(
            "asynchronous schedules need finite payment lattices".into(),
        ));
    }

    let mut states = x0.clone();
    let mut cache = vec![LatticeValue::Scalar(0.0); net.edge_count()];
    let mut discard = Vec::new();
    for (v, state) in states.iter().enumerate() {
        send(net, v, state, &mut cache, &mut discard)?;
    }
    let mut rng = match schedule.mode {
        ScheduleMode::AsyncRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut detector = TerminationDetector::new(n);
    let mut trace = Trace {
        initial: x0,
        rounds: Vec::new(),
        terminated_at: 0,
        termination_mode: TerminationMode::Budget,
    };
    if n == 0 {
        trace.termination_mode = TerminationMode::StateFixpoint;
        let empty = Section {
            values: Vec::new(),
            iterations: 0,
            residual: Vec::new(),
        };
        return Ok((empty, trace));
    }

    let mut changes = 0;
    for index in 1..=schedule.max_rounds {
        let activated: Vec<usize> = match &schedule.mode {
            ScheduleMode::Synchronous => (0..n).collect(),
            ScheduleMode::AsyncRandom { .. } => vec![rng.as_mut().expect("seeded").gen_range(0..n)],
            ScheduleMode::AsyncRoundRobin { order } => vec![order[(index - 1) % n]],
        };
        // All activated vertices read the caches before anyone sends.
        let mut changed = Vec::with_capacity(activated.len());
        let next = activated
            .iter()
            .map(|&v| net.pay_in(v, &cache))
            .collect::<Result<Vec<_>>>()?;
        for (&v, x) in activated.iter().zip(next) {
            changed.push(!net.lattice(v).close(&states[v], &x, schedule.tol)?);
            states[v] = x;
        }
        let mut messages = Vec::new();
        for &v in &activated {
            send(net, v, &states[v], &mut cache, &mut messages)?;
        }
        let mut done = false;
        for (&v, &c) in activated.iter().zip(&changed) {
            changes += usize::from(c);
            done = detector.observe(v, c);
        }
        trace.rounds.push(Round {
            index,
            activated,
            messages,
            states: states.clone(),
        });
        if done {
            trace.terminated_at = index;
            trace.termination_mode = if synchronous {
                TerminationMode::StateFixpoint
            } else {
                TerminationMode::SignalProtocol
            };
            let image = net.phi(&states)?;
            let residual = net
                .lattices()
                .iter()
                .zip(states.iter().zip(&image))
                .map(|(d, (a, b))| d.distance(a, b))
                .collect::<Result<Vec<_>>>()?;
            let iterations = if synchronous { index - 1 } else { changes };
            let section = Section {
                values: states,
                iterations,
                residual,
            };
            return Ok((section, trace));
        }
    }
    trace.terminated_at = schedule.max_rounds;
    Err(Error::BudgetExhausted {
        rounds: schedule.max_rounds,
        trace: Box::new(trace),
    })
}
