mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use clearing_core::lattice::LatticeValue;
use clearing_core::model::LiabilityNetwork;
use clearing_core::multivalued::{MvInit, MvNetwork};
use clearing_core::sim::{self, Init, Schedule, TerminationMode};
use clearing_core::solver::{self, Direction, SolveOptions};
use clearing_core::spec_file::{DomainSpec, Loaded, NetworkSource, SpecFile};
use serde::Serialize;
use serde_json::json;

use report::{residuals, section_report, SectionReport, REPORT_SCHEMA_VERSION};

const EXIT_INPUT: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "clearing",
    version,
    about = "Clearing sections of lattice liability networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check liability bounds, factorization and monotonicity.
    Validate {
        spec: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the least and/or greatest clearing section.
    Solve {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Greatest)]
        direction: DirectionArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a per-vertex CSV summary.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the message-passing simulation.
    Simulate {
        spec: PathBuf,
        /// `sync`, `async-random:SEED` or `round-robin[:LABEL,LABEL,...]`.
        #[arg(long, default_value = "sync")]
        schedule: String,
        #[arg(long, value_enum, default_value_t = InitArg::Bottom)]
        init: InitArg,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Bounds on the clearing sections of a multivalued network.
    MvSolve {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = InitArg::Bottom)]
        init: InitArg,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Least,
    Greatest,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Bottom,
    Top,
}

/// Error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<clearing_core::Error>() {
            Some(clearing_core::Error::NonConvergence { .. } | clearing_core::Error::BudgetExhausted { .. }) => {
                EXIT_NONCONVERGENCE
            }
            Some(clearing_core::Error::Unsupported(_)) => EXIT_UNSUPPORTED,
            _ => EXIT_INPUT,
        };
        Failure { code, error }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CLEARING_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate {
            spec,
            samples,
            seed,
            out,
        } => validate(&spec, samples, seed, out.as_deref()),
        Command::Solve {
            spec,
            direction,
            tol,
            max_iters,
            out,
            csv,
        } => solve(
            &spec,
            direction,
            SolveOptions { max_iters, tol },
            out.as_deref(),
            csv.as_deref(),
        ),
        Command::Simulate {
            spec,
            schedule,
            init,
            trace,
            out,
            max_rounds,
        } => simulate(&spec, &schedule, init, &trace, out.as_deref(), max_rounds),
        Command::MvSolve {
            spec,
            init,
            max_iters,
            out,
        } => mv_solve(&spec, init, max_iters, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read_spec(path: &Path) -> Result<(SpecFile, Loaded), Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = SpecFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let loaded = spec.load().with_context(|| format!("loading {}", path.display()))?;
    log::info!(
        "loaded {} vertices and {} edges from {}",
        loaded.network.vertex_count(),
        loaded.network.edge_count(),
        path.display()
    );
    Ok((spec, loaded))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn validate(path: &Path, samples: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    let (_, loaded) = read_spec(path)?;
    let report = loaded.network.validate(samples, seed)?;
    emit(
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "validate",
            "passed": report.passed(),
            "report": report,
        }),
        out,
    )?;
    if report.passed() {
        return Ok(0);
    }
    let witnesses: Vec<_> = report.witnesses().collect();
    eprintln!(
        "{}",
        serde_json::to_string_pretty(&witnesses).map_err(anyhow::Error::from)?
    );
    Ok(EXIT_VALIDATION)
}

/// Report for a solver run that hit its budget: the last iterate with its
/// per-vertex residuals.
fn nonconvergent(net: &LiabilityNetwork, err: &clearing_core::Error) -> Option<anyhow::Result<SectionReport>> {
    let clearing_core::Error::NonConvergence { iterations, last, .. } = err else {
        return None;
    };
    Some(
        residuals(net, last)
            .and_then(|r| section_report(net, "nonconvergent", last, *iterations, &r))
            .map_err(Into::into),
    )
}

fn solve(
    path: &Path,
    direction: DirectionArg,
    opts: SolveOptions,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> CmdResult {
    let (_, loaded) = read_spec(path)?;
    let net = &loaded.network;
    let dirs: &[(&str, Direction)] = match direction {
        DirectionArg::Least => &[("least", Direction::Least)],
        DirectionArg::Greatest => &[("greatest", Direction::Greatest)],
        DirectionArg::Both => &[("least", Direction::Least), ("greatest", Direction::Greatest)],
    };
    let mut sections: Vec<(&str, SectionReport)> = Vec::new();
    let mut values: Vec<Vec<LatticeValue>> = Vec::new();
    let mut code = 0;
    for &(name, dir) in dirs {
        match solver::solve(net, dir, opts) {
            Ok(s) => {
                sections.push((name, report::from_section(net, &s)?));
                values.push(s.values);
            }
            Err(e) => match nonconvergent(net, &e) {
                Some(r) => {
                    log::warn!("{name} iteration: {e}");
                    sections.push((name, r?));
                    code = EXIT_NONCONVERGENCE;
                }
                None => return Err(e.into()),
            },
        }
    }
    let mut body = serde_json::Map::new();
    body.insert("schema_version".into(), json!(REPORT_SCHEMA_VERSION));
    body.insert("command".into(), json!("solve"));
    body.insert("tol".into(), json!(opts.tol));
    for (name, s) in &sections {
        body.insert((*name).into(), serde_json::to_value(s).map_err(anyhow::Error::from)?);
    }
    if let [least, greatest] = values.as_slice() {
        body.insert("unique".into(), json!(net.section_close(least, greatest, opts.tol)?));
    }
    emit(&body, out)?;
    if let Some(p) = csv {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        let refs: Vec<(&str, &SectionReport)> = sections.iter().map(|(n, s)| (*n, s)).collect();
        report::write_csv(BufWriter::new(f), &refs)?;
    }
    Ok(code)
}

fn parse_schedule(text: &str, net: &LiabilityNetwork) -> anyhow::Result<Schedule> {
    let (head, arg) = match text.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (text, None),
    };
    match (head, arg) {
        ("sync", None) => Ok(Schedule::synchronous()),
        ("async-random", Some(seed)) => {
            let seed = seed.parse().with_context(|| format!("bad seed `{seed}`"))?;
            Ok(Schedule::async_random(seed))
        }
        ("round-robin", None) => Ok(Schedule::round_robin((0..net.vertex_count()).collect())),
        ("round-robin", Some(labels)) => {
            let order = labels
                .split(',')
                .map(|l| net.vertex_index(l).with_context(|| format!("unknown vertex `{l}`")))
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(Schedule::round_robin(order))
        }
        _ => bail!("unknown schedule `{text}`; expected sync, async-random:SEED or round-robin[:LABELS]"),
    }
}

fn write_trace(trace: &sim::Trace, net: &LiabilityNetwork, path: &Path) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer(
        &mut w,
        &json!({ "schema_version": REPORT_SCHEMA_VERSION, "vertices": net.labels() }),
    )?;
    w.write_all(b"\n")?;
    trace.write_jsonl(net, &mut w)?;
    w.flush()?;
    Ok(())
}

fn simulate(
    path: &Path,
    schedule: &str,
    init: InitArg,
    trace_path: &Path,
    out: Option<&Path>,
    max_rounds: Option<usize>,
) -> CmdResult {
    let (_, loaded) = read_spec(path)?;
    let net = &loaded.network;
    let mut sched = parse_schedule(schedule, net)?;
    if let Some(m) = max_rounds {
        sched = sched.with_max_rounds(m);
    }
    let init = match init {
        InitArg::Bottom => Init::Bottom,
        InitArg::Top => Init::Top,
    };
    let (section, trace, code) = match sim::run(net, init, &sched) {
        Ok((s, t)) => (report::from_section(net, &s)?, t, 0),
        Err(clearing_core::Error::BudgetExhausted { rounds, trace }) => {
            log::warn!("simulation budget of {rounds} rounds exhausted");
            let last = trace.rounds.last().map_or(&trace.initial, |r| &r.states).clone();
            let residual = residuals(net, &last)?;
            let r = section_report(net, "budget_exhausted", &last, trace.rounds.len(), &residual)?;
            (r, *trace, EXIT_NONCONVERGENCE)
        }
        Err(e) => return Err(e.into()),
    };
    write_trace(&trace, net, trace_path)?;
    let mode = match trace.termination_mode {
        TerminationMode::StateFixpoint => "state_fixpoint",
        TerminationMode::SignalProtocol => "signal_protocol",
        TerminationMode::Budget => "budget",
    };
    emit(
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "simulate",
            "schedule": sched.mode,
            "rounds": trace.rounds.len(),
            "messages": trace.message_count(),
            "termination_mode": mode,
            "section": section,
        }),
        out,
    )?;
    Ok(code)
}

#[derive(Serialize)]
struct BoundEntry {
    vertex: String,
    lo: LatticeValue,
    lo_display: String,
    hi: LatticeValue,
    hi_display: String,
}

fn bound_entries(mv: &MvNetwork, b: &clearing_core::multivalued::MvBounds) -> Vec<BoundEntry> {
    let net = mv.base();
    (0..net.vertex_count())
        .map(|v| BoundEntry {
            vertex: net.label(v).to_string(),
            lo: b.lo[v].clone(),
            lo_display: net.lattice(v).render(&b.lo[v]),
            hi: b.hi[v].clone(),
            hi_display: net.lattice(v).render(&b.hi[v]),
        })
        .collect()
}

fn mv_solve(path: &Path, init: InitArg, max_iters: usize, out: Option<&Path>) -> CmdResult {
    let (spec, loaded) = read_spec(path)?;
    let negotiation = matches!(spec.source, NetworkSource::Domain(DomainSpec::Negotiation(_)));
    let mv = loaded.multivalued.unwrap_or_else(|| MvNetwork::lift(loaded.network));
    let opts = SolveOptions {
        max_iters,
        ..SolveOptions::default()
    };
    let envelope = mv.envelope(opts)?;
    let init = match init {
        InitArg::Bottom => MvInit::Bottom,
        InitArg::Top => MvInit::Top,
    };
    let boundaries = mv.solve_boundaries(init, opts)?;
    let mut body = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "mv-solve",
        "envelope": { "iterations": envelope.iterations, "vertices": bound_entries(&mv, &envelope) },
        "boundaries": { "init": init, "iterations": boundaries.iterations, "vertices": bound_entries(&mv, &boundaries) },
    });
    if negotiation {
        body["zopa"] = serde_json::to_value(mv.zopa(&envelope)?).map_err(anyhow::Error::from)?;
    }
    emit(&body, out)?;
    Ok(0)
}
