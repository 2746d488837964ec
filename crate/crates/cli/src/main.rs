//! `nbrdv` — analyses for protocols with non-blocking rendez-vous.
//!
//! Exit codes: 0 the analysis ran (whatever its answer), 1 I/O error, 2 parse error,
//! 3 precondition violated, 4 search budget exhausted.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nbrdv_core::explore::{self, ExploreError, DEFAULT_BUDGET};
use nbrdv_core::lowerbound::{self, LiptonContext, LowerBoundError};
use nbrdv_core::machines::{self, BoundedVerdict, CounterMachine, MachineError};
use nbrdv_core::reductions::{self, MinskyMachine, ReductionError};
use nbrdv_core::text::{self, ParseError};
use nbrdv_core::waitonly::{self, WaitOnlyError};
use nbrdv_core::{Configuration, Problem, Protocol, Verdict};

#[derive(Parser, Debug)]
#[command(name = "nbrdv", version, about = "Coverability for non-blocking rendez-vous protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide SCover, CCover or Synchro.
    Check {
        problem: ProblemKind,
        file: PathBuf,
        /// Configuration literal to cover (ccover only), e.g. `q1:2,q5`.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Largest population tried by the explorer.
        #[arg(long, default_value_t = 6)]
        max_procs: u32,
        /// Configurations visited per population size before giving up.
        #[arg(long, alias = "max-steps", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Print the abstract fixpoint of a wait-only protocol.
    Abstract {
        file: PathBuf,
        /// Print every iterate, not only the fixpoint.
        #[arg(long)]
        trace: bool,
    },
    /// Exhaustive exploration of a protocol, machine or NB-VAS.
    Explore {
        #[command(subcommand)]
        what: ExploreCmd,
    },
    /// Compile between protocols, machines and NB-VAS.
    Translate {
        kind: TranslateKind,
        input: PathBuf,
        output: PathBuf,
        /// Target configuration (p2cm).
        #[arg(long, conflicts_with = "target_loc")]
        target: Option<String>,
        /// Target location (cm2p, cm2vas) or final location (minsky2p).
        #[arg(long)]
        target_loc: Option<String>,
    },
    /// Generate the counter gadgets of the lower-bound construction.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
}

#[derive(Subcommand, Debug)]
enum ExploreCmd {
    /// Count (and optionally list) the configurations reachable with N processes.
    Protocol {
        file: PathBuf,
        #[arg(long)]
        procs: u32,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Bounded cover search for a location.
    Machine {
        file: PathBuf,
        #[arg(long)]
        loc: String,
        #[arg(long)]
        cap: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Bounded cover search for the target vector.
    Vas {
        file: PathBuf,
        #[arg(long)]
        cap: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GenCmd {
    /// Wrap a test-free machine in the restore shell that first builds the gadget counters.
    Lipton {
        #[arg(long)]
        levels: usize,
        input: PathBuf,
        output: PathBuf,
        /// Location of the input machine to report in the output.
        #[arg(long)]
        target_loc: Option<String>,
    },
    /// The reset procedure of one level, on a context without machine counters.
    Rst {
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        level: usize,
        output: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProblemKind {
    Scover,
    Ccover,
    Synchro,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Explore,
    Abstract,
    Auto,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TranslateKind {
    P2cm,
    Cm2p,
    Cm2vas,
    Minsky2p,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(ParseError),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

impl From<ExploreError> for CliError {
    fn from(e: ExploreError) -> Self {
        match e {
            ExploreError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<MachineError> for CliError {
    fn from(e: MachineError) -> Self {
        match e {
            MachineError::ResourceLimit(_) => CliError::Resource(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<WaitOnlyError> for CliError {
    fn from(e: WaitOnlyError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<LowerBoundError> for CliError {
    fn from(e: LowerBoundError) -> Self {
        match e {
            LowerBoundError::Machine(m) => m.into(),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load<T>(path: &Path, parse: fn(&str) -> Result<T, ParseError>) -> Result<T, CliError> {
    let text = read(path)?;
    parse(&text).map_err(|e| CliError::Parse(e.in_file(path.display().to_string())))
}

fn config(literal: &str, p: &Protocol) -> Result<Configuration, CliError> {
    text::parse_config(literal, p).map_err(CliError::Parse)
}

fn location(m: &CounterMachine, name: &str) -> Result<usize, CliError> {
    m.location_id(name).map_err(|e| CliError::Precondition(e.to_string()))
}

fn report_verdict(out: &mut String, p: &Protocol, v: &Verdict) {
    match v {
        Verdict::Yes(w) => {
            out.push_str("RESULT YES\n");
            if let Some(w) = w {
                for (label, c) in &w.steps {
                    let _ = writeln!(out, "STEP {} {}", p.show_label(*label), p.show_config(c));
                }
            }
        }
        Verdict::No => out.push_str("RESULT NO\n"),
        Verdict::Unknown(n) => {
            let _ = writeln!(out, "RESULT UNKNOWN\nno positive instance up to {n} processes");
        }
    }
}

fn run(cmd: Command, out: &mut String) -> Result<(), CliError> {
    match cmd {
        Command::Check { problem, file, target, method, max_procs, budget } => {
            let p = load(&file, text::parse_protocol)?;
            let problem = match (problem, target) {
                (ProblemKind::Ccover, Some(t)) => Problem::CCover(config(&t, &p)?),
                (ProblemKind::Ccover, None) => return Err(CliError::Precondition("ccover needs --target".into())),
                (_, Some(_)) => return Err(CliError::Precondition("--target only applies to ccover".into())),
                (ProblemKind::Scover, None) => Problem::SCover,
                (ProblemKind::Synchro, None) => Problem::Synchro,
            };
            let use_abstract = match (method, &problem) {
                (Method::Abstract, Problem::Synchro) => {
                    return Err(CliError::Precondition("the abstract algorithm does not decide synchro".into()))
                }
                (Method::Abstract, _) => {
                    waitonly::partition(&p)?;
                    true
                }
                (Method::Explore, _) | (Method::Auto, Problem::Synchro) => false,
                (Method::Auto, _) => waitonly::partition(&p).is_ok(),
            };
            let verdict = if use_abstract {
                match &problem {
                    Problem::CCover(t) => waitonly::decide_ccover(&p, t)?,
                    _ => waitonly::decide_scover(&p)?,
                }
            } else {
                if max_procs == 0 {
                    return Err(CliError::Precondition("--max-procs must be at least 1".into()));
                }
                explore::decide_sweep(&p, &problem, max_procs, budget)?
            };
            report_verdict(out, &p, &verdict);
            let _ = writeln!(out, "method {}", if use_abstract { "abstract" } else { "explore" });
        }
        Command::Abstract { file, trace } => {
            let p = load(&file, text::parse_protocol)?;
            let (_, chain) = waitonly::fixpoint(&p)?;
            let shown = if trace { &chain[..] } else { &chain[chain.len() - 1..] };
            for (i, g) in shown.iter().enumerate() {
                let (s, toks) = g.show(&p);
                let idx = if trace { i } else { chain.len() - 1 };
                let _ = writeln!(out, "iterate {idx}: {s}; {toks}");
            }
        }
        Command::Explore { what } => explore_cmd(what, out)?,
        Command::Translate { kind, input, output, target, target_loc } => {
            let (written, report) = match kind {
                TranslateKind::P2cm => {
                    if target_loc.is_some() {
                        return Err(CliError::Precondition("p2cm takes --target, not --target-loc".into()));
                    }
                    let p = load(&input, text::parse_protocol)?;
                    let t = match target {
                        Some(t) => config(&t, &p)?,
                        None => Configuration::singleton(p.final_state(), 1),
                    };
                    let image = reductions::protocol_to_nbcm(&p, &t)?;
                    let _ = writeln!(out, "target location {}", image.machine.location_name(image.target));
                    (text::write_machine(&image.machine), image.report)
                }
                TranslateKind::Cm2p | TranslateKind::Cm2vas | TranslateKind::Minsky2p => {
                    if target.is_some() {
                        return Err(CliError::Precondition("machine inputs take --target-loc, not --target".into()));
                    }
                    let m = load(&input, text::parse_machine)?;
                    let Some(name) = target_loc else {
                        return Err(CliError::Precondition("--target-loc is required for machine inputs".into()));
                    };
                    let loc = location(&m, &name)?;
                    match kind {
                        TranslateKind::Cm2p => {
                            let (p, r) = reductions::nbrcm_to_protocol(&m, loc)?;
                            (text::write_protocol(&p), r)
                        }
                        TranslateKind::Cm2vas => {
                            let (v, r) = reductions::nbcm_to_nbvas(&m, loc)?;
                            (text::write_vas(&v), r)
                        }
                        _ => {
                            let (p, r) = reductions::minsky_to_protocol(&MinskyMachine::new(m, loc)?)?;
                            (text::write_protocol(&p), r)
                        }
                    }
                }
            };
            write(&output, &written)?;
            let _ = write!(out, "{report}");
        }
        Command::Gen { what } => match what {
            GenCmd::Lipton { levels, input, output, target_loc } => {
                let m = load(&input, text::parse_machine)?;
                let target = target_loc.map(|l| location(&m, &l).map(|id| (l, id))).transpose()?;
                let (shell, ctx) = lowerbound::gen_shell(&m, levels)?;
                write(&output, &text::write_machine(&shell))?;
                let _ = writeln!(
                    out,
                    "levels {}, {} counters, {} locations, {} transitions",
                    ctx.levels(),
                    shell.counters().len(),
                    shell.locations().len(),
                    shell.transitions().len()
                );
                if let Some((name, _)) = target {
                    let _ = writeln!(out, "target location {name}");
                }
            }
            GenCmd::Rst { levels, level, output } => {
                let ctx = LiptonContext::new(levels, &[] as &[&str])?;
                let pm = lowerbound::gen_rst(&ctx, level)?;
                write(&output, &text::write_machine(&pm.machine))?;
                for (name, l) in &pm.outputs {
                    let _ = writeln!(out, "output {name} {}", pm.machine.location_name(*l));
                }
            }
        },
    }
    Ok(())
}

fn explore_cmd(what: ExploreCmd, out: &mut String) -> Result<(), CliError> {
    match what {
        ExploreCmd::Protocol { file, procs, list, budget } => {
            let p = load(&file, text::parse_protocol)?;
            let reach = explore::reachable(&p, procs, budget)?;
            let _ = writeln!(out, "reachable {} configurations with {procs} processes", reach.len());
            if list {
                let mut shown: Vec<String> = reach.iter().map(|c| p.show_config(c)).collect();
                shown.sort();
                for c in shown {
                    let _ = writeln!(out, "CONFIG {c}");
                }
            }
        }
        ExploreCmd::Machine { file, loc, cap, budget } => {
            let m = load(&file, text::parse_machine)?;
            let target = location(&m, &loc)?;
            match machines::cover_bounded(&m, target, cap, budget)? {
                BoundedVerdict::Yes(run) => {
                    out.push_str("RESULT YES\n");
                    for (step, c) in &run.steps {
                        let _ = writeln!(out, "STEP {} {}", m.show_step(*step), m.show_config(c));
                    }
                }
                BoundedVerdict::NoWithinCap { cap, pruned } => bounded_no(out, cap, pruned),
            }
        }
        ExploreCmd::Vas { file, cap, budget } => {
            let v = load(&file, text::parse_vas)?;
            match machines::vas_cover_bounded(&v, cap, budget)? {
                BoundedVerdict::Yes(run) => {
                    out.push_str("RESULT YES\n");
                    for (t, c) in &run.steps {
                        let vals: Vec<String> = c.iter().map(u64::to_string).collect();
                        let _ = writeln!(out, "STEP t{t} {}", vals.join(","));
                    }
                }
                BoundedVerdict::NoWithinCap { cap, pruned } => bounded_no(out, cap, pruned),
            }
        }
    }
    Ok(())
}

/// A cap-bounded search that never pruned anything explored the whole space.
fn bounded_no(out: &mut String, cap: u64, pruned: usize) {
    if pruned == 0 {
        out.push_str("RESULT NO\n");
    } else {
        let _ = writeln!(out, "RESULT UNKNOWN\nnot found with values at most {cap}; {pruned} configurations pruned");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    print!("{out}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
