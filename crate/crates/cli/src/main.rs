//! `popsim` — run, certify and audit plurality population protocols.

mod certify;
mod experiment;

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use popsim_core::analysis::{state_space_size, BudgetKind};
use popsim_core::engine::{audit_fairness, read_trace, InstanceSpec, SchedulerSpec, TraceLine};

use experiment::{execute_experiment, Check, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "popsim",
    version,
    about = "Simulator and finite-instance verifier for plurality population protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtocolName {
    /// Linked-list label assignment.
    Ordering,
    /// Coupled plurality on complete graphs.
    Clique,
    /// State-swapping plurality on arbitrary connected graphs.
    General,
    /// Four-state k = 2 majority baseline.
    Baseline4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CertifyProtocol {
    Ordering,
    Clique,
    General,
    Baseline4,
    /// One-state-per-color voter dynamics (negative control).
    Voter,
}

#[derive(Subcommand)]
enum Command {
    /// Run seed sweeps on an instance file, write traces and summaries.
    Run(RunArgs),
    /// Exhaustive certification over the reachable configuration space.
    #[command(subcommand)]
    Certify(CertifyCommand),
    /// Count encodable per-agent states against the polynomial budgets.
    AuditStates(AuditArgs),
    /// Audit directed-edge coverage of a recorded trace.
    Fairness(FairnessArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Instance file (JSON: n, k, colors, graph, scheduler, stop).
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    protocol: ProtocolName,
    /// Seed range `a..b` or a single seed; defaults to the instance seed.
    #[arg(long)]
    seeds: Option<String>,
    /// Override the stop condition's step cap.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Override the stop condition's window (steps or hold factor).
    #[arg(long)]
    window: Option<u64>,
    /// Snapshot cadence in steps; 0 disables snapshots.
    #[arg(long)]
    snapshots: Option<u64>,
    /// Directory for trace files and summary.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated checks: ordering_report, duel_invariants,
    /// fairness_audit, oracle_compare.
    #[arg(long)]
    checks: Option<String>,
}

#[derive(Subcommand)]
enum CertifyCommand {
    /// Does every reachable configuration still reach a locked, correct one?
    Stabilization {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        protocol: CertifyProtocol,
        /// Exploration cap in configurations.
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Search for a configuration reachable from both instances.
    Indistinguishability {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        instance_b: PathBuf,
        #[arg(long, value_enum)]
        protocol: CertifyProtocol,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
}

#[derive(Args)]
struct AuditArgs {
    /// ordering (8k^4 budget) or clique (8k^11 budget).
    #[arg(long)]
    protocol: String,
    /// Range of color counts, `a..b`, `a..=b` or a single value.
    #[arg(long, default_value = "1..=16")]
    k: String,
}

#[derive(Args)]
struct FairnessArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    trace: PathBuf,
}

fn parse_range(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..=") {
        let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
        return Ok((a..=b).collect());
    }
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
        return Ok((a..b).collect());
    }
    Ok(vec![text.parse()?])
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let file = InstanceSpec::from_path(&args.instance)
        .with_context(|| format!("loading {}", args.instance.display()))?;
    let seeds = match &args.seeds {
        Some(text) => parse_range(text).context("parsing --seeds")?,
        None => match file.scheduler {
            SchedulerSpec::UniformRandom { seed } => vec![seed],
            _ => vec![0],
        },
    };
    let checks: BTreeSet<Check> = match &args.checks {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?,
        None => BTreeSet::new(),
    };
    let spec = ExperimentSpec {
        instance_path: args.instance,
        protocol: args.protocol,
        checks,
        out_dir: args.out,
        seeds,
        max_steps: args.max_steps,
        window: args.window,
        snapshots: args.snapshots,
    };
    let outcome = execute_experiment(&spec)?;
    for line in &outcome.summaries {
        println!("{}", serde_json::to_string(line)?);
    }
    Ok(if outcome.all_passed { 0 } else { 1 })
}

fn cmd_audit(args: AuditArgs) -> Result<i32> {
    let kind = match args.protocol.as_str() {
        "ordering" => BudgetKind::Ordering,
        "clique" | "coupled" => BudgetKind::Coupled,
        other => bail!("unknown protocol '{other}' (expected ordering or clique)"),
    };
    let mut all_within = true;
    for k in parse_range(&args.k).context("parsing --k")? {
        if k == 0 || k > u16::MAX as u64 {
            bail!("k = {k} out of range");
        }
        let budget = state_space_size(kind, k as u16);
        all_within &= budget.within;
        println!(
            "{}",
            serde_json::json!({
                "k": budget.k,
                "m": budget.m,
                "count": budget.count.to_string(),
                "bound": budget.bound.to_string(),
                "within": budget.within,
            })
        );
    }
    Ok(if all_within { 0 } else { 1 })
}

fn cmd_fairness(args: FairnessArgs) -> Result<i32> {
    let file = InstanceSpec::from_path(&args.instance)
        .with_context(|| format!("loading {}", args.instance.display()))?;
    let instance = file
        .build_instance()
        .map_err(|e| anyhow::anyhow!("instance: {e}"))?;
    let reader = std::fs::File::open(&args.trace)
        .with_context(|| format!("opening {}", args.trace.display()))?;
    let lines = read_trace(reader).map_err(|e| anyhow::anyhow!("trace: {e}"))?;
    let mut records = Vec::new();
    let mut last_step = 0;
    for line in lines {
        match line {
            TraceLine::Record {
                step,
                edge,
                changed,
            } => {
                last_step = last_step.max(step);
                records.push(popsim_core::engine::InteractionRecord {
                    step,
                    edge,
                    changed,
                });
            }
            TraceLine::Snapshot { step, .. } => last_step = last_step.max(step),
        }
    }
    let report =
        audit_fairness(&records, &instance.graph, last_step).map_err(|e| anyhow::anyhow!("{e}"))?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(if report.all_edges_present() { 0 } else { 1 })
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Certify(CertifyCommand::Stabilization {
            instance,
            protocol,
            cap,
        }) => certify::stabilization(&instance, protocol, cap),
        Command::Certify(CertifyCommand::Indistinguishability {
            instance,
            instance_b,
            protocol,
            cap,
        }) => certify::indistinguishability(&instance, &instance_b, protocol, cap),
        Command::AuditStates(args) => cmd_audit(args),
        Command::Fairness(args) => cmd_fairness(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
