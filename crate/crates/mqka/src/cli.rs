//! Command-line driver: `mqka run|attack|feasibility|report`.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::adversary::{
    feasible, run_collusive_circle, run_collusive_circle_forced, run_halfcircle_attack,
    run_tree_attack, AttackPlan, AttackVariant,
};
use crate::error::{Error, Result};
use crate::key::Key;
use crate::outcome::{RunOutcome, Verdict};
use crate::protocols::{run_cgt, run_circle, run_half_circle, run_tree};
use crate::report::{build_fairness_matrix, emit_report, ExperimentConfig, ReportFormat};
use crate::topology::{circular_gaps, TopologyKind};

#[derive(Debug, Parser)]
#[command(name = "mqka", about = "Multi-party quantum key agreement simulator", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a protocol honestly.
    Run(CommonArgs),
    /// Execute a protocol under the collusive attack for its topology.
    Attack(AttackArgs),
    /// Check whether a colluder placement can control the circle protocol.
    Feasibility(CommonArgs),
    /// Build the fairness matrix over all archetypes.
    Report(CommonArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub topology: Option<TopologyKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub key_len: Option<usize>,
    #[arg(long)]
    pub decoys: Option<usize>,
    /// Comma-separated colluder positions, e.g. 1,4.
    #[arg(long, value_delimiter = ',')]
    pub colluders: Option<Vec<usize>>,
    /// Target key (hex, or 0b-prefixed binary).
    #[arg(long)]
    pub expect: Option<Key>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// json, csv or markdown-table (report subcommand).
    #[arg(long)]
    pub format: Option<String>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run an infeasible circle placement anyway, blind-flipping one
    /// out-of-reach sequence (expect a detection abort).
    #[arg(long)]
    pub forced: bool,
}

impl CommonArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::config(format!("bad config file: {e}")))?
            }
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            topology: self.topology,
            n: self.n,
            key_len: self.key_len,
            decoys: self.decoys,
            trials: self.trials,
            seed: self.seed,
            colluders: self.colluders.clone(),
            expect: self.expect.clone(),
            format: self.format.clone(),
            out: self
                .out
                .as_ref()
                .map(|p| p.display().to_string()),
        };
        Ok(base.merged_with(flags))
    }
}

#[derive(Serialize)]
struct RunsDocument {
    topology: TopologyKind,
    n: usize,
    key_len: usize,
    decoys: usize,
    seed: u64,
    outcomes: Vec<RunOutcome>,
}

#[derive(Serialize)]
struct FeasibilityDocument {
    n: usize,
    colluders: Vec<usize>,
    gaps: Vec<usize>,
    max_gap: usize,
    threshold: usize,
    feasible: bool,
}

/// Parse argv and run. Returns the process exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let out = cmd_run(&cfg)?;
            deliver(&cfg, out)
        }
        Command::Attack(args) => {
            let cfg = args.common.config()?;
            let out = cmd_attack(&cfg, args.forced)?;
            deliver(&cfg, out)
        }
        Command::Feasibility(args) => {
            let cfg = args.config()?;
            let out = cmd_feasibility(&cfg)?;
            deliver(&cfg, out)
        }
        Command::Report(args) => {
            let cfg = args.config()?;
            let out = cmd_report(&cfg)?;
            deliver(&cfg, out)
        }
    }
}

fn deliver(cfg: &ExperimentConfig, output: String) -> Result<String> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, &output)?;
            Ok(format!("wrote {path}\n"))
        }
        None => Ok(output),
    }
}

fn pretty(doc: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn random_keys(n: usize, len: usize, rng: &mut ChaCha12Rng) -> Vec<Key> {
    (0..n).map(|_| Key::random(len, rng)).collect()
}

fn cmd_run(cfg: &ExperimentConfig) -> Result<String> {
    let topology = cfg.topology()?;
    let (n, len, d) = (cfg.n(), cfg.key_len(), cfg.decoys());
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed());
    let mut outcomes = Vec::new();
    for _ in 0..cfg.trials() {
        let outcome = match topology {
            TopologyKind::CompleteGraph => run_cgt(n, &random_keys(n, len, &mut rng), d, &mut rng)?,
            TopologyKind::Circle => run_circle(n, &random_keys(n, len, &mut rng), d, &mut rng)?,
            TopologyKind::HalfCircle => {
                run_half_circle(n, &random_keys(n, len, &mut rng), d, &mut rng)?
            }
            TopologyKind::Tree => {
                // One detection pick per party, on top of the key shots.
                run_tree(n, len + n, len, &vec![1; n], None, &mut rng)?
            }
        };
        outcomes.push(outcome);
    }
    pretty(&RunsDocument {
        topology,
        n,
        key_len: len,
        decoys: d,
        seed: cfg.seed(),
        outcomes,
    })
}

fn cmd_attack(cfg: &ExperimentConfig, forced: bool) -> Result<String> {
    let topology = cfg.topology()?;
    let (n, len, d) = (cfg.n(), cfg.key_len(), cfg.decoys());
    let colluders: BTreeSet<usize> = cfg
        .colluders
        .clone()
        .ok_or_else(|| Error::config("attack needs --colluders"))?
        .into_iter()
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed());
    let expected = match &cfg.expect {
        Some(k) => k.clone(),
        None => Key::random(len, &mut rng),
    };
    if expected.len() != len {
        return Err(Error::config(format!(
            "--expect is {} bits but --key-len is {len}",
            expected.len()
        )));
    }

    let mut outcomes = Vec::new();
    for _ in 0..cfg.trials() {
        let keys = random_keys(n, len, &mut rng);
        let outcome = match topology {
            TopologyKind::Circle => {
                let variant = if colluders.len() == 2 {
                    AttackVariant::TwoColluderCircle
                } else {
                    AttackVariant::MultiColluderCircle
                };
                let plan = AttackPlan::new(variant, colluders.clone(), expected.clone());
                if forced {
                    run_collusive_circle_forced(n, &keys, &plan, d, &mut rng)?
                } else {
                    run_collusive_circle(n, &keys, &plan, d, &mut rng)?
                }
            }
            TopologyKind::HalfCircle => {
                let plan = AttackPlan::new(
                    AttackVariant::HalfCircleThreeColluder,
                    colluders.clone(),
                    expected.clone(),
                );
                run_halfcircle_attack(n, &keys, &plan, d, &mut rng)?
            }
            TopologyKind::Tree => {
                let honest = (0..n)
                    .find(|i| !colluders.contains(i))
                    .ok_or_else(|| Error::config("tree attack needs an honest picker"))?;
                run_tree_attack(n, len + n, len, honest, &expected, &mut rng)?
            }
            TopologyKind::CompleteGraph => {
                return Err(Error::config(
                    "no collusive attack exists for the complete-graph topology",
                ))
            }
        };
        outcomes.push(outcome);
    }
    // A lone aborted trial surfaces as the detection-abort exit code; a
    // multi-trial sweep reports the mixed outcomes instead.
    if outcomes.len() == 1 && outcomes[0].verdict == Verdict::Aborted {
        if let Some(ev) = outcomes[0].detections.first() {
            return Err(Error::DetectionAbort {
                period: ev.period,
                from: ev.from,
                to: ev.to,
                failed: ev.failed,
            });
        }
    }
    pretty(&RunsDocument {
        topology,
        n,
        key_len: len,
        decoys: d,
        seed: cfg.seed(),
        outcomes,
    })
}

fn cmd_feasibility(cfg: &ExperimentConfig) -> Result<String> {
    let n = cfg.n();
    let colluders: BTreeSet<usize> = cfg
        .colluders
        .clone()
        .ok_or_else(|| Error::config("feasibility needs --colluders"))?
        .into_iter()
        .collect();
    let gaps = circular_gaps(n, &colluders)?;
    let max_gap = gaps.iter().copied().max().unwrap_or(n);
    pretty(&FeasibilityDocument {
        n,
        colluders: colluders.iter().copied().collect(),
        gaps,
        max_gap,
        threshold: (n + 1) / 2,
        feasible: feasible(n, &colluders)?,
    })
}

fn cmd_report(cfg: &ExperimentConfig) -> Result<String> {
    let format: ReportFormat = cfg
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()?;
    let report = build_fairness_matrix(cfg.trials(), cfg.seed())?;
    emit_report(&report, format)
}
