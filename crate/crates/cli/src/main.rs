mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Status;
use crate::config::{ExperimentConfig, Params};

/// Exact iteration of `X ↦ aX − bX` on eventually periodic integer sets.
#[derive(Parser, Debug)]
#[command(name = "epiter", version)]
struct Cli {
    /// TOML experiment file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Largest window (in positions) any intermediate set may use.
    #[arg(long, global = true)]
    window_cap: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace the orbit of a set under an operation sequence.
    Iterate(IterateArgs),
    /// Orbit, period and cardinality data for a residue set.
    Residue(ResidueArgs),
    /// Decompose an equality case |aU + bU| = |U| in Z/gZ.
    Decompose(ResidueArgs),
    /// D⁺(A), its stability time and the density bounds.
    Dplus(DplusArgs),
    /// Check the eventual-periodicity theorem on one orbit.
    #[command(name = "verify-thm61")]
    VerifyThm61(VerifyArgs),
    /// Build and check one of the standard constructions.
    Construct(ConstructArgs),
    /// Run verify-thm61 over every (set, ops) pair.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct IterateArgs {
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    ops: Option<String>,
    #[arg(long)]
    max_k: Option<usize>,
}

#[derive(Args, Debug)]
struct ResidueArgs {
    /// `mod g {…}`, or `{…}` together with `--g`.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    g: Option<u64>,
    #[arg(long)]
    a: Option<u64>,
    #[arg(long)]
    b: Option<u64>,
    #[arg(long)]
    max_k: Option<usize>,
}

#[derive(Args, Debug)]
struct DplusArgs {
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    max_k: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    ops: Option<String>,
    #[arg(long = "L")]
    l: Option<u64>,
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    max_k: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// `{abm + 1}` under (a, b) against its predicted orbit.
    Ap,
    /// Export a `bohr(...)` or `sparse(...)` truncation.
    Truncate,
    /// Max gaps of `aA_i − bA_i` on the power-tower interval union.
    SparseGaps,
    /// Parity sequence on `1 + 3Z` from a bit string.
    Parity,
    /// `Γ_{da, db}` on N.
    Divergence,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: Option<Construction>,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    a: Option<u64>,
    #[arg(long)]
    b: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    /// Number of intervals for `sparse-gaps`.
    #[arg(long = "N")]
    n: Option<u32>,
    /// Interval width factor, `p/q`.
    #[arg(long)]
    delta: Option<String>,
    /// Bit string such as `0110` for `parity`.
    #[arg(long)]
    bits: Option<String>,
    #[arg(long)]
    max_k: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Repeatable.
    #[arg(long)]
    set: Vec<String>,
    /// Repeatable.
    #[arg(long)]
    ops: Vec<String>,
    /// Add this many seeded pseudo-random cyclic sequences.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to the largest entry of each sequence (at least 2).
    #[arg(long = "L")]
    l: Option<u64>,
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    max_k: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Iterate(_) => "iterate",
            Command::Residue(_) => "residue",
            Command::Decompose(_) => "decompose",
            Command::Dplus(_) => "dplus",
            Command::VerifyThm61(_) => "verify-thm61",
            Command::Construct(_) => "construct",
            Command::Sweep(_) => "sweep",
        }
    }

    fn overlay(&self, p: &mut Params) {
        match self {
            Command::Iterate(x) => {
                p.set_one("set", &x.set);
                p.set_one("ops", &x.ops);
                p.set("max_k", &x.max_k);
            }
            Command::Residue(x) | Command::Decompose(x) => {
                p.set_one("set", &x.set);
                p.set("g", &x.g);
                p.set("a", &x.a);
                p.set("b", &x.b);
                p.set("max_k", &x.max_k);
            }
            Command::Dplus(x) => {
                p.set_one("set", &x.set);
                p.set("max_k", &x.max_k);
            }
            Command::VerifyThm61(x) => {
                p.set_one("set", &x.set);
                p.set_one("ops", &x.ops);
                p.set("L", &x.l);
                p.set("c", &x.c);
                p.set("max_k", &x.max_k);
            }
            Command::Construct(x) => {
                let kind = x.kind.and_then(|k| k.to_possible_value()).map(|v| v.get_name().to_string());
                p.set("kind", &kind);
                p.set_one("set", &x.set);
                p.set("a", &x.a);
                p.set("b", &x.b);
                p.set("d", &x.d);
                p.set("N", &x.n);
                p.set("delta", &x.delta);
                p.set("bits", &x.bits);
                p.set("max_k", &x.max_k);
            }
            Command::Sweep(x) => {
                if !x.set.is_empty() {
                    p.sets = x.set.clone();
                }
                if !x.ops.is_empty() {
                    p.ops = x.ops.clone();
                }
                p.set("random", &x.random);
                p.set("seed", &x.seed);
                p.set("L", &x.l);
                p.set("c", &x.c);
                p.set("max_k", &x.max_k);
                p.set("threads", &x.threads);
            }
        }
    }
}

fn run(cli: Cli) -> Result<Status, String> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let name = match (&cli.command, &config.command) {
        (Some(cmd), Some(c)) if cmd.name() != c => {
            return Err(format!("config names command `{c}` but `{}` was given", cmd.name()))
        }
        (Some(cmd), _) => cmd.name().to_string(),
        (None, Some(c)) => c.clone(),
        (None, None) => return Err("no command given (pass a subcommand or a config with `command`)".into()),
    };
    let mut params = config.params()?;
    if let Some(cmd) = &cli.command {
        cmd.overlay(&mut params);
    }
    params.set("window_cap", &cli.window_cap);
    if let Some(cap) = params.get::<usize>("window_cap")? {
        if cap == 0 {
            return Err("window cap must be positive".into());
        }
        epiter::limits::set_default_window_cap(cap);
    }
    let format = cli
        .format
        .or(config.output.as_ref().and_then(|o| o.format))
        .unwrap_or(Format::Json);
    let output = cli.output.or(config.output.and_then(|o| o.path));

    let outcome = commands::dispatch(&name, &params)?;
    let text = render::render(&outcome, format).map_err(|e| format!("rendering failed: {e}"))?;
    match output {
        Some(path) => std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { Status::Usage as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(Status::Usage as u8)
        }
    }
}
