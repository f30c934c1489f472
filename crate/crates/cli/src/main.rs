//! `locklab`: command-line experiments on the information-locking key.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 a numerical
//! check failed (the output is still written).

mod commands;
mod table;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use locklab::accinfo::OptimizerConfig;

use commands::{Outcome, StrategyName};

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "locklab", version, about = "Information-locking key experiments")]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true, env = "LOCKLAB_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MRange {
    start: usize,
    end: usize,
}

impl FromStr for MRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
        let start: usize = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
        let end: usize = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
        if start == 0 {
            return Err("m starts at 1".into());
        }
        if end < start {
            return Err(format!("empty range {start}:{end}"));
        }
        Ok(MRange { start, end })
    }
}

#[derive(Debug, Args)]
struct MSelection {
    /// Single qubit count.
    #[arg(long, conflicts_with = "m_range", value_parser = clap::value_parser!(u64).range(1..))]
    m: Option<u64>,

    /// Inclusive qubit-count range A:B.
    #[arg(long, value_name = "A:B")]
    m_range: Option<MRange>,
}

impl MSelection {
    fn values(&self, default: MRange) -> Vec<usize> {
        match (self.m, self.m_range) {
            (Some(m), _) => vec![m as usize],
            (None, Some(r)) => (r.start..=r.end).collect(),
            (None, None) => (default.start..=default.end).collect(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locking bound, key-length epsilon and gap per m (default 1:20).
    Bounds {
        #[command(flatten)]
        ms: MSelection,
    },
    /// Header attack (or a blind baseline) on the one-time pad (default m=1).
    Attack {
        #[command(flatten)]
        ms: MSelection,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        /// The adversary does not see the ciphertext header.
        #[arg(long)]
        blind: bool,
        /// Measurement used in blind mode.
        #[arg(long, value_enum, default_value_t = StrategyName::FixedBasis)]
        strategy: StrategyName,
    },
    /// Random-restart search for the accessible information (default m=1).
    Iacc {
        #[command(flatten)]
        ms: MSelection,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
    },
    /// Accessible-information versus trace-distance security (default m=1).
    Security {
        #[command(flatten)]
        ms: MSelection,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        /// Skip the search; allows m up to 3.
        #[arg(long)]
        bound_only: bool,
    },
    /// Keys from measuring perturbed Bell pairs.
    Bell {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        perturbation: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Slack of each step of the locking-bound argument on random pure states (default m=1:3).
    Proofchain {
        #[command(flatten)]
        ms: MSelection,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn optimizer(restarts: usize, seed: u64) -> OptimizerConfig {
    OptimizerConfig { restarts, seed, ..OptimizerConfig::default() }
}

fn run(cli: &Cli) -> locklab::Result<(Outcome, Format)> {
    let single = |m| MRange { start: m, end: m };
    let seed = cli.seed;
    let (outcome, default_format) = match &cli.command {
        Command::Bounds { ms } => (commands::bounds(ms.values(MRange { start: 1, end: 20 }))?, Format::Csv),
        Command::Attack { ms, trials, blind, strategy } => {
            let blind = blind.then_some(*strategy);
            (commands::attack(ms.values(single(1)), *trials, seed, blind)?, Format::Csv)
        }
        Command::Iacc { ms, restarts } => {
            (commands::iacc(ms.values(single(1)), &optimizer(*restarts, seed))?, Format::Csv)
        }
        Command::Security { ms, restarts, bound_only } => {
            (commands::security(ms.values(single(1)), &optimizer(*restarts, seed), *bound_only)?, Format::Json)
        }
        Command::Bell { n, perturbation, trials } => (commands::bell(*n, *perturbation, *trials, seed)?, Format::Csv),
        Command::Proofchain { ms, samples } => {
            (commands::proofchain(ms.values(MRange { start: 1, end: 3 }), *samples, seed)?, Format::Csv)
        }
    };
    Ok((outcome, cli.format.unwrap_or(default_format)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, format) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if !outcome.checks_passed {
        eprintln!("error: a numerical check failed; see the rows above");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!("2:5".parse::<MRange>().unwrap(), MRange { start: 2, end: 5 });
        assert!("5:2".parse::<MRange>().is_err());
        assert!("0:2".parse::<MRange>().is_err());
        assert!("3".parse::<MRange>().is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
