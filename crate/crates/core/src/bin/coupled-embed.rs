use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coupled_embed::pipeline::{self, Outcome, PipelineConfig, SegmentTarget};
use coupled_embed::Error;

#[derive(Parser)]
#[command(version, about = "Coupled spectral embeddings for shape correspondence")]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cache Laplacian, eigenbasis and HKS for shapes (all shapes if none given).
    Precompute { shapes: Vec<String> },
    /// Optimize coupled embeddings for every configured pair.
    Couple,
    /// Evaluate matching methods on every configured pair.
    MatchEval {
        #[arg(long, value_delimiter = ',', default_values_t = pipeline::METHODS.map(String::from))]
        methods: Vec<String>,
    },
    /// k-means segmentation of a shape, or of a pair with label transfer.
    Segment {
        #[arg(long, conflicts_with = "pair", required_unless_present = "pair")]
        shape: Option<String>,
        /// `source:target`
        #[arg(long)]
        pair: Option<String>,
    },
    /// Print the loss trace CSV of a coupled pair.
    PlotTrace {
        /// `source:target`
        pair: String,
    },
}

fn split_pair(s: &str) -> Result<(String, String), Error> {
    s.split_once(':')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| Error::InvalidConfig(format!("pair '{s}' must be source:target")))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn report(out: &Outcome) -> i32 {
    for (item, why) in &out.skipped {
        eprintln!("skipped {item}: {why}");
    }
    for (item, why) in &out.failed {
        eprintln!("failed {item}: {why}");
    }
    eprintln!(
        "{} ok, {} skipped, {} failed",
        out.succeeded.len(),
        out.skipped.len(),
        out.failed.len()
    );
    out.exit_code()
}

fn run(cli: Cli) -> Result<i32, Error> {
    let overrides = cli
        .overrides
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::InvalidConfig(format!("override '{kv}' must be key=value")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Precompute { shapes } => Ok(report(&pipeline::precompute(&cfg, &shapes)?)),
        Command::Couple => Ok(report(&pipeline::couple(&cfg)?)),
        Command::MatchEval { methods } => {
            let (out, rows) = pipeline::match_eval(&cfg, &methods)?;
            emit(&pipeline::format_eval_csv(&rows));
            Ok(report(&out))
        }
        Command::Segment { shape, pair } => {
            let target = match (shape, pair) {
                (Some(s), _) => SegmentTarget::Shape(s),
                (None, Some(p)) => {
                    let (a, b) = split_pair(&p)?;
                    SegmentTarget::Pair(a, b)
                }
                (None, None) => unreachable!("clap requires one of --shape or --pair"),
            };
            for p in pipeline::segment(&cfg, &target)? {
                emit(&format!("{}\n", p.display()));
            }
            Ok(0)
        }
        Command::PlotTrace { pair } => {
            let (a, b) = split_pair(&pair)?;
            emit(&pipeline::plot_trace(&cfg, &a, &b)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    ExitCode::from(code as u8)
}
