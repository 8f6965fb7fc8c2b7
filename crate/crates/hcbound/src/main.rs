use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hcbound::commands::{self, Outcome};
use hcbound::config::{ConfigError, FileConfig, Overrides, RunConfig, CACHE_ENV};

#[derive(Parser, Debug)]
#[command(name = "hcbound", version, about = "Lower bounds for the entropy of the hard-core model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// square, honeycomb, triangular, kagome, square-moore or all.
    #[arg(long, global = true)]
    lattice: Option<String>,
    /// closed, equalized, three-hex or block.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Block side (1..=4).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optimizer multistarts.
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// Optimizer gradient tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file for the JSON or CSV artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Block-family cache directory (default: $HC_CACHE_DIR, then .hcbound-cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Allow the 4x4 block optimization.
    #[arg(long, global = true)]
    long: bool,
    /// Reference entropy for the density interval.
    #[arg(long, global = true)]
    href: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize bounds and print a table; JSON goes to --out.
    Bound {
        /// Re-optimize blocks with classes below this warm-start probability fixed at 0.
        #[arg(long)]
        prune: Option<f64>,
    },
    /// Build or load block families and print reduction counts.
    Reduce,
    /// Run every reproduction and oracle check.
    Verify,
    /// Window occupancy profiles as CSV.
    Profile {
        /// 1 (equalized single site), 2..=n (block optima) or bernoulli:<p>.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        generators: Vec<String>,
    },
    /// Fill-in sampler statistics as JSON.
    Sample {
        /// Scheme parameters (default: the optimum).
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<f64>>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
    },
    /// Strip entropies as CSV.
    Strip {
        #[arg(long, default_value_t = 12)]
        max_width: usize,
        /// free, periodic or both.
        #[arg(long, default_value = "free")]
        boundary: String,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let c = cli.common;
    let file = match &c.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        lattice: c.lattice,
        scheme: c.scheme,
        n: c.n,
        long: c.long,
        tol: c.tol,
        starts: c.starts,
        seed: c.seed,
        out: c.out,
        cache_dir: c.cache_dir,
        href: c.href,
    };
    let env_cache = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let cfg = RunConfig::resolve(&file, &flags, env_cache)?;
    let outcome = match cli.command {
        Command::Bound { prune } => commands::bound(&cfg, prune)?.1,
        Command::Reduce => commands::reduce(&cfg)?.1,
        Command::Verify => commands::verify(&cfg)?.1,
        Command::Profile { generators } => commands::profile(&cfg, &generators)?.1,
        Command::Sample { params, width, height } => {
            let dims = match (width, height) {
                (None, None) => None,
                (Some(w), Some(h)) => Some((w, h)),
                (Some(w), None) | (None, Some(w)) => Some((w, w)),
            };
            commands::sample(&cfg, params.as_deref(), dims)?.1
        }
        Command::Strip { max_width, boundary } => commands::strip(&cfg, max_width, &boundary)?.1,
    };
    if let Some(path) = &cfg.out {
        commands::write_artifact(path, &outcome)?;
    }
    if outcome.artifact_is_primary && cfg.out.is_none() {
        eprint!("{}", outcome.text);
        print!("{}", outcome.artifact);
    } else {
        print!("{}", outcome.text);
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<std::io::Error>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
