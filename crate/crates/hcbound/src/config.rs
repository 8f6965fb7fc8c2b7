//! Run configuration: an optional TOML file overridden by command-line flags.
//!
//! ```toml
//! [run]
//! lattice = "all"        # square | honeycomb | triangular | kagome | square-moore | all
//! scheme = "closed"      # closed | equalized | three-hex | block
//! n = 3                  # block side, 1..=4
//! long = false           # allow n = 4 block optimization
//!
//! [optimizer]
//! tol = 1e-7             # gradient tolerance
//! ftol = 1e-10
//! starts = 16
//! seed = 0
//! max_iter = 5000
//!
//! [output]
//! out = "report.json"
//! cache_dir = ".hcbound-cache"
//!
//! [reference]
//! h_ref = 0.4075
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use hcbound_core::blocks::MAX_REDUCED;
use hcbound_core::lattice::LatticeKind;
use hcbound_core::math::LN_2;
use hcbound_core::optimize::Settings;
use hcbound_core::oracles::ReferenceConstants;

pub const CACHE_ENV: &str = "HC_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".hcbound-cache";

/// Invalid or unreadable configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub reference: ReferenceSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub lattice: Option<String>,
    pub scheme: Option<String>,
    pub n: Option<usize>,
    pub long: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub tol: Option<f64>,
    pub ftol: Option<f64>,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub h_ref: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Values given on the command line; `None` defers to the file, then the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub lattice: Option<String>,
    pub scheme: Option<String>,
    pub n: Option<usize>,
    pub long: bool,
    pub tol: Option<f64>,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub href: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Closed,
    Equalized,
    ThreeHex,
    Block,
}

impl SchemeKind {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "closed" => Ok(SchemeKind::Closed),
            "equalized" => Ok(SchemeKind::Equalized),
            "three-hex" => Ok(SchemeKind::ThreeHex),
            "block" => Ok(SchemeKind::Block),
            _ => invalid(format!("unknown scheme {s:?} (closed, equalized, three-hex, block)")),
        }
    }
}

/// `None` stands for every lattice.
pub fn parse_lattice(s: &str) -> Result<Option<LatticeKind>, ConfigError> {
    if s == "all" {
        return Ok(None);
    }
    match LatticeKind::from_name(s) {
        Some(k) => Ok(Some(k)),
        None => {
            let names: Vec<&str> = LatticeKind::ALL.iter().map(|k| k.name()).collect();
            invalid(format!("unknown lattice {s:?} ({}, all)", names.join(", ")))
        }
    }
}

/// Fully validated settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: Option<LatticeKind>,
    pub scheme: SchemeKind,
    pub n: usize,
    pub long: bool,
    pub settings: Settings,
    pub out: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub h_ref: f64,
}

impl RunConfig {
    /// Merges flags over the file over defaults. The cache directory falls back
    /// to `env_cache` (the value of `HC_CACHE_DIR`) before the default.
    pub fn resolve(
        file: &FileConfig,
        flags: &Overrides,
        env_cache: Option<PathBuf>,
    ) -> Result<Self, ConfigError> {
        let lattice_name = flags.lattice.clone().or(file.run.lattice.clone()).unwrap_or_else(|| "all".into());
        let lattice = parse_lattice(&lattice_name)?;
        let scheme =
            SchemeKind::parse(flags.scheme.as_deref().or(file.run.scheme.as_deref()).unwrap_or("closed"))?;
        let n = flags.n.or(file.run.n).unwrap_or(3);
        if !(1..=MAX_REDUCED).contains(&n) {
            return invalid(format!("block size n = {n} is outside 1..={MAX_REDUCED}"));
        }
        let long = flags.long || file.run.long.unwrap_or(false);

        let defaults = Settings::default();
        let settings = Settings {
            gtol: flags.tol.or(file.optimizer.tol).unwrap_or(defaults.gtol),
            ftol: file.optimizer.ftol.unwrap_or(defaults.ftol),
            starts: flags.starts.or(file.optimizer.starts).unwrap_or(defaults.starts),
            seed: flags.seed.or(file.optimizer.seed).unwrap_or(defaults.seed),
            max_iter: file.optimizer.max_iter.unwrap_or(defaults.max_iter),
            ..defaults
        };
        if !(settings.gtol > 0.0 && settings.gtol.is_finite()) {
            return invalid(format!("tol = {} must be positive", settings.gtol));
        }
        if !(settings.ftol > 0.0 && settings.ftol.is_finite()) {
            return invalid(format!("ftol = {} must be positive", settings.ftol));
        }
        if settings.starts == 0 {
            return invalid("starts must be at least 1");
        }
        if settings.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }

        let h_ref = flags.href.or(file.reference.h_ref).unwrap_or(ReferenceConstants::SQUARE.entropy);
        if !(h_ref > 0.0 && h_ref < LN_2) {
            return invalid(format!("h_ref = {h_ref} is outside (0, ln 2)"));
        }
        let cache_dir = flags
            .cache_dir
            .clone()
            .or(file.output.cache_dir.clone())
            .or(env_cache)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        Ok(RunConfig {
            lattice,
            scheme,
            n,
            long,
            settings,
            out: flags.out.clone().or(file.output.out.clone()),
            cache_dir,
            h_ref,
        })
    }
}
