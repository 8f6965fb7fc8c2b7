//! JSON and CSV output formats.
//!
//! JSON reports carry `schema_version`; bump it whenever a field changes
//! meaning or disappears.

use std::io::Write;

use serde::{Deserialize, Serialize};

use hcbound_core::block_bound::DensityProfile;
use hcbound_core::bounds::{BoundReport, Scheme};
use hcbound_core::optimize::{OptimizationResult, Settings};
use hcbound_core::oracles::{Boundary, Sample};

pub const SCHEMA_VERSION: u32 = 1;

pub fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Closed(_) => "closed",
        Scheme::Equalized(_) => "equalized",
        Scheme::ThreeHex(_) => "three-hex",
        Scheme::Block(_) => "block",
    }
}

pub fn scheme_lattice(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Closed(k) | Scheme::Equalized(k) | Scheme::ThreeHex(k) => k.name(),
        Scheme::Block(_) => "square",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerMeta {
    pub iterations: usize,
    pub total_iterations: usize,
    pub starts_used: usize,
    pub best_start: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl From<&OptimizationResult> for OptimizerMeta {
    fn from(r: &OptimizationResult) -> Self {
        OptimizerMeta {
            iterations: r.iterations,
            total_iterations: r.total_iterations,
            starts_used: r.starts_used,
            best_start: r.best_start,
            converged: r.converged,
            gradient_norm: r.gradient_norm_at_solution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub lattice: String,
    pub scheme: String,
    /// Block side for block schemes.
    pub n: Option<usize>,
    pub value_nats: f64,
    pub params: Vec<f64>,
    pub densities: Vec<f64>,
    pub optimizer: Option<OptimizerMeta>,
}

impl BoundRecord {
    pub fn new(report: &BoundReport, result: Option<&OptimizationResult>) -> Self {
        BoundRecord {
            lattice: scheme_lattice(report.scheme).to_string(),
            scheme: scheme_name(report.scheme).to_string(),
            n: match report.scheme {
                Scheme::Block(n) => Some(n),
                _ => None,
            },
            value_nats: report.value,
            params: report.params.clone(),
            densities: report.densities.clone(),
            optimizer: result.map(OptimizerMeta::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsRecord {
    pub ftol: f64,
    pub gtol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub starts: usize,
}

impl From<&Settings> for SettingsRecord {
    fn from(s: &Settings) -> Self {
        SettingsRecord { ftol: s.ftol, gtol: s.gtol, max_iter: s.max_iter, seed: s.seed, starts: s.starts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub settings: SettingsRecord,
    /// Wall-clock time; the only field that varies between identical runs.
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub reports: Vec<BoundRecord>,
    pub provenance: Provenance,
}

impl ReportBundle {
    pub fn new(reports: Vec<BoundRecord>, settings: &Settings, elapsed_seconds: f64) -> Self {
        ReportBundle {
            schema_version: SCHEMA_VERSION,
            reports,
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: settings.seed,
                settings: settings.into(),
                elapsed_seconds,
            },
        }
    }

    /// The bundle with timing zeroed, for comparisons.
    pub fn without_timing(&self) -> Self {
        let mut b = self.clone();
        b.provenance.elapsed_seconds = 0.0;
        b
    }

    /// Fixed-width text table.
    pub fn table(&self) -> String {
        let mut out = format!("{:<13} {:<10} {:>3} {:>10}  densities\n", "lattice", "scheme", "n", "bound");
        for r in &self.reports {
            let n = r.n.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
            let dens: Vec<String> = r.densities.iter().map(|d| format!("{d:.5}")).collect();
            out += &format!(
                "{:<13} {:<10} {:>3} {:>10.6}  ({})\n",
                r.lattice,
                r.scheme,
                n,
                r.value_nats,
                dens.join(", ")
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub k: usize,
    pub probability: f64,
    pub generator: String,
}

pub fn write_profiles<W: Write>(out: W, profiles: &[DensityProfile]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in profiles {
        for (k, &probability) in p.occupancy.iter().enumerate() {
            w.serialize(ProfileRow { k, probability, generator: p.generator.clone() })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripRow {
    pub width: usize,
    pub boundary: String,
    pub entropy: f64,
}

pub fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Free => "free",
        Boundary::Periodic => "periodic",
    }
}

pub fn write_strips<W: Write>(out: W, rows: &[StripRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerRow {
    pub stage: usize,
    /// `density` or `unforced`.
    pub statistic: String,
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub n_sites: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerReport {
    pub schema_version: u32,
    pub lattice: String,
    pub scheme: String,
    pub params: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub hard_core: bool,
    pub rows: Vec<SamplerRow>,
}

/// Pairs each stage's statistics with `(unforced, density)` predictions.
pub fn sampler_rows(sample: &Sample, predicted: &[(f64, f64)]) -> Vec<SamplerRow> {
    let mut rows = Vec::new();
    for (st, &(free, dens)) in sample.stages.iter().zip(predicted) {
        for (name, est, analytic) in [("unforced", st.unforced, free), ("density", st.density, dens)] {
            rows.push(SamplerRow {
                stage: st.stage,
                statistic: name.into(),
                analytic,
                empirical: est.mean,
                stderr: est.stderr,
                n_sites: st.n_sites,
            });
        }
    }
    rows
}
