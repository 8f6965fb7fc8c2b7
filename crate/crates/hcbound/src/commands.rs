//! The six subcommands. Each returns an [`Outcome`]; `main` decides where the
//! pieces go.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use serde::Serialize;

use hcbound_core::block_bound::{
    density_profile, extend_distribution, optimize_family, profile_crossing, BlockDistribution, BlockOptimum,
    BlockOptions, DensityProfile, Generator,
};
use hcbound_core::blocks::{BlockFamily, Reduction};
use hcbound_core::bounds::{
    stage_predictions, three_hex_stage_predictions, BernoulliParam, Scheme, ThreeHexParam,
    THREE_HEX_MULTIPLICITY,
};
use hcbound_core::lattice::{build_lattice, LatticeKind, Torus};
use hcbound_core::oracles::{
    fair_last_stage, strip_entropy, Boundary, FillInSampler, StripSpec, MAX_STRIP_WIDTH,
};

use crate::cache::{load_or_build, CacheStatus};
use crate::checks::{run_all, sampler_torus, Check};
use crate::config::{ConfigError, RunConfig, SchemeKind};
use crate::parallel::{optimize_block_parallel, optimize_scheme_parallel};
use crate::report::{
    boundary_name, sampler_rows, scheme_name, write_profiles, write_strips, BoundRecord, ReportBundle,
    SamplerReport, StripRow, SCHEMA_VERSION,
};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Human-readable summary.
    pub text: String,
    /// Machine-readable output (JSON or CSV).
    pub artifact: String,
    /// Whether the artifact goes to stdout when no `--out` is given.
    pub artifact_is_primary: bool,
    pub warnings: Vec<String>,
    /// A numerical check failed.
    pub failed: bool,
}

fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

fn note_cache(status: CacheStatus, warnings: &mut Vec<String>) {
    if let CacheStatus::Rebuilt(why) = status {
        warnings.push(format!("cache file was unusable and has been rebuilt ({why})"));
    }
}

fn weak_family(cfg: &RunConfig, n: usize, warnings: &mut Vec<String>) -> Result<Arc<BlockFamily>> {
    let (f, status) = load_or_build(Some(&cfg.cache_dir), n, Reduction::D4Weak)?;
    note_cache(status, warnings);
    Ok(f)
}

/// The schemes `bound` runs for the configured scheme and lattice.
pub fn bound_schemes(cfg: &RunConfig) -> Result<Vec<Scheme>> {
    use LatticeKind::*;
    let pick =
        |allowed: &[LatticeKind], make: fn(LatticeKind) -> Scheme, what: &str| -> Result<Vec<Scheme>> {
            match cfg.lattice {
                None => Ok(allowed.iter().map(|&k| make(k)).collect()),
                Some(k) if allowed.contains(&k) => Ok(vec![make(k)]),
                Some(k) => config_error(format!("{what} scheme is not defined on the {} lattice", k.name())),
            }
        };
    match cfg.scheme {
        SchemeKind::Closed => pick(&LatticeKind::ALL, Scheme::Closed, "closed"),
        SchemeKind::Equalized => pick(&[Square, Honeycomb], Scheme::Equalized, "equalized"),
        SchemeKind::ThreeHex => pick(&[Honeycomb, Triangular], Scheme::ThreeHex, "three-hex"),
        SchemeKind::Block => {
            if !matches!(cfg.lattice, None | Some(Square)) {
                return config_error("block schemes are defined on the square lattice only");
            }
            if cfg.n == 4 && !cfg.long {
                return config_error("the 4x4 block optimization (991 variables) needs --long");
            }
            Ok(vec![Scheme::Block(cfg.n)])
        }
    }
}

fn pruned_block(cfg: &RunConfig, threshold: f64, warnings: &mut Vec<String>) -> Result<BlockOptimum> {
    if cfg.n < 2 {
        return config_error("--prune needs n >= 2 (the warm start comes from the (n-1)x(n-1) optimum)");
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return config_error(format!("--prune threshold {threshold} is outside (0, 1)"));
    }
    let smaller = optimize_block_parallel(weak_family(cfg, cfg.n - 1, warnings)?, &cfg.settings)?;
    let family = weak_family(cfg, cfg.n, warnings)?;
    let seed = extend_distribution(&smaller.distribution, family.clone())?;
    let opts = BlockOptions { warm_start: Some(seed), prune_below: Some(threshold) };
    Ok(optimize_family(family, &cfg.settings, &opts)?)
}

pub fn bound(cfg: &RunConfig, prune: Option<f64>) -> Result<(ReportBundle, Outcome)> {
    let start = Instant::now();
    let schemes = bound_schemes(cfg)?;
    if prune.is_some() && cfg.scheme != SchemeKind::Block {
        return config_error("--prune applies to block schemes only");
    }
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    for scheme in schemes {
        match scheme {
            Scheme::Block(n) => {
                let opt = match prune {
                    Some(t) => pruned_block(cfg, t, &mut warnings)?,
                    None => optimize_block_parallel(weak_family(cfg, n, &mut warnings)?, &cfg.settings)?,
                };
                records.push(BoundRecord::new(&opt.report, Some(&opt.result)));
            }
            s => {
                let opt = optimize_scheme_parallel(s, &cfg.settings)?;
                records.push(BoundRecord::new(&opt.report, Some(&opt.result)));
            }
        }
    }
    let bundle = ReportBundle::new(records, &cfg.settings, start.elapsed().as_secs_f64());
    let outcome = Outcome {
        text: bundle.table(),
        artifact: serde_json::to_string_pretty(&bundle)? + "\n",
        artifact_is_primary: false,
        warnings,
        failed: false,
    };
    Ok((bundle, outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReduceReport {
    pub schema_version: u32,
    pub n: usize,
    pub masks: usize,
    pub d4_classes: usize,
    pub d4_free: usize,
    pub weak_classes: usize,
    pub weak_free: usize,
    pub largest_class: usize,
}

pub fn reduce(cfg: &RunConfig) -> Result<(ReduceReport, Outcome)> {
    let dir = Some(cfg.cache_dir.as_path());
    let (d4, weak) = rayon::join(
        || load_or_build(dir, cfg.n, Reduction::D4),
        || load_or_build(dir, cfg.n, Reduction::D4Weak),
    );
    let ((d4, s1), (weak, s2)) = (d4?, weak?);
    let mut warnings = Vec::new();
    note_cache(s1, &mut warnings);
    note_cache(s2, &mut warnings);
    let report = ReduceReport {
        schema_version: SCHEMA_VERSION,
        n: cfg.n,
        masks: 1 << (cfg.n * cfg.n),
        d4_classes: d4.class_count(),
        d4_free: d4.free_variables(),
        weak_classes: weak.class_count(),
        weak_free: weak.free_variables(),
        largest_class: weak.classes().iter().map(|c| c.multiplicity).max().unwrap_or(0),
    };
    let text = format!(
        "n = {n}\n  masks                  {}\n  D4 classes             {} ({} free)\n  weak-reduced classes   {} ({} free)\n  largest class          {}\n  cache                  {}\n",
        report.masks,
        report.d4_classes,
        report.d4_free,
        report.weak_classes,
        report.weak_free,
        report.largest_class,
        cfg.cache_dir.display(),
        n = cfg.n,
    );
    let artifact = serde_json::to_string_pretty(&report)? + "\n";
    Ok((report, Outcome { text, artifact, artifact_is_primary: false, warnings, failed: false }))
}

pub fn verify(cfg: &RunConfig) -> Result<(Vec<Check>, Outcome)> {
    let mut warnings = Vec::new();
    let checks = run_all(&cfg.settings, cfg.h_ref, Some(&cfg.cache_dir), &mut warnings)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut text: String = checks.iter().map(|c| c.line() + "\n").collect();
    text += &format!("{} checks, {} passed, {failed} failed\n", checks.len(), checks.len() - failed);
    let rows: Vec<_> = checks
        .iter()
        .map(|c| serde_json::json!({"anchor": c.anchor, "name": c.name, "pass": c.pass, "detail": c.detail}))
        .collect();
    let artifact = serde_json::to_string_pretty(&serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "checks": rows,
    }))? + "\n";
    Ok((checks, Outcome { text, artifact, artifact_is_primary: false, warnings, failed: failed > 0 }))
}

/// A profile generator named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// The 1x1 generator: even sites Bernoulli at the equalized square optimum.
    EqualizedSingleSite,
    /// The m×m block optimum, m ≥ 2.
    BlockOptimum(usize),
    Bernoulli(f64),
}

impl GeneratorSpec {
    pub fn parse(token: &str, n: usize) -> Result<Self> {
        let t = token.trim();
        if let Some(p) = t.strip_prefix("bernoulli:") {
            return match p.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => Ok(GeneratorSpec::Bernoulli(p)),
                _ => config_error(format!("bad Bernoulli generator {t:?}")),
            };
        }
        match t.parse::<usize>() {
            Ok(1) => Ok(GeneratorSpec::EqualizedSingleSite),
            Ok(m) if (2..=n).contains(&m) => Ok(GeneratorSpec::BlockOptimum(m)),
            _ => config_error(format!("generator {t:?} must be 1..={n} or bernoulli:<p>")),
        }
    }

    fn size(&self) -> usize {
        match self {
            GeneratorSpec::BlockOptimum(m) => *m,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub generator: String,
    pub mean_density: f64,
    pub variance: f64,
    pub total: f64,
}

pub fn profile(cfg: &RunConfig, generators: &[String]) -> Result<(Vec<DensityProfile>, Outcome)> {
    let n = cfg.n;
    let specs = generators.iter().map(|g| GeneratorSpec::parse(g, n)).collect::<Result<Vec<_>>>()?;
    if specs.is_empty() {
        return config_error("no generators given");
    }
    let mut warnings = Vec::new();
    let mut profiles = Vec::new();
    for spec in &specs {
        let (generator, label) = match spec {
            GeneratorSpec::EqualizedSingleSite => {
                let o = optimize_scheme_parallel(Scheme::Equalized(LatticeKind::Square), &cfg.settings)?;
                let p = o.report.params[0];
                let d = BlockDistribution::new(weak_family(cfg, 1, &mut warnings)?, vec![1.0 - p, p])?;
                (Generator::Blocks(d), "1x1".to_string())
            }
            GeneratorSpec::BlockOptimum(m) => {
                let o = optimize_block_parallel(weak_family(cfg, *m, &mut warnings)?, &cfg.settings)?;
                (Generator::Blocks(o.distribution), format!("{m}x{m}"))
            }
            GeneratorSpec::Bernoulli(p) => (Generator::Bernoulli(*p), format!("bernoulli:{p}")),
        };
        let mut prof = density_profile(n, &generator)?;
        prof.generator = label;
        profiles.push(prof);
    }
    let cells = (n * n) as f64;
    let mut text = format!("{n}x{n} window occupancy\n");
    for p in &profiles {
        text += &format!(
            "  {:<16} mean density {:.4}  variance {:.4}  total {:.12}\n",
            p.generator,
            p.mean() / cells,
            p.variance(),
            p.total()
        );
    }
    let big = (0..specs.len()).max_by_key(|&i| (specs[i].size(), std::cmp::Reverse(i)));
    let small = (0..specs.len()).min_by_key(|&i| (specs[i].size(), i));
    if let (Some(b), Some(s)) = (big, small) {
        if b != s {
            let crossing = profile_crossing(&profiles[b], &profiles[s]);
            text += &format!(
                "  crossing {} vs {}: {}\n",
                profiles[b].generator,
                profiles[s].generator,
                crossing.map_or("none".to_string(), |(a, c)| format!("between k = {a} and k = {c}"))
            );
        }
    }
    let mut buf = Vec::new();
    write_profiles(&mut buf, &profiles)?;
    let artifact = String::from_utf8(buf)?;
    Ok((profiles, Outcome { text, artifact, artifact_is_primary: true, warnings, failed: false }))
}

/// Default torus for `sample`.
pub fn sample_dims(kind: LatticeKind, scheme: SchemeKind) -> (usize, usize) {
    match (kind, scheme) {
        (LatticeKind::Honeycomb, SchemeKind::ThreeHex) => (510, 510),
        _ => sampler_torus(kind),
    }
}

pub fn sample(
    cfg: &RunConfig,
    params: Option<&[f64]>,
    dims: Option<(usize, usize)>,
) -> Result<(SamplerReport, Outcome)> {
    let Some(kind) = cfg.lattice else {
        return config_error("sample needs a single --lattice");
    };
    let scheme = match cfg.scheme {
        SchemeKind::Closed => Scheme::Closed(kind),
        SchemeKind::Equalized => Scheme::Equalized(kind),
        SchemeKind::ThreeHex => Scheme::ThreeHex(kind),
        SchemeKind::Block => return config_error("sample supports closed, equalized and three-hex schemes"),
    };
    let mut params = match params {
        Some(p) => p.to_vec(),
        None => optimize_scheme_parallel(scheme, &cfg.settings)?.report.params,
    };
    let (w, h) = dims.unwrap_or_else(|| sample_dims(kind, cfg.scheme));
    let torus = Torus::new(kind, w, h).map_err(|e| ConfigError(e.to_string()))?;
    let sampler = FillInSampler::new(torus);
    let k = build_lattice(kind).partite_count;
    let bad = |e: hcbound_core::Error| anyhow::Error::from(ConfigError(e.to_string()));
    let seed = cfg.settings.seed;
    let (sample, predicted) = match scheme {
        Scheme::Closed(_) => {
            if params.len() != k - 1 {
                return config_error(format!("{} needs {} parameters", kind.name(), k - 1));
            }
            let probs = fair_last_stage(&params);
            let pred = stage_predictions(kind, &probs).map_err(bad)?;
            (sampler.sample(&probs, seed).map_err(bad)?, pred)
        }
        Scheme::Equalized(LatticeKind::Square | LatticeKind::Honeycomb) => {
            if params.len() != 1 {
                return config_error("equalized schemes take one parameter");
            }
            let m = if kind == LatticeKind::Square { 4 } else { 3 };
            let p = BernoulliParam::new(params[0]).map_err(bad)?.get();
            let probs = [p, p / (1.0 - p).powi(m)];
            let pred = stage_predictions(kind, &probs).map_err(bad)?;
            (sampler.sample(&probs, seed).map_err(bad)?, pred)
        }
        Scheme::ThreeHex(LatticeKind::Honeycomb | LatticeKind::Triangular) => {
            let later_count = if kind == LatticeKind::Triangular { 1 } else { 0 };
            if params.len() != 4 + later_count {
                return config_error(format!(
                    "three-hex on {} needs {} parameters",
                    kind.name(),
                    4 + later_count
                ));
            }
            let s: f64 = params[..4].iter().zip(THREE_HEX_MULTIPLICITY).map(|(p, m)| p * m).sum();
            for v in &mut params[..4] {
                *v /= s;
            }
            let pvec = ThreeHexParam::new([params[0], params[1], params[2], params[3]]).map_err(bad)?;
            let q = if later_count == 1 { params[4] } else { 0.5 };
            let pred = three_hex_stage_predictions(kind, &pvec, BernoulliParam::new(q).map_err(bad)?)
                .map_err(bad)?;
            let later: Vec<f64> = if later_count == 1 { vec![q, 0.5] } else { vec![0.5] };
            (sampler.sample_three_hex(pvec.get(), &later, seed).map_err(bad)?, pred)
        }
        _ => {
            return config_error(format!("{} scheme is not defined on {}", scheme_name(scheme), kind.name()))
        }
    };
    let rows = sampler_rows(&sample, &predicted);
    let report = SamplerReport {
        schema_version: SCHEMA_VERSION,
        lattice: kind.name().into(),
        scheme: scheme_name(scheme).into(),
        params,
        width: w,
        height: h,
        seed,
        hard_core: sample.configuration.verify_hard_core(),
        rows,
    };
    let mut text = format!(
        "{} {} on {w}x{h}, seed {seed}, hard core {}\n",
        kind.name(),
        report.scheme,
        report.hard_core
    );
    for r in &report.rows {
        text += &format!(
            "  stage {} {:<9} analytic {:.5}  empirical {:.5} ± {:.5}  ({} sites)\n",
            r.stage, r.statistic, r.analytic, r.empirical, r.stderr, r.n_sites
        );
    }
    let artifact = serde_json::to_string_pretty(&report)? + "\n";
    Ok((report, Outcome { text, artifact, artifact_is_primary: true, warnings: Vec::new(), failed: false }))
}

pub fn parse_boundaries(s: &str) -> Result<Vec<Boundary>> {
    match s {
        "free" => Ok(vec![Boundary::Free]),
        "periodic" => Ok(vec![Boundary::Periodic]),
        "both" => Ok(vec![Boundary::Free, Boundary::Periodic]),
        _ => config_error(format!("unknown boundary {s:?} (free, periodic, both)")),
    }
}

pub fn strip(cfg: &RunConfig, max_width: usize, boundary: &str) -> Result<(Vec<StripRow>, Outcome)> {
    if !(1..=MAX_STRIP_WIDTH).contains(&max_width) {
        return config_error(format!("max width {max_width} is outside 1..={MAX_STRIP_WIDTH}"));
    }
    let mut rows = Vec::new();
    for b in parse_boundaries(boundary)? {
        for w in 1..=max_width {
            let entropy = strip_entropy(StripSpec::new(w, b)?)?;
            rows.push(StripRow { width: w, boundary: boundary_name(b).into(), entropy });
        }
    }
    let mut text = format!("{:>5} {:<9} {:>10} {:>10}\n", "width", "boundary", "entropy", "- h_ref");
    for r in &rows {
        text += &format!(
            "{:>5} {:<9} {:>10.6} {:>+10.6}\n",
            r.width,
            r.boundary,
            r.entropy,
            r.entropy - cfg.h_ref
        );
    }
    let mut buf = Vec::new();
    write_strips(&mut buf, &rows)?;
    let artifact = String::from_utf8(buf)?;
    Ok((rows, Outcome { text, artifact, artifact_is_primary: true, warnings: Vec::new(), failed: false }))
}

/// Writes `outcome.artifact` to `path` (UTF-8).
pub fn write_artifact(path: &Path, outcome: &Outcome) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, outcome.artifact.as_bytes())?;
    Ok(())
}
