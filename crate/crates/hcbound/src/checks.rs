//! Reproduction and oracle checks run by `hcbound verify`.
//!
//! Expected values and tolerances are pinned here; the acceptance test target
//! recomputes the same criteria independently from the core crate.

use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hcbound_core::block_bound::{
    check_monotonicity, density_profile, profile_crossing, BlockDistribution, BlockOptimum, Generator,
};
use hcbound_core::blocks::{BlockFamily, Reduction};
use hcbound_core::bounds::{stage_predictions, variants, BernoulliParam, Scheme, ThreeHexParam};
use hcbound_core::lattice::{build_lattice, LatticeKind, Torus};
use hcbound_core::optimize::{Domain, Settings};
use hcbound_core::oracles::{
    blocking_constant_lower, blocking_constant_upper, density_interval, entropy_1d, fair_last_stage,
    strip_entropy, unforced_probability_exhaustive, Boundary, FillInSampler, ReferenceConstants, StripSpec,
};

use crate::cache::{load_or_build, CacheStatus};
use crate::parallel::{maximize_parallel, optimize_block_parallel, optimize_scheme_parallel};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// What the check reproduces.
    pub anchor: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(anchor: &'static str, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { anchor, name: name.into(), pass, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("{tag}  [{}] {}: {}", self.anchor, self.name, self.detail)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn all_close(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() >= want.len() && got.iter().zip(want).all(|(g, w)| close(*g, *w, tol))
}

fn fmt_vec(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", s.join(", "))
}

pub const SINGLE_SITE_TABLE: [(LatticeKind, f64, &[f64]); 5] = [
    (LatticeKind::Square, 0.3924, &[0.1702, 0.2370]),
    (LatticeKind::Honeycomb, 0.4279, &[0.2202, 0.2371]),
    (LatticeKind::Triangular, 0.3253, &[0.1457, 0.1559, 0.1517]),
    (LatticeKind::Kagome, 0.3826, &[0.1944, 0.1948, 0.1866]),
    (LatticeKind::SquareMoore, 0.2858, &[0.1186, 0.1266, 0.1301, 0.1259]),
];

pub const THREE_HEX_TABLE: [(LatticeKind, f64, &[f64]); 2] = [
    (LatticeKind::Honeycomb, 0.4304, &[0.2276, 0.2376]),
    (LatticeKind::Triangular, 0.3265, &[0.153, 0.155, 0.151]),
];

/// `(n, value, value tolerance, densities)`.
pub const BLOCK_TABLE: [(usize, f64, f64, [f64; 2]); 3] = [
    (1, 0.392421, 1e-5, [0.1702, 0.2370]),
    (2, 0.39877, 2e-4, [0.1993, 0.2254]),
    (3, 0.4014, 5e-4, [0.2073, 0.2254]),
];

fn single_site(settings: &Settings) -> Vec<Check> {
    let mut out = Vec::new();
    for (kind, value, dens) in SINGLE_SITE_TABLE {
        let r = optimize_scheme_parallel(Scheme::Closed(kind), settings).map(|o| o.report);
        out.push(match r {
            Ok(r) => Check::new(
                "single-site optimum",
                kind.name(),
                close(r.value, value, 5e-4) && all_close(&r.densities, dens, 5e-3),
                format!(
                    "{:.6} vs {value}, densities {} vs {}",
                    r.value,
                    fmt_vec(&r.densities),
                    fmt_vec(dens)
                ),
            ),
            Err(e) => Check::new("single-site optimum", kind.name(), false, e.to_string()),
        });
    }
    out
}

fn corrected_formulas(settings: &Settings) -> Vec<Check> {
    let bp = |p: f64| BernoulliParam::new(p).unwrap_or(BernoulliParam::new(0.0).unwrap());
    let variant = |x: &[f64]| {
        variants::tripartite_fixed_square_exponent(bp(x[0]), bp(x[1]), 3).map(|r| r.value).unwrap_or(f64::NAN)
    };
    let mut out = Vec::new();
    let tri = Domain::unit_boxes(2);
    match maximize_parallel(&variant, &tri, settings) {
        Ok(r) => out.push(Check::new(
            "corrected exponent",
            "triangular with exponent 2",
            !close(r.value, 0.3253, 5e-4),
            format!("variant optimum {:.4} (corrected form gives 0.3253)", r.value),
        )),
        Err(e) => {
            out.push(Check::new("corrected exponent", "triangular with exponent 2", false, e.to_string()))
        }
    }
    let raw = [0.64, 0.092, 0.025, 0.010];
    let s = raw[0] + 3.0 * raw[1] + 3.0 * raw[2] + raw[3];
    let pvec = ThreeHexParam::new(raw.map(|v| v / s)).expect("normalized");
    let v = variants::three_hex_triangular_cubic_term(&pvec, bp(0.25)).value;
    out.push(Check::new(
        "corrected third term",
        "triangular three-hex with cubic term",
        !close(v, 0.3265, 1e-3),
        format!("variant value {v:.4} at the published parameters (corrected form gives 0.3265)"),
    ));
    out
}

fn three_hex(settings: &Settings) -> Vec<Check> {
    THREE_HEX_TABLE
        .iter()
        .map(|&(kind, value, dens)| match optimize_scheme_parallel(Scheme::ThreeHex(kind), settings) {
            Ok(o) => Check::new(
                "three-hex optimum",
                kind.name(),
                close(o.report.value, value, 1e-3) && all_close(&o.report.densities, dens, 5e-3),
                format!(
                    "{:.6} vs {value}, densities {} vs {}",
                    o.report.value,
                    fmt_vec(&o.report.densities),
                    fmt_vec(dens)
                ),
            ),
            Err(e) => Check::new("three-hex optimum", kind.name(), false, e.to_string()),
        })
        .collect()
}

fn block_checks(optima: &[BlockOptimum]) -> Vec<Check> {
    let mut out = Vec::new();
    for ((n, value, tol, dens), o) in BLOCK_TABLE.iter().zip(optima) {
        let r = &o.report;
        out.push(Check::new(
            "block optimum",
            format!("{n}x{n}"),
            close(r.value, *value, *tol) && all_close(&r.densities, dens, 5e-3),
            format!("{:.6} vs {value}, densities {} vs {}", r.value, fmt_vec(&r.densities), fmt_vec(dens)),
        ));
    }
    for o in &optima[1..] {
        let n = o.distribution.n();
        let v = check_monotonicity(&o.distribution, 1e-6);
        out.push(Check::new(
            "inclusion monotonicity",
            format!("{n}x{n} optimum"),
            v.is_empty(),
            format!("{} violations at relative tolerance 1e-6", v.len()),
        ));
    }
    out
}

fn reduction_counts(families: &[(usize, Arc<BlockFamily>, Arc<BlockFamily>)]) -> Vec<Check> {
    // (n, D4 free, weak free)
    let want: [(usize, Option<usize>, usize); 3] = [(2, Some(5), 5), (3, Some(101), 46), (4, None, 991)];
    let mut out = Vec::new();
    for (n, d4_free, weak_free) in want {
        let Some((_, d4, weak)) = families.iter().find(|f| f.0 == n) else { continue };
        let ok = d4_free.is_none_or(|w| d4.free_variables() == w) && weak.free_variables() == weak_free;
        out.push(Check::new(
            "reduction counts",
            format!("{n}x{n}"),
            ok,
            format!(
                "{} masks, {} D4 classes ({} free), {} weak-reduced classes ({} free)",
                1usize << (n * n),
                d4.class_count(),
                d4.free_variables(),
                weak.class_count(),
                weak.free_variables()
            ),
        ));
    }
    out
}

fn blocking(h_ref: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let c = blocking_constant_lower();
    out.push(Check::new(
        "blocking constant",
        "c_lower = 15/8",
        c == Ratio::new(15, 8),
        format!("c_lower = {c}"),
    ));
    let pinned = ReferenceConstants::SQUARE.entropy;
    match (blocking_constant_upper(pinned), density_interval(pinned)) {
        (Ok(up), Ok(iv)) => {
            out.push(Check::new(
                "blocking constant",
                "c_max at h_ref = 0.4075",
                close(up.c_max, 2.6801, 1e-3),
                format!("c_max = {:.5}", up.c_max),
            ));
            out.push(Check::new(
                "density interval",
                "(0.21367, 8/31)",
                close(iv.lower, 0.21367, 1e-4) && iv.upper == Ratio::new(8, 31),
                format!("({:.5}, {})", iv.lower, iv.upper),
            ));
        }
        (Err(e), _) | (_, Err(e)) => out.push(Check::new("blocking constant", "c_max", false, e.to_string())),
    }
    if h_ref != pinned {
        if let Ok(iv) = density_interval(h_ref) {
            out.push(Check::new(
                "density interval",
                format!("at h_ref = {h_ref}"),
                iv.lower < *iv.upper.numer() as f64 / *iv.upper.denom() as f64,
                format!("({:.5}, {})", iv.lower, iv.upper),
            ));
        }
    }
    out
}

fn equalized(settings: &Settings) -> Vec<Check> {
    [(LatticeKind::Square, 0.3921, 0.2015), (LatticeKind::Honeycomb, 0.427875, 0.2284)]
        .iter()
        .map(|&(kind, value, dens)| match optimize_scheme_parallel(Scheme::Equalized(kind), settings) {
            Ok(o) => Check::new(
                "equalized optimum",
                kind.name(),
                close(o.report.value, value, 5e-4)
                    && o.report.densities.iter().all(|&d| close(d, dens, 5e-3)),
                format!(
                    "{:.6} vs {value}, densities {} vs {dens}",
                    o.report.value,
                    fmt_vec(&o.report.densities)
                ),
            ),
            Err(e) => Check::new("equalized optimum", kind.name(), false, e.to_string()),
        })
        .collect()
}

fn oracles(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let e = entropy_1d();
    out.push(Check::new("one-dimensional entropy", "ln φ", close(e, phi.ln(), 1e-12), format!("{e:.15}")));
    let strip = StripSpec::new(12, Boundary::Free).and_then(strip_entropy);
    out.push(match strip {
        Ok(s) => Check::new(
            "strip entropy",
            "width 12, free boundary, within 0.003 of 0.4075",
            close(s, ReferenceConstants::SQUARE.entropy, 0.003),
            format!("{s:.6}"),
        ),
        Err(e) => Check::new("strip entropy", "width 12, free boundary", false, e.to_string()),
    });
    if let Ok(s) = StripSpec::new(12, Boundary::Periodic).and_then(strip_entropy) {
        out.push(Check::new(
            "strip entropy",
            "width 12, periodic boundary, within 0.003 of 0.4075",
            close(s, ReferenceConstants::SQUARE.entropy, 0.003),
            format!("{s:.6}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for kind in LatticeKind::ALL {
        let k = build_lattice(kind).partite_count;
        let mut worst = 0.0f64;
        let mut err = None;
        for _ in 0..5 {
            let probs: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
            let predicted = match stage_predictions(kind, &probs) {
                Ok(p) => p,
                Err(e) => {
                    err = Some(e.to_string());
                    break;
                }
            };
            for (stage, &(free, _)) in predicted.iter().enumerate() {
                match unforced_probability_exhaustive(kind, &probs, stage) {
                    Ok(x) => worst = worst.max((x - free).abs()),
                    Err(e) => err = Some(e.to_string()),
                }
            }
        }
        out.push(Check::new(
            "exhaustive window",
            kind.name(),
            err.is_none() && worst <= 1e-12,
            err.unwrap_or_else(|| format!("max deviation {worst:.2e} over 5 points")),
        ));
    }
    out
}

/// Torus used for sampler checks on each lattice.
pub fn sampler_torus(kind: LatticeKind) -> (usize, usize) {
    match kind {
        LatticeKind::Triangular => (510, 510),
        LatticeKind::Kagome => (300, 300),
        _ => (512, 512),
    }
}

fn sampler(settings: &Settings) -> Vec<Check> {
    let mut out = Vec::new();
    for (kind, _, _) in SINGLE_SITE_TABLE {
        let opt = match optimize_scheme_parallel(Scheme::Closed(kind), settings) {
            Ok(o) => o,
            Err(e) => {
                out.push(Check::new("sampler consistency", kind.name(), false, e.to_string()));
                continue;
            }
        };
        let probs = fair_last_stage(&opt.report.params);
        let predicted = match stage_predictions(kind, &probs) {
            Ok(p) => p,
            Err(e) => {
                out.push(Check::new("sampler consistency", kind.name(), false, e.to_string()));
                continue;
            }
        };
        let (w, h) = sampler_torus(kind);
        let sampler = match Torus::new(kind, w, h) {
            Ok(t) => FillInSampler::new(t),
            Err(e) => {
                out.push(Check::new("sampler consistency", kind.name(), false, e.to_string()));
                continue;
            }
        };
        let runs: Vec<_> =
            (0..20u64).into_par_iter().map(|s| sampler.sample(&probs, settings.seed + s)).collect();
        let k = probs.len();
        let mut hits = vec![[0usize; 2]; k];
        let mut hard_core = true;
        let mut err = None;
        for r in runs {
            match r {
                Ok(s) => {
                    hard_core &= s.configuration.verify_hard_core();
                    for st in &s.stages {
                        let (free, dens) = predicted[st.stage];
                        hits[st.stage][0] += st.unforced.within(free, 3.0) as usize;
                        hits[st.stage][1] += st.density.within(dens, 3.0) as usize;
                    }
                }
                Err(e) => err = Some(e.to_string()),
            }
        }
        let worst = hits.iter().flatten().copied().min().unwrap_or(0);
        out.push(Check::new(
            "sampler consistency",
            format!("{} on {w}x{h}", kind.name()),
            err.is_none() && hard_core && worst >= 19,
            err.unwrap_or_else(|| {
                format!("fewest runs within 3 SE per stage statistic: {worst}/20, hard core: {hard_core}")
            }),
        ));
    }
    out
}

fn occupancy(optima: &[BlockOptimum], settings: &Settings) -> Vec<Check> {
    let one = optimize_scheme_parallel(Scheme::Equalized(LatticeKind::Square), settings).and_then(|o| {
        let p = o.report.params[0];
        BlockDistribution::new(optima[0].distribution.family().clone(), vec![1.0 - p, p])
    });
    let one = match one {
        Ok(d) => d,
        Err(e) => return vec![Check::new("occupancy profiles", "generators", false, e.to_string())],
    };
    let gens = [
        Generator::Blocks(optima[2].distribution.clone()),
        Generator::Blocks(optima[1].distribution.clone()),
        Generator::Blocks(one),
    ];
    let profiles: Result<Vec<_>, _> = gens.iter().map(|g| density_profile(3, g)).collect();
    let profiles = match profiles {
        Ok(p) => p,
        Err(e) => return vec![Check::new("occupancy profiles", "profiles", false, e.to_string())],
    };
    let means: Vec<f64> = profiles.iter().map(|p| p.mean() / 9.0).collect();
    let vars: Vec<f64> = profiles.iter().map(|p| p.variance()).collect();
    let spread =
        means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
    let crossing = profile_crossing(&profiles[0], &profiles[2]);
    vec![
        Check::new(
            "occupancy profiles",
            "means agree within 0.01",
            spread <= 0.01,
            format!("densities {} (3x3, 2x2, 1x1 equalized)", fmt_vec(&means)),
        ),
        Check::new(
            "occupancy profiles",
            "variance 3x3 > 2x2 > 1x1",
            vars[0] > vars[1] && vars[1] > vars[2],
            format!("variances {}", fmt_vec(&vars)),
        ),
        Check::new(
            "occupancy profiles",
            "3x3 and 1x1 cross between k = 3 and 4",
            crossing == Some((3, 4)),
            format!("crossing {crossing:?}"),
        ),
    ]
}

/// Every check, in a fixed order. `warnings` collects cache notices.
pub fn run_all(
    settings: &Settings,
    h_ref: f64,
    cache_dir: Option<&std::path::Path>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<Vec<Check>> {
    let mut families = Vec::new();
    for n in 1..=4 {
        let (d4, s1) = load_or_build(cache_dir, n, Reduction::D4)?;
        let (weak, s2) = load_or_build(cache_dir, n, Reduction::D4Weak)?;
        for s in [s1, s2] {
            if let CacheStatus::Rebuilt(why) = s {
                warnings.push(format!("rebuilt cache: {why}"));
            }
        }
        families.push((n, d4, weak));
    }
    let optima = families[..3]
        .iter()
        .map(|(_, _, weak)| optimize_block_parallel(weak.clone(), settings))
        .collect::<Result<Vec<_>, _>>()?;

    let mut checks = single_site(settings);
    checks.extend(corrected_formulas(settings));
    checks.extend(three_hex(settings));
    checks.extend(block_checks(&optima));
    checks.extend(reduction_counts(&families));
    checks.extend(blocking(h_ref));
    checks.extend(equalized(settings));
    checks.extend(oracles(settings.seed));
    checks.extend(sampler(settings));
    checks.extend(occupancy(&optima, settings));
    Ok(checks)
}
