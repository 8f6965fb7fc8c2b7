//! The n×n block lower bound on the square lattice.
//!
//! Even sites are filled block by block with independent copies of a block
//! distribution; each odd site then carries a fair coin when none of its four
//! even neighbors is a 1. Per full-lattice site the entropy is
//!
//! ```text
//! ½ [ H / n² + u ln 2 ],   H = −Σ_c m_c p_c ln p_c,
//! ```
//!
//! where `u` is the unforced fraction of odd sites. Each block owns `n²` odd
//! sites: `(n-1)²` interior plaquettes, `n-1` on its right edge, `n-1` on its
//! bottom edge and its bottom-right corner. A right-edge site is unforced when
//! the right column domino of this block and the left column domino of the next
//! one are both 0, and the corner site needs the four corners that meet there.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::blocks::{inclusion_pairs, BlockFamily, MarginalMaps, Mask, Reduction, Strictness};
use crate::bounds::{BoundReport, Scheme};
use crate::math::{ln, sum, xlnx, LN_2};
use crate::optimize::{maximize, maximize_from, Component, Domain, Objective, OptimizationResult, Settings};
use crate::{Error, Result};

/// Normalization tolerance for block distributions.
pub const SIMPLEX_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDistribution {
    family: Arc<BlockFamily>,
    probs: Vec<f64>,
}

impl BlockDistribution {
    /// `probs[c]` is the probability of one specific member of class `c`.
    pub fn new(family: Arc<BlockFamily>, probs: Vec<f64>) -> Result<Self> {
        family.check_distribution(&probs, SIMPLEX_TOLERANCE)?;
        Ok(BlockDistribution { family, probs })
    }

    /// All `2^(n²)` blocks equally likely.
    pub fn uniform(family: Arc<BlockFamily>) -> Self {
        let p = 1.0 / (1u64 << (family.n() * family.n())) as f64;
        let probs = vec![p; family.class_count()];
        BlockDistribution { family, probs }
    }

    /// Independent Bernoulli(p) sites, which is constant on D4 classes but not
    /// on weak classes; members are averaged.
    pub fn bernoulli(family: Arc<BlockFamily>, p: f64) -> Result<Self> {
        let n2 = (family.n() * family.n()) as i32;
        let probs = family
            .classes()
            .iter()
            .map(|c| {
                sum(c.members.iter().map(|m| {
                    let k = m.count_ones() as i32;
                    crate::math::powi(p, k) * crate::math::powi(1.0 - p, n2 - k)
                })) / c.multiplicity as f64
            })
            .collect();
        BlockDistribution::new(family, probs)
    }

    pub fn family(&self) -> &Arc<BlockFamily> {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mask_probability(&self, mask: Mask) -> f64 {
        self.probs[self.family.class_of(mask)]
    }

    /// Mean number of 1's per block.
    pub fn mean_ones(&self) -> f64 {
        sum(self
            .family
            .classes()
            .iter()
            .zip(&self.probs)
            .map(|(c, p)| p * sum(c.members.iter().map(|m| m.count_ones() as f64))))
    }
}

/// `−(1/n²) Σ m_c p_c ln p_c`.
pub fn block_entropy_term(dist: &BlockDistribution) -> f64 {
    let n2 = (dist.n() * dist.n()) as f64;
    let h =
        sum(dist.family.classes().iter().zip(&dist.probs).map(|(c, &p)| -(c.multiplicity as f64) * xlnx(p)));
    h / n2
}

/// Unforced fraction of odd sites.
pub fn unforced_odd_density(dist: &BlockDistribution) -> f64 {
    BlockObjective::new(dist.family.clone()).unforced(&dist.probs)
}

pub fn block_bound(dist: &BlockDistribution) -> BoundReport {
    let u = unforced_odd_density(dist);
    let n2 = (dist.n() * dist.n()) as f64;
    BoundReport {
        scheme: Scheme::Block(dist.n()),
        value: 0.5 * (block_entropy_term(dist) + u * LN_2),
        params: dist.probs.clone(),
        densities: vec![dist.mean_ones() / n2, u / 2.0],
    }
}

/// The block bound as a function of class probabilities, with analytic gradient.
#[derive(Debug, Clone)]
pub struct BlockObjective {
    family: Arc<BlockFamily>,
    maps: MarginalMaps,
    weights: Vec<f64>,
}

impl BlockObjective {
    pub fn new(family: Arc<BlockFamily>) -> Self {
        let maps = MarginalMaps::new(&family);
        let weights = family.multiplicities();
        BlockObjective { family, maps, weights }
    }

    pub fn family(&self) -> &Arc<BlockFamily> {
        &self.family
    }

    /// Simplex with the class multiplicities as weights.
    pub fn domain(&self) -> Domain {
        Domain::new(vec![Component::Simplex { weights: self.weights.clone() }])
            .unwrap_or_else(|_| unreachable!("multiplicities are positive"))
    }

    fn unforced(&self, p: &[f64]) -> f64 {
        let m = self.maps.apply(p);
        let n2 = (self.family.n() * self.family.n()) as f64;
        let edges = m.right.iter().zip(&m.left).chain(m.bottom.iter().zip(&m.top));
        let total = sum(m.interior.iter().copied().chain(edges.map(|(a, b)| a * b)))
            + m.corners.iter().product::<f64>();
        total / n2
    }
}

impl Objective for BlockObjective {
    fn value(&self, p: &[f64]) -> f64 {
        let n2 = (self.family.n() * self.family.n()) as f64;
        let h = sum(self.weights.iter().zip(p).map(|(w, &x)| -w * xlnx(x)));
        0.5 * (h / n2 + self.unforced(p) * LN_2)
    }

    fn gradient(&self, p: &[f64], g: &mut [f64]) -> bool {
        let n2 = (self.family.n() * self.family.n()) as f64;
        let m = self.maps.apply(p);
        // d/dp of u · n²
        let mut du = vec![0.0; p.len()];
        let mut add = |coeff: &[f64], scale: f64| {
            for (d, c) in du.iter_mut().zip(coeff) {
                *d += scale * c;
            }
        };
        for c in &self.maps.interior {
            add(c, 1.0);
        }
        for k in 0..m.right.len() {
            add(&self.maps.right[k], m.left[k]);
            add(&self.maps.left[k], m.right[k]);
            add(&self.maps.bottom[k], m.top[k]);
            add(&self.maps.top[k], m.bottom[k]);
        }
        for k in 0..4 {
            let others: f64 = (0..4).filter(|&j| j != k).map(|j| m.corners[j]).product();
            add(&self.maps.corners[k], others);
        }
        for (i, gi) in g.iter_mut().enumerate() {
            let dh = if p[i] > 0.0 { -self.weights[i] * (ln(p[i]) + 1.0) } else { f64::INFINITY };
            *gi = 0.5 * (dh / n2 + du[i] / n2 * LN_2);
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOptimum {
    pub distribution: BlockDistribution,
    pub report: BoundReport,
    pub result: OptimizationResult,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockOptions {
    /// Warm start (must be over the same family).
    pub warm_start: Option<BlockDistribution>,
    /// Drop classes whose warm-start arrangement probability is below this
    /// threshold, fixing them at 0. Requires a warm start.
    pub prune_below: Option<f64>,
}

/// Builds the weak-reduced family for `n` (1 ≤ n ≤ 4).
pub fn reduced_family(n: usize) -> Result<Arc<BlockFamily>> {
    Ok(Arc::new(BlockFamily::build(n, Reduction::D4Weak)?))
}

pub fn optimize_block(n: usize, settings: &Settings) -> Result<BlockOptimum> {
    optimize_family(reduced_family(n)?, settings, &BlockOptions::default())
}

pub fn optimize_family(
    family: Arc<BlockFamily>,
    settings: &Settings,
    options: &BlockOptions,
) -> Result<BlockOptimum> {
    let objective = BlockObjective::new(family.clone());
    if let Some(w) = &options.warm_start {
        if w.family.as_ref() != family.as_ref() {
            return Err(Error::Invalid("warm start is over a different block family".into()));
        }
    }
    let (probs, result) = match (&options.warm_start, options.prune_below) {
        (None, Some(_)) => return Err(Error::Invalid("pruning needs a warm start".into())),
        (None, None) => {
            let r = maximize(&objective, &objective.domain(), settings)?;
            (r.argmax.clone(), r)
        }
        (Some(w), None) => {
            let r = maximize_from(&objective, &objective.domain(), settings, &w.probs)?;
            (r.argmax.clone(), r)
        }
        (Some(w), Some(threshold)) => {
            let keep: Vec<usize> = (0..w.probs.len()).filter(|&c| w.probs[c] >= threshold).collect();
            if keep.is_empty() {
                return Err(Error::Invalid("pruning removed every class".into()));
            }
            let pruned = Pruned { inner: &objective, keep: &keep, full: w.probs.len() };
            let weights: Vec<f64> = keep.iter().map(|&c| objective.weights[c]).collect();
            let domain = Domain::new(vec![Component::Simplex { weights: weights.clone() }])?;
            let mass: f64 = keep.iter().map(|&c| objective.weights[c] * w.probs[c]).sum();
            let x0: Vec<f64> = keep.iter().map(|&c| w.probs[c] / mass).collect();
            let r = maximize_from(&pruned, &domain, settings, &x0)?;
            let full = pruned.expand(&r.argmax);
            (full, r)
        }
    };
    let distribution = BlockDistribution::new(family, probs)?;
    let report = block_bound(&distribution);
    Ok(BlockOptimum { distribution, report, result })
}

struct Pruned<'a> {
    inner: &'a BlockObjective,
    keep: &'a [usize],
    full: usize,
}

impl Pruned<'_> {
    fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.full];
        for (&c, &v) in self.keep.iter().zip(x) {
            p[c] = v;
        }
        p
    }
}

impl Objective for Pruned<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.expand(x))
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> bool {
        let p = self.expand(x);
        let mut full = vec![0.0; self.full];
        self.inner.gradient(&p, &mut full);
        for (gi, &c) in g.iter_mut().zip(self.keep) {
            *gi = full[c];
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub smaller: usize,
    pub larger: usize,
    pub strictness: Strictness,
    pub p_smaller: f64,
    pub p_larger: f64,
}

/// Inclusion pairs whose probabilities contradict the predicted order. `tol`
/// is relative to the larger of the two probabilities.
pub fn check_monotonicity(dist: &BlockDistribution, tol: f64) -> Vec<MonotonicityViolation> {
    let p = &dist.probs;
    inclusion_pairs(&dist.family)
        .into_iter()
        .filter_map(|pair| {
            let (a, b) = (p[pair.smaller], p[pair.larger]);
            let slack = tol * a.max(b);
            let bad = match pair.strictness {
                Strictness::Strict => a <= b - slack && pair.smaller != pair.larger,
                Strictness::Equal => (a - b).abs() > slack,
            };
            bad.then_some(MonotonicityViolation {
                smaller: pair.smaller,
                larger: pair.larger,
                strictness: pair.strictness,
                p_smaller: a,
                p_larger: b,
            })
        })
        .collect()
}

/// Source of block statistics for a density profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Independent Bernoulli(p) even sites.
    Bernoulli(f64),
    /// Independent copies of an m×m block distribution tiling the sublattice.
    Blocks(BlockDistribution),
}

impl Generator {
    pub fn label(&self) -> String {
        use alloc::format;
        match self {
            Generator::Bernoulli(p) => format!("bernoulli({p})"),
            Generator::Blocks(d) => format!("{}x{}", d.n(), d.n()),
        }
    }
}

/// Distribution of the number of 1's in an n×n window.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub n: usize,
    /// Entry `k` is the probability of exactly `k` ones, `k = 0..=n²`.
    pub occupancy: Vec<f64>,
    pub generator: String,
}

impl DensityProfile {
    pub fn total(&self) -> f64 {
        sum(self.occupancy.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        sum(self.occupancy.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        sum(self.occupancy.iter().enumerate().map(|(k, p)| (k as f64 - mu) * (k as f64 - mu) * p))
    }
}

/// Occupancy profile of an n×n window. For a block generator of size m < n the
/// window is placed over the m×m tiling at each of the m² offsets and the
/// resulting distributions are averaged.
pub fn density_profile(n: usize, generator: &Generator) -> Result<DensityProfile> {
    if n == 0 {
        return Err(Error::BlockSize { n, max: crate::blocks::MAX_ENUMERATED });
    }
    let cells = n * n;
    let occupancy = match generator {
        Generator::Bernoulli(p) => {
            let p = crate::bounds::BernoulliParam::new(*p)?.get();
            let mut dist = vec![1.0];
            for _ in 0..cells {
                dist = convolve(&dist, &[1.0 - p, p]);
            }
            dist
        }
        Generator::Blocks(d) => {
            let m = d.n();
            if m > n {
                return Err(Error::Invalid("generator blocks are larger than the window".into()));
            }
            let mut acc = vec![0.0; cells + 1];
            for ox in 0..m {
                for oy in 0..m {
                    let w = window_profile(d, n, ox, oy);
                    for (a, v) in acc.iter_mut().zip(w) {
                        *a += v / (m * m) as f64;
                    }
                }
            }
            acc
        }
    };
    Ok(DensityProfile { n, occupancy, generator: generator.label() })
}

/// Window `[oy, oy+n) × [ox, ox+n)` in tiling coordinates, tiles of side m at
/// multiples of m.
fn window_profile(d: &BlockDistribution, n: usize, ox: usize, oy: usize) -> Vec<f64> {
    let m = d.n();
    let mut dist = vec![1.0];
    let tiles = |o: usize| (o / m)..=((o + n - 1) / m);
    for ti in tiles(oy) {
        for tj in tiles(ox) {
            let mut region: Mask = 0;
            for i in 0..m {
                for j in 0..m {
                    let (gi, gj) = (ti * m + i, tj * m + j);
                    if (oy..oy + n).contains(&gi) && (ox..ox + n).contains(&gj) {
                        region |= 1 << (i * m + j);
                    }
                }
            }
            let mut local = vec![0.0; region.count_ones() as usize + 1];
            for (c, class) in d.family.classes().iter().enumerate() {
                for &mask in &class.members {
                    local[(mask & region).count_ones() as usize] += d.probs[c];
                }
            }
            dist = convolve(&dist, &local);
        }
    }
    dist
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Smallest `k*` such that `upper[k] ≥ lower[k]` for every `k ≥ k*`; the
/// crossing lies between `k* − 1` and `k*`. `None` when `upper` dominates
/// everywhere or the profiles have different lengths.
pub fn profile_crossing(upper: &DensityProfile, lower: &DensityProfile) -> Option<(usize, usize)> {
    if upper.occupancy.len() != lower.occupancy.len() {
        return None;
    }
    let len = upper.occupancy.len();
    let mut k = len;
    while k > 0 && upper.occupancy[k - 1] >= lower.occupancy[k - 1] {
        k -= 1;
    }
    (k > 0 && k < len).then(|| (k - 1, k))
}

/// Seeds an (n+1)×(n+1) distribution from an n×n one: the top-left n×n
/// subblock follows `opt` and the 2n+1 frame sites are Bernoulli at the n×n
/// even density; the result is averaged over each class of `target`.
pub fn extend_distribution(opt: &BlockDistribution, target: Arc<BlockFamily>) -> Result<BlockDistribution> {
    let n = opt.n();
    let big = n + 1;
    if target.n() != big {
        return Err(Error::Invalid("target family must be one size larger".into()));
    }
    let p = opt.mean_ones() / (n * n) as f64;
    let sub_of = |mask: Mask| -> (Mask, u32) {
        let mut sub = 0;
        for i in 0..n {
            for j in 0..n {
                if mask >> (i * big + j) & 1 == 1 {
                    sub |= 1 << (i * n + j);
                }
            }
        }
        (sub, mask.count_ones() - sub.count_ones())
    };
    let frame = (2 * n + 1) as i32;
    let probs = target
        .classes()
        .iter()
        .map(|c| {
            sum(c.members.iter().map(|&mask| {
                let (sub, k) = sub_of(mask);
                let k = k as i32;
                opt.mask_probability(sub) * crate::math::powi(p, k) * crate::math::powi(1.0 - p, frame - k)
            })) / c.multiplicity as f64
        })
        .collect();
    BlockDistribution::new(target, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bound_bipartite, BernoulliParam};
    use crate::math::h_bernoulli;
    use crate::optimize::finite_difference_gradient_check;

    fn family(n: usize) -> Arc<BlockFamily> {
        reduced_family(n).unwrap()
    }

    #[test]
    fn one_by_one_is_the_bipartite_bound() {
        let f = family(1);
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let d = BlockDistribution::new(f.clone(), vec![1.0 - p, p]).unwrap();
            let closed = bound_bipartite(BernoulliParam::new(p).unwrap(), 4).unwrap();
            assert!((block_bound(&d).value - closed.value).abs() < 1e-12);
            assert!((block_entropy_term(&d) - h_bernoulli(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_on_empty_block() {
        let f = family(3);
        let mut probs = vec![0.0; f.class_count()];
        probs[0] = 1.0;
        let d = BlockDistribution::new(f, probs).unwrap();
        assert_eq!(block_entropy_term(&d), 0.0);
        assert!((unforced_odd_density(&d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_matches_closed_forms() {
        let f = Arc::new(BlockFamily::build(2, Reduction::D4).unwrap());
        let raw = [0.2, 0.08, 0.05, 0.04, 0.02, 0.04];
        let mult = [1.0, 4.0, 4.0, 2.0, 4.0, 1.0];
        let norm: f64 = raw.iter().zip(mult).map(|(a, b)| a * b).sum();
        let q: Vec<f64> = raw.iter().map(|v| v / norm).collect();
        let mut probs = vec![0.0; 6];
        for (id, c) in f.classes().iter().enumerate() {
            let m = c.representative.mask();
            probs[id] = match m.count_ones() {
                0 => q[0],
                1 => q[1],
                2 if m == 0b0110 || m == 0b1001 => q[3],
                2 => q[2],
                3 => q[4],
                _ => q[5],
            };
        }
        let d = BlockDistribution::new(f, probs).unwrap();
        let (p0, p1, p21, p22, p3, p4) = (q[0], q[1], q[2], q[3], q[4], q[5]);
        let u = 0.25
            * (p0 + 2.0 * (p0 + 2.0 * p1 + p21).powi(2) + (p0 + 3.0 * p1 + 2.0 * p21 + p22 + p3).powi(4));
        let h = -0.25
            * (p0 * p0.ln()
                + 4.0 * p1 * p1.ln()
                + 4.0 * p21 * p21.ln()
                + 2.0 * p22 * p22.ln()
                + 4.0 * p3 * p3.ln()
                + p4 * p4.ln());
        assert!((unforced_odd_density(&d) - u).abs() < 1e-14);
        assert!((block_entropy_term(&d) - h).abs() < 1e-14);
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        for n in 1..=3 {
            let f = family(n);
            let obj = BlockObjective::new(f.clone());
            let d = BlockDistribution::bernoulli(f, 0.2).unwrap();
            let err = finite_difference_gradient_check(&obj, d.probs(), 1e-7).unwrap();
            assert!(err < 1e-4, "n = {n}: {err}");
        }
    }

    #[test]
    fn bernoulli_blocks_reproduce_the_single_site_bound() {
        // independent sites give the same measure whatever the block size
        let p = 0.17;
        let closed = bound_bipartite(BernoulliParam::new(p).unwrap(), 4).unwrap().value;
        for n in 2..=3 {
            let f = Arc::new(BlockFamily::build(n, Reduction::D4).unwrap());
            let d = BlockDistribution::bernoulli(f, p).unwrap();
            assert!((block_bound(&d).value - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn one_and_two_by_two_optima() {
        let s = Settings { starts: 4, ..Settings::default() };
        let one = optimize_block(1, &s).unwrap();
        assert!((one.report.value - 0.392421).abs() < 1e-5);
        let two = optimize_block(2, &s).unwrap();
        assert!((two.report.value - 0.39877).abs() < 2e-4);
        assert!((two.report.densities[0] - 0.1993).abs() < 5e-3);
        assert!((two.report.densities[1] - 0.2254).abs() < 5e-3);
        assert!(check_monotonicity(&two.distribution, 1e-6).is_empty());
    }

    #[test]
    fn adversarial_distribution_violates_monotonicity() {
        let f = family(2);
        let full = f.class_of(0b1111);
        let mut probs = vec![0.0; f.class_count()];
        probs[0] = 0.1;
        probs[full] = 0.9;
        let d = BlockDistribution::new(f, probs).unwrap();
        let v = check_monotonicity(&d, 1e-6);
        assert!(v.iter().any(|x| x.smaller == 0 && x.larger == full));
    }

    #[test]
    fn bernoulli_profile_is_binomial() {
        let p = 0.1702;
        let prof = density_profile(3, &Generator::Bernoulli(p)).unwrap();
        assert!((prof.occupancy[0] - (1.0 - p).powi(9)).abs() < 1e-15);
        assert!((prof.occupancy[0] - 0.1866).abs() < 1e-4);
        assert!((prof.total() - 1.0).abs() < 1e-12);
        assert!((prof.mean() - 9.0 * p).abs() < 1e-12);
        // a 1×1 block generator is the same thing
        let one = BlockDistribution::new(family(1), vec![1.0 - p, p]).unwrap();
        let via_blocks = density_profile(3, &Generator::Blocks(one)).unwrap();
        for (a, b) in prof.occupancy.iter().zip(&via_blocks.occupancy) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_size_profile_preserves_density() {
        let f = family(2);
        let d = BlockDistribution::bernoulli(Arc::new(BlockFamily::build(2, Reduction::D4).unwrap()), 0.3)
            .unwrap();
        let prof = density_profile(3, &Generator::Blocks(d)).unwrap();
        assert!((prof.total() - 1.0).abs() < 1e-12);
        assert!((prof.mean() - 2.7).abs() < 1e-12);
        let u = BlockDistribution::uniform(f);
        let prof = density_profile(3, &Generator::Blocks(u)).unwrap();
        assert!((prof.mean() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn crossing_detection() {
        let mk = |v: Vec<f64>| DensityProfile { n: 1, occupancy: v, generator: String::new() };
        let a = mk(vec![0.2, 0.3, 0.5]);
        let b = mk(vec![0.4, 0.4, 0.2]);
        assert_eq!(profile_crossing(&a, &b), Some((1, 2)));
        assert_eq!(profile_crossing(&a, &a), None);
    }

    #[test]
    fn extension_is_a_product_measure() {
        let one = BlockDistribution::new(family(1), vec![0.8, 0.2]).unwrap();
        let f2 = Arc::new(BlockFamily::build(2, Reduction::D4).unwrap());
        let ext = extend_distribution(&one, f2.clone()).unwrap();
        let bern = BlockDistribution::bernoulli(f2, 0.2).unwrap();
        for (a, b) in ext.probs().iter().zip(bern.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let two = BlockDistribution::uniform(family(2));
        let ext = extend_distribution(&two, family(3)).unwrap();
        assert!((ext.probs()[0] - 1.0 / 16.0 * 0.5f64.powi(5)).abs() < 1e-15);
    }

    #[test]
    fn pruning_requires_warm_start() {
        let opts = BlockOptions { warm_start: None, prune_below: Some(1e-3) };
        assert!(optimize_family(family(2), &Settings::default(), &opts).is_err());
    }
}
