//! Independent checks for the bounds: transfer matrices, Monte Carlo fill-in
//! samplers, exact enumeration of local windows and the blocking-constant
//! density interval.
//!
//! None of these routines call the closed-form bound formulas.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::block_bound::BlockDistribution;
use crate::lattice::{
    build_lattice, infinite_neighbors, sublattice_of, LatticeKind, Site, Torus, TorusConfiguration,
};
use crate::math::{h_bernoulli, ln, sqrt, LN_2};
use crate::{Error, Result};

/// Largest strip width for [`strip_entropy`].
pub const MAX_STRIP_WIDTH: usize = 14;
/// Largest window for exhaustive enumeration.
pub const MAX_WINDOW: usize = 24;

/// Entropy of the one-dimensional hard-core shift, from the 2×2 transfer matrix.
pub fn entropy_1d() -> f64 {
    ln(golden_eigenvalue())
}

/// Largest eigenvalue of `[[1, 1], [1, 0]]`.
pub fn golden_eigenvalue() -> f64 {
    let (a, b, c, d) = (1.0, 1.0, 1.0, 0.0);
    let tr: f64 = a + d;
    let det: f64 = a * d - b * c;
    (tr + sqrt(tr * tr - 4.0 * det)) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Free,
    /// The column wraps; widths 1 and 2 coincide with `Free`.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StripSpec {
    pub width: usize,
    pub boundary: Boundary,
}

impl StripSpec {
    pub fn new(width: usize, boundary: Boundary) -> Result<Self> {
        if width == 0 {
            return Err(Error::Invalid("strip width must be at least 1".into()));
        }
        if width > MAX_STRIP_WIDTH {
            return Err(Error::ResourceLimit { what: "strip width", limit: MAX_STRIP_WIDTH });
        }
        Ok(StripSpec { width, boundary })
    }

    /// Column states with no two vertically adjacent 1's.
    pub fn legal_columns(&self) -> Vec<u32> {
        let w = self.width;
        (0..1u32 << w)
            .filter(|&c| {
                c & (c >> 1) == 0
                    && !(self.boundary == Boundary::Periodic && w >= 3 && c & 1 == 1 && c >> (w - 1) & 1 == 1)
            })
            .collect()
    }
}

/// `ln(λ_max) / width` of the column transfer matrix, where two legal columns
/// are compatible when they share no 1 in the same row.
pub fn strip_entropy(spec: StripSpec) -> Result<f64> {
    let spec = StripSpec::new(spec.width, spec.boundary)?;
    let w = spec.width;
    let full = (1usize << w) - 1;
    let legal = spec.legal_columns();
    let mut v = vec![0.0; full + 1];
    for &c in &legal {
        v[c as usize] = 1.0;
    }
    let mut lambda = 0.0;
    let mut g = vec![0.0; full + 1];
    for _ in 0..100_000 {
        // (T v)[a] = Σ_{legal b ⊆ ¬a} v[b], via a subset-sum transform
        g.copy_from_slice(&v);
        for bit in 0..w {
            for s in 0..=full {
                if s >> bit & 1 == 1 {
                    g[s] += g[s ^ (1 << bit)];
                }
            }
        }
        let mut next = vec![0.0; full + 1];
        for &a in &legal {
            next[a as usize] = g[full & !(a as usize)];
        }
        // Rayleigh quotient of a symmetric matrix
        let num: f64 = legal.iter().map(|&a| v[a as usize] * next[a as usize]).sum();
        let den: f64 = legal.iter().map(|&a| v[a as usize] * v[a as usize]).sum();
        let est = num / den;
        let norm = sqrt(legal.iter().map(|&a| next[a as usize] * next[a as usize]).sum());
        for x in next.iter_mut() {
            *x /= norm;
        }
        v = next;
        if (est - lambda).abs() <= 1e-13 * est {
            return Ok(ln(est) / w as f64);
        }
        lambda = est;
    }
    Ok(ln(lambda) / w as f64)
}

/// Literature values of the entropy and the 1-density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConstant {
    pub entropy: f64,
    pub density: f64,
}

pub struct ReferenceConstants;

impl ReferenceConstants {
    pub const SQUARE: ReferenceConstant = ReferenceConstant { entropy: 0.4075, density: 0.2266 };
    pub const HONEYCOMB: ReferenceConstant = ReferenceConstant { entropy: 0.4360, density: 0.2424 };
    pub const TRIANGULAR: ReferenceConstant = ReferenceConstant { entropy: 0.3332, density: 0.1624 };

    pub fn for_lattice(kind: LatticeKind) -> Option<ReferenceConstant> {
        match kind {
            LatticeKind::Square => Some(Self::SQUARE),
            LatticeKind::Honeycomb => Some(Self::HONEYCOMB),
            LatticeKind::Triangular => Some(Self::TRIANGULAR),
            _ => None,
        }
    }
}

/// Mean and batch-means standard error of one per-stage statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_batches(hits: &[usize], totals: &[usize]) -> Self {
        let n: usize = totals.iter().sum();
        let mean = hits.iter().sum::<usize>() as f64 / n as f64;
        let means: Vec<f64> =
            hits.iter().zip(totals).filter(|(_, &t)| t > 0).map(|(&h, &t)| h as f64 / t as f64).collect();
        let b = means.len() as f64;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1.0).max(1.0);
        Estimate { mean, stderr: sqrt(var / b) }
    }

    /// `|mean − target| ≤ k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageStats {
    pub stage: usize,
    pub n_sites: usize,
    /// Fraction of the stage's sites with no 1 among earlier-stage neighbors.
    pub unforced: Estimate,
    /// Fraction of the stage's sites carrying a 1.
    pub density: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub configuration: TorusConfiguration,
    pub stages: Vec<StageStats>,
}

/// Number of row stripes used as batches for standard errors.
pub const BATCHES: usize = 64;

/// Fill-in sampler on a fixed torus; the adjacency is computed once.
#[derive(Debug, Clone)]
pub struct FillInSampler {
    torus: Torus,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    labels: Vec<u8>,
    stages: usize,
    batch: Vec<u16>,
}

impl FillInSampler {
    pub fn new(torus: Torus) -> Self {
        let adj = torus.adjacency();
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for list in &adj {
            neighbors.extend(list.iter().map(|&j| j as u32));
            offsets.push(neighbors.len());
        }
        let labels = torus.sublattice_labels();
        let batches = BATCHES.min(torus.height());
        let batch = (0..torus.site_count())
            .map(|i| (torus.site(i).y as usize * batches / torus.height()) as u16)
            .collect();
        let stages = build_lattice(torus.kind()).partite_count;
        FillInSampler { torus, offsets, neighbors, labels, stages, batch }
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    /// One sample. `stage_probs` holds one probability per sublattice in fill
    /// order, the last one included. Stage `s` draws from the ChaCha8 stream
    /// `s` of the seeded generator, visiting sites in index order.
    pub fn sample(&self, stage_probs: &[f64], seed: u64) -> Result<Sample> {
        if stage_probs.len() != self.stages {
            return Err(Error::Arity { expected: self.stages, got: stage_probs.len() });
        }
        check_probs(stage_probs)?;
        self.run(None, stage_probs, seed)
    }

    /// Circle sublattice filled by three-hexes distributed by `pvec` (one
    /// draw per tile, tiles in the index order of their center dots), later
    /// stages as in [`FillInSampler::sample`]. `later` holds the probabilities
    /// of stages 1.., the last one included.
    pub fn sample_three_hex(&self, pvec: [f64; 4], later: &[f64], seed: u64) -> Result<Sample> {
        if later.len() + 1 != self.stages {
            return Err(Error::Arity { expected: self.stages - 1, got: later.len() });
        }
        check_probs(later)?;
        check_probs(&pvec)?;
        let kind = self.torus.kind();
        if !self.torus.width().is_multiple_of(3) {
            return Err(Error::BadDimensions {
                width: self.torus.width(),
                height: self.torus.height(),
                reason: "three-hex tilings need a width divisible by 3",
            });
        }
        let mut tiles = Vec::new();
        for i in 0..self.labels.len() {
            let site = self.torus.site(i);
            if self.labels[i] == 1 && is_three_hex_center(kind, site)? {
                let tile = three_hex_tile(kind, site)?;
                let mut idx = [0u32; 3];
                for (k, c) in tile.iter().enumerate() {
                    idx[k] = self.torus.index(self.torus.wrap(*c))? as u32;
                }
                tiles.push(idx);
            }
        }
        let mut probs = vec![0.0];
        probs.extend_from_slice(later);
        self.run(Some((&tiles, pvec)), &probs, seed)
    }

    fn run(&self, tiles: Option<(&[[u32; 3]], [f64; 4])>, stage_probs: &[f64], seed: u64) -> Result<Sample> {
        let n = self.labels.len();
        let batches = BATCHES.min(self.torus.height());
        let mut values = vec![0u8; n];
        let mut stats = Vec::with_capacity(self.stages);
        for (stage, &p) in stage_probs.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stage as u64);
            if let (0, Some((tiles, pvec))) = (stage, tiles) {
                let mut cumulative = [0.0; 8];
                let mut acc = 0.0;
                for (mask, c) in cumulative.iter_mut().enumerate() {
                    acc += pvec[(mask as u32).count_ones() as usize];
                    *c = acc;
                }
                for tile in tiles {
                    let u: f64 = rng.random::<f64>() * acc;
                    let mask = cumulative.partition_point(|&c| c <= u).min(7);
                    for (k, &i) in tile.iter().enumerate() {
                        values[i as usize] = (mask >> k & 1) as u8;
                    }
                }
            }
            let mut totals = vec![0usize; batches];
            let mut free = vec![0usize; batches];
            let mut ones = vec![0usize; batches];
            for i in 0..n {
                if self.labels[i] as usize != stage {
                    continue;
                }
                let b = self.batch[i] as usize;
                totals[b] += 1;
                if tiles.is_some() && stage == 0 {
                    free[b] += 1;
                    ones[b] += values[i] as usize;
                    continue;
                }
                let nb = &self.neighbors[self.offsets[i]..self.offsets[i + 1]];
                let blocked =
                    nb.iter().any(|&j| (self.labels[j as usize] as usize) < stage && values[j as usize] == 1);
                // one draw per site keeps the stream aligned with the site order
                let u: f64 = rng.random();
                if !blocked {
                    free[b] += 1;
                    if u < p {
                        values[i] = 1;
                        ones[b] += 1;
                    }
                }
            }
            stats.push(StageStats {
                stage,
                n_sites: totals.iter().sum(),
                unforced: Estimate::from_batches(&free, &totals),
                density: Estimate::from_batches(&ones, &totals),
            });
        }
        let configuration = TorusConfiguration::from_values(self.torus, values)?;
        Ok(Sample { configuration, stages: stats })
    }
}

fn check_probs(probs: &[f64]) -> Result<()> {
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain { name: "stage probability", value: p, expected: "[0, 1]" });
        }
    }
    Ok(())
}

fn three_hex_kind(kind: LatticeKind) -> Result<()> {
    match kind {
        LatticeKind::Honeycomb | LatticeKind::Triangular => Ok(()),
        _ => Err(Error::Invalid("three-hexes are defined on the honeycomb and triangular lattices".into())),
    }
}

/// Circle three-hexes are the circle neighbors of the center dots, the dots
/// with `x ≡ 0 (mod 3)`. The three dot neighbors of any circle have distinct
/// `x mod 3`, so the tiles partition the circle sublattice.
pub fn is_three_hex_center(kind: LatticeKind, site: Site) -> Result<bool> {
    three_hex_kind(kind)?;
    Ok(stage_of(kind, site) == 1 && site.x.rem_euclid(3) == 0)
}

/// The three circles of the three-hex around `center`, sorted; bit `k` of an
/// arrangement mask refers to entry `k`.
pub fn three_hex_tile(kind: LatticeKind, center: Site) -> Result<Vec<Site>> {
    if !is_three_hex_center(kind, center)? {
        return Err(Error::Invalid("not a three-hex center".into()));
    }
    let mut tile: Vec<Site> =
        infinite_neighbors(kind, center).into_iter().filter(|&s| stage_of(kind, s) == 0).collect();
    tile.sort();
    Ok(tile)
}

/// Center dot of the three-hex containing a circle site.
pub fn three_hex_center(kind: LatticeKind, circle: Site) -> Result<Site> {
    three_hex_kind(kind)?;
    if stage_of(kind, circle) != 0 {
        return Err(Error::Invalid("not a circle site".into()));
    }
    for d in infinite_neighbors(kind, circle) {
        if is_three_hex_center(kind, d)? {
            return Ok(d);
        }
    }
    Err(Error::Invalid("circle has no center dot".into()))
}

/// One-shot fill-in sample on a `dims` torus.
pub fn fill_in_sample(
    kind: LatticeKind,
    stage_probs: &[f64],
    dims: (usize, usize),
    seed: u64,
) -> Result<Sample> {
    FillInSampler::new(Torus::new(kind, dims.0, dims.1)?).sample(stage_probs, seed)
}

/// Stage probabilities with a fair last stage.
pub fn fair_last_stage(params: &[f64]) -> Vec<f64> {
    let mut v = params.to_vec();
    v.push(0.5);
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TilingStats {
    pub even_density: Estimate,
    pub unforced_odd: Estimate,
}

/// Tiles a periodic `(n·blocks)²` even sublattice with independent blocks
/// drawn from `dist` and measures the 1-density and the fraction of odd sites
/// (plaquette centers) whose four even neighbors are all 0.
pub fn sample_block_tiling(dist: &BlockDistribution, blocks: usize, seed: u64) -> Result<TilingStats> {
    if blocks == 0 {
        return Err(Error::Invalid("need at least one block per side".into()));
    }
    let n = dist.n();
    let side = n * blocks;
    let masks = 1usize << (n * n);
    let mut cumulative = Vec::with_capacity(masks);
    let mut acc = 0.0;
    for m in 0..masks {
        acc += dist.mask_probability(m as u32);
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = vec![0u8; side * side];
    for bi in 0..blocks {
        for bj in 0..blocks {
            let u: f64 = rng.random::<f64>() * acc;
            let mask = cumulative.partition_point(|&c| c <= u).min(masks - 1);
            for pos in 0..n * n {
                grid[(bi * n + pos / n) * side + bj * n + pos % n] = (mask >> pos & 1) as u8;
            }
        }
    }
    let batches = BATCHES.min(side);
    let mut totals = vec![0usize; batches];
    let mut ones = vec![0usize; batches];
    let mut free = vec![0usize; batches];
    for i in 0..side {
        let b = i * batches / side;
        for j in 0..side {
            totals[b] += 1;
            ones[b] += grid[i * side + j] as usize;
            let (i2, j2) = ((i + 1) % side, (j + 1) % side);
            let any = grid[i * side + j] | grid[i2 * side + j] | grid[i * side + j2] | grid[i2 * side + j2];
            free[b] += (any == 0) as usize;
        }
    }
    Ok(TilingStats {
        even_density: Estimate::from_batches(&ones, &totals),
        unforced_odd: Estimate::from_batches(&free, &totals),
    })
}

fn stage_of(kind: LatticeKind, site: Site) -> usize {
    sublattice_of(kind, site).index()
}

fn earlier_neighbors(kind: LatticeKind, site: Site) -> Vec<Site> {
    let s = stage_of(kind, site);
    infinite_neighbors(kind, site).into_iter().filter(|&x| stage_of(kind, x) < s).collect()
}

/// A site of the given fill stage near the origin.
pub fn stage_site(kind: LatticeKind, stage: usize) -> Result<Site> {
    let k = build_lattice(kind).partite_count;
    if stage >= k {
        return Err(Error::Invalid("stage index exceeds the number of sublattices".into()));
    }
    for cell in 0..kind.cell_sites() as u8 {
        for y in 0..3 {
            for x in 0..3 {
                let s = Site::with_cell(x, y, cell);
                if stage_of(kind, s) == stage {
                    return Ok(s);
                }
            }
        }
    }
    Err(Error::Invalid("no site of this stage near the origin".into()))
}

/// Every earlier-stage site whose value can influence whether `target` is
/// unforced: the transitive closure of the earlier-neighbor relation.
pub fn dependency_window(kind: LatticeKind, target: Site) -> Vec<Site> {
    let mut seen = BTreeSet::new();
    let mut stack = earlier_neighbors(kind, target);
    while let Some(s) = stack.pop() {
        if seen.insert(s) {
            stack.extend(earlier_neighbors(kind, s));
        }
    }
    seen.into_iter().collect()
}

/// Probability that `target` is unforced, by enumerating every assignment of
/// `window` under the sequential measure. The window must contain the earlier
/// neighbors of the target and of each of its own sites.
pub fn window_probability_exhaustive(
    kind: LatticeKind,
    stage_probs: &[f64],
    target: Site,
    window: &[Site],
) -> Result<f64> {
    let k = build_lattice(kind).partite_count;
    if stage_probs.len() != k {
        return Err(Error::Arity { expected: k, got: stage_probs.len() });
    }
    enumerate_window(kind, stage_probs, None, target, window)
}

/// As [`window_probability_exhaustive`] for a three-hex scheme: circles come in
/// tiles distributed by `pvec`, and `later` holds the probabilities of stages
/// 1.., the last one included. The window is completed to whole tiles.
pub fn three_hex_window_probability(
    kind: LatticeKind,
    pvec: [f64; 4],
    later: &[f64],
    target: Site,
) -> Result<f64> {
    three_hex_kind(kind)?;
    let k = build_lattice(kind).partite_count;
    if later.len() + 1 != k {
        return Err(Error::Arity { expected: k - 1, got: later.len() });
    }
    let mut window: BTreeSet<Site> = dependency_window(kind, target).into_iter().collect();
    let mut centers = BTreeSet::new();
    for s in &window {
        if stage_of(kind, *s) == 0 {
            centers.insert(three_hex_center(kind, *s)?);
        }
    }
    let tiles = centers.iter().map(|&c| three_hex_tile(kind, c)).collect::<Result<Vec<_>>>()?;
    for t in &tiles {
        window.extend(t.iter().copied());
    }
    let mut probs = vec![0.0];
    probs.extend_from_slice(later);
    let window: Vec<Site> = window.into_iter().collect();
    enumerate_window(kind, &probs, Some((&tiles, pvec)), target, &window)
}

fn enumerate_window(
    kind: LatticeKind,
    stage_probs: &[f64],
    tiles: Option<(&[Vec<Site>], [f64; 4])>,
    target: Site,
    window: &[Site],
) -> Result<f64> {
    if window.len() > MAX_WINDOW {
        return Err(Error::ResourceLimit { what: "window sites", limit: MAX_WINDOW });
    }
    let mut order: Vec<Site> = window.to_vec();
    order.sort_by_key(|&s| (stage_of(kind, s), s));
    order.dedup();
    let pos: BTreeMap<Site, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let lookup = |sites: Vec<Site>| -> Result<Vec<usize>> {
        sites
            .into_iter()
            .map(|s| pos.get(&s).copied().ok_or(Error::Invalid("window is not closed".into())))
            .collect()
    };
    let deps = order.iter().map(|&s| lookup(earlier_neighbors(kind, s))).collect::<Result<Vec<_>>>()?;
    let target_deps = lookup(earlier_neighbors(kind, target))?;
    let probs: Vec<f64> = order.iter().map(|&s| stage_probs[stage_of(kind, s)]).collect();
    let mut values = vec![false; order.len()];

    let Some((tiles, pvec)) = tiles else {
        return Ok(walk(0, &mut values, 1.0, &deps, &probs, &target_deps));
    };
    let tile_pos = tiles.iter().map(|t| lookup(t.clone())).collect::<Result<Vec<_>>>()?;
    let first_free = order.iter().take_while(|&&s| stage_of(kind, s) == 0).count();
    if tile_pos.iter().map(Vec::len).sum::<usize>() != first_free {
        return Err(Error::Invalid("window circles do not form whole tiles".into()));
    }
    let mut total = 0.0;
    for outcome in 0..1usize << (3 * tile_pos.len()) {
        let mut weight = 1.0;
        for (t, sites) in tile_pos.iter().enumerate() {
            let mask = outcome >> (3 * t) & 7;
            weight *= pvec[mask.count_ones() as usize];
            for (k, &i) in sites.iter().enumerate() {
                values[i] = mask >> k & 1 == 1;
            }
        }
        total += walk(first_free, &mut values, weight, &deps, &probs, &target_deps);
    }
    Ok(total)
}

fn walk(
    i: usize,
    values: &mut Vec<bool>,
    weight: f64,
    deps: &[Vec<usize>],
    probs: &[f64],
    target_deps: &[usize],
) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    if i == deps.len() {
        return if target_deps.iter().all(|&j| !values[j]) { weight } else { 0.0 };
    }
    if deps[i].iter().any(|&j| values[j]) {
        values[i] = false;
        return walk(i + 1, values, weight, deps, probs, target_deps);
    }
    values[i] = true;
    let one = walk(i + 1, values, weight * probs[i], deps, probs, target_deps);
    values[i] = false;
    let zero = walk(i + 1, values, weight * (1.0 - probs[i]), deps, probs, target_deps);
    one + zero
}

/// Unforced probability of a stage, over its full dependency window.
pub fn unforced_probability_exhaustive(kind: LatticeKind, stage_probs: &[f64], stage: usize) -> Result<f64> {
    let target = stage_site(kind, stage)?;
    let window = dependency_window(kind, target);
    window_probability_exhaustive(kind, stage_probs, target, &window)
}

/// Expected number of odd sites a lone 1 blocks under equal sharing, with its
/// eight second-shell even sites independent fair coins: each odd neighbor is
/// credited `1 / (1 + k)` where `k` counts its other even neighbors that carry a 1.
pub fn blocking_constant_lower() -> Ratio<i64> {
    let center = Site::new(0, 0);
    let odd = infinite_neighbors(LatticeKind::Square, center);
    let shell: Vec<Site> = odd
        .iter()
        .flat_map(|&o| infinite_neighbors(LatticeKind::Square, o))
        .filter(|&s| s != center)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let configs = 1i64 << shell.len();
    let mut total = Ratio::from_integer(0);
    for m in 0..configs {
        for &o in &odd {
            let k = infinite_neighbors(LatticeKind::Square, o)
                .into_iter()
                .filter(|s| shell.iter().position(|t| t == s).is_some_and(|i| m >> i & 1 == 1))
                .count() as i64;
            total += Ratio::new(1, 1 + k);
        }
    }
    total / configs
}

/// The root `c` of `½(h(1/(2+c)) + (2/(2+c)) ln 2) = h_ref` on `[0, 20]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingUpper {
    pub c_max: f64,
    pub rho_min: f64,
}

pub fn blocking_constant_upper(h_ref: f64) -> Result<BlockingUpper> {
    if !(h_ref > 0.0 && h_ref < LN_2) {
        return Err(Error::Domain { name: "h_ref", value: h_ref, expected: "(0, ln 2)" });
    }
    let f = |c: f64| {
        let rho = 1.0 / (2.0 + c);
        0.5 * (h_bernoulli(rho) + 2.0 * rho * LN_2) - h_ref
    };
    let (mut lo, mut hi) = (0.0, 20.0);
    if f(lo) * f(hi) > 0.0 {
        return Err(Error::NoRoot { lo, hi });
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c_max = 0.5 * (lo + hi);
    Ok(BlockingUpper { c_max, rho_min: 1.0 / (2.0 + c_max) })
}

/// Density interval `(1/(2 + c_max), 1/(2 + c_min))` for the even-site 1-density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityInterval {
    pub lower: f64,
    pub upper: Ratio<i64>,
}

pub fn density_interval(h_ref: f64) -> Result<DensityInterval> {
    let c = blocking_constant_lower();
    let upper = Ratio::from_integer(1) / (Ratio::from_integer(2) + c);
    Ok(DensityInterval { lower: blocking_constant_upper(h_ref)?.rho_min, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean() {
        assert!((golden_eigenvalue() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((entropy_1d() - 0.481_211_825_059_6).abs() < 1e-12);
        let w1 = strip_entropy(StripSpec::new(1, Boundary::Free).unwrap()).unwrap();
        assert!((w1 - entropy_1d()).abs() < 1e-12);
    }

    #[test]
    fn width_two_strip() {
        // states {00, 01, 10}: [[1,1,1],[1,0,1],[1,1,0]], λ = 1 + √2
        let e = strip_entropy(StripSpec::new(2, Boundary::Free).unwrap()).unwrap();
        assert!((e - (1.0 + 2f64.sqrt()).ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn strip_limits() {
        assert!(StripSpec::new(15, Boundary::Free).is_err());
        assert!(StripSpec::new(0, Boundary::Free).is_err());
        assert_eq!(StripSpec::new(4, Boundary::Free).unwrap().legal_columns().len(), 8);
        assert_eq!(StripSpec::new(4, Boundary::Periodic).unwrap().legal_columns().len(), 7);
    }

    #[test]
    fn blocking_constants() {
        assert_eq!(blocking_constant_lower(), Ratio::new(15, 8));
        let up = blocking_constant_upper(0.4075).unwrap();
        assert!((up.c_max - 2.6801).abs() < 1e-3);
        assert!((up.rho_min - 0.21367).abs() < 1e-4);
        let iv = density_interval(0.4075).unwrap();
        assert_eq!(iv.upper, Ratio::new(8, 31));
        assert!(blocking_constant_upper(0.05).is_err());
        assert!(blocking_constant_upper(0.8).is_err());
    }

    #[test]
    fn window_sizes() {
        let size = |k, s| dependency_window(k, stage_site(k, s).unwrap()).len();
        assert_eq!(size(LatticeKind::Square, 1), 4);
        assert_eq!(size(LatticeKind::Honeycomb, 1), 3);
        assert_eq!(size(LatticeKind::Triangular, 2), 9);
        assert_eq!(size(LatticeKind::Kagome, 2), 6);
        assert_eq!(size(LatticeKind::SquareMoore, 3), 16);
    }

    #[test]
    fn square_window_is_four_independent_sites() {
        let p = 0.3;
        let u = unforced_probability_exhaustive(LatticeKind::Square, &[p, 0.5], 1).unwrap();
        assert!((u - (1.0 - p).powi(4)).abs() < 1e-15);
    }

    #[test]
    fn open_window_is_rejected() {
        let target = stage_site(LatticeKind::Triangular, 2).unwrap();
        let mut w = dependency_window(LatticeKind::Triangular, target);
        w.pop();
        assert!(window_probability_exhaustive(LatticeKind::Triangular, &[0.1, 0.2, 0.5], target, &w).is_err());
    }

    #[test]
    fn sampler_respects_hard_core() {
        for kind in LatticeKind::ALL {
            let dims = if kind == LatticeKind::Triangular { (12, 12) } else { (8, 8) };
            let k = build_lattice(kind).partite_count;
            let s = fill_in_sample(kind, &vec![0.4; k], dims, 3).unwrap();
            assert!(s.configuration.verify_hard_core());
            assert_eq!(s.stages.len(), k);
        }
        assert!(fill_in_sample(LatticeKind::Square, &[0.1], (8, 8), 0).is_err());
    }

    #[test]
    fn three_hex_tiles_partition_the_circles() {
        for kind in [LatticeKind::Honeycomb, LatticeKind::Triangular] {
            for x in -6..6 {
                for y in -6..6 {
                    let s = Site::new(x, y);
                    if stage_of(kind, s) != 0 {
                        continue;
                    }
                    let c = three_hex_center(kind, s).unwrap();
                    let tile = three_hex_tile(kind, c).unwrap();
                    assert_eq!(tile.len(), 3);
                    assert!(tile.contains(&s));
                    let centers = infinite_neighbors(kind, s)
                        .into_iter()
                        .filter(|&d| is_three_hex_center(kind, d).unwrap())
                        .count();
                    assert_eq!(centers, 1);
                }
            }
        }
        assert!(is_three_hex_center(LatticeKind::Square, Site::new(0, 0)).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = fill_in_sample(LatticeKind::Kagome, &[0.2, 0.3, 0.5], (10, 10), 9).unwrap();
        let b = fill_in_sample(LatticeKind::Kagome, &[0.2, 0.3, 0.5], (10, 10), 9).unwrap();
        assert_eq!(a, b);
    }
}
