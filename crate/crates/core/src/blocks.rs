//! n×n blocks on the even sublattice of the square lattice.
//!
//! In even-sublattice coordinates a block is an n×n grid of positions `(i, j)`
//! (row `i`, column `j`); bit `i·n + j` of the mask is set when that site carries
//! a 1. Any mask is legal because even sites are never adjacent to each other.
//!
//! The odd sites around a block are the centers of the unit plaquettes of the
//! even grid. Plaquette `(a, b)` with `a, b ∈ -1..n` touches the positions
//! `(a, b), (a+1, b), (a, b+1), (a+1, b+1)` that fall inside the block. The
//! `(n-1)²` plaquettes with `0 ≤ a, b ≤ n-2` are interior; the rest straddle the
//! block boundary and are shared with neighboring blocks.
//!
//! A position `s` is *weak* in a block when every odd site it touches is already
//! touched by some other 1 of the block, so toggling `s` changes nothing about
//! which odd sites the block forces to 0. Corner positions always touch a corner
//! odd site that no other position reaches, so they are never weak.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type Mask = u32;

/// Largest block side accepted by [`enumerate_blocks`].
pub const MAX_ENUMERATED: usize = 5;
/// Largest block side for which [`BlockFamily::build`] runs.
pub const MAX_REDUCED: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    n: usize,
    mask: Mask,
}

impl Block {
    pub fn new(n: usize, mask: Mask) -> Result<Self> {
        check_size(n, MAX_ENUMERATED)?;
        if n * n < 32 && mask >> (n * n) != 0 {
            return Err(Error::Invalid("mask has bits outside the block".into()));
        }
        Ok(Block { n, mask })
    }

    pub fn from_positions(n: usize, ones: &[(usize, usize)]) -> Result<Self> {
        let mut mask = 0;
        for &(i, j) in ones {
            if i >= n || j >= n {
                return Err(Error::Invalid("position outside the block".into()));
            }
            mask |= 1 << (i * n + j);
        }
        Block::new(n, mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> Mask {
        self.mask
    }

    pub fn ones(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask >> (i * self.n + j) & 1 == 1
    }
}

fn check_size(n: usize, max: usize) -> Result<()> {
    if (1..=max).contains(&n) {
        Ok(())
    } else {
        Err(Error::BlockSize { n, max })
    }
}

/// All `2^(n²)` blocks, in increasing mask order.
pub fn enumerate_blocks(n: usize) -> Result<impl Iterator<Item = Block>> {
    check_size(n, MAX_ENUMERATED)?;
    let count: u64 = 1 << (n * n);
    Ok((0..count).map(move |m| Block { n, mask: m as Mask }))
}

pub fn is_corner(n: usize, pos: usize) -> bool {
    let (i, j) = (pos / n, pos % n);
    (i == 0 || i == n - 1) && (j == 0 || j == n - 1)
}

/// Position maps of the dihedral group of the square; element 0 is the identity.
#[derive(Debug, Clone)]
pub struct Symmetries {
    n: usize,
    perms: [Vec<u8>; 8],
}

impl Symmetries {
    pub fn new(n: usize) -> Self {
        let perms = core::array::from_fn(|k| {
            (0..n * n)
                .map(|pos| {
                    let (mut i, mut j) = (pos / n, pos % n);
                    for _ in 0..k % 4 {
                        (i, j) = (j, n - 1 - i);
                    }
                    if k >= 4 {
                        j = n - 1 - j;
                    }
                    (i * n + j) as u8
                })
                .collect()
        });
        Symmetries { n, perms }
    }

    pub fn apply(&self, k: usize, mask: Mask) -> Mask {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            let pos = m.trailing_zeros() as usize;
            out |= 1 << self.perms[k][pos];
            m &= m - 1;
        }
        out
    }

    pub fn images(&self, mask: Mask) -> [Mask; 8] {
        core::array::from_fn(|k| self.apply(k, mask))
    }

    pub fn canonical(&self, mask: Mask) -> Mask {
        self.images(mask).into_iter().min().unwrap_or(mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Smallest mask among the images of `b` under rotations and reflections.
pub fn d4_canonical(b: Block) -> Block {
    Block { n: b.n, mask: Symmetries::new(b.n).canonical(b.mask) }
}

/// Odd-site bookkeeping for one block size.
#[derive(Debug, Clone)]
pub struct OddGeometry {
    n: usize,
    /// Odd sites touched by each position, as a bitmask over plaquettes.
    touch: Vec<u64>,
}

impl OddGeometry {
    pub fn new(n: usize) -> Self {
        let side = n + 1;
        let touch = (0..n * n)
            .map(|pos| {
                let (i, j) = (pos / n, pos % n);
                // plaquettes (a, b) ∈ {i-1, i} × {j-1, j}, stored shifted by one
                let mut m = 0u64;
                for a in [i, i + 1] {
                    for b in [j, j + 1] {
                        m |= 1 << (a * side + b);
                    }
                }
                m
            })
            .collect();
        OddGeometry { n, touch }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Plaquette index of `(a, b)`, `a, b ∈ -1..n`.
    pub fn plaquette(&self, a: isize, b: isize) -> usize {
        ((a + 1) as usize) * (self.n + 1) + (b + 1) as usize
    }

    pub fn touched_by(&self, pos: usize) -> u64 {
        self.touch[pos]
    }

    /// Odd sites (interior and boundary) forced to 0 by the 1's of `mask`.
    pub fn forced(&self, mask: Mask) -> u64 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            out |= self.touch[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        out
    }

    /// Weak positions of `mask`, as a position bitmask.
    pub fn weak(&self, mask: Mask) -> Mask {
        let n = self.n;
        let mut out = 0;
        for pos in 0..n * n {
            if is_corner(n, pos) {
                continue;
            }
            let others = self.forced(mask & !(1 << pos));
            if self.touch[pos] & !others == 0 {
                out |= 1 << pos;
            }
        }
        out
    }
}

/// Weak positions of a block (never includes corners).
pub fn weak_sites(b: Block) -> Vec<(usize, usize)> {
    let n = b.n;
    let w = OddGeometry::new(n).weak(b.mask);
    (0..n * n).filter(|p| w >> p & 1 == 1).map(|p| (p / n, p % n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reduction {
    /// Identify rotations and reflections only.
    D4,
    /// Rotations, reflections and weak-site toggles.
    D4Weak,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockClass {
    /// Smallest mask in the class.
    pub representative: Block,
    pub members: Vec<Mask>,
    pub multiplicity: usize,
    /// Member with the fewest 1's (smallest mask among ties).
    pub weak_core: Mask,
}

/// A partition of all `2^(n²)` masks into classes whose blocks share one
/// per-arrangement probability. Classes are ordered by representative, so class
/// 0 is always the empty block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFamily {
    n: usize,
    reduction: Reduction,
    classes: Vec<BlockClass>,
    index: Vec<u32>,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let up = self.0[self.0[x as usize] as usize];
            self.0[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi as usize] = lo;
        }
    }
}

impl BlockFamily {
    pub fn build(n: usize, reduction: Reduction) -> Result<Self> {
        check_size(n, MAX_REDUCED)?;
        let count = 1u32 << (n * n);
        let sym = Symmetries::new(n);
        let geo = OddGeometry::new(n);
        let mut uf = UnionFind((0..count).collect());
        for m in 0..count {
            for img in sym.images(m) {
                uf.union(m, img);
            }
            if reduction == Reduction::D4Weak {
                let mut w = geo.weak(m);
                while w != 0 {
                    uf.union(m, m ^ (1 << w.trailing_zeros()));
                    w &= w - 1;
                }
            }
        }
        // union by smaller root keeps every root at the class minimum
        let roots: Vec<u32> = (0..count).map(|m| uf.find(m)).collect();
        let mut class_of_root = vec![u32::MAX; count as usize];
        let mut reps = Vec::new();
        for m in 0..count {
            if roots[m as usize] == m {
                class_of_root[m as usize] = reps.len() as u32;
                reps.push(m);
            }
        }
        let index: Vec<u32> = roots.iter().map(|&r| class_of_root[r as usize]).collect();
        Ok(Self::assemble(n, reduction, &reps, index))
    }

    fn assemble(n: usize, reduction: Reduction, reps: &[Mask], index: Vec<u32>) -> Self {
        let mut members = vec![Vec::new(); reps.len()];
        for (m, &c) in index.iter().enumerate() {
            members[c as usize].push(m as Mask);
        }
        let classes = reps
            .iter()
            .zip(members)
            .map(|(&rep, members)| {
                let weak_core = members.iter().copied().min_by_key(|m| (m.count_ones(), *m)).unwrap_or(rep);
                BlockClass {
                    representative: Block { n, mask: rep },
                    multiplicity: members.len(),
                    members,
                    weak_core,
                }
            })
            .collect();
        BlockFamily { n, reduction, classes, index }
    }

    /// Rebuilds a family from its stored layout (representatives, multiplicities
    /// and the mask → class index), checking that the data is a valid partition
    /// closed under the reduction's generators.
    pub fn from_parts(
        n: usize,
        reduction: Reduction,
        classes: &[(Mask, usize)],
        index: Vec<u32>,
    ) -> Result<Self> {
        check_size(n, MAX_REDUCED)?;
        let bad = |msg: &str| Err(Error::Invalid(msg.into()));
        let count = 1usize << (n * n);
        if index.len() != count {
            return bad("index length is not 2^(n²)");
        }
        if index.iter().any(|&c| c as usize >= classes.len()) {
            return bad("index refers to a missing class");
        }
        let mut seen = vec![0usize; classes.len()];
        let mut min = vec![Mask::MAX; classes.len()];
        for (m, &c) in index.iter().enumerate() {
            seen[c as usize] += 1;
            min[c as usize] = min[c as usize].min(m as Mask);
        }
        for (c, &(rep, mult)) in classes.iter().enumerate() {
            if seen[c] != mult || min[c] != rep {
                return bad("class multiplicity or representative does not match the index");
            }
            if c > 0 && classes[c - 1].0 >= rep {
                return bad("classes are not ordered by representative");
            }
        }
        let sym = Symmetries::new(n);
        let geo = OddGeometry::new(n);
        for m in 0..count as Mask {
            let c = index[m as usize];
            if sym.images(m).iter().any(|&i| index[i as usize] != c) {
                return bad("index is not closed under rotations and reflections");
            }
            if reduction == Reduction::D4Weak {
                let mut w = geo.weak(m);
                while w != 0 {
                    if index[(m ^ (1 << w.trailing_zeros())) as usize] != c {
                        return bad("index is not closed under weak-site toggles");
                    }
                    w &= w - 1;
                }
            }
        }
        let reps: Vec<Mask> = classes.iter().map(|c| c.0).collect();
        Ok(Self::assemble(n, reduction, &reps, index))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction
    }

    pub fn classes(&self) -> &[BlockClass] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Optimization variables left after normalization.
    pub fn free_variables(&self) -> usize {
        self.classes.len() - 1
    }

    pub fn class_of(&self, mask: Mask) -> usize {
        self.index[mask as usize] as usize
    }

    pub fn index(&self) -> &[u32] {
        &self.index
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.multiplicity as f64).collect()
    }

    /// Per class, the number of members with 0 on every position of `positions`.
    pub fn zero_counts(&self, positions: Mask) -> Vec<f64> {
        let mut v = vec![0.0; self.classes.len()];
        for (m, &c) in self.index.iter().enumerate() {
            if m as Mask & positions == 0 {
                v[c as usize] += 1.0;
            }
        }
        v
    }

    /// Checks that `probs` is a per-arrangement distribution over the classes.
    pub fn check_distribution(&self, probs: &[f64], tol: f64) -> Result<()> {
        if probs.len() != self.classes.len() {
            return Err(Error::Arity { expected: self.classes.len(), got: probs.len() });
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::NotOnSimplex { sum: f64::NAN });
        }
        let sum: f64 = probs.iter().zip(&self.classes).map(|(p, c)| p * c.multiplicity as f64).sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotOnSimplex { sum });
        }
        Ok(())
    }
}

/// Position masks for every marginal the block bound needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalLayout {
    pub n: usize,
    /// Interior plaquettes, row-major over `(a, b) ∈ [0, n-2]²`.
    pub interior: Vec<Mask>,
    /// Dominoes on the left / right columns, indexed by top row `a ∈ [0, n-2]`.
    pub left: Vec<Mask>,
    pub right: Vec<Mask>,
    /// Dominoes on the top / bottom rows, indexed by left column `b ∈ [0, n-2]`.
    pub top: Vec<Mask>,
    pub bottom: Vec<Mask>,
    /// Corner positions: top-left, top-right, bottom-left, bottom-right.
    pub corners: [Mask; 4],
}

impl MarginalLayout {
    pub fn new(n: usize) -> Self {
        let bit = |i: usize, j: usize| -> Mask { 1 << (i * n + j) };
        let m = n.saturating_sub(1);
        let mut interior = Vec::new();
        for a in 0..m {
            for b in 0..m {
                interior.push(bit(a, b) | bit(a + 1, b) | bit(a, b + 1) | bit(a + 1, b + 1));
            }
        }
        MarginalLayout {
            n,
            interior,
            left: (0..m).map(|a| bit(a, 0) | bit(a + 1, 0)).collect(),
            right: (0..m).map(|a| bit(a, n - 1) | bit(a + 1, n - 1)).collect(),
            top: (0..m).map(|b| bit(0, b) | bit(0, b + 1)).collect(),
            bottom: (0..m).map(|b| bit(n - 1, b) | bit(n - 1, b + 1)).collect(),
            corners: [bit(0, 0), bit(0, n - 1), bit(n - 1, 0), bit(n - 1, n - 1)],
        }
    }
}

/// Zero-probabilities of the plaquettes, dominoes and corners of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub interior: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
    pub corners: [f64; 4],
}

/// Linear maps from class probabilities to [`Marginals`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalMaps {
    pub interior: Vec<Vec<f64>>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
    pub top: Vec<Vec<f64>>,
    pub bottom: Vec<Vec<f64>>,
    pub corners: [Vec<f64>; 4],
}

impl MarginalMaps {
    pub fn new(family: &BlockFamily) -> Self {
        let layout = MarginalLayout::new(family.n());
        let maps = |v: &[Mask]| v.iter().map(|&m| family.zero_counts(m)).collect::<Vec<_>>();
        MarginalMaps {
            interior: maps(&layout.interior),
            left: maps(&layout.left),
            right: maps(&layout.right),
            top: maps(&layout.top),
            bottom: maps(&layout.bottom),
            corners: core::array::from_fn(|k| family.zero_counts(layout.corners[k])),
        }
    }

    pub fn apply(&self, probs: &[f64]) -> Marginals {
        let eval = |v: &[Vec<f64>]| v.iter().map(|c| crate::math::dot(c, probs)).collect();
        Marginals {
            interior: eval(&self.interior),
            left: eval(&self.left),
            right: eval(&self.right),
            top: eval(&self.top),
            bottom: eval(&self.bottom),
            corners: core::array::from_fn(|k| crate::math::dot(&self.corners[k], probs)),
        }
    }
}

pub fn boundary_marginals(family: &BlockFamily, probs: &[f64]) -> Result<Marginals> {
    family.check_distribution(probs, 1e-10)?;
    Ok(MarginalMaps::new(family).apply(probs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strictness {
    /// The larger 1-set adds a non-weak site: optimal probabilities must strictly decrease.
    Strict,
    /// Every added site is weak: optimal probabilities are equal.
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InclusionPair {
    pub smaller: usize,
    pub larger: usize,
    pub strictness: Strictness,
}

/// Class pairs `(C1, C2)` having members `b1 ⊊ b2`, tagged `Equal` when the added
/// sites force no odd site beyond those `b1` already forces and `Strict` otherwise.
/// A class pair reached both ways is listed once per tag.
pub fn inclusion_pairs(family: &BlockFamily) -> Vec<InclusionPair> {
    let n = family.n();
    let count = 1usize << (n * n);
    let geo = OddGeometry::new(n);
    let forced: Vec<u64> = (0..count as Mask).map(|m| geo.forced(m)).collect();
    let c = family.class_count();
    // bit 0: some member pair adds only weak sites; bit 1: some pair adds a non-weak site
    let mut tag = vec![0u8; c * c];
    for b2 in 0..count as Mask {
        let c2 = family.class_of(b2);
        // proper submasks of b2, including the empty one
        let mut b1 = b2;
        loop {
            b1 = b1.wrapping_sub(1) & b2;
            let c1 = family.class_of(b1);
            let added = b2 & !b1;
            let t = if forced[added as usize] & !forced[b1 as usize] == 0 { 1 } else { 2 };
            tag[c1 * c + c2] |= t;
            if b1 == 0 {
                break;
            }
        }
    }
    let mut out = Vec::new();
    for c1 in 0..c {
        for c2 in 0..c {
            let t = tag[c1 * c + c2];
            if t & 1 != 0 {
                out.push(InclusionPair { smaller: c1, larger: c2, strictness: Strictness::Equal });
            }
            if t & 2 != 0 {
                out.push(InclusionPair { smaller: c1, larger: c2, strictness: Strictness::Strict });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn block_counts() {
        assert_eq!(enumerate_blocks(1).unwrap().count(), 2);
        assert_eq!(enumerate_blocks(2).unwrap().count(), 16);
        assert_eq!(enumerate_blocks(3).unwrap().count(), 512);
        assert!(enumerate_blocks(0).is_err());
        assert!(enumerate_blocks(6).is_err());
        let masks: BTreeSet<_> = enumerate_blocks(3).unwrap().map(|b| b.mask()).collect();
        assert_eq!(masks.len(), 512);
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(d4_canonical(Block::new(3, 0).unwrap()).mask(), 0);
        let corners = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let canon: BTreeSet<_> =
            corners.iter().map(|&p| d4_canonical(Block::from_positions(2, &[p]).unwrap()).mask()).collect();
        assert_eq!(canon.len(), 1);
    }

    #[test]
    fn two_by_two_orbit_census() {
        let f = BlockFamily::build(2, Reduction::D4).unwrap();
        let mut mult: Vec<usize> = f.classes().iter().map(|c| c.multiplicity).collect();
        assert_eq!(f.class_count(), 6);
        mult.sort();
        assert_eq!(mult, vec![1, 1, 2, 4, 4, 4]);
        // no weak sites in a 2×2 block: the weak reduction changes nothing
        assert_eq!(BlockFamily::build(2, Reduction::D4Weak).unwrap().class_count(), 6);
    }

    /// Burnside's lemma as an independent count of D4 orbits.
    fn burnside(n: usize) -> usize {
        let sym = Symmetries::new(n);
        let total: usize = (0..8)
            .map(|k| {
                // cycles of the position permutation
                let mut seen = vec![false; n * n];
                let mut cycles = 0;
                for start in 0..n * n {
                    if seen[start] {
                        continue;
                    }
                    cycles += 1;
                    let mut p = start;
                    while !seen[p] {
                        seen[p] = true;
                        p = sym.perms[k][p] as usize;
                    }
                }
                1usize << cycles
            })
            .sum();
        total / 8
    }

    #[test]
    fn d4_class_counts_match_burnside() {
        for n in 1..=4 {
            assert_eq!(BlockFamily::build(n, Reduction::D4).unwrap().class_count(), burnside(n));
        }
        assert_eq!(burnside(3), 102);
    }

    #[test]
    fn weak_site_example() {
        let b = Block::from_positions(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        assert!(weak_sites(b).contains(&(1, 1)));
        assert!(weak_sites(Block::new(3, 0).unwrap()).is_empty());
    }

    #[test]
    fn corners_never_weak() {
        for n in 1..=4 {
            let geo = OddGeometry::new(n);
            for m in 0..(1u32 << (n * n)) {
                let w = geo.weak(m);
                for pos in 0..n * n {
                    if is_corner(n, pos) {
                        assert_eq!(w >> pos & 1, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn forcing_soundness() {
        for n in 1..=3 {
            let geo = OddGeometry::new(n);
            for m in 0..(1u32 << (n * n)) {
                let w = geo.weak(m);
                for pos in 0..n * n {
                    if w >> pos & 1 == 1 {
                        assert_eq!(geo.forced(m | 1 << pos), geo.forced(m & !(1 << pos)));
                    }
                }
            }
        }
    }

    /// Brute-force closure: flood fill from each mask through all symmetries and
    /// weak toggles, computed without union-find.
    fn brute_classes(n: usize) -> Vec<BTreeSet<Mask>> {
        let count = 1u32 << (n * n);
        let mut assigned = vec![false; count as usize];
        let mut out = Vec::new();
        for start in 0..count {
            if assigned[start as usize] {
                continue;
            }
            let mut class = BTreeSet::new();
            let mut stack = vec![start];
            while let Some(m) = stack.pop() {
                if !class.insert(m) {
                    continue;
                }
                let mut next = Vec::new();
                for k in 0..8 {
                    // direct geometric transform, not via Symmetries
                    let mut img = 0;
                    for pos in 0..n * n {
                        if m >> pos & 1 == 1 {
                            let (mut i, mut j) = (pos / n, pos % n);
                            for _ in 0..k % 4 {
                                let t = i;
                                i = n - 1 - j;
                                j = t;
                            }
                            if k >= 4 {
                                i = n - 1 - i;
                            }
                            img |= 1 << (i * n + j);
                        }
                    }
                    next.push(img);
                }
                for pos in 0..n * n {
                    let (i, j) = (pos / n, pos % n);
                    if (i == 0 || i == n - 1) && (j == 0 || j == n - 1) {
                        continue;
                    }
                    // every plaquette around pos must contain another 1 of m
                    let rest = m & !(1 << pos);
                    let covered = [(0, 0), (0, 1), (1, 0), (1, 1)].iter().all(|&(di, dj)| {
                        let (a, b) = (i as isize - 1 + di, j as isize - 1 + dj);
                        [(0, 0), (0, 1), (1, 0), (1, 1)].iter().any(|&(ei, ej)| {
                            let (r, c) = (a + ei, b + ej);
                            r >= 0
                                && c >= 0
                                && (r as usize) < n
                                && (c as usize) < n
                                && rest >> (r as usize * n + c as usize) & 1 == 1
                        })
                    });
                    if covered {
                        next.push(m ^ (1 << pos));
                    }
                }
                stack.extend(next);
            }
            for &m in &class {
                assigned[m as usize] = true;
            }
            out.push(class);
        }
        out
    }

    #[test]
    fn reduction_matches_brute_force_closure() {
        for n in 1..=3 {
            let family = BlockFamily::build(n, Reduction::D4Weak).unwrap();
            let brute = brute_classes(n);
            assert_eq!(family.class_count(), brute.len());
            for class in brute {
                let ids: BTreeSet<_> = class.iter().map(|&m| family.class_of(m)).collect();
                assert_eq!(ids.len(), 1);
            }
        }
    }

    #[test]
    fn reduced_counts() {
        assert_eq!(BlockFamily::build(1, Reduction::D4Weak).unwrap().free_variables(), 1);
        assert_eq!(BlockFamily::build(3, Reduction::D4).unwrap().free_variables(), 101);
        assert_eq!(BlockFamily::build(3, Reduction::D4Weak).unwrap().free_variables(), 46);
        assert_eq!(BlockFamily::build(4, Reduction::D4Weak).unwrap().free_variables(), 991);
        assert!(BlockFamily::build(5, Reduction::D4).is_err());
    }

    #[test]
    fn partition_and_representatives() {
        for n in 1..=4 {
            let f = BlockFamily::build(n, Reduction::D4Weak).unwrap();
            let total: usize = f.classes().iter().map(|c| c.multiplicity).sum();
            assert_eq!(total, 1 << (n * n));
            assert_eq!(f.classes()[0].representative.mask(), 0);
            for (id, c) in f.classes().iter().enumerate() {
                assert_eq!(c.members.iter().min(), Some(&c.representative.mask()));
                assert!(c.members.iter().all(|&m| f.class_of(m) == id));
                assert!(c.members.contains(&c.weak_core));
            }
        }
    }

    #[test]
    fn largest_three_by_three_class_has_64_blocks() {
        let f = BlockFamily::build(3, Reduction::D4Weak).unwrap();
        assert_eq!(f.classes().iter().map(|c| c.multiplicity).max(), Some(64));
    }

    #[test]
    fn from_parts_round_trip_and_rejection() {
        let f = BlockFamily::build(3, Reduction::D4Weak).unwrap();
        let parts: Vec<(Mask, usize)> =
            f.classes().iter().map(|c| (c.representative.mask(), c.multiplicity)).collect();
        let g = BlockFamily::from_parts(3, Reduction::D4Weak, &parts, f.index().to_vec()).unwrap();
        assert_eq!(f, g);
        let mut broken = f.index().to_vec();
        broken.swap(1, 3);
        broken[5] = 0;
        assert!(BlockFamily::from_parts(3, Reduction::D4Weak, &parts, broken).is_err());
        // a D4-only index is not closed under weak toggles
        let d4 = BlockFamily::build(3, Reduction::D4).unwrap();
        let d4parts: Vec<(Mask, usize)> =
            d4.classes().iter().map(|c| (c.representative.mask(), c.multiplicity)).collect();
        assert!(BlockFamily::from_parts(3, Reduction::D4Weak, &d4parts, d4.index().to_vec()).is_err());
    }

    fn isotropic_two_by_two(p: [f64; 6]) -> (BlockFamily, Vec<f64>) {
        // (p0, p1, p21 side by side, p22 across, p3, p4)
        let f = BlockFamily::build(2, Reduction::D4).unwrap();
        let mut probs = vec![0.0; 6];
        for (id, c) in f.classes().iter().enumerate() {
            let m = c.representative.mask();
            let k = match (m.count_ones(), m) {
                (0, _) => 0,
                (1, _) => 1,
                (2, 0b1001) | (2, 0b0110) => 3,
                (2, _) => 2,
                (3, _) => 4,
                _ => 5,
            };
            probs[id] = p[k];
        }
        (f, probs)
    }

    #[test]
    fn two_by_two_marginals_match_closed_forms() {
        let p = [0.2, 0.08, 0.05, 0.04, 0.02, 0.04];
        let norm = p[0] + 4.0 * p[1] + 4.0 * p[2] + 2.0 * p[3] + 4.0 * p[4] + p[5];
        let p = p.map(|v| v / norm);
        let (f, probs) = isotropic_two_by_two(p);
        let m = boundary_marginals(&f, &probs).unwrap();
        let domino = p[0] + 2.0 * p[1] + p[2];
        let corner = p[0] + 3.0 * p[1] + 2.0 * p[2] + p[3] + p[4];
        for v in m.left.iter().chain(&m.right).chain(&m.top).chain(&m.bottom) {
            assert!((v - domino).abs() < 1e-14);
        }
        for v in m.corners {
            assert!((v - corner).abs() < 1e-14);
        }
        assert!((m.interior[0] - p[0]).abs() < 1e-14);
    }

    #[test]
    fn point_mass_on_empty_block() {
        let f = BlockFamily::build(3, Reduction::D4Weak).unwrap();
        let mut probs = vec![0.0; f.class_count()];
        probs[0] = 1.0;
        let m = boundary_marginals(&f, &probs).unwrap();
        assert!(m.interior.iter().chain(&m.left).chain(&m.top).all(|&v| v == 1.0));
        assert_eq!(m.corners, [1.0; 4]);
        probs[0] = 0.5;
        assert!(boundary_marginals(&f, &probs).is_err());
    }

    #[test]
    fn inclusion_pairs_properties() {
        let f = BlockFamily::build(3, Reduction::D4Weak).unwrap();
        let pairs = inclusion_pairs(&f);
        for c in 1..f.class_count() {
            assert!(pairs.iter().any(|p| p.smaller == 0 && p.larger == c));
        }
        // an all-weak difference never leaves the class
        for p in &pairs {
            if p.smaller != p.larger {
                assert_eq!(p.strictness, Strictness::Strict);
            }
        }
        // the weak example: adding the weak center gives an equal pair
        let b1 = Block::from_positions(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        let c = f.class_of(b1.mask());
        assert_eq!(c, f.class_of(b1.mask() | 1 << 4));
        assert!(pairs.iter().any(|p| p.smaller == c && p.larger == c && p.strictness == Strictness::Equal));
    }

    #[test]
    fn chains_of_increasing_occupation_exist() {
        // 0 ≺ (one 1) ≺ (two 1's) ≺ (three 1's) among 3×3 classes
        let f = BlockFamily::build(3, Reduction::D4Weak).unwrap();
        let pairs = inclusion_pairs(&f);
        let ones = |c: usize| f.classes()[c].weak_core.count_ones();
        let mut found = false;
        for p1 in pairs.iter().filter(|p| p.smaller == 0 && ones(p.larger) == 1) {
            for p2 in pairs.iter().filter(|p| p.smaller == p1.larger && ones(p.larger) == 2) {
                if pairs.iter().any(|p| p.smaller == p2.larger && ones(p.larger) == 3) {
                    found = true;
                }
            }
        }
        assert!(found);
    }
}
