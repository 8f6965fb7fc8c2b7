//! The five lattices, their k-partite sublattice splits, and periodic tori.
//!
//! Coordinate schemes:
//!
//! - `Square`, `SquareMoore`: integer `(x, y)`.
//! - `Honeycomb`: the brick-wall embedding. Sites are `(x, y)` on the integer
//!   grid; each site is linked horizontally to `(x ± 1, y)` and vertically to
//!   `(x, y + 1)` when `x + y` is even, `(x, y - 1)` otherwise.
//! - `Triangular`: axial coordinates on the basis `a1 = (1, 0)`,
//!   `a2 = (1/2, √3/2)`; the six neighbors are `±a1`, `±a2`, `±(a1 - a2)`.
//! - `Kagome`: three sites per cell of the triangular Bravais lattice with basis
//!   `2·a1`, `2·a2`. `cell = 0` sits at the cell origin, `cell = 1` at `a1`,
//!   `cell = 2` at `a2`.
//!
//! Sublattice labels are numbered in fill order: 0 = circle, 1 = dot,
//! 2 = triangle, 3 = diamond.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeKind {
    Square,
    Honeycomb,
    Triangular,
    Kagome,
    SquareMoore,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 5] = [
        LatticeKind::Square,
        LatticeKind::Honeycomb,
        LatticeKind::Triangular,
        LatticeKind::Kagome,
        LatticeKind::SquareMoore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Honeycomb => "honeycomb",
            LatticeKind::Triangular => "triangular",
            LatticeKind::Kagome => "kagome",
            LatticeKind::SquareMoore => "square-moore",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Sites per coordinate cell (3 for the kagome lattice, 1 otherwise).
    pub fn cell_sites(self) -> usize {
        match self {
            LatticeKind::Kagome => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sublattice {
    Circle,
    Dot,
    Triangle,
    Diamond,
}

impl Sublattice {
    pub const ALL: [Sublattice; 4] =
        [Sublattice::Circle, Sublattice::Dot, Sublattice::Triangle, Sublattice::Diamond];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    /// Nearest neighbors per site.
    pub coordination: usize,
    /// Number of sublattices `k` in the k-partite split.
    pub partite_count: usize,
    pub fill_order: Vec<Sublattice>,
    /// For each fill stage, how many neighbors from earlier stages must be 0
    /// for a site of that stage to be unforced.
    pub neighborhood_exponents: Vec<u32>,
}

pub fn build_lattice(kind: LatticeKind) -> LatticeSpec {
    let (coordination, exponents): (usize, &[u32]) = match kind {
        LatticeKind::Square => (4, &[0, 4]),
        LatticeKind::Honeycomb => (3, &[0, 3]),
        LatticeKind::Triangular => (6, &[0, 3, 6]),
        LatticeKind::Kagome => (4, &[0, 2, 4]),
        LatticeKind::SquareMoore => (8, &[0, 2, 6, 8]),
    };
    let partite_count = exponents.len();
    LatticeSpec {
        kind,
        coordination,
        partite_count,
        fill_order: Sublattice::ALL[..partite_count].to_vec(),
        neighborhood_exponents: exponents.to_vec(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: i64,
    pub y: i64,
    /// Position inside the coordinate cell; always 0 except on the kagome lattice.
    pub cell: u8,
}

impl Site {
    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y, cell: 0 }
    }

    pub const fn with_cell(x: i64, y: i64, cell: u8) -> Self {
        Site { x, y, cell }
    }
}

/// Sublattice of a site on the infinite lattice (a pure function of coordinates).
pub fn sublattice_of(kind: LatticeKind, site: Site) -> Sublattice {
    let label = match kind {
        LatticeKind::Square | LatticeKind::Honeycomb => (site.x + site.y).rem_euclid(2),
        LatticeKind::Triangular => (site.x - site.y).rem_euclid(3),
        LatticeKind::Kagome => site.cell as i64,
        LatticeKind::SquareMoore => site.x.rem_euclid(2) + 2 * site.y.rem_euclid(2),
    };
    Sublattice::ALL[label as usize]
}

/// Neighbors on the infinite lattice, `coordination` of them.
pub fn infinite_neighbors(kind: LatticeKind, site: Site) -> Vec<Site> {
    let Site { x, y, cell } = site;
    let offsets: &[(i64, i64)] = match kind {
        LatticeKind::Square => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        LatticeKind::SquareMoore => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        LatticeKind::Triangular => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)],
        LatticeKind::Honeycomb => {
            let dy = if (x + y).rem_euclid(2) == 0 { 1 } else { -1 };
            return vec![Site::new(x + 1, y), Site::new(x - 1, y), Site::new(x, y + dy)];
        }
        LatticeKind::Kagome => {
            let s = |dx: i64, dy: i64, c: u8| Site::with_cell(x + dx, y + dy, c);
            return match cell {
                0 => vec![s(0, 0, 1), s(-1, 0, 1), s(0, 0, 2), s(0, -1, 2)],
                1 => vec![s(0, 0, 0), s(1, 0, 0), s(0, 0, 2), s(1, -1, 2)],
                _ => vec![s(0, 0, 0), s(0, 1, 0), s(0, 0, 1), s(-1, 1, 1)],
            };
        }
    };
    offsets.iter().map(|&(dx, dy)| Site::new(x + dx, y + dy)).collect()
}

/// A periodic `width × height` patch of coordinate cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Torus {
    kind: LatticeKind,
    width: usize,
    height: usize,
}

impl Torus {
    /// Side lengths must be compatible with the sublattice period: even on the
    /// square, Moore and honeycomb lattices, multiples of 3 on the triangular
    /// lattice, at least 2 on the kagome lattice.
    pub fn new(kind: LatticeKind, width: usize, height: usize) -> Result<Self> {
        let bad = |reason| Error::BadDimensions { width, height, reason };
        match kind {
            LatticeKind::Square | LatticeKind::Honeycomb | LatticeKind::SquareMoore => {
                if width < 2 || height < 2 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
                    return Err(bad("side lengths must be even and at least 2"));
                }
            }
            LatticeKind::Triangular => {
                if width < 3 || height < 3 || !width.is_multiple_of(3) || !height.is_multiple_of(3) {
                    return Err(bad("side lengths must be positive multiples of 3"));
                }
            }
            LatticeKind::Kagome => {
                if width < 2 || height < 2 {
                    return Err(bad("side lengths must be at least 2"));
                }
            }
        }
        Ok(Torus { kind, width, height })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn site_count(&self) -> usize {
        self.width * self.height * self.kind.cell_sites()
    }

    pub fn contains(&self, site: Site) -> bool {
        site.x >= 0
            && site.y >= 0
            && (site.x as usize) < self.width
            && (site.y as usize) < self.height
            && (site.cell as usize) < self.kind.cell_sites()
    }

    pub fn index(&self, site: Site) -> Result<usize> {
        if !self.contains(site) {
            return Err(Error::SiteOutOfRange { x: site.x, y: site.y, cell: site.cell });
        }
        Ok(self.index_unchecked(site))
    }

    fn index_unchecked(&self, site: Site) -> usize {
        let c = self.kind.cell_sites();
        (site.y as usize * self.width + site.x as usize) * c + site.cell as usize
    }

    pub fn site(&self, index: usize) -> Site {
        let c = self.kind.cell_sites();
        let cell = (index % c) as u8;
        let xy = index / c;
        Site::with_cell((xy % self.width) as i64, (xy / self.width) as i64, cell)
    }

    pub fn wrap(&self, site: Site) -> Site {
        Site::with_cell(
            site.x.rem_euclid(self.width as i64),
            site.y.rem_euclid(self.height as i64),
            site.cell,
        )
    }

    pub fn sublattice(&self, site: Site) -> Sublattice {
        sublattice_of(self.kind, site)
    }

    /// Neighbors with wrap-around. Always `coordination` entries; on very small
    /// tori the same site can appear more than once.
    pub fn neighbors(&self, site: Site) -> Result<Vec<Site>> {
        if !self.contains(site) {
            return Err(Error::SiteOutOfRange { x: site.x, y: site.y, cell: site.cell });
        }
        Ok(infinite_neighbors(self.kind, site).into_iter().map(|s| self.wrap(s)).collect())
    }

    /// Adjacency list by site index.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.site_count())
            .map(|i| {
                infinite_neighbors(self.kind, self.site(i))
                    .into_iter()
                    .map(|s| self.index_unchecked(self.wrap(s)))
                    .collect()
            })
            .collect()
    }

    pub fn sublattice_labels(&self) -> Vec<u8> {
        (0..self.site_count()).map(|i| self.sublattice(self.site(i)).index() as u8).collect()
    }
}

/// Neighbor sites of `site` on a torus of the given lattice.
pub fn neighbor_sites(spec: &LatticeSpec, dims: (usize, usize), site: Site) -> Result<Vec<Site>> {
    Torus::new(spec.kind, dims.0, dims.1)?.neighbors(site)
}

/// A 0/1 assignment on every site of a torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusConfiguration {
    torus: Torus,
    values: Vec<u8>,
}

impl TorusConfiguration {
    pub fn zeros(torus: Torus) -> Self {
        TorusConfiguration { torus, values: vec![0; torus.site_count()] }
    }

    pub fn from_values(torus: Torus, values: Vec<u8>) -> Result<Self> {
        if values.len() != torus.site_count() {
            return Err(Error::Arity { expected: torus.site_count(), got: values.len() });
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::Invalid("configuration values must be 0 or 1".into()));
        }
        Ok(TorusConfiguration { torus, values })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, site: Site) -> Result<u8> {
        Ok(self.values[self.torus.index(site)?])
    }

    pub fn set(&mut self, site: Site, value: bool) -> Result<()> {
        let i = self.torus.index(site)?;
        self.values[i] = value as u8;
        Ok(())
    }

    /// True iff no two adjacent sites both carry a 1.
    pub fn verify_hard_core(&self) -> bool {
        let t = &self.torus;
        (0..t.site_count()).filter(|&i| self.values[i] == 1).all(|i| {
            infinite_neighbors(t.kind, t.site(i))
                .into_iter()
                .all(|s| self.values[t.index_unchecked(t.wrap(s))] == 0)
        })
    }

    /// Fraction of the given sublattice's sites that carry a 1.
    pub fn sublattice_density(&self, label: Sublattice) -> Result<f64> {
        let k = build_lattice(self.torus.kind).partite_count;
        if label.index() >= k {
            return Err(Error::Invalid("sublattice label not present on this lattice".into()));
        }
        let (mut ones, mut total) = (0usize, 0usize);
        for (i, &v) in self.values.iter().enumerate() {
            if self.torus.sublattice(self.torus.site(i)) == label {
                total += 1;
                ones += v as usize;
            }
        }
        Ok(ones as f64 / total as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn smallest_torus(kind: LatticeKind) -> Torus {
        match kind {
            LatticeKind::Triangular => Torus::new(kind, 3, 3).unwrap(),
            LatticeKind::Kagome => Torus::new(kind, 2, 2).unwrap(),
            _ => Torus::new(kind, 4, 4).unwrap(),
        }
    }

    #[test]
    fn spec_table() {
        let expect = [
            (LatticeKind::Square, 4, 2),
            (LatticeKind::Honeycomb, 3, 2),
            (LatticeKind::Triangular, 6, 3),
            (LatticeKind::Kagome, 4, 3),
            (LatticeKind::SquareMoore, 8, 4),
        ];
        for (kind, coord, k) in expect {
            let spec = build_lattice(kind);
            assert_eq!(spec.coordination, coord, "{kind:?}");
            assert_eq!(spec.partite_count, k, "{kind:?}");
            assert_eq!(spec.fill_order.len(), k);
            assert_eq!(spec.neighborhood_exponents.len(), k);
        }
    }

    #[test]
    fn exponents_match_geometry() {
        // count earlier-stage neighbors of a site of every stage
        for kind in LatticeKind::ALL {
            let spec = build_lattice(kind);
            let torus = Torus::new(kind, 6, 6).unwrap();
            for i in 0..torus.site_count() {
                let s = torus.site(i);
                let stage = torus.sublattice(s).index();
                let earlier = torus
                    .neighbors(s)
                    .unwrap()
                    .into_iter()
                    .filter(|&n| torus.sublattice(n).index() < stage)
                    .count();
                assert_eq!(earlier as u32, spec.neighborhood_exponents[stage], "{kind:?} {s:?}");
            }
        }
    }

    #[test]
    fn square_neighbors_of_origin() {
        let spec = build_lattice(LatticeKind::Square);
        let got: BTreeSet<_> = neighbor_sites(&spec, (6, 6), Site::new(0, 0)).unwrap().into_iter().collect();
        let want: BTreeSet<_> = [Site::new(1, 0), Site::new(5, 0), Site::new(0, 1), Site::new(0, 5)].into();
        assert_eq!(got, want);
    }

    #[test]
    fn moore_neighbors_are_chebyshev_ring() {
        let spec = build_lattice(LatticeKind::SquareMoore);
        let n = neighbor_sites(&spec, (6, 6), Site::new(2, 2)).unwrap();
        assert_eq!(n.len(), 8);
        for s in n {
            let d = (s.x - 2).abs().max((s.y - 2).abs());
            assert_eq!(d, 1);
        }
    }

    #[test]
    fn honeycomb_has_three_neighbors() {
        let t = Torus::new(LatticeKind::Honeycomb, 8, 6).unwrap();
        for i in 0..t.site_count() {
            let n: BTreeSet<_> = t.neighbors(t.site(i)).unwrap().into_iter().collect();
            assert_eq!(n.len(), 3);
        }
    }

    #[test]
    fn out_of_range_site_is_an_error() {
        let spec = build_lattice(LatticeKind::Square);
        assert!(neighbor_sites(&spec, (4, 4), Site::new(4, 0)).is_err());
        let t = Torus::new(LatticeKind::Kagome, 2, 2).unwrap();
        assert!(t.neighbors(Site::with_cell(0, 0, 3)).is_err());
    }

    #[test]
    fn bad_dimensions_rejected() {
        assert!(Torus::new(LatticeKind::Square, 3, 4).is_err());
        assert!(Torus::new(LatticeKind::Triangular, 4, 6).is_err());
        assert!(Torus::new(LatticeKind::Kagome, 1, 4).is_err());
    }

    #[test]
    fn partiteness_symmetry_and_regularity() {
        for kind in LatticeKind::ALL {
            let t = Torus::new(kind, 6, 6).unwrap();
            let coord = build_lattice(kind).coordination;
            let adj = t.adjacency();
            let labels = t.sublattice_labels();
            for (i, ns) in adj.iter().enumerate() {
                assert_eq!(ns.len(), coord);
                let distinct: BTreeSet<_> = ns.iter().collect();
                assert_eq!(distinct.len(), coord, "{kind:?}: repeated neighbor on a 6x6 torus");
                for &j in ns {
                    assert_ne!(labels[i], labels[j], "{kind:?}: edge inside a sublattice");
                    assert!(adj[j].contains(&i), "{kind:?}: asymmetric adjacency");
                }
            }
        }
    }

    #[test]
    fn checker_matches_pairwise_scan_exhaustively() {
        for kind in LatticeKind::ALL {
            let t = smallest_torus(kind);
            let n = t.site_count();
            assert!(n <= 16);
            let adj = t.adjacency();
            let mut edges = Vec::new();
            for (i, ns) in adj.iter().enumerate() {
                for &j in ns {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
            for bits in 0u32..(1 << n) {
                let values: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
                let brute = edges.iter().all(|&(i, j)| values[i] & values[j] == 0);
                let config = TorusConfiguration::from_values(t, values).unwrap();
                assert_eq!(config.verify_hard_core(), brute, "{kind:?} {bits:b}");
            }
        }
    }

    #[test]
    fn trivial_configurations() {
        let t = Torus::new(LatticeKind::Square, 4, 4).unwrap();
        let mut c = TorusConfiguration::zeros(t);
        assert!(c.verify_hard_core());
        assert_eq!(c.sublattice_density(Sublattice::Circle).unwrap(), 0.0);
        c.set(Site::new(1, 2), true).unwrap();
        assert!(c.verify_hard_core());
        c.set(Site::new(2, 2), true).unwrap();
        assert!(!c.verify_hard_core());
    }

    #[test]
    fn full_even_sublattice() {
        let t = Torus::new(LatticeKind::Square, 8, 8).unwrap();
        let values =
            (0..t.site_count()).map(|i| (t.sublattice(t.site(i)) == Sublattice::Circle) as u8).collect();
        let c = TorusConfiguration::from_values(t, values).unwrap();
        assert!(c.verify_hard_core());
        assert_eq!(c.sublattice_density(Sublattice::Circle).unwrap(), 1.0);
        assert_eq!(c.sublattice_density(Sublattice::Dot).unwrap(), 0.0);
        assert!(c.sublattice_density(Sublattice::Triangle).is_err());
    }
}
