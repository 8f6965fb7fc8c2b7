//! Closed-form lower bounds from single-site and three-hex fill-in schemes.
//!
//! All values are in nats per site of the full lattice. Densities are listed in
//! fill order (circle, dot, triangle, diamond) and are the probability that a
//! site of that sublattice carries a 1.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::LatticeKind;
use crate::math::{h_bernoulli, powi, xlnx, LN_2};
use crate::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BernoulliParam(f64);

impl BernoulliParam {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(BernoulliParam(p))
        } else {
            Err(Error::Domain { name: "p", value: p, expected: "[0, 1]" })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Per-arrangement probabilities of a three-hex carrying 0, 1, 2 or 3 one-tiles.
/// There are 1, 3, 3 and 1 arrangements of each kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeHexParam {
    p: [f64; 4],
}

pub const THREE_HEX_MULTIPLICITY: [f64; 4] = [1.0, 3.0, 3.0, 1.0];

impl ThreeHexParam {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        Self::with_tolerance(p, 1e-12)
    }

    /// Like [`ThreeHexParam::new`] with a custom tolerance on the normalization;
    /// useful for rounded published parameter vectors.
    pub fn with_tolerance(p: [f64; 4], tol: f64) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Domain { name: "p_k", value: bad, expected: "[0, 1]" });
        }
        let sum = p[0] + 3.0 * p[1] + 3.0 * p[2] + p[3];
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotOnSimplex { sum });
        }
        Ok(ThreeHexParam { p })
    }

    pub fn get(&self) -> [f64; 4] {
        self.p
    }

    /// Probability that one given circle site of the three-hex is 0.
    pub fn a(&self) -> f64 {
        self.p[0] + 2.0 * self.p[1] + self.p[2]
    }

    /// Probability that one given circle site of the three-hex is 1.
    pub fn b(&self) -> f64 {
        self.p[1] + 2.0 * self.p[2] + self.p[3]
    }

    pub fn entropy(&self) -> f64 {
        -(0..4).map(|k| THREE_HEX_MULTIPLICITY[k] * xlnx(self.p[k])).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Single-site Bernoulli stages, last stage B(1/2).
    Closed(LatticeKind),
    /// Two-sublattice scheme with the last stage tuned to equal densities.
    Equalized(LatticeKind),
    ThreeHex(LatticeKind),
    /// n×n blocks on the even square sublattice.
    Block(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub scheme: Scheme,
    /// Nats per full-lattice site.
    pub value: f64,
    pub params: Vec<f64>,
    pub densities: Vec<f64>,
}

pub fn entropy_bernoulli(p: f64) -> Result<f64> {
    Ok(h_bernoulli(BernoulliParam::new(p)?.get()))
}

fn check_exponent(name: &'static str, value: u32, allowed: &[u32]) -> Result<()> {
    if allowed.contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { name, value: value as f64, expected: "the lattice's neighborhood size" })
    }
}

/// Square (`m = 4`) and honeycomb (`m = 3`): `½{h(p) + (1-p)^m ln 2}`.
pub fn bound_bipartite(p: BernoulliParam, m: u32) -> Result<BoundReport> {
    check_exponent("m", m, &[3, 4])?;
    let p = p.get();
    let free = powi(1.0 - p, m as i32);
    let kind = if m == 4 { LatticeKind::Square } else { LatticeKind::Honeycomb };
    Ok(BoundReport {
        scheme: Scheme::Closed(kind),
        value: 0.5 * (h_bernoulli(p) + free * LN_2),
        params: vec![p],
        densities: vec![p, free / 2.0],
    })
}

/// Derivative of [`bound_bipartite`]'s value with respect to `p`.
pub fn bound_bipartite_derivative(p: f64, m: u32) -> f64 {
    0.5 * (crate::math::h_bernoulli_derivative(p) - m as f64 * powi(1.0 - p, m as i32 - 1) * LN_2)
}

/// Triangular (`m' = 3`) and kagome (`m' = 2`) lattices, filled circle → dot →
/// triangle with B(p), B(q), B(1/2).
pub fn bound_tripartite(p: BernoulliParam, q: BernoulliParam, m_prime: u32) -> Result<BoundReport> {
    tripartite(p, q, m_prime, m_prime)
}

pub(crate) fn tripartite(
    p: BernoulliParam,
    q: BernoulliParam,
    m_prime: u32,
    last_exponent: u32,
) -> Result<BoundReport> {
    check_exponent("m'", m_prime, &[2, 3])?;
    let (p, q) = (p.get(), q.get());
    let dot_free = powi(1.0 - p, m_prime as i32);
    let tri_given_dot = powi(1.0 - (1.0 - p) * q, last_exponent as i32);
    let kind = if m_prime == 3 { LatticeKind::Triangular } else { LatticeKind::Kagome };
    Ok(BoundReport {
        scheme: Scheme::Closed(kind),
        value: (h_bernoulli(p) + dot_free * (h_bernoulli(q) + tri_given_dot * LN_2)) / 3.0,
        params: vec![p, q],
        densities: vec![p, dot_free * q, dot_free * tri_given_dot / 2.0],
    })
}

/// Square lattice with the 8-site Moore neighborhood, filled circle → dot →
/// triangle → diamond with B(p), B(q), B(r), B(1/2).
pub fn bound_square_moore(p: BernoulliParam, q: BernoulliParam, r: BernoulliParam) -> Result<BoundReport> {
    let (p, q, r) = (p.get(), q.get(), r.get());
    let dot_zero = 1.0 - (1.0 - p) * q;
    let dot_free = powi(1.0 - p, 2);
    let tri_free = dot_free * powi(dot_zero, 4);
    let diamond_free = powi(1.0 - p, 4) * powi(1.0 - q, 2) * powi(1.0 - dot_zero * dot_zero * r, 2);
    Ok(BoundReport {
        scheme: Scheme::Closed(LatticeKind::SquareMoore),
        value: (h_bernoulli(p) + dot_free * h_bernoulli(q) + tri_free * h_bernoulli(r) + diamond_free * LN_2)
            / 4.0,
        params: vec![p, q, r],
        densities: vec![p, dot_free * q, tri_free * r, diamond_free / 2.0],
    })
}

/// Two-sublattice scheme whose last stage uses `B(p')`, `p' = p (1-p)^{-m}`,
/// so that both sublattices end up with density `p`.
pub fn bound_equalized_bipartite(p: BernoulliParam, m: u32) -> Result<BoundReport> {
    check_exponent("m", m, &[3, 4])?;
    let p = p.get();
    let free = powi(1.0 - p, m as i32);
    let p_prime = if p == 0.0 { 0.0 } else { p / free };
    if !(p_prime <= 1.0) {
        return Err(Error::EqualizationInfeasible { p_prime });
    }
    let kind = if m == 4 { LatticeKind::Square } else { LatticeKind::Honeycomb };
    Ok(BoundReport {
        scheme: Scheme::Equalized(kind),
        value: 0.5 * (h_bernoulli(p) + free * h_bernoulli(p_prime)),
        params: vec![p],
        densities: vec![p, free * p_prime],
    })
}

/// Largest `p` for which equalization is feasible, i.e. `p = (1-p)^m`.
pub fn equalization_limit(m: u32) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= powi(1.0 - mid, m as i32) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Honeycomb lattice with circle three-hexes distributed by `pvec` and the dot
/// sublattice filled with B(1/2).
///
/// Of the three dots per three-hex, the central one is unforced only when the
/// three-hex is empty, while the two extremity dots each touch three different
/// three-hexes.
pub fn bound_three_hex_honeycomb(pvec: &ThreeHexParam) -> BoundReport {
    let p = pvec.get();
    let a = pvec.a();
    let dot_free = (p[0] + 2.0 * a * a * a) / 3.0;
    BoundReport {
        scheme: Scheme::ThreeHex(LatticeKind::Honeycomb),
        value: (pvec.entropy() + (p[0] + 2.0 * a * a * a) * LN_2) / 6.0,
        params: p.to_vec(),
        densities: vec![pvec.b(), dot_free / 2.0],
    }
}

/// Triangular lattice with circle three-hexes, then B(q) on dots, then B(1/2) on
/// triangles.
///
/// The triangle-stage term is `3 a (p1 + p0 (1-q)) (1 - a q)²`, which follows from
/// summing the two arrangements of neighboring three-hexes and using `a + b = 1`.
pub fn bound_three_hex_triangular(pvec: &ThreeHexParam, q: BernoulliParam) -> BoundReport {
    let p = pvec.get();
    let q = q.get();
    let a = pvec.a();
    let dot_free = (p[0] + 2.0 * a * a * a) / 3.0;
    let tri_free = a * (p[1] + p[0] * (1.0 - q)) * powi(1.0 - a * q, 2);
    BoundReport {
        scheme: Scheme::ThreeHex(LatticeKind::Triangular),
        value: (pvec.entropy() + 3.0 * dot_free * h_bernoulli(q) + 3.0 * tri_free * LN_2) / 9.0,
        params: vec![p[0], p[1], p[2], p[3], q],
        densities: vec![pvec.b(), dot_free * q, tri_free / 2.0],
    }
}

/// Per-stage predictions for a three-hex scheme, in the layout of
/// [`stage_predictions`]: `(unforced probability, 1-density)` per sublattice.
/// Circle sites are never forced. `q` is the dot-stage probability on the
/// triangular lattice and is ignored on the honeycomb lattice.
pub fn three_hex_stage_predictions(
    kind: LatticeKind,
    pvec: &ThreeHexParam,
    q: BernoulliParam,
) -> Result<Vec<(f64, f64)>> {
    let p = pvec.get();
    let a = pvec.a();
    let dot_free = (p[0] + 2.0 * a * a * a) / 3.0;
    match kind {
        LatticeKind::Honeycomb => Ok(vec![(1.0, pvec.b()), (dot_free, dot_free / 2.0)]),
        LatticeKind::Triangular => {
            let q = q.get();
            let tri_free = a * (p[1] + p[0] * (1.0 - q)) * powi(1.0 - a * q, 2);
            Ok(vec![(1.0, pvec.b()), (dot_free, dot_free * q), (tri_free, tri_free / 2.0)])
        }
        _ => Err(Error::Invalid(
            "three-hex schemes exist for the honeycomb and triangular lattices only".into(),
        )),
    }
}

/// Unforced probabilities of a center dot (`p0`) and of an extremity dot (`a³`).
/// One dot in three is a center.
pub fn three_hex_dot_split(pvec: &ThreeHexParam) -> (f64, f64) {
    let a = pvec.a();
    (pvec.get()[0], a * a * a)
}

/// Alternative forms kept only to show that they disagree with the sequential
/// construction. Neither is a valid bound.
pub mod variants {
    use super::*;

    /// Tripartite bound with the last-stage exponent fixed at 2 regardless of
    /// the neighborhood size. Coincides with [`bound_tripartite`] on the kagome
    /// lattice only.
    pub fn tripartite_fixed_square_exponent(
        p: BernoulliParam,
        q: BernoulliParam,
        m_prime: u32,
    ) -> Result<BoundReport> {
        tripartite(p, q, m_prime, 2)
    }

    /// Triangular three-hex bound with the last-stage term written as
    /// `3 (p1 + p0 (1-q)) a³ (2-q)²`.
    pub fn three_hex_triangular_cubic_term(pvec: &ThreeHexParam, q: BernoulliParam) -> BoundReport {
        let p = pvec.get();
        let q = q.get();
        let a = pvec.a();
        let last = 3.0 * (p[1] + p[0] * (1.0 - q)) * a * a * a * powi(2.0 - q, 2);
        BoundReport {
            scheme: Scheme::ThreeHex(LatticeKind::Triangular),
            value: (pvec.entropy() + (p[0] + 2.0 * a * a * a) * h_bernoulli(q) + last * LN_2) / 9.0,
            params: vec![p[0], p[1], p[2], p[3], q],
            densities: Vec::new(),
        }
    }
}

/// Analytic per-stage predictions for a single-site scheme: for each stage the
/// probability that a site of that sublattice is unforced, and its 1-density.
/// `stage_probs` holds one probability per stage, including the last.
pub fn stage_predictions(kind: LatticeKind, stage_probs: &[f64]) -> Result<Vec<(f64, f64)>> {
    let k = crate::lattice::build_lattice(kind).partite_count;
    if stage_probs.len() != k {
        return Err(Error::Arity { expected: k, got: stage_probs.len() });
    }
    for &p in stage_probs {
        BernoulliParam::new(p)?;
    }
    let p = stage_probs[0];
    let free: Vec<f64> = match kind {
        LatticeKind::Square => vec![1.0, powi(1.0 - p, 4)],
        LatticeKind::Honeycomb => vec![1.0, powi(1.0 - p, 3)],
        LatticeKind::Triangular | LatticeKind::Kagome => {
            let m = if kind == LatticeKind::Triangular { 3 } else { 2 };
            let q = stage_probs[1];
            let dot = powi(1.0 - p, m);
            vec![1.0, dot, dot * powi(1.0 - (1.0 - p) * q, m)]
        }
        LatticeKind::SquareMoore => {
            let (q, r) = (stage_probs[1], stage_probs[2]);
            let dz = 1.0 - (1.0 - p) * q;
            vec![
                1.0,
                powi(1.0 - p, 2),
                powi(1.0 - p, 2) * powi(dz, 4),
                powi(1.0 - p, 4) * powi(1.0 - q, 2) * powi(1.0 - dz * dz * r, 2),
            ]
        }
    };
    Ok(free.iter().zip(stage_probs).map(|(&f, &s)| (f, f * s)).collect())
}
