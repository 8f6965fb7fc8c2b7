//! Each closed-form scheme as an optimization problem over its parameters.

use alloc::vec;
use alloc::vec::Vec;

use crate::bounds::{
    bound_bipartite, bound_equalized_bipartite, bound_square_moore, bound_three_hex_honeycomb,
    bound_three_hex_triangular, bound_tripartite, equalization_limit, BernoulliParam, BoundReport, Scheme,
    ThreeHexParam, THREE_HEX_MULTIPLICITY,
};
use crate::lattice::LatticeKind;
use crate::optimize::{maximize, Component, Domain, Objective, OptimizationResult, Settings};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeProblem {
    scheme: Scheme,
    domain: Domain,
}

fn unit() -> Component {
    Component::Box { lo: 0.0, hi: 1.0 }
}

fn exponent(kind: LatticeKind) -> u32 {
    if kind == LatticeKind::Square {
        4
    } else {
        3
    }
}

impl SchemeProblem {
    /// Block schemes are handled by `block_bound`.
    pub fn new(scheme: Scheme) -> Result<Self> {
        let unsupported = || Err(Error::Invalid("scheme is not defined on this lattice".into()));
        let components = match scheme {
            Scheme::Closed(kind) => vec![unit(); crate::lattice::build_lattice(kind).partite_count - 1],
            Scheme::Equalized(kind @ (LatticeKind::Square | LatticeKind::Honeycomb)) => {
                vec![Component::Box { lo: 0.0, hi: equalization_limit(exponent(kind)) }]
            }
            Scheme::ThreeHex(LatticeKind::Honeycomb) => {
                vec![Component::Simplex { weights: THREE_HEX_MULTIPLICITY.to_vec() }]
            }
            Scheme::ThreeHex(LatticeKind::Triangular) => {
                vec![Component::Simplex { weights: THREE_HEX_MULTIPLICITY.to_vec() }, unit()]
            }
            Scheme::Block(_) => {
                return Err(Error::Invalid("block schemes are optimized by block_bound".into()))
            }
            _ => return unsupported(),
        };
        Ok(SchemeProblem { scheme, domain: Domain::new(components)? })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Evaluates the scheme at a point of its domain.
    pub fn report(&self, x: &[f64]) -> Result<BoundReport> {
        if x.len() != self.domain.dim() {
            return Err(Error::Arity { expected: self.domain.dim(), got: x.len() });
        }
        let bp = BernoulliParam::new;
        match self.scheme {
            Scheme::Closed(kind) => match kind {
                LatticeKind::Square | LatticeKind::Honeycomb => bound_bipartite(bp(x[0])?, exponent(kind)),
                LatticeKind::Triangular => bound_tripartite(bp(x[0])?, bp(x[1])?, 3),
                LatticeKind::Kagome => bound_tripartite(bp(x[0])?, bp(x[1])?, 2),
                LatticeKind::SquareMoore => bound_square_moore(bp(x[0])?, bp(x[1])?, bp(x[2])?),
            },
            Scheme::Equalized(kind) => bound_equalized_bipartite(bp(x[0])?, exponent(kind)),
            Scheme::ThreeHex(kind) => {
                let pvec = ThreeHexParam::with_tolerance([x[0], x[1], x[2], x[3]], 1e-9)?;
                if kind == LatticeKind::Honeycomb {
                    Ok(bound_three_hex_honeycomb(&pvec))
                } else {
                    Ok(bound_three_hex_triangular(&pvec, bp(x[4])?))
                }
            }
            Scheme::Block(_) => Err(Error::Invalid("block schemes are optimized by block_bound".into())),
        }
    }
}

impl Objective for SchemeProblem {
    fn value(&self, x: &[f64]) -> f64 {
        self.report(x).map(|r| r.value).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOptimum {
    pub report: BoundReport,
    pub result: OptimizationResult,
}

pub fn optimize_scheme(scheme: Scheme, settings: &Settings) -> Result<SchemeOptimum> {
    let problem = SchemeProblem::new(scheme)?;
    let result = maximize(&problem, problem.domain(), settings)?;
    finish(&problem, result)
}

/// Attaches the report at the argmax.
pub fn finish(problem: &SchemeProblem, result: OptimizationResult) -> Result<SchemeOptimum> {
    let report = problem.report(&result.argmax)?;
    Ok(SchemeOptimum { report, result })
}

/// Every scheme with a closed form, in table order.
pub fn closed_form_schemes() -> Vec<Scheme> {
    let mut v: Vec<Scheme> = LatticeKind::ALL.iter().map(|&k| Scheme::Closed(k)).collect();
    v.push(Scheme::Equalized(LatticeKind::Square));
    v.push(Scheme::Equalized(LatticeKind::Honeycomb));
    v.push(Scheme::ThreeHex(LatticeKind::Honeycomb));
    v.push(Scheme::ThreeHex(LatticeKind::Triangular));
    v
}
