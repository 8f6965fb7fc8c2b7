//! Multistart optimization with one rayon task per start.

use rayon::prelude::*;

use hcbound_core::block_bound::{block_bound, BlockDistribution, BlockObjective, BlockOptimum};
use hcbound_core::blocks::BlockFamily;
use hcbound_core::bounds::Scheme;
use hcbound_core::optima::{finish, SchemeOptimum, SchemeProblem};
use hcbound_core::optimize::{merge, run_start, Domain, Objective, OptimizationResult, Settings};
use hcbound_core::Result;

use std::sync::Arc;

/// Same result as the sequential `maximize`: starts are merged in start order.
pub fn maximize_parallel<O: Objective + Sync + ?Sized>(
    objective: &O,
    domain: &Domain,
    settings: &Settings,
) -> Result<OptimizationResult> {
    let runs = (0..settings.starts.max(1))
        .into_par_iter()
        .map(|i| run_start(objective, domain, settings, i))
        .collect::<Result<Vec<_>>>()?;
    merge(runs)
}

pub fn optimize_scheme_parallel(scheme: Scheme, settings: &Settings) -> Result<SchemeOptimum> {
    let problem = SchemeProblem::new(scheme)?;
    let result = maximize_parallel(&problem, problem.domain(), settings)?;
    finish(&problem, result)
}

pub fn optimize_block_parallel(family: Arc<BlockFamily>, settings: &Settings) -> Result<BlockOptimum> {
    let objective = BlockObjective::new(family.clone());
    let result = maximize_parallel(&objective, &objective.domain(), settings)?;
    let distribution = BlockDistribution::new(family, result.argmax.clone())?;
    let report = block_bound(&distribution);
    Ok(BlockOptimum { distribution, report, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hcbound_core::block_bound::reduced_family;
    use hcbound_core::lattice::LatticeKind;
    use hcbound_core::optima::optimize_scheme;
    use hcbound_core::optimize::maximize;

    #[test]
    fn parallel_matches_sequential() {
        let s = Settings { starts: 6, ..Settings::default() };
        let scheme = Scheme::Closed(LatticeKind::SquareMoore);
        assert_eq!(optimize_scheme_parallel(scheme, &s).unwrap(), optimize_scheme(scheme, &s).unwrap());
        let f = reduced_family(2).unwrap();
        let obj = BlockObjective::new(f.clone());
        let seq = maximize(&obj, &obj.domain(), &s).unwrap();
        assert_eq!(optimize_block_parallel(f, &s).unwrap().result, seq);
    }
}
