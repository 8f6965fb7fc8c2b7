use std::sync::Arc;

use proptest::prelude::*;

use hcbound_core::block_bound::{
    block_bound, density_profile, reduced_family, unforced_odd_density, BlockDistribution, Generator,
};
use hcbound_core::blocks::{d4_canonical, Block, OddGeometry};
use hcbound_core::bounds::{
    bound_bipartite, bound_square_moore, bound_three_hex_honeycomb, bound_three_hex_triangular,
    bound_tripartite, BernoulliParam, ThreeHexParam,
};
use hcbound_core::math::LN_2;
use hcbound_core::optimize::{merge, Component, Domain, StartResult};
use hcbound_core::oracles::ReferenceConstants;

fn bp(p: f64) -> BernoulliParam {
    BernoulliParam::new(p).unwrap()
}

fn three_hex(raw: [f64; 4]) -> ThreeHexParam {
    let s = raw[0] + 3.0 * raw[1] + 3.0 * raw[2] + raw[3];
    ThreeHexParam::new(raw.map(|v| v / s)).unwrap()
}

fn positive() -> impl Strategy<Value = f64> {
    1e-6..1.0f64
}

proptest! {
    #[test]
    fn closed_bounds_lie_below_the_reference(p in 0.0..=1.0f64, q in 0.0..=1.0f64, r in 0.0..=1.0f64) {
        let sq = bound_bipartite(bp(p), 4).unwrap().value;
        let hc = bound_bipartite(bp(p), 3).unwrap().value;
        let tr = bound_tripartite(bp(p), bp(q), 3).unwrap().value;
        let kg = bound_tripartite(bp(p), bp(q), 2).unwrap().value;
        let mo = bound_square_moore(bp(p), bp(q), bp(r)).unwrap().value;
        for v in [sq, hc, tr, kg, mo] {
            prop_assert!((0.0..=LN_2).contains(&v));
        }
        prop_assert!(sq <= ReferenceConstants::SQUARE.entropy);
        prop_assert!(hc <= ReferenceConstants::HONEYCOMB.entropy);
        prop_assert!(tr <= ReferenceConstants::TRIANGULAR.entropy);
    }

    #[test]
    fn three_hex_bounds_lie_below_the_reference(
        a in positive(), b in positive(), c in positive(), d in positive(), q in 0.0..=1.0f64
    ) {
        let pvec = three_hex([a, b, c, d]);
        let h = bound_three_hex_honeycomb(&pvec).value;
        let t = bound_three_hex_triangular(&pvec, bp(q)).value;
        prop_assert!((0.0..=ReferenceConstants::HONEYCOMB.entropy).contains(&h));
        prop_assert!((0.0..=ReferenceConstants::TRIANGULAR.entropy).contains(&t));
    }

    #[test]
    fn d4_canonical_is_idempotent(n in 1usize..=5, bits in any::<u32>()) {
        let mask = if n * n == 32 { bits } else { bits & ((1u32 << (n * n)) - 1) };
        let b = Block::new(n, mask).unwrap();
        let c = d4_canonical(b);
        prop_assert_eq!(d4_canonical(c), c);
        prop_assert!(c.mask() <= mask);
        prop_assert_eq!(c.ones(), b.ones());
    }

    #[test]
    fn weak_toggles_preserve_forcing(bits in 0u32..512) {
        let geo = OddGeometry::new(3);
        let w = geo.weak(bits);
        for pos in 0..9 {
            if w >> pos & 1 == 1 {
                prop_assert_eq!(geo.forced(bits ^ (1 << pos)), geo.forced(bits));
            }
        }
    }

    #[test]
    fn simplex_reparameterization_is_feasible(
        weights in prop::collection::vec(0.5..8.0f64, 1..12),
        seed in any::<u64>()
    ) {
        let k = weights.len();
        let domain = Domain::new(vec![
            Component::Simplex { weights: weights.clone() },
            Component::Box { lo: -1.0, hi: 2.0 },
        ]).unwrap();
        let z = hcbound_core::optimize::start_point(&domain, seed, 3);
        let mut x = vec![0.0; k + 1];
        domain.to_point(&z, &mut x);
        let total: f64 = weights.iter().zip(&x).map(|(w, v)| w * v).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(x[..k].iter().all(|&v| v > 0.0));
        prop_assert!(x[k] > -1.0 && x[k] < 2.0);
        prop_assert!(domain.violation(&x) < 1e-10);
    }

    #[test]
    fn merge_ignores_start_order(values in prop::collection::vec(0.0..1.0f64, 1..10), rot in 0usize..10) {
        let runs: Vec<StartResult> = values.iter().enumerate().map(|(i, &v)| StartResult {
            start: i,
            x: vec![v],
            value: (v * 4.0).round(),
            iterations: i,
            converged: true,
            gradient_norm: 0.0,
        }).collect();
        let mut rotated = runs.clone();
        let len = rotated.len();
        rotated.rotate_left(rot % len);
        let a = merge(runs).unwrap();
        let b = merge(rotated).unwrap();
        prop_assert_eq!(a.best_start, b.best_start);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn block_bounds_and_profiles_are_well_formed(raw in prop::collection::vec(1e-4..1.0f64, 47)) {
        let family = reduced_family(3).unwrap();
        let mult = family.multiplicities();
        let z: f64 = raw.iter().zip(&mult).map(|(a, b)| a * b).sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / z).collect();
        let d = BlockDistribution::new(family, probs).unwrap();
        let r = block_bound(&d);
        prop_assert!((0.0..=LN_2).contains(&r.value));
        prop_assert!(r.value <= ReferenceConstants::SQUARE.entropy);
        let u = unforced_odd_density(&d);
        prop_assert!((0.0..=1.0).contains(&u));
        let prof = density_profile(3, &Generator::Blocks(d)).unwrap();
        prop_assert!((prof.total() - 1.0).abs() < 1e-10);
        prop_assert!(prof.occupancy.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn one_by_one_blocks_reduce_to_the_bipartite_bound(p in 0.0..=1.0f64) {
        let d = BlockDistribution::new(reduced_family(1).unwrap(), vec![1.0 - p, p]).unwrap();
        let closed = bound_bipartite(bp(p), 4).unwrap().value;
        prop_assert!((block_bound(&d).value - closed).abs() < 1e-12);
    }
}

#[test]
fn family_is_shared_not_copied() {
    let f = reduced_family(2).unwrap();
    let d = BlockDistribution::uniform(f.clone());
    assert!(Arc::ptr_eq(d.family(), &f));
}
