use proptest::prelude::*;
use tfm_core::mech::{
    coalition_utility, miner_revenue, rank_order, BurnTail, CurveCoefs, Curves, MarginalBurns,
    PositionBurn, PositionWeights, PostedBurn,
};
use tfm_core::{Capacity, Distribution, Error, MechanismSpec};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

fn exp1() -> Distribution {
    Distribution::exponential(1.0).unwrap()
}

fn unit() -> Distribution {
    Distribution::uniform(0.0, 1.0).unwrap()
}

fn posted() -> MechanismSpec {
    MechanismSpec::posted_price(2.0, PostedBurn::PerUser(1.0)).unwrap()
}

fn two_bid() -> MechanismSpec {
    MechanismSpec::schedule(MarginalBurns::list(vec![4.0, 3.0], BurnTail::Infinite)).unwrap()
}

fn harmonic(beta: f64) -> MechanismSpec {
    MechanismSpec::position(
        PositionWeights::Harmonic { scale: 1.0 },
        PositionBurn::Uniform(beta),
    )
    .unwrap()
}

#[test]
fn allocation_examples() {
    assert_eq!(
        posted().allocate_values(&exp1(), &[3.0, 1.5]).unwrap(),
        vec![1.0, 0.0]
    );
    assert_eq!(
        two_bid().allocate_values(&exp1(), &[6.0, 5.0]).unwrap(),
        vec![1.0, 1.0]
    );
    let x = harmonic(0.6)
        .allocate_values(&unit(), &[0.9, 0.85])
        .unwrap();
    assert!(close(x[0], 0.5) && close(x[1], 1.0 / 6.0));
}

#[test]
fn allocation_follows_rank_not_position() {
    let x = harmonic(0.6)
        .allocate_values(&unit(), &[0.85, 0.9])
        .unwrap();
    assert!(close(x[0], 1.0 / 6.0) && close(x[1], 0.5));
}

#[test]
fn outcome_examples() {
    let o = posted().outcome_values(&exp1(), &[3.0, 1.5]).unwrap();
    assert_eq!(o.alloc, vec![1.0, 0.0]);
    assert!(close(o.payments[0], 2.0) && close(o.payments[1], 0.0) && close(o.burn, 1.0));
    assert!(close(miner_revenue(&o), 1.0));
    assert!(close(coalition_utility(&o, &[3.0, 1.5]), 2.0));

    let o = two_bid().outcome_values(&exp1(), &[6.0, 5.0]).unwrap();
    assert!(close(o.payments[0], 4.0) && close(o.payments[1], 4.0) && close(o.burn, 7.0));
    assert!(close(miner_revenue(&o), 1.0));
    assert!(close(coalition_utility(&o, &[6.0, 5.0]), 4.0));
}

#[test]
fn empty_block_burns_base() {
    for m in [posted(), two_bid(), harmonic(0.6)] {
        let o = m
            .clone()
            .with_base_burn(0.25)
            .unwrap()
            .outcome_values(&exp1(), &[])
            .unwrap();
        assert!(o.payments.is_empty());
        assert!(close(o.burn, 0.25));
        assert!(close(miner_revenue(&o), -0.25));
        assert!(close(coalition_utility(&o, &[]), -0.25));
    }
}

#[test]
fn two_bid_regions_against_subsets() {
    // Value v has virtual value v − 1; burns 4 for one user and 7 for two.
    let (m, d) = (two_bid(), exp1());
    for &(a, b, want) in &[
        (6.0, 5.0, (1.0, 1.0)),
        (5.5, 3.5, (1.0, 0.0)),
        (3.5, 3.0, (0.0, 0.0)),
        (3.5, 5.5, (0.0, 1.0)),
    ] {
        assert_eq!(
            m.allocate_values(&d, &[a, b]).unwrap(),
            vec![want.0, want.1],
            "bids ({a}, {b})"
        );
    }
}

#[test]
fn finite_capacity_needs_infinite_tail() {
    let open = MarginalBurns::list(vec![4.0, 3.0], BurnTail::ConstantLast);
    assert!(matches!(
        MechanismSpec::schedule(open)
            .unwrap()
            .with_capacity(Capacity::Finite(2.0)),
        Err(Error::InvalidMechanism(_))
    ));
    assert!(two_bid().with_capacity(Capacity::Finite(2.0)).is_ok());
}

#[test]
fn position_capacity_is_checked() {
    let w = PositionWeights::Constant { x: 0.5 };
    let m = MechanismSpec::position(w, PositionBurn::Uniform(0.6)).unwrap();
    assert!(matches!(
        m.with_capacity(Capacity::Finite(1.0)),
        Err(Error::InvalidMechanism(_))
    ));
    assert!(harmonic(0.6).with_capacity(Capacity::Finite(1.0)).is_ok());
}

#[test]
fn max_bids_is_enforced() {
    let m = two_bid().with_max_bids(2).unwrap();
    assert!(matches!(
        m.allocate_values(&exp1(), &[3.0, 2.0, 1.0]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn genpos_curves_below_reserve_are_rejected() {
    let curves = Curves::SaturatingExp {
        gamma: 0.5,
        rate: 1.0,
        coefs: CurveCoefs::RankRatio { scale: 0.5 },
    };
    let m = MechanismSpec::genpos(curves).unwrap();
    assert!(matches!(
        m.check_against(&exp1()),
        Err(Error::InvalidMechanism(_))
    ));
}

#[test]
fn genpos_allocation_example() {
    let curves = Curves::SaturatingExp {
        gamma: 3.0,
        rate: 1.0,
        coefs: CurveCoefs::RankRatio { scale: 0.5 },
    };
    let m = MechanismSpec::genpos(curves).unwrap();
    let x = m.allocate_values(&exp1(), &[3.5, 3.0, 2.0]).unwrap();
    assert!(close(x[0], 1.0 - (-0.5f64).exp() / 4.0));
    assert!(close(x[1], 1.0 - 1.0 / 3.0));
    assert_eq!(x[2], 0.0);
}

#[test]
fn harmonic_weights_sum() {
    let w = PositionWeights::Harmonic { scale: 1.0 };
    assert!(close(w.x(1), 0.5) && close(w.x(3), 1.0 / 12.0));
    assert!(close(w.partial_sum(9), 0.9));
    assert!(close(w.total(), 1.0));
}

#[test]
fn rank_order_ties() {
    assert_eq!(rank_order(&[2.0, 2.0, 3.0]), vec![2, 0, 1]);
}

fn schedule_strategy() -> impl Strategy<Value = MechanismSpec> {
    prop::collection::vec(0.0f64..4.0, 1..5).prop_map(|b| {
        MechanismSpec::schedule(MarginalBurns::list(b, BurnTail::ConstantLast)).unwrap()
    })
}

/// Brute force: every subset, each ranked by value, scored with the
/// schedule's cumulative burn; the optimum is always a prefix by value.
fn best_subset_value(m: &MechanismSpec, d: &Distribution, v: &[f64]) -> f64 {
    let tfm_core::Family::Schedule { burns } = &m.family else {
        unreachable!()
    };
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << v.len()) {
        let chosen: Vec<f64> = (0..v.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| v[i])
            .collect();
        let score: f64 = chosen
            .iter()
            .map(|&x| d.virtual_value(x).unwrap())
            .sum::<f64>()
            - burns.cumulative(chosen.len()).unwrap();
        best = best.max(score);
    }
    best
}

proptest! {
    #[test]
    fn schedule_picks_the_best_subset(m in schedule_strategy(), v in prop::collection::vec(0.0f64..6.0, 0..7)) {
        let d = exp1();
        let x = m.allocate_values(&d, &v).unwrap();
        let tfm_core::Family::Schedule { burns } = &m.family else { unreachable!() };
        let k = x.iter().filter(|&&a| a > 0.0).count();
        let chosen: f64 = v.iter().zip(&x).filter(|p| *p.1 > 0.0).map(|p| d.virtual_value(*p.0).unwrap()).sum();
        prop_assert!((chosen - burns.cumulative(k).unwrap() - best_subset_value(&m, &d, &v)).abs() <= 1e-9);
    }

    #[test]
    fn allocation_is_monotone_in_own_bid(
        beta in 0.0f64..0.8,
        v in prop::collection::vec(0.0f64..1.0, 1..6),
        i in 0usize..6,
        z1 in 0.0f64..1.0,
        z2 in 0.0f64..1.0,
    ) {
        let i = i % v.len();
        let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        let m = harmonic(beta);
        let d = unit();
        let mut a = v.clone();
        a[i] = lo;
        let mut b = v;
        b[i] = hi;
        prop_assert!(m.allocate_values(&d, &a).unwrap()[i] <= m.allocate_values(&d, &b).unwrap()[i] + 1e-15);
    }

    #[test]
    fn outcome_is_anonymous(v in prop::collection::vec(0.0f64..5.0, 0..6), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut r = tfm_core::rng::stream(seed, "perm", 0);
        let mut perm: Vec<usize> = (0..v.len()).collect();
        perm.shuffle(&mut r);
        let w: Vec<f64> = perm.iter().map(|&j| v[j]).collect();
        let d = exp1();
        let m = MechanismSpec::schedule(MarginalBurns::list(vec![1.0, 0.5], BurnTail::ConstantLast)).unwrap();
        let a = m.outcome_values(&d, &v).unwrap();
        let b = m.outcome_values(&d, &w).unwrap();
        prop_assert!((a.burn - b.burn).abs() <= 1e-12);
        prop_assert!((miner_revenue(&a) - miner_revenue(&b)).abs() <= 1e-9);
    }

    #[test]
    fn included_bids_clear_the_threshold(p in 0.5f64..4.0, v in prop::collection::vec(0.0f64..6.0, 0..8)) {
        let d = exp1();
        let m = MechanismSpec::posted_price(p, PostedBurn::PerUser(p - 1.0)).unwrap();
        let o = m.outcome_values(&d, &v).unwrap();
        for (x, &b) in o.alloc.iter().zip(&v) {
            prop_assert_eq!(*x > 0.0, b >= p);
        }
        prop_assert!((o.burn - (p - 1.0) * o.alloc.iter().sum::<f64>()).abs() <= 1e-12);
    }
}
