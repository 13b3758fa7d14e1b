use proptest::prelude::*;
use tfm_core::identity::{
    burn_from_identity, critical_bid, genpos_burn_closed_form, genpos_payment_closed_form,
    gradient_check, payment_identity, payments, smoothed_utility,
};
use tfm_core::mech::{
    BurnTail, CurveCoefs, Curves, MarginalBurns, PositionBurn, PositionWeights, PostedBurn,
};
use tfm_core::{Distribution, Error, MechanismSpec};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
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

fn genpos() -> MechanismSpec {
    MechanismSpec::genpos(Curves::SaturatingExp {
        gamma: 3.0,
        rate: 1.0,
        coefs: CurveCoefs::RankRatio { scale: 0.5 },
    })
    .unwrap()
}

#[test]
fn critical_bid_examples() {
    assert!(close(
        critical_bid(&posted(), &exp1(), &[3.0, 1.5], 0).unwrap(),
        2.0,
        1e-11
    ));
    assert!(close(
        critical_bid(&posted(), &exp1(), &[0.3, 1.5], 1).unwrap(),
        2.0,
        1e-11
    ));
    assert!(close(
        critical_bid(&two_bid(), &exp1(), &[6.0, 5.0], 1).unwrap(),
        4.0,
        1e-9
    ));
    assert!(close(
        critical_bid(&two_bid(), &exp1(), &[5.0, 3.5], 0).unwrap(),
        5.0,
        1e-9
    ));
}

#[test]
fn critical_bid_refuses_randomized_allocations() {
    assert!(matches!(
        critical_bid(&harmonic(0.6), &unit(), &[0.9], 0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn payment_examples() {
    assert!(close(
        payment_identity(&posted(), &exp1(), &[3.0, 1.5], 0).unwrap(),
        2.0,
        1e-12
    ));
    assert!(close(
        payment_identity(&posted(), &exp1(), &[3.0, 1.5], 1).unwrap(),
        0.0,
        1e-12
    ));
    // Own-bid allocation is 1/6 from 0.8 to 0.85, then 1/2.
    let want = 0.8 / 6.0 + 0.85 * (0.5 - 1.0 / 6.0);
    assert!(close(
        payment_identity(&harmonic(0.6), &unit(), &[0.9, 0.85], 0).unwrap(),
        want,
        1e-12
    ));
}

#[test]
fn genpos_single_bid_payments() {
    let (m, d) = (genpos(), exp1());
    // x(z) = 1 − e^{−(z−3)}/4 from 3 on, zero below.
    let x = |z: f64| 1.0 - (-(z - 3.0)).exp() / 4.0;
    let integral = |z: f64| (z - 3.0) - 0.25 * (1.0 - (-(z - 3.0)).exp());
    for v in [3.0, 3.5, 5.0] {
        let want = v * x(v) - integral(v);
        assert!(
            close(payment_identity(&m, &d, &[v], 0).unwrap(), want, 1e-10),
            "v = {v}"
        );
        assert!(
            close(
                genpos_payment_closed_form(&m, &d, &[v], 0).unwrap(),
                want,
                1e-12
            ),
            "v = {v}"
        );
    }
    assert!(close(
        payment_identity(&m, &d, &[3.0], 0).unwrap(),
        2.25,
        1e-10
    ));
}

#[test]
fn utility_examples() {
    assert!(close(
        smoothed_utility(&two_bid(), &exp1())
            .eval(&[5.0, 4.0])
            .unwrap(),
        2.0,
        1e-12
    ));
    let u = smoothed_utility(&harmonic(0.6), &unit())
        .eval(&[0.8, 0.7])
        .unwrap();
    assert!(close(u, 0.2 * 0.5 + 0.1 / 6.0, 1e-12));
    for m in [posted(), two_bid(), harmonic(0.6)] {
        assert!(close(
            smoothed_utility(&m, &exp1()).eval(&[-0.5, -1.0]).unwrap(),
            0.0,
            1e-12
        ));
    }
}

#[test]
fn burn_identity_examples() {
    assert!(close(
        burn_from_identity(&two_bid(), &exp1(), &[6.0, 5.0]).unwrap(),
        7.0,
        1e-12
    ));
    let single = MechanismSpec::posted_price(2.0, PostedBurn::PerUser(1.0)).unwrap();
    assert!(close(
        burn_from_identity(&single, &exp1(), &[3.0]).unwrap(),
        1.0,
        1e-12
    ));
    for m in [posted(), two_bid(), harmonic(0.6), genpos()] {
        assert!(close(
            burn_from_identity(&m, &exp1(), &[]).unwrap(),
            0.0,
            1e-12
        ));
    }
}

#[test]
fn gradient_examples() {
    let r = gradient_check(&smoothed_utility(&posted(), &exp1()), &[3.0, 1.5]).unwrap();
    assert!(r.checked == 2 && r.max_deviation <= 1e-6);
    let (m, d) = (harmonic(0.6), unit());
    let r = gradient_check(&smoothed_utility(&m, &d), &[0.9, 0.85]).unwrap();
    assert!(r.checked == 2 && r.max_deviation <= 1e-6);
    let (m, d) = (genpos(), exp1());
    let u = smoothed_utility(&m, &d);
    let fd = u.partial_fd(&[2.5], 0, 1e-5).unwrap();
    assert!(close(fd, 1.0 - (-0.5f64).exp() / 4.0, 1e-5));
    assert!(gradient_check(&u, &[3.5]).unwrap().max_deviation <= 1e-5);
}

#[test]
fn rising_position_weights_are_rejected() {
    // Position weights that rise with rank break own-bid monotonicity.
    let w = PositionWeights::List {
        values: vec![0.1, 0.5],
        tail: tfm_core::mech::WeightTail::Zero,
    };
    assert!(MechanismSpec::position(w, PositionBurn::Uniform(0.0)).is_err());
}

fn deterministic() -> impl Strategy<Value = MechanismSpec> {
    prop_oneof![
        (1.0f64..4.0)
            .prop_map(|p| MechanismSpec::posted_price(p, PostedBurn::PerUser(p - 1.0)).unwrap()),
        prop::collection::vec(0.0f64..4.0, 1..4).prop_map(|b| MechanismSpec::schedule(
            MarginalBurns::list(b, BurnTail::ConstantLast)
        )
        .unwrap()),
    ]
}

fn prefix_family() -> impl Strategy<Value = MechanismSpec> {
    prop_oneof![
        prop::collection::vec(0.0f64..4.0, 1..4).prop_map(|b| MechanismSpec::schedule(
            MarginalBurns::list(b, BurnTail::ConstantLast)
        )
        .unwrap()),
        (0.2f64..1.0, 0.0f64..3.0).prop_map(|(s, b)| {
            MechanismSpec::position(
                PositionWeights::Harmonic { scale: s },
                PositionBurn::Uniform(b),
            )
            .unwrap()
        }),
    ]
}

proptest! {
    #[test]
    fn payment_is_allocation_times_critical_bid(m in deterministic(), v in prop::collection::vec(0.0f64..6.0, 1..5)) {
        let d = exp1();
        let x = m.allocate_values(&d, &v).unwrap();
        let p = payments(&m, &d, &v).unwrap();
        for i in 0..v.len() {
            let expected = if x[i] > 0.0 { critical_bid(&m, &d, &v, i).unwrap() } else { 0.0 };
            prop_assert!((p[i] - expected).abs() <= 1e-9, "user {} pays {} critical {}", i, p[i], expected);
        }
    }

    #[test]
    fn burn_routes_agree(m in prefix_family(), v in prop::collection::vec(0.0f64..6.0, 0..6)) {
        let d = exp1();
        let direct = m.outcome_values(&d, &v).unwrap().burn;
        prop_assert!((direct - burn_from_identity(&m, &d, &v).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn genpos_routes_agree(v in prop::collection::vec(0.0f64..8.0, 0..5)) {
        let (m, d) = (genpos(), exp1());
        let a = burn_from_identity(&m, &d, &v).unwrap();
        let b = genpos_burn_closed_form(&m, &d, &v).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        for i in 0..v.len() {
            let p = payment_identity(&m, &d, &v, i).unwrap();
            let q = genpos_payment_closed_form(&m, &d, &v, i).unwrap();
            prop_assert!((p - q).abs() <= 1e-8 * q.abs().max(1.0));
        }
    }

    #[test]
    fn utility_is_convex(m in prefix_family(), a in prop::collection::vec(-3.0f64..5.0, 3), b in prop::collection::vec(-3.0f64..5.0, 3), lam in 0.0f64..1.0) {
        let d = exp1();
        let u = smoothed_utility(&m, &d);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
        let lhs = u.eval(&mix).unwrap();
        let rhs = lam * u.eval(&a).unwrap() + (1.0 - lam) * u.eval(&b).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn nonpositive_entries_do_not_move_utility(m in prefix_family(), a in prop::collection::vec(-3.0f64..5.0, 0..4), extra in prop::collection::vec(-3.0f64..0.0, 1..3)) {
        let d = exp1();
        let u = smoothed_utility(&m, &d);
        let mut ext = a.clone();
        ext.extend(extra);
        prop_assert!((u.eval(&ext).unwrap() - u.eval(&a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn gradient_matches_allocation(m in prefix_family(), v in prop::collection::vec(0.0f64..6.0, 1..5)) {
        let d = exp1();
        let r = gradient_check(&smoothed_utility(&m, &d), &v).unwrap();
        prop_assert!(r.max_deviation <= 1e-6);
    }
}
