use proptest::prelude::*;
use tfm_core::mech::{
    BurnTail, CurveCoefs, Curves, MarginalBurns, PositionBurn, PositionWeights, PostedBurn,
};
use tfm_core::verify::counterexample::Finding;
use tfm_core::verify::{self, DeviationKind, SearchConfig, Status, Tolerances, Witness};
use tfm_core::{identity, rng, Distribution, Error, MechanismSpec};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn exp1() -> Distribution {
    Distribution::exponential(1.0).unwrap()
}

fn unit() -> Distribution {
    Distribution::uniform(0.0, 1.0).unwrap()
}

fn posted(p: f64, burn: PostedBurn) -> MechanismSpec {
    MechanismSpec::posted_price(p, burn).unwrap()
}

fn two_bid() -> MechanismSpec {
    MechanismSpec::schedule(MarginalBurns::list(vec![4.0, 3.0], BurnTail::Infinite))
        .unwrap()
        .with_max_bids(2)
        .unwrap()
}

fn harmonic(beta: f64) -> MechanismSpec {
    MechanismSpec::position(
        PositionWeights::Harmonic { scale: 1.0 },
        PositionBurn::Uniform(beta),
    )
    .unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn mir(m: &MechanismSpec, d: &Distribution) -> verify::CheckReport {
    verify::check_mir_conditions(m, d, &[1, 2, 3], 2_000, rng::DEFAULT_SEED, &tol()).unwrap()
}

#[test]
fn tuned_posted_price_passes_range_conditions() {
    let r = mir(&posted(2.0, PostedBurn::PerUser(1.0)), &exp1());
    assert_eq!(r.status, Status::Pass, "{:?}", r.criteria);
    assert!(r.witnesses.is_empty());
}

#[test]
fn low_burn_invites_amplified_bids() {
    let r = mir(&posted(2.0, PostedBurn::PerUser(0.5)), &exp1());
    assert_eq!(r.criterion("optimal_for_n").unwrap().status, Status::Fail);
    // Some witness raises the allocation of a bid with φ between 0.5 and 1.
    assert!(r.deviations().any(|w| w.kind == DeviationKind::Rebate));
}

#[test]
fn full_burn_invites_entry_fees() {
    let r = mir(&posted(2.0, PostedBurn::All), &exp1());
    assert_eq!(r.status, Status::Fail);
    assert!(r.deviations().any(|w| w.kind == DeviationKind::EntryFee));
}

#[test]
fn range_conditions_need_virtual_objective() {
    let m = harmonic(0.6)
        .with_objective(tfm_core::Objective::Value)
        .unwrap();
    assert!(matches!(
        verify::check_mir_conditions(&m, &unit(), &[1], 10, 1, &tol()),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn user_simplicity_examples() {
    for (m, n) in [(posted(2.0, PostedBurn::PerUser(1.0)), 2), (two_bid(), 2)] {
        let r = verify::check_oncus(&m, &exp1(), n, 200, 32, rng::DEFAULT_SEED, &tol()).unwrap();
        assert_eq!(r.status, Status::Pass, "{:?}", r.criteria);
    }
}

#[test]
fn corrupted_payments_invite_underbidding() {
    let (m, d) = (posted(2.0, PostedBurn::PerUser(1.0)), exp1());
    let pay = |bids: &[f64], i: usize| -> tfm_core::Result<f64> {
        let p = identity::payment_identity(&m, &d, bids, i)?;
        Ok(if i == 0 && p > 0.0 { p + 0.1 } else { p })
    };
    let r = verify::check_oncus_with(&m, &d, 2, 200, 32, rng::DEFAULT_SEED, &tol(), &pay).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.deviations().any(|w| w.kind == DeviationKind::Underbid));
}

#[test]
fn fabrication_closed_form_examples() {
    let d = unit();
    let low = verify::fabrication_delta_closed_form(&harmonic(0.4), &d, 1, 0.95).unwrap();
    assert!(close(low, 0.25 * (0.5 - 1.0 / 6.0) - 0.4 / 6.0, 1e-12));
    assert!(close(low, 1.0 / 60.0, 1e-12));
    let high = verify::fabrication_delta_closed_form(&harmonic(0.6), &d, 1, 1.0).unwrap();
    assert!(close(high, 0.2 / 3.0 - 0.1, 1e-12) && high < 0.0);
    let at_threshold = verify::fabrication_delta_closed_form(&harmonic(0.6), &d, 1, 0.8).unwrap();
    assert!(close(at_threshold, -0.1, 1e-12));
    assert!(matches!(
        verify::fabrication_delta_closed_form(&harmonic(0.6), &d, 1, 0.7),
        Err(Error::Domain(_))
    ));
}

#[test]
fn fabrication_closed_form_matches_replay() {
    let (m, d) = (harmonic(0.4), unit());
    let long = verify::replay(&m, &d, &[0.98], &[], &[0.95]).unwrap();
    let closed = verify::fabrication_delta_closed_form(&m, &d, 1, 0.95).unwrap();
    assert!(close(long.delta, closed, 1e-9));
}

#[test]
fn position_conditions_examples() {
    let d = unit();
    let cap = |m: MechanismSpec| m.with_capacity(tfm_core::Capacity::Finite(1.0)).unwrap();
    let r = verify::check_oncms_position(&cap(harmonic(0.6)), &d, 50, &tol()).unwrap();
    assert_eq!(r.status, Status::Pass);
    for m in r
        .margins
        .iter()
        .filter(|m| m.label == "sufficient_condition")
    {
        let t = m.t.unwrap() as f64;
        assert!(
            close(m.value, 0.2 / ((t + 1.0) * (t + 2.0)), 1e-12),
            "t = {t}: {}",
            m.value
        );
    }
    let r = verify::check_oncms_position(&cap(harmonic(0.4)), &d, 50, &tol()).unwrap();
    assert_eq!(r.status, Status::Fail);
    let fake = r.deviations().next().expect("fabrication witness");
    assert!(fake.delta > 0.0 && fake.fabricated.len() == 1);
    assert!(r
        .witnesses
        .iter()
        .any(|w| matches!(w, Witness::Condition(c) if c.t == 1)));

    let flat = MechanismSpec::position(
        PositionWeights::Constant { x: 1.0 },
        PositionBurn::Uniform(0.2),
    )
    .unwrap();
    assert_eq!(
        verify::check_oncms_position(&flat, &d, 50, &tol())
            .unwrap()
            .status,
        Status::Pass
    );
}

#[test]
fn generalized_conditions_examples() {
    let d = exp1();
    let good = MechanismSpec::genpos(Curves::SaturatingExp {
        gamma: 3.0,
        rate: 1.0,
        coefs: CurveCoefs::RankRatio { scale: 0.5 },
    })
    .unwrap();
    let r = verify::check_oncms_genpos(&good, &d, 64, 30, &tol()).unwrap();
    assert_eq!(r.status, Status::Pass, "{:?}", r.criteria);
    let inflated = MechanismSpec::genpos(Curves::SaturatingExp {
        gamma: 3.0,
        rate: 1.0,
        coefs: CurveCoefs::List(vec![0.25, 0.3, 0.9]),
    })
    .unwrap();
    let r = verify::check_oncms_genpos(&inflated, &d, 64, 30, &tol()).unwrap();
    assert_eq!(r.criterion("alloc_converge").unwrap().status, Status::Fail);
    assert!(r.witnesses.iter().any(
        |w| matches!(w, Witness::Condition(c) if c.condition == "alloc_converge" && c.w.is_some())
    ));
}

#[test]
fn search_examples() {
    let r = verify::deviation_search(&two_bid(), &exp1(), &[6.0, 5.0], &SearchConfig::default())
        .unwrap();
    assert!(r.delta <= 1e-12);
    let r = verify::deviation_search(&two_bid(), &exp1(), &[], &SearchConfig::default()).unwrap();
    assert_eq!(r.delta, 0.0);
    let (m, d) = (harmonic(0.4), unit());
    let r = verify::deviation_search(&m, &d, &[0.98, 0.97], &SearchConfig::default()).unwrap();
    assert_eq!(r.kind, DeviationKind::Fabricate);
    let w = r.fabricated[0];
    assert!(w < 0.97 && w > 0.9);
    let closed = verify::fabrication_delta_closed_form(&m, &d, 2, w).unwrap();
    assert!(close(r.delta, closed, 1e-6));
}

#[test]
fn two_bid_schedule_needs_its_block_limit() {
    let open =
        MechanismSpec::schedule(MarginalBurns::list(vec![4.0, 3.0], BurnTail::Infinite)).unwrap();
    // A fake third bid is never allocated, so it costs no burn.
    let r =
        verify::deviation_search(&open, &exp1(), &[6.0, 5.0], &SearchConfig::default()).unwrap();
    assert_eq!(r.kind, DeviationKind::Fabricate);
    assert!(r.delta > 0.5);
    // Both users' thresholds rise from 4 to the fake bid.
    let r = verify::replay(&open, &exp1(), &[6.0, 5.0], &[], &[4.999]).unwrap();
    assert!(close(r.delta, 2.0 * 0.999, 1e-9));
}

#[test]
fn search_respects_its_limits() {
    let many = vec![3.0; verify::MAX_SEARCH_BIDS + 1];
    let m = posted(2.0, PostedBurn::PerUser(1.0));
    assert!(matches!(
        verify::deviation_search(&m, &exp1(), &many, &SearchConfig::default()),
        Err(Error::Budget(_))
    ));
    let cfg = SearchConfig {
        budget: Some(3),
        ..SearchConfig::default()
    };
    assert!(
        verify::deviation_search(&m, &exp1(), &[3.0, 2.5], &cfg)
            .unwrap()
            .partial
    );
}

#[test]
fn increasing_burn_examples() {
    let d = exp1();
    let r = verify::counterexample_increasing_burns(
        &d,
        &MarginalBurns::list(vec![3.0, 4.0], BurnTail::ConstantLast),
        0.1,
    )
    .unwrap();
    assert_eq!(r.finding, Finding::Found);
    assert!(close(r.deviation.unwrap().delta, 0.05, 1e-9));
    let r = verify::counterexample_increasing_burns(
        &d,
        &MarginalBurns::list(vec![4.0, 3.0], BurnTail::ConstantLast),
        0.1,
    )
    .unwrap();
    assert_eq!(r.finding, Finding::NotApplicable);
    let r = verify::counterexample_increasing_burns(
        &unit(),
        &MarginalBurns::list(vec![0.3, 0.5], BurnTail::ConstantLast),
        0.05,
    )
    .unwrap();
    assert_eq!(r.finding, Finding::Found);
    // φ⁻¹(0.35) = 0.675 for the real bid, and the fake bid sits at φ⁻¹(0.325) = 0.6625.
    let dev = r.deviation.unwrap();
    let replayed = verify::replay(
        &MechanismSpec::schedule(MarginalBurns::list(vec![0.3, 0.5], BurnTail::ConstantLast))
            .unwrap(),
        &unit(),
        &dev.bids,
        &[],
        &dev.fabricated,
    )
    .unwrap();
    assert!(close(dev.delta, 0.6625 - 0.65, 1e-9) && close(dev.delta, replayed.delta, 1e-12));
}

#[test]
fn decreasing_burn_examples() {
    let d = exp1();
    let r = verify::counterexample_decreasing_burns(
        &d,
        &MarginalBurns::Harmonic {
            base: 2.0,
            scale: 1.0,
        },
        1000,
    )
    .unwrap();
    assert_eq!(r.finding, Finding::Found);
    assert!(r.deviation.unwrap().delta > 0.0);
    let flat = MarginalBurns::list(vec![2.0], BurnTail::ConstantLast);
    assert_eq!(
        verify::counterexample_decreasing_burns(&d, &flat, 100)
            .unwrap()
            .finding,
        Finding::NotApplicable
    );
    let r = verify::counterexample_decreasing_burns(
        &unit(),
        &MarginalBurns::Harmonic {
            base: 0.6,
            scale: 0.1,
        },
        200,
    )
    .unwrap();
    assert!(matches!(r.finding, Finding::Found | Finding::Inconclusive));
    assert!(r.best.is_some());
}

#[test]
fn mistuning_examples() {
    let d = exp1();
    let r = verify::posted_price_mistuning(&d, 2.0, 1.0, 1_000, 1).unwrap();
    assert_eq!(r.gain_exact, 0.0);
    assert_eq!(r.deviation.kind, DeviationKind::None);
    let r = verify::posted_price_mistuning(&d, 2.0, 2.0, 20_000, 1).unwrap();
    assert!(close(r.gain_exact, (-3.0f64).exp(), 1e-12));
    assert_eq!(r.deviation.kind, DeviationKind::EntryFee);
    let r = verify::posted_price_mistuning(&d, 3.0, 1.0, 20_000, 1).unwrap();
    assert!(close(
        r.gain_exact,
        (-2.0f64).exp() - 2.0 * (-3.0f64).exp(),
        1e-12
    ));
    assert!(r.mc_agrees(3.0));
    assert!(matches!(
        verify::posted_price_mistuning(&d, 0.5, 0.0, 10, 1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn revenue_examples() {
    let e = (-1.0f64).exp();
    let r = verify::mc_revenue_equivalence(
        &posted(1.0, PostedBurn::PerUser(0.0)),
        &exp1(),
        1,
        40_000,
        3,
    )
    .unwrap();
    assert!((r.payment_mean - e).abs() <= 3.0 * r.payment_stderr);
    assert!((r.virtual_surplus_mean - e).abs() <= 3.0 * r.virtual_surplus_stderr);
    let r = verify::mc_revenue_equivalence(&two_bid(), &exp1(), 2, 20_000, 3).unwrap();
    assert_eq!(r.status, Status::Pass);
    let r = verify::mc_revenue_equivalence(&two_bid(), &exp1(), 0, 100, 3).unwrap();
    assert_eq!((r.payment_mean, r.virtual_surplus_mean), (0.0, 0.0));
}

#[test]
fn reports_are_reproducible() {
    let m = posted(2.0, PostedBurn::PerUser(0.5));
    let a = verify::check_mir_conditions(&m, &exp1(), &[1, 2], 300, 9, &tol()).unwrap();
    let b = verify::check_mir_conditions(&m, &exp1(), &[1, 2], 300, 9, &tol()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verdicts_match_witnesses() {
    for m in [
        posted(2.0, PostedBurn::PerUser(1.0)),
        posted(2.0, PostedBurn::PerUser(0.5)),
        two_bid(),
    ] {
        let r = mir(&m, &exp1());
        let failed = r.criteria.iter().any(|c| c.status == Status::Fail);
        assert_eq!(failed, r.status == Status::Fail);
        assert_eq!(failed, !r.witnesses.is_empty());
        for c in &r.criteria {
            assert_eq!(c.status == Status::Fail, c.violations > 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn censoring_never_helps_tuned_mechanisms(v in prop::collection::vec(0.0f64..6.0, 1..5), p in 1.0f64..4.0) {
        let d = exp1();
        let cfg = SearchConfig { max_fabricate: 0, ..SearchConfig::default() };
        for m in [posted(p, PostedBurn::PerUser(p - 1.0)), two_bid()] {
            if m.max_bids.is_some_and(|k| v.len() > k) {
                continue;
            }
            prop_assert!(verify::deviation_search(&m, &d, &v, &cfg).unwrap().delta <= 1e-9);
        }
    }

    #[test]
    fn replay_matches_outcomes(v in prop::collection::vec(0.0f64..6.0, 1..5), w in 1.0f64..6.0, drop in 0usize..5) {
        let (m, d) = (MechanismSpec::schedule(MarginalBurns::list(vec![2.0, 1.0], BurnTail::ConstantLast)).unwrap(), exp1());
        let drop = drop % v.len();
        let r = verify::replay(&m, &d, &v, &[drop], &[w]).unwrap();
        let mut seen: Vec<f64> = v.iter().enumerate().filter(|p| p.0 != drop).map(|p| *p.1).collect();
        let kept = seen.len();
        seen.push(w);
        let o = m.outcome_values(&d, &seen).unwrap();
        let after = o.payments[..kept].iter().sum::<f64>() - o.burn;
        let before = tfm_core::mech::miner_revenue(&m.outcome_values(&d, &v).unwrap());
        prop_assert!((r.delta - (after - before)).abs() <= 1e-9);
    }

    #[test]
    fn range_conditions_match_burn_tuning(p in 1.2f64..4.0, off in prop::sample::select(vec![-0.5, 0.0, 0.5])) {
        let m = posted(p, PostedBurn::PerUser(p - 1.0 + off));
        let r = verify::check_mir_conditions(&m, &exp1(), &[2], 300, 5, &tol()).unwrap();
        prop_assert_eq!(r.status == Status::Pass, off == 0.0);
    }
}
