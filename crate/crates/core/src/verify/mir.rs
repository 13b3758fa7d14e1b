//! Range-optimality conditions: Myerson-in-range (virtual space) and its
//! coalition analogue in value space.
//!
//! Three conditions are sampled on the mechanism's own outcome rule:
//! (A) the outcome at `v` beats the outcome at any other profile `w` when
//! scored with `g(v)`; (B) nobody with `g(v) < 0` is allocated; (C) adding
//! bids with `g ≤ 0` leaves the objective unchanged.

use super::oncms::{check_oncms_genpos, check_oncms_position};
use super::{
    CheckMeta, CheckReport, CriterionReport, DeviationKind, DeviationReport, Measure, Status,
    Tolerances, Witness, MAX_WITNESSES,
};
use crate::dist::{ConditionalNegVV, Distribution};
use crate::error::{Error, Result};
use crate::mech::{Family, MechanismSpec, Objective};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;

const RANDOM_PROFILES: usize = 4;
const COORDINATE_SWAPS: usize = 4;
const APPEND_TRIALS: usize = 16;

#[derive(Default)]
struct Tally {
    trials: usize,
    violations: usize,
    worst: f64,
    witnesses: Vec<DeviationReport>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst: f64::INFINITY,
            ..Default::default()
        }
    }

    fn record(&mut self, margin: f64, violated: bool, witness: impl FnOnce() -> DeviationReport) {
        self.trials += 1;
        self.worst = self.worst.min(margin);
        if violated {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst = self.worst.min(other.worst);
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses
            .extend(other.witnesses.into_iter().take(room));
    }

    fn report(&self, name: &str) -> CriterionReport {
        let mut c = CriterionReport::counted(name, self.trials, self.violations);
        if self.trials > 0 {
            c.worst_margin = Some(self.worst);
        }
        c
    }
}

/// `Σ g(vᵢ)·xᵢ(w) − B(w)` for `g(v)` and the outcome at `w`.
fn objective(m: &MechanismSpec, d: &Distribution, gv: &[f64], w: &[f64]) -> Result<f64> {
    let alloc = m.allocate_values(d, w)?;
    let burn = m.burn_direct(d, w, &alloc)?;
    Ok(gv.iter().zip(&alloc).map(|(g, x)| g * x).sum::<f64>() - burn)
}

fn coerce_kind(before: &[f64], after: &[f64]) -> DeviationKind {
    let le = before.iter().zip(after).all(|(a, b)| b <= a);
    let ge = before.iter().zip(after).all(|(a, b)| b >= a);
    match (le, ge) {
        (true, false) => DeviationKind::EntryFee,
        (false, true) => DeviationKind::Rebate,
        _ => DeviationKind::OffchainCoerce,
    }
}

struct Tallies {
    a: Tally,
    b: Tally,
    c: Tally,
    cover: Tally,
}

#[allow(clippy::too_many_arguments)]
fn sample_conditions(
    m: &MechanismSpec,
    d: &Distribution,
    negvv: Option<&ConditionalNegVV>,
    n: usize,
    seed: u64,
    index: u64,
    tol: &Tolerances,
    check_cover: bool,
) -> Result<Tallies> {
    let measure = match m.objective {
        Objective::Virtual => Measure::VirtualUtility,
        Objective::Value => Measure::CoalitionUtility,
    };
    let mut r = rng::stream(seed, &format!("range/{n}"), index);
    let v = d.sample_with(n, &mut r).values().to_vec();
    let gv = v.iter().map(|&x| m.g(d, x)).collect::<Result<Vec<_>>>()?;
    let alloc_v = m.allocate_values(d, &v)?;
    let base = objective(m, d, &gv, &v)?;
    let mut t = Tallies {
        a: Tally::new(),
        b: Tally::new(),
        c: Tally::new(),
        cover: Tally::new(),
    };

    let mut candidates: Vec<Vec<f64>> = (0..RANDOM_PROFILES)
        .map(|_| d.sample_with(n, &mut r).values().to_vec())
        .collect();
    if n > 0 {
        for _ in 0..COORDINATE_SWAPS {
            let mut w = v.clone();
            let i = r.gen_range(0..n);
            w[i] = d.quantile(r.gen::<f64>());
            candidates.push(w);
        }
        // Pushing one user to either end of the support forces them in or out.
        for i in 0..n {
            for z in [d.quantile(1.0 - 1e-6), d.support_lo()] {
                let mut w = v.clone();
                w[i] = z;
                candidates.push(w);
            }
        }
    }
    for w in candidates {
        let after = objective(m, d, &gv, &w)?;
        let gain = after - base;
        let violated = tol.exceeds(gain, base);
        t.a.record(-gain, violated, || {
            let alloc_w = m.allocate_values(d, &w).unwrap_or_default();
            DeviationReport::new(
                coerce_kind(&alloc_v, &alloc_w),
                measure,
                v.clone(),
                w.clone(),
                base,
                after,
            )
        });
    }

    for i in 0..n {
        if gv[i] < 0.0 {
            let violated = alloc_v[i] > 0.0;
            t.b.record(-alloc_v[i], violated, || {
                let mut w = v.clone();
                w.remove(i);
                let after =
                    objective(m, d, &[&gv[..i], &gv[i + 1..]].concat(), &w).unwrap_or(f64::NAN);
                let mut rep =
                    DeviationReport::new(DeviationKind::Censor, measure, v.clone(), w, base, after);
                rep.censored = vec![i];
                rep.with_note(format!(
                    "bid {} with g = {} allocated {}",
                    v[i], gv[i], alloc_v[i]
                ))
            });
        }
    }

    for trial in 0..APPEND_TRIALS {
        let k = 1 + trial % 3;
        if m.max_bids.is_some_and(|cap| n + k > cap) {
            continue;
        }
        let extra: Vec<f64> = match (m.objective, negvv) {
            (Objective::Value, _) => vec![0.0; k],
            (Objective::Virtual, Some(c)) => c.sample_with(k, &mut r)?.values().to_vec(),
            (Objective::Virtual, None) => break,
        };
        let mut w = v.clone();
        w.extend_from_slice(&extra);
        let mut gw = gv.clone();
        for &x in &extra {
            gw.push(m.g(d, x)?);
        }
        let after = objective(m, d, &gw, &w)?;
        let diff = after - base;
        let violated = diff.abs() > tol.utility * base.abs().max(1.0);
        t.c.record(-diff.abs(), violated, || {
            let kind = if diff > 0.0 {
                DeviationKind::Fabricate
            } else {
                DeviationKind::Censor
            };
            let mut rep = DeviationReport::new(kind, measure, v.clone(), w.clone(), base, after);
            rep.fabricated = extra.clone();
            rep
        });
    }

    if check_cover {
        let o = m.outcome_values(d, &v)?;
        let net = o.payments.iter().sum::<f64>() - o.burn;
        t.cover
            .record(net, net < -tol.utility * o.burn.abs().max(1.0), || {
                DeviationReport::new(
                    DeviationKind::None,
                    Measure::MinerRevenue,
                    v.clone(),
                    v.clone(),
                    0.0,
                    net,
                )
                .with_note("payments fall short of the burn")
            });
    }
    Ok(t)
}

fn range_conditions(
    m: &MechanismSpec,
    d: &Distribution,
    n_list: &[usize],
    samples: usize,
    seed: u64,
    tol: &Tolerances,
    check_cover: bool,
) -> Result<(Tallies, Option<String>)> {
    let (negvv, note) = match m.objective {
        Objective::Virtual if d.cdf(d.monopoly_reserve()) <= 0.0 => (
            None,
            Some(
                "no value has a non-positive virtual value, so condition C is vacuous".to_string(),
            ),
        ),
        Objective::Virtual => (Some(ConditionalNegVV::new(d.clone())), None),
        Objective::Value => (None, None),
    };
    let jobs: Vec<(usize, u64)> = n_list
        .iter()
        .flat_map(|&n| (0..samples as u64).map(move |s| (n, s)))
        .collect();
    let parts: Vec<Result<Tallies>> = jobs
        .par_iter()
        .map(|&(n, s)| sample_conditions(m, d, negvv.as_ref(), n, seed, s, tol, check_cover))
        .collect();
    let mut total = Tallies {
        a: Tally::new(),
        b: Tally::new(),
        c: Tally::new(),
        cover: Tally::new(),
    };
    for p in parts {
        let p = p?;
        total.a.merge(p.a);
        total.b.merge(p.b);
        total.c.merge(p.c);
        total.cover.merge(p.cover);
    }
    Ok((total, note))
}

/// Profile sizes the mechanism accepts; the rest are noted and skipped.
fn feasible_sizes(m: &MechanismSpec, n_list: &[usize], report: &mut CheckReport) -> Vec<usize> {
    let (ok, skipped): (Vec<usize>, Vec<usize>) = n_list
        .iter()
        .partition(|&&n| m.max_bids.is_none_or(|k| n <= k));
    if !skipped.is_empty() {
        report.notes.push(format!(
            "skipped profile sizes {skipped:?} above the block limit"
        ));
    }
    ok
}

fn push_tally(report: &mut CheckReport, name: &str, tally: Tally) {
    report.criteria.push(tally.report(name));
    report
        .witnesses
        .extend(tally.witnesses.into_iter().map(Witness::Deviation));
}

/// Samples conditions (A), (B), (C) on the mechanism's outcome rule in
/// virtual space. Passing all three certifies off-chain influence proofness.
pub fn check_mir_conditions(
    m: &MechanismSpec,
    d: &Distribution,
    n_list: &[usize],
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CheckReport> {
    if m.objective != Objective::Virtual {
        return Err(Error::Unsupported(
            "value-space mechanisms are checked with check_gscp".into(),
        ));
    }
    let meta = CheckMeta {
        seed: Some(seed),
        samples: Some(samples),
        n_list: n_list.to_vec(),
        ..Default::default()
    };
    let mut report = CheckReport::new("mir_conditions", meta);
    let sizes = feasible_sizes(m, n_list, &mut report);
    let (t, note) = range_conditions(m, d, &sizes, samples, seed, tol, false)?;
    push_tally(&mut report, "optimal_for_n", t.a);
    push_tally(&mut report, "negative_suboptimal", t.b);
    match note {
        Some(n) => {
            report.criteria.push(CriterionReport::with_status(
                "no_censor_or_fabricate",
                Status::NotApplicable,
                n.clone(),
            ));
            report.notes.push(n);
        }
        None => push_tally(&mut report, "no_censor_or_fabricate", t.c),
    }
    Ok(report.finish())
}

/// Parameters of [`check_gscp`].
#[derive(Debug, Clone, PartialEq)]
pub struct GscpOptions {
    pub n_list: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Deepest rank for the closed-form miner-simplicity conditions.
    pub t_max: usize,
    /// Size of the value grid for generalized position curves.
    pub w_grid: usize,
    pub tol: Tolerances,
}

impl Default for GscpOptions {
    fn default() -> Self {
        GscpOptions {
            n_list: vec![1, 2, 3],
            samples: 10_000,
            seed: rng::DEFAULT_SEED,
            t_max: 100,
            w_grid: 256,
            tol: Tolerances::default(),
        }
    }
}

/// Global strong collusion proofness for value-space mechanisms: condition
/// (A) and (C) with `g` the identity, payments covering the burn, and the
/// family's miner-simplicity conditions.
pub fn check_gscp(m: &MechanismSpec, d: &Distribution, opts: &GscpOptions) -> Result<CheckReport> {
    if m.objective != Objective::Value {
        return Err(Error::Unsupported(
            "check_gscp needs a value-space mechanism".into(),
        ));
    }
    let meta = CheckMeta {
        seed: Some(opts.seed),
        samples: Some(opts.samples),
        n_list: opts.n_list.clone(),
        grid_size: Some(opts.w_grid),
        t_max: Some(opts.t_max),
    };
    let mut report = CheckReport::new("gscp", meta);
    let sizes = feasible_sizes(m, &opts.n_list, &mut report);
    let (t, _) = range_conditions(m, d, &sizes, opts.samples, opts.seed, &opts.tol, true)?;
    push_tally(&mut report, "optimal_for_n", t.a);
    push_tally(&mut report, "no_censor_or_fabricate", t.c);
    push_tally(&mut report, "payments_cover_burn", t.cover);
    let family = match &m.family {
        Family::Position { .. } => Some(check_oncms_position(m, d, opts.t_max, &opts.tol)?),
        Family::GenPos { .. } => Some(check_oncms_genpos(
            m,
            d,
            opts.w_grid,
            opts.t_max,
            &opts.tol,
        )?),
        _ => None,
    };
    if let Some(f) = family {
        report.criteria.extend(f.criteria);
        report.margins.extend(f.margins);
        report.witnesses.extend(f.witnesses);
        report.notes.extend(f.notes);
    }
    Ok(report.finish())
}
