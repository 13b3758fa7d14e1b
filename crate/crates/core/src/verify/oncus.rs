//! On-chain user simplicity: truthful bidding against a grid of misreports.

use super::{
    CheckMeta, CheckReport, CriterionReport, DeviationKind, DeviationReport, Measure, Tolerances,
    Witness, MAX_WITNESSES,
};
use crate::dist::Distribution;
use crate::error::Result;
use crate::identity;
use crate::mech::MechanismSpec;
use crate::rng;
use rayon::prelude::*;

/// Checks `vᵢxᵢ(vᵢ) − pᵢ(vᵢ) ≥ vᵢxᵢ(b) − pᵢ(b)` for every sampled profile,
/// user, and misreport `b` on a quantile grid, with payments from the
/// payment identity.
pub fn check_oncus(
    m: &MechanismSpec,
    d: &Distribution,
    n: usize,
    samples: usize,
    grid_size: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let pay = |bids: &[f64], i: usize| identity::payment_identity(m, d, bids, i);
    check_oncus_with(m, d, n, samples, grid_size, seed, tol, &pay)
}

/// Trials, violations, worst margin and witnesses from one sample.
type SampleTally = (usize, usize, f64, Vec<DeviationReport>);

/// [`check_oncus`] with a caller-supplied payment rule `pay(bids, i)`.
#[allow(clippy::too_many_arguments)]
pub fn check_oncus_with(
    m: &MechanismSpec,
    d: &Distribution,
    n: usize,
    samples: usize,
    grid_size: usize,
    seed: u64,
    tol: &Tolerances,
    pay: &(dyn Fn(&[f64], usize) -> Result<f64> + Sync),
) -> Result<CheckReport> {
    let grid: Vec<f64> = (0..grid_size)
        .map(|k| d.quantile((k as f64 + 0.5) / grid_size as f64))
        .collect();
    let per_sample: Vec<Result<SampleTally>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(seed, &format!("oncus/{n}"), s);
            let v = d.sample_with(n, &mut r).values().to_vec();
            let alloc = m.allocate_values(d, &v)?;
            let (mut trials, mut violations, mut worst) = (0, 0, f64::INFINITY);
            let mut witnesses = Vec::new();
            for i in 0..n {
                let truthful = v[i] * alloc[i] - pay(&v, i)?;
                let mut bids = v.clone();
                for &b in &grid {
                    bids[i] = b;
                    let x = m.allocate_values(d, &bids)?[i];
                    let lie = v[i] * x - pay(&bids, i)?;
                    let gain = lie - truthful;
                    trials += 1;
                    worst = worst.min(-gain);
                    if tol.exceeds(gain, truthful) {
                        violations += 1;
                        if witnesses.len() < MAX_WITNESSES {
                            let kind = if b < v[i] {
                                DeviationKind::Underbid
                            } else {
                                DeviationKind::Overbid
                            };
                            witnesses.push(
                                DeviationReport::new(
                                    kind,
                                    Measure::UserUtility,
                                    v.clone(),
                                    bids.clone(),
                                    truthful,
                                    lie,
                                )
                                .with_note(format!("user {i} bids {b} instead of {}", v[i])),
                            );
                        }
                    }
                }
            }
            Ok((trials, violations, worst, witnesses))
        })
        .collect();
    let mut c = CriterionReport::counted("truthful_dominant", 0, 0);
    let mut worst = f64::INFINITY;
    let mut report = CheckReport::new(
        "oncus",
        CheckMeta {
            seed: Some(seed),
            samples: Some(samples),
            n_list: vec![n],
            grid_size: Some(grid_size),
            t_max: None,
        },
    );
    for p in per_sample {
        let (t, v, w, ws) = p?;
        c.trials += t;
        c.violations += v;
        worst = worst.min(w);
        let room = MAX_WITNESSES.saturating_sub(report.witnesses.len());
        report
            .witnesses
            .extend(ws.into_iter().take(room).map(Witness::Deviation));
    }
    c = CriterionReport {
        worst_margin: (c.trials > 0).then_some(worst),
        ..CriterionReport::counted("truthful_dominant", c.trials, c.violations)
    };
    report.criteria.push(c);
    Ok(report.finish())
}
