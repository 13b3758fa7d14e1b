//! Profitable fabrications against deterministic burn schedules whose
//! marginal burns are not constant.

use super::deviation::replay;
use super::DeviationReport;
use crate::dist::Distribution;
use crate::error::Result;
use crate::mech::{MarginalBurns, MechanismSpec};
use serde::Serialize;

/// Ranks scanned for a change in the marginal burns.
const SCAN_LIMIT: usize = 4096;

/// Whether a construction produced a profitable deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finding {
    Found,
    NotApplicable,
    Inconclusive,
}

/// Result of a counterexample construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub finding: Finding,
    /// Rank at which the schedule changes direction.
    pub t: Option<usize>,
    pub deviation: Option<DeviationReport>,
    /// Profile sizes tried.
    pub tried: usize,
    /// Largest revenue change seen and the profile size giving it.
    pub best: Option<(usize, f64)>,
    pub note: String,
}

impl Counterexample {
    fn not_applicable(note: &str) -> Self {
        Counterexample {
            finding: Finding::NotApplicable,
            t: None,
            deviation: None,
            tried: 0,
            best: None,
            note: note.into(),
        }
    }
}

fn first_rank(burns: &MarginalBurns, pred: impl Fn(f64, f64) -> bool) -> Option<usize> {
    (1..SCAN_LIMIT).find(|&t| match (burns.beta(t), burns.beta(t + 1)) {
        (Some(a), Some(b)) => pred(a, b),
        _ => false,
    })
}

/// Marginal burns that rise at rank `t`: users with `φ = βᵢ + ε` for
/// `i ≤ t`, plus a fake bid with `φ = β_t + ε/2`, which lifts the lowest
/// user's payment from `φ⁻¹(β_t)` to the fake bid.
pub fn counterexample_increasing_burns(
    d: &Distribution,
    burns: &MarginalBurns,
    eps: f64,
) -> Result<Counterexample> {
    let Some(t) = first_rank(burns, |a, b| a < b) else {
        return Ok(Counterexample::not_applicable(
            "marginal burns never increase",
        ));
    };
    let m = MechanismSpec::schedule(burns.clone())?;
    let beta = |i: usize| burns.beta(i).expect("rank below the change point");
    let bids = (1..=t)
        .map(|i| d.inverse_virtual_value(beta(i) + eps))
        .collect::<Result<Vec<_>>>()?;
    let fake = d.inverse_virtual_value(beta(t) + eps / 2.0)?;
    let dev = replay(&m, d, &bids, &[], &[fake])?;
    let finding = if dev.delta > 0.0 {
        Finding::Found
    } else {
        Finding::Inconclusive
    };
    Ok(Counterexample {
        finding,
        t: Some(t),
        best: Some((t, dev.delta)),
        deviation: Some(dev),
        tried: 1,
        note: format!("burns rise from {} to {} at rank {t}", beta(t), beta(t + 1)),
    })
}

/// Marginal burns that fall at rank `t`: `t` users slightly below their
/// burns and `n − t` slightly above, so the empty block wins; one fake bid
/// tips the block to all `n + 1` bids. Profile sizes up to `n_cap` are tried.
pub fn counterexample_decreasing_burns(
    d: &Distribution,
    burns: &MarginalBurns,
    n_cap: usize,
) -> Result<Counterexample> {
    let Some(t) = first_rank(burns, |a, b| a > b) else {
        return Ok(Counterexample::not_applicable(
            "marginal burns never decrease",
        ));
    };
    if let Some(r) = first_rank(burns, |a, b| a < b).filter(|&r| r <= n_cap) {
        return Ok(Counterexample::not_applicable(&format!(
            "marginal burns rise at rank {r}; the construction needs a non-increasing schedule"
        )));
    }
    let m = MechanismSpec::schedule(burns.clone())?;
    let gap = burns.beta(t).unwrap() - burns.beta(t + 1).unwrap();
    let eps = gap / (4.0 * t as f64);
    let mut out = Counterexample {
        finding: Finding::Inconclusive,
        t: Some(t),
        deviation: None,
        tried: 0,
        best: None,
        note: String::new(),
    };
    for n in t + 1..=n_cap {
        let Some(beta_next) = burns.beta(n + 1) else {
            out.note = format!("schedule ends at rank {n}");
            break;
        };
        let k = (n - t) as f64;
        let kappa = 1.0 / (2.0 * (k + 1.0));
        let tf = t as f64;
        let delta = tf * eps * (1.0 - kappa) / k;
        let eta = tf * eps * kappa / 4.0;
        let mut phis: Vec<f64> = (1..=t).map(|i| burns.beta(i).unwrap() - eps).collect();
        phis.extend((t + 1..=n).map(|i| burns.beta(i).unwrap() + delta));
        let fake_phi = beta_next + tf * eps - k * delta + eta;
        let bids = phis
            .iter()
            .map(|&p| d.inverse_virtual_value(p))
            .collect::<Result<Vec<_>>>()?;
        let fake = d.inverse_virtual_value(fake_phi)?;
        let dev = replay(&m, d, &bids, &[], &[fake])?;
        out.tried += 1;
        if out.best.is_none_or(|b| dev.delta > b.1) {
            out.best = Some((n, dev.delta));
        }
        if dev.delta > 1e-9 * dev.revenue_before.abs().max(1.0) {
            out.finding = Finding::Found;
            out.note = format!("profitable with {n} users");
            out.deviation = Some(dev);
            return Ok(out);
        }
    }
    if out.note.is_empty() {
        out.note = format!("no profitable profile with at most {n_cap} users");
    }
    Ok(out)
}
