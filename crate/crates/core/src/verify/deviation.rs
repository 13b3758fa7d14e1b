//! Exhaustive censor/fabricate search and deviation replay.

use super::{DeviationKind, DeviationReport, Measure};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::identity;
use crate::mech::MechanismSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest profile the censor enumeration accepts.
pub const MAX_SEARCH_BIDS: usize = 12;

/// Budgets for [`deviation_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_fabricate: usize,
    /// Number of distribution quantiles in the fabrication grid.
    pub grid: usize,
    pub allow_censor: bool,
    /// Cap on evaluated deviations; exceeding it marks the result partial.
    pub budget: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_fabricate: 1,
            grid: 64,
            allow_censor: true,
            budget: None,
        }
    }
}

/// Miner revenue when real users `kept` stay and `fakes` are added: the kept
/// users' payments minus the burn. Fake bids pay the miner herself.
fn revenue_after(m: &MechanismSpec, d: &Distribution, kept: &[f64], fakes: &[f64]) -> Result<f64> {
    let mut seen = kept.to_vec();
    seen.extend_from_slice(fakes);
    let alloc = m.allocate_values(d, &seen)?;
    let burn = m.burn_direct(d, &seen, &alloc)?;
    let mut paid = 0.0;
    for (i, &x) in alloc.iter().enumerate().take(kept.len()) {
        if x > 0.0 {
            paid += identity::payment_identity(m, d, &seen, i)?;
        }
    }
    Ok(paid - burn)
}

fn classify(censored: &[usize], fakes: &[f64]) -> DeviationKind {
    match (censored.is_empty(), fakes.is_empty()) {
        (true, true) => DeviationKind::None,
        (false, true) => DeviationKind::Censor,
        (true, false) => DeviationKind::Fabricate,
        (false, false) => DeviationKind::CensorFabricate,
    }
}

/// Replays one deviation on truthful `bids` through the outcome rule.
pub fn replay(
    m: &MechanismSpec,
    d: &Distribution,
    bids: &[f64],
    censored: &[usize],
    fakes: &[f64],
) -> Result<DeviationReport> {
    let before = revenue_after(m, d, bids, &[])?;
    let kept: Vec<f64> = (0..bids.len())
        .filter(|i| !censored.contains(i))
        .map(|i| bids[i])
        .collect();
    let after = revenue_after(m, d, &kept, fakes)?;
    let mut manipulated = kept;
    manipulated.extend_from_slice(fakes);
    let mut r = DeviationReport::new(
        classify(censored, fakes),
        Measure::MinerRevenue,
        bids.to_vec(),
        manipulated,
        before,
        after,
    );
    r.censored = censored.to_vec();
    r.fabricated = fakes.to_vec();
    Ok(r)
}

/// Candidate fake bids: `grid` quantiles, a point just below a bounded
/// supremum, and a point just below each real bid.
pub fn fabrication_grid(
    m: &MechanismSpec,
    d: &Distribution,
    bids: &[f64],
    grid: usize,
) -> Vec<f64> {
    let scale = d.scale();
    let floor = m.bid_floor(d);
    let mut out: Vec<f64> = (0..grid)
        .map(|k| d.quantile((k as f64 + 0.5) / grid as f64))
        .collect();
    if d.is_bounded() {
        out.push(d.support_hi() - 1e-4 * scale);
    }
    out.extend(
        bids.iter()
            .map(|b| b - 1e-6 * scale)
            .filter(|&b| b >= floor),
    );
    out.retain(|&b| b.is_finite() && d.in_support(b));
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn multisets(grid: &[f64], max: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<(usize, Vec<f64>)> = vec![(0, vec![])];
    for _ in 0..max {
        let mut next = Vec::new();
        for (start, set) in &frontier {
            for (k, &g) in grid.iter().enumerate().skip(*start) {
                let mut s = set.clone();
                s.push(g);
                next.push((k, s));
            }
        }
        out.extend(next.iter().map(|(_, s)| s.clone()));
        frontier = next;
    }
    out
}

/// Best censor/fabricate deviation at one truthful profile. A result with
/// `delta` at most the tolerance means the miner cannot gain here.
pub fn deviation_search(
    m: &MechanismSpec,
    d: &Distribution,
    bids: &[f64],
    cfg: &SearchConfig,
) -> Result<DeviationReport> {
    let n = bids.len();
    if n > MAX_SEARCH_BIDS {
        return Err(Error::Budget(format!(
            "{n} bids exceed the censor enumeration limit of {MAX_SEARCH_BIDS}"
        )));
    }
    let before = revenue_after(m, d, bids, &[])?;
    let grid = fabrication_grid(m, d, bids, cfg.grid);
    let fakes = multisets(&grid, cfg.max_fabricate);
    let masks: Vec<u32> = if cfg.allow_censor {
        (0..1u32 << n).collect()
    } else {
        vec![0]
    };
    let mut jobs: Vec<(u32, usize)> = Vec::new();
    let mut partial = false;
    'outer: for &mask in &masks {
        let kept = n - mask.count_ones() as usize;
        for (k, f) in fakes.iter().enumerate() {
            if mask == 0 && f.is_empty() {
                continue;
            }
            if m.max_bids.is_some_and(|cap| kept + f.len() > cap) {
                continue;
            }
            if cfg.budget.is_some_and(|b| jobs.len() >= b) {
                partial = true;
                break 'outer;
            }
            jobs.push((mask, k));
        }
    }
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(mask, k)| {
            let kept: Vec<f64> = (0..n)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| bids[i])
                .collect();
            revenue_after(m, d, &kept, &fakes[k])
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (j, r) in results.into_iter().enumerate() {
        let after = r?;
        if after - before > best.map_or(0.0, |b| b.1 - before) {
            best = Some((j, after));
        }
    }
    let mut report = match best {
        None => DeviationReport::new(
            DeviationKind::None,
            Measure::MinerRevenue,
            bids.to_vec(),
            bids.to_vec(),
            before,
            before,
        ),
        Some((j, _)) => {
            let (mask, k) = jobs[j];
            let censored: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            replay(m, d, bids, &censored, &fakes[k])?
        }
    };
    report.partial = partial;
    Ok(report)
}
