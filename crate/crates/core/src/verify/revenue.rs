//! Monte Carlo revenue equivalence: expected payments equal expected
//! virtual surplus for any truthful mechanism.

use super::Status;
use crate::dist::Distribution;
use crate::error::Result;
use crate::mech::MechanismSpec;
use crate::rng;
use rayon::prelude::*;
use serde::Serialize;

/// Paired estimates of `E[Σ Pᵢ]` and `E[Σ φ(vᵢ) Xᵢ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub payment_mean: f64,
    pub payment_stderr: f64,
    pub virtual_surplus_mean: f64,
    pub virtual_surplus_stderr: f64,
    /// Standard error of the paired difference.
    pub diff_stderr: f64,
    pub z_score: f64,
    pub status: Status,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Passes when the paired difference is within three standard errors of 0.
pub fn mc_revenue_equivalence(
    m: &MechanismSpec,
    d: &Distribution,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<RevenueReport> {
    let rows: Vec<Result<(f64, f64)>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(seed, &format!("revenue/{n}"), s);
            let v = d.sample_with(n, &mut r).values().to_vec();
            let o = m.outcome_values(d, &v)?;
            let mut surplus = 0.0;
            for (x, &vi) in o.alloc.iter().zip(&v) {
                if *x > 0.0 {
                    surplus += d.virtual_value(vi)? * x;
                }
            }
            Ok((o.payments.iter().sum(), surplus))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let pay: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sur: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diff: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let (pm, ps) = mean_stderr(&pay);
    let (sm, ss) = mean_stderr(&sur);
    let (dm, ds) = mean_stderr(&diff);
    let z_score = if ds > 0.0 {
        dm / ds
    } else if dm.abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    let status = if samples == 0 || n == 0 || z_score.abs() <= 3.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(RevenueReport {
        n,
        samples,
        seed,
        payment_mean: pm,
        payment_stderr: ps,
        virtual_surplus_mean: sm,
        virtual_surplus_stderr: ss,
        diff_stderr: ds,
        z_score,
        status,
    })
}
