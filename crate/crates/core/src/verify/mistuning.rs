//! Off-chain gain from a posted price whose burn is not `φ(p)`.
//!
//! With burn `B` per included user, the miner earns `(p − B)` per sale. She
//! prefers selling at `q = φ⁻¹(B)` instead, either by rebating `p − q` to
//! users with values in `[q, p)` (when `B < φ(p)`) or by charging an entry
//! fee `q − p` (when `B > φ(p)`). The expected gain per user is
//! `∫_q^p (φ(z) − B) f(z) dz`, computed three ways.

use super::{DeviationKind, DeviationReport, Measure};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use serde::Serialize;

/// Gain estimates for one posted price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MistuningReport {
    pub price: f64,
    pub burn: f64,
    /// Price the miner would rather charge.
    pub target_price: f64,
    /// `(q − B)(1 − F(q)) − (p − B)(1 − F(p))`.
    pub gain_exact: f64,
    pub gain_gauss: f64,
    pub gain_simpson: f64,
    pub gain_mc: f64,
    pub mc_stderr: f64,
    pub mc_samples: usize,
    pub deviation: DeviationReport,
}

impl MistuningReport {
    /// Monte Carlo estimate within `k` standard errors of the exact gain.
    pub fn mc_agrees(&self, k: f64) -> bool {
        (self.gain_mc - self.gain_exact).abs() <= k * self.mc_stderr.max(1e-300)
    }
}

/// Per-user off-chain gain of posted price `p` with burn `b` per sale.
pub fn posted_price_mistuning(
    d: &Distribution,
    p: f64,
    b: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<MistuningReport> {
    let reserve = d.monopoly_reserve();
    if p < reserve {
        return Err(Error::Domain(format!(
            "price {p} below the monopoly reserve {reserve}"
        )));
    }
    let phi_p = d.virtual_value(p)?;
    let q = if (b - phi_p).abs() <= 1e-12 {
        p
    } else {
        d.inverse_virtual_value(b)?
    };
    let revenue = |price: f64| (price - b) * d.prob_at_least(price);
    let gain_exact = revenue(q) - revenue(p);

    let integrand = |z: f64| (d.virtual_value(z).unwrap_or(f64::NAN) - b) * d.pdf(z);
    let bps: Vec<f64> = d.segments().iter().map(|s| s.lo).collect();
    let gain_gauss = quad::gauss_legendre(integrand, q, p, &bps);
    let gain_simpson = if q == p {
        0.0
    } else {
        quad::adaptive_simpson(integrand, q, p, 1e-10, 40)
    };

    let mut r = rng::stream(seed, "mistuning", 0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..mc_samples {
        let v = d.draw(&mut r);
        let x = (q - b) * f64::from(u8::from(v >= q)) - (p - b) * f64::from(u8::from(v >= p));
        sum += x;
        sq += x * x;
    }
    let nm = mc_samples.max(1) as f64;
    let gain_mc = sum / nm;
    let var = (sq / nm - gain_mc * gain_mc).max(0.0) * nm / (nm - 1.0).max(1.0);
    let mc_stderr = (var / nm).sqrt();

    let kind = if q < p {
        DeviationKind::Rebate
    } else if q > p {
        DeviationKind::EntryFee
    } else {
        DeviationKind::None
    };
    let deviation = DeviationReport::new(
        kind,
        Measure::RevenuePerUser,
        vec![p],
        vec![q],
        revenue(p),
        revenue(q),
    )
    .with_note(match kind {
        DeviationKind::Rebate => format!("rebate {} to users valued in [{q}, {p})", p - q),
        DeviationKind::EntryFee => format!("entry fee {} off-chain", q - p),
        _ => "burn equals the virtual value of the price".into(),
    });
    Ok(MistuningReport {
        price: p,
        burn: b,
        target_price: q,
        gain_exact,
        gain_gauss,
        gain_simpson,
        gain_mc,
        mc_stderr,
        mc_samples,
        deviation,
    })
}
