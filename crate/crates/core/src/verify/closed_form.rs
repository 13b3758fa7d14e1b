//! Closed-form fabrication arithmetic for position auctions with a constant
//! marginal burn, where every bid above `c = g⁻¹(β)` is allocated.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::mech::{Family, MechanismSpec, Objective, PositionWeights};
use num_rational::Ratio;
use serde::Serialize;

struct Setup<'a> {
    weights: &'a PositionWeights,
    beta: f64,
    c: f64,
}

fn setup<'a>(m: &'a MechanismSpec, d: &Distribution) -> Result<Setup<'a>> {
    let Family::Position { weights, burn } = &m.family else {
        return Err(Error::Unsupported(
            "fabrication arithmetic applies to position auctions".into(),
        ));
    };
    let beta = burn.uniform().ok_or_else(|| {
        Error::Unsupported("fabrication arithmetic needs a constant marginal burn".into())
    })?;
    let c = match m.objective {
        Objective::Virtual => d.inverse_virtual_value(beta)?,
        Objective::Value => beta,
    };
    Ok(Setup { weights, beta, c })
}

/// Allocated bids (those above `c`) in descending order, the count above `w`,
/// and the checked fake bid.
fn ranked(s: &Setup<'_>, bids: &[f64], w: f64) -> Result<(Vec<f64>, usize)> {
    if w <= s.c {
        return Err(Error::Domain(format!(
            "fake bid {w} is never allocated (threshold {})",
            s.c
        )));
    }
    let mut v: Vec<f64> = bids.iter().copied().filter(|&b| b > s.c).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    if v.contains(&w) {
        return Err(Error::Domain(format!("fake bid {w} ties a real bid")));
    }
    let t = v.iter().filter(|&&b| b > w).count();
    Ok((v, t))
}

/// Revenue change from fabricating `w` below `t` real bids and above all
/// others: `t(w − c)(x_t − x_{t+1}) − βx_{t+1}`. At `w = c` only the burn
/// term remains.
pub fn fabrication_delta_closed_form(
    m: &MechanismSpec,
    d: &Distribution,
    t: usize,
    w: f64,
) -> Result<f64> {
    let s = setup(m, d)?;
    if w < s.c {
        return Err(Error::Domain(format!(
            "fake bid {w} is below the threshold {}",
            s.c
        )));
    }
    let x = |k: usize| s.weights.x(k);
    Ok(t as f64 * (w - s.c) * (x(t) - x(t + 1)) - s.beta * x(t + 1))
}

/// Payment change of the users ranked above the fake bid `w`.
pub fn payment_delta_above(
    m: &MechanismSpec,
    d: &Distribution,
    bids: &[f64],
    w: f64,
) -> Result<f64> {
    let s = setup(m, d)?;
    let (v, t) = ranked(&s, bids, w)?;
    let n = v.len();
    let vv = |i: usize| if i <= n { v[i - 1] } else { s.c };
    let x = |k: usize| s.weights.x(k);
    if t == 0 {
        return Ok(0.0);
    }
    let mut inner = (w - vv(t + 1)) * (x(t) - x(t + 1));
    for i in t + 1..=n {
        inner += (vv(i) - vv(i + 1)) * (x(i) - x(i + 1));
    }
    Ok(t as f64 * inner)
}

/// Payment change of the users ranked below the fake bid `w`.
pub fn payment_delta_below(
    m: &MechanismSpec,
    d: &Distribution,
    bids: &[f64],
    w: f64,
) -> Result<f64> {
    let s = setup(m, d)?;
    let (v, t) = ranked(&s, bids, w)?;
    let n = v.len();
    let vv = |i: usize| if i <= n { v[i - 1] } else { s.c };
    let x = |k: usize| s.weights.x(k);
    let mut out = 0.0;
    for i in t + 2..=n {
        out += (i - t - 1) as f64 * (vv(i) - vv(i + 1)) * (x(i) - x(i + 1));
    }
    for i in t + 1..=n {
        out -= vv(i + 1) * (x(i) - x(i + 1));
    }
    Ok(out)
}

/// Total revenue change from fabricating `w`: both payment changes minus
/// the extra burn `βx_{n+1}`.
pub fn net_fabrication_delta(
    m: &MechanismSpec,
    d: &Distribution,
    bids: &[f64],
    w: f64,
) -> Result<f64> {
    let s = setup(m, d)?;
    let (v, _) = ranked(&s, bids, w)?;
    let extra_burn = s.beta * s.weights.x(v.len() + 1);
    Ok(payment_delta_above(m, d, bids, w)? + payment_delta_below(m, d, bids, w)? - extra_burn)
}

/// Two readings of the harmonic weight example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicReading {
    /// `x_t = 1/(t(t+1))` for every `t`.
    Adopted,
    /// `x_1 = 1/2` and `x_t = x_1/(t(t+1))` for `t > 1`.
    Literal,
}

/// Exact weight `x_t` under a reading.
pub fn harmonic_weight(reading: HarmonicReading, t: usize) -> Ratio<i128> {
    let t = t as i128;
    let base = Ratio::new(1, t * (t + 1));
    match reading {
        HarmonicReading::Adopted => base,
        HarmonicReading::Literal if t == 1 => Ratio::new(1, 2),
        HarmonicReading::Literal => base * Ratio::new(1, 2),
    }
}

/// Feasibility of one reading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadingReport {
    pub reading: HarmonicReading,
    /// Ranks at which `t(x_t − x_{t+1}) = 2x_{t+1}` was tested exactly.
    pub checked: usize,
    pub first_identity_failure: Option<usize>,
    pub terms: usize,
    pub partial_sum: f64,
}

/// Tests the rank identity in exact arithmetic for `t ≤ t_max` and sums
/// the first `terms` weights.
pub fn check_harmonic_reading(
    reading: HarmonicReading,
    t_max: usize,
    terms: usize,
) -> ReadingReport {
    let two = Ratio::from_integer(2);
    let first_identity_failure = (1..=t_max).find(|&t| {
        let (a, b) = (harmonic_weight(reading, t), harmonic_weight(reading, t + 1));
        Ratio::from_integer(t as i128) * (a - b) != two * b
    });
    let f = |t: usize| {
        let t = t as f64;
        let x = 1.0 / (t * (t + 1.0));
        match reading {
            HarmonicReading::Adopted => x,
            HarmonicReading::Literal if t == 1.0 => 0.5,
            HarmonicReading::Literal => 0.5 * x,
        }
    };
    let partial_sum = (1..=terms).rev().map(f).sum();
    ReadingReport {
        reading,
        checked: t_max,
        first_identity_failure,
        terms,
        partial_sum,
    }
}
