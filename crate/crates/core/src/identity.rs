//! Payment identity, smoothed utility functions, and the burn identity.
//!
//! Payments follow `p(v) = v·x(v) − ∫₀^v x(z) dz`. For posted prices and
//! prefix families the own-bid allocation is a step function whose jumps are
//! located exactly, so the payment is a finite breakpoint sum. Generalized
//! position curves are integrated with 64-node Gauss-Legendre per smooth piece.
//!
//! The burn identity reads `burn = Σ g(vᵢ)·xᵢ − U(g(v))`, where `U` is the
//! smoothed (virtual or value) utility of the family and `∇U = x`.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::mech::{rank_order, Family, MechanismSpec, Objective};
use crate::quad;
use serde::Serialize;

/// Non-decreasing step function of a user's own bid: `(z, level)` pairs
/// meaning the allocation is `level` from `z` upward until the next pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCurve {
    pub steps: Vec<(f64, f64)>,
}

impl StepCurve {
    pub fn level_at(&self, z: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|s| s.0 <= z)
            .last()
            .map_or(0.0, |s| s.1)
    }

    /// `Σ_{z_k ≤ v} z_k·(level_k − level_{k−1})`.
    pub fn payment(&self, v: f64) -> f64 {
        let mut prev = 0.0;
        let mut total = 0.0;
        for &(z, level) in &self.steps {
            if z > v {
                break;
            }
            total += z * (level - prev);
            prev = level;
        }
        total
    }

    /// `∫_{from}^{v} x(z) dz`.
    pub fn integral(&self, from: f64, v: f64) -> f64 {
        let mut total = 0.0;
        for (k, &(z, level)) in self.steps.iter().enumerate() {
            let end = self.steps.get(k + 1).map_or(f64::INFINITY, |s| s.0).min(v);
            let start = z.max(from);
            if end > start {
                total += level * (end - start);
            }
        }
        total
    }
}

/// Other users' bids, highest first.
fn others_sorted(values: &[f64], i: usize) -> Vec<f64> {
    rank_order(values)
        .into_iter()
        .filter(|&j| j != i)
        .map(|j| values[j])
        .collect()
}

/// For `n` bids of which `n−1` have descending `g`-values `h`, the level
/// `y*_r` that the remaining bid's `g` must strictly exceed to be included
/// while holding rank `r` (`None`: never included at that rank).
pub(crate) fn prefix_thresholds(m: &MechanismSpec, h: &[f64], n: usize) -> Vec<Option<f64>> {
    let mut cap = m.prefix_cap(n);
    let mut marg = Vec::with_capacity(cap + 1);
    marg.push(0.0);
    for t in 1..=cap {
        match m.prefix_marginal(t) {
            Some(b) => marg.push(b),
            None => {
                cap = t - 1;
                break;
            }
        }
    }
    let w = |t: usize| m.prefix_weight(t);
    // C[k]: objective of the top-k others at ranks 1..k.
    let kmax = cap.min(n.saturating_sub(1));
    let mut c = vec![0.0; kmax + 1];
    for k in 1..=kmax {
        c[k] = c[k - 1] + (h[k - 1] - marg[k]) * w(k);
    }
    // G[t]: others shifted down one rank, summed over ranks 2..t.
    let mut g = vec![0.0; cap + 1];
    for t in 2..=cap {
        g[t] = g[t - 1] + (h[t - 2] - marg[t]) * w(t);
    }
    let mut suffix = vec![f64::NEG_INFINITY; cap + 2];
    for t in (1..=cap).rev() {
        suffix[t] = suffix[t + 1].max(g[t]);
    }
    let mut out = Vec::with_capacity(n);
    let mut best_below = f64::NEG_INFINITY;
    for r in 1..=n {
        if r - 1 <= kmax {
            best_below = best_below.max(c[r - 1]);
        }
        if r > cap || w(r) <= 0.0 {
            out.push(None);
            continue;
        }
        let gain_after = suffix[r] - g[r];
        out.push(Some(marg[r] + (best_below - c[r - 1] - gain_after) / w(r)));
    }
    out
}

/// Own-bid allocation of user `i` for posted prices and prefix families.
pub fn own_bid_steps(
    m: &MechanismSpec,
    d: &Distribution,
    values: &[f64],
    i: usize,
) -> Result<StepCurve> {
    let floor = m.bid_floor(d);
    let pieces: Vec<(f64, f64)> = match &m.family {
        Family::PostedPrice { price, .. } => {
            if m.objective == Objective::Virtual && *price > d.support_hi() {
                vec![]
            } else {
                vec![(price.max(floor), 1.0)]
            }
        }
        Family::Schedule { .. } | Family::Position { .. } => {
            let n = values.len();
            let others = others_sorted(values, i);
            let h = others
                .iter()
                .map(|&v| m.g(d, v))
                .collect::<Result<Vec<_>>>()?;
            let thr = prefix_thresholds(m, &h, n);
            let mut pieces = Vec::new();
            for r in (1..=n).rev() {
                let lo = if r == n { floor } else { others[r - 1] };
                let hi = if r == 1 { f64::INFINITY } else { others[r - 2] };
                if hi <= lo {
                    continue;
                }
                let start =
                    thr[r - 1].map_or(f64::INFINITY, |y| m.g_strict_threshold(d, y).max(lo));
                if start > lo {
                    pieces.push((lo, 0.0));
                }
                if start < hi {
                    pieces.push((start, m.prefix_weight(r)));
                }
            }
            pieces
        }
        Family::GenPos { .. } => {
            return Err(Error::Unsupported(
                "generalized position curves are not step functions".into(),
            ))
        }
    };
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut level = 0.0;
    let mut since = floor;
    for (z, x) in pieces {
        if x > level + 1e-15 {
            steps.push((z, x));
            level = x;
            since = z;
        } else if x < level - 1e-12 {
            return Err(Error::IncentiveViolation {
                lo_bid: since,
                lo_alloc: level,
                hi_bid: z,
                hi_alloc: x,
            });
        }
    }
    Ok(StepCurve { steps })
}

/// Payment of user `i` from the payment identity.
pub fn payment_identity(
    m: &MechanismSpec,
    d: &Distribution,
    values: &[f64],
    i: usize,
) -> Result<f64> {
    match &m.family {
        Family::GenPos { .. } => genpos_payment_quadrature(m, d, values, i),
        _ => Ok(own_bid_steps(m, d, values, i)?.payment(values[i])),
    }
}

/// Payments of every user in submission order.
pub fn payments(m: &MechanismSpec, d: &Distribution, values: &[f64]) -> Result<Vec<f64>> {
    (0..values.len())
        .map(|i| payment_identity(m, d, values, i))
        .collect()
}

/// Smallest own bid at which user `i` is allocated, found by bisection over
/// `allocate`; `+∞` when no bid wins.
pub fn critical_bid(m: &MechanismSpec, d: &Distribution, values: &[f64], i: usize) -> Result<f64> {
    if !m.is_deterministic() {
        return Err(Error::Unsupported(
            "critical bids need a deterministic allocation; use payment_identity".into(),
        ));
    }
    let mut work = values.to_vec();
    let mut alloc_at = |z: f64| -> Result<bool> {
        work[i] = z;
        Ok(m.allocate_values(d, &work)?[i] > 0.0)
    };
    let floor = m.bid_floor(d);
    if alloc_at(floor)? {
        return Ok(floor);
    }
    let bounded = m.objective == Objective::Virtual && d.is_bounded();
    let mut hi = if bounded {
        d.support_hi()
    } else {
        values.iter().fold(d.scale(), |a, &b| a.max(b)) * 2.0
    };
    let mut found = alloc_at(hi)?;
    if !bounded {
        for _ in 0..60 {
            if found {
                break;
            }
            hi *= 2.0;
            found = alloc_at(hi)?;
        }
    }
    if !found {
        return Ok(f64::INFINITY);
    }
    let mut lo = floor;
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if alloc_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn curves_of(m: &MechanismSpec) -> &crate::mech::Curves {
    match &m.family {
        Family::GenPos { curves } => curves,
        _ => unreachable!("caller checked the family"),
    }
}

fn genpos_payment_quadrature(
    m: &MechanismSpec,
    d: &Distribution,
    values: &[f64],
    i: usize,
) -> Result<f64> {
    let curves = curves_of(m);
    let n = values.len();
    let v = values[i];
    let gv = m.g(d, v)?;
    let rank = rank_order(values).iter().position(|&j| j == i).unwrap() + 1;
    let own = if gv >= 0.0 { curves.eval(rank, v) } else { 0.0 };
    let others = others_sorted(values, i);
    let floor = m.bid_floor(d);
    let cutoff = m.g_zero(d);
    let start = curves.support_start().max(cutoff);
    let mut bps = curves.breakpoints();
    bps.push(cutoff);
    let mut integral = 0.0;
    for r in (1..=n).rev() {
        let lo = if r == n { floor } else { others[r - 1] };
        let hi = if r == 1 { f64::INFINITY } else { others[r - 2] };
        let a = lo.max(start);
        let b = hi.min(v);
        if b > a {
            integral += quad::gauss_legendre(|z| curves.eval(r, z), a, b, &bps);
        }
    }
    Ok(v * own - integral)
}

/// Payment of user `i` from the closed-form rank decomposition
/// `v⁽ᵏ⁾x⁽ᵏ⁾(v⁽ᵏ⁾) − Σ_{j≥k} ∫_{v⁽ʲ⁺¹⁾}^{v⁽ʲ⁾} x⁽ʲ⁾`, with `v⁽ⁿ⁺¹⁾ = g⁻¹(0)`.
pub fn genpos_payment_closed_form(
    m: &MechanismSpec,
    d: &Distribution,
    values: &[f64],
    i: usize,
) -> Result<f64> {
    let Family::GenPos { curves } = &m.family else {
        return Err(Error::Unsupported(
            "closed-form payments exist for generalized position auctions only".into(),
        ));
    };
    let order = rank_order(values);
    let sorted: Vec<f64> = order.iter().map(|&j| values[j]).collect();
    let n = sorted.len();
    let k = order.iter().position(|&j| j == i).unwrap() + 1;
    let v = sorted[k - 1];
    if m.g(d, v)? < 0.0 {
        return Ok(0.0);
    }
    let bottom = m.g_zero(d);
    let val = |j: usize| if j <= n { sorted[j - 1] } else { bottom };
    let mut integral = 0.0;
    for j in k..=n {
        integral += curves.integral(j, val(j + 1), val(j));
    }
    Ok(v * curves.eval(k, v) - integral)
}

/// `∫₀^{g(v)} x⁽ʳ⁾(g⁻¹(y)) dy` in z-space: exact for the value objective and
/// affine φ, otherwise Gauss-Legendre on `x·φ′` plus the φ jumps.
pub(crate) fn rank_surplus_closed_form(
    m: &MechanismSpec,
    d: &Distribution,
    r: usize,
    v: f64,
) -> Result<f64> {
    let curves = curves_of(m);
    match m.objective {
        Objective::Value => Ok(curves.integral(r, 0.0, v)),
        Objective::Virtual => {
            let reserve = d.monopoly_reserve();
            if v <= reserve {
                return Ok(0.0);
            }
            if let Some((a, _)) = d.affine_virtual_value() {
                return Ok(a * curves.integral(r, reserve, v));
            }
            let mut bps = curves.breakpoints();
            bps.extend(d.segments().iter().map(|s| s.lo));
            let smooth = quad::gauss_legendre(
                |z| curves.eval(r, z) * d.virtual_value_slope(z).unwrap_or(0.0),
                reserve,
                v,
                &bps,
            );
            let mut jumps = 0.0;
            let kinks = d.phi_kinks();
            let mut edges: Vec<f64> = d.segments().iter().skip(1).map(|s| s.lo).collect();
            if d.is_bounded() {
                edges.push(d.support_hi());
            }
            for (e, b) in edges.iter().enumerate() {
                if *b >= reserve && *b <= v {
                    let (left, right) = (kinks[2 * e], kinks[2 * e + 1]);
                    if right > 0.0 {
                        jumps += curves.eval(r, *b) * (right - left.max(0.0));
                    }
                }
            }
            Ok(smooth + jumps)
        }
    }
}

/// Burn from the closed-form expression `Σ [g(v)x(v) − ∫₀^{g(v)} x dg] + B₀`.
pub fn genpos_burn_closed_form(m: &MechanismSpec, d: &Distribution, values: &[f64]) -> Result<f64> {
    let Family::GenPos { curves } = &m.family else {
        return Err(Error::Unsupported(
            "closed-form burns exist for generalized position auctions only".into(),
        ));
    };
    let order = rank_order(values);
    let mut total = m.base_burn;
    for (r0, &j) in order.iter().enumerate() {
        let v = values[j];
        let gv = m.g(d, v)?;
        if gv < 0.0 {
            continue;
        }
        total += gv * curves.eval(r0 + 1, v) - rank_surplus_closed_form(m, d, r0 + 1, v)?;
    }
    Ok(total)
}

/// Smoothed utility `U` of a mechanism, evaluated on `g`-vectors.
#[derive(Debug, Clone, Copy)]
pub struct UtilityFunction<'a> {
    m: &'a MechanismSpec,
    d: &'a Distribution,
}

/// The family's smoothed utility.
pub fn smoothed_utility<'a>(m: &'a MechanismSpec, d: &'a Distribution) -> UtilityFunction<'a> {
    UtilityFunction { m, d }
}

impl<'a> UtilityFunction<'a> {
    /// `g` level at which a posted price starts allocating.
    fn posted_level(&self, price: f64) -> f64 {
        match self.m.objective {
            Objective::Value => price,
            Objective::Virtual => {
                if price > self.d.support_hi() {
                    f64::INFINITY
                } else {
                    self.d
                        .virtual_value(price.max(self.d.support_lo()))
                        .unwrap()
                }
            }
        }
    }

    /// Start of the nonzero part of the curves, in `g`-space.
    fn curve_floor(&self) -> Result<f64> {
        let s = curves_of(self.m).support_start();
        match self.m.objective {
            Objective::Value => Ok(s),
            Objective::Virtual => {
                if s > self.d.support_hi() {
                    Ok(f64::INFINITY)
                } else {
                    self.d.virtual_value(s.max(self.d.support_lo()))
                }
            }
        }
    }

    /// `∫₀^{y} x⁽ʳ⁾(g⁻¹(s)) ds` by quadrature in `g`-space.
    fn rank_surplus(&self, r: usize, y: f64, floor: f64, ybps: &[f64]) -> Result<f64> {
        let lo = floor.max(0.0);
        if y <= lo {
            return Ok(0.0);
        }
        let curves = curves_of(self.m);
        // Past a bounded support's top, U continues linearly at the top allocation.
        let (y, beyond) = match self.m.objective {
            Objective::Virtual if self.d.is_bounded() && y > self.d.support_hi() => {
                let top = self.d.support_hi();
                (top, (y - top) * curves.eval(r, top))
            }
            _ => (y, 0.0),
        };
        let mut err = None;
        let v = quad::gauss_legendre(
            |s| match self.m.g_inverse(self.d, s) {
                Ok(z) => curves.eval(r, z),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            lo,
            y,
            ybps,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(v + beyond),
        }
    }

    fn genpos_ybps(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for b in curves_of(self.m).breakpoints() {
            match self.m.objective {
                Objective::Value => out.push(b),
                Objective::Virtual => {
                    if self.d.in_support(b) {
                        out.push(self.d.virtual_value(b)?);
                    }
                }
            }
        }
        if self.m.objective == Objective::Virtual {
            out.extend(self.d.phi_kinks());
        }
        Ok(out)
    }

    /// `U(y)` for `g`-values in any order.
    pub fn eval(&self, ys: &[f64]) -> Result<f64> {
        let mut sorted = ys.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let b0 = self.m.base_burn;
        Ok(match &self.m.family {
            Family::PostedPrice { price, .. } => {
                let level = self.posted_level(*price);
                sorted.iter().map(|y| (y - level).max(0.0)).sum::<f64>() - b0
            }
            Family::Schedule { .. } | Family::Position { .. } => {
                self.m
                    .prefix_objectives(&sorted)
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max)
                    - b0
            }
            Family::GenPos { .. } => {
                let floor = self.curve_floor()?;
                let ybps = self.genpos_ybps()?;
                let mut total = -b0;
                for (r0, &y) in sorted.iter().enumerate() {
                    total += self.rank_surplus(r0 + 1, y, floor, &ybps)?;
                }
                total
            }
        })
    }

    /// Points of coordinate `i` where `U` may fail to be differentiable.
    pub fn breakpoints(&self, ys: &[f64], i: usize) -> Result<Vec<f64>> {
        let mut others: Vec<f64> = ys
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &y)| y)
            .collect();
        others.sort_by(|a, b| b.total_cmp(a));
        let mut out = others.clone();
        match &self.m.family {
            Family::PostedPrice { price, .. } => out.push(self.posted_level(*price)),
            Family::Schedule { .. } | Family::Position { .. } => {
                out.extend(
                    prefix_thresholds(self.m, &others, ys.len())
                        .into_iter()
                        .flatten(),
                );
            }
            Family::GenPos { .. } => {
                out.extend(self.genpos_ybps()?);
                out.push(0.0);
            }
        }
        if self.m.objective == Objective::Virtual && self.d.is_bounded() {
            out.push(self.d.support_hi());
        }
        Ok(out)
    }

    /// Central difference of `U` in coordinate `i` with step `h`.
    pub fn partial_fd(&self, ys: &[f64], i: usize, h: f64) -> Result<f64> {
        let mut up = ys.to_vec();
        let mut dn = ys.to_vec();
        up[i] += h;
        dn[i] -= h;
        Ok((self.eval(&up)? - self.eval(&dn)?) / (2.0 * h))
    }
}

/// Burn implied by the identity `Σ g(vᵢ)xᵢ − U(g(v))`.
pub fn burn_from_identity(m: &MechanismSpec, d: &Distribution, values: &[f64]) -> Result<f64> {
    let alloc = m.allocate_values(d, values)?;
    let gs = values
        .iter()
        .map(|&v| m.g(d, v))
        .collect::<Result<Vec<_>>>()?;
    let surplus: f64 = gs.iter().zip(&alloc).map(|(g, x)| g * x).sum();
    Ok(surplus - smoothed_utility(m, d).eval(&gs)?)
}

/// Outcome of [`gradient_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub max_deviation: f64,
    pub checked: usize,
    /// Coordinates within `2h` of a breakpoint.
    pub at_breakpoint: usize,
    pub inconclusive: bool,
}

/// Central finite differences of `U` against the allocation, coordinate by
/// coordinate, with `h = 1e-5·max(1, |g|)`.
pub fn gradient_check(u: &UtilityFunction<'_>, values: &[f64]) -> Result<GradientReport> {
    let (m, d) = (u.m, u.d);
    let alloc = m.allocate_values(d, values)?;
    let gs = values
        .iter()
        .map(|&v| m.g(d, v))
        .collect::<Result<Vec<_>>>()?;
    let mut max_dev: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = 0;
    for i in 0..gs.len() {
        let h = 1e-5 * gs[i].abs().max(1.0);
        if u.breakpoints(&gs, i)?
            .iter()
            .any(|b| (gs[i] - b).abs() < 2.0 * h)
        {
            skipped += 1;
            continue;
        }
        let fd = u.partial_fd(&gs, i, h)?;
        max_dev = max_dev.max((fd - alloc[i]).abs());
        checked += 1;
    }
    Ok(GradientReport {
        max_deviation: max_dev,
        checked,
        at_breakpoint: skipped,
        inconclusive: checked == 0 && !gs.is_empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mech::{
        BurnTail, CurveCoefs, Curves, MarginalBurns, PositionBurn, PositionWeights, PostedBurn,
    };

    fn exp1() -> Distribution {
        Distribution::exponential(1.0).unwrap()
    }

    fn two_bid_schedule() -> MechanismSpec {
        MechanismSpec::schedule(MarginalBurns::list(vec![4.0, 3.0], BurnTail::Infinite)).unwrap()
    }

    fn harmonic(beta: f64) -> MechanismSpec {
        MechanismSpec::position(
            PositionWeights::Harmonic { scale: 1.0 },
            PositionBurn::Uniform(beta),
        )
        .unwrap()
    }

    fn genpos(gamma: f64) -> MechanismSpec {
        MechanismSpec::genpos(Curves::SaturatingExp {
            gamma,
            rate: 1.0,
            coefs: CurveCoefs::RankRatio { scale: 0.5 },
        })
        .unwrap()
    }

    #[test]
    fn schedule_payments_and_critical_bids() {
        let (m, d) = (two_bid_schedule(), exp1());
        let p = payments(&m, &d, &[6.0, 5.0]).unwrap();
        assert!(
            (p[0] - 4.0).abs() < 1e-9 && (p[1] - 4.0).abs() < 1e-9,
            "{p:?}"
        );
        assert!((critical_bid(&m, &d, &[6.0, 5.0], 1).unwrap() - 4.0).abs() < 1e-9);
        assert!((critical_bid(&m, &d, &[3.5, 6.0], 1).unwrap() - 5.0).abs() < 1e-9);
        assert!((burn_from_identity(&m, &d, &[6.0, 5.0]).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn position_payment_is_breakpoint_sum() {
        let (m, d) = (harmonic(0.6), Distribution::uniform(0.0, 1.0).unwrap());
        let p = payment_identity(&m, &d, &[0.9, 0.85], 0).unwrap();
        assert!((p - (0.8 / 6.0 + 0.85 / 3.0)).abs() < 1e-12, "{p}");
        let u = smoothed_utility(&m, &d).eval(&[0.8, 0.7]).unwrap();
        assert!((u - (0.1 + 0.1 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn posted_price_burn_identity_gives_tuned_burn() {
        let m = MechanismSpec::posted_price(2.0, PostedBurn::PerUser(1.0)).unwrap();
        let d = exp1();
        assert!((burn_from_identity(&m, &d, &[3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(payments(&m, &d, &[3.0, 1.5]).unwrap(), vec![2.0, 0.0]);
        assert!((critical_bid(&m, &d, &[1.5, 0.2], 0).unwrap() - 2.0).abs() < 1e-11);
    }

    #[test]
    fn genpos_single_bid_payment() {
        let (m, d) = (genpos(3.0), exp1());
        // Allocation jumps from 0 to 3/4 at Γ = 3, then follows the curve.
        let v = 3.5;
        let x = 1.0 - (-0.5f64).exp() / 4.0;
        let integral = 0.5 - ((1.0 - (-0.5f64).exp()) / 4.0);
        let want = v * x - integral;
        let q = payment_identity(&m, &d, &[v], 0).unwrap();
        let c = genpos_payment_closed_form(&m, &d, &[v], 0).unwrap();
        assert!(
            (q - want).abs() < 1e-10 && (c - want).abs() < 1e-12,
            "{q} {c} {want}"
        );
        let p3 = payment_identity(&m, &d, &[3.0], 0).unwrap();
        assert!((p3 - 2.25).abs() < 1e-12);
    }

    #[test]
    fn genpos_burn_routes_agree() {
        let (m, d) = (genpos(3.0), exp1());
        let vs = [5.0, 3.2, 4.1, 0.5];
        let a = burn_from_identity(&m, &d, &vs).unwrap();
        let b = genpos_burn_closed_form(&m, &d, &vs).unwrap();
        assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} {b}");
        for i in 0..vs.len() {
            let q = payment_identity(&m, &d, &vs, i).unwrap();
            let c = genpos_payment_closed_form(&m, &d, &vs, i).unwrap();
            assert!((q - c).abs() <= 1e-8 * c.abs().max(1.0), "{i}: {q} {c}");
        }
    }

    #[test]
    fn gradients_match_allocations() {
        let d = exp1();
        let m = MechanismSpec::posted_price(2.0, PostedBurn::PerUser(1.0)).unwrap();
        let r = gradient_check(&smoothed_utility(&m, &d), &[3.0, 1.5]).unwrap();
        assert!(r.max_deviation <= 1e-6 && r.checked == 2);
        let m = genpos(3.0);
        let r = gradient_check(&smoothed_utility(&m, &d), &[3.5]).unwrap();
        assert!(r.max_deviation <= 1e-5 && r.checked == 1, "{r:?}");
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let m = harmonic(0.6);
        let r = gradient_check(&smoothed_utility(&m, &u), &[0.9, 0.85]).unwrap();
        assert!(r.max_deviation <= 1e-6 && r.checked == 2, "{r:?}");
    }

    #[test]
    fn empty_profile() {
        let (m, d) = (two_bid_schedule().with_base_burn(0.5).unwrap(), exp1());
        assert!(payments(&m, &d, &[]).unwrap().is_empty());
        assert_eq!(burn_from_identity(&m, &d, &[]).unwrap(), 0.5);
    }

    #[test]
    fn randomized_queries_are_unsupported() {
        let (m, d) = (harmonic(0.6), Distribution::uniform(0.0, 1.0).unwrap());
        assert!(matches!(
            critical_bid(&m, &d, &[0.9], 0),
            Err(Error::Unsupported(_))
        ));
    }
}
