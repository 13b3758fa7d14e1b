//! Value distributions with piecewise closed-form densities, virtual values,
//! their generalized inverses, and seeded samplers.
//!
//! A distribution is an ordered list of contiguous segments plus an optional
//! point mass at the (finite) supremum of the support. Each segment carries a
//! density family whose cdf, tail mass, and quantile have closed forms, so
//! `φ(v) = v − (1 − F(v)) / f(v)` is exact away from rounding.

use crate::error::{Error, Result};
use crate::mech::BidProfile;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Number of grid points used for regularity and continuity checks.
pub const CHECK_GRID: usize = 1024;

const BISECT_TOL: f64 = 1e-12;
const BISECT_ITERS: usize = 200;

/// Density family on one segment `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// `f(v) = density`.
    Constant { density: f64 },
    /// `f(v) = density · exp(−rate · (v − lo))`.
    Exponential { density: f64, rate: f64 },
    /// `f(v) = coef / (v + shift)²`.
    InverseSquare { coef: f64, shift: f64 },
}

/// One piece of a piecewise density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub density: Density,
}

impl Segment {
    pub fn pdf(&self, v: f64) -> f64 {
        match self.density {
            Density::Constant { density } => density,
            Density::Exponential { density, rate } => density * (-rate * (v - self.lo)).exp(),
            Density::InverseSquare { coef, shift } => coef / ((v + shift) * (v + shift)),
        }
    }

    /// Derivative of the density.
    pub fn pdf_slope(&self, v: f64) -> f64 {
        match self.density {
            Density::Constant { .. } => 0.0,
            Density::Exponential { rate, .. } => -rate * self.pdf(v),
            Density::InverseSquare { shift, .. } => -2.0 * self.pdf(v) / (v + shift),
        }
    }

    /// Mass on `[lo, v]`.
    pub fn cum(&self, v: f64) -> f64 {
        match self.density {
            Density::Constant { density } => density * (v - self.lo),
            Density::Exponential { density, rate } => {
                density / rate * -(-rate * (v - self.lo)).exp_m1()
            }
            Density::InverseSquare { coef, shift } => {
                coef * (1.0 / (self.lo + shift) - 1.0 / (v + shift))
            }
        }
    }

    /// Mass on `[v, hi)`.
    pub fn tail(&self, v: f64) -> f64 {
        match self.density {
            Density::Constant { density } => density * (self.hi - v),
            Density::Exponential { density, rate } => {
                let end = if self.hi.is_finite() {
                    (-rate * (self.hi - self.lo)).exp()
                } else {
                    0.0
                };
                density / rate * ((-rate * (v - self.lo)).exp() - end)
            }
            Density::InverseSquare { coef, shift } => {
                let end = if self.hi.is_finite() {
                    1.0 / (self.hi + shift)
                } else {
                    0.0
                };
                coef * (1.0 / (v + shift) - end)
            }
        }
    }

    pub fn total(&self) -> f64 {
        self.tail(self.lo)
    }

    /// Inverse of [`Segment::cum`].
    pub fn inv_cum(&self, m: f64) -> f64 {
        let v = match self.density {
            Density::Constant { density } => self.lo + m / density,
            Density::Exponential { density, rate } => {
                self.lo - (-m * rate / density).ln_1p() / rate
            }
            Density::InverseSquare { coef, shift } => {
                1.0 / (1.0 / (self.lo + shift) - m / coef) - shift
            }
        };
        v.clamp(self.lo, self.hi)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| {
            Err(Error::InvalidDistribution(format!(
                "segment [{}, {}): {msg}",
                self.lo, self.hi
            )))
        };
        if !(self.lo.is_finite() && self.lo >= 0.0) || self.hi.is_nan() || self.hi <= self.lo {
            return bad("bounds must satisfy 0 <= lo < hi");
        }
        match self.density {
            Density::Constant { density } => {
                if !(density.is_finite() && density > 0.0) {
                    return bad("density must be positive");
                }
                if !self.hi.is_finite() {
                    return bad("constant density cannot extend to infinity");
                }
            }
            Density::Exponential { density, rate } => {
                if !(density.is_finite() && density > 0.0 && rate.is_finite() && rate > 0.0) {
                    return bad("density and rate must be positive");
                }
            }
            Density::InverseSquare { coef, shift } => {
                if !(coef.is_finite() && coef > 0.0 && shift.is_finite() && self.lo + shift > 0.0) {
                    return bad("coef must be positive and lo + shift > 0");
                }
            }
        }
        Ok(())
    }
}

/// A regular value distribution.
#[derive(Debug, Clone)]
pub struct Distribution {
    label: String,
    segments: Vec<Segment>,
    atom: f64,
    mass_before: Vec<f64>,
    mass_after: Vec<f64>,
    affine: Option<(f64, f64)>,
    scale: f64,
    reserve: f64,
}

/// Result of [`Distribution::smoothness_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Smoothness {
    pub continuous_phi: bool,
    pub prob_nonpos_vv: f64,
    /// Located jumps as `(value, φ(right) − φ(left))`.
    pub jumps: Vec<(f64, f64)>,
    pub has_atom: bool,
    /// Continuous φ and positive mass at non-positive virtual values.
    pub smooth: bool,
}

impl Distribution {
    /// Exponential distribution on `[0, ∞)` with the given mean.
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "mean must be positive, got {mean}"
            )));
        }
        let rate = 1.0 / mean;
        Self::piecewise(
            format!("exponential(mean={mean})"),
            vec![Segment {
                lo: 0.0,
                hi: f64::INFINITY,
                density: Density::Exponential {
                    density: rate,
                    rate,
                },
            }],
            0.0,
        )
    }

    /// Uniform distribution on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidDistribution(format!(
                "uniform needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Self::piecewise(
            format!("uniform[{lo},{hi}]"),
            vec![Segment {
                lo,
                hi,
                density: Density::Constant {
                    density: 1.0 / (hi - lo),
                },
            }],
            0.0,
        )
    }

    /// Distribution whose virtual value is piecewise constant with two jumps:
    /// `F(v) = v/(v+2)` on `[0,2)` (φ = −2), `F(v) = 1 − ε/(2(v−2+ε))` on
    /// `[2, 2+ε)` (φ = 2−ε), and a mass of 1/4 at `2+ε` (φ = 2+ε).
    pub fn jump_atom(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0 && eps <= 4.0) {
            return Err(Error::InvalidDistribution(format!(
                "eps must lie in (0, 4], got {eps}"
            )));
        }
        Self::piecewise(
            format!("jump_atom(eps={eps})"),
            vec![
                Segment {
                    lo: 0.0,
                    hi: 2.0,
                    density: Density::InverseSquare {
                        coef: 2.0,
                        shift: 2.0,
                    },
                },
                Segment {
                    lo: 2.0,
                    hi: 2.0 + eps,
                    density: Density::InverseSquare {
                        coef: eps / 2.0,
                        shift: eps - 2.0,
                    },
                },
            ],
            0.25,
        )
    }

    /// General piecewise distribution; validates mass and regularity.
    pub fn piecewise(
        label: impl Into<String>,
        segments: Vec<Segment>,
        atom_at_sup: f64,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidDistribution("no segments".into()));
        }
        for (k, s) in segments.iter().enumerate() {
            s.validate()?;
            if k + 1 < segments.len() {
                if !s.hi.is_finite() {
                    return Err(Error::InvalidDistribution(
                        "only the last segment may be unbounded".into(),
                    ));
                }
                if s.hi != segments[k + 1].lo {
                    return Err(Error::InvalidDistribution(format!(
                        "segments not contiguous at {} / {}",
                        s.hi,
                        segments[k + 1].lo
                    )));
                }
            }
        }
        let hi = segments.last().unwrap().hi;
        if !(0.0..1.0).contains(&atom_at_sup) {
            return Err(Error::InvalidDistribution(format!(
                "atom must lie in [0, 1), got {atom_at_sup}"
            )));
        }
        if atom_at_sup > 0.0 && !hi.is_finite() {
            return Err(Error::InvalidDistribution(
                "atom requires a bounded support".into(),
            ));
        }
        let totals: Vec<f64> = segments.iter().map(Segment::total).collect();
        let mass: f64 = totals.iter().sum::<f64>() + atom_at_sup;
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "total mass {mass} != 1"
            )));
        }
        let mut mass_before = Vec::with_capacity(segments.len() + 1);
        let mut acc = 0.0;
        for t in &totals {
            mass_before.push(acc);
            acc += t;
        }
        mass_before.push(acc);
        let mut mass_after = vec![0.0; segments.len()];
        let mut acc = atom_at_sup;
        for k in (0..segments.len()).rev() {
            mass_after[k] = acc;
            acc += totals[k];
        }
        let affine = if segments.len() == 1 && atom_at_sup == 0.0 {
            let s = segments[0];
            match s.density {
                Density::Exponential { rate, .. } if !s.hi.is_finite() => Some((1.0, -1.0 / rate)),
                Density::Constant { .. } => Some((2.0, -s.hi)),
                _ => None,
            }
        } else {
            None
        };
        let mut d = Distribution {
            label: label.into(),
            segments,
            atom: atom_at_sup,
            mass_before,
            mass_after,
            affine,
            scale: 1.0,
            reserve: 0.0,
        };
        d.scale = if hi.is_finite() {
            hi - d.support_lo()
        } else {
            (d.quantile(1.0 - 1e-3) - d.support_lo()).max(1.0)
        };
        d.validate_regular()?;
        d.reserve = d.inverse_virtual_value(0.0)?;
        Ok(d)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn support_lo(&self) -> f64 {
        self.segments[0].lo
    }

    /// Supremum of the support; infinite for unbounded distributions.
    pub fn support_hi(&self) -> f64 {
        self.segments.last().unwrap().hi
    }

    pub fn is_bounded(&self) -> bool {
        self.support_hi().is_finite()
    }

    pub fn atom_at_sup(&self) -> f64 {
        self.atom
    }

    /// Characteristic length: support width, or the 0.999 quantile when unbounded.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(a, b)` with `φ(v) = a·v + b` on the whole support, when that holds.
    pub fn affine_virtual_value(&self) -> Option<(f64, f64)> {
        self.affine
    }

    pub fn in_support(&self, v: f64) -> bool {
        v.is_finite() && v >= self.support_lo() && v <= self.support_hi()
    }

    fn check_support(&self, v: f64) -> Result<()> {
        if self.in_support(v) {
            Ok(())
        } else {
            Err(Error::OutOfSupport {
                value: v,
                lo: self.support_lo(),
                hi: self.support_hi(),
            })
        }
    }

    fn segment_index(&self, v: f64) -> usize {
        self.segments
            .partition_point(|s| s.lo <= v)
            .saturating_sub(1)
    }

    /// `F(v) = Pr[X ≤ v]`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v < self.support_lo() {
            return 0.0;
        }
        if v >= self.support_hi() {
            return 1.0;
        }
        let k = self.segment_index(v);
        (self.mass_before[k] + self.segments[k].cum(v)).min(1.0)
    }

    /// `1 − F(v) = Pr[X > v]`, computed without cancellation.
    pub fn tail_mass(&self, v: f64) -> f64 {
        if v < self.support_lo() {
            return 1.0;
        }
        if v >= self.support_hi() {
            return 0.0;
        }
        let k = self.segment_index(v);
        self.segments[k].tail(v) + self.mass_after[k]
    }

    /// `Pr[X ≥ v]`, which differs from [`Self::tail_mass`] only at the atom.
    pub fn prob_at_least(&self, v: f64) -> f64 {
        if self.atom > 0.0 && v == self.support_hi() {
            return self.atom;
        }
        self.tail_mass(v)
    }

    /// Density of the continuous part; at the supremum the left limit.
    pub fn pdf(&self, v: f64) -> f64 {
        if !self.in_support(v) {
            return 0.0;
        }
        self.segments[self.segment_index(v)].pdf(v)
    }

    /// Virtual value `φ(v) = v − (1 − F(v))/f(v)`; `φ(sup) = sup`.
    pub fn virtual_value(&self, v: f64) -> Result<f64> {
        self.check_support(v)?;
        Ok(self.phi_unchecked(v))
    }

    fn phi_unchecked(&self, v: f64) -> f64 {
        if let Some((a, b)) = self.affine {
            return a * v + b;
        }
        if v >= self.support_hi() {
            return v;
        }
        let k = self.segment_index(v);
        let s = &self.segments[k];
        v - (s.tail(v) + self.mass_after[k]) / s.pdf(v)
    }

    /// Derivative of φ inside a segment: `2 + (1 − F) f′ / f²`.
    pub fn virtual_value_slope(&self, v: f64) -> Result<f64> {
        self.check_support(v)?;
        if let Some((a, _)) = self.affine {
            return Ok(a);
        }
        let k = self.segment_index(v.min(self.support_hi()));
        let s = &self.segments[k];
        let f = s.pdf(v);
        let tail = if v >= self.support_hi() {
            0.0
        } else {
            s.tail(v) + self.mass_after[k]
        };
        Ok(2.0 + tail * s.pdf_slope(v) / (f * f))
    }

    /// Virtual-value levels on both sides of every segment boundary and the
    /// atom; between them φ is continuous.
    pub fn phi_kinks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 1..self.segments.len() {
            let b = self.segments[k].lo;
            let left = &self.segments[k - 1];
            out.push(b - self.mass_after[k - 1] / left.pdf(b));
            out.push(self.phi_unchecked(b));
        }
        if self.is_bounded() {
            let hi = self.support_hi();
            let last = self.segments.last().unwrap();
            out.push(hi - self.atom / last.pdf(hi));
            out.push(hi);
        }
        out
    }

    /// `sup{v : φ(v) < y}` (the support minimum when the set is empty).
    pub fn inverse_virtual_value(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::Domain("virtual value is NaN".into()));
        }
        let lo = self.support_lo();
        if self.is_bounded() && y > self.support_hi() {
            return Err(Error::Domain(format!(
                "virtual value {y} above φ(sup) = {}",
                self.support_hi()
            )));
        }
        if let Some((a, b)) = self.affine {
            return Ok(((y - b) / a).clamp(lo, self.support_hi()));
        }
        self.inverse_virtual_value_bisect(y)
    }

    /// Bisection route for [`Self::inverse_virtual_value`], ignoring closed forms.
    pub fn inverse_virtual_value_bisect(&self, y: f64) -> Result<f64> {
        let lo = self.support_lo();
        if self.phi_unchecked(lo) >= y {
            return Ok(lo);
        }
        let hi = self.upper_bracket(|p| p >= y).ok_or_else(|| {
            Error::Domain(format!("virtual value {y} never reached on the support"))
        })?;
        Ok(self.bisect(lo, hi, |p| p < y))
    }

    /// `inf{z : φ(z) > y}`: the smallest value strictly beating level `y`;
    /// `+∞` if no value does.
    pub fn strict_threshold(&self, y: f64) -> f64 {
        let lo = self.support_lo();
        if y.is_nan() {
            return f64::INFINITY;
        }
        if let Some((a, b)) = self.affine {
            let z = (y - b) / a;
            if self.is_bounded() && z >= self.support_hi() {
                return f64::INFINITY;
            }
            return z.max(lo);
        }
        self.strict_threshold_bisect(y)
    }

    /// Bisection route for [`Self::strict_threshold`].
    pub fn strict_threshold_bisect(&self, y: f64) -> f64 {
        let lo = self.support_lo();
        if self.phi_unchecked(lo) > y {
            return lo;
        }
        match self.upper_bracket(|p| p > y) {
            None => f64::INFINITY,
            Some(hi) => self.bisect(lo, hi, |p| p <= y),
        }
    }

    /// Smallest probe point `h` (bounded: the supremum) with `pred(φ(h))`.
    fn upper_bracket(&self, pred: impl Fn(f64) -> bool) -> Option<f64> {
        let lo = self.support_lo();
        if self.is_bounded() {
            let hi = self.support_hi();
            return pred(self.phi_unchecked(hi)).then_some(hi);
        }
        let mut width = self.scale;
        for _ in 0..1100 {
            let h = lo + width;
            if !h.is_finite() {
                return None;
            }
            if pred(self.phi_unchecked(h)) {
                return Some(h);
            }
            width *= 2.0;
        }
        None
    }

    /// Bisection on `[lo, hi]` where `below(φ(lo))` holds and `below(φ(hi))` fails.
    fn bisect(&self, mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
        for _ in 0..BISECT_ITERS {
            if hi - lo <= BISECT_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(self.phi_unchecked(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // φ only jumps at segment boundaries, where it is right-continuous.
        let boundary = self
            .segments
            .iter()
            .map(|s| s.lo)
            .chain(std::iter::once(self.support_hi()))
            .find(|&b| b > lo && b <= hi && !below(self.phi_unchecked(b)));
        boundary.unwrap_or(0.5 * (lo + hi))
    }

    /// Monopoly reserve `φ⁻¹(0)`.
    pub fn monopoly_reserve(&self) -> f64 {
        self.reserve
    }

    /// Quantile function (generalized inverse of the cdf).
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let hi = self.support_hi();
        if u >= 1.0 - self.atom {
            return hi;
        }
        let k = self.mass_before[1..]
            .partition_point(|&m| m <= u)
            .min(self.segments.len() - 1);
        self.segments[k].inv_cum(u - self.mass_before[k])
    }

    /// One draw by inverse-cdf sampling.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    /// `n` i.i.d. draws sorted descending, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> BidProfile {
        let mut rng = rng::stream(seed, "sample", 0);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> BidProfile {
        BidProfile::from_unsorted((0..n).map(|_| self.draw(rng)).collect())
            .expect("quantiles lie in the support")
    }

    /// Quantile grid of `n` interior points plus segment boundaries and a
    /// bounded supremum, sorted ascending.
    pub fn support_grid(&self, n: usize) -> Vec<f64> {
        let mut g: Vec<f64> = (0..n)
            .map(|k| self.quantile((k as f64 + 0.5) / n as f64))
            .collect();
        g.extend(self.segments.iter().map(|s| s.lo));
        if self.is_bounded() {
            g.push(self.support_hi());
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }

    fn validate_regular(&self) -> Result<()> {
        let grid = self.support_grid(CHECK_GRID);
        let mut prev: Option<(f64, f64)> = None;
        for &v in &grid {
            let p = self.phi_unchecked(v);
            if !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "virtual value not finite at {v}"
                )));
            }
            if p > v + 1e-12 * v.abs().max(1.0) {
                return Err(Error::InvalidDistribution(format!(
                    "φ({v}) = {p} exceeds v"
                )));
            }
            if let Some((pv, pp)) = prev {
                if p < pp - 1e-9 * pp.abs().max(1.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "not regular: φ({pv}) = {pp} > φ({v}) = {p}"
                    )));
                }
            }
            prev = Some((v, p));
        }
        Ok(())
    }

    /// Continuity of φ on the check grid (jumps localized by bisection) and
    /// the mass at non-positive virtual values.
    pub fn smoothness_check(&self) -> Smoothness {
        let grid = self.support_grid(CHECK_GRID);
        let tol = 1e-6 * self.scale;
        let mut jumps = Vec::new();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (mut pa, mut pb) = (self.phi_unchecked(a), self.phi_unchecked(b));
            if pb - pa <= tol {
                continue;
            }
            while b - a > 1e-13 * b.abs().max(1.0) {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let pm = self.phi_unchecked(m);
                if pm - pa >= pb - pm {
                    b = m;
                    pb = pm;
                } else {
                    a = m;
                    pa = pm;
                }
                if pb - pa <= tol {
                    break;
                }
            }
            if pb - pa > tol {
                jumps.push((b, pb - pa));
            }
        }
        let prob_nonpos_vv = self.cdf(self.reserve);
        let continuous_phi = jumps.is_empty();
        Smoothness {
            continuous_phi,
            prob_nonpos_vv,
            jumps,
            has_atom: self.atom > 0.0,
            smooth: continuous_phi && prob_nonpos_vv > 0.0,
        }
    }
}

/// A base distribution conditioned on `φ(v) ≤ 0`.
#[derive(Debug, Clone)]
pub struct ConditionalNegVV {
    pub base: Distribution,
}

impl ConditionalNegVV {
    pub fn new(base: Distribution) -> Self {
        ConditionalNegVV { base }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..100_000 {
            let v = self.base.draw(rng);
            if self.base.phi_unchecked(v) <= 0.0 {
                return Ok(v);
            }
        }
        Err(Error::Config(format!(
            "rejection sampler for φ ≤ 0 exhausted its retries on {}",
            self.base.label()
        )))
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<BidProfile> {
        let mut rng = rng::stream(seed, "sample_negvv", 0);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<BidProfile> {
        let vals = (0..n).map(|_| self.draw(rng)).collect::<Result<Vec<_>>>()?;
        BidProfile::from_unsorted(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_quantile_inverts_cum() {
        let segs = [
            Segment {
                lo: 1.0,
                hi: 3.0,
                density: Density::Constant { density: 0.25 },
            },
            Segment {
                lo: 0.0,
                hi: f64::INFINITY,
                density: Density::Exponential {
                    density: 2.0,
                    rate: 2.0,
                },
            },
            Segment {
                lo: 2.0,
                hi: 2.5,
                density: Density::InverseSquare {
                    coef: 0.05,
                    shift: -1.5,
                },
            },
        ];
        for s in segs {
            for m in [0.0f64, 0.1, 0.3, 0.45] {
                let m = m.min(s.total() * 0.99);
                assert!((s.cum(s.inv_cum(m)) - m).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jump_atom_masses() {
        let d = Distribution::jump_atom(0.1).unwrap();
        assert!((d.cdf(2.0) - 0.5).abs() < 1e-15);
        assert!((d.cdf(2.0999999) - 0.75).abs() < 1e-5);
        assert_eq!(d.cdf(2.1), 1.0);
        assert_eq!(d.prob_at_least(2.1), 0.25);
        assert_eq!(d.quantile(0.9), 2.1);
    }

    #[test]
    fn rejects_irregular_and_bad_mass() {
        let inc = Segment {
            lo: 0.0,
            hi: 1.0,
            density: Density::Constant { density: 0.5 },
        };
        assert!(Distribution::piecewise("x", vec![inc], 0.0).is_err());
        // a density drop at 1 makes φ fall from 8/9 to 0
        let a = Segment {
            lo: 0.0,
            hi: 1.0,
            density: Density::Constant { density: 0.9 },
        };
        let b = Segment {
            lo: 1.0,
            hi: 2.0,
            density: Density::Constant { density: 0.1 },
        };
        assert!(Distribution::piecewise("y", vec![a, b], 0.0).is_err());
    }
}
