//! Mechanism families and the allocation engine.
//!
//! Every family except the posted price allocates by maximizing an objective
//! `Σ_{i≤t} (g(v⁽ⁱ⁾) − m_i)·w_i − B₀` over prefix sizes `t`, where `g` is the
//! virtual value (virtual objective) or the identity (value objective), `w_i`
//! the rank weight and `m_i` the marginal burn per unit. Ties resolve to the
//! smallest `t`. Generalized position auctions instead hand rank `i` the curve
//! value `x⁽ⁱ⁾(v⁽ⁱ⁾)`.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::identity;
use serde::Serialize;

/// Bids sorted from highest to lowest.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BidProfile {
    values: Vec<f64>,
}

impl BidProfile {
    /// Accepts an already descending list of finite nonnegative bids.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_bids(&values)?;
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(
                "bid profile must be sorted descending".into(),
            ));
        }
        Ok(BidProfile { values })
    }

    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        check_bids(&values)?;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(BidProfile { values })
    }

    pub fn empty() -> Self {
        BidProfile::default()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `i`-th largest bid, 1-based.
    pub fn rank(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_bids(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(v) => Err(Error::Domain(format!(
            "bid {v} is not a finite nonnegative number"
        ))),
        None => Ok(()),
    }
}

/// Which utility the allocation rule maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Miner's virtual utility.
    Virtual,
    /// Joint miner-and-users welfare.
    Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Capacity {
    Infinite,
    Finite(f64),
}

/// Burn rule of a posted price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PostedBurn {
    /// Burn a fixed amount per included user; the rest goes to the miner.
    PerUser(f64),
    /// Burn everything the users pay.
    All,
}

/// Behaviour of a finite marginal-burn list beyond its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BurnTail {
    /// Repeat the last entry.
    ConstantLast,
    /// Never include more users than listed.
    Infinite,
}

/// Marginal burns `β_1, β_2, …` of a deterministic schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalBurns {
    List {
        values: Vec<f64>,
        tail: BurnTail,
    },
    /// `β_t = base + scale / t`.
    Harmonic {
        base: f64,
        scale: f64,
    },
}

impl MarginalBurns {
    pub fn list(values: Vec<f64>, tail: BurnTail) -> Self {
        MarginalBurns::List { values, tail }
    }

    /// `β_t` for 1-based `t`; `None` when rank `t` may never be filled.
    pub fn beta(&self, t: usize) -> Option<f64> {
        match self {
            MarginalBurns::List { values, tail } => match values.get(t - 1) {
                Some(b) => Some(*b),
                None => match tail {
                    BurnTail::ConstantLast => values.last().copied(),
                    BurnTail::Infinite => None,
                },
            },
            MarginalBurns::Harmonic { base, scale } => Some(base + scale / t as f64),
        }
    }

    /// Largest fillable rank, if bounded.
    pub fn max_rank(&self) -> Option<usize> {
        match self {
            MarginalBurns::List {
                values,
                tail: BurnTail::Infinite,
            } => Some(values.len()),
            _ => None,
        }
    }

    /// Cumulative burn `B_t − B₀`.
    pub fn cumulative(&self, t: usize) -> Option<f64> {
        (1..=t).map(|k| self.beta(k)).sum()
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            MarginalBurns::List { values, .. } => {
                !values.is_empty() && values.iter().all(|b| b.is_finite())
            }
            MarginalBurns::Harmonic { base, scale } => base.is_finite() && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMechanism(
                "marginal burns must be a nonempty list of finite numbers".into(),
            ))
        }
    }
}

/// Tail of a finite position-weight list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTail {
    Zero,
    ConstantLast,
}

/// Rank weights `x⁽¹⁾ ≥ x⁽²⁾ ≥ …` of a position auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionWeights {
    /// `x⁽ᵗ⁾ = scale / (t(t+1))`.
    Harmonic {
        scale: f64,
    },
    Constant {
        x: f64,
    },
    List {
        values: Vec<f64>,
        tail: WeightTail,
    },
}

impl PositionWeights {
    pub fn x(&self, t: usize) -> f64 {
        let tf = t as f64;
        match self {
            PositionWeights::Harmonic { scale } => scale / (tf * (tf + 1.0)),
            PositionWeights::Constant { x } => *x,
            PositionWeights::List { values, tail } => match values.get(t - 1) {
                Some(x) => *x,
                None => match tail {
                    WeightTail::Zero => 0.0,
                    WeightTail::ConstantLast => *values.last().unwrap(),
                },
            },
        }
    }

    /// `Σ_{t≤n} x⁽ᵗ⁾`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        match self {
            PositionWeights::Harmonic { scale } => scale * (1.0 - 1.0 / (n as f64 + 1.0)),
            _ => (1..=n).map(|t| self.x(t)).sum(),
        }
    }

    /// `Σ_t x⁽ᵗ⁾` (possibly infinite), from the closed-form tail.
    pub fn total(&self) -> f64 {
        match self {
            PositionWeights::Harmonic { scale } => *scale,
            PositionWeights::Constant { x } => {
                if *x == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            PositionWeights::List { values, tail } => match tail {
                WeightTail::Zero => values.iter().sum(),
                WeightTail::ConstantLast if *values.last().unwrap() > 0.0 => f64::INFINITY,
                WeightTail::ConstantLast => values.iter().sum(),
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            PositionWeights::Constant { .. } => true,
            PositionWeights::Harmonic { scale } => *scale == 0.0,
            PositionWeights::List { values, tail } => {
                values.windows(2).all(|w| w[0] == w[1])
                    && (*tail == WeightTail::ConstantLast || *values.last().unwrap() == 0.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidMechanism(format!("position weights: {m}")));
        match self {
            PositionWeights::Harmonic { scale } if !(0.0..=2.0).contains(scale) => {
                bad("harmonic scale must lie in [0, 2]")
            }
            PositionWeights::Constant { x } if !(0.0..=1.0).contains(x) => {
                bad("weight must lie in [0, 1]")
            }
            PositionWeights::List { values, .. } => {
                if values.is_empty() || values.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return bad("weights must be a nonempty list in [0, 1]");
                }
                if values.windows(2).any(|w| w[0] < w[1]) {
                    return bad("weights must be non-increasing in rank");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Marginal burn per unit of allocation in a position auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionBurn {
    Uniform(f64),
    /// Per-rank values; the last one repeats.
    PerRank(Vec<f64>),
}

impl PositionBurn {
    pub fn beta(&self, t: usize) -> f64 {
        match self {
            PositionBurn::Uniform(b) => *b,
            PositionBurn::PerRank(v) => *v.get(t - 1).unwrap_or_else(|| v.last().unwrap()),
        }
    }

    pub fn uniform(&self) -> Option<f64> {
        match self {
            PositionBurn::Uniform(b) => Some(*b),
            PositionBurn::PerRank(v) if v.windows(2).all(|w| w[0] == w[1]) => v.first().copied(),
            PositionBurn::PerRank(_) => None,
        }
    }
}

/// Rank coefficients `c_t` of a saturating curve family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveCoefs {
    /// `c_t = scale · t/(t+1)`.
    RankRatio { scale: f64 },
    /// Explicit values; the last one repeats.
    List(Vec<f64>),
}

impl CurveCoefs {
    pub fn c(&self, t: usize) -> f64 {
        match self {
            CurveCoefs::RankRatio { scale } => scale * t as f64 / (t as f64 + 1.0),
            CurveCoefs::List(v) => *v.get(t - 1).unwrap_or_else(|| v.last().unwrap()),
        }
    }

    fn len_hint(&self) -> usize {
        match self {
            CurveCoefs::RankRatio { .. } => 0,
            CurveCoefs::List(v) => v.len(),
        }
    }
}

/// Allocation curves `x⁽ᵗ⁾(w)` of a generalized position auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Curves {
    /// `x⁽ᵗ⁾(w) = 0` below `gamma`, else `1 − c_t·exp(−rate·(w − gamma))`.
    SaturatingExp {
        gamma: f64,
        rate: f64,
        coefs: CurveCoefs,
    },
    /// Piecewise constant: `levels[t−1][k]` on `[breakpoints[k], breakpoints[k+1])`,
    /// zero below the first breakpoint; the last row repeats for deeper ranks.
    Step {
        breakpoints: Vec<f64>,
        levels: Vec<Vec<f64>>,
    },
}

impl Curves {
    pub fn eval(&self, t: usize, w: f64) -> f64 {
        match self {
            Curves::SaturatingExp { gamma, rate, coefs } => {
                if w < *gamma {
                    0.0
                } else {
                    1.0 - coefs.c(t) * (-rate * (w - gamma)).exp()
                }
            }
            Curves::Step {
                breakpoints,
                levels,
            } => {
                let k = breakpoints.partition_point(|&b| b <= w);
                if k == 0 {
                    0.0
                } else {
                    step_row(levels, t)[k - 1]
                }
            }
        }
    }

    /// `∫_a^b x⁽ᵗ⁾(z) dz` in closed form (signed).
    pub fn integral(&self, t: usize, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(t, b, a);
        }
        match self {
            Curves::SaturatingExp { gamma, rate, coefs } => {
                let lo = a.max(*gamma);
                if b <= lo {
                    return 0.0;
                }
                let c = coefs.c(t);
                (b - lo) - c / rate * ((-rate * (lo - gamma)).exp() - (-rate * (b - gamma)).exp())
            }
            Curves::Step {
                breakpoints,
                levels,
            } => {
                let row = step_row(levels, t);
                let mut total = 0.0;
                for (k, &level) in row.iter().enumerate() {
                    let s = breakpoints[k].max(a);
                    let e = breakpoints
                        .get(k + 1)
                        .copied()
                        .unwrap_or(f64::INFINITY)
                        .min(b);
                    if e > s {
                        total += level * (e - s);
                    }
                }
                total
            }
        }
    }

    /// Points where `x⁽ᵗ⁾` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Curves::SaturatingExp { gamma, .. } => vec![*gamma],
            Curves::Step { breakpoints, .. } => breakpoints.clone(),
        }
    }

    /// Smallest value at which any curve can be positive.
    pub fn support_start(&self) -> f64 {
        match self {
            Curves::SaturatingExp { gamma, .. } => *gamma,
            Curves::Step { breakpoints, .. } => breakpoints[0],
        }
    }

    /// Ranks past which every curve repeats.
    pub fn explicit_ranks(&self) -> usize {
        match self {
            Curves::SaturatingExp { coefs, .. } => coefs.len_hint(),
            Curves::Step { levels, .. } => levels.len(),
        }
    }

    /// `sup_w Σ_t x⁽ᵗ⁾(w)`, infinite when the deepest curve is nonzero.
    pub fn total_allocation(&self) -> f64 {
        match self {
            Curves::SaturatingExp { .. } => f64::INFINITY,
            Curves::Step { levels, .. } => {
                if levels.last().unwrap().iter().any(|&x| x > 0.0) {
                    f64::INFINITY
                } else {
                    let width = levels[0].len();
                    (0..width)
                        .map(|k| levels.iter().map(|r| r[k]).sum::<f64>())
                        .fold(0.0, f64::max)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMechanism(format!("curves: {m}")));
        match self {
            Curves::SaturatingExp { gamma, rate, coefs } => {
                if !(gamma.is_finite() && *gamma >= 0.0 && rate.is_finite() && *rate > 0.0) {
                    return bad("gamma must be nonnegative and rate positive".into());
                }
                let n = coefs.len_hint().max(64) + 2;
                let mut prev = 0.0;
                for t in 1..=n {
                    let c = coefs.c(t);
                    if !(0.0..=1.0).contains(&c) {
                        return bad(format!("coefficient c_{t} = {c} outside [0, 1]"));
                    }
                    if c < prev {
                        return bad(format!(
                            "coefficients must be non-decreasing in rank (c_{t} = {c})"
                        ));
                    }
                    prev = c;
                }
                Ok(())
            }
            Curves::Step {
                breakpoints,
                levels,
            } => {
                if breakpoints.is_empty() || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("breakpoints must be strictly increasing and nonempty".into());
                }
                if levels.is_empty() || levels.iter().any(|r| r.len() != breakpoints.len()) {
                    return bad("each level row needs one entry per breakpoint".into());
                }
                for (t, row) in levels.iter().enumerate() {
                    if row.iter().any(|x| !(0.0..=1.0).contains(x))
                        || row.windows(2).any(|w| w[0] > w[1])
                    {
                        return bad(format!(
                            "rank {} levels must be non-decreasing in [0, 1]",
                            t + 1
                        ));
                    }
                    if t > 0 && row.iter().zip(&levels[t - 1]).any(|(a, b)| a > b) {
                        return bad(format!("rank {} exceeds rank {} somewhere", t + 1, t));
                    }
                }
                Ok(())
            }
        }
    }
}

fn step_row(levels: &[Vec<f64>], t: usize) -> &[f64] {
    levels.get(t - 1).unwrap_or_else(|| levels.last().unwrap())
}

/// Mechanism family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PostedPrice {
        price: f64,
        burn: PostedBurn,
    },
    Schedule {
        burns: MarginalBurns,
    },
    Position {
        weights: PositionWeights,
        burn: PositionBurn,
    },
    GenPos {
        curves: Curves,
    },
}

/// A fully specified transaction fee mechanism.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismSpec {
    pub family: Family,
    pub objective: Objective,
    pub capacity: Capacity,
    /// Burn of the empty block (the negated block reward).
    pub base_burn: f64,
    /// Largest number of bids a block may carry.
    pub max_bids: Option<usize>,
}

/// Allocation, payments, and burn of one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub alloc: Vec<f64>,
    pub payments: Vec<f64>,
    pub burn: f64,
}

impl MechanismSpec {
    pub fn new(
        family: Family,
        objective: Objective,
        capacity: Capacity,
        base_burn: f64,
        max_bids: Option<usize>,
    ) -> Result<Self> {
        let m = MechanismSpec {
            family,
            objective,
            capacity,
            base_burn,
            max_bids,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn posted_price(price: f64, burn: PostedBurn) -> Result<Self> {
        Self::new(
            Family::PostedPrice { price, burn },
            Objective::Virtual,
            Capacity::Infinite,
            0.0,
            None,
        )
    }

    pub fn schedule(burns: MarginalBurns) -> Result<Self> {
        Self::new(
            Family::Schedule { burns },
            Objective::Virtual,
            Capacity::Infinite,
            0.0,
            None,
        )
    }

    pub fn position(weights: PositionWeights, burn: PositionBurn) -> Result<Self> {
        Self::new(
            Family::Position { weights, burn },
            Objective::Virtual,
            Capacity::Infinite,
            0.0,
            None,
        )
    }

    pub fn genpos(curves: Curves) -> Result<Self> {
        Self::new(
            Family::GenPos { curves },
            Objective::Virtual,
            Capacity::Infinite,
            0.0,
            None,
        )
    }

    pub fn with_objective(mut self, objective: Objective) -> Result<Self> {
        self.objective = objective;
        self.validate()?;
        Ok(self)
    }

    pub fn with_capacity(mut self, capacity: Capacity) -> Result<Self> {
        self.capacity = capacity;
        self.validate()?;
        Ok(self)
    }

    pub fn with_base_burn(mut self, base_burn: f64) -> Result<Self> {
        self.base_burn = base_burn;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_bids(mut self, max_bids: usize) -> Result<Self> {
        self.max_bids = Some(max_bids);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMechanism(m));
        if !self.base_burn.is_finite() {
            return bad("base burn must be finite".into());
        }
        if let Capacity::Finite(c) = self.capacity {
            if !(c.is_finite() && c >= 0.0) {
                return bad(format!("capacity must be nonnegative, got {c}"));
            }
        }
        match &self.family {
            Family::PostedPrice { price, burn } => {
                if !(price.is_finite() && *price >= 0.0) {
                    return bad(format!("price must be nonnegative, got {price}"));
                }
                if let PostedBurn::PerUser(b) = burn {
                    if !b.is_finite() {
                        return bad("burn per user must be finite".into());
                    }
                }
                if self.capacity != Capacity::Infinite {
                    return bad(
                        "a posted price cannot respect a finite capacity deterministically".into(),
                    );
                }
            }
            Family::Schedule { burns } => {
                burns.validate()?;
                if let Capacity::Finite(c) = self.capacity {
                    match burns.max_rank() {
                        Some(k) if (k as f64) <= c => {}
                        _ => return bad(format!("finite capacity {c} needs an infinite burn tail after at most {c} users")),
                    }
                }
            }
            Family::Position { weights, burn } => {
                weights.validate()?;
                let betas_ok = match burn {
                    PositionBurn::Uniform(b) => b.is_finite(),
                    PositionBurn::PerRank(v) => !v.is_empty() && v.iter().all(|b| b.is_finite()),
                };
                if !betas_ok {
                    return bad("position burns must be finite".into());
                }
                if let Capacity::Finite(c) = self.capacity {
                    let total = weights.total();
                    if total > c + 1e-12 {
                        return bad(format!("total allocation {total} exceeds capacity {c}"));
                    }
                }
            }
            Family::GenPos { curves } => {
                curves.validate()?;
                if let Capacity::Finite(c) = self.capacity {
                    let total = curves.total_allocation();
                    if total > c + 1e-12 {
                        return bad(format!("curves allocate up to {total}, above capacity {c}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks that depend on the distribution. Returns advisory warnings.
    pub fn check_against(&self, d: &Distribution) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if let Family::GenPos { curves } = &self.family {
            let floor = match self.objective {
                Objective::Virtual => d.monopoly_reserve(),
                Objective::Value => 0.0,
            };
            if curves.support_start() < floor - 1e-12 {
                return Err(Error::InvalidMechanism(format!(
                    "curves must vanish below {floor}, but start at {}",
                    curves.support_start()
                )));
            }
            if matches!(self.capacity, Capacity::Finite(_)) && !d.is_bounded() {
                warnings.push(
                    "finite capacity with an unbounded distribution: only trivial generalized position auctions are miner-simple"
                        .into(),
                );
            }
        }
        if d.atom_at_sup() > 0.0 {
            warnings.push(format!(
                "distribution has a point mass {} at its supremum",
                d.atom_at_sup()
            ));
        }
        Ok(warnings)
    }

    /// `g(v)`: virtual value or identity depending on the objective.
    pub fn g(&self, d: &Distribution, v: f64) -> Result<f64> {
        match self.objective {
            Objective::Virtual => d.virtual_value(v),
            Objective::Value => {
                if v.is_finite() && v >= 0.0 {
                    Ok(v)
                } else {
                    Err(Error::Domain(format!(
                        "bid {v} is not a finite nonnegative number"
                    )))
                }
            }
        }
    }

    /// Inverse of `g` under the supremum convention.
    pub fn g_inverse(&self, d: &Distribution, y: f64) -> Result<f64> {
        match self.objective {
            Objective::Virtual => d.inverse_virtual_value(y),
            Objective::Value => Ok(y.max(0.0)),
        }
    }

    /// Smallest bid whose `g` strictly exceeds `y`.
    pub fn g_strict_threshold(&self, d: &Distribution, y: f64) -> f64 {
        match self.objective {
            Objective::Virtual => d.strict_threshold(y),
            Objective::Value => y.max(0.0),
        }
    }

    /// Lowest admissible bid.
    pub fn bid_floor(&self, d: &Distribution) -> f64 {
        match self.objective {
            Objective::Virtual => d.support_lo(),
            Objective::Value => 0.0,
        }
    }

    /// `g⁻¹(0)`: the monopoly reserve or zero.
    pub fn g_zero(&self, d: &Distribution) -> f64 {
        match self.objective {
            Objective::Virtual => d.monopoly_reserve(),
            Objective::Value => 0.0,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(
            self.family,
            Family::PostedPrice { .. } | Family::Schedule { .. }
        )
    }

    /// Weight of rank `t` in the prefix objective.
    pub(crate) fn prefix_weight(&self, t: usize) -> f64 {
        match &self.family {
            Family::Position { weights, .. } => weights.x(t),
            _ => 1.0,
        }
    }

    /// Marginal burn per unit at rank `t` (`None`: rank never filled).
    pub(crate) fn prefix_marginal(&self, t: usize) -> Option<f64> {
        match &self.family {
            Family::Schedule { burns } => burns.beta(t),
            Family::Position { burn, .. } => Some(burn.beta(t)),
            _ => None,
        }
    }

    /// Largest prefix size available with `n` bids.
    pub(crate) fn prefix_cap(&self, n: usize) -> usize {
        match &self.family {
            Family::Schedule { burns } => burns.max_rank().map_or(n, |k| k.min(n)),
            _ => n,
        }
    }

    fn check_count(&self, n: usize) -> Result<()> {
        match self.max_bids {
            Some(k) if n > k => Err(Error::Domain(format!(
                "{n} bids exceed the mechanism's limit of {k}"
            ))),
            _ => Ok(()),
        }
    }

    /// Allocation for a rank-ordered profile.
    pub fn allocate(&self, d: &Distribution, bids: &BidProfile) -> Result<Vec<f64>> {
        self.allocate_values(d, bids.values())
    }

    /// Allocation in submission order; equal bids rank by position.
    pub fn allocate_values(&self, d: &Distribution, values: &[f64]) -> Result<Vec<f64>> {
        self.check_count(values.len())?;
        let order = rank_order(values);
        let mut alloc = vec![0.0; values.len()];
        match &self.family {
            Family::PostedPrice { price, .. } => {
                for (i, &v) in values.iter().enumerate() {
                    self.g(d, v)?;
                    if v >= *price {
                        alloc[i] = 1.0;
                    }
                }
            }
            Family::GenPos { curves } => {
                for (r, &i) in order.iter().enumerate() {
                    if self.g(d, values[i])? >= 0.0 {
                        alloc[i] = curves.eval(r + 1, values[i]);
                    }
                }
            }
            _ => {
                let gs = order
                    .iter()
                    .map(|&i| self.g(d, values[i]))
                    .collect::<Result<Vec<_>>>()?;
                let t = self.best_prefix(&gs);
                for (r, &i) in order.iter().take(t).enumerate() {
                    alloc[i] = self.prefix_weight(r + 1);
                }
            }
        }
        Ok(alloc)
    }

    /// Smallest maximizer of the prefix objective for descending `gs`.
    pub(crate) fn best_prefix(&self, gs: &[f64]) -> usize {
        let cap = self.prefix_cap(gs.len());
        let mut best_t = 0;
        let mut best = 0.0;
        let mut acc = 0.0;
        for t in 1..=cap {
            let Some(m) = self.prefix_marginal(t) else {
                break;
            };
            acc += (gs[t - 1] - m) * self.prefix_weight(t);
            if acc > best {
                best = acc;
                best_t = t;
            }
        }
        best_t
    }

    /// Objective value of every prefix size `0..=cap`, excluding `B₀`.
    pub fn prefix_objectives(&self, gs: &[f64]) -> Vec<f64> {
        let cap = self.prefix_cap(gs.len());
        let mut out = vec![0.0];
        let mut acc = 0.0;
        for t in 1..=cap {
            let Some(m) = self.prefix_marginal(t) else {
                break;
            };
            acc += (gs[t - 1] - m) * self.prefix_weight(t);
            out.push(acc);
        }
        out
    }

    /// Burn prescribed by the block-building rule, for submission-order
    /// values and their allocation.
    pub fn burn_direct(&self, d: &Distribution, values: &[f64], alloc: &[f64]) -> Result<f64> {
        let included = alloc.iter().filter(|&&x| x > 0.0).count();
        Ok(self.base_burn
            + match &self.family {
                Family::PostedPrice { price, burn } => {
                    let per = match burn {
                        PostedBurn::PerUser(b) => *b,
                        PostedBurn::All => *price,
                    };
                    per * included as f64
                }
                Family::Schedule { burns } => burns.cumulative(included).unwrap_or(f64::INFINITY),
                Family::Position { weights, burn } => {
                    (1..=included).map(|t| burn.beta(t) * weights.x(t)).sum()
                }
                Family::GenPos { .. } => return identity::burn_from_identity(self, d, values),
            })
    }

    /// Full outcome for a rank-ordered profile.
    pub fn outcome(&self, d: &Distribution, bids: &BidProfile) -> Result<Outcome> {
        self.outcome_values(d, bids.values())
    }

    /// Full outcome in submission order.
    pub fn outcome_values(&self, d: &Distribution, values: &[f64]) -> Result<Outcome> {
        let alloc = self.allocate_values(d, values)?;
        let payments = identity::payments(self, d, values)?;
        let burn = self.burn_direct(d, values, &alloc)?;
        Ok(Outcome {
            alloc,
            payments,
            burn,
        })
    }
}

/// Indices sorted by bid, highest first; ties keep submission order.
pub fn rank_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Miner revenue `Σ P_i − burn`.
pub fn miner_revenue(o: &Outcome) -> f64 {
    o.payments.iter().sum::<f64>() - o.burn
}

/// Joint utility of miner and users, `Σ v_i x_i − burn`.
pub fn coalition_utility(o: &Outcome, values: &[f64]) -> f64 {
    values.iter().zip(&o.alloc).map(|(v, x)| v * x).sum::<f64>() - o.burn
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_order_breaks_ties_by_position() {
        assert_eq!(rank_order(&[1.0, 3.0, 3.0, 2.0]), vec![1, 2, 3, 0]);
    }

    #[test]
    fn posted_price_rejects_finite_capacity() {
        let m = MechanismSpec::posted_price(2.0, PostedBurn::PerUser(1.0)).unwrap();
        assert!(m.with_capacity(Capacity::Finite(3.0)).is_err());
    }

    #[test]
    fn schedule_capacity_needs_infinite_tail() {
        let ok = MechanismSpec::schedule(MarginalBurns::list(vec![1.0, 1.0], BurnTail::Infinite))
            .unwrap();
        assert!(ok.clone().with_capacity(Capacity::Finite(2.0)).is_ok());
        assert!(ok.with_capacity(Capacity::Finite(1.0)).is_err());
    }

    #[test]
    fn harmonic_partial_sums() {
        let w = PositionWeights::Harmonic { scale: 1.0 };
        assert!((w.partial_sum(3) - 0.75).abs() < 1e-15);
        assert_eq!(w.total(), 1.0);
        assert!((w.x(2) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn saturating_integral_matches_antiderivative() {
        let c = Curves::SaturatingExp {
            gamma: 3.0,
            rate: 1.0,
            coefs: CurveCoefs::RankRatio { scale: 0.5 },
        };
        // ∫_3^5 (1 − e^{−(z−3)}/4) dz = 2 − (1 − e^{−2})/4
        let want = 2.0 - (1.0 - (-2.0f64).exp()) / 4.0;
        assert!((c.integral(1, 1.0, 5.0) - want).abs() < 1e-14);
        assert!((c.integral(1, 5.0, 1.0) + want).abs() < 1e-14);
    }
}
