//! Experiment configuration: parsing, validation, and conversion into
//! library types.
//!
//! Every numeric field is written as a decimal string (`"2.5"`, `"10000"`)
//! so that parsing never depends on the host's number formatting. Unknown
//! keys are rejected. The same grammar is accepted as TOML or JSON.

use crate::error::CliError;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::path::Path;
use tfm_core::dist::{Density, Segment};
use tfm_core::mech::{
    BurnTail, CurveCoefs, Curves, MarginalBurns, PositionBurn, PositionWeights, PostedBurn,
    WeightTail,
};
use tfm_core::verify::{SearchConfig, Tolerances};
use tfm_core::{Capacity, Distribution, MechanismSpec, Objective};

/// A real number read from a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dec(pub f64);

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let v: f64 = text
            .trim()
            .parse()
            .map_err(|_| de::Error::custom(format!("`{text}` is not a decimal number")))?;
        if v.is_nan() {
            return Err(de::Error::custom("NaN is not allowed"));
        }
        Ok(Dec(v))
    }
}

/// A nonnegative integer read from a decimal string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Int(pub u64);

impl Int {
    pub fn usize(self) -> usize {
        self.0 as usize
    }
}

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.trim()
            .parse()
            .map(Int)
            .map_err(|_| de::Error::custom(format!("`{text}` is not a nonnegative integer")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Int>,
    pub distribution: DistributionConfig,
    pub mechanism: MechanismConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionConfig {
    Exponential(ExponentialConfig),
    Uniform(UniformConfig),
    JumpAtom(JumpAtomConfig),
    Piecewise(PiecewiseConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialConfig {
    pub mean: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformConfig {
    pub lo: Dec,
    pub hi: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpAtomConfig {
    pub eps: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub segments: Vec<SegmentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_at_sup: Option<Dec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Constant,
    Exponential,
    InverseSquare,
}

/// One density piece: `constant` takes `density`; `exponential` takes
/// `density` and `rate`; `inverse_square` takes `coef` and `shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub lo: Dec,
    pub hi: Dec,
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coef: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Dec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveConfig {
    Virtual,
    Value,
}

/// Exactly one family table must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveConfig>,
    /// A decimal, or `"infinite"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_burn: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bids: Option<Int>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posted_price: Option<PostedPriceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<PositionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genpos: Option<GenPosConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostedPriceConfig {
    pub price: Dec,
    /// Burn per included user as a decimal, or `"all"` to burn the price.
    pub burn: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurnTailConfig {
    ConstantLast,
    Infinite,
}

/// Either `burns` (with `tail`) or `harmonic_base` and `harmonic_scale`
/// for `β_t = base + scale/t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burns: Option<Vec<Dec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<BurnTailConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic_base: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic_scale: Option<Dec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTailConfig {
    Zero,
    ConstantLast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightsConfig {
    /// `x_t = scale/(t(t+1))`.
    Harmonic(HarmonicWeights),
    Constant(ConstantWeights),
    List(ListWeights),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicWeights {
    /// Defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Dec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantWeights {
    pub x: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListWeights {
    pub values: Vec<Dec>,
    pub tail: WeightTailConfig,
}

/// Either a uniform `beta` or per-rank `betas` (the last one repeats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionConfig {
    pub weights: WeightsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<Dec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenPosConfig {
    /// `x_t(w) = 1 − c_t·exp(−rate·(w − gamma))` from `gamma` on, with
    /// `c_t = coef_scale·t/(t+1)` or an explicit `coefs` list.
    SaturatingExp(SaturatingConfig),
    Step(StepConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturatingConfig {
    pub gamma: Dec,
    pub rate: Dec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coef_scale: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefs: Option<Vec<Dec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub breakpoints: Vec<Dec>,
    pub levels: Vec<Vec<Dec>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<Dec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Dec>,
}

impl ToleranceConfig {
    pub fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            utility: self.utility.map_or(d.utility, |x| x.0),
            boundary: self.boundary.map_or(d.boundary, |x| x.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CheckConfig {
    MirConditions(MirCheck),
    Oncus(OncusCheck),
    OncmsPosition(DepthCheck),
    OncmsGenpos(GenposCheck),
    Gscp(GscpCheck),
    McRevenue(RevenueCheck),
    Mistuning(MistuningCheck),
    Deviation(DeviationCheck),
    CounterexampleIncreasing(IncreasingCheck),
    CounterexampleDecreasing(DecreasingCheck),
    HarmonicReading(ReadingCheck),
}

macro_rules! check_struct {
    ($(#[$doc:meta])* $name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub seed: Option<Int>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub tolerance: Option<ToleranceConfig>,
        }
    };
}

check_struct!(MirCheck { n: Vec<Int>, samples: Int });
check_struct!(OncusCheck {
    n: Int,
    samples: Int,
    grid: Int
});
check_struct!(DepthCheck { t_max: Int });
check_struct!(GenposCheck {
    w_grid: Int,
    t_max: Int
});
check_struct!(GscpCheck { n: Vec<Int>, samples: Int, t_max: Int, w_grid: Int });
check_struct!(RevenueCheck { n: Vec<Int>, samples: Int });
check_struct!(MistuningCheck { mc_samples: Int });
check_struct!(
    /// Deviation search on a literal profile, with the `[search]` settings.
    DeviationCheck { profile: Vec<Dec> }
);
check_struct!(IncreasingCheck { eps: Dec });
check_struct!(DecreasingCheck { n_cap: Int });
check_struct!(ReadingCheck {
    reading: ReadingConfig,
    t_max: Int,
    terms: Int
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadingConfig {
    Adopted,
    Literal,
}

macro_rules! each_check {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            CheckConfig::MirConditions($c) => $body,
            CheckConfig::Oncus($c) => $body,
            CheckConfig::OncmsPosition($c) => $body,
            CheckConfig::OncmsGenpos($c) => $body,
            CheckConfig::Gscp($c) => $body,
            CheckConfig::McRevenue($c) => $body,
            CheckConfig::Mistuning($c) => $body,
            CheckConfig::Deviation($c) => $body,
            CheckConfig::CounterexampleIncreasing($c) => $body,
            CheckConfig::CounterexampleDecreasing($c) => $body,
            CheckConfig::HarmonicReading($c) => $body,
        }
    };
}

impl CheckConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CheckConfig::MirConditions(_) => "mir_conditions",
            CheckConfig::Oncus(_) => "oncus",
            CheckConfig::OncmsPosition(_) => "oncms_position",
            CheckConfig::OncmsGenpos(_) => "oncms_genpos",
            CheckConfig::Gscp(_) => "gscp",
            CheckConfig::McRevenue(_) => "mc_revenue",
            CheckConfig::Mistuning(_) => "mistuning",
            CheckConfig::Deviation(_) => "deviation",
            CheckConfig::CounterexampleIncreasing(_) => "counterexample_increasing",
            CheckConfig::CounterexampleDecreasing(_) => "counterexample_decreasing",
            CheckConfig::HarmonicReading(_) => "harmonic_reading",
        }
    }

    fn common_mut(&mut self) -> (&mut Option<Int>, &mut Option<ToleranceConfig>) {
        each_check!(self, c => (&mut c.seed, &mut c.tolerance))
    }

    /// Seed of this check (set for every check once seeds are resolved).
    pub fn seed(&self) -> u64 {
        each_check!(self, c => c.seed).map_or(tfm_core::rng::DEFAULT_SEED, |s| s.0)
    }

    pub fn tolerances(&self) -> Tolerances {
        each_check!(self, c => c.tolerance.as_ref())
            .map_or_else(Tolerances::default, ToleranceConfig::resolve)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_fabricate: Option<Int>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Int>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_censor: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Int>,
}

impl SearchBlock {
    pub fn resolve(&self) -> SearchConfig {
        let d = SearchConfig::default();
        SearchConfig {
            max_fabricate: self.max_fabricate.map_or(d.max_fabricate, Int::usize),
            grid: self.grid.map_or(d.grid, Int::usize),
            allow_censor: self.allow_censor.unwrap_or(d.allow_censor),
            budget: self.budget.map(Int::usize).or(d.budget),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotBlock {
    /// Ranks drawn in the allocation curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Int>,
    /// Own-bid points per allocation curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Int>,
    /// Points per axis of the two-user region map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Int>,
    /// Largest `g` value on the region map axes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_max: Option<Dec>,
    /// Deepest rank in the burn schedule and margin series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<Int>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Directory for the report and CSV files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Report file name inside `dir`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

impl ExperimentConfig {
    /// Parses TOML, or JSON for `.json` paths. A JSON run report is accepted
    /// too, in which case its embedded config is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let inner = match value.get("schema_version").and(value.get("config")) {
            Some(c) => c.clone(),
            None => value,
        };
        serde_json::from_value(inner).map_err(|e| e.to_string())
    }

    /// Fills in the global seed and every per-check seed, so that the
    /// result re-runs identically.
    pub fn resolve_seeds(&mut self, override_seed: Option<u64>) {
        let global = override_seed
            .or(self.seed.map(|s| s.0))
            .unwrap_or(tfm_core::rng::DEFAULT_SEED);
        self.seed = Some(Int(global));
        for (k, c) in self.checks.iter_mut().enumerate() {
            let name = c.name();
            let (seed, _) = c.common_mut();
            if seed.is_none() {
                *seed = Some(Int(tfm_core::rng::derive_seed(global, name, k as u64)));
            }
        }
    }

    pub fn distribution(&self) -> Result<Distribution, CliError> {
        self.distribution
            .build()
            .map_err(|e| CliError::Config(format!("distribution: {e}")))
    }

    pub fn mechanism(&self) -> Result<MechanismSpec, CliError> {
        self.mechanism
            .build()
            .map_err(|e| CliError::Config(format!("mechanism: {e}")))
    }
}

fn req<T: Copy>(x: Option<T>, what: &str) -> Result<T, String> {
    x.ok_or_else(|| format!("missing `{what}`"))
}

fn decs(xs: &[Dec]) -> Vec<f64> {
    xs.iter().map(|d| d.0).collect()
}

impl DistributionConfig {
    pub fn build(&self) -> Result<Distribution, String> {
        let d = match self {
            DistributionConfig::Exponential(c) => Distribution::exponential(c.mean.0),
            DistributionConfig::Uniform(c) => Distribution::uniform(c.lo.0, c.hi.0),
            DistributionConfig::JumpAtom(c) => Distribution::jump_atom(c.eps.0),
            DistributionConfig::Piecewise(c) => {
                let segments = c
                    .segments
                    .iter()
                    .map(SegmentConfig::build)
                    .collect::<Result<Vec<_>, _>>()?;
                let label = c.label.clone().unwrap_or_else(|| "piecewise".into());
                Distribution::piecewise(label, segments, c.atom_at_sup.map_or(0.0, |a| a.0))
            }
        };
        d.map_err(|e| e.to_string())
    }
}

impl SegmentConfig {
    fn build(&self) -> Result<Segment, String> {
        let density = match self.shape {
            Shape::Constant => Density::Constant {
                density: req(self.density, "density")?.0,
            },
            Shape::Exponential => Density::Exponential {
                density: req(self.density, "density")?.0,
                rate: req(self.rate, "rate")?.0,
            },
            Shape::InverseSquare => Density::InverseSquare {
                coef: req(self.coef, "coef")?.0,
                shift: req(self.shift, "shift")?.0,
            },
        };
        Ok(Segment {
            lo: self.lo.0,
            hi: self.hi.0,
            density,
        })
    }
}

impl MechanismConfig {
    pub fn build(&self) -> Result<MechanismSpec, String> {
        let count = [
            self.posted_price.is_some(),
            self.schedule.is_some(),
            self.position.is_some(),
            self.genpos.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if count != 1 {
            return Err(format!(
                "exactly one of posted_price, schedule, position, genpos is required, found {count}"
            ));
        }
        let e = |x: tfm_core::Error| x.to_string();
        let mut m =
            if let Some(p) = &self.posted_price {
                let burn =
                    if p.burn.trim() == "all" {
                        PostedBurn::All
                    } else {
                        PostedBurn::PerUser(p.burn.trim().parse().map_err(|_| {
                            format!("burn `{}` is not a decimal or \"all\"", p.burn)
                        })?)
                    };
                MechanismSpec::posted_price(p.price.0, burn).map_err(e)?
            } else if let Some(s) = &self.schedule {
                MechanismSpec::schedule(s.build()?).map_err(e)?
            } else if let Some(p) = &self.position {
                let weights = match &p.weights {
                    WeightsConfig::Harmonic(h) => PositionWeights::Harmonic {
                        scale: h.scale.map_or(1.0, |d| d.0),
                    },
                    WeightsConfig::Constant(c) => PositionWeights::Constant { x: c.x.0 },
                    WeightsConfig::List(l) => PositionWeights::List {
                        values: decs(&l.values),
                        tail: match l.tail {
                            WeightTailConfig::Zero => WeightTail::Zero,
                            WeightTailConfig::ConstantLast => WeightTail::ConstantLast,
                        },
                    },
                };
                let burn = match (&p.beta, &p.betas) {
                    (Some(b), None) => PositionBurn::Uniform(b.0),
                    (None, Some(v)) => PositionBurn::PerRank(decs(v)),
                    _ => return Err("position needs exactly one of `beta` and `betas`".into()),
                };
                MechanismSpec::position(weights, burn).map_err(e)?
            } else {
                let curves = match self.genpos.as_ref().unwrap() {
                    GenPosConfig::SaturatingExp(s) => {
                        let coefs =
                            match (&s.coef_scale, &s.coefs) {
                                (Some(k), None) => CurveCoefs::RankRatio { scale: k.0 },
                                (None, Some(v)) => CurveCoefs::List(decs(v)),
                                _ => return Err(
                                    "saturating_exp needs exactly one of `coef_scale` and `coefs`"
                                        .into(),
                                ),
                            };
                        Curves::SaturatingExp {
                            gamma: s.gamma.0,
                            rate: s.rate.0,
                            coefs,
                        }
                    }
                    GenPosConfig::Step(s) => Curves::Step {
                        breakpoints: decs(&s.breakpoints),
                        levels: s.levels.iter().map(|r| decs(r)).collect(),
                    },
                };
                MechanismSpec::genpos(curves).map_err(e)?
            };
        if let Some(o) = self.objective {
            m = m
                .with_objective(match o {
                    ObjectiveConfig::Virtual => Objective::Virtual,
                    ObjectiveConfig::Value => Objective::Value,
                })
                .map_err(e)?;
        }
        if let Some(c) = &self.capacity {
            let cap = if c.trim() == "infinite" {
                Capacity::Infinite
            } else {
                Capacity::Finite(
                    c.trim()
                        .parse()
                        .map_err(|_| format!("capacity `{c}` is not a decimal or \"infinite\""))?,
                )
            };
            m = m.with_capacity(cap).map_err(e)?;
        }
        if let Some(b) = self.base_burn {
            m = m.with_base_burn(b.0).map_err(e)?;
        }
        if let Some(k) = self.max_bids {
            m = m.with_max_bids(k.usize()).map_err(e)?;
        }
        Ok(m)
    }
}

impl ScheduleConfig {
    fn build(&self) -> Result<MarginalBurns, String> {
        match (&self.burns, self.harmonic_base, self.harmonic_scale) {
            (Some(b), None, None) => {
                let tail = match self.tail.unwrap_or(BurnTailConfig::ConstantLast) {
                    BurnTailConfig::ConstantLast => BurnTail::ConstantLast,
                    BurnTailConfig::Infinite => BurnTail::Infinite,
                };
                Ok(MarginalBurns::list(decs(b), tail))
            }
            (None, Some(base), Some(scale)) if self.tail.is_none() => {
                Ok(MarginalBurns::Harmonic { base: base.0, scale: scale.0 })
            }
            _ => Err("schedule needs `burns` (with optional `tail`) or both `harmonic_base` and `harmonic_scale`".into()),
        }
    }
}
