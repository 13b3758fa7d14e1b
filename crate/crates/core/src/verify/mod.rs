//! Incentive checks, deviation oracles, and closed-form conditions.
//!
//! Every check returns a [`CheckReport`]. A failing report always carries at
//! least one [`Witness`]; deviation witnesses can be replayed through
//! [`deviation::replay`].

pub mod closed_form;
pub mod counterexample;
pub mod deviation;
pub mod mir;
pub mod mistuning;
pub mod oncms;
pub mod oncus;
pub mod revenue;

pub use closed_form::{
    fabrication_delta_closed_form, net_fabrication_delta, payment_delta_above, payment_delta_below,
};
pub use counterexample::{
    counterexample_decreasing_burns, counterexample_increasing_burns, Counterexample,
};
pub use deviation::{deviation_search, fabrication_grid, replay, SearchConfig, MAX_SEARCH_BIDS};
pub use mir::{check_gscp, check_mir_conditions};
pub use mistuning::{posted_price_mistuning, MistuningReport};
pub use oncms::{check_oncms_genpos, check_oncms_position};
pub use oncus::{check_oncus, check_oncus_with};
pub use revenue::{mc_revenue_equivalence, RevenueReport};

use serde::Serialize;

/// Verdict of a check or one of its criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

impl Status {
    /// Combines sub-verdicts: any failure fails, then any inconclusive.
    pub fn combine(items: impl IntoIterator<Item = Status>) -> Status {
        let mut out = Status::Pass;
        let mut any = false;
        for s in items {
            any = true;
            match (out, s) {
                (_, Status::Fail) | (Status::Fail, _) => out = Status::Fail,
                (_, Status::Inconclusive) | (Status::Inconclusive, _) => out = Status::Inconclusive,
                _ => {}
            }
        }
        if any {
            out
        } else {
            Status::NotApplicable
        }
    }
}

/// What a miner (or user) did to the bid set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationKind {
    None,
    Censor,
    Fabricate,
    CensorFabricate,
    OffchainCoerce,
    EntryFee,
    Rebate,
    Underbid,
    Overbid,
}

/// Quantity compared before and after a deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    MinerRevenue,
    VirtualUtility,
    CoalitionUtility,
    UserUtility,
    RevenuePerUser,
}

/// One deviation and its effect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub kind: DeviationKind,
    pub measure: Measure,
    /// Truthful bids in submission order.
    pub bids: Vec<f64>,
    /// Bids the mechanism sees after the deviation.
    pub manipulated: Vec<f64>,
    /// Indices into `bids` that were dropped.
    pub censored: Vec<usize>,
    pub fabricated: Vec<f64>,
    pub revenue_before: f64,
    pub revenue_after: f64,
    pub delta: f64,
    /// Set when a search budget cut enumeration short.
    pub partial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DeviationReport {
    pub fn new(
        kind: DeviationKind,
        measure: Measure,
        bids: Vec<f64>,
        manipulated: Vec<f64>,
        before: f64,
        after: f64,
    ) -> Self {
        DeviationReport {
            kind,
            measure,
            bids,
            manipulated,
            censored: vec![],
            fabricated: vec![],
            revenue_before: before,
            revenue_after: after,
            delta: after - before,
            partial: false,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A violated inequality at a specific rank and value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionWitness {
    pub condition: String,
    pub t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Evidence attached to a failing criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Deviation(DeviationReport),
    Condition(ConditionWitness),
}

/// A named numeric margin (positive means slack).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    pub value: f64,
}

/// One sub-condition of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: String,
    pub status: Status,
    pub trials: usize,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CriterionReport {
    pub fn counted(name: &str, trials: usize, violations: usize) -> Self {
        CriterionReport {
            name: name.into(),
            status: if violations > 0 {
                Status::Fail
            } else {
                Status::Pass
            },
            trials,
            violations,
            worst_margin: None,
            note: None,
        }
    }

    pub fn with_status(name: &str, status: Status, note: impl Into<String>) -> Self {
        CriterionReport {
            name: name.into(),
            status,
            trials: 0,
            violations: 0,
            worst_margin: None,
            note: Some(note.into()),
        }
    }
}

/// Inputs needed to reproduce a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckMeta {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    pub grid_size: Option<usize>,
    pub t_max: Option<usize>,
}

/// Result of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub criteria: Vec<CriterionReport>,
    pub margins: Vec<Margin>,
    pub witnesses: Vec<Witness>,
    pub meta: CheckMeta,
    pub notes: Vec<String>,
}

/// Witnesses kept per criterion.
pub const MAX_WITNESSES: usize = 10;

impl CheckReport {
    pub fn new(check: &str, meta: CheckMeta) -> Self {
        CheckReport {
            check: check.into(),
            status: Status::NotApplicable,
            criteria: vec![],
            margins: vec![],
            witnesses: vec![],
            meta,
            notes: vec![],
        }
    }

    /// Sets `status` from the criteria.
    pub fn finish(mut self) -> Self {
        self.status = Status::combine(self.criteria.iter().map(|c| c.status));
        self
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionReport> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn deviations(&self) -> impl Iterator<Item = &DeviationReport> {
        self.witnesses.iter().filter_map(|w| match w {
            Witness::Deviation(d) => Some(d),
            Witness::Condition(_) => None,
        })
    }
}

/// Numeric tolerances shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed gain of a deviation, relative to `max(1, |baseline|)`.
    pub utility: f64,
    /// Band around zero in which a margin counts as a boundary hit.
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            utility: 1e-9,
            boundary: 1e-12,
        }
    }
}

impl Tolerances {
    pub(crate) fn exceeds(&self, gain: f64, baseline: f64) -> bool {
        gain > self.utility * baseline.abs().max(1.0)
    }
}

/// Classifies a margin `rhs − lhs` of a strict inequality `lhs < rhs`.
pub(crate) fn strict_margin_status(margin: f64, scale: f64, tol: &Tolerances) -> Status {
    let band = tol.boundary * scale.abs().max(1.0);
    if margin > band {
        Status::Pass
    } else if margin >= -band {
        Status::Inconclusive
    } else {
        Status::Fail
    }
}
