//! Runs configured checks against the library.

use crate::config::{CheckConfig, ExperimentConfig, Int, ReadingConfig};
use crate::error::CliError;
use crate::report::CheckOutcome;
use serde::Serialize;
use serde_json::Value;
use std::time::Instant;
use tfm_core::mech::{MarginalBurns, PostedBurn};
use tfm_core::verify::closed_form::{check_harmonic_reading, HarmonicReading};
use tfm_core::verify::counterexample::{Counterexample, Finding};
use tfm_core::verify::mir::GscpOptions;
use tfm_core::verify::{self, SearchConfig, Status};
use tfm_core::{Distribution, Family, MechanismSpec};

/// Library objects shared by every check of one run.
pub struct Context {
    pub dist: Distribution,
    pub mech: MechanismSpec,
    pub search: SearchConfig,
}

impl Context {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let dist = cfg.distribution()?;
        let mech = cfg.mechanism()?;
        mech.check_against(&dist)
            .map_err(|e| CliError::Config(format!("mechanism: {e}")))?;
        let search = cfg.search.clone().unwrap_or_default().resolve();
        Ok(Context { dist, mech, search })
    }
}

fn json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn ints(xs: &Option<Vec<Int>>, default: &[usize]) -> Vec<usize> {
    xs.as_ref().map_or_else(
        || default.to_vec(),
        |v| v.iter().map(|i| i.usize()).collect(),
    )
}

fn int(x: Option<Int>, default: usize) -> usize {
    x.map_or(default, Int::usize)
}

fn finding_status(c: &Counterexample) -> Status {
    match c.finding {
        Finding::Found => Status::Fail,
        Finding::NotApplicable => Status::NotApplicable,
        Finding::Inconclusive => Status::Inconclusive,
    }
}

fn schedule_burns(m: &MechanismSpec) -> Result<&MarginalBurns, String> {
    match &m.family {
        Family::Schedule { burns } => Ok(burns),
        _ => Err("needs a schedule mechanism".into()),
    }
}

fn evaluate(check: &CheckConfig, ctx: &Context) -> Result<(Status, Value), String> {
    let (m, d) = (&ctx.mech, &ctx.dist);
    let seed = check.seed();
    let tol = check.tolerances();
    let e = |x: tfm_core::Error| x.to_string();
    Ok(match check {
        CheckConfig::MirConditions(c) => {
            let r = verify::check_mir_conditions(
                m,
                d,
                &ints(&c.n, &[1, 2, 3]),
                int(c.samples, 10_000),
                seed,
                &tol,
            )
            .map_err(e)?;
            (r.status, json(&r))
        }
        CheckConfig::Oncus(c) => {
            let r = verify::check_oncus(
                m,
                d,
                int(c.n, 2),
                int(c.samples, 1_000),
                int(c.grid, 64),
                seed,
                &tol,
            )
            .map_err(e)?;
            (r.status, json(&r))
        }
        CheckConfig::OncmsPosition(c) => {
            let r = verify::check_oncms_position(m, d, int(c.t_max, 100), &tol).map_err(e)?;
            (r.status, json(&r))
        }
        CheckConfig::OncmsGenpos(c) => {
            let r = verify::check_oncms_genpos(m, d, int(c.w_grid, 256), int(c.t_max, 50), &tol)
                .map_err(e)?;
            (r.status, json(&r))
        }
        CheckConfig::Gscp(c) => {
            let defaults = GscpOptions::default();
            let opts = GscpOptions {
                n_list: ints(&c.n, &defaults.n_list),
                samples: int(c.samples, defaults.samples),
                seed,
                t_max: int(c.t_max, defaults.t_max),
                w_grid: int(c.w_grid, defaults.w_grid),
                tol,
            };
            let r = verify::check_gscp(m, d, &opts).map_err(e)?;
            (r.status, json(&r))
        }
        CheckConfig::McRevenue(c) => {
            let samples = int(c.samples, 100_000);
            let reports = ints(&c.n, &[1, 2, 5])
                .into_iter()
                .map(|n| verify::mc_revenue_equivalence(m, d, n, samples, seed))
                .collect::<Result<Vec<_>, _>>()
                .map_err(e)?;
            (
                Status::combine(reports.iter().map(|r| r.status)),
                json(&reports),
            )
        }
        CheckConfig::Mistuning(c) => {
            let Family::PostedPrice { price, burn } = &m.family else {
                return Err("needs a posted price mechanism".into());
            };
            let b = match burn {
                PostedBurn::PerUser(b) => *b,
                PostedBurn::All => *price,
            };
            let r = verify::posted_price_mistuning(d, *price, b, int(c.mc_samples, 10_000), seed)
                .map_err(e)?;
            let status = if r.gain_exact > tol.utility {
                Status::Fail
            } else {
                Status::Pass
            };
            (status, json(&r))
        }
        CheckConfig::Deviation(c) => {
            let bids: Vec<f64> = c
                .profile
                .as_ref()
                .ok_or("missing `profile`")?
                .iter()
                .map(|x| x.0)
                .collect();
            let r = verify::deviation_search(m, d, &bids, &ctx.search).map_err(e)?;
            (deviation_status(&r, &tol), json(&r))
        }
        CheckConfig::CounterexampleIncreasing(c) => {
            let eps = c.eps.map_or(0.1, |x| x.0);
            let r =
                verify::counterexample_increasing_burns(d, schedule_burns(m)?, eps).map_err(e)?;
            (finding_status(&r), json(&r))
        }
        CheckConfig::CounterexampleDecreasing(c) => {
            let r =
                verify::counterexample_decreasing_burns(d, schedule_burns(m)?, int(c.n_cap, 1_000))
                    .map_err(e)?;
            (finding_status(&r), json(&r))
        }
        CheckConfig::HarmonicReading(c) => {
            let reading = match c.reading.unwrap_or(ReadingConfig::Adopted) {
                ReadingConfig::Adopted => HarmonicReading::Adopted,
                ReadingConfig::Literal => HarmonicReading::Literal,
            };
            let r = check_harmonic_reading(reading, int(c.t_max, 100), int(c.terms, 1_000_000));
            let status = if r.first_identity_failure.is_none() {
                Status::Pass
            } else {
                Status::Fail
            };
            (status, json(&r))
        }
    })
}

/// Pass when no deviation gains more than the tolerance; a truncated
/// search without a gain is inconclusive.
pub fn deviation_status(r: &verify::DeviationReport, tol: &verify::Tolerances) -> Status {
    if r.delta > tol.utility * r.revenue_before.abs().max(1.0) {
        Status::Fail
    } else if r.partial {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

/// Runs one check, timing it. Library errors are recorded, not raised.
pub fn run_check(check: &CheckConfig, ctx: &Context) -> CheckOutcome {
    let start = Instant::now();
    let result = evaluate(check, ctx);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let (status, result, error) = match result {
        Ok((s, v)) => (s, v, None),
        Err(msg) => (Status::Fail, Value::Null, Some(msg)),
    };
    CheckOutcome {
        name: check.name().into(),
        seed: check.seed(),
        status,
        wall_time_ms,
        error,
        result,
    }
}
