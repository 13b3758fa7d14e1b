//! CSV series behind the mechanism figures.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), rows end in LF,
//! and column order is fixed.

use crate::config::{Int, PlotBlock};
use crate::error::CliError;
use std::path::{Path, PathBuf};
use tfm_core::verify::{self, Tolerances};
use tfm_core::{Distribution, Family, MechanismSpec};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn lib(e: tfm_core::Error) -> CliError {
    CliError::Run(e.to_string())
}

/// Bid high enough to outrank any own bid on the curve grid.
fn top_bid(d: &Distribution) -> f64 {
    if d.is_bounded() {
        d.support_hi()
    } else {
        d.quantile(1.0 - 1e-9)
    }
}

/// Own-bid allocation at rank `t`, with `t − 1` competitors at the top of
/// the support.
fn allocation_curves(
    m: &MechanismSpec,
    d: &Distribution,
    ranks: usize,
    points: usize,
    path: &Path,
) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["rank", "bid", "allocation"])?;
    let hi = if d.is_bounded() {
        d.support_hi()
    } else {
        d.quantile(0.999)
    };
    let lo = d.support_lo();
    let ranks = m.max_bids.map_or(ranks, |k| ranks.min(k));
    for t in 1..=ranks {
        let mut bids = vec![top_bid(d); t];
        for k in 0..points {
            let z = lo + (hi - lo) * k as f64 / (points - 1).max(1) as f64;
            bids[t - 1] = z;
            let x = m.allocate_values(d, &bids).map_err(lib)?[t - 1];
            w.write_record([t.to_string(), num(z), num(x)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Total burn when `t` users bid at the top of the support.
fn burn_schedule(
    m: &MechanismSpec,
    d: &Distribution,
    t_max: usize,
    path: &Path,
) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["t", "included", "burn"])?;
    let t_max = m.max_bids.map_or(t_max, |k| t_max.min(k));
    for t in 0..=t_max {
        let o = m.outcome_values(d, &vec![top_bid(d); t]).map_err(lib)?;
        let included = o.alloc.iter().filter(|&&x| x > 0.0).count();
        w.write_record([t.to_string(), included.to_string(), num(o.burn)])?;
    }
    w.flush()?;
    Ok(())
}

/// Two-user allocation over a grid of `g` values: A both, B first only,
/// C second only, D neither.
fn region_map(
    m: &MechanismSpec,
    d: &Distribution,
    grid: usize,
    g_max: Option<f64>,
    path: &Path,
) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["g1", "g2", "v1", "v2", "x1", "x2", "region"])?;
    let g_top = match g_max {
        Some(g) => g,
        None => m.g(d, d.quantile(0.999)).map_err(lib)?,
    };
    let g_lo = m.g(d, m.bid_floor(d)).map_err(lib)?.max(0.0);
    let step = |k: usize| g_lo + (g_top - g_lo) * k as f64 / (grid - 1).max(1) as f64;
    for a in 0..grid {
        for b in 0..grid {
            let (g1, g2) = (step(a), step(b));
            let v = [
                m.g_inverse(d, g1).map_err(lib)?,
                m.g_inverse(d, g2).map_err(lib)?,
            ];
            let x = m.allocate_values(d, &v).map_err(lib)?;
            let region = match (x[0] > 0.0, x[1] > 0.0) {
                (true, true) => "A",
                (true, false) => "B",
                (false, true) => "C",
                (false, false) => "D",
            };
            w.write_record([
                num(g1),
                num(g2),
                num(v[0]),
                num(v[1]),
                num(x[0]),
                num(x[1]),
                region.into(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Slack of the bounded position-auction condition at each rank.
fn oncms_margins(
    m: &MechanismSpec,
    d: &Distribution,
    t_max: usize,
    path: &Path,
) -> Result<bool, CliError> {
    let Family::Position { weights, .. } = &m.family else {
        return Ok(false);
    };
    let r = match verify::check_oncms_position(m, d, t_max, &Tolerances::default()) {
        Ok(r) => r,
        Err(tfm_core::Error::Unsupported(_)) => return Ok(false),
        Err(e) => return Err(lib(e)),
    };
    let mut w = writer(path)?;
    w.write_record(["t", "x", "margin"])?;
    for g in r
        .margins
        .iter()
        .filter(|g| g.label == "sufficient_condition")
    {
        let t = g.t.unwrap_or(0);
        w.write_record([t.to_string(), num(weights.x(t)), num(g.value)])?;
    }
    w.flush()?;
    Ok(true)
}

/// Writes every series that applies to the mechanism and returns the paths.
pub fn write_all(
    m: &MechanismSpec,
    d: &Distribution,
    opts: &PlotBlock,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let get = |x: Option<Int>, default: usize| x.map_or(default, Int::usize);
    let t_max = get(opts.t_max, 100);
    let mut out = Vec::new();
    let p = dir.join("allocation_curves.csv");
    allocation_curves(m, d, get(opts.ranks, 5), get(opts.points, 201), &p)?;
    out.push(p);
    let p = dir.join("burn_schedule.csv");
    burn_schedule(m, d, t_max, &p)?;
    out.push(p);
    if m.max_bids.is_none_or(|k| k >= 2) {
        let p = dir.join("region_map.csv");
        region_map(m, d, get(opts.grid, 32), opts.g_max.map(|g| g.0), &p)?;
        out.push(p);
    }
    let p = dir.join("oncms_margins.csv");
    if oncms_margins(m, d, t_max, &p)? {
        out.push(p);
    }
    Ok(out)
}
