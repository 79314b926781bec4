use std::f64::consts::FRAC_1_SQRT_2;

use super::{classify, Verdict};
use crate::engine::{build_thm1, build_thm2, run_finite, run_resummed, ProtocolParams, BOUNDARY_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub verdict: Verdict,
    pub degenerate: bool,
    pub alpha: f64,
    pub p_ab: Option<f64>,
    pub p_ac: Option<f64>,
    pub p_bc: Option<f64>,
    /// Builder whose distribution fills the row.
    pub protocol: Option<&'static str>,
}

/// [`sweep_with`] for protocols where every pair outcome has positive
/// probability.
pub fn sweep(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<SweepRow>> {
    sweep_with(t_min, t_max, steps, true)
}

/// `steps` evenly spaced targets from `t_min` to `t_max` inclusive. Rows up
/// to `1/√2` use the four-round protocol, rows in `(1/√2, 1)` the resummed
/// repeating protocol; `t = 0` and `t = 1` carry a verdict only.
pub fn sweep_with(t_min: f64, t_max: f64, steps: usize, require_all_pairs: bool) -> Result<Vec<SweepRow>> {
    if !(0.0 <= t_min && t_min <= t_max && t_max <= 1.0) {
        return Err(Error::Domain(format!("need 0 ≤ t_min ≤ t_max ≤ 1, got [{t_min}, {t_max}]")));
    }
    if steps == 0 {
        return Err(Error::Domain("steps must be at least 1".into()));
    }
    (0..steps)
        .map(|k| {
            let t = if steps == 1 {
                t_min
            } else if k == steps - 1 {
                t_max
            } else {
                t_min + (t_max - t_min) * k as f64 / (steps - 1) as f64
            };
            row(t, require_all_pairs)
        })
        .collect()
}

fn row(t: f64, require_all_pairs: bool) -> Result<SweepRow> {
    let c = classify(t, require_all_pairs)?;
    let alpha = ProtocolParams::new(t)?.alpha;
    let run = if t > 0.0 && t <= FRAC_1_SQRT_2 + BOUNDARY_TOL {
        Some(("thm1", run_finite(&build_thm1(t)?, t)?))
    } else if t > 0.0 && t < 1.0 {
        Some(("thm2", run_resummed(&build_thm2(t)?, t)?))
    } else {
        None
    };
    Ok(SweepRow {
        t,
        verdict: c.verdict,
        degenerate: c.degenerate,
        alpha,
        p_ab: run.as_ref().map(|r| r.1.p_ab),
        p_ac: run.as_ref().map(|r| r.1.p_ac),
        p_bc: run.as_ref().map(|r| r.1.p_bc),
        protocol: run.map(|r| r.0),
    })
}
