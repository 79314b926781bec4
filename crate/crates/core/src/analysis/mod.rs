//! Round-complexity classification, protocol verification, sweeps and
//! output formatting.

mod report;
mod sweep;
mod verify;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::engine::BOUNDARY_TOL;
use crate::error::{Error, Result};

pub use report::{fmt_g12, round12, run_csv, run_json, sweep_csv, sweep_json, RUN_CSV_HEADER, SWEEP_CSV_HEADER};
pub use sweep::{sweep, sweep_with, SweepRow};
pub use verify::{verify, CheckResult, CheckStatus, EprRoundEnsemble, VerificationReport};

/// Fewest rounds any LOCC protocol needs to turn W into an EPR pair or a BC
/// pair of concurrence `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Finite(u8),
    Infinite,
    Impossible,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Finite(n) => write!(f, "finite({n})"),
            Verdict::Infinite => f.write_str("infinite"),
            Verdict::Impossible => f.write_str("impossible"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    /// `t = 0`: the BC target is unentangled.
    pub degenerate: bool,
}

/// Step function in `t`: four rounds (three if some `p_ij` may vanish) up to
/// `1/√2`, unboundedly many below 1, impossible at 1.
pub fn classify(t: f64, require_all_pairs: bool) -> Result<Classification> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    let verdict = if t >= 1.0 - BOUNDARY_TOL {
        Verdict::Impossible
    } else if t > FRAC_1_SQRT_2 + BOUNDARY_TOL {
        Verdict::Infinite
    } else if require_all_pairs {
        Verdict::Finite(4)
    } else {
        Verdict::Finite(3)
    };
    Ok(Classification { verdict, degenerate: t == 0.0 })
}
