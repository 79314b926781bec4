//! Protocol execution, the standard protocol family, and the lift.

mod builders;
mod exec;
mod lift;

pub use builders::{
    build_fortescue_lo, build_projective_c, build_simple3, build_thm1, build_thm2, fl_min_cycles, fl_success, sigma,
    ProtocolParams, BOUNDARY_TOL,
};
pub use exec::{
    check_halt, execute, resolve_measurement, run, run_finite, run_resummed, run_truncated, HaltRecord, Mode,
    OutcomeDistribution, Trace, Visit, HALT_TOL, NIELSEN_SOURCE_TOL, REENTRY_TOL,
};
pub use lift::{lift, lift_params, LiftParams, SYMMETRY_TOL};
