//! Ready-made protocols on the W state.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::protocol::{Edge, HaltLabel, MeasureSpec, ProtocolGraph, Scalar};
use crate::state::{Party, WClassState};

/// Slack allowed above `1/√2` for boundary targets.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Parameters of the four-round distillation protocol for target `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub t: f64,
    /// `2√(1−t²)/(1+√(1−t²))`.
    pub alpha: f64,
    /// `((1+√(1−2t²))/(2t))²`, defined for `0 < t ≤ 1/√2`.
    pub s: Option<f64>,
    /// `1 − (1−α)s`.
    pub beta: Option<f64>,
}

impl ProtocolParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("target concurrence must lie in [0, 1], got {t}")));
        }
        let r = (1.0 - t * t).sqrt();
        let alpha = 2.0 * r / (1.0 + r);
        let s = sigma(t);
        let beta = s.map(|s| 1.0 - (1.0 - alpha) * s);
        Ok(ProtocolParams { t, alpha, s, beta })
    }
}

/// `((1+√(1−2t²))/(2t))²` for `0 < t ≤ 1/√2`.
pub fn sigma(t: f64) -> Option<f64> {
    if t <= 0.0 || t > FRAC_1_SQRT_2 + BOUNDARY_TOL {
        return None;
    }
    let root = (1.0 - 2.0 * t * t).max(0.0).sqrt();
    let v = (1.0 + root) / (2.0 * t);
    Some(v * v)
}

fn halt(l: HaltLabel) -> Edge {
    Edge::Halt(l)
}

fn to(id: &str) -> Edge {
    Edge::Continue(id.to_string())
}

fn finite_domain(t: f64, what: &str) -> Result<()> {
    if !(t > 0.0 && t <= FRAC_1_SQRT_2 + BOUNDARY_TOL) {
        return Err(Error::Domain(format!("{what} needs 0 < t ≤ 1/√2, got {t}")));
    }
    Ok(())
}

/// Four rounds: C:wpp(α) → A:wpp(α) → B:wpp(β) → A:hadamard.
pub fn build_thm1(t: f64) -> Result<ProtocolGraph> {
    finite_domain(t, "the four-round protocol")?;
    let p = ProtocolParams::new(t)?;
    let (s, beta) = (p.s.expect("in domain"), p.beta.expect("in domain"));
    ProtocolGraph::builder("thm1", WClassState::w())
        .param("t", t)
        .param("alpha", p.alpha)
        .param("s", s)
        .param("beta", beta)
        .node("r1", Party::C, MeasureSpec::Wpp("alpha".into()), vec![halt(HaltLabel::EprAB), to("r2")])
        .node("r2", Party::A, MeasureSpec::Wpp("alpha".into()), vec![halt(HaltLabel::BcTarget), to("r3")])
        .node("r3", Party::B, MeasureSpec::Wpp("beta".into()), vec![halt(HaltLabel::EprAC), to("r4")])
        .node("r4", Party::A, MeasureSpec::Hadamard, vec![halt(HaltLabel::BcTarget); 2])
        .build()
}

/// Three rounds: C:wpp(½) → A:hadamard → B:nielsen(√½, t). Never yields AC.
pub fn build_simple3(t: f64) -> Result<ProtocolGraph> {
    finite_domain(t, "the three-round protocol")?;
    let t = t.min(FRAC_1_SQRT_2);
    ProtocolGraph::builder("simple3", WClassState::w())
        .param("t", t)
        .node("r1", Party::C, MeasureSpec::Wpp(0.5.into()), vec![halt(HaltLabel::EprAB), to("r2")])
        .node("r2", Party::A, MeasureSpec::Hadamard, vec![to("r3"), to("r3")])
        .node(
            "r3",
            Party::B,
            MeasureSpec::Nielsen(FRAC_1_SQRT_2.into(), Scalar::Param("t".into())),
            vec![halt(HaltLabel::BcTarget); 2],
        )
        .build()
}

/// Each party measures wpp(α) in turn; if all three get the second outcome
/// the state is W again and the protocol restarts.
pub fn build_thm2(t: f64) -> Result<ProtocolGraph> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("the repeating protocol needs 0 < t < 1, got {t}")));
    }
    let p = ProtocolParams::new(t)?;
    ProtocolGraph::builder("thm2", WClassState::w())
        .param("t", t)
        .param("alpha", p.alpha)
        .node("r1", Party::C, MeasureSpec::Wpp("alpha".into()), vec![halt(HaltLabel::EprAB), to("r2")])
        .node("r2", Party::A, MeasureSpec::Wpp("alpha".into()), vec![halt(HaltLabel::BcTarget), to("r3")])
        .node("r3", Party::B, MeasureSpec::Wpp("alpha".into()), vec![halt(HaltLabel::EprAC), Edge::Loop("r1".into())])
        .build()
}

/// The repeating cycle at weight `ε`, targeting Bell pairs on every label.
/// The BC branch is followed by Bob's probabilistic conversion to a Bell
/// pair; its failure outcome is discarded. Execute with `t = 1`.
pub fn build_fortescue_lo(eps: f64) -> Result<ProtocolGraph> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    // BC pair after C and A get outcomes 2 and 1: x_B = (1−ε)/(2−ε), x_C = 1/(2−ε).
    let ratio = 1.0 - eps;
    let convert = Mat2::diag_real(ratio.sqrt(), 1.0);
    let discard = Mat2::diag_real((1.0 - ratio).sqrt(), 0.0);
    ProtocolGraph::builder("fortescue-lo", WClassState::w())
        .param("epsilon", eps)
        .node("r1", Party::C, MeasureSpec::Wpp("epsilon".into()), vec![halt(HaltLabel::EprAB), to("r2")])
        .node("r2", Party::A, MeasureSpec::Wpp("epsilon".into()), vec![to("r3c"), to("r3")])
        .node("r3", Party::B, MeasureSpec::Wpp("epsilon".into()), vec![halt(HaltLabel::EprAC), Edge::Loop("r1".into())])
        .node("r3c", Party::B, MeasureSpec::Kraus(vec![convert, discard]), vec![halt(HaltLabel::BcTarget), halt(HaltLabel::Fail)])
        .build()
}

/// Charlie measures in the computational basis; `|0⟩` leaves an AB Bell pair.
pub fn build_projective_c() -> Result<ProtocolGraph> {
    ProtocolGraph::builder("projective-c", WClassState::w())
        .node("r1", Party::C, MeasureSpec::ProjZ, vec![halt(HaltLabel::EprAB), halt(HaltLabel::Fail)])
        .build()
}

/// Success probability of `n` cycles of [`build_fortescue_lo`]:
/// `(6−4ε)/(6−3ε)·(1−(1−ε)^{2n})`.
pub fn fl_success(eps: f64, n: u64) -> f64 {
    let decay = (1.0 - eps).powf(2.0 * n as f64);
    (6.0 - 4.0 * eps) / (6.0 - 3.0 * eps) * (1.0 - decay)
}

/// Smallest `n` with `fl_success(ε, n) ≥ 1 − ε`.
pub fn fl_min_cycles(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let limit = (6.0 - 4.0 * eps) / (6.0 - 3.0 * eps);
    // (1−ε)^{2n} ≤ 1 − (1−ε)/limit
    let need = 1.0 - (1.0 - eps) / limit;
    let mut n = ((need.ln() / (1.0 - eps).ln()) / 2.0).ceil().max(0.0) as u64;
    while n > 0 && fl_success(eps, n - 1) >= 1.0 - eps {
        n -= 1;
    }
    while fl_success(eps, n) < 1.0 - eps {
        n += 1;
    }
    Ok(n)
}
