//! Raising the EPR yield of a finite protocol by two extra rounds.
//!
//! The last node that produces an EPR pair must act on a state of the form
//! `x_A = x_Q = (1−s)/2`, `x_P = s`, where P is the acting party and the
//! pair is A–Q. That node and everything below it are replaced:
//!
//! * `P:wpp(δ)`, `δ = q/(1−s)`, reproduces the original EPR mass `q` and
//!   leaves `x_P = s′ = s/(1−q)`.
//! * For `s′ < ½`: `P:wpp(γ)`, `γ = (1−2s′)/(1−s′)²`, splits off more EPR
//!   mass and leaves `(s′/2, s′/2, 1−s′)`, whose BC concurrence of
//!   assistance `√(2s′(1−s′))` is converted to `t`.
//! * For `s′ ≥ ½`: rounds 2–4 of the four-round protocol with
//!   `α′ = (3 − 1/s′)/2`.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;

use super::builders::{sigma, BOUNDARY_TOL};
use super::exec::{execute, run_finite, Mode};
use crate::entanglement::PairLabel;
use crate::error::{Error, Result};
use crate::protocol::{Edge, HaltLabel, MeasureSpec, ProtocolGraph, ProtocolNode};
use crate::state::{canonicalize, embed, Party};

/// Tolerance on the symmetric form of the lifted node's input state.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftParams {
    /// Node replaced by the lift.
    pub node: String,
    /// Its round index.
    pub m: usize,
    pub acting: Party,
    pub label: HaltLabel,
    pub q: f64,
    pub s: f64,
    pub delta: f64,
    pub s_prime: f64,
    pub gamma: Option<f64>,
    pub alpha_prime: Option<f64>,
}

/// Locates the last EPR-producing node and derives the lift parameters.
pub fn lift_params(g: &ProtocolGraph, t: f64) -> Result<LiftParams> {
    if !(t > 0.0 && t <= FRAC_1_SQRT_2 + BOUNDARY_TOL) {
        return Err(Error::Domain(format!("lift needs 0 < t ≤ 1/√2, got {t}")));
    }
    let dist = run_finite(g, t)?;
    if dist.residual.abs() > 1e-12 || dist.p_fail > 1e-12 {
        return Err(Error::Shape("lift needs a deterministic protocol".into()));
    }
    let trace = execute(g, t, Mode::Finite, true)?;

    let epr_label = |n: &ProtocolNode| -> Option<HaltLabel> {
        n.edges.iter().find_map(|e| match e {
            Edge::Halt(l) if l.is_epr() => Some(*l),
            _ => None,
        })
    };
    let last = trace
        .visits
        .iter()
        .filter(|v| g.node(&v.node).and_then(epr_label).is_some())
        .fold(None::<&super::exec::Visit>, |best, v| match best {
            Some(b) if b.depth >= v.depth => Some(b),
            _ => Some(v),
        })
        .ok_or_else(|| Error::Shape("protocol has no EPR-producing node".into()))?;
    let node = g.node(&last.node).expect("visited node exists");
    if trace.visits.iter().filter(|v| v.node == node.id).count() != 1 {
        return Err(Error::Shape(format!("node {} is reached on more than one branch", node.id)));
    }
    let label = epr_label(node).expect("filtered");
    if node.edges.iter().any(|e| matches!(e, Edge::Halt(l) if l.is_epr() && *l != label)) {
        return Err(Error::Shape(format!("node {} produces two different EPR pairs", node.id)));
    }
    let pair = if label == HaltLabel::EprAB { PairLabel::AB } else { PairLabel::AC };
    let acting = node.party;
    if acting != pair.excluded() {
        return Err(Error::Shape(format!("node {} acts on a party inside its EPR pair", node.id)));
    }
    let partner = Party::A.third(acting);

    let cf = canonicalize(&last.state)?;
    let layout = embed(&cf.state).max_diff_up_to_phase(&last.state);
    let x = cf.state;
    let s = x.coord(acting);
    if layout > SYMMETRY_TOL
        || x.x0() > SYMMETRY_TOL
        || (x.coord(Party::A) - x.coord(partner)).abs() > SYMMETRY_TOL
    {
        return Err(Error::Shape(format!(
            "input of node {} is {x}, not of the form ((1−s)/2, (1−s)/2, s) in canonical layout",
            node.id
        )));
    }

    let q: f64 = last
        .branches
        .iter()
        .filter(|b| node.edges[b.outcome] == Edge::Halt(label))
        .map(|b| b.probability)
        .sum();
    let delta = q / (1.0 - s);
    let s_prime = s / (1.0 - q);
    if !(0.0..=1.0).contains(&delta) || !(s_prime > 0.0 && s_prime < 1.0) {
        return Err(Error::Shape(format!("lift parameters out of range: δ = {delta}, s′ = {s_prime}")));
    }
    let (gamma, alpha_prime) = if s_prime < 0.5 {
        (Some((1.0 - 2.0 * s_prime) / (1.0 - s_prime).powi(2)), None)
    } else {
        (None, Some((3.0 - 1.0 / s_prime) / 2.0))
    };
    Ok(LiftParams {
        node: node.id.clone(),
        m: last.depth,
        acting,
        label,
        q,
        s,
        delta,
        s_prime,
        gamma,
        alpha_prime,
    })
}

/// Two-round-longer protocol with strictly larger EPR yield.
pub fn lift(g: &ProtocolGraph, t: f64) -> Result<ProtocolGraph> {
    let lp = lift_params(g, t)?;
    let before = run_finite(g, t)?;
    let acting = lp.acting;
    let partner = Party::A.third(acting);
    let epr = Edge::Halt(lp.label);
    let bc = Edge::Halt(HaltLabel::BcTarget);

    let mut taken = HashSet::new();
    let mut fresh = |suffix: &str| {
        let id = g.fresh_id(&format!("{}{suffix}", lp.node), &taken);
        taken.insert(id.clone());
        id
    };
    let node = |id: &str, party: Party, measure: MeasureSpec, edges: Vec<Edge>| ProtocolNode {
        id: id.to_string(),
        party,
        measure,
        edges,
    };
    // BC completion from a state with BC concurrence `c ≥ t` after A is
    // disentangled: a Nielsen round when `c` is strictly above `t`.
    let mut nodes = Vec::new();
    let to_bc = |c: f64, nodes: &mut Vec<ProtocolNode>, fresh: &mut dyn FnMut(&str) -> String| -> Result<Edge> {
        if c < t - 1e-9 {
            return Err(Error::Infeasible(format!("BC concurrence {c} is below the target {t}")));
        }
        if c > t + 1e-9 {
            let id = fresh("n");
            nodes.push(node(&id, Party::B, MeasureSpec::Nielsen(c.into(), t.into()), vec![bc.clone(), bc.clone()]));
            Ok(Edge::Continue(id))
        } else {
            Ok(bc.clone())
        }
    };

    let mut head = Vec::new();
    let next = fresh("x");
    head.push(node(&lp.node, acting, MeasureSpec::Wpp(lp.delta.into()), vec![epr.clone(), Edge::Continue(next.clone())]));
    let s1 = lp.s_prime;
    if let Some(gamma) = lp.gamma {
        let c = (2.0 * s1 * (1.0 - s1)).sqrt();
        let h = fresh("h");
        let done = to_bc(c, &mut nodes, &mut fresh)?;
        head.push(node(&next, acting, MeasureSpec::Wpp(gamma.into()), vec![epr.clone(), Edge::Continue(h.clone())]));
        head.push(node(&h, Party::A, MeasureSpec::Hadamard, vec![done.clone(), done]));
    } else {
        let a1 = lp.alpha_prime.expect("set when s′ ≥ ½");
        let sig = sigma(t).ok_or_else(|| Error::Domain(format!("t = {t} outside the finite domain")))?;
        let beta = 1.0 - (1.0 - a1) * sig;
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Shape(format!("re-parameterized weight β′ = {beta} is out of range")));
        }
        let t1 = 2.0 * (1.0 - a1).sqrt() / (2.0 - a1);
        let first = to_bc(t1, &mut nodes, &mut fresh)?;
        let qn = fresh("q");
        let h = fresh("h");
        let other_epr = if lp.label == HaltLabel::EprAB { HaltLabel::EprAC } else { HaltLabel::EprAB };
        head.push(node(&next, Party::A, MeasureSpec::Wpp(a1.into()), vec![first, Edge::Continue(qn.clone())]));
        head.push(node(&qn, partner, MeasureSpec::Wpp(beta.into()), vec![Edge::Halt(other_epr), Edge::Continue(h.clone())]));
        head.push(node(&h, Party::A, MeasureSpec::Hadamard, vec![bc.clone(), bc.clone()]));
    }
    head.extend(nodes);
    let lifted = g.with_replaced_node(&lp.node, head)?;

    let after = run_finite(&lifted, t)?;
    let (gain_before, gain_after) = (before.p_ab + before.p_ac, after.p_ab + after.p_ac);
    if gain_after < gain_before - 1e-12 {
        return Err(Error::Shape(format!(
            "lift decreased the EPR yield ({gain_before} → {gain_after})"
        )));
    }
    if after.residual.abs() > 1e-12 || after.p_fail > 1e-12 {
        return Err(Error::Shape("lifted protocol is not deterministic".into()));
    }
    Ok(lifted)
}
