//! Branch enumeration over protocol graphs.

use crate::entanglement::{pair_concurrence, PairLabel};
use crate::error::{Error, Result};
use crate::measurement::{
    apply, hadamard_measurement, nielsen_for_state, projective_z, weighted_pair, KrausOp, LocalMeasurement,
    OutcomeBranch,
};
use crate::protocol::{Edge, HaltLabel, MeasureSpec, ProtocolGraph, ProtocolNode};
use crate::state::{canonicalize, embed, PureState3Q};

/// Tolerance on the source concurrence declared by a `nielsen` node.
pub const NIELSEN_SOURCE_TOL: f64 = 1e-9;
/// Tolerance on halt-state assertions.
pub const HALT_TOL: f64 = 1e-9;
/// Tolerance on the re-entry state of a resummed loop.
pub const REENTRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HaltRecord {
    pub label: HaltLabel,
    pub probability: f64,
    /// BC concurrence for `BC` halts.
    pub concurrence: Option<f64>,
    pub node: String,
    /// Rounds taken to reach the halt (cumulative over loop passes).
    pub depth: usize,
    /// Whether the halt state matched its label.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub p_ab: f64,
    pub p_ac: f64,
    pub p_bc: f64,
    pub p_fail: f64,
    /// Unhalted mass (truncated runs only).
    pub residual: f64,
    pub halts: Vec<HaltRecord>,
    /// `Σ p·depth` over halts; `None` for resummed runs.
    pub expected_rounds: Option<f64>,
    /// Deepest halt observed.
    pub max_rounds: usize,
    /// Deepest halt observed, not counting measurements that act trivially.
    pub effective_max_rounds: usize,
}

impl OutcomeDistribution {
    fn from_halts(halts: Vec<HaltRecord>, residual: f64, expected: Option<f64>, max_eff: usize) -> Self {
        let sum = |l: HaltLabel| halts.iter().filter(|h| h.label == l).map(|h| h.probability).sum::<f64>();
        OutcomeDistribution {
            p_ab: sum(HaltLabel::EprAB),
            p_ac: sum(HaltLabel::EprAC),
            p_bc: sum(HaltLabel::BcTarget),
            p_fail: sum(HaltLabel::Fail),
            residual,
            max_rounds: halts.iter().map(|h| h.depth).max().unwrap_or(0),
            effective_max_rounds: max_eff,
            expected_rounds: expected,
            halts,
        }
    }

    /// Mass ending in a labelled pair (everything except `FAIL` and residual).
    pub fn success(&self) -> f64 {
        self.p_ab + self.p_ac + self.p_bc
    }

    pub fn total(&self) -> f64 {
        self.success() + self.p_fail + self.residual
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Finite,
    Truncated(usize),
    Resummed,
}

/// One execution of a node on one branch.
#[derive(Debug, Clone)]
pub struct Visit {
    pub node: String,
    /// Round index of this node on its path (1-based).
    pub depth: usize,
    /// Probability of reaching this node.
    pub mass: f64,
    pub state: PureState3Q<f64>,
    pub measurement: LocalMeasurement<f64>,
    pub branches: Vec<OutcomeBranch<f64>>,
}

/// Distribution plus every node visit, in execution order.
#[derive(Debug, Clone)]
pub struct Trace {
    pub distribution: OutcomeDistribution,
    pub visits: Vec<Visit>,
}

/// Exhaustive execution of a loop-free graph.
pub fn run_finite(g: &ProtocolGraph, t: f64) -> Result<OutcomeDistribution> {
    Ok(execute(g, t, Mode::Finite, true)?.distribution)
}

/// `n_cycles` passes through a single-loop graph; mass still looping is
/// reported as residual.
pub fn run_truncated(g: &ProtocolGraph, t: f64, n_cycles: usize) -> Result<OutcomeDistribution> {
    Ok(execute(g, t, Mode::Truncated(n_cycles), true)?.distribution)
}

/// Exact geometric resummation of a single loop that restarts from the same
/// state.
pub fn run_resummed(g: &ProtocolGraph, t: f64) -> Result<OutcomeDistribution> {
    Ok(execute(g, t, Mode::Resummed, true)?.distribution)
}

pub fn run(g: &ProtocolGraph, t: f64, mode: Mode) -> Result<OutcomeDistribution> {
    Ok(execute(g, t, mode, true)?.distribution)
}

/// Executes `g`. With `strict` a halt whose state does not match its label is
/// an error; otherwise it is recorded with `valid = false`.
pub fn execute(g: &ProtocolGraph, t: f64, mode: Mode, strict: bool) -> Result<Trace> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("target concurrence must lie in [0, 1], got {t}")));
    }
    let loops = g.loop_edges();
    let psi0 = embed(g.initial());
    match mode {
        Mode::Finite => {
            if !loops.is_empty() {
                return Err(Error::Shape("finite execution requires a graph without loop edges".into()));
            }
            let mut w = Walker::new(g, t, strict, None);
            w.node(g.entry(), &psi0, 1.0, 0, 0)?;
            Ok(w.finish(0.0, true))
        }
        Mode::Truncated(n) => {
            single_loop(&loops)?;
            let mut w = Walker::new(g, t, strict, None);
            let mut pending = vec![Arrival { node: g.entry().to_string(), mass: 1.0, state: psi0, depth: 0, eff: 0 }];
            for _ in 0..n {
                for a in std::mem::take(&mut pending) {
                    w.node(&a.node, &a.state, a.mass, a.depth, a.eff)?;
                }
                pending = std::mem::take(&mut w.pending);
            }
            let residual = pending.iter().map(|a| a.mass).sum();
            Ok(w.finish(residual, true))
        }
        Mode::Resummed => {
            let target = single_loop(&loops)?;
            resummed(g, t, strict, &target, psi0)
        }
    }
}

fn single_loop(loops: &[(String, usize, String)]) -> Result<String> {
    match loops {
        [(_, _, target)] => Ok(target.clone()),
        [] => Err(Error::Shape("graph has no loop edge".into())),
        _ => Err(Error::Shape(format!("graph has {} loop edges; only a single loop is supported", loops.len()))),
    }
}

fn resummed(g: &ProtocolGraph, t: f64, strict: bool, target: &str, psi0: PureState3Q<f64>) -> Result<Trace> {
    let mut pre = Walker::new(g, t, strict, Some(target));
    let arrivals = if target == g.entry() {
        vec![Arrival { node: target.to_string(), mass: 1.0, state: psi0, depth: 0, eff: 0 }]
    } else {
        pre.node(g.entry(), &psi0, 1.0, 0, 0)?;
        std::mem::take(&mut pre.pending)
    };
    let mut halts = std::mem::take(&mut pre.halts);
    let mut visits = std::mem::take(&mut pre.visits);
    let mut max_eff = pre.max_eff;
    for a in arrivals {
        let mut body = Walker::new(g, t, strict, None);
        body.node(target, &a.state, 1.0, a.depth, a.eff)?;
        let q: f64 = body.pending.iter().map(|r| r.mass).sum();
        for r in &body.pending {
            let d = r.state.max_diff_up_to_phase(&a.state);
            if d > REENTRY_TOL {
                return Err(Error::Shape(format!(
                    "loop re-enters {target} in a different state (max amplitude difference {d:.3e})"
                )));
            }
        }
        if q >= 1.0 - 1e-12 {
            return Err(Error::Shape(format!("loop at {target} never halts (loop mass {q})")));
        }
        let factor = a.mass / (1.0 - q);
        halts.extend(body.halts.into_iter().map(|mut h| {
            h.probability *= factor;
            h
        }));
        visits.extend(body.visits.into_iter().map(|mut v| {
            v.mass *= a.mass;
            v
        }));
        max_eff = max_eff.max(body.max_eff);
    }
    let distribution = OutcomeDistribution::from_halts(halts, 0.0, None, max_eff);
    Ok(Trace { distribution, visits })
}

struct Arrival {
    node: String,
    mass: f64,
    state: PureState3Q<f64>,
    depth: usize,
    eff: usize,
}

struct Walker<'g> {
    g: &'g ProtocolGraph,
    t: f64,
    strict: bool,
    stop: Option<&'g str>,
    halts: Vec<HaltRecord>,
    pending: Vec<Arrival>,
    visits: Vec<Visit>,
    max_eff: usize,
}

impl<'g> Walker<'g> {
    fn new(g: &'g ProtocolGraph, t: f64, strict: bool, stop: Option<&'g str>) -> Self {
        Walker { g, t, strict, stop, halts: Vec::new(), pending: Vec::new(), visits: Vec::new(), max_eff: 0 }
    }

    fn finish(self, residual: f64, with_expected: bool) -> Trace {
        let expected = with_expected.then(|| self.halts.iter().map(|h| h.probability * h.depth as f64).sum());
        Trace {
            distribution: OutcomeDistribution::from_halts(self.halts, residual, expected, self.max_eff),
            visits: self.visits,
        }
    }

    fn node(&mut self, id: &str, psi: &PureState3Q<f64>, mass: f64, depth: usize, eff: usize) -> Result<()> {
        let node = self.g.node(id).ok_or_else(|| Error::Execution {
            node: id.to_string(),
            reason: "node does not exist".into(),
        })?;
        let m = resolve_measurement(self.g, node, psi)?;
        let branches = apply(psi, &m).map_err(|e| Error::Execution { node: id.to_string(), reason: e.to_string() })?;
        let d = depth + 1;
        let e = eff + usize::from(acts_nontrivially(&m));
        self.visits.push(Visit {
            node: id.to_string(),
            depth: d,
            mass,
            state: *psi,
            measurement: m,
            branches: branches.clone(),
        });
        for b in branches {
            let p = mass * b.probability;
            match &node.edges[b.outcome] {
                Edge::Halt(label) => {
                    let (valid, concurrence, reason) = check_halt(*label, &b.state, self.t);
                    if !valid && self.strict {
                        return Err(Error::HaltAssertion { node: id.to_string(), reason });
                    }
                    self.max_eff = self.max_eff.max(e);
                    self.halts.push(HaltRecord {
                        label: *label,
                        probability: p,
                        concurrence,
                        node: id.to_string(),
                        depth: d,
                        valid,
                    });
                }
                Edge::Continue(next) if Some(next.as_str()) == self.stop => {
                    self.pending.push(Arrival { node: next.clone(), mass: p, state: b.state, depth: d, eff: e });
                }
                Edge::Continue(next) => self.node(next, &b.state, p, d, e)?,
                Edge::Loop(target) => {
                    self.pending.push(Arrival { node: target.clone(), mass: p, state: b.state, depth: d, eff: e });
                }
            }
        }
        Ok(())
    }
}

/// A measurement with a single operator of non-negligible size does nothing
/// and does not use up a round in practice.
fn acts_nontrivially(m: &LocalMeasurement<f64>) -> bool {
    m.ops().iter().filter(|k| k.matrix().spectral_norm() > 1e-12).count() > 1
}

/// Turns a node's measurement description into Kraus operators for the state `psi`.
pub fn resolve_measurement(
    g: &ProtocolGraph,
    node: &ProtocolNode,
    psi: &PureState3Q<f64>,
) -> Result<LocalMeasurement<f64>> {
    let fail = |reason: String| Error::Execution { node: node.id.clone(), reason };
    let party = node.party;
    match &node.measure {
        MeasureSpec::Wpp(x) => weighted_pair(party, g.resolve(x)?),
        MeasureSpec::ProjZ => Ok(projective_z(party)),
        MeasureSpec::Hadamard => Ok(hadamard_measurement(party)),
        MeasureSpec::Nielsen(src, tgt) => {
            let (src, tgt) = (g.resolve(src)?, g.resolve(tgt)?);
            let (m, actual) = nielsen_for_state(psi, party, tgt).map_err(|e| fail(e.to_string()))?;
            if (actual - src).abs() > NIELSEN_SOURCE_TOL {
                return Err(fail(format!("nielsen expects source concurrence {src}, state has {actual}")));
            }
            Ok(m)
        }
        MeasureSpec::Kraus(ops) => {
            let ops = ops.iter().map(|m| KrausOp::new(*m)).collect::<Result<Vec<_>>>()?;
            LocalMeasurement::new(party, ops)
        }
    }
}

/// `(valid, BC concurrence, failure reason)` for a halt state.
pub fn check_halt(label: HaltLabel, psi: &PureState3Q<f64>, t: f64) -> (bool, Option<f64>, String) {
    match label {
        HaltLabel::EprAB | HaltLabel::EprAC => {
            let expect = if label == HaltLabel::EprAB { [0.5, 0.5, 0.0] } else { [0.5, 0.0, 0.5] };
            match canonicalize(psi) {
                Ok(cf) => {
                    let x = cf.state.coords();
                    let dev = x
                        .iter()
                        .zip(expect)
                        .map(|(a, b)| (a - b).abs())
                        .fold(cf.state.x0(), f64::max);
                    let ok = dev <= HALT_TOL;
                    (ok, None, format!("{label} halt has canonical coordinates {} (deviation {dev:.3e})", cf.state))
                }
                Err(e) => (false, None, format!("{label} halt state: {e}")),
            }
        }
        HaltLabel::BcTarget => match pair_concurrence(psi, PairLabel::BC) {
            Ok(c) => (c >= t - HALT_TOL, Some(c), format!("BC halt has concurrence {c}, below target {t}")),
            Err(e) => (false, None, format!("BC halt state: {e}")),
        },
        HaltLabel::Fail => (true, None, String::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::builders::{build_projective_c, build_simple3, build_thm1, build_thm2};
    use crate::protocol::{Rounds, Scalar};
    use crate::state::{Party, WClassState};

    const ALPHA: f64 = 8.0 / 9.0;

    #[test]
    fn four_round_distribution() {
        let d = run_finite(&build_thm1(0.6).unwrap(), 0.6).unwrap();
        assert!((d.p_ab - 16.0 / 27.0).abs() < 1e-12);
        assert!((d.p_bc - 0.346698).abs() < 1e-6);
        assert!((d.p_ac - 0.0607093).abs() < 1e-7);
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert_eq!(d.residual, 0.0);
        assert_eq!(d.max_rounds, 4);
        for h in d.halts.iter().filter(|h| h.label == HaltLabel::BcTarget) {
            assert!((h.concurrence.unwrap() - 0.6).abs() < 1e-9);
        }
    }

    #[test]
    fn three_round_distribution() {
        let d = run_finite(&build_simple3(0.5).unwrap(), 0.5).unwrap();
        assert!((d.p_ab - 1.0 / 3.0).abs() < 1e-12);
        assert!((d.p_bc - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(d.p_ac, 0.0);
        assert_eq!(d.effective_max_rounds, 3);
    }

    #[test]
    fn three_round_boundary_skips_conversion() {
        let t = std::f64::consts::FRAC_1_SQRT_2;
        let g = build_simple3(t).unwrap();
        assert_eq!(g.round_count(), Rounds::Finite(3));
        let d = run_finite(&g, t).unwrap();
        assert_eq!(d.max_rounds, 3);
        assert_eq!(d.effective_max_rounds, 2);
    }

    #[test]
    fn projective_charlie() {
        let d = run_finite(&build_projective_c().unwrap(), 0.5).unwrap();
        assert!((d.p_ab - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn repeating_protocol_truncated() {
        let g = build_thm2(0.6).unwrap();
        let d = run_truncated(&g, 0.6, 1).unwrap();
        assert!((d.p_ab - 16.0 / 27.0).abs() < 1e-12);
        assert!((d.p_bc - 80.0 / 243.0).abs() < 1e-12);
        assert!((d.p_ac - 2.0 / 3.0 * ALPHA * (1.0 - ALPHA)).abs() < 1e-12);
        assert!((d.residual - 1.0 / 81.0).abs() < 1e-12);
        let d3 = run_truncated(&g, 0.6, 3).unwrap();
        assert!((d3.residual - (1.0f64 / 9.0).powi(6)).abs() < 1e-12);
        let d0 = run_truncated(&g, 0.6, 0).unwrap();
        assert_eq!((d0.residual, d0.success()), (1.0, 0.0));
    }

    #[test]
    fn repeating_protocol_resummed() {
        let d = run_resummed(&build_thm2(0.6).unwrap(), 0.6).unwrap();
        assert!((d.p_ab - 0.6).abs() < 1e-12);
        assert!((d.p_ac - 1.0 / 15.0).abs() < 1e-12);
        assert!((d.p_bc - 1.0 / 3.0).abs() < 1e-12);
        assert!(d.expected_rounds.is_none());
    }

    #[test]
    fn finite_rejects_loops() {
        assert!(matches!(run_finite(&build_thm2(0.6).unwrap(), 0.6), Err(Error::Shape(_))));
    }

    #[test]
    fn resummed_rejects_changed_restart() {
        let g = ProtocolGraph::builder("drift", WClassState::w())
            .node("r1", Party::C, MeasureSpec::Wpp(Scalar::Lit(0.5)), vec![Edge::Halt(HaltLabel::EprAB), Edge::Continue("r2".into())])
            .node("r2", Party::A, MeasureSpec::Wpp(Scalar::Lit(0.5)), vec![Edge::Halt(HaltLabel::BcTarget), Edge::Loop("r1".into())])
            .build()
            .unwrap();
        let err = run_resummed(&g, 0.1).unwrap_err();
        assert!(err.to_string().contains("different state"), "{err}");
    }

    #[test]
    fn halt_assertion_reports_node() {
        let err = run_finite(&build_thm1(0.6).unwrap(), 0.65).unwrap_err();
        assert!(matches!(err, Error::HaltAssertion { ref node, .. } if node == "r2"));
        let lenient = execute(&build_thm1(0.6).unwrap(), 0.65, Mode::Finite, false).unwrap();
        assert!(lenient.distribution.halts.iter().any(|h| !h.valid));
    }

    #[test]
    fn deterministic_output() {
        let g = build_thm1(0.37).unwrap();
        assert_eq!(run_finite(&g, 0.37).unwrap(), run_finite(&g, 0.37).unwrap());
    }
}
