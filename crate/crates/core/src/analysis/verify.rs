use std::collections::HashMap;
use std::fmt;

use crate::engine::{execute, Mode, OutcomeDistribution, Trace, Visit, SYMMETRY_TOL};
use crate::entanglement::concurrence_of_assistance;
use crate::error::Error;
use crate::linalg::Mat2;
use crate::measurement::{update_canonical, CanonicalOutcome};
use crate::protocol::{Edge, HaltLabel, ProtocolGraph, Rounds};
use crate::state::{canonicalize, embed, Party, WClassState};

const CHECK_TOL: f64 = 1e-9;
const MEASURE_TOL: f64 = 1e-10;
/// Passes used when a loop cannot be resummed exactly.
const FALLBACK_CYCLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotApplicable => "N/A",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Worst value seen (deviation or slack, depending on the check).
    pub measured: Option<f64>,
    pub detail: String,
}

/// Quantities at an EPR-producing round acting on `((1−s)/2, (1−s)/2, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EprRoundEnsemble {
    pub node: String,
    pub s: f64,
    pub q: f64,
    /// Outcome probabilities and canonical coordinates after the round.
    pub ensemble: Vec<(f64, WClassState<f64>)>,
    /// `√(2(1−s−q)s)`.
    pub lhs: f64,
    /// `(1−q)t`.
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub t: f64,
    pub rounds: Rounds,
    pub mode: Option<Mode>,
    pub checks: Vec<CheckResult>,
    pub epr_rounds: Vec<EprRoundEnsemble>,
    pub distribution: Option<OutcomeDistribution>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rounds: {}", self.rounds)?;
        for c in &self.checks {
            writeln!(f, "{:<4} {}: {}", c.status, c.name, c.detail)?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn result(name: &'static str, ok: bool, measured: Option<f64>, detail: String) -> CheckResult {
    let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
    CheckResult { name, status, measured, detail }
}

fn not_applicable(name: &'static str, detail: &str) -> CheckResult {
    CheckResult { name, status: CheckStatus::NotApplicable, measured: None, detail: detail.to_string() }
}

/// Runs `g` against target `t` and checks it. Failures are report entries,
/// never errors.
pub fn verify(g: &ProtocolGraph, t: f64) -> VerificationReport {
    let rounds = g.round_count();
    let loops = !g.loop_edges().is_empty();
    let attempt = |mode| execute(g, t, mode, false).map(|tr| (mode, tr));
    let run = if loops {
        match attempt(Mode::Resummed) {
            Err(Error::Shape(_)) => attempt(Mode::Truncated(FALLBACK_CYCLES)),
            other => other,
        }
    } else {
        attempt(Mode::Finite)
    };
    let (mode, trace) = match run {
        Ok(r) => r,
        Err(e) => {
            return VerificationReport {
                t,
                rounds,
                mode: None,
                checks: vec![result("execution", false, None, e.to_string())],
                epr_rounds: Vec::new(),
                distribution: None,
            }
        }
    };

    let mut checks = vec![result("execution", true, None, format!("{mode:?}"))];
    checks.push(completeness(&trace));
    checks.push(probability(&trace));
    checks.push(halts(&trace));
    checks.push(gour(g, &trace, t));
    let (eq8, ensembles) = epr_bound(g, &trace, t);
    checks.push(eq8);
    checks.push(invariance(&trace));
    checks.push(round_check(rounds, &trace));
    VerificationReport { t, rounds, mode: Some(mode), checks, epr_rounds: ensembles, distribution: Some(trace.distribution) }
}

fn completeness(tr: &Trace) -> CheckResult {
    let worst = tr.visits.iter().map(|v| v.measurement.completeness_deviation()).fold(0.0, f64::max);
    result("completeness", worst <= MEASURE_TOL, Some(worst), format!("max |ΣM†M − I| = {worst:.3e}"))
}

fn probability(tr: &Trace) -> CheckResult {
    let local = tr
        .visits
        .iter()
        .map(|v| (v.branches.iter().map(|b| b.probability).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let global = (tr.distribution.total() - 1.0).abs();
    let negative = [tr.distribution.p_ab, tr.distribution.p_ac, tr.distribution.p_bc, tr.distribution.residual]
        .iter()
        .any(|p| *p < -1e-12);
    result(
        "probability-sum",
        local <= MEASURE_TOL && global <= CHECK_TOL && !negative,
        Some(global.max(local)),
        format!("per node {local:.3e}, total {global:.3e}"),
    )
}

fn halts(tr: &Trace) -> CheckResult {
    let bad: Vec<_> = tr.distribution.halts.iter().filter(|h| !h.valid).collect();
    let detail = match bad.first() {
        None => format!("{} halts match their labels", tr.distribution.halts.len()),
        Some(h) => format!(
            "{} invalid halts; first at node {} ({}{})",
            bad.len(),
            h.node,
            h.label,
            h.concurrence.map(|c| format!(", concurrence {c}")).unwrap_or_default()
        ),
    };
    result("halt-validity", bad.is_empty(), Some(bad.len() as f64), detail)
}

/// Static subtree summary: which halt kinds and loops lie below each node.
#[derive(Default, Clone, Copy)]
struct Below {
    epr: bool,
    bc: bool,
    fail: bool,
    looped: bool,
}

fn below(g: &ProtocolGraph, id: &str, memo: &mut HashMap<String, Below>) -> Below {
    if let Some(b) = memo.get(id) {
        return *b;
    }
    let mut b = Below::default();
    if let Some(n) = g.node(id) {
        for e in &n.edges {
            match e {
                Edge::Halt(l) if l.is_epr() => b.epr = true,
                Edge::Halt(HaltLabel::BcTarget) => b.bc = true,
                Edge::Halt(_) => b.fail = true,
                Edge::Loop(_) => b.looped = true,
                Edge::Continue(t) => {
                    let c = below(g, t, memo);
                    b.epr |= c.epr;
                    b.bc |= c.bc;
                    b.fail |= c.fail;
                    b.looped |= c.looped;
                }
            }
        }
    }
    memo.insert(id.to_string(), b);
    b
}

/// Wherever every branch below a node ends in a BC halt, the assisted
/// concurrence at that node must already reach `t`.
fn gour(g: &ProtocolGraph, tr: &Trace, t: f64) -> CheckResult {
    let mut memo = HashMap::new();
    let mut slack = f64::INFINITY;
    let mut count = 0;
    for v in &tr.visits {
        let b = below(g, &v.node, &mut memo);
        if b.bc && !b.epr && !b.fail && !b.looped {
            count += 1;
            slack = slack.min(concurrence_of_assistance(&v.state, Party::A) - t);
        }
    }
    if count == 0 {
        return not_applicable("gour", "no node leads deterministically to BC halts");
    }
    result("gour", slack >= -CHECK_TOL, Some(slack), format!("min C_a^(A) − t = {slack:.3e} over {count} visits"))
}

fn epr_bound(g: &ProtocolGraph, tr: &Trace, t: f64) -> (CheckResult, Vec<EprRoundEnsemble>) {
    let mut memo = HashMap::new();
    let mut out = Vec::new();
    let mut skipped = 0;
    for v in &tr.visits {
        let node = g.node(&v.node).expect("visited node exists");
        let Some(label) = node.edges.iter().find_map(|e| match e {
            Edge::Halt(l) if l.is_epr() => Some(*l),
            _ => None,
        }) else {
            continue;
        };
        let last = node.edges.iter().all(|e| match e {
            Edge::Continue(n) => {
                let b = below(g, n, &mut memo);
                !b.epr && !b.looped
            }
            Edge::Loop(_) => false,
            Edge::Halt(_) => true,
        });
        if !last {
            continue;
        }
        match symmetric_input(v, label) {
            Some(s) => {
                let q: f64 = v
                    .branches
                    .iter()
                    .filter(|b| node.edges[b.outcome] == Edge::Halt(label))
                    .map(|b| b.probability)
                    .sum();
                let ensemble = canonical_outcomes(v).unwrap_or_default();
                let lhs = (2.0 * (1.0 - s - q).max(0.0) * s).sqrt();
                let rhs = (1.0 - q) * t;
                out.push(EprRoundEnsemble { node: v.node.clone(), s, q, ensemble, lhs, rhs });
            }
            None => skipped += 1,
        }
    }
    if out.is_empty() {
        let why = if skipped > 0 { "EPR rounds act on asymmetric states" } else { "no final EPR-producing round" };
        return (not_applicable("epr-bound", why), out);
    }
    let slack = out.iter().map(|e| e.lhs - e.rhs).fold(f64::INFINITY, f64::min);
    let check = result(
        "epr-bound",
        slack >= -CHECK_TOL,
        Some(slack),
        format!("min √(2(1−s−q)s) − (1−q)t = {slack:.3e} over {} rounds", out.len()),
    );
    (check, out)
}

/// `s` when the visit's input is `((1−s)/2, (1−s)/2, s)` in canonical layout,
/// with `s` on the acting party outside the EPR pair.
fn symmetric_input(v: &Visit, label: HaltLabel) -> Option<f64> {
    let acting = v.measurement.party();
    let excluded = if label == HaltLabel::EprAB { Party::C } else { Party::B };
    if acting != excluded {
        return None;
    }
    let cf = canonicalize(&v.state).ok()?;
    let x = cf.state;
    let partner = Party::A.third(acting);
    let aligned = embed(&x).max_diff_up_to_phase(&v.state) <= SYMMETRY_TOL;
    let sym = x.x0() <= SYMMETRY_TOL && (x.coord(Party::A) - x.coord(partner)).abs() <= SYMMETRY_TOL;
    (aligned && sym).then(|| x.coord(acting))
}

/// Canonical input and per-outcome canonical coordinates of a visit, with the
/// measurement moved into the input's canonical frame.
fn canonical_frame(v: &Visit) -> Option<(WClassState<f64>, Vec<CanonicalOutcome<f64>>)> {
    let cf = canonicalize(&v.state).ok()?;
    let k = v.measurement.party();
    let u = *cf.unitaries[k.coordinate() - 1].matrix();
    let ops: Vec<Mat2<f64>> = v.measurement.ops().iter().map(|m| u * *m.matrix() * u.adjoint()).collect();
    let outs = update_canonical(&cf.state, k, &ops).ok()?;
    Some((cf.state, outs))
}

fn canonical_outcomes(v: &Visit) -> Option<Vec<(f64, WClassState<f64>)>> {
    canonical_frame(v).map(|(_, outs)| outs.into_iter().flatten().collect())
}

/// Outcome-averaged canonical coordinates of the non-acting parties are
/// unchanged, and so is `x0 + x_k` for the acting party `k`.
fn invariance(tr: &Trace) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for v in &tr.visits {
        let Some((s, outs)) = canonical_frame(v) else { continue };
        let k = v.measurement.party();
        let mut avg = [0.0; 4];
        for (p, x) in outs.iter().flatten() {
            avg[0] += p * (x.x0() + x.coord(k));
            for q in Party::ALL {
                if q != k {
                    avg[q.coordinate()] += p * x.coord(q);
                }
            }
        }
        worst = worst.max((avg[0] - (s.x0() + s.coord(k))).abs());
        for q in Party::ALL {
            if q != k {
                worst = worst.max((avg[q.coordinate()] - s.coord(q)).abs());
            }
        }
        checked += 1;
    }
    if checked == 0 {
        return not_applicable("average-invariance", "no visit had a W-class input");
    }
    result(
        "average-invariance",
        worst <= CHECK_TOL,
        Some(worst),
        format!("max deviation {worst:.3e} over {checked} visits"),
    )
}

fn round_check(rounds: Rounds, tr: &Trace) -> CheckResult {
    match rounds {
        Rounds::Unbounded => CheckResult {
            name: "round-count",
            status: CheckStatus::Pass,
            measured: None,
            detail: "unbounded (loop edge present)".into(),
        },
        Rounds::Finite(n) => {
            let seen = tr.distribution.max_rounds;
            result("round-count", seen == n, Some(seen as f64), format!("{n} rounds, deepest executed branch {seen}"))
        }
    }
}
