//! Protocol graphs: measurement nodes joined by outcome edges, plus the
//! line-oriented text format used to store them.
//!
//! Every node is one round (one party measures and broadcasts). Corrections
//! attached to a measurement are local unitaries and cost nothing. A `loop`
//! edge sends the branch back to an ancestor node, which is how protocols with
//! an unbounded number of rounds are written down.

mod parse;
mod serialize;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::measurement::COMPLETENESS_TOL;
use crate::state::{Party, WClassState};

pub use parse::parse;
pub use serialize::serialize;

/// A positioned message; renders as `line:col: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self { line, col, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HaltLabel {
    /// Maximally entangled A–B pair.
    EprAB,
    /// Maximally entangled A–C pair.
    EprAC,
    /// B–C pair with concurrence at least the target `t`.
    BcTarget,
    /// Discarded branch (probabilistic protocols only).
    Fail,
}

impl HaltLabel {
    pub fn token(self) -> &'static str {
        match self {
            HaltLabel::EprAB => "AB",
            HaltLabel::EprAC => "AC",
            HaltLabel::BcTarget => "BC",
            HaltLabel::Fail => "FAIL",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "AB" => Some(HaltLabel::EprAB),
            "AC" => Some(HaltLabel::EprAC),
            "BC" => Some(HaltLabel::BcTarget),
            "FAIL" => Some(HaltLabel::Fail),
            _ => None,
        }
    }

    pub fn is_epr(self) -> bool {
        matches!(self, HaltLabel::EprAB | HaltLabel::EprAC)
    }
}

impl fmt::Display for HaltLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edge {
    Continue(String),
    Halt(HaltLabel),
    Loop(String),
}

/// A number inside a measurement: a literal or a reference to a `param`.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Lit(f64),
    Param(String),
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Lit(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Param(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// `{diag(√x,0), diag(√(1−x),1)}`.
    Wpp(Scalar),
    /// Computational-basis projective measurement.
    ProjZ,
    /// `|±⟩` projective measurement with `Z` corrections on the `−` outcome.
    Hadamard,
    /// Deterministic conversion of the acting party's pair from concurrence
    /// `src` to `tgt`, resolved against the state at execution time.
    Nielsen(Scalar, Scalar),
    /// Explicit Kraus operators.
    Kraus(Vec<Mat2<f64>>),
}

impl MeasureSpec {
    pub fn outcome_count(&self) -> usize {
        match self {
            MeasureSpec::Kraus(ops) => ops.len(),
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolNode {
    pub id: String,
    pub party: Party,
    pub measure: MeasureSpec,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounds {
    Finite(usize),
    Unbounded,
}

impl fmt::Display for Rounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rounds::Finite(n) => write!(f, "{n}"),
            Rounds::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// A validated protocol. Structural equality ignores source positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolGraph {
    name: String,
    params: BTreeMap<String, f64>,
    initial: WClassState<f64>,
    entry: String,
    nodes: BTreeMap<String, ProtocolNode>,
}

impl ProtocolGraph {
    pub fn builder(name: impl Into<String>, initial: WClassState<f64>) -> GraphBuilder {
        GraphBuilder {
            name: name.into(),
            params: BTreeMap::new(),
            initial,
            order: Vec::new(),
            nodes: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn initial(&self) -> &WClassState<f64> {
        &self.initial
    }

    pub fn entry(&self) -> &str {
        &self.entry
    }

    pub fn node(&self, id: &str) -> Option<&ProtocolNode> {
        self.nodes.get(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &ProtocolNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn resolve(&self, s: &Scalar) -> Result<f64> {
        match s {
            Scalar::Lit(v) => Ok(*v),
            Scalar::Param(p) => self
                .param(p)
                .ok_or_else(|| Error::Domain(format!("unknown parameter '{p}'"))),
        }
    }

    /// `(node, outcome index, target)` for every loop edge.
    pub fn loop_edges(&self) -> Vec<(String, usize, String)> {
        self.nodes
            .values()
            .flat_map(|n| {
                n.edges.iter().enumerate().filter_map(move |(k, e)| match e {
                    Edge::Loop(t) => Some((n.id.clone(), k, t.clone())),
                    _ => None,
                })
            })
            .collect()
    }

    pub fn has_halt(&self, label: HaltLabel) -> bool {
        self.nodes.values().any(|n| n.edges.contains(&Edge::Halt(label)))
    }

    /// Largest number of measurement nodes on any path from the entry to a
    /// halt; unbounded as soon as a loop edge exists.
    pub fn round_count(&self) -> Rounds {
        if !self.loop_edges().is_empty() {
            return Rounds::Unbounded;
        }
        let mut memo = HashMap::new();
        Rounds::Finite(self.depth_from(&self.entry, &mut memo))
    }

    fn depth_from(&self, id: &str, memo: &mut HashMap<String, usize>) -> usize {
        if let Some(d) = memo.get(id) {
            return *d;
        }
        let node = &self.nodes[id];
        let below = node
            .edges
            .iter()
            .map(|e| match e {
                Edge::Continue(t) => self.depth_from(t, memo),
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        memo.insert(id.to_string(), below + 1);
        below + 1
    }

    /// Replaces the subtree rooted at `id` with `replacement` nodes (the first
    /// of which takes over `id`), then drops unreachable nodes and revalidates.
    pub fn with_replaced_node(&self, id: &str, replacement: Vec<ProtocolNode>) -> Result<ProtocolGraph> {
        let mut g = self.clone();
        if !g.nodes.contains_key(id) {
            return Err(Error::Domain(format!("unknown node '{id}'")));
        }
        for n in replacement {
            if n.id != id && g.nodes.contains_key(&n.id) {
                return Err(Error::Domain(format!("node id '{}' already in use", n.id)));
            }
            g.nodes.insert(n.id.clone(), n);
        }
        g.prune_unreachable();
        let diags = validate_graph(&g, None);
        if diags.is_empty() {
            Ok(g)
        } else {
            Err(Error::Parse(diags))
        }
    }

    fn prune_unreachable(&mut self) {
        let reach = reachable(&self.nodes, &self.entry);
        self.nodes.retain(|k, _| reach.contains(k));
    }

    /// An id not yet used, built from `base`.
    pub fn fresh_id(&self, base: &str, taken: &HashSet<String>) -> String {
        if !self.nodes.contains_key(base) && !taken.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|c| !self.nodes.contains_key(c) && !taken.contains(c))
            .expect("unbounded id space")
    }
}

/// Incremental construction; the first node added is the entry.
pub struct GraphBuilder {
    name: String,
    params: BTreeMap<String, f64>,
    initial: WClassState<f64>,
    order: Vec<String>,
    nodes: Vec<ProtocolNode>,
}

impl GraphBuilder {
    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn node(mut self, id: &str, party: Party, measure: MeasureSpec, edges: Vec<Edge>) -> Self {
        self.order.push(id.to_string());
        self.nodes.push(ProtocolNode { id: id.to_string(), party, measure, edges });
        self
    }

    pub fn build(self) -> Result<ProtocolGraph> {
        let mut diags = Vec::new();
        let mut nodes = BTreeMap::new();
        for n in self.nodes {
            if nodes.contains_key(&n.id) {
                diags.push(Diagnostic::new(0, 0, format!("duplicate node id '{}'", n.id)));
            }
            nodes.insert(n.id.clone(), n);
        }
        let Some(entry) = self.order.first().cloned() else {
            return Err(Error::Parse(vec![Diagnostic::new(0, 0, "missing entry node")]));
        };
        let g = ProtocolGraph { name: self.name, params: self.params, initial: self.initial, entry, nodes };
        diags.extend(validate_graph(&g, None));
        if diags.is_empty() {
            Ok(g)
        } else {
            Err(Error::Parse(diags))
        }
    }
}

/// Source positions gathered by the parser.
#[derive(Debug, Default, Clone)]
pub(crate) struct SourceMap {
    /// Node id → (line, column of `node`).
    pub nodes: HashMap<String, (usize, usize)>,
    /// (node id, outcome index) → column of the edge token.
    pub edges: HashMap<(String, usize), usize>,
    /// Node id → column of the `measure=` value.
    pub measures: HashMap<String, usize>,
    /// Node id → column of the `outcomes=` value.
    pub outcomes: HashMap<String, usize>,
}

impl SourceMap {
    fn node_pos(&self, id: &str) -> (usize, usize) {
        self.nodes.get(id).copied().unwrap_or((0, 0))
    }

    fn edge_pos(&self, id: &str, k: usize) -> (usize, usize) {
        let (line, col) = self.node_pos(id);
        (line, self.edges.get(&(id.to_string(), k)).copied().unwrap_or(col))
    }

    fn measure_pos(&self, id: &str) -> (usize, usize) {
        let (line, col) = self.node_pos(id);
        (line, self.measures.get(id).copied().unwrap_or(col))
    }

    fn outcomes_pos(&self, id: &str) -> (usize, usize) {
        let (line, col) = self.node_pos(id);
        (line, self.outcomes.get(id).copied().unwrap_or(col))
    }
}

fn reachable(nodes: &BTreeMap<String, ProtocolNode>, entry: &str) -> HashSet<String> {
    let mut seen = HashSet::new();
    let mut stack = vec![entry.to_string()];
    while let Some(id) = stack.pop() {
        if !seen.insert(id.clone()) {
            continue;
        }
        if let Some(n) = nodes.get(&id) {
            for e in &n.edges {
                if let Edge::Continue(t) = e {
                    if nodes.contains_key(t) {
                        stack.push(t.clone());
                    }
                }
            }
        }
    }
    seen
}

/// Structural checks shared by the parser and the programmatic builder.
pub(crate) fn validate_graph(g: &ProtocolGraph, src: Option<&SourceMap>) -> Vec<Diagnostic> {
    let empty = SourceMap::default();
    let src = src.unwrap_or(&empty);
    let mut diags = Vec::new();
    let diag = |pos: (usize, usize), msg: String| Diagnostic::new(pos.0, pos.1, msg);

    if !g.nodes.contains_key(&g.entry) {
        diags.push(Diagnostic::new(0, 0, "missing entry node"));
        return diags;
    }

    for n in g.nodes.values() {
        let mpos = src.measure_pos(&n.id);
        let outcomes = n.measure.outcome_count();
        if n.edges.len() != outcomes {
            diags.push(diag(
                src.outcomes_pos(&n.id),
                format!(
                    "node {} has {} outcome edges but its measurement has {} outcomes",
                    n.id,
                    n.edges.len(),
                    outcomes
                ),
            ));
        }
        check_measure(g, n, mpos, &mut diags);
        for (k, e) in n.edges.iter().enumerate() {
            match e {
                Edge::Continue(t) | Edge::Loop(t) if !g.nodes.contains_key(t) => {
                    diags.push(diag(src.edge_pos(&n.id, k), format!("unknown node {t}")));
                }
                _ => {}
            }
        }
    }
    if !diags.is_empty() {
        return diags;
    }

    let reach = reachable(&g.nodes, &g.entry);
    for id in g.nodes.keys() {
        if !reach.contains(id) {
            diags.push(diag(src.node_pos(id), format!("node {id} is unreachable from the entry node")));
        }
    }

    // Every path from the entry: continue edges must not cycle, and loop
    // targets must sit on the current path.
    let mut path: Vec<String> = Vec::new();
    let mut reported = HashSet::new();
    walk_paths(g, &g.entry, &mut path, src, &mut diags, &mut reported);
    diags
}

fn walk_paths(
    g: &ProtocolGraph,
    id: &str,
    path: &mut Vec<String>,
    src: &SourceMap,
    diags: &mut Vec<Diagnostic>,
    reported: &mut HashSet<(String, usize)>,
) {
    path.push(id.to_string());
    let node = &g.nodes[id];
    for (k, e) in node.edges.iter().enumerate() {
        match e {
            Edge::Continue(t) => {
                if path.contains(t) {
                    if reported.insert((id.to_string(), k)) {
                        let (l, c) = src.edge_pos(id, k);
                        diags.push(Diagnostic::new(
                            l,
                            c,
                            format!("continue edge from {id} to {t} closes a cycle; use loop:{t}"),
                        ));
                    }
                } else {
                    walk_paths(g, t, path, src, diags, reported);
                }
            }
            Edge::Loop(t) => {
                if !path.contains(t) && reported.insert((id.to_string(), k)) {
                    let (l, c) = src.edge_pos(id, k);
                    diags.push(Diagnostic::new(
                        l,
                        c,
                        format!("loop target {t} is not an ancestor of node {id}"),
                    ));
                }
            }
            Edge::Halt(_) => {}
        }
    }
    path.pop();
}

fn check_measure(g: &ProtocolGraph, n: &ProtocolNode, pos: (usize, usize), diags: &mut Vec<Diagnostic>) {
    let mut scalar = |s: &Scalar, what: &str| -> Option<f64> {
        let v = match s {
            Scalar::Lit(v) => Some(*v),
            Scalar::Param(p) => {
                let v = g.param(p);
                if v.is_none() {
                    diags.push(Diagnostic::new(pos.0, pos.1, format!("unknown parameter '{p}' in node {}", n.id)));
                }
                v
            }
        };
        match v {
            Some(v) if !(0.0..=1.0).contains(&v) => {
                diags.push(Diagnostic::new(
                    pos.0,
                    pos.1,
                    format!("{what} in node {} must lie in [0, 1], got {v}", n.id),
                ));
                None
            }
            other => other,
        }
    };
    match &n.measure {
        MeasureSpec::Wpp(x) => {
            scalar(x, "wpp weight");
        }
        MeasureSpec::Nielsen(a, b) => {
            let src_c = scalar(a, "source concurrence");
            let tgt_c = scalar(b, "target concurrence");
            if let (Some(s), Some(t)) = (src_c, tgt_c) {
                if s < t - 1e-12 {
                    diags.push(Diagnostic::new(
                        pos.0,
                        pos.1,
                        format!("nielsen in node {} would raise concurrence from {s} to {t}", n.id),
                    ));
                }
            }
        }
        MeasureSpec::Kraus(ops) => {
            if ops.is_empty() {
                diags.push(Diagnostic::new(pos.0, pos.1, format!("node {} has no Kraus operators", n.id)));
            }
            let sum = ops.iter().fold(Mat2::zero(), |acc, m| acc + m.gram());
            let dev = sum.max_abs_diff(&Mat2::identity());
            if dev > COMPLETENESS_TOL {
                diags.push(Diagnostic::new(
                    pos.0,
                    pos.1,
                    format!("Kraus operators of node {} are incomplete (max |ΣM†M − I| = {dev:.3e})", n.id),
                ));
            }
        }
        MeasureSpec::ProjZ | MeasureSpec::Hadamard => {}
    }
}
