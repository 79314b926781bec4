use std::collections::{BTreeMap, HashSet};

use num_complex::Complex;

use super::{
    validate_graph, Diagnostic, Edge, HaltLabel, MeasureSpec, ProtocolGraph, ProtocolNode, Scalar, SourceMap,
};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::state::{Party, WClassState};

/// Parses the text format. All problems found are reported together, each
/// with its line and column.
pub fn parse(text: &str) -> Result<ProtocolGraph> {
    let mut p = Parser::default();
    for (i, raw) in text.lines().enumerate() {
        p.line(i + 1, raw);
    }
    p.finish(text.lines().count())
}

#[derive(Default)]
struct Parser {
    diags: Vec<Diagnostic>,
    name: Option<String>,
    params: BTreeMap<String, f64>,
    state: Option<(WClassState<f64>, usize)>,
    entry: Option<String>,
    nodes: BTreeMap<String, ProtocolNode>,
    src: SourceMap,
}

/// Whitespace-separated words, keeping brackets together; columns are 1-based.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth <= 0 {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(i, w)| (line[..i].chars().count() + 1, w)).collect()
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_node_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn number(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("number '{s}' is not finite")),
        Err(_) => Err(format!("malformed number '{s}'")),
    }
}

fn complex(s: &str) -> std::result::Result<Complex<f64>, String> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(number(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let im = &body[k..];
            let im = if im.len() == 1 { format!("{im}1") } else { im.to_string() };
            Ok(Complex::new(number(&body[..k])?, number(&im)?))
        }
        None => {
            let im = match body {
                "" | "+" => "1",
                "-" => "-1",
                b => b,
            };
            Ok(Complex::new(0.0, number(im)?))
        }
    }
}

impl Parser {
    fn err(&mut self, line: usize, col: usize, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(line, col, msg));
    }

    fn line(&mut self, ln: usize, raw: &str) {
        let text = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let ws = words(text);
        let Some(&(col, head)) = ws.first() else { return };
        match head {
            "protocol" => self.protocol(ln, col, text, &ws),
            "param" => self.param(ln, &ws),
            "state" => self.state(ln, col, &ws),
            "node" => self.node(ln, col, &ws),
            other => self.err(ln, col, format!("unknown statement '{other}'")),
        }
    }

    fn protocol(&mut self, ln: usize, col: usize, text: &str, ws: &[(usize, &str)]) {
        if self.name.is_some() {
            self.err(ln, col, "duplicate protocol line");
            return;
        }
        if ws.len() < 2 {
            self.err(ln, col, "protocol line needs a name");
            return;
        }
        let start = text.find("protocol").unwrap_or(0) + "protocol".len();
        self.name = Some(text[start..].trim().to_string());
    }

    fn param(&mut self, ln: usize, ws: &[(usize, &str)]) {
        // `param k = v` or `param k=v`
        let joined: Vec<(usize, String)> = ws[1..].iter().map(|(c, w)| (*c, w.to_string())).collect();
        let (key, kcol, value, vcol) = match joined.as_slice() {
            [(kc, k), (_, eq), (vc, v)] if eq == "=" => (k.clone(), *kc, v.clone(), *vc),
            [(kc, kv)] if kv.contains('=') => {
                let (k, v) = kv.split_once('=').unwrap();
                (k.to_string(), *kc, v.to_string(), kc + k.chars().count() + 1)
            }
            _ => {
                let col = ws[0].0;
                self.err(ln, col, "expected 'param <name> = <number>'");
                return;
            }
        };
        if !is_ident(&key) {
            self.err(ln, kcol, format!("invalid parameter name '{key}'"));
            return;
        }
        match number(&value) {
            Ok(v) => {
                if self.params.insert(key.clone(), v).is_some() {
                    self.err(ln, kcol, format!("duplicate parameter '{key}'"));
                }
            }
            Err(m) => self.err(ln, vcol, m),
        }
    }

    fn state(&mut self, ln: usize, col: usize, ws: &[(usize, &str)]) {
        if self.state.is_some() {
            self.err(ln, col, "duplicate state line");
            return;
        }
        if ws.len() != 4 {
            self.err(ln, col, "expected 'state <x1> <x2> <x3>'");
            return;
        }
        let mut x = [0.0; 3];
        for (k, &(c, w)) in ws[1..].iter().enumerate() {
            match number(w) {
                Ok(v) => x[k] = v,
                Err(m) => {
                    self.err(ln, c, m);
                    return;
                }
            }
        }
        match WClassState::new(x[0], x[1], x[2]) {
            Ok(s) => self.state = Some((s, ln)),
            Err(e) => self.err(ln, ws[1].0, e.to_string()),
        }
    }

    fn node(&mut self, ln: usize, col: usize, ws: &[(usize, &str)]) {
        let Some(&(idcol, id)) = ws.get(1) else {
            self.err(ln, col, "node line needs an id");
            return;
        };
        if !is_node_id(id) {
            self.err(ln, idcol, format!("invalid node id '{id}'"));
            return;
        }
        let mut party = None;
        let mut measure = None;
        let mut edges = None;
        let mut seen = HashSet::new();
        let mut ok = true;
        for &(c, w) in &ws[2..] {
            let Some((key, value)) = w.split_once('=') else {
                self.err(ln, c, format!("expected key=value, got '{w}'"));
                ok = false;
                continue;
            };
            let vcol = c + key.chars().count() + 1;
            if !seen.insert(key.to_string()) {
                self.err(ln, c, format!("duplicate key '{key}'"));
                ok = false;
                continue;
            }
            match key {
                "party" => match value.parse::<Party>() {
                    Ok(p) => party = Some(p),
                    Err(_) => {
                        self.err(ln, vcol, format!("unknown party '{value}'"));
                        ok = false;
                    }
                },
                "measure" => match self.measure(ln, vcol, value) {
                    Some(m) => {
                        measure = Some(m);
                        self.src.measures.insert(id.to_string(), vcol);
                    }
                    None => ok = false,
                },
                "outcomes" => match self.edges(ln, vcol, id, value) {
                    Some(e) => {
                        edges = Some(e);
                        self.src.outcomes.insert(id.to_string(), vcol);
                    }
                    None => ok = false,
                },
                other => {
                    self.err(ln, c, format!("unknown key '{other}'"));
                    ok = false;
                }
            }
        }
        for (key, present) in [("party", party.is_some()), ("measure", measure.is_some()), ("outcomes", edges.is_some())] {
            if !present && !seen.contains(key) {
                self.err(ln, col, format!("node {id} is missing '{key}='"));
                ok = false;
            }
        }
        if self.nodes.contains_key(id) {
            self.err(ln, idcol, format!("duplicate node id '{id}'"));
            return;
        }
        if self.entry.is_none() {
            self.entry = Some(id.to_string());
        }
        self.src.nodes.insert(id.to_string(), (ln, col));
        if ok {
            let node = ProtocolNode {
                id: id.to_string(),
                party: party.unwrap(),
                measure: measure.unwrap(),
                edges: edges.unwrap(),
            };
            self.nodes.insert(id.to_string(), node);
        }
    }

    fn scalar(&mut self, ln: usize, col: usize, s: &str) -> Option<Scalar> {
        let s = s.trim();
        if is_ident(s) && s.parse::<f64>().is_err() {
            return Some(Scalar::Param(s.to_string()));
        }
        match number(s) {
            Ok(v) => Some(Scalar::Lit(v)),
            Err(m) => {
                self.err(ln, col, m);
                None
            }
        }
    }

    fn measure(&mut self, ln: usize, col: usize, v: &str) -> Option<MeasureSpec> {
        let call = |name: &str| -> Option<&str> { v.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')') };
        if v == "projz" {
            return Some(MeasureSpec::ProjZ);
        }
        if v == "hadamard" {
            return Some(MeasureSpec::Hadamard);
        }
        if let Some(arg) = call("wpp") {
            return self.scalar(ln, col + 4, arg).map(MeasureSpec::Wpp);
        }
        if let Some(args) = call("nielsen") {
            let Some((a, b)) = args.split_once(',') else {
                self.err(ln, col, "nielsen takes two arguments");
                return None;
            };
            let a = self.scalar(ln, col + 8, a);
            let b = self.scalar(ln, col + 9 + args.find(',').unwrap(), b);
            return Some(MeasureSpec::Nielsen(a?, b?));
        }
        if let Some(body) = v.strip_prefix("kraus{").and_then(|r| r.strip_suffix('}')) {
            return self.kraus(ln, col, body).map(MeasureSpec::Kraus);
        }
        self.err(ln, col, format!("unknown measurement '{v}'"));
        None
    }

    fn kraus(&mut self, ln: usize, col: usize, body: &str) -> Option<Vec<Mat2<f64>>> {
        let mut ops = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let Some(inner) = rest.strip_prefix('[') else {
                self.err(ln, col, "expected '[' to open a Kraus matrix");
                return None;
            };
            let Some(close) = inner.find(']') else {
                self.err(ln, col, "unterminated Kraus matrix");
                return None;
            };
            let rows: Vec<&str> = inner[..close].split(';').collect();
            let cells: Vec<Vec<&str>> = rows.iter().map(|r| r.split(',').collect()).collect();
            if cells.len() != 2 || cells.iter().any(|r| r.len() != 2) {
                self.err(ln, col, "Kraus matrices must be 2x2 written as [a,b;c,d]");
                return None;
            }
            let mut m = [[Complex::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    match complex(cells[i][j]) {
                        Ok(z) => m[i][j] = z,
                        Err(msg) => {
                            self.err(ln, col, msg);
                            return None;
                        }
                    }
                }
            }
            ops.push(Mat2(m));
            rest = inner[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            } else if !rest.is_empty() {
                self.err(ln, col, "expected ',' between Kraus matrices");
                return None;
            }
        }
        if ops.is_empty() {
            self.err(ln, col, "empty Kraus list");
            return None;
        }
        Some(ops)
    }

    fn edges(&mut self, ln: usize, col: usize, id: &str, v: &str) -> Option<Vec<Edge>> {
        let mut out = Vec::new();
        let mut c = col;
        let mut ok = true;
        for (k, tok) in v.split(',').enumerate() {
            self.src.edges.insert((id.to_string(), k), c);
            let edge = match tok.split_once(':') {
                Some(("node", t)) if is_node_id(t) => Some(Edge::Continue(t.to_string())),
                Some(("loop", t)) if is_node_id(t) => Some(Edge::Loop(t.to_string())),
                Some(("halt", h)) => HaltLabel::from_token(h).map(Edge::Halt),
                _ => None,
            };
            match edge {
                Some(e) => out.push(e),
                None => {
                    self.err(ln, c, format!("malformed outcome edge '{tok}'"));
                    ok = false;
                }
            }
            c += tok.chars().count() + 1;
        }
        ok.then_some(out)
    }

    fn finish(mut self, lines: usize) -> Result<ProtocolGraph> {
        let end = lines.max(1);
        if self.state.is_none() {
            self.err(end, 1, "missing state line");
        }
        let Some(entry) = self.entry.clone() else {
            self.err(end, 1, "missing entry node");
            return Err(Error::Parse(self.diags));
        };
        if !self.diags.is_empty() {
            // Report structural problems too, when the node table is intact.
            if self.nodes.len() == self.src.nodes.len() {
                if let Some((s, _)) = self.state {
                    let g = self.graph(entry, s);
                    self.diags.extend(validate_graph(&g, Some(&self.src)));
                }
            }
            self.diags.sort_by_key(|d| (d.line, d.col));
            return Err(Error::Parse(self.diags));
        }
        let (s, _) = self.state.unwrap();
        let g = self.graph(entry, s);
        let diags = validate_graph(&g, Some(&self.src));
        if diags.is_empty() {
            Ok(g)
        } else {
            Err(Error::Parse(diags))
        }
    }

    fn graph(&self, entry: String, initial: WClassState<f64>) -> ProtocolGraph {
        ProtocolGraph {
            name: self.name.clone().unwrap_or_else(|| "unnamed".to_string()),
            params: self.params.clone(),
            initial,
            entry,
            nodes: self.nodes.clone(),
        }
    }
}
