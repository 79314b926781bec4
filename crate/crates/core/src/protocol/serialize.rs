use std::fmt::Write;

use num_complex::Complex;

use super::{Edge, MeasureSpec, ProtocolGraph, ProtocolNode, Scalar};

/// Canonical text form: entry node first, remaining nodes by id, parameters
/// by name. Numbers use the shortest representation that parses back exactly.
pub fn serialize(g: &ProtocolGraph) -> String {
    let mut out = String::new();
    writeln!(out, "protocol {}", g.name()).unwrap();
    for (k, v) in g.params() {
        writeln!(out, "param {k} = {}", num(*v)).unwrap();
    }
    let [x1, x2, x3] = g.initial().coords();
    writeln!(out, "state {} {} {}", num(x1), num(x2), num(x3)).unwrap();
    let entry = g.node(g.entry()).expect("validated graph has its entry");
    node_line(&mut out, entry);
    for n in g.nodes().filter(|n| n.id != g.entry()) {
        node_line(&mut out, n);
    }
    out
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn cnum(z: Complex<f64>) -> String {
    if z.im == 0.0 {
        return num(z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", num(z.re), num(z.im.abs()))
}

fn scalar(s: &Scalar) -> String {
    match s {
        Scalar::Lit(v) => num(*v),
        Scalar::Param(p) => p.clone(),
    }
}

fn node_line(out: &mut String, n: &ProtocolNode) {
    let measure = match &n.measure {
        MeasureSpec::Wpp(x) => format!("wpp({})", scalar(x)),
        MeasureSpec::ProjZ => "projz".to_string(),
        MeasureSpec::Hadamard => "hadamard".to_string(),
        MeasureSpec::Nielsen(a, b) => format!("nielsen({},{})", scalar(a), scalar(b)),
        MeasureSpec::Kraus(ops) => {
            let mats: Vec<String> = ops
                .iter()
                .map(|m| {
                    let m = &m.0;
                    format!("[{},{};{},{}]", cnum(m[0][0]), cnum(m[0][1]), cnum(m[1][0]), cnum(m[1][1]))
                })
                .collect();
            format!("kraus{{{}}}", mats.join(","))
        }
    };
    let edges: Vec<String> = n
        .edges
        .iter()
        .map(|e| match e {
            Edge::Continue(t) => format!("node:{t}"),
            Edge::Halt(h) => format!("halt:{h}"),
            Edge::Loop(t) => format!("loop:{t}"),
        })
        .collect();
    writeln!(out, "node {} party={} measure={} outcomes={}", n.id, n.party, measure, edges.join(",")).unwrap();
}
