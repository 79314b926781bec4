//! Builder outputs and a deterministic corpus of broken protocol files.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use wlocc::engine::{build_fortescue_lo, build_projective_c, build_simple3, build_thm1, build_thm2, lift};
use wlocc::protocol::{serialize, ProtocolGraph};

use super::checks::rng;

pub fn builder_outputs() -> Vec<ProtocolGraph> {
    let mut out = Vec::new();
    for t in [0.1, 0.3, 0.5, 0.6, FRAC_1_SQRT_2] {
        let g = build_thm1(t).unwrap();
        let once = lift(&g, t).unwrap();
        let twice = lift(&once, t).unwrap();
        out.extend([g, once, twice, build_simple3(t).unwrap()]);
    }
    for t in [0.2, 0.6, 0.75, 0.9, 0.99] {
        out.push(build_thm2(t).unwrap());
    }
    for eps in [0.2, 0.1, 0.01] {
        out.push(build_fortescue_lo(eps).unwrap());
    }
    out.push(build_projective_c().unwrap());
    out
}

pub struct Mutant {
    pub kind: &'static str,
    pub text: String,
    /// Line a diagnostic must point at, when the damage is local.
    pub line: Option<usize>,
}

const KINDS: [&str; 20] = [
    "dangling edge",
    "missing outcome",
    "extra outcome",
    "incomplete kraus",
    "malformed state number",
    "malformed param",
    "unknown party",
    "duplicate node",
    "loop to non-ancestor",
    "missing state",
    "unknown param",
    "weight out of range",
    "unknown measurement",
    "unknown halt label",
    "unknown statement",
    "empty file",
    "missing party",
    "nielsen upward",
    "continue cycle",
    "state sum above one",
];

fn node_lines(lines: &[String]) -> Vec<usize> {
    (0..lines.len()).filter(|&i| lines[i].starts_with("node ")).collect()
}

fn line_of(lines: &[String], prefix: &str) -> Option<usize> {
    lines.iter().position(|l| l.starts_with(prefix))
}

fn node_id(line: &str) -> String {
    line.split_whitespace().nth(1).unwrap_or_default().to_string()
}

fn replace_word(line: &str, key: &str, value: &str) -> String {
    line.split(' ')
        .map(|w| if w.starts_with(key) { format!("{key}{value}") } else { w.to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

fn outcomes(line: &str) -> Vec<String> {
    line.split(' ')
        .find_map(|w| w.strip_prefix("outcomes="))
        .map(|o| o.split(',').map(str::to_string).collect())
        .unwrap_or_default()
}

fn set_outcomes(line: &str, outs: &[String]) -> String {
    replace_word(line, "outcomes=", &outs.join(","))
}

fn mutate(text: &str, kind: usize, r: &mut impl Rng) -> (String, Option<usize>) {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let nodes = node_lines(&lines);
    let pick = nodes[r.random_range(0..nodes.len())];
    let first = nodes[0];
    let last = *nodes.last().unwrap();
    let mut at = Some(pick);
    match kind {
        0 => {
            let target = nodes
                .iter()
                .copied()
                .find(|&i| outcomes(&lines[i]).iter().any(|o| o.starts_with("node:")))
                .unwrap_or(pick);
            let mut outs = outcomes(&lines[target]);
            outs[0] = "node:zz9".into();
            lines[target] = set_outcomes(&lines[target], &outs);
            at = Some(target);
        }
        1 => {
            let mut outs = outcomes(&lines[pick]);
            outs.pop();
            lines[pick] = set_outcomes(&lines[pick], &outs);
        }
        2 => {
            let mut outs = outcomes(&lines[pick]);
            outs.push("halt:AB".into());
            lines[pick] = set_outcomes(&lines[pick], &outs);
        }
        3 => lines[pick] = replace_word(&lines[pick], "measure=", "kraus{[1,0;0,0.5],[0,0;0,0.5]}"),
        4 => {
            let i = line_of(&lines, "state").unwrap();
            lines[i] = "state 0.3 0.3.3 0.3".into();
            at = Some(i);
        }
        5 => match line_of(&lines, "param") {
            Some(i) => {
                let key = lines[i].split_whitespace().nth(1).unwrap().to_string();
                lines[i] = format!("param {key} = 1e");
                at = Some(i);
            }
            None => {
                lines.insert(1, "param zeta = --2".into());
                at = Some(1);
            }
        },
        6 => lines[pick] = replace_word(&lines[pick], "party=", "D"),
        7 => {
            lines.push(lines[pick].clone());
            at = Some(lines.len() - 1);
        }
        8 => {
            let mut outs = outcomes(&lines[first]);
            let target = if nodes.len() > 1 { node_id(&lines[last]) } else { "qq".into() };
            let slot = outs.iter().position(|o| o.starts_with("halt:")).unwrap_or(0);
            outs[slot] = format!("loop:{target}");
            lines[first] = set_outcomes(&lines[first], &outs);
            at = Some(first);
        }
        9 => {
            lines.retain(|l| !l.starts_with("state"));
            at = None;
        }
        10 => lines[pick] = replace_word(&lines[pick], "measure=", "wpp(zeta)"),
        11 => lines[pick] = replace_word(&lines[pick], "measure=", "wpp(1.5)"),
        12 => lines[pick] = replace_word(&lines[pick], "measure=", "foo"),
        13 => {
            let target = nodes
                .iter()
                .copied()
                .find(|&i| outcomes(&lines[i]).iter().any(|o| o.starts_with("halt:")))
                .unwrap_or(pick);
            let mut outs = outcomes(&lines[target]);
            let slot = outs.iter().position(|o| o.starts_with("halt:")).unwrap_or(0);
            outs[slot] = "halt:XY".into();
            lines[target] = set_outcomes(&lines[target], &outs);
            at = Some(target);
        }
        14 => {
            let i = r.random_range(1..=lines.len());
            lines.insert(i, "nod r9 party=A".into());
            at = Some(i);
        }
        15 => {
            lines = vec!["# nothing here".into()];
            at = None;
        }
        16 => {
            lines[pick] = lines[pick].split(' ').filter(|w| !w.starts_with("party=")).collect::<Vec<_>>().join(" ");
        }
        17 => lines[pick] = replace_word(&lines[pick], "measure=", "nielsen(0.2,0.9)"),
        18 => {
            let mut outs = outcomes(&lines[last]);
            outs[0] = format!("node:{}", node_id(&lines[first]));
            lines[last] = set_outcomes(&lines[last], &outs);
            at = Some(last);
        }
        _ => {
            let i = line_of(&lines, "state").unwrap();
            lines[i] = "state 0.5 0.5 0.5".into();
            at = Some(i);
        }
    }
    (lines.join("\n") + "\n", at.map(|i| i + 1))
}

/// 100 mutants: every kind applied to five different base protocols.
pub fn mutation_corpus() -> Vec<Mutant> {
    let bases: Vec<String> = builder_outputs().iter().map(serialize).collect();
    let mut r = rng(0x5eed);
    (0..100)
        .map(|i| {
            let kind = i % KINDS.len();
            let base = &bases[(i / KINDS.len() * 7 + kind) % bases.len()];
            let (text, line) = mutate(base, kind, &mut r);
            Mutant { kind: KINDS[kind], text, line }
        })
        .collect()
}
