//! CSV and JSON emitters. Numbers carry 12 significant digits.

use serde::Serialize;
use serde_json::Value;

use super::sweep::SweepRow;
use crate::engine::OutcomeDistribution;
use crate::protocol::{HaltLabel, Rounds};

pub const RUN_CSV_HEADER: &str = "p_AB,p_AC,p_BC,p_fail,residual,rounds,expected_rounds";
pub const SWEEP_CSV_HEADER: &str = "t,verdict,alpha,p_AB,p_AC,p_BC,protocol";

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt_g12(x).parse().unwrap_or(x)
}

fn rounds_value(r: Rounds) -> Value {
    match r {
        Rounds::Finite(n) => Value::from(n),
        Rounds::Unbounded => Value::from("unbounded"),
    }
}

#[derive(Serialize)]
struct HaltJson {
    label: &'static str,
    prob: f64,
    concurrence: Option<f64>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct RunJson {
    p_AB: f64,
    p_AC: f64,
    p_BC: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_fail: Option<f64>,
    residual: f64,
    rounds: Value,
    halts: Vec<HaltJson>,
}

/// `p_fail` appears only when the distribution has `FAIL` halts.
pub fn run_json(d: &OutcomeDistribution, rounds: Rounds) -> String {
    let has_fail = d.halts.iter().any(|h| h.label == HaltLabel::Fail);
    let doc = RunJson {
        p_AB: round12(d.p_ab),
        p_AC: round12(d.p_ac),
        p_BC: round12(d.p_bc),
        p_fail: has_fail.then(|| round12(d.p_fail)),
        residual: round12(d.residual),
        rounds: rounds_value(rounds),
        halts: d
            .halts
            .iter()
            .map(|h| HaltJson { label: h.label.token(), prob: round12(h.probability), concurrence: h.concurrence.map(round12) })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn run_csv(d: &OutcomeDistribution, rounds: Rounds) -> String {
    let expected = d.expected_rounds.map(fmt_g12).unwrap_or_default();
    format!(
        "{RUN_CSV_HEADER}\n{},{},{},{},{},{},{}\n",
        fmt_g12(d.p_ab),
        fmt_g12(d.p_ac),
        fmt_g12(d.p_bc),
        fmt_g12(d.p_fail),
        fmt_g12(d.residual),
        rounds,
        expected
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(fmt_g12).unwrap_or_default();
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_g12(r.t),
            r.verdict,
            fmt_g12(r.alpha),
            opt(r.p_ab),
            opt(r.p_ac),
            opt(r.p_bc),
            r.protocol.unwrap_or("")
        ));
    }
    out
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct SweepJson {
    t: f64,
    verdict: String,
    degenerate: bool,
    alpha: f64,
    p_AB: Option<f64>,
    p_AC: Option<f64>,
    p_BC: Option<f64>,
    protocol: Option<&'static str>,
}

pub fn sweep_json(rows: &[SweepRow]) -> String {
    let doc: Vec<SweepJson> = rows
        .iter()
        .map(|r| SweepJson {
            t: round12(r.t),
            verdict: r.verdict.to_string(),
            degenerate: r.degenerate,
            alpha: round12(r.alpha),
            p_AB: r.p_ab.map(round12),
            p_AC: r.p_ac.map(round12),
            p_BC: r.p_bc.map(round12),
            protocol: r.protocol,
        })
        .collect();
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}
