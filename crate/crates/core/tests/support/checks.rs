//! Randomized invariant checks driven by a seed. Each returns a description
//! of the first violation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wlocc::analysis::verify;
use wlocc::engine::{build_thm1, lift};
use wlocc::entanglement::{coa_closed_form, concurrence_of_assistance};
use wlocc::linalg::Mat2;
use wlocc::measurement::{
    apply, apply_canonical, hadamard_measurement, projective_z, update_canonical, validate, weighted_pair,
};
use wlocc::protocol::{parse, serialize, Edge, HaltLabel, MeasureSpec, ProtocolGraph, Scalar};
use wlocc::state::{apply_local_unitary, canonicalize, embed, three_tangle};
use wlocc::{KrausOp, LocalMeasurement, LocalUnitary, Party, PureState3Q, WClassState};

use super::*;

pub type Check = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rotate(psi: &PureState3Q, lu: &[LocalUnitary; 3]) -> PureState3Q {
    lu.iter().fold(*psi, |acc, u| apply_local_unitary(&acc, u))
}

pub fn random_state(r: &mut impl Rng) -> PureState3Q {
    let amps: [Complex64; 8] =
        std::array::from_fn(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    PureState3Q::normalized(amps).expect("nonzero")
}

fn coords4(s: &WClassState) -> [f64; 4] {
    [s.x0(), s.x1(), s.x2(), s.x3()]
}

fn measurement_of(party: Party, ops: &[Mat2<f64>]) -> LocalMeasurement {
    LocalMeasurement::new(party, ops.iter().map(|m| KrausOp::new(*m).expect("finite")).collect())
        .expect("complete")
}

pub fn canonical_form_lu_invariant(seed: u64) -> Check {
    let mut r = rng(seed);
    let with_x0 = r.random_bool(0.5);
    let s = random_w_class(&mut r, with_x0);
    let psi = rotate(&embed(&s), &random_lu(&mut r));
    let back = canonicalize(&psi).map_err(|e| e.to_string())?.state;
    ensure!(back.max_diff(&s) <= 1e-9, "{s:?} came back as {back:?}");
    Ok(())
}

pub fn three_tangle_lu_invariant(seed: u64) -> Check {
    let mut r = rng(seed);
    let psi = random_state(&mut r);
    let moved = rotate(&psi, &random_lu(&mut r));
    let (a, b) = (three_tangle(&psi), three_tangle(&moved));
    ensure!((a - b).abs() <= 1e-9, "tangle {a} vs {b}");
    Ok(())
}

pub fn measurement_conserves_probability(seed: u64) -> Check {
    let mut r = rng(seed);
    let party = random_party(&mut r);
    let x: f64 = r.random();
    let psi = random_state(&mut r);
    let random = random_measurement(&mut r);
    let ms = [
        weighted_pair(party, x).map_err(|e| e.to_string())?,
        hadamard_measurement(party),
        projective_z(party),
        measurement_of(party, &random),
    ];
    for m in &ms {
        ensure!(validate(m), "measurement rejected as incomplete");
        let ops: Vec<Op> = m.ops().iter().map(|k| op_of(k.matrix())).collect();
        ensure!(completeness_gap(&ops) <= 1e-10, "completeness gap {}", completeness_gap(&ops));
        let branches = apply(&psi, m).map_err(|e| e.to_string())?;
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        ensure!((total - 1.0).abs() <= 1e-10, "probabilities sum to {total}");
        for b in &branches {
            let (p, _) = outcome(&to_amp(&psi), mask_of(party), &ops[b.outcome]);
            ensure!((p - b.probability).abs() <= 1e-10, "outcome {} has {} not {p}", b.outcome, b.probability);
        }
    }
    Ok(())
}

pub fn closed_form_update_matches_amplitudes(seed: u64) -> Check {
    let mut r = rng(seed);
    let with_x0 = r.random_bool(0.5);
    let s = random_w_class(&mut r, with_x0);
    let k = random_party(&mut r);
    let x: f64 = r.random();
    let got = apply_canonical(&s, k, x).map_err(|e| e.to_string())?;
    let amp = canonical_amp(s.x0(), s.x1(), s.x2(), s.x3());
    for (op, out) in wpp(x).iter().zip(got) {
        let (p, post) = outcome(&amp, mask_of(k), op);
        match out {
            None => ensure!(p < 1e-13, "pruned outcome has probability {p}"),
            Some((q, st)) => {
                ensure!((p - q).abs() <= 1e-10, "probability {q} vs {p}");
                let want = read_canonical(&post).ok_or("post-state left the canonical slots")?;
                let have = coords4(&st);
                ensure!((0..4).all(|i| (want[i] - have[i]).abs() <= 1e-10), "{have:?} vs {want:?}");
            }
        }
    }
    Ok(())
}

pub fn other_coordinates_invariant_on_average(seed: u64) -> Check {
    let mut r = rng(seed);
    let with_x0 = r.random_bool(0.5);
    let s = random_w_class(&mut r, with_x0);
    let k = random_party(&mut r);
    let ops = random_measurement(&mut r);
    let outs = update_canonical(&s, k, &ops).map_err(|e| e.to_string())?;
    let amp = to_amp(&embed(&s));
    let mut avg = [0.0; 4];
    for (m, out) in ops.iter().zip(&outs) {
        let (p, post) = outcome(&amp, mask_of(k), &op_of(m));
        let Some((q, st)) = out else {
            ensure!(p < 1e-13, "pruned outcome has probability {p}");
            continue;
        };
        ensure!((p - q).abs() <= 1e-10, "probability {q} vs {p}");
        let direct = canonicalize(&PureState3Q::new(post).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .state;
        ensure!(direct.max_diff(st) <= 1e-9, "{direct:?} vs {st:?}");
        for (a, v) in avg.iter_mut().zip(coords4(st)) {
            *a += q * v;
        }
    }
    for p in Party::ALL.into_iter().filter(|&p| p != k) {
        let i = p.coordinate();
        ensure!((avg[i] - coords4(&s)[i]).abs() <= 1e-9, "x{i}: average {} vs {}", avg[i], coords4(&s)[i]);
    }
    Ok(())
}

pub fn assistance_monotone(seed: u64) -> Check {
    let mut r = rng(seed);
    let s = random_w_class(&mut r, true);
    let psi = rotate(&embed(&s), &random_lu(&mut r));
    let actor = random_party(&mut r);
    let m = measurement_of(actor, &random_measurement(&mut r));
    let branches = apply(&psi, &m).map_err(|e| e.to_string())?;
    for k in Party::ALL {
        let before = concurrence_of_assistance(&psi, k);
        let after: f64 = branches.iter().map(|b| b.probability * concurrence_of_assistance(&b.state, k)).sum();
        ensure!(after <= before + 1e-9, "assisting {k:?}: {after} > {before}");
    }
    Ok(())
}

pub fn assistance_closed_form(seed: u64) -> Check {
    let mut r = rng(seed);
    let s = random_w_class(&mut r, false);
    let psi = rotate(&embed(&s), &random_lu(&mut r));
    for k in Party::ALL {
        let (i, j) = k.others();
        let want = 2.0 * (s.coord(i) * s.coord(j)).sqrt();
        let got = concurrence_of_assistance(&psi, k);
        ensure!((got - want).abs() <= 1e-9, "assisting {k:?}: {got} vs {want}");
        let closed = coa_closed_form(&s, k).map_err(|e| e.to_string())?;
        ensure!((closed - want).abs() <= 1e-12, "closed form {closed} vs {want}");
        ensure!(s.coord(k) <= 1e-6 || got < 1.0, "assistance {got} reached 1");
    }
    Ok(())
}

pub fn assistance_bounds_sampling(seed: u64, samples: usize) -> Check {
    let mut r = rng(seed);
    let with_x0 = r.random_bool(0.5);
    let s = random_w_class(&mut r, with_x0);
    let psi = rotate(&embed(&s), &random_lu(&mut r));
    let k = random_party(&mut r);
    let ca = concurrence_of_assistance(&psi, k);
    let best = sampled_assistance(&to_amp(&psi), mask_of(k), samples, &mut r);
    ensure!(best <= ca + 1e-9, "sampled {best} above {ca}");
    ensure!(best >= ca - 1e-3, "sampled {best} far below {ca}");
    Ok(())
}

/// Every EPR round extracted by `verify` from the four-round protocol and
/// its two successive lifts obeys `√(2(1−s−q)s) ≥ (1−q)t`.
pub fn epr_round_bound(t: f64) -> Check {
    let g = build_thm1(t).map_err(|e| e.to_string())?;
    let once = lift(&g, t).map_err(|e| e.to_string())?;
    let twice = lift(&once, t).map_err(|e| e.to_string())?;
    for (i, p) in [&g, &once, &twice].into_iter().enumerate() {
        let report = verify(p, t);
        ensure!(report.passed(), "verification failed at t={t}\n{report}");
        // Roundoff can push the doubly lifted input past the symmetry tolerance.
        ensure!(i == 2 || !report.epr_rounds.is_empty(), "no EPR rounds extracted at t={t}");
        for e in &report.epr_rounds {
            ensure!(e.lhs >= e.rhs - 1e-9, "{} at t={t}, s={}: {} < {}", e.node, e.s, e.lhs, e.rhs);
        }
    }
    Ok(())
}

pub fn random_graph_round_trip(seed: u64) -> Check {
    let g = random_graph(&mut rng(seed));
    let text = serialize(&g);
    let back = parse(&text).map_err(|e| format!("{e}\n{text}"))?;
    ensure!(back == g, "graph changed in round trip:\n{text}");
    ensure!(serialize(&back) == text, "text changed in round trip:\n{text}");
    Ok(())
}

fn random_scalar(r: &mut impl Rng, has_param: bool) -> Scalar {
    if has_param && r.random_bool(0.5) {
        Scalar::Param("a".into())
    } else {
        Scalar::Lit(r.random())
    }
}

fn random_spec(r: &mut impl Rng, has_param: bool) -> MeasureSpec {
    match r.random_range(0..5) {
        0 => MeasureSpec::Wpp(random_scalar(r, has_param)),
        1 => MeasureSpec::ProjZ,
        2 => MeasureSpec::Hadamard,
        3 => {
            let (a, b): (f64, f64) = (r.random(), r.random());
            MeasureSpec::Nielsen(a.max(b).into(), a.min(b).into())
        }
        _ => MeasureSpec::Kraus(random_measurement(r).to_vec()),
    }
}

/// Tree of up to six nodes; spare outcomes halt, loop to the entry, or jump
/// forward.
pub fn random_graph(r: &mut impl Rng) -> ProtocolGraph {
    let n = r.random_range(1..=6);
    let has_param = r.random_bool(0.5);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges: Vec<Vec<Option<Edge>>> = vec![vec![None, None]; n];
    for (j, id) in ids.iter().enumerate().skip(1) {
        let free: Vec<(usize, usize)> = (0..j)
            .flat_map(|i| (0..2).map(move |k| (i, k)))
            .filter(|&(i, k)| edges[i][k].is_none())
            .collect();
        let (i, k) = free[r.random_range(0..free.len())];
        edges[i][k] = Some(Edge::Continue(id.clone()));
    }
    let labels = [HaltLabel::EprAB, HaltLabel::EprAC, HaltLabel::BcTarget, HaltLabel::Fail];
    let with_x0 = r.random_bool(0.3);
    let mut b = ProtocolGraph::builder("random", random_w_class(r, with_x0));
    if has_param {
        b = b.param("a", r.random());
    }
    for (i, slots) in edges.into_iter().enumerate() {
        let slots = slots
            .into_iter()
            .map(|e| {
                e.unwrap_or_else(|| match r.random_range(0..4) {
                    0 if i > 0 => Edge::Loop(ids[0].clone()),
                    1 if i + 1 < n => Edge::Continue(ids[r.random_range(i + 1..n)].clone()),
                    _ => Edge::Halt(labels[r.random_range(0..4)]),
                })
            })
            .collect();
        b = b.node(&ids[i], random_party(r), random_spec(r, has_param), slots);
    }
    b.build().expect("generated graphs are valid")
}
