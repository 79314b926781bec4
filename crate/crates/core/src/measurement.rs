//! Local Kraus measurements and the update rules used by every protocol round.
//!
//! The two-outcome family used throughout is
//! `M₁(x) = diag(√x, 0)`, `M₂(x) = diag(√(1−x), 1)`: outcome 1 removes the
//! acting party's `|1⟩` component, outcome 2 damps its `|0⟩` component.

use crate::entanglement::{coa_closed_form, pair_state_of, schmidt_of_concurrence, PairLabel, SchmidtPair};
use crate::error::{Error, Result};
use crate::linalg::{c, schmidt, Mat2};
use crate::scalar::Real;
use crate::state::{apply_local_unitary, embed, LocalUnitary, Party, PureState3Q, WClassState};

/// Branches below this probability are dropped.
pub const PRUNE_PROBABILITY: f64 = 1e-14;

/// Completeness tolerance on `Σ M†M = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausOp<T: Real>(Mat2<T>);

impl<T: Real> KrausOp<T> {
    pub fn new(matrix: Mat2<T>) -> Result<Self> {
        let norm = matrix.spectral_norm();
        if norm > T::one() + T::tol(1e-10) {
            return Err(Error::Domain(format!("Kraus operator has spectral norm {norm} > 1")));
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.0
    }
}

/// A measurement by one party, with optional round-free corrections applied
/// after each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMeasurement<T: Real> {
    party: Party,
    ops: Vec<KrausOp<T>>,
    corrections: Vec<Vec<LocalUnitary<T>>>,
}

impl<T: Real> LocalMeasurement<T> {
    /// Builds a measurement, rejecting incomplete operator sets.
    pub fn new(party: Party, ops: Vec<KrausOp<T>>) -> Result<Self> {
        let m = Self::unchecked(party, ops);
        let dev = m.completeness_deviation();
        if dev > T::tol(COMPLETENESS_TOL) {
            return Err(Error::IncompleteMeasurement { deviation: dev.as_f64() });
        }
        Ok(m)
    }

    /// Builds a measurement without the completeness check; see [`validate`].
    pub fn unchecked(party: Party, ops: Vec<KrausOp<T>>) -> Self {
        let corrections = vec![Vec::new(); ops.len()];
        Self { party, ops, corrections }
    }

    /// Attaches per-outcome corrections (one list per outcome).
    pub fn with_corrections(mut self, corrections: Vec<Vec<LocalUnitary<T>>>) -> Result<Self> {
        if corrections.len() != self.ops.len() {
            return Err(Error::Domain(format!(
                "{} correction lists for {} outcomes",
                corrections.len(),
                self.ops.len()
            )));
        }
        self.corrections = corrections;
        Ok(self)
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn ops(&self) -> &[KrausOp<T>] {
        &self.ops
    }

    pub fn corrections(&self) -> &[Vec<LocalUnitary<T>>] {
        &self.corrections
    }

    pub fn outcome_count(&self) -> usize {
        self.ops.len()
    }

    /// `max |Σ M†M − I|`.
    pub fn completeness_deviation(&self) -> T {
        let sum = self.ops.iter().fold(Mat2::zero(), |acc, op| acc + op.0.gram());
        sum.max_abs_diff(&Mat2::identity())
    }
}

/// True iff `Σ M†M = I` within tolerance.
pub fn validate<T: Real>(m: &LocalMeasurement<T>) -> bool {
    !m.ops.is_empty() && m.completeness_deviation() <= T::tol(COMPLETENESS_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeBranch<T: Real> {
    pub outcome: usize,
    pub probability: T,
    pub state: PureState3Q<T>,
}

/// `{diag(√x, 0), diag(√(1−x), 1)}` for `party`.
pub fn weighted_pair<T: Real>(party: Party, x: T) -> Result<LocalMeasurement<T>> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain(format!("weight must lie in [0, 1], got {x}")));
    }
    let ops = vec![
        KrausOp(Mat2::diag_real(x.sqrt(), T::zero())),
        KrausOp(Mat2::diag_real((T::one() - x).sqrt(), T::one())),
    ];
    Ok(LocalMeasurement::unchecked(party, ops))
}

/// Projective measurement in the computational basis.
pub fn projective_z<T: Real>(party: Party) -> LocalMeasurement<T> {
    weighted_pair(party, T::one()).expect("x = 1 is in range")
}

/// Projective measurement onto `|±⟩ = (|0⟩ ± |1⟩)/√2`; the `−` outcome is
/// followed by `Z` on both other parties.
pub fn hadamard_measurement<T: Real>(party: Party) -> LocalMeasurement<T> {
    let h = T::lit(0.5);
    let plus = KrausOp(Mat2::from_real(h, h, h, h));
    let minus = KrausOp(Mat2::from_real(h, -h, -h, h));
    let (p, q) = party.others();
    let z = |x| LocalUnitary::new(x, Mat2::pauli_z()).expect("Z is unitary");
    LocalMeasurement::unchecked(party, vec![plus, minus])
        .with_corrections(vec![Vec::new(), vec![z(p), z(q)]])
        .expect("two outcomes, two correction lists")
}

/// Born-rule update: `p_k = ‖M_k ψ‖²`, `ψ_k = M_k ψ/√p_k`, then the outcome's
/// corrections. Branches with `p_k` below [`PRUNE_PROBABILITY`] are dropped.
pub fn apply<T: Real>(psi: &PureState3Q<T>, m: &LocalMeasurement<T>) -> Result<Vec<OutcomeBranch<T>>> {
    let dev = m.completeness_deviation();
    if m.ops.is_empty() || dev > T::tol(COMPLETENESS_TOL) {
        return Err(Error::IncompleteMeasurement { deviation: dev.as_f64() });
    }
    let mut out = Vec::with_capacity(m.ops.len());
    for (k, op) in m.ops.iter().enumerate() {
        let raw = psi.apply_op_raw(m.party, &op.0);
        let p = crate::state::norm_sqr(&raw);
        if p < T::tol(PRUNE_PROBABILITY) {
            continue;
        }
        let mut state = PureState3Q::from_raw_unchecked(raw.map(|a| a / c(p.sqrt())));
        for u in &m.corrections[k] {
            state = apply_local_unitary(&state, u);
        }
        out.push(OutcomeBranch { outcome: k, probability: p, state });
    }
    Ok(out)
}

/// One outcome of a canonical-coordinate update: `(probability, state)`, or
/// `None` for a pruned outcome.
pub type CanonicalOutcome<T> = Option<(T, WClassState<T>)>;

/// Closed-form update of canonical coordinates under `weighted_pair(k, x)`.
///
/// Outcome 1 has `p₁ = x(1 − x_k)`, sets `x_k → 0` and scales the rest by
/// `x/p₁`. Outcome 2 has `p₂ = (1 − x)(1 − x_k) + x_k`, sends `x_k → x_k/p₂`
/// and scales the rest by `(1 − x)/p₂`.
pub fn apply_canonical<T: Real>(s: &WClassState<T>, k: Party, x: T) -> Result<[CanonicalOutcome<T>; 2]> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain(format!("weight must lie in [0, 1], got {x}")));
    }
    let xk = s.coord(k);
    let one = T::one();
    let scaled = |f: T, keep_k: bool| -> [T; 4] {
        let mut w = [s.x0() * f, s.x1() * f, s.x2() * f, s.x3() * f];
        w[k.coordinate()] = if keep_k { xk } else { T::zero() };
        w
    };
    let p1 = x * (one - xk);
    let p2 = (one - x) * (one - xk) + xk;
    let mk = |p: T, w: [T; 4]| -> Result<CanonicalOutcome<T>> {
        if p < T::tol(PRUNE_PROBABILITY) {
            return Ok(None);
        }
        Ok(Some((p, WClassState::from_weights(w[0], w[1], w[2], w[3])?)))
    };
    Ok([mk(p1, scaled(x, false))?, mk(p2, scaled(one - x, true))?])
}

/// Canonical-coordinate update for an arbitrary measurement by `k` on the
/// canonical state `s`.
///
/// Each Kraus operator is split as `M = Q·R` with `R` upper triangular; `Q` is
/// a round-free unitary, and `R` keeps the amplitudes in the canonical slots,
/// so the outcome coordinates are read off directly.
pub fn update_canonical<T: Real>(s: &WClassState<T>, k: Party, ops: &[Mat2<T>]) -> Result<Vec<CanonicalOutcome<T>>> {
    let psi = embed(s);
    ops.iter()
        .map(|m| {
            let (_, r) = m.qr();
            let raw = psi.apply_op_raw(k, &r);
            let w = [0usize, 4, 2, 1].map(|i| raw[i].norm_sqr());
            let p = w[0] + w[1] + w[2] + w[3];
            if p < T::tol(PRUNE_PROBABILITY) {
                return Ok(None);
            }
            Ok(Some((p, WClassState::from_weights(w[0], w[1], w[2], w[3])?)))
        })
        .collect()
}

/// Deterministic conversion between two-qubit states, expressed in the
/// source's Schmidt basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NielsenConversion<T: Real> {
    /// Diagonal Kraus operators in the acting party's Schmidt basis.
    pub kraus: [Mat2<T>; 2],
    pub probabilities: [T; 2],
    /// Whether the outcome needs `X⊗X` (in the Schmidt bases) afterwards.
    pub swap: [bool; 2],
}

/// Two-outcome measurement taking Schmidt weights `src` to `tgt`.
///
/// Outcome 1 lands on `(μ₀, μ₁)` directly, outcome 2 on `(μ₁, μ₀)`, fixed by a
/// swap. Probabilities follow from `λ₀ = p·μ₀ + (1 − p)·μ₁`.
pub fn nielsen_measurement<T: Real>(src: &SchmidtPair<T>, tgt: &SchmidtPair<T>) -> Result<NielsenConversion<T>> {
    let tol = T::tol(1e-12);
    let (l0, l1) = (src.lambda_max, src.lambda_min);
    let (m0, m1) = (tgt.lambda_max, tgt.lambda_min);
    if l0 > m0 + tol {
        return Err(Error::Infeasible(format!(
            "source λmax {l0} exceeds target λmax {m0}; concurrence cannot increase deterministically"
        )));
    }
    if (l0 - m0).abs() <= tol {
        return Ok(NielsenConversion {
            kraus: [Mat2::identity(), Mat2::zero()],
            probabilities: [T::one(), T::zero()],
            swap: [false, false],
        });
    }
    let p = (l0 - m1) / (m0 - m1);
    let q = T::one() - p;
    let ratio = |num: T, den: T| (num / den).max(T::zero()).min(T::one()).sqrt();
    let k1 = Mat2::diag_real(ratio(p * m0, l0), ratio(p * m1, l1));
    let k2 = Mat2::diag_real(ratio(q * m1, l0), ratio(q * m0, l1));
    Ok(NielsenConversion { kraus: [k1, k2], probabilities: [p, q], swap: [false, true] })
}

/// Nielsen conversion of the pair containing `acting`, realized in the
/// computational frame for the current state `psi`.
///
/// The partner is whichever other party shares the entanglement (the third
/// party must be unentangled). Returns the measurement with its swap
/// corrections attached.
pub fn nielsen_for_state<T: Real>(psi: &PureState3Q<T>, acting: Party, c_tgt: T) -> Result<(LocalMeasurement<T>, T)> {
    let (o1, o2) = acting.others();
    let excluded = if psi.reduced(o1).det().re <= psi.reduced(o2).det().re { o1 } else { o2 };
    let partner = acting.third(excluded);
    let pair = PairLabel::without(excluded);
    let amps = pair_state_of(psi, pair)?;
    let chi = Mat2::new(amps[0], amps[1], amps[2], amps[3]);
    let sd = schmidt(&chi);
    let (e, f) = if acting < partner { (sd.left, sd.right) } else { (sd.right, sd.left) };
    let c_src = T::lit(2.0) * (sd.weights[0] * sd.weights[1]).max(T::zero()).sqrt();
    let src = SchmidtPair::new(sd.weights[0], sd.weights[1])?;
    let tgt = schmidt_of_concurrence(c_tgt)?;
    let conv = nielsen_measurement(&src, &tgt)?;

    let basis_e = Mat2::from_columns(e[0], e[1]);
    let basis_f = Mat2::from_columns(f[0], f[1]);
    let to_frame = |b: &Mat2<T>, d: &Mat2<T>| *b * *d * b.adjoint();
    let ops = conv.kraus.iter().map(|k| KrausOp(to_frame(&basis_e, k))).collect();
    let corrections = conv
        .swap
        .iter()
        .map(|&sw| {
            if sw {
                vec![
                    LocalUnitary::new(acting, to_frame(&basis_e, &Mat2::pauli_x())),
                    LocalUnitary::new(partner, to_frame(&basis_f, &Mat2::pauli_x())),
                ]
                .into_iter()
                .collect::<Result<Vec<_>>>()
            } else {
                Ok(Vec::new())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let m = LocalMeasurement::new(acting, ops)?.with_corrections(corrections)?;
    Ok((m, c_src))
}

/// Rounds that turn a canonical `x0 = 0` state into BC states of concurrence
/// `t`: Alice's Hadamard-basis measurement, then Bob's Nielsen conversion when
/// `C_a^(A)` exceeds `t`.
#[derive(Debug, Clone)]
pub struct AssistedConversion<T: Real> {
    pub rounds: Vec<LocalMeasurement<T>>,
    /// BC concurrence after the Hadamard round (equals `C_a^(A)`).
    pub assisted_concurrence: T,
}

pub fn assisted_conversion_plan<T: Real>(s: &WClassState<T>, t: T) -> Result<AssistedConversion<T>> {
    let ca = coa_closed_form(s, Party::A)?;
    let verdict = crate::entanglement::gour_feasible(ca, t);
    if !verdict.feasible {
        return Err(Error::Infeasible(format!("C_a^(A) = {ca} is below the target {t}")));
    }
    let had = hadamard_measurement(Party::A);
    let mut rounds = vec![had.clone()];
    if verdict.rounds == Some(2) {
        let after = apply(&embed(s), &had)?;
        let (nielsen, _) = nielsen_for_state(&after[0].state, Party::B, t)?;
        rounds.push(nielsen);
    }
    Ok(AssistedConversion { rounds, assisted_concurrence: ca })
}
