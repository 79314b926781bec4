//! Independent reference code for integration tests: a brute-force
//! eight-amplitude simulator that shares nothing with the crate's state or
//! measurement modules, plus random generators.
#![allow(dead_code)]

pub mod checks;
pub mod corpus;

use num_complex::Complex64;
use rand::Rng;
use wlocc::linalg::Mat2;
use wlocc::{LocalUnitary, Party, PureState3Q, WClassState};

pub type Amp = [Complex64; 8];
pub type Op = [[Complex64; 2]; 2];

pub const A: usize = 4;
pub const B: usize = 2;
pub const C: usize = 1;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn diag(a: f64, b: f64) -> Op {
    [[c(a), c(0.0)], [c(0.0), c(b)]]
}

/// `√x0|000⟩ + √x1|100⟩ + √x2|010⟩ + √x3|001⟩`.
pub fn canonical_amp(x0: f64, x1: f64, x2: f64, x3: f64) -> Amp {
    let mut a = [c(0.0); 8];
    a[0] = c(x0.sqrt());
    a[A] = c(x1.sqrt());
    a[B] = c(x2.sqrt());
    a[C] = c(x3.sqrt());
    a
}

pub fn w_amp() -> Amp {
    canonical_amp(0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
}

/// `op` on the qubit selected by `mask`, unnormalized.
pub fn act(amp: &Amp, mask: usize, op: &Op) -> Amp {
    let mut out = [c(0.0); 8];
    for i in 0..8 {
        if i & mask != 0 {
            continue;
        }
        let (v0, v1) = (amp[i], amp[i | mask]);
        out[i] = op[0][0] * v0 + op[0][1] * v1;
        out[i | mask] = op[1][0] * v0 + op[1][1] * v1;
    }
    out
}

pub fn norm2(amp: &Amp) -> f64 {
    amp.iter().map(|z| z.norm_sqr()).sum()
}

pub fn normalize(amp: &Amp) -> Amp {
    let n = norm2(amp).sqrt();
    amp.map(|z| z / n)
}

/// Probability and normalized post-state of one Kraus outcome.
pub fn outcome(amp: &Amp, mask: usize, op: &Op) -> (f64, Amp) {
    let raw = act(amp, mask, op);
    let p = norm2(&raw);
    (p, if p > 0.0 { normalize(&raw) } else { raw })
}

pub fn wpp(x: f64) -> [Op; 2] {
    [diag(x.sqrt(), 0.0), diag((1.0 - x).sqrt(), 1.0)]
}

pub fn hadamard_projectors() -> [Op; 2] {
    let h = c(0.5);
    [[[h, h], [h, h]], [[h, -h], [-h, h]]]
}

/// `Σ M†M` minus the identity, largest entry modulus.
pub fn completeness_gap(ops: &[Op]) -> f64 {
    let mut s = [[c(0.0); 2]; 2];
    for m in ops {
        for (i, row) in s.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
            }
        }
    }
    let mut gap: f64 = 0.0;
    for (i, row) in s.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            gap = gap.max((*e - c(if i == j { 1.0 } else { 0.0 })).norm());
        }
    }
    gap
}

/// `ρ` of the qubit selected by `mask`.
pub fn reduced(amp: &Amp, mask: usize) -> Op {
    let mut r = [[c(0.0); 2]; 2];
    for i in 0..8 {
        for j in 0..8 {
            if i & !mask == j & !mask {
                let (bi, bj) = (usize::from(i & mask != 0), usize::from(j & mask != 0));
                r[bi][bj] += amp[i] * amp[j].conj();
            }
        }
    }
    r
}

/// Concurrence between the two qubits other than `excluded`, valid when the
/// excluded qubit is in a product with them: `2√det ρ` of either member.
pub fn pair_concurrence(amp: &Amp, excluded: usize) -> f64 {
    let member = [A, B, C].into_iter().find(|&m| m != excluded).expect("three qubits");
    let r = reduced(amp, member);
    let det = (r[0][0] * r[1][1] - r[0][1] * r[1][0]).re;
    2.0 * det.max(0.0).sqrt()
}

/// Purity defect of one qubit: 0 when it factors out.
pub fn entanglement_of(amp: &Amp, mask: usize) -> f64 {
    let r = reduced(amp, mask);
    (r[0][0] * r[1][1] - r[0][1] * r[1][0]).re.max(0.0)
}

/// `(x0, x1, x2, x3)` of a vector supported on the four canonical slots with
/// real nonnegative entries.
pub fn read_canonical(amp: &Amp) -> Option<[f64; 4]> {
    for i in [3, 5, 6, 7] {
        if amp[i].norm() > 1e-12 {
            return None;
        }
    }
    let slots = [0, A, B, C];
    if slots.iter().any(|&i| amp[i].im.abs() > 1e-12 || amp[i].re < -1e-12) {
        return None;
    }
    Some(slots.map(|i| amp[i].norm_sqr()))
}

/// Closed-form parameters, computed here from scratch.
pub fn alpha(t: f64) -> f64 {
    let r = (1.0 - t * t).sqrt();
    2.0 * r / (1.0 + r)
}

pub fn sigma(t: f64) -> f64 {
    let v = (1.0 + (1.0 - 2.0 * t * t).max(0.0).sqrt()) / (2.0 * t);
    v * v
}

/// Brute-force walk of the four-round protocol.
pub struct FourRound {
    pub p_ab: f64,
    pub p_ac: f64,
    pub p_bc: f64,
    /// BC halt mass at round 2.
    pub round2: f64,
    /// States entering rounds 2, 3 and 4.
    pub chain: [Amp; 3],
    /// Concurrences of the BC halt states.
    pub bc_concurrences: Vec<f64>,
    /// `entanglement_of` the excluded qubit at every halt.
    pub halt_defects: Vec<f64>,
}

pub fn four_round(t: f64) -> FourRound {
    let a = alpha(t);
    let beta = 1.0 - (1.0 - a) * sigma(t);
    let psi0 = w_amp();
    let [c0, c1] = wpp(a);
    let (p_ab, s_ab) = outcome(&psi0, C, &c0);
    let (q1, phi2) = outcome(&psi0, C, &c1);
    let [a0, a1] = wpp(a);
    let (p_r2, s_r2) = outcome(&phi2, A, &a0);
    let (q2, phi22) = outcome(&phi2, A, &a1);
    let [b0, b1] = wpp(beta);
    let (p_r3, s_r3) = outcome(&phi22, B, &b0);
    let (q3, phi222) = outcome(&phi22, B, &b1);
    let [h0, h1] = hadamard_projectors();
    let (p_h0, s_h0) = outcome(&phi222, A, &h0);
    let (p_h1, s_h1) = outcome(&phi222, A, &h1);
    let round2 = q1 * p_r2;
    let bc4 = q1 * q2 * q3 * (p_h0 + p_h1);
    FourRound {
        p_ab,
        p_ac: q1 * q2 * p_r3,
        p_bc: round2 + bc4,
        round2,
        chain: [phi2, phi22, phi222],
        bc_concurrences: vec![pair_concurrence(&s_r2, A), pair_concurrence(&s_h0, A), pair_concurrence(&s_h1, A)],
        halt_defects: vec![
            entanglement_of(&s_ab, C),
            entanglement_of(&s_r2, A),
            entanglement_of(&s_r3, B),
            entanglement_of(&s_h0, A),
            entanglement_of(&s_h1, A),
        ],
    }
}

/// Best average pair concurrence over `samples` random projective
/// measurements by the qubit `mask`; never exceeds the true maximum.
pub fn sampled_assistance(amp: &Amp, mask: usize, samples: usize, rng: &mut impl Rng) -> f64 {
    let others: Vec<usize> = [A, B, C].into_iter().filter(|&m| m != mask).collect();
    let (hi, lo) = (others[0], others[1]);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let theta = z.acos() / 2.0;
        let u = [c(theta.cos()), Complex64::from_polar(theta.sin(), phi)];
        let v = [-u[1].conj(), u[0].conj()];
        let mut avg = 0.0;
        for w in [u, v] {
            // ⟨w|_mask ψ as a two-qubit block, `p·C = 2|det|` unnormalized.
            let mut m = [[c(0.0); 2]; 2];
            for (i, a) in amp.iter().enumerate() {
                let (k, x, y) = (usize::from(i & mask != 0), usize::from(i & hi != 0), usize::from(i & lo != 0));
                m[x][y] += w[k].conj() * a;
            }
            avg += 2.0 * (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
        }
        best = best.max(avg);
    }
    best
}

pub fn to_amp(psi: &PureState3Q) -> Amp {
    *psi.amplitudes()
}

pub fn mask_of(p: Party) -> usize {
    match p {
        Party::A => A,
        Party::B => B,
        Party::C => C,
    }
}

/// Haar-distributed 2×2 unitary.
pub fn random_unitary(rng: &mut impl Rng) -> Mat2<f64> {
    let u: f64 = rng.random();
    let theta = u.sqrt().asin();
    let [a, b, g]: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let ph = e(g);
    Mat2::new(
        ph * e(a) * theta.cos(),
        ph * e(b) * theta.sin(),
        -ph * e(-b) * theta.sin(),
        ph * e(-a) * theta.cos(),
    )
}

pub fn random_lu(rng: &mut impl Rng) -> [LocalUnitary; 3] {
    Party::ALL.map(|p| LocalUnitary::new(p, random_unitary(rng)).expect("unitary"))
}

/// Canonical coordinates bounded away from the biseparable boundary.
pub fn random_w_class(rng: &mut impl Rng, with_x0: bool) -> WClassState {
    loop {
        let w: [f64; 4] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
        let x0 = if with_x0 { w[0] } else { 0.0 };
        let total = x0 + w[1] + w[2] + w[3];
        let x = [w[1] / total, w[2] / total, w[3] / total];
        if x.iter().all(|&v| v > 0.02) {
            return WClassState::from_weights(x0 / total, x[0], x[1], x[2]).expect("valid weights");
        }
    }
}

/// Complete two-outcome Kraus pair `{U·diag(cos a, cos b)·V, U'·diag(sin a, sin b)·V}`.
pub fn random_measurement(rng: &mut impl Rng) -> [Mat2<f64>; 2] {
    let a: f64 = rng.random_range(0.05..1.5);
    let b: f64 = rng.random_range(0.05..1.5);
    let (u1, u2, v) = (random_unitary(rng), random_unitary(rng), random_unitary(rng));
    [
        mul(&mul(&u1, &Mat2::diag_real(a.cos(), b.cos())), &v),
        mul(&mul(&u2, &Mat2::diag_real(a.sin(), b.sin())), &v),
    ]
}

pub fn mul(x: &Mat2<f64>, y: &Mat2<f64>) -> Mat2<f64> {
    let mut out = [[c(0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = x.0[i][0] * y.0[0][j] + x.0[i][1] * y.0[1][j];
        }
    }
    Mat2(out)
}

pub fn random_party(rng: &mut impl Rng) -> Party {
    Party::ALL[rng.random_range(0..3)]
}

pub fn op_of(m: &Mat2<f64>) -> Op {
    m.0
}
