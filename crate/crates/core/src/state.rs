//! Three-qubit pure states, W-class canonical coordinates and local unitaries.
//!
//! Amplitudes are indexed by the basis state `|abc⟩` at `4a + 2b + c`, with
//! party A on the most significant bit. A W-class state is identified with
//! its canonical coordinates `(x1, x2, x3)`, the weights of `|100⟩`, `|010⟩`
//! and `|001⟩`; the weight of `|000⟩` is `x0 = 1 − x1 − x2 − x3`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, principal_eigenvector, rotate_to_zero, schmidt, Mat2, C};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    /// Bit position of this party's qubit in an amplitude index.
    pub fn shift(self) -> usize {
        match self {
            Party::A => 2,
            Party::B => 1,
            Party::C => 0,
        }
    }

    /// Canonical coordinate index (A→1, B→2, C→3).
    pub fn coordinate(self) -> usize {
        match self {
            Party::A => 1,
            Party::B => 2,
            Party::C => 3,
        }
    }

    /// The two other parties, in A<B<C order.
    pub fn others(self) -> (Party, Party) {
        match self {
            Party::A => (Party::B, Party::C),
            Party::B => (Party::A, Party::C),
            Party::C => (Party::A, Party::B),
        }
    }

    /// The party not in `{self, other}`.
    pub fn third(self, other: Party) -> Party {
        Party::ALL
            .into_iter()
            .find(|p| *p != self && *p != other)
            .expect("parties are distinct")
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        };
        f.write_str(s)
    }
}

impl FromStr for Party {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" => Ok(Party::A),
            "B" => Ok(Party::B),
            "C" => Ok(Party::C),
            other => Err(format!("unknown party '{other}'")),
        }
    }
}

/// Amplitude index of the basis state with the given party bits.
pub fn basis_index(bits: [(Party, usize); 3]) -> usize {
    bits.iter().map(|(p, b)| b << p.shift()).sum()
}

/// A normalized three-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState3Q<T: Real> {
    amps: [C<T>; 8],
}

impl<T: Real> PureState3Q<T> {
    /// Wraps amplitudes that must already have unit norm (within 1e-12).
    pub fn new(amps: [C<T>; 8]) -> Result<Self> {
        let n = norm_sqr(&amps);
        if (n - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Domain(format!("state norm² is {}, expected 1", n.as_f64())));
        }
        Ok(Self { amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: [C<T>; 8]) -> Result<Self> {
        let n = norm_sqr(&amps).sqrt();
        if n <= T::zero() || !n.is_finite() {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(Self { amps: amps.map(|a| a / c(n)) })
    }

    pub(crate) fn from_raw_unchecked(amps: [C<T>; 8]) -> Self {
        Self { amps }
    }

    pub fn basis(index: usize) -> Self {
        let mut amps = [C::zero(); 8];
        amps[index] = C::one();
        Self { amps }
    }

    /// `(|000⟩ + |111⟩)/√2`.
    pub fn ghz() -> Self {
        let h = c(T::FRAC_1_SQRT_2());
        let mut amps = [C::zero(); 8];
        amps[0] = h;
        amps[7] = h;
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[C<T>; 8] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C<T> {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amps)
    }

    pub fn inner(&self, other: &Self) -> C<T> {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `1 − |⟨self|other⟩|`, zero iff equal up to global phase.
    pub fn phase_distance(&self, other: &Self) -> T {
        T::one() - self.inner(other).norm()
    }

    /// Largest amplitude difference after aligning global phase.
    pub fn max_diff_up_to_phase(&self, other: &Self) -> T {
        let ov = self.inner(other);
        let ph = if ov.norm() > T::zero() { ov / c(ov.norm()) } else { C::one() };
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (*a * ph - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Applies a local 2×2 operator without renormalizing.
    pub fn apply_op_raw(&self, party: Party, op: &Mat2<T>) -> [C<T>; 8] {
        apply_op(&self.amps, party, op)
    }

    /// Reduced density matrix of one party.
    pub fn reduced(&self, party: Party) -> Mat2<T> {
        let sh = party.shift();
        let mut rho = Mat2::zero();
        for i in 0..8 {
            if (i >> sh) & 1 != 0 {
                continue;
            }
            let j = i | (1 << sh);
            let a0 = self.amps[i];
            let a1 = self.amps[j];
            rho.0[0][0] = rho.0[0][0] + a0 * a0.conj();
            rho.0[0][1] = rho.0[0][1] + a0 * a1.conj();
            rho.0[1][0] = rho.0[1][0] + a1 * a0.conj();
            rho.0[1][1] = rho.0[1][1] + a1 * a1.conj();
        }
        rho
    }

    /// The two-party coefficient blocks `η_m` for `party` in state `m`.
    ///
    /// Rows index the first remaining party, columns the second (A<B<C order).
    pub fn split(&self, party: Party) -> [Mat2<T>; 2] {
        let (p, q) = party.others();
        let mut out = [Mat2::zero(); 2];
        for (m, block) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    block.0[i][j] = self.amps[basis_index([(party, m), (p, i), (q, j)])];
                }
            }
        }
        out
    }
}

pub(crate) fn norm_sqr<T: Real>(amps: &[C<T>; 8]) -> T {
    amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y)
}

pub(crate) fn apply_op<T: Real>(amps: &[C<T>; 8], party: Party, op: &Mat2<T>) -> [C<T>; 8] {
    let sh = party.shift();
    let mut out = [C::zero(); 8];
    for i in 0..8 {
        if (i >> sh) & 1 != 0 {
            continue;
        }
        let j = i | (1 << sh);
        let [n0, n1] = op.apply([amps[i], amps[j]]);
        out[i] = n0;
        out[j] = n1;
    }
    out
}

/// Canonical W-class coordinates `(x1, x2, x3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WClassState<T: Real> {
    x: [T; 3],
    x0: T,
}

impl<T: Real> WClassState<T> {
    /// `x0 = 1 − x1 − x2 − x3`; a remainder at rounding level is taken as zero.
    pub fn new(x1: T, x2: T, x3: T) -> Result<Self> {
        let xs = Self::check([x1, x2, x3])?;
        Ok(Self { x: xs, x0: Self::remainder(xs) })
    }

    fn remainder(xs: [T; 3]) -> T {
        let x0 = T::one() - xs[0] - xs[1] - xs[2];
        if x0 <= T::epsilon() * T::lit(8.0) {
            T::zero()
        } else {
            x0
        }
    }

    fn check(xs: [T; 3]) -> Result<[T; 3]> {
        let tol = T::tol(1e-12);
        if xs.iter().any(|v| !v.is_finite() || *v < -tol) {
            return Err(Error::Domain(format!(
                "W-class coordinates must be nonnegative, got ({}, {}, {})",
                xs[0], xs[1], xs[2]
            )));
        }
        let xs = xs.map(|v| v.max(T::zero()));
        if xs[0] + xs[1] + xs[2] > T::one() + tol {
            return Err(Error::Domain(format!(
                "W-class coordinates must sum to at most 1, got {}",
                (xs[0] + xs[1] + xs[2])
            )));
        }
        Ok(xs)
    }

    /// Normalizes nonnegative weights `(x0, x1, x2, x3)` to a state.
    pub fn from_weights(x0: T, x1: T, x2: T, x3: T) -> Result<Self> {
        let total = x0 + x1 + x2 + x3;
        if total.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) || x0 < T::zero() {
            return Err(Error::Domain("weights must be nonnegative with a positive sum".into()));
        }
        let xs = Self::check([x1 / total, x2 / total, x3 / total])?;
        Ok(Self { x: xs, x0: Self::remainder(xs) })
    }

    /// The W state `(1/3, 1/3, 1/3)`.
    pub fn w() -> Self {
        let third = T::one() / T::lit(3.0);
        Self { x: [third; 3], x0: T::zero() }
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn x1(&self) -> T {
        self.x[0]
    }

    pub fn x2(&self) -> T {
        self.x[1]
    }

    pub fn x3(&self) -> T {
        self.x[2]
    }

    pub fn coords(&self) -> [T; 3] {
        self.x
    }

    pub fn coord(&self, party: Party) -> T {
        self.x[party.coordinate() - 1]
    }

    /// Largest coordinate difference, `x0` included.
    pub fn max_diff(&self, other: &Self) -> T {
        (0..3)
            .map(|i| (self.x[i] - other.x[i]).abs())
            .fold((self.x0() - other.x0()).abs(), T::max)
    }
}

impl<T: Real> fmt::Display for WClassState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x[0], self.x[1], self.x[2])
    }
}

/// Real amplitudes `√x0|000⟩ + √x1|100⟩ + √x2|010⟩ + √x3|001⟩`.
pub fn embed<T: Real>(s: &WClassState<T>) -> PureState3Q<T> {
    let mut amps = [C::zero(); 8];
    amps[0] = c(s.x0().sqrt());
    amps[4] = c(s.x1().sqrt());
    amps[2] = c(s.x2().sqrt());
    amps[1] = c(s.x3().sqrt());
    PureState3Q::from_raw_unchecked(amps)
}

/// A single-party unitary; applying one never costs a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalUnitary<T: Real> {
    party: Party,
    matrix: Mat2<T>,
}

impl<T: Real> LocalUnitary<T> {
    pub fn new(party: Party, matrix: Mat2<T>) -> Result<Self> {
        let dev = matrix.gram().max_abs_diff(&Mat2::identity());
        if dev > T::tol(1e-10) {
            return Err(Error::NotUnitary { deviation: dev.as_f64() });
        }
        Ok(Self { party, matrix })
    }

    pub fn identity(party: Party) -> Self {
        Self { party, matrix: Mat2::identity() }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.matrix
    }
}

pub fn apply_local_unitary<T: Real>(psi: &PureState3Q<T>, u: &LocalUnitary<T>) -> PureState3Q<T> {
    PureState3Q::from_raw_unchecked(psi.apply_op_raw(u.party, &u.matrix))
}

/// Three-tangle `τ = 4|d1 − 2d2 + 4d3|` (Cayley hyperdeterminant).
pub fn three_tangle<T: Real>(psi: &PureState3Q<T>) -> T {
    let a = |i: usize| psi.amps[i];
    let (a000, a001, a010, a011) = (a(0), a(1), a(2), a(3));
    let (a100, a101, a110, a111) = (a(4), a(5), a(6), a(7));
    let d1 = a000 * a000 * a111 * a111
        + a001 * a001 * a110 * a110
        + a010 * a010 * a101 * a101
        + a100 * a100 * a011 * a011;
    let d2 = a000 * a111 * a011 * a100
        + a000 * a111 * a101 * a010
        + a000 * a111 * a110 * a001
        + a011 * a100 * a101 * a010
        + a011 * a100 * a110 * a001
        + a101 * a010 * a110 * a001;
    let d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;
    let two = c(T::lit(2.0));
    let four = c(T::lit(4.0));
    (d1 - two * d2 + four * d3).norm() * T::lit(4.0)
}

/// Result of [`canonicalize`].
#[derive(Debug, Clone, Copy)]
pub struct Canonical<T: Real> {
    pub state: WClassState<T>,
    /// Unitaries for A, B, C (in that order) taking the input to `embed(state)`.
    pub unitaries: [LocalUnitary<T>; 3],
    /// Weight left outside the four canonical slots (numerical residue).
    pub residual: T,
}

const CANONICAL_SLOTS: [usize; 4] = [0, 4, 2, 1];

/// True when the amplitudes are already real, nonnegative and confined to the
/// four canonical slots.
fn is_canonical_layout<T: Real>(psi: &PureState3Q<T>) -> bool {
    let off = [3usize, 5, 6, 7].iter().all(|&i| psi.amps[i] == C::zero());
    let on = CANONICAL_SLOTS
        .iter()
        .all(|&i| psi.amps[i].im == T::zero() && psi.amps[i].re >= T::zero());
    off && on
}

/// Reduces a W-class state (or a degeneration of one) to canonical form.
///
/// Genuinely tripartite states have a unique canonical form. Biseparable and
/// product inputs already in canonical layout are read off as-is; otherwise
/// they are mapped to the convention `x0 = 0`, unentangled party's coordinate
/// zero, with the larger Schmidt weight on the later party of the pair.
pub fn canonicalize<T: Real>(psi: &PureState3Q<T>) -> Result<Canonical<T>> {
    let ids = Party::ALL.map(LocalUnitary::identity);
    if is_canonical_layout(psi) {
        let w = CANONICAL_SLOTS.map(|i| psi.amps[i].re * psi.amps[i].re);
        let state = WClassState::from_weights(w[0], w[1], w[2], w[3])?;
        return Ok(Canonical { state, unitaries: ids, residual: T::zero() });
    }

    let tangle = three_tangle(psi);
    if tangle > T::tol(1e-8) {
        return Err(Error::NotWClass { tangle: tangle.as_f64() });
    }

    let deg = T::tol(1e-10);
    let entangled: Vec<bool> = Party::ALL
        .iter()
        .map(|&p| psi.reduced(p).det().re > deg)
        .collect();
    let n_entangled = entangled.iter().filter(|e| **e).count();

    let mut mats = [Mat2::identity(); 3];
    match n_entangled {
        0 | 1 => {
            for p in Party::ALL {
                let v = principal_eigenvector(&psi.reduced(p));
                mats[p.coordinate() - 1] = rotate_to_zero(v);
            }
        }
        2 => {
            let k = Party::ALL[entangled.iter().position(|e| !e).expect("one unentangled")];
            pair_frame(psi, k, &mut mats);
        }
        _ => genuine_frame(psi, &mut mats),
    }

    let mut amps = *psi.amplitudes();
    for p in Party::ALL {
        amps = apply_op(&amps, p, &mats[p.coordinate() - 1]);
    }

    // Phases: global phase on |000⟩, then one local phase per party.
    let tiny = T::tol(1e-14);
    let unit = |z: C<T>| if z.norm() > tiny { z.conj() / c(z.norm()) } else { C::one() };
    let g = unit(amps[0]);
    for p in Party::ALL {
        let slot = 1usize << p.shift();
        let ph = unit(amps[slot] * g);
        let m = &mut mats[p.coordinate() - 1];
        *m = Mat2::diag(C::one(), ph) * *m;
    }
    mats[0] = mats[0].scale(g);

    let mut amps = *psi.amplitudes();
    for p in Party::ALL {
        amps = apply_op(&amps, p, &mats[p.coordinate() - 1]);
    }
    let w = CANONICAL_SLOTS.map(|i| amps[i].norm_sqr());
    let residual = [3usize, 5, 6, 7].iter().map(|&i| amps[i].norm_sqr()).fold(T::zero(), |a, b| a + b);
    let state = WClassState::from_weights(w[0], w[1], w[2], w[3])?;
    let unitaries = [
        LocalUnitary { party: Party::A, matrix: mats[0] },
        LocalUnitary { party: Party::B, matrix: mats[1] },
        LocalUnitary { party: Party::C, matrix: mats[2] },
    ];
    Ok(Canonical { state, unitaries, residual })
}

/// Frame for `|a⟩_k ⊗ χ_ij`: rotate `k` to `|0⟩` and `χ` to
/// `√λmax|0_i 1_j⟩ + √λmin|1_i 0_j⟩`.
fn pair_frame<T: Real>(psi: &PureState3Q<T>, k: Party, mats: &mut [Mat2<T>; 3]) {
    let v = principal_eigenvector(&psi.reduced(k));
    mats[k.coordinate() - 1] = rotate_to_zero(v);
    let blocks = psi.split(k);
    let chi = blocks[0].scale(v[0].conj()) + blocks[1].scale(v[1].conj());
    let sd = schmidt(&chi);
    let (i, j) = k.others();
    let [u0, u1] = sd.left;
    let [w0, w1] = sd.right;
    mats[i.coordinate() - 1] = Mat2::new(u0[0].conj(), u0[1].conj(), u1[0].conj(), u1[1].conj());
    mats[j.coordinate() - 1] = Mat2::new(w1[0].conj(), w1[1].conj(), w0[0].conj(), w0[1].conj());
}

/// Frame for a genuinely tripartite W-class state.
///
/// Splitting over A as `|0⟩η₀ + |1⟩η₁`, the pencil `u·η₀ + v·η₁` contains a
/// single product direction (a double root of `det(u·R₀ + v·R₁) = 0`). That
/// direction becomes A's `|1⟩` branch and is rotated to `|00⟩` on B and C.
fn genuine_frame<T: Real>(psi: &PureState3Q<T>, mats: &mut [Mat2<T>; 3]) {
    let [r0, r1] = psi.split(Party::A);
    let qa = r0.det();
    let qc = r1.det();
    let qb = r0.get(0, 0) * r1.get(1, 1) + r1.get(0, 0) * r0.get(1, 1)
        - r0.get(0, 1) * r1.get(1, 0)
        - r1.get(0, 1) * r0.get(1, 0);
    let two = c(T::lit(2.0));
    let (u, v) = if qa.norm() >= qc.norm() { (-qb, two * qa) } else { (two * qc, -qb) };
    let n = (u.norm_sqr() + v.norm_sqr()).sqrt();
    let (u, v) = if n > T::zero() { (u / c(n), v / c(n)) } else { (C::zero(), C::one()) };
    mats[0] = Mat2::new(v.conj(), -u.conj(), u, v);

    let prod = r0.scale(u) + r1.scale(v);
    let mut best = (0, 0);
    for i in 0..2 {
        for j in 0..2 {
            if prod.get(i, j).norm() > prod.get(best.0, best.1).norm() {
                best = (i, j);
            }
        }
    }
    let col = [prod.get(0, best.1), prod.get(1, best.1)];
    let row = [prod.get(best.0, 0), prod.get(best.0, 1)];
    let unitize = |x: [C<T>; 2]| {
        crate::linalg::normalize2(x).unwrap_or([C::one(), C::zero()])
    };
    mats[1] = rotate_to_zero(unitize(col));
    mats[2] = rotate_to_zero(unitize(row));
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn ws(x1: f64, x2: f64, x3: f64) -> WClassState<f64> {
        WClassState::new(x1, x2, x3).unwrap()
    }

    #[test]
    fn embed_w_state() {
        let psi = embed(&WClassState::<f64>::w());
        let t = (1.0f64 / 3.0).sqrt();
        for (i, a) in psi.amplitudes().iter().enumerate() {
            let want = if [4, 2, 1].contains(&i) { t } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn embed_epr_and_product() {
        let psi = embed(&ws(0.5, 0.5, 0.0));
        assert!((psi.amp(4).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((psi.amp(2).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(psi.amp(1).re, 0.0);
        assert_eq!(psi.amp(0).re, 0.0);
        let prod = embed(&ws(0.0, 0.0, 0.0));
        assert_eq!(prod.amp(0).re, 1.0);
    }

    #[test]
    fn rejects_invalid_coordinates() {
        assert!(WClassState::new(-0.1, 0.5, 0.5).is_err());
        assert!(WClassState::new(0.5, 0.5, 0.5).is_err());
        assert!(WClassState::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn tangle_controls() {
        assert!(three_tangle(&embed(&WClassState::<f64>::w())) < 1e-10);
        assert!((three_tangle(&PureState3Q::<f64>::ghz()) - 1.0).abs() < 1e-12);
        assert!(three_tangle(&embed(&ws(0.25, 0.25, 0.5))) < 1e-10);
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let psi = embed(&ws(0.2, 0.3, 0.4));
        let h = LocalUnitary::new(Party::A, Mat2::hadamard()).unwrap();
        let back = apply_local_unitary(&apply_local_unitary(&psi, &h), &h);
        assert!(back.max_diff_up_to_phase(&psi) < 1e-15);
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(LocalUnitary::new(Party::B, Mat2::<f64>::diag_real(1.0, 0.5)).is_err());
    }

    #[test]
    fn canonicalize_fixed_point() {
        let s = ws(0.25, 0.25, 0.5);
        let can = canonicalize(&embed(&s)).unwrap();
        assert!(can.state.max_diff(&s) < 1e-15);
        for u in can.unitaries {
            assert_eq!(*u.matrix(), Mat2::identity());
        }
    }

    #[test]
    fn canonicalize_rejects_ghz() {
        assert!(matches!(canonicalize(&PureState3Q::<f64>::ghz()), Err(Error::NotWClass { .. })));
    }

    #[test]
    fn canonicalize_undoes_local_rotation() {
        let s = ws(0.15, 0.3, 0.35);
        let rot = |theta: f64, phi: f64| {
            Mat2::new(
                c(theta.cos()),
                Complex::from_polar(theta.sin(), phi),
                -Complex::from_polar(theta.sin(), -phi),
                c(theta.cos()),
            )
        };
        let mut psi = embed(&s);
        for (p, (th, ph)) in Party::ALL.iter().zip([(0.3, 0.1), (1.1, -0.7), (2.0, 0.4)]) {
            psi = apply_local_unitary(&psi, &LocalUnitary::new(*p, rot(th, ph)).unwrap());
        }
        let can = canonicalize(&psi).unwrap();
        assert!(can.state.max_diff(&s) < 1e-10, "{}", can.state);
        let mut back = psi;
        for u in &can.unitaries {
            back = apply_local_unitary(&back, u);
        }
        assert!(back.max_diff_up_to_phase(&embed(&s)) < 1e-9);
    }

    #[test]
    fn canonicalize_biseparable_convention() {
        // A in |+⟩, BC in a non-Schmidt layout.
        let h = 0.5f64.sqrt();
        let mut amps = [C::zero(); 8];
        let bc = [(0, 0.2f64), (2, 0.3), (1, 0.5)];
        for (slot, w) in bc {
            amps[slot] = c(h * w.sqrt());
            amps[slot + 4] = c(h * w.sqrt());
        }
        let psi = PureState3Q::new(amps).unwrap();
        let can = canonicalize(&psi).unwrap();
        assert_eq!(can.state.x1(), 0.0);
        assert!(can.state.x0() < 1e-12);
        assert!(can.state.x3() >= can.state.x2());
        // concurrence of the BC block: 2|a00 a11 − a01 a10| = 2√(0.3·0.5)
        let c_bc = 2.0 * (0.3f64 * 0.5).sqrt();
        assert!((2.0 * (can.state.x2() * can.state.x3()).sqrt() - c_bc).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let s = WClassState::<f32>::new(0.2, 0.3, 0.4).unwrap();
        let can = canonicalize(&embed(&s)).unwrap();
        assert!(can.state.max_diff(&s) < 1e-6);
        assert!(three_tangle(&embed(&s)) < 1e-6);
    }
}
