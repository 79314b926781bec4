//! Concurrence, concurrence of assistance and the conversion predicates built
//! on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, principal_eigenvector, Mat2, C};
use crate::scalar::Real;
use crate::state::{Party, PureState3Q, WClassState};

/// Equality slack for the concurrence-of-assistance condition.
pub const GOUR_EQUALITY_TOL: f64 = 1e-9;

/// Squared Schmidt coefficients of a two-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmidtPair<T: Real> {
    pub lambda_max: T,
    pub lambda_min: T,
}

impl<T: Real> SchmidtPair<T> {
    pub fn new(lambda_max: T, lambda_min: T) -> Result<Self> {
        let tol = T::tol(1e-12);
        let in_range = |v: T| v >= -tol && v <= T::one() + tol;
        if !in_range(lambda_max) || !in_range(lambda_min) {
            return Err(Error::Domain("Schmidt weights must lie in [0, 1]".into()));
        }
        if (lambda_max + lambda_min - T::one()).abs() > tol {
            return Err(Error::Domain("Schmidt weights must sum to 1".into()));
        }
        if lambda_max < lambda_min - tol {
            return Err(Error::Domain("lambda_max must not be below lambda_min".into()));
        }
        Ok(Self { lambda_max: lambda_max.max(T::zero()), lambda_min: lambda_min.max(T::zero()) })
    }

    pub fn concurrence(&self) -> T {
        T::lit(2.0) * (self.lambda_max * self.lambda_min).max(T::zero()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    AB,
    AC,
    BC,
}

impl PairLabel {
    pub fn parties(self) -> (Party, Party) {
        match self {
            PairLabel::AB => (Party::A, Party::B),
            PairLabel::AC => (Party::A, Party::C),
            PairLabel::BC => (Party::B, Party::C),
        }
    }

    pub fn excluded(self) -> Party {
        match self {
            PairLabel::AB => Party::C,
            PairLabel::AC => Party::B,
            PairLabel::BC => Party::A,
        }
    }

    pub fn without(party: Party) -> Self {
        match party {
            Party::A => PairLabel::BC,
            Party::B => PairLabel::AC,
            Party::C => PairLabel::AB,
        }
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairLabel::AB => "AB",
            PairLabel::AC => "AC",
            PairLabel::BC => "BC",
        };
        f.write_str(s)
    }
}

impl FromStr for PairLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "AB" => Ok(PairLabel::AB),
            "AC" => Ok(PairLabel::AC),
            "BC" => Ok(PairLabel::BC),
            other => Err(format!("unknown pair '{other}'")),
        }
    }
}

/// `C = 2|a00·a11 − a01·a10|` for a normalized two-qubit state
/// `[a00, a01, a10, a11]`.
pub fn concurrence_pure2q<T: Real>(amps: &[C<T>; 4]) -> Result<T> {
    let n: T = amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y);
    if (n - T::one()).abs() > T::tol(1e-10) {
        return Err(Error::Domain(format!("two-qubit state norm² is {}, expected 1", n)));
    }
    Ok(unnormalized_concurrence(amps).min(T::one()))
}

/// `2|a00·a11 − a01·a10|` without a norm check; scales with the squared norm.
pub(crate) fn unnormalized_concurrence<T: Real>(amps: &[C<T>; 4]) -> T {
    (amps[0] * amps[3] - amps[1] * amps[2]).norm() * T::lit(2.0)
}

/// Extracts the state of `pair` when the excluded party is unentangled.
///
/// Amplitudes are ordered `[|00⟩, |01⟩, |10⟩, |11⟩]` over the pair in A<B<C
/// order.
pub fn pair_state_of<T: Real>(psi: &PureState3Q<T>, pair: PairLabel) -> Result<[C<T>; 4]> {
    let k = pair.excluded();
    let rho = psi.reduced(k);
    let impurity = rho.det().re;
    if impurity > T::tol(1e-9) {
        return Err(Error::Extraction {
            pair: pair.to_string(),
            reason: format!("party {k} is entangled with the pair (det ρ = {:.3e})", impurity.as_f64()),
        });
    }
    let v = principal_eigenvector(&rho);
    let blocks = psi.split(k);
    let chi = blocks[0].scale(v[0].conj()) + blocks[1].scale(v[1].conj());
    let amps = [chi.get(0, 0), chi.get(0, 1), chi.get(1, 0), chi.get(1, 1)];
    let n = amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt();
    Ok(amps.map(|a| a / c(n)))
}

/// Concurrence of the pair left after `party` is traced out; errors when the
/// excluded party is entangled.
pub fn pair_concurrence<T: Real>(psi: &PureState3Q<T>, pair: PairLabel) -> Result<T> {
    concurrence_pure2q(&pair_state_of(psi, pair)?)
}

/// Concurrence of assistance `C_a^(k)` with `assisting` as the helper.
///
/// Defined as `Σᵢ √eigᵢ(ρ ρ̃)` for the reduced pair state `ρ` and its spin
/// flip `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`. For a pure tripartite state `ρ = V V†` with
/// `V = [v₀ v₁]` the unnormalized pair blocks, and the nonzero spectrum of
/// `ρρ̃` equals that of `τ τ̄` with `τ_mn = v_mᵀ (σy⊗σy) v_n`. The sum of
/// square roots is therefore the trace norm of the 2×2 matrix `τ`.
pub fn concurrence_of_assistance<T: Real>(psi: &PureState3Q<T>, assisting: Party) -> T {
    let v = psi.split(assisting);
    let flip = |a: &Mat2<T>, b: &Mat2<T>| -> C<T> {
        -a.get(0, 0) * b.get(1, 1) + a.get(0, 1) * b.get(1, 0) + a.get(1, 0) * b.get(0, 1)
            - a.get(1, 1) * b.get(0, 0)
    };
    let tau = Mat2::new(flip(&v[0], &v[0]), flip(&v[0], &v[1]), flip(&v[1], &v[0]), flip(&v[1], &v[1]));
    trace_norm(&tau)
}

/// Sum of singular values: `√(‖M‖_F² + 2|det M|)`.
pub(crate) fn trace_norm<T: Real>(m: &Mat2<T>) -> T {
    (m.frobenius_sqr() + T::lit(2.0) * m.det().norm()).max(T::zero()).sqrt()
}

/// `2√(x_i x_j)` over the non-assisting indices; only valid when `x0 = 0`.
pub fn coa_closed_form<T: Real>(s: &WClassState<T>, assisting: Party) -> Result<T> {
    if s.x0() > T::tol(1e-10) {
        return Err(Error::Domain(format!(
            "closed-form concurrence of assistance needs x0 = 0, got {}",
            s.x0()
        )));
    }
    let (i, j) = assisting.others();
    Ok(T::lit(2.0) * (s.coord(i) * s.coord(j)).sqrt())
}

/// `2√(x2·(x0 + x3))`, an upper bound on `C_a^(A)`.
pub fn coa_upper_bound<T: Real>(s: &WClassState<T>) -> T {
    T::lit(2.0) * (s.x2() * (s.x0() + s.x3())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GourVerdict {
    pub feasible: bool,
    /// 1 at equality, 2 with slack; `None` when infeasible.
    pub rounds: Option<u8>,
}

/// Deterministic assisted conversion `ψ_ijk → φ_ij` is possible iff
/// `C_a^(k)(ψ) ≥ C(φ)`; one round at equality, two otherwise.
pub fn gour_feasible<T: Real>(ca: T, t: T) -> GourVerdict {
    let tol = T::tol(GOUR_EQUALITY_TOL);
    if (ca - t).abs() <= tol {
        GourVerdict { feasible: true, rounds: Some(1) }
    } else if ca > t {
        GourVerdict { feasible: true, rounds: Some(2) }
    } else {
        GourVerdict { feasible: false, rounds: None }
    }
}

/// Deterministic bipartite conversion by concurrence ordering.
pub fn nielsen_feasible<T: Real>(c_src: T, c_tgt: T) -> bool {
    c_src >= c_tgt - T::tol(1e-12)
}

fn check_unit<T: Real>(c: T, what: &str) -> Result<T> {
    let tol = T::tol(1e-12);
    if !(c >= -tol && c <= T::one() + tol) {
        return Err(Error::Domain(format!("{what} must lie in [0, 1], got {c}")));
    }
    Ok(c.max(T::zero()).min(T::one()))
}

/// Best probability of turning a pure two-qubit state of concurrence `c`
/// into a Bell pair: `1 − √(1 − c²) = 2·λmin`.
pub fn bell_conversion_prob<T: Real>(c: T) -> Result<T> {
    let c = check_unit(c, "concurrence")?;
    Ok(T::one() - (T::one() - c * c).max(T::zero()).sqrt())
}

/// `λ± = (1 ± √(1 − c²))/2`.
pub fn schmidt_of_concurrence<T: Real>(c: T) -> Result<SchmidtPair<T>> {
    let c = check_unit(c, "concurrence")?;
    let r = (T::one() - c * c).max(T::zero()).sqrt();
    let half = T::lit(0.5);
    Ok(SchmidtPair { lambda_max: half * (T::one() + r), lambda_min: half * (T::one() - r) })
}
