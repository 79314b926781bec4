//! Small dense complex linear algebra for single-qubit operators and two-qubit
//! coefficient matrices.

use std::ops::{Add, Mul};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

pub type C<T> = Complex<T>;

pub(crate) fn c<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T: Real>(pub [[C<T>; 2]; 2]);

impl<T: Real> Mat2<T> {
    pub fn new(m00: C<T>, m01: C<T>, m10: C<T>, m11: C<T>) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn from_real(m00: T, m01: T, m10: T, m11: T) -> Self {
        Self::new(c(m00), c(m01), c(m10), c(m11))
    }

    pub fn identity() -> Self {
        Self::diag(C::one(), C::one())
    }

    pub fn zero() -> Self {
        Self::diag(C::zero(), C::zero())
    }

    pub fn diag(d0: C<T>, d1: C<T>) -> Self {
        Self::new(d0, C::zero(), C::zero(), d1)
    }

    pub fn diag_real(d0: T, d1: T) -> Self {
        Self::diag(c(d0), c(d1))
    }

    pub fn pauli_x() -> Self {
        Self::from_real(T::zero(), T::one(), T::one(), T::zero())
    }

    pub fn pauli_z() -> Self {
        Self::diag_real(T::one(), -T::one())
    }

    pub fn hadamard() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::from_real(h, h, h, -h)
    }

    /// Matrix whose columns are `u0`, `u1`.
    pub fn from_columns(u0: [C<T>; 2], u1: [C<T>; 2]) -> Self {
        Self::new(u0[0], u1[0], u0[1], u1[1])
    }

    pub fn get(&self, r: usize, col: usize) -> C<T> {
        self.0[r][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, k: C<T>) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * k, m[0][1] * k, m[1][0] * k, m[1][1] * k)
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn det(&self) -> C<T> {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn frobenius_sqr(&self) -> T {
        self.0.iter().flatten().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut d = T::zero();
        for r in 0..2 {
            for col in 0..2 {
                d = d.max((self.0[r][col] - other.0[r][col]).norm());
            }
        }
        d
    }

    /// `M†M`.
    pub fn gram(&self) -> Self {
        self.adjoint() * *self
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.gram().max_abs_diff(&Self::identity()) <= tol
    }

    /// Spectral norm, from the largest eigenvalue of `M†M`.
    pub fn spectral_norm(&self) -> T {
        let (hi, _) = hermitian_eigenvalues(&self.gram());
        hi.max(T::zero()).sqrt()
    }

    /// Unitary-upper-triangular split `M = Q·R` with `R` upper triangular and
    /// real nonnegative diagonal. Returns `(Q, R)`.
    pub fn qr(&self) -> (Self, Self) {
        let col0 = [self.0[0][0], self.0[1][0]];
        let col1 = [self.0[0][1], self.0[1][1]];
        let r00 = (col0[0].norm_sqr() + col0[1].norm_sqr()).sqrt();
        let q0 = if r00 > T::zero() {
            [col0[0] / c(r00), col0[1] / c(r00)]
        } else {
            [C::one(), C::zero()]
        };
        let mut q1 = orthogonal_complement(q0);
        let mut r11 = q1[0].conj() * col1[0] + q1[1].conj() * col1[1];
        let n11 = r11.norm();
        if n11 > T::zero() {
            let phase = r11 / c(n11);
            q1 = [q1[0] * phase, q1[1] * phase];
            r11 = c(n11);
        }
        let r01 = q0[0].conj() * col1[0] + q0[1].conj() * col1[1];
        let q = Self::from_columns(q0, q1);
        let r = Self::new(c(r00), r01, C::zero(), r11);
        (q, r)
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[C::zero(); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (col, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][col] + a[r][1] * b[1][col];
            }
        }
        Mat2(out)
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

/// Unit vector orthogonal to the unit vector `v` (fixed phase convention).
pub fn orthogonal_complement<T: Real>(v: [C<T>; 2]) -> [C<T>; 2] {
    [-v[1].conj(), v[0].conj()]
}

pub fn normalize2<T: Real>(v: [C<T>; 2]) -> Option<[C<T>; 2]> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n > T::zero() {
        Some([v[0] / c(n), v[1] / c(n)])
    } else {
        None
    }
}

/// Unitary sending the unit vector `v` to `|0⟩`.
pub fn rotate_to_zero<T: Real>(v: [C<T>; 2]) -> Mat2<T> {
    Mat2::new(v[0].conj(), v[1].conj(), -v[1], v[0])
}

/// Eigenvalues `(high, low)` of a Hermitian 2×2 matrix.
pub fn hermitian_eigenvalues<T: Real>(h: &Mat2<T>) -> (T, T) {
    let p = h.0[0][0].re;
    let q = h.0[1][1].re;
    let r = h.0[0][1];
    let half = T::lit(0.5);
    let mean = (p + q) * half;
    let rad = (((p - q) * half).powi(2) + r.norm_sqr()).sqrt();
    (mean + rad, mean - rad)
}

/// Unit eigenvector of the largest eigenvalue of a Hermitian 2×2 matrix.
pub fn principal_eigenvector<T: Real>(h: &Mat2<T>) -> [C<T>; 2] {
    let p = h.0[0][0].re;
    let q = h.0[1][1].re;
    let r = h.0[0][1];
    let (hi, _) = hermitian_eigenvalues(h);
    let v1 = [r, c(hi - p)];
    let v2 = [c(hi - q), r.conj()];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    let pick = if n1 >= n2 { v1 } else { v2 };
    normalize2(pick).unwrap_or_else(|| {
        if p >= q {
            [C::one(), C::zero()]
        } else {
            [C::zero(), C::one()]
        }
    })
}

/// Schmidt decomposition of a two-qubit coefficient matrix `chi[i][j]`
/// (first index: first qubit).
///
/// `chi = Σ_k σ_k · u_k w_kᵀ` with `σ_0 ≥ σ_1 ≥ 0`, orthonormal `u_k` and
/// orthonormal `w_k`.
#[derive(Debug, Clone, Copy)]
pub struct Schmidt<T: Real> {
    /// Squared Schmidt coefficients, descending.
    pub weights: [T; 2],
    pub left: [[C<T>; 2]; 2],
    pub right: [[C<T>; 2]; 2],
}

pub fn schmidt<T: Real>(chi: &Mat2<T>) -> Schmidt<T> {
    let h = *chi * chi.adjoint();
    let (hi, lo) = hermitian_eigenvalues(&h);
    let u0 = principal_eigenvector(&h);
    let u1 = orthogonal_complement(u0);
    let total = chi.frobenius_sqr();
    let hi = hi.max(T::zero()).min(total);
    let lo = lo.max(T::zero());
    // wᵀ = u† χ / σ
    let row = |u: [C<T>; 2]| -> [C<T>; 2] {
        [
            u[0].conj() * chi.0[0][0] + u[1].conj() * chi.0[1][0],
            u[0].conj() * chi.0[0][1] + u[1].conj() * chi.0[1][1],
        ]
    };
    let w0 = normalize2(row(u0)).unwrap_or([C::one(), C::zero()]);
    let w1 = orthogonal_complement(w0);
    // fold the phase of u1†χ ∝ w1ᵀ into u1
    let r1 = row(u1);
    let z = r1[0] * w1[0].conj() + r1[1] * w1[1].conj();
    let zn = z.norm();
    let u1 = if zn > T::zero() {
        let ph = z / c(zn);
        [u1[0] * ph, u1[1] * ph]
    } else {
        u1
    };
    Schmidt {
        weights: [hi, lo],
        left: [u0, u1],
        right: [w0, w1],
    }
}
