//! Small dense complex matrices for the 2×2 and 4×4 problems in this crate.
//!
//! Row-major storage, no allocation tricks; the dimensions here are 2 or 4 and
//! every routine is a handful of flops, so clarity wins over cleverness.

use num_complex::Complex64 as C64;
use std::ops::{Index, IndexMut};

/// Square complex matrix of small dimension (2 or 4 in practice).
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice of length n².
    pub fn from_rows(n: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        CMat { n, data: entries.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                out[i] += self[(i, j)] * v[j];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference |self − other|.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖U†U − I‖_max; zero for exactly unitary matrices.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMat::identity(self.n))
    }

    /// ‖H − H†‖_max; zero for exactly Hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Determinant of a 2×2 matrix.
    pub fn det2(&self) -> C64 {
        assert_eq!(self.n, 2, "det2 requires a 2x2 matrix");
        self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)]
    }

    /// Largest entrywise difference after removing a global phase, i.e.
    /// min over φ of ‖self − e^{iφ}·other‖_max. The phase is fixed from the
    /// largest entry of `other`.
    pub fn max_abs_diff_up_to_phase(&self, other: &CMat) -> f64 {
        let (mut best, mut idx) = (0.0, 0);
        for (k, x) in other.data.iter().enumerate() {
            if x.norm() > best {
                best = x.norm();
                idx = k;
            }
        }
        if best == 0.0 {
            return self.max_abs_diff(other);
        }
        let phase = (self.data[idx] / other.data[idx]).arg();
        let rotated = other.scale(C64::from_polar(1.0, phase));
        self.max_abs_diff(&rotated)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// σ₁, σ₂, σ₃ in the standard representation (σ₃ = diag(1, −1)).
pub fn pauli(k: usize) -> CMat {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        1 => CMat::from_rows(2, &[o, one, one, o]),
        2 => CMat::from_rows(2, &[o, -i, i, o]),
        3 => CMat::from_rows(2, &[one, o, o, -one]),
        _ => panic!("pauli index must be 1, 2 or 3"),
    }
}

/// Kronecker product of two 2×2 matrices.
pub fn kron2(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.dim(), 2);
    assert_eq!(b.dim(), 2);
    let mut out = CMat::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// σ·f = f₁σ₁ + f₂σ₂ + f₃σ₃ as an explicit 2×2 Hermitian matrix.
pub fn sigma_dot(f1: f64, f2: f64, f3: f64) -> CMat {
    CMat::from_rows(
        2,
        &[
            C64::new(f3, 0.0),
            C64::new(f1, -f2),
            C64::new(f1, f2),
            C64::new(-f3, 0.0),
        ],
    )
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_unitary() {
        assert_eq!(CMat::identity(4).unitarity_defect(), 0.0);
    }

    #[test]
    fn pauli_algebra() {
        // σ₁σ₂ = iσ₃ and cyclic
        let s1 = pauli(1);
        let s2 = pauli(2);
        let s3 = pauli(3);
        let i = C64::new(0.0, 1.0);
        assert!(s1.mul(&s2).max_abs_diff(&s3.scale(i)) < 1e-15);
        assert!(s2.mul(&s3).max_abs_diff(&s1.scale(i)) < 1e-15);
        assert!(s3.mul(&s1).max_abs_diff(&s2.scale(i)) < 1e-15);
        for k in 1..=3 {
            assert!(pauli(k).mul(&pauli(k)).max_abs_diff(&CMat::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn kron_identity() {
        let id2 = CMat::identity(2);
        assert!(kron2(&id2, &id2).max_abs_diff(&CMat::identity(4)) < 1e-15);
    }

    #[test]
    fn sigma_dot_hermitian() {
        let m = sigma_dot(0.3, -1.2, 0.7);
        assert_eq!(m.hermiticity_defect(), 0.0);
        // (σ·f)² = |f|² I
        let f2 = 0.3f64.powi(2) + 1.2f64.powi(2) + 0.7f64.powi(2);
        let sq = m.mul(&m);
        assert!(sq.max_abs_diff(&CMat::identity(2).scale(C64::new(f2, 0.0))) < 1e-14);
    }

    #[test]
    fn phase_insensitive_diff() {
        let m = sigma_dot(0.1, 0.2, 0.9);
        let rotated = m.scale(C64::from_polar(1.0, 1.234));
        assert!(m.max_abs_diff_up_to_phase(&rotated) < 1e-14);
        assert!(m.max_abs_diff(&rotated) > 0.1);
    }
}
