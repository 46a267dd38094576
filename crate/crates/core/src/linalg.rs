//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::{CMatrix, CVector};

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Largest entry magnitude, `max |a_ij|`.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// `max |A - A^H|`; zero for an exactly Hermitian matrix.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn trace_re(a: &CMatrix) -> f64 {
    a.trace().re
}

/// Real part of `tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted in
/// descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(a: &CMatrix) -> Self {
        let eig = SymmetricEigen::new(hermitian_part(a));
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `U diag(f(λ)) U^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self, values: &[f64]) -> CMatrix {
        assert_eq!(values.len(), self.values.len());
        let n = values.len();
        let mut scaled = self.vectors.clone();
        for (c, &s) in values.iter().enumerate() {
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Euclidean projection of `values` onto the scaled simplex
/// `{x : x_i >= 0, Σ x_i = total}`.
pub fn project_simplex(values: &[f64], total: f64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = sorted[0] - total;
    for (k, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - total) / (k + 1) as f64;
        if x - candidate > 0.0 {
            shift = candidate;
        } else {
            break;
        }
    }
    values.iter().map(|&x| (x - shift).max(0.0)).collect()
}

/// Outer product `a b^T` (no conjugation).
pub fn outer_t(a: &CVector, b: &CVector) -> CMatrix {
    a * b.transpose()
}

/// Unit-modulus phasor `e^{j·phase}`.
#[inline]
pub fn phasor(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}
