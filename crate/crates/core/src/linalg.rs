//! Dense Hermitian helpers over nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub(crate) fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn eigvalsh(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// `V diag(f(values)) V^dagger`.
pub(crate) fn spectral_map(values: &[f64], vectors: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, c)] * f(values[c]));
    scaled * vectors.adjoint()
}

/// Square root of the PSD part.
pub(crate) fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = eigh(m);
    spectral_map(&vals, &vecs, |x| x.max(0.0).sqrt())
}

/// Frobenius-nearest PSD matrix: clip negative eigenvalues.
pub(crate) fn project_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = eigh(m);
    spectral_map(&vals, &vecs, |x| x.max(0.0))
}

pub(crate) fn op_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0f64, |a, &b| a.max(b))
}

/// Columns of `vectors` whose eigenvalue is above `cutoff`.
pub(crate) fn columns_where(values: &[f64], vectors: &DMatrix<C64>, keep: impl Fn(f64) -> bool) -> DMatrix<C64> {
    let cols: Vec<usize> = (0..values.len()).filter(|&i| keep(values[i])).collect();
    DMatrix::from_fn(vectors.nrows(), cols.len(), |r, c| vectors[(r, cols[c])])
}

/// Row-major vectorization, `vec(X)[i*n + j] = X[i][j]`.
pub(crate) fn vec_row_major(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_iterator(m.len(), (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])))
}

/// Coordinates of a Hermitian `r x r` matrix in the orthonormal (real,
/// Frobenius) basis `E_ii`, `(E_ij + E_ji)/sqrt2`, `i(E_ij - E_ji)/sqrt2`.
pub(crate) fn herm_to_coords(m: &DMatrix<C64>) -> DVector<f64> {
    let r = m.nrows();
    let mut out = DVector::zeros(r * r);
    let s = std::f64::consts::SQRT_2;
    let mut k = 0;
    for i in 0..r {
        out[k] = m[(i, i)].re;
        k += 1;
    }
    for i in 0..r {
        for j in i + 1..r {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[k] = s * v.re;
            out[k + 1] = s * v.im;
            k += 2;
        }
    }
    out
}

pub(crate) fn coords_to_herm(x: &DVector<f64>, r: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(r, r);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for i in 0..r {
        m[(i, i)] = C64::new(x[k], 0.0);
        k += 1;
    }
    for i in 0..r {
        for j in i + 1..r {
            let v = C64::new(x[k] * s, x[k + 1] * s);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
            k += 2;
        }
    }
    m
}
