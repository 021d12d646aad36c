//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues of a general complex matrix from its complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let t = schur.unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Orthonormal basis of the numerical null space: right singular vectors
/// whose singular value is at most `rel_tol · σ_max`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= rel_tol * smax {
            out.push(v_t.row(i).adjoint().into_owned());
        }
    }
    // a wide matrix has extra null directions not listed among the singular values
    if m.nrows() < n && out.is_empty() {
        let k = svd.singular_values.len();
        for i in k..n.min(v_t.nrows()) {
            out.push(v_t.row(i).adjoint().into_owned());
        }
    }
    out
}

/// Right eigenvector for an isolated eigenvalue (smallest singular direction of `m − λI`).
pub fn eigenvector(m: &CMatrix, lambda: Complex64) -> CVector {
    let n = m.nrows();
    let shifted = m - CMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (imin, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    v_t.row(imin).adjoint().into_owned()
}

/// Eigenvalue clusters (within `tol` of each other, relative to the spectral
/// scale) with a basis of each cluster's eigenspace.
pub fn eigen_clusters(m: &CMatrix, tol: f64) -> Vec<(Complex64, Vec<CVector>)> {
    let n = m.nrows();
    let vals = eigenvalues(m);
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut used = vec![false; vals.len()];
    let mut out = Vec::new();
    for i in 0..vals.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![vals[i]];
        used[i] = true;
        for j in (i + 1)..vals.len() {
            if !used[j] && (vals[j] - vals[i]).norm() <= tol * scale {
                used[j] = true;
                members.push(vals[j]);
            }
        }
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        let shifted = m - CMatrix::identity(n, n) * mean;
        let mut basis = null_space(&shifted, 1e-9);
        if basis.is_empty() {
            basis.push(eigenvector(m, mean));
        }
        basis.truncate(members.len());
        out.push((mean, basis));
    }
    out
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
