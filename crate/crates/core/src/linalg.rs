//! Thin helpers over nalgebra for small dense complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn zeros(n: usize, m: usize) -> CMat {
    CMat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Determinant through partial-pivoting LU.
pub fn det(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Product of Euclidean row norms, the Hadamard bound on `|det m|`.
pub fn hadamard_bound(m: &CMat) -> f64 {
    m.row_iter().map(|r| r.norm()).product()
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().lu().try_inverse()
}

/// Numerical rank from singular values with a relative cutoff.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Orthonormal basis of the right null space, one vector per column.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let cols = m.ncols();
    // Pad to square so the SVD returns a full right factor.
    let mut sq = zeros(cols.max(m.nrows()), cols);
    sq.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= rel_tol * top.max(1e-300))
        .collect();
    let mut out = zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        for r in 0..cols {
            out[(r, c)] = v_t[(i, r)].conj();
        }
    }
    out
}
