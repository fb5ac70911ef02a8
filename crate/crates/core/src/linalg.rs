//! Fixed-size matrix aliases and the handful of dense helpers shared by the
//! modules.

use nalgebra::{SMatrix, SVector};

pub type Vec3 = SVector<f64, 3>;
pub type Vec6 = SVector<f64, 6>;
pub type Mat3 = SMatrix<f64, 3, 3>;
pub type Mat6 = SMatrix<f64, 6, 6>;

pub fn norm_inf<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Ascending eigenvalues of the symmetric part `(A + Aᵀ)/2`.
pub fn sym_eigenvalues6(a: &Mat6) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    sorted(sym.symmetric_eigenvalues().iter().copied().collect())
}

pub fn sym_eigenvalues3(a: &Mat3) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    sorted(sym.symmetric_eigenvalues().iter().copied().collect())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

/// `‖A − Aᵀ‖∞ / ‖A‖∞`, zero for the zero matrix.
pub fn symmetry_defect<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    let scale = norm_inf(a);
    if scale == 0.0 {
        return 0.0;
    }
    norm_inf(&(a - a.transpose())) / scale
}

/// Determinant of the 3×3 matrix whose rows are `a`, `b`, `c`.
pub fn det_rows(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}
