//! Dense complex helpers shared by the simulator modules.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `q ⊗ b` with the qubit factor first.
pub fn qubit_kron(q: &Matrix2<Complex64>, b: &CMatrix) -> CMatrix {
    let d = b.nrows();
    let mut out = CMatrix::zeros(2 * d, 2 * d);
    for r in 0..2 {
        for c in 0..2 {
            let s = q[(r, c)];
            if s == ZERO {
                continue;
            }
            out.view_mut((r * d, c * d), (d, d)).copy_from(&(b * s));
        }
    }
    out
}

/// `q ⊗ I_d`.
pub fn qubit_op(q: &Matrix2<Complex64>, d: usize) -> CMatrix {
    qubit_kron(q, &identity(d))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `max |U†U - I|` elementwise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending is not
/// guaranteed.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(h));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Spectral norm. Hermitian inputs use the largest |eigenvalue|; anything
/// else goes through `A†A`.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    if hermiticity_defect(m) <= 1e-12 * scale {
        let (vals, _) = hermitian_eigen(m);
        vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
    } else {
        let (vals, _) = hermitian_eigen(&(m.adjoint() * m));
        vals.iter().copied().fold(0.0, f64::max).max(0.0).sqrt()
    }
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}
