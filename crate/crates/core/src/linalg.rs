//! Small dense helpers shared by the propagator and the spectrum code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Eigen-decomposition of a real symmetric matrix, kept around to
/// exponentiate it for several step sizes or apply it to vectors.
#[derive(Debug, Clone)]
pub struct SymmetricExp {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SymmetricExp {
    pub fn new(h: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        SymmetricExp {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    fn phases(&self, dt: f64) -> DVector<Complex64> {
        self.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * dt))
    }

    /// `exp(-i H dt)` as a dense matrix.
    pub fn unitary(&self, dt: f64) -> DMatrix<Complex64> {
        let phases = self.phases(dt);
        let mut scaled = self.eigenvectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *p;
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `exp(-i H dt) ψ` without forming the matrix.
    pub fn apply(&self, dt: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut coeffs = self.eigenvectors.ad_mul(psi);
        coeffs.component_mul_assign(&self.phases(dt));
        &self.eigenvectors * coeffs
    }
}

/// `max |U†U - I|`.
pub fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let mut g = u.ad_mul(u);
    for i in 0..g.nrows() {
        g[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    max_abs(&g)
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
