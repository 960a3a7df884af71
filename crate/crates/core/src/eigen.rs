//! Jacobian eigenvalues for small systems.
//!
//! The Jacobian is formed by central differences, its characteristic
//! polynomial by Faddeev–LeVerrier, and the roots by Durand–Kerner.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::EvalError;
use crate::field::{ComplexVector, VectorField};

/// Largest dimension handled by [`jacobian_spectrum`].
pub const MAX_EIGEN_DIM: usize = 6;
const MAX_ROOT_ITERATIONS: usize = 500;
const ROOT_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("dimension {0} exceeds the supported maximum of {MAX_EIGEN_DIM}")]
    Unsupported(usize),
    #[error("root finding did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Eigenvalues of `DF` at a point, sorted by real part, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianSpectrum {
    pub point: ComplexVector,
    pub eigenvalues: Vec<Complex64>,
}

impl JacobianSpectrum {
    /// `lambda / (2 pi)`: cycles per unit imaginary time.
    pub fn frequencies(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|l| l / TAU).collect()
    }
}

pub type Matrix = Vec<Vec<Complex64>>;

/// Central-difference Jacobian with step `1e-6 * max(1, |z_k|)` per column.
pub fn jacobian(field: &VectorField, z: &ComplexVector) -> Result<Matrix, EvalError> {
    let n = field.dim();
    let mut jac = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut plus = ComplexVector::zeros(n);
    let mut minus = ComplexVector::zeros(n);
    let mut probe = z.clone();
    for k in 0..n {
        let h = 1e-6 * z[k].norm().max(1.0);
        probe[k] = z[k] + h;
        field.eval_into(&probe, &mut plus)?;
        probe[k] = z[k] - h;
        field.eval_into(&probe, &mut minus)?;
        probe[k] = z[k];
        for i in 0..n {
            jac[i][k] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Characteristic polynomial coefficients `c[0..=n]` (ascending, `c[n] = 1`)
/// of `det(lambda I - A)` via Faddeev–LeVerrier.
pub fn characteristic_polynomial(a: &Matrix) -> Vec<Complex64> {
    let n = a.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut coeffs = vec![zero; n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut m = vec![vec![zero; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        m = next;
        let am = mat_mul(a, &m);
        let trace: Complex64 = (0..n).map(|i| am[i][i]).sum();
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Roots of a monic polynomial by Durand–Kerner iteration.
///
/// Converged when every root satisfies `|p(r)| < 1e-10 * max(1, sum |c_k| |r|^k)`.
pub fn durand_kerner(coeffs: &[Complex64]) -> Result<Vec<Complex64>, EigenError> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    // Cauchy bound on root moduli sets the starting circle.
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, TAU * k as f64 / n as f64 + 0.4))
        .collect();
    let abs_coeffs: Vec<f64> = monic.iter().map(|c| c.norm()).collect();
    let converged = |roots: &[Complex64]| {
        roots.iter().all(|&r| {
            let scale = abs_coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * r.norm() + c)
                .max(1.0);
            horner(&monic, r).norm() < ROOT_RESIDUAL * scale
        })
    };
    for _ in 0..MAX_ROOT_ITERATIONS {
        if converged(&roots) {
            return Ok(roots);
        }
        for i in 0..n {
            let ri = roots[i];
            let denom: Complex64 = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &rj)| ri - rj)
                .product();
            if denom.norm() == 0.0 {
                roots[i] = ri + Complex64::new(1e-8, 1e-8) * radius;
                continue;
            }
            roots[i] = ri - horner(&monic, ri) / denom;
        }
    }
    if converged(&roots) {
        Ok(roots)
    } else {
        Err(EigenError::NoConvergence(MAX_ROOT_ITERATIONS))
    }
}

/// Eigenvalues of the Jacobian of `field` at `z`.
pub fn jacobian_spectrum(
    field: &VectorField,
    z: &ComplexVector,
) -> Result<JacobianSpectrum, EigenError> {
    let n = field.dim();
    if n > MAX_EIGEN_DIM {
        return Err(EigenError::Unsupported(n));
    }
    let jac = jacobian(field, z)?;
    let coeffs = characteristic_polynomial(&jac);
    let mut eigenvalues = durand_kerner(&coeffs)?;
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(JacobianSpectrum {
        point: z.clone(),
        eigenvalues,
    })
}
