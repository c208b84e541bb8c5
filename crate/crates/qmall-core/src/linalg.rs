//! Dense complex matrix helpers shared by the operator modules.

use nalgebra as na;
use num_complex::Complex64 as C64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type Mat = na::DMatrix<C64>;

/// `exp(iG)` for Hermitian `G`, through its eigendecomposition. The result is
/// unitary up to rounding.
pub fn exp_i_hermitian(g: &Mat) -> Mat {
    let eig = g.clone().symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| C64::new(0.0, l).exp());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
/// Used for the non-normal generators that appear with complex arguments.
pub fn expm(a: &Mat) -> Mat {
    let n = a.nrows();
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * C64::from(scale);
    let mut result = Mat::identity(n, n);
    let mut term = Mat::identity(n, n);
    for k in 1..=20 {
        term = &term * &x * C64::from(1.0 / k as f64);
        result += &term;
        if one_norm(&term) < 1e-18 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn one_norm(a: &Mat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn fro_norm(a: &Mat) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm, via the largest eigenvalue of `A*A`.
pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let g = a.adjoint() * a;
    let eig = g.symmetric_eigen();
    libm::sqrt(eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0))
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn anticommutator(a: &Mat, b: &Mat) -> Mat {
    a * b + b * a
}

pub fn hermitian_deviation(a: &Mat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn ensure_hermitian(a: &Mat, tol: f64) -> Result<()> {
    let deviation = hermitian_deviation(a);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

pub fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn trace(a: &Mat) -> C64 {
    (0..a.nrows().min(a.ncols())).fold(C64::zero(), |acc, i| acc + a[(i, i)])
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> C64 {
    let mut acc = C64::zero();
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(n: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| {
            C64::new(((i * 7 + j * 3) % 5) as f64 * 0.1, ((i + 2 * j) % 3) as f64 * 0.05)
        })
    }

    #[test]
    fn expm_matches_hermitian_route() {
        let a = sample(6);
        let h = (&a + a.adjoint()) * C64::from(0.5);
        let by_eig = exp_i_hermitian(&h);
        let by_taylor = expm(&(&h * C64::i()));
        assert!(max_abs(&(by_eig - by_taylor)) < 1e-12);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Mat::zeros(4, 4);
        assert!(max_abs(&(expm(&z) - Mat::identity(4, 4))) < 1e-15);
        assert!(max_abs(&(exp_i_hermitian(&z) - Mat::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn op_norm_of_diagonal() {
        let d = Mat::from_diagonal(&na::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, -3.0),
            C64::new(2.0, 0.0),
        ]));
        assert!((op_norm(&d) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_product_matches_product_trace() {
        let a = sample(5);
        let b = sample(5).adjoint();
        assert!((trace_product(&a, &b) - trace(&(&a * &b))).norm() < 1e-13);
    }
}
