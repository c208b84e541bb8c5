//! States on the truncated operator algebra.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{FockOp, FockSpace, FockVec, C64};
use crate::linalg::{ensure_same_dim, hermitian_deviation, trace, trace_product};

const VECTOR_NORM_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Vector(FockVec),
    Density(FockOp),
}

impl State {
    pub fn vacuum(space: &FockSpace) -> Self {
        State::Vector(space.vacuum())
    }

    pub fn vector(omega: FockVec) -> Result<Self> {
        if (omega.norm() - 1.0).abs() > VECTOR_NORM_TOL {
            return Err(Error::InvalidState("vector state is not normalized"));
        }
        Ok(State::Vector(omega))
    }

    /// Normalizes `omega` first; errors if it vanishes.
    pub fn vector_normalized(omega: FockVec) -> Result<Self> {
        let n = omega.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector"));
        }
        Ok(State::Vector(omega / C64::new(n, 0.0)))
    }

    pub fn density(rho: FockOp) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::InvalidState("density matrix is not square"));
        }
        if hermitian_deviation(&rho) > DENSITY_TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian"));
        }
        if (trace(&rho).re - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidState("density matrix does not have unit trace"));
        }
        let min = rho.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::InvalidState("density matrix is not positive semidefinite"));
        }
        Ok(State::Density(rho))
    }

    pub fn dim(&self) -> usize {
        match self {
            State::Vector(v) => v.len(),
            State::Density(r) => r.nrows(),
        }
    }

    /// `Φ(X)`: `⟨ω, Xω⟩` or `tr(ρX)`.
    pub fn expectation(&self, x: &FockOp) -> Result<C64> {
        ensure_same_dim(self.dim(), x.nrows())?;
        ensure_same_dim(self.dim(), x.ncols())?;
        Ok(match self {
            State::Vector(v) => v.dotc(&(x * v)),
            State::Density(r) => trace_product(r, x),
        })
    }

    /// `tr(ρX)` computed in the eigenbasis of `ρ` instead of entrywise.
    pub fn expectation_eigenbasis(&self, x: &FockOp) -> Result<C64> {
        ensure_same_dim(self.dim(), x.nrows())?;
        match self {
            State::Vector(_) => self.expectation(x),
            State::Density(r) => {
                let eig = r.clone().symmetric_eigen();
                let mut acc = C64::zero();
                for (j, p) in eig.eigenvalues.iter().enumerate() {
                    let v = eig.eigenvectors.column(j);
                    acc += v.dotc(&(x * v)) * *p;
                }
                Ok(acc)
            }
        }
    }
}

/// Vacuum expectation `𝔼(X) = ⟨Ω, XΩ⟩`.
pub fn vacuum_expectation(x: &FockOp) -> C64 {
    x[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::HVec;
    use crate::operators::{position, second_quantization, GaussianSpec};
    use alloc::vec;

    #[test]
    fn identity_has_unit_expectation() {
        let s = FockSpace::new(2, 3).unwrap();
        let id = s.identity();
        assert_eq!(State::vacuum(&s).expectation(&id).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(vacuum_expectation(&id), C64::new(1.0, 0.0));
    }

    #[test]
    fn validation() {
        let s = FockSpace::new(1, 2).unwrap();
        assert!(State::vector(s.vacuum() * C64::new(2.0, 0.0)).is_err());
        assert!(State::vector_normalized(s.vacuum() * C64::new(2.0, 0.0)).is_ok());
        assert!(State::density(s.identity()).is_err());
        let mut bad = s.zero_op();
        bad[(0, 0)] = C64::new(2.0, 0.0);
        bad[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(State::density(bad).is_err());
    }

    #[test]
    fn position_second_moment_in_vacuum() {
        let s = FockSpace::new(1, 6).unwrap();
        let q = position(&s, &HVec::mode(1, 0)).unwrap();
        let st = State::vacuum(&s);
        assert!(st.expectation(&q).unwrap().norm() < 1e-15);
        assert!((st.expectation(&(&q * &q)).unwrap().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_trace_routes_agree() {
        let s = FockSpace::new(2, 4).unwrap();
        let g = second_quantization(&s, &GaussianSpec::new(vec![0.8, 1.3], 0.9).unwrap()).unwrap();
        let st = State::density(g.normalized()).unwrap();
        let x = position(&s, &HVec::real(&[0.4, -0.7])).unwrap();
        let x2 = &x * &x;
        let a = st.expectation(&x2).unwrap();
        let b = st.expectation_eigenbasis(&x2).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}
