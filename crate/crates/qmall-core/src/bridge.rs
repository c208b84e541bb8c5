//! Classical Wiener functionals `e^{iW(h)}` as the multiplication operators
//! `U(0,h) = e^{iQ(h)}`, and the classical derivative along `k` as `D_{(0,k)}`.

use crate::error::{Error, Result};
use crate::fock::{DirectionPair, FockOp, FockSpace, HVec, C64};
use crate::malliavin::derive_direction;
use crate::operators::weyl;

const REAL_TOL: f64 = 1e-14;

/// The functional `e^{iW(h)}` for real `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalExponential {
    pub h: HVec,
}

impl ClassicalExponential {
    pub fn new(h: HVec) -> Result<Self> {
        if !h.is_real(REAL_TOL) {
            return Err(Error::InvalidParameter("classical exponentials need a real direction"));
        }
        Ok(ClassicalExponential { h })
    }

    /// `e^{iW(h)} e^{iW(h')} = e^{iW(h+h')}`: classically the product is exact.
    pub fn product(&self, other: &ClassicalExponential) -> ClassicalExponential {
        ClassicalExponential { h: &self.h + &other.h }
    }
}

pub fn embed(space: &FockSpace, c: &ClassicalExponential) -> Result<FockOp> {
    weyl(space, &HVec::zeros(c.h.dim()), &c.h)
}

/// `D_{(0,k)}(U(0,h)) − i⟨k,h⟩U(0,h)`.
pub fn classical_derivative_check(space: &FockSpace, k: &HVec, h: &HVec) -> Result<FockOp> {
    if !k.is_real(REAL_TOL) {
        return Err(Error::InvalidParameter("classical directions must be real"));
    }
    let u = embed(space, &ClassicalExponential::new(h.clone())?)?;
    let d = derive_direction(space, &DirectionPair::new(HVec::zeros(k.dim()), k.clone()), &u)?;
    let expected = &u * (C64::i() * k.inner(h));
    Ok(d - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{exponential_vector, interior_norm};
    use crate::linalg::{commutator, max_abs};

    #[test]
    fn zero_embeds_as_identity() {
        let s = FockSpace::new(2, 4).unwrap();
        let e = embed(&s, &ClassicalExponential::new(HVec::zeros(2)).unwrap()).unwrap();
        assert!(max_abs(&(e - s.identity())) < 1e-15);
        assert!(ClassicalExponential::new(HVec::new(alloc::vec![C64::new(0.0, 1.0)])).is_err());
    }

    #[test]
    fn vacuum_image_is_a_coherent_vector() {
        let s = FockSpace::new(1, 20).unwrap();
        let h = HVec::real(&[0.4]);
        let e = embed(&s, &ClassicalExponential::new(h.clone()).unwrap()).unwrap();
        let expected = exponential_vector(&s, &h.scale(C64::i())).unwrap() * C64::new(libm::exp(-0.08), 0.0);
        assert!(((e * s.vacuum()) - expected).norm() < 1e-12);
    }

    #[test]
    fn derivative_along_the_same_direction() {
        let s = FockSpace::new(1, 20).unwrap();
        let e1 = HVec::mode(1, 0);
        let r = classical_derivative_check(&s, &e1, &e1).unwrap();
        assert!(interior_norm(&s, &r, 8) < 1e-9);
    }

    #[test]
    fn orthogonal_directions_give_zero() {
        let s = FockSpace::new(2, 16).unwrap();
        let k = HVec::mode(2, 0);
        let h = HVec::real(&[0.0, 0.7]);
        let r = classical_derivative_check(&s, &k, &h).unwrap();
        assert!(interior_norm(&s, &r, 6) < 1e-12, "{}", interior_norm(&s, &r, 6));
        let c = commutator(
            &embed(&s, &ClassicalExponential::new(h.clone()).unwrap()).unwrap(),
            &embed(&s, &ClassicalExponential::new(h.scale_re(-2.0)).unwrap()).unwrap(),
        );
        assert!(max_abs(&c) < 1e-12);
    }
}
