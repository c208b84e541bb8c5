//! Truncated symmetric Fock space over `C^m`.
//!
//! The one-particle space is spanned by fixed real orthonormal modes
//! `e_1..e_m`; vectors of it are [`HVec`]s. The Fock space keeps occupation
//! tuples `(n_1..n_m)` with total occupation at most the cutoff `N`, ordered
//! by total degree and then lexicographically.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra as na;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::ensure_same_dim;

pub use num_complex::Complex64 as C64;

pub type FockOp = na::DMatrix<C64>;
pub type FockVec = na::DVector<C64>;

pub const DEFAULT_DIMENSION_LIMIT: usize = 4096;

/// Element of the complexified one-particle space, as coefficients over the
/// real modes.
#[derive(Clone, Debug, PartialEq)]
pub struct HVec(pub Vec<C64>);

impl HVec {
    pub fn new(coeffs: Vec<C64>) -> Self {
        HVec(coeffs)
    }

    pub fn zeros(m: usize) -> Self {
        HVec(alloc::vec![C64::zero(); m])
    }

    /// The mode `e_j` (zero-based).
    pub fn mode(m: usize, j: usize) -> Self {
        let mut v = Self::zeros(m);
        v.0[j] = C64::new(1.0, 0.0);
        v
    }

    pub fn real(coeffs: &[f64]) -> Self {
        HVec(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    pub fn conj(&self) -> Self {
        HVec(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.norm() <= tol)
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &HVec) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(C64::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `Σ_j self_j other_j`, i.e. `⟨conj(self), other⟩`.
    pub fn bilinear(&self, other: &HVec) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(C64::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn scale(&self, c: C64) -> Self {
        HVec(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }
}

impl Add for &HVec {
    type Output = HVec;
    fn add(self, rhs: &HVec) -> HVec {
        HVec(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &HVec {
    type Output = HVec;
    fn sub(self, rhs: &HVec) -> HVec {
        HVec(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &HVec {
    type Output = HVec;
    fn neg(self) -> HVec {
        HVec(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<C64> for &HVec {
    type Output = HVec;
    fn mul(self, rhs: C64) -> HVec {
        self.scale(rhs)
    }
}

/// A pair `k = (k₁, k₂)` of one-particle vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionPair {
    pub k1: HVec,
    pub k2: HVec,
}

impl DirectionPair {
    pub fn new(k1: HVec, k2: HVec) -> Self {
        DirectionPair { k1, k2 }
    }

    pub fn zeros(m: usize) -> Self {
        DirectionPair { k1: HVec::zeros(m), k2: HVec::zeros(m) }
    }

    pub fn modes(&self) -> usize {
        self.k1.dim()
    }

    pub fn conj(&self) -> Self {
        DirectionPair { k1: self.k1.conj(), k2: self.k2.conj() }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.k1.is_real(tol) && self.k2.is_real(tol)
    }

    /// `⟨k₁,l₁⟩ + ⟨k₂,l₂⟩`.
    pub fn inner(&self, other: &DirectionPair) -> C64 {
        self.k1.inner(&other.k1) + self.k2.inner(&other.k2)
    }

    pub fn scale(&self, c: C64) -> Self {
        DirectionPair { k1: self.k1.scale(c), k2: self.k2.scale(c) }
    }

    pub fn norm_sqr(&self) -> f64 {
        let a = self.k1.norm();
        let b = self.k2.norm();
        a * a + b * b
    }

    /// `k₁ + i k₂`.
    pub fn complex_combination(&self) -> HVec {
        &self.k1 + &self.k2.scale(C64::i())
    }
}

impl Add for &DirectionPair {
    type Output = DirectionPair;
    fn add(self, rhs: &DirectionPair) -> DirectionPair {
        DirectionPair { k1: &self.k1 + &rhs.k1, k2: &self.k2 + &rhs.k2 }
    }
}

/// Occupation-number basis truncated by total occupation.
#[derive(Clone, Debug)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
    basis: Vec<Vec<u16>>,
    degrees: Vec<usize>,
    index: BTreeMap<Vec<u16>, usize>,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_limit(modes, cutoff, DEFAULT_DIMENSION_LIMIT)
    }

    pub fn with_limit(modes: usize, cutoff: usize, limit: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("mode count must be positive"));
        }
        let dim = binomial(cutoff + modes, modes);
        if dim > limit {
            return Err(Error::DimensionLimit { modes, cutoff, dim, limit });
        }
        let mut basis = Vec::with_capacity(dim);
        let mut degrees = Vec::with_capacity(dim);
        for degree in 0..=cutoff {
            let mut current = alloc::vec![0u16; modes];
            push_compositions(&mut basis, &mut current, 0, degree);
            degrees.resize(basis.len(), degree);
        }
        let index = basis.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(FockSpace { modes, cutoff, basis, degrees, index })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u16>] {
        &self.basis
    }

    pub fn tuple_of(&self, index: usize) -> &[u16] {
        &self.basis[index]
    }

    pub fn index_of(&self, tuple: &[u16]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    pub fn degree(&self, index: usize) -> usize {
        self.degrees[index]
    }

    pub fn check_modes(&self, h: &HVec) -> Result<()> {
        if h.dim() != self.modes {
            return Err(Error::ModeMismatch { expected: self.modes, found: h.dim() });
        }
        Ok(())
    }

    pub fn vacuum(&self) -> FockVec {
        let mut v = FockVec::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn identity(&self) -> FockOp {
        FockOp::identity(self.dim(), self.dim())
    }

    pub fn zero_op(&self) -> FockOp {
        FockOp::zeros(self.dim(), self.dim())
    }

    /// The degree-one vector `Σ_j h_j e_j`.
    pub fn one_particle(&self, h: &HVec) -> Result<FockVec> {
        self.check_modes(h)?;
        let mut v = FockVec::zeros(self.dim());
        if self.cutoff == 0 {
            return Ok(v);
        }
        for (j, c) in h.coeffs().iter().enumerate() {
            let mut t = alloc::vec![0u16; self.modes];
            t[j] = 1;
            v[self.index_of(&t).expect("degree-one tuple")] = *c;
        }
        Ok(v)
    }
}

// lexicographic ascending over (n_1, .., n_m) with fixed sum
fn push_compositions(out: &mut Vec<Vec<u16>>, current: &mut Vec<u16>, pos: usize, remaining: usize) {
    let m = current.len();
    if pos == m - 1 {
        current[pos] = remaining as u16;
        out.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[pos] = n as u16;
        push_compositions(out, current, pos + 1, remaining - n);
    }
    current[pos] = 0;
}

fn factorial(n: u16) -> f64 {
    (1..=n as u32).fold(1.0, |acc, k| acc * k as f64)
}

/// `ℰ(k) = Σ k^{⊗n}/√(n!)`, truncated at the cutoff and left unnormalized.
pub fn exponential_vector(space: &FockSpace, k: &HVec) -> Result<FockVec> {
    space.check_modes(k)?;
    let v = FockVec::from_iterator(
        space.dim(),
        space.basis().iter().map(|t| {
            t.iter().zip(k.coeffs()).fold(C64::new(1.0, 0.0), |acc, (&n, c)| {
                acc * c.powu(n as u32) / libm::sqrt(factorial(n))
            })
        }),
    );
    Ok(v)
}

/// `⟨v, w⟩`, conjugate-linear in `v`.
pub fn fock_inner(v: &FockVec, w: &FockVec) -> Result<C64> {
    ensure_same_dim(v.len(), w.len())?;
    Ok(v.dotc(w))
}

/// Orthogonal projector onto total degree `≤ d`.
pub fn interior_projector(space: &FockSpace, d: usize) -> Result<FockOp> {
    if d > space.cutoff() {
        return Err(Error::DegreeAboveCutoff { degree: d, cutoff: space.cutoff() });
    }
    let dim = space.dim();
    Ok(FockOp::from_fn(dim, dim, |i, j| {
        if i == j && space.degree(i) <= d {
            C64::new(1.0, 0.0)
        } else {
            C64::zero()
        }
    }))
}

/// `Π_d M Π_d` without forming the projectors.
pub fn compress(space: &FockSpace, m: &FockOp, d: usize) -> FockOp {
    let dim = space.dim();
    FockOp::from_fn(dim, dim, |i, j| {
        if space.degree(i) <= d && space.degree(j) <= d {
            m[(i, j)]
        } else {
            C64::zero()
        }
    })
}

/// Frobenius norm of `Π_d M Π_d`.
pub fn interior_norm(space: &FockSpace, m: &FockOp, d: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..space.dim() {
        if space.degree(i) > d {
            continue;
        }
        for j in 0..space.dim() {
            if space.degree(j) <= d {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    libm::sqrt(acc)
}

/// Upper bound on `Σ_{n>N} r^{2n}/n!`, namely `r^{2(N+1)}/(N+1)! · e^{r²}`.
pub fn truncation_tail_bound(norm: f64, cutoff: usize) -> f64 {
    if norm == 0.0 {
        return 0.0;
    }
    let r2 = norm * norm;
    let mut term = 1.0;
    for n in 1..=cutoff + 1 {
        term *= r2 / n as f64;
    }
    term * libm::exp(r2)
}
