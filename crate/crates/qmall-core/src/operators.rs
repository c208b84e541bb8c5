//! Ladder, position, momentum and Weyl operators, and the Gaussian states
//! obtained by second quantization of a contraction semigroup.
//!
//! Conventions: `a†(h)` is linear in `h`, `a(h)` is antilinear, so that
//! `[a(h), a†(k)] = ⟨h,k⟩` with the inner product conjugate-linear in its
//! first slot. `Q(h) = a(h̄) + a†(h)` and `P(h) = i(a(h̄) − a†(h))` are both
//! complex-linear.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{FockOp, FockSpace, HVec, C64};
use crate::linalg::{exp_i_hermitian, expm};

const REAL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
    Position,
    Momentum,
    Number,
}

/// `Σ_j (lower_j A_j + raise_j A_j†)`, where `A_j` lowers mode `j` by one.
pub fn linear_ladder(space: &FockSpace, lower: &[C64], raise: &[C64]) -> FockOp {
    let dim = space.dim();
    let mut op = FockOp::zeros(dim, dim);
    let mut scratch: Vec<u16> = Vec::with_capacity(space.modes());
    for col in 0..dim {
        for j in 0..space.modes() {
            let n = space.tuple_of(col)[j];
            if n == 0 {
                continue;
            }
            scratch.clear();
            scratch.extend_from_slice(space.tuple_of(col));
            scratch[j] -= 1;
            let row = space.index_of(&scratch).expect("lowered tuple stays in the space");
            let amp = libm::sqrt(n as f64);
            // A_j |n⟩ = √n_j |n − e_j⟩, and A_j† carries the transpose entry
            op[(row, col)] += lower[j] * amp;
            op[(col, row)] += raise[j] * amp;
        }
    }
    op
}

/// `A_j`, the lowering matrix of mode `j`.
pub fn mode_lowering(space: &FockSpace, j: usize) -> FockOp {
    let mut lower = alloc::vec![C64::zero(); space.modes()];
    lower[j] = C64::new(1.0, 0.0);
    linear_ladder(space, &lower, &alloc::vec![C64::zero(); space.modes()])
}

pub fn creation(space: &FockSpace, h: &HVec) -> Result<FockOp> {
    space.check_modes(h)?;
    Ok(linear_ladder(space, &HVec::zeros(space.modes()).0, h.coeffs()))
}

pub fn annihilation(space: &FockSpace, h: &HVec) -> Result<FockOp> {
    space.check_modes(h)?;
    Ok(linear_ladder(space, &h.conj().0, &HVec::zeros(space.modes()).0))
}

pub fn position(space: &FockSpace, h: &HVec) -> Result<FockOp> {
    space.check_modes(h)?;
    Ok(linear_ladder(space, h.coeffs(), h.coeffs()))
}

pub fn momentum(space: &FockSpace, h: &HVec) -> Result<FockOp> {
    space.check_modes(h)?;
    let i = C64::i();
    Ok(linear_ladder(space, &h.scale(i).0, &h.scale(-i).0))
}

/// `P(h₁) + Q(h₂)`, the generator of `U(h₁,h₂)`.
pub fn weyl_generator(space: &FockSpace, h1: &HVec, h2: &HVec) -> Result<FockOp> {
    space.check_modes(h1)?;
    space.check_modes(h2)?;
    let i = C64::i();
    let lower = &h1.scale(i) + h2;
    let raise = h2 - &h1.scale(i);
    Ok(linear_ladder(space, &lower.0, &raise.0))
}

/// Total number operator, diagonal in the occupation basis.
pub fn number(space: &FockSpace) -> FockOp {
    let dim = space.dim();
    FockOp::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(space.degree(i) as f64, 0.0)
        } else {
            C64::zero()
        }
    })
}

pub fn ladder(space: &FockSpace, kind: LadderKind, h: &HVec) -> Result<FockOp> {
    match kind {
        LadderKind::Create => creation(space, h),
        LadderKind::Annihilate => annihilation(space, h),
        LadderKind::Position => position(space, h),
        LadderKind::Momentum => momentum(space, h),
        LadderKind::Number => Ok(number(space)),
    }
}

/// `U(h₁,h₂) = exp(i(P(h₁)+Q(h₂)))`, exponentiating the truncated generator.
/// For real arguments the generator is Hermitian and the result unitary.
pub fn weyl(space: &FockSpace, h1: &HVec, h2: &HVec) -> Result<FockOp> {
    let g = weyl_generator(space, h1, h2)?;
    if h1.is_real(REAL_TOL) && h2.is_real(REAL_TOL) {
        Ok(exp_i_hermitian(&g))
    } else {
        Ok(expm(&(g * C64::i())))
    }
}

/// Compression `Π_N U(h₁,h₂) Π_N` of the untruncated Weyl operator, from
/// the closed-form displacement matrix elements. Real arguments only.
///
/// Unlike [`weyl`] this is not unitary, but its matrix elements are exact;
/// it is the right object when a state supported on the truncated space is
/// paired with large displacements.
pub fn weyl_compressed(space: &FockSpace, h1: &HVec, h2: &HVec) -> Result<FockOp> {
    space.check_modes(h1)?;
    space.check_modes(h2)?;
    if !(h1.is_real(REAL_TOL) && h2.is_real(REAL_TOL)) {
        return Err(Error::InvalidParameter("compressed Weyl operators need real arguments"));
    }
    let cutoff = space.cutoff();
    let tables: Vec<Vec<C64>> = (0..space.modes())
        .map(|j| displacement_table(C64::new(h1.0[j].re, h2.0[j].re), cutoff))
        .collect();
    let dim = space.dim();
    let width = cutoff + 1;
    Ok(FockOp::from_fn(dim, dim, |r, c| {
        let tr = space.tuple_of(r);
        let tc = space.tuple_of(c);
        let mut acc = C64::new(1.0, 0.0);
        for (j, table) in tables.iter().enumerate() {
            acc *= table[tr[j] as usize * width + tc[j] as usize];
        }
        acc
    }))
}

/// `⟨m|D(α)|n⟩` for `0 ≤ m,n ≤ cutoff`, row-major.
fn displacement_table(alpha: C64, cutoff: usize) -> Vec<C64> {
    let width = cutoff + 1;
    let x = alpha.norm_sqr();
    let gauss = libm::exp(-x / 2.0);
    let mut out = alloc::vec![C64::zero(); width * width];
    let log_fact: Vec<f64> = (0..=cutoff)
        .scan(0.0, |acc, k| {
            if k > 0 {
                *acc += libm::log(k as f64);
            }
            Some(*acc)
        })
        .collect();
    for m in 0..width {
        for n in 0..width {
            let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
            let order = (hi - lo) as f64;
            let lag = laguerre(lo, order, x);
            let ratio = libm::exp(0.5 * (log_fact[lo] - log_fact[hi]));
            let base = if m >= n { alpha } else { -alpha.conj() };
            out[m * width + n] = base.powu((hi - lo) as u32) * (ratio * gauss * lag);
        }
    }
    out
}

fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Analytic action on exponential vectors: `U(h₁,h₂)ℰ(f) = scalar · ℰ(argument)`,
/// with `scalar = exp(−⟨f̄, h₁ − ih₂⟩ − (⟨h̄₁,h₁⟩+⟨h̄₂,h₂⟩)/2)` and
/// `argument = f + h₁ + ih₂`.
pub fn weyl_on_exponential(h1: &HVec, h2: &HVec, f: &HVec) -> (C64, HVec) {
    let i = C64::i();
    let annihilated = h1 - &h2.scale(i);
    let scalar = (-f.bilinear(&annihilated) - (h1.bilinear(h1) + h2.bilinear(h2)) * 0.5).exp();
    let argument = &(f + h1) + &h2.scale(i);
    (scalar, argument)
}

/// The same action with the linear term written as `⟨f̄, h₁ + ih₂⟩`. Kept
/// only so the residual report can show that this form does not match the
/// operators.
pub fn weyl_on_exponential_plus_form(h1: &HVec, h2: &HVec, f: &HVec) -> (C64, HVec) {
    let i = C64::i();
    let z = h1 + &h2.scale(i);
    let scalar = (-f.bilinear(&z) - (h1.bilinear(h1) + h2.bilinear(h2)) * 0.5).exp();
    (scalar, f + &z)
}

/// Eigenvalues `λ_j > 0` of the generator and the time `t > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    lambdas: Vec<f64>,
    t: f64,
}

impl GaussianSpec {
    pub fn new(lambdas: Vec<f64>, t: f64) -> Result<Self> {
        if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidParameter("eigenvalues must be positive"));
        }
        if !(t > 0.0) {
            return Err(Error::InvalidParameter("time must be positive"));
        }
        Ok(GaussianSpec { lambdas, t })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `Z_t = Π_j 1/(1 − e^{−tλ_j})`.
    pub fn partition_exact(&self) -> f64 {
        self.lambdas.iter().map(|l| 1.0 / (1.0 - libm::exp(-self.t * l))).product()
    }

    /// Mean occupation `e^{−tλ}/(1 − e^{−tλ})` of each mode.
    pub fn mean_occupations(&self) -> Vec<f64> {
        self.lambdas
            .iter()
            .map(|l| {
                let q = libm::exp(-self.t * l);
                q / (1.0 - q)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SecondQuantization {
    /// `Γ(T_t)` restricted to the truncated space (unnormalized).
    pub rho: FockOp,
    pub z_truncated: f64,
    pub z_exact: f64,
    pub tail_gap: f64,
}

impl SecondQuantization {
    pub fn normalized(&self) -> FockOp {
        &self.rho / C64::new(self.z_truncated, 0.0)
    }
}

pub fn second_quantization(space: &FockSpace, spec: &GaussianSpec) -> Result<SecondQuantization> {
    if spec.lambdas.len() != space.modes() {
        return Err(Error::ModeMismatch { expected: space.modes(), found: spec.lambdas.len() });
    }
    let dim = space.dim();
    let diag: Vec<f64> = space
        .basis()
        .iter()
        .map(|t| {
            let exponent: f64 =
                t.iter().zip(&spec.lambdas).map(|(&n, l)| n as f64 * spec.t * l).sum();
            libm::exp(-exponent)
        })
        .collect();
    let z_truncated = diag.iter().sum::<f64>();
    let z_exact = spec.partition_exact();
    let rho = FockOp::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(diag[i], 0.0)
        } else {
            C64::zero()
        }
    });
    Ok(SecondQuantization { rho, z_truncated, z_exact, tail_gap: z_exact - z_truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{exponential_vector, interior_norm, FockVec};
    use crate::linalg::{commutator, max_abs};
    use alloc::vec;

    fn cplx(re: &[f64], im: &[f64]) -> HVec {
        HVec::new(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
    }

    #[test]
    fn single_mode_amplitudes() {
        let s = FockSpace::new(1, 4).unwrap();
        let e1 = HVec::mode(1, 0);
        let a = annihilation(&s, &e1).unwrap();
        let ad = creation(&s, &e1).unwrap();
        for n in 1..=4usize {
            assert!((a[(n - 1, n)].re - (n as f64).sqrt()).abs() < 1e-15);
        }
        for n in 0..4usize {
            assert!((ad[(n + 1, n)].re - ((n + 1) as f64).sqrt()).abs() < 1e-15);
        }
        // top level is annihilated by the truncated creator
        assert_eq!(ad.column(4).iter().filter(|z| z.norm() > 0.0).count(), 0);
    }

    #[test]
    fn linearity_and_antilinearity() {
        let s = FockSpace::new(2, 3).unwrap();
        let h = cplx(&[0.3, -0.1], &[0.2, 0.4]);
        let k = cplx(&[-0.5, 0.7], &[0.1, 0.0]);
        let alpha = C64::new(0.4, -1.2);
        let beta = C64::new(-0.3, 0.5);
        let combo = &h.scale(alpha) + &k.scale(beta);
        let lhs = creation(&s, &combo).unwrap();
        let rhs = creation(&s, &h).unwrap() * alpha + creation(&s, &k).unwrap() * beta;
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
        let lhs = annihilation(&s, &h.scale(alpha)).unwrap();
        let rhs = annihilation(&s, &h).unwrap() * alpha.conj();
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
        assert_eq!(creation(&s, &h).unwrap().adjoint(), annihilation(&s, &h).unwrap());
    }

    #[test]
    fn vacuum_images_of_q_and_p() {
        let s = FockSpace::new(2, 3).unwrap();
        let h = cplx(&[0.3, -0.1], &[0.2, 0.4]);
        let q = position(&s, &h).unwrap() * s.vacuum();
        let p = momentum(&s, &h).unwrap() * s.vacuum();
        let hv = s.one_particle(&h).unwrap();
        assert!((q - &hv).norm() < 1e-15);
        assert!((p - hv * (-C64::i())).norm() < 1e-15);
    }

    #[test]
    fn ccr_on_interior() {
        let s = FockSpace::new(2, 6).unwrap();
        let h = HVec::real(&[0.6, -0.3]);
        let k = HVec::real(&[0.2, 0.9]);
        let pq = commutator(&momentum(&s, &h).unwrap(), &position(&s, &k).unwrap());
        let expected = s.identity() * (C64::new(0.0, 2.0) * h.conj().inner(&k));
        assert!(interior_norm(&s, &(pq - expected), 4) < 1e-12);
        let hc = cplx(&[0.6, -0.3], &[0.1, 0.2]);
        let kc = cplx(&[0.2, 0.9], &[-0.4, 0.3]);
        let aa = commutator(&annihilation(&s, &hc).unwrap(), &creation(&s, &kc).unwrap());
        let expected = s.identity() * hc.inner(&kc);
        assert!(interior_norm(&s, &(aa - expected), 5) < 1e-12);
    }

    #[test]
    fn hermiticity_for_real_arguments() {
        let s = FockSpace::new(2, 4).unwrap();
        let h = HVec::real(&[0.5, 0.25]);
        let q = position(&s, &h).unwrap();
        let p = momentum(&s, &h).unwrap();
        assert!(max_abs(&(&q - q.adjoint())) < 1e-15);
        assert!(max_abs(&(&p - p.adjoint())) < 1e-15);
    }

    #[test]
    fn weyl_identity_and_unitarity() {
        let s = FockSpace::new(2, 5).unwrap();
        let z = HVec::zeros(2);
        assert!(max_abs(&(weyl(&s, &z, &z).unwrap() - s.identity())) < 1e-14);
        let u = weyl(&s, &HVec::real(&[0.3, -0.2]), &HVec::real(&[0.1, 0.4])).unwrap();
        assert!(max_abs(&(u.adjoint() * &u - s.identity())) < 1e-12);
    }

    #[test]
    fn weyl_vacuum_action_matches_closed_form() {
        let s = FockSpace::new(1, 12).unwrap();
        let h1 = HVec::real(&[0.3]);
        let h2 = HVec::real(&[0.4]);
        let (scalar, arg) = weyl_on_exponential(&h1, &h2, &HVec::zeros(1));
        assert!((scalar - C64::new((-0.125f64).exp(), 0.0)).norm() < 1e-15);
        assert!((arg.0[0] - C64::new(0.3, 0.4)).norm() < 1e-15);
        let u = weyl(&s, &h1, &h2).unwrap();
        let lhs = &u * s.vacuum();
        let rhs = exponential_vector(&s, &arg).unwrap() * scalar;
        assert!((lhs - &rhs).norm() / rhs.norm() < 1e-6);
    }

    #[test]
    fn compressed_weyl_matches_generator_route_on_low_block() {
        let s = FockSpace::new(1, 40).unwrap();
        let h1 = HVec::real(&[0.4]);
        let h2 = HVec::real(&[-0.3]);
        let a = weyl(&s, &h1, &h2).unwrap();
        let b = weyl_compressed(&s, &h1, &h2).unwrap();
        assert!(interior_norm(&s, &(a - b), 10) < 1e-12);
    }

    #[test]
    fn compressed_weyl_vacuum_column_is_coherent() {
        let s = FockSpace::new(2, 6).unwrap();
        let h1 = HVec::real(&[0.7, -0.2]);
        let h2 = HVec::real(&[0.1, 0.5]);
        let u = weyl_compressed(&s, &h1, &h2).unwrap();
        let (scalar, arg) = weyl_on_exponential(&h1, &h2, &HVec::zeros(2));
        let expected: FockVec = exponential_vector(&s, &arg).unwrap() * scalar;
        assert!((u.column(0) - expected).norm() < 1e-14);
    }

    #[test]
    fn exponential_action_of_generator_weyl() {
        let s = FockSpace::new(1, 30).unwrap();
        let h1 = HVec::real(&[0.2]);
        let h2 = HVec::real(&[-0.25]);
        let f = cplx(&[0.3], &[0.2]);
        let u = weyl(&s, &h1, &h2).unwrap();
        let lhs = u * exponential_vector(&s, &f).unwrap();
        let (scalar, arg) = weyl_on_exponential(&h1, &h2, &f);
        let rhs = exponential_vector(&s, &arg).unwrap() * scalar;
        let low = (lhs - &rhs).rows(0, 16).norm();
        assert!(low / rhs.norm() < 1e-10, "{low}");
        let (scalar_plus, _) = weyl_on_exponential_plus_form(&h1, &h2, &f);
        assert!((scalar_plus - scalar).norm() > 1e-3);
    }

    #[test]
    fn gaussian_state_trace() {
        let s = FockSpace::new(1, 16).unwrap();
        let spec = GaussianSpec::new(vec![1.0], 1.0).unwrap();
        let g = second_quantization(&s, &spec).unwrap();
        assert!((g.z_exact - 1.0 / (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let bound = (-17.0f64).exp() / (1.0 - (-1.0f64).exp());
        // the gap equals the bound here, so allow for rounding in the subtraction
        assert!(g.tail_gap >= 0.0 && g.tail_gap <= bound + 1e-14);
        let s2 = FockSpace::new(2, 4).unwrap();
        let spec2 = GaussianSpec::new(vec![1.0, 2.0], 0.5).unwrap();
        let g2 = second_quantization(&s2, &spec2).unwrap();
        let idx = s2.index_of(&[2, 1]).unwrap();
        assert!((g2.rho[(idx, idx)].re - (-2.0f64).exp()).abs() < 1e-15);
        let big = GaussianSpec::new(vec![1.0, 2.0], 60.0).unwrap();
        let g3 = second_quantization(&s2, &big).unwrap();
        assert!((g3.z_truncated - 1.0).abs() < 1e-20 + 1e-12);
        assert!(GaussianSpec::new(vec![0.0], 1.0).is_err());
        assert!(GaussianSpec::new(vec![1.0], -1.0).is_err());
    }

    #[test]
    fn gaussian_state_commutes_with_number() {
        let s = FockSpace::new(2, 4).unwrap();
        let spec = GaussianSpec::new(vec![0.5, 1.5], 0.7).unwrap();
        let g = second_quantization(&s, &spec).unwrap();
        assert!(max_abs(&commutator(&g.rho, &number(&s))) < 1e-15);
        assert!(g.rho.iter().all(|z| z.re >= 0.0 && z.im == 0.0));
    }
}
