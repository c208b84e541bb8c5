//! The divergence `δ` on elementary fields `u = Σ F_j ⊗ h^{(j)}`: the
//! anticommutator definition, the normal-ordered form, exponential-vector
//! matrix elements, the commutation relation with `D`, product formulas,
//! the no-go value and iterated divergences.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{exponential_vector, DirectionPair, FockOp, FockSpace, HVec, C64};
use crate::linalg::ensure_same_dim;
use crate::malliavin::{derive_direction, gradient, module_inner, two_sided_gradient, GradientSide, ModuleElement};
use crate::operators::{annihilation, creation, weyl_generator};
use crate::state::vacuum_expectation;

/// Rank-one module element whose divergence is taken.
pub type ElementaryField = ModuleElement;

pub const DEFAULT_MAX_ITERATED: usize = 4;

/// `g = h₂ − ih₁`, the creation argument of `δ(F ⊗ h)`.
pub fn creation_argument(h: &DirectionPair) -> HVec {
    &h.k2 - &h.k1.scale(C64::i())
}

/// `conj(h₂ + ih₁)`, the annihilation argument of `δ(F ⊗ h)`.
pub fn annihilation_argument(h: &DirectionPair) -> HVec {
    (&h.k2 + &h.k1.scale(C64::i())).conj()
}

/// `(1/2)Σ{P(h₁)+Q(h₂), F} − Σ D_h F`.
pub fn divergence_def(space: &FockSpace, u: &ElementaryField) -> Result<FockOp> {
    let mut acc = space.zero_op();
    for (f, h) in u.pairs()? {
        ensure_same_dim(space.dim(), f.nrows())?;
        let x = weyl_generator(space, &h.k1, &h.k2)?;
        acc += (&x * f + f * &x) * C64::new(0.5, 0.0);
        acc -= derive_direction(space, h, f)?;
    }
    Ok(acc)
}

/// `Σ a†(h₂ − ih₁) F + F a(conj(h₂ + ih₁))`.
pub fn divergence_wick(space: &FockSpace, u: &ElementaryField) -> Result<FockOp> {
    wick_with(space, u, annihilation_argument)
}

/// The same normal-ordered form with `a(conj(h₂ − ih₁))` on the right, for
/// comparison only: it does not agree with [`divergence_def`] unless `h₁ = 0`.
pub fn divergence_wick_alternative(space: &FockSpace, u: &ElementaryField) -> Result<FockOp> {
    wick_with(space, u, |h| creation_argument(h).conj())
}

fn wick_with(space: &FockSpace, u: &ElementaryField, ann: impl Fn(&DirectionPair) -> HVec) -> Result<FockOp> {
    let mut acc = space.zero_op();
    for (f, h) in u.pairs()? {
        ensure_same_dim(space.dim(), f.nrows())?;
        acc += creation(space, &creation_argument(h))? * f + f * annihilation(space, &ann(h))?;
    }
    Ok(acc)
}

/// `Σ (⟨k₁, h₂ − ih₁⟩ + ⟨k̄₂, h₂ + ih₁⟩) ⟨ℰ(k₁), F ℰ(k₂)⟩`, computed without `δ(u)`.
pub fn divergence_matrix_rhs(space: &FockSpace, u: &ElementaryField, k1: &HVec, k2: &HVec) -> Result<C64> {
    let e1 = exponential_vector(space, k1)?;
    let e2 = exponential_vector(space, k2)?;
    let mut acc = C64::zero();
    for (f, h) in u.pairs()? {
        let coeff = k1.inner(&creation_argument(h)) + k2.conj().inner(&(&h.k2 + &h.k1.scale(C64::i())));
        acc += coeff * e1.dotc(&(f * &e2));
    }
    Ok(acc)
}

/// `D_h(δ(u)) − δ(D_h u) − ⟨h̄, u⟩`.
pub fn commutation_residual(space: &FockSpace, h: &DirectionPair, u: &ElementaryField) -> Result<FockOp> {
    let lhs = derive_direction(space, h, &divergence_def(space, u)?)?;
    let d_u = ModuleElement::from_pairs(
        u.pairs()?
            .into_iter()
            .map(|(f, k)| Ok((derive_direction(space, h, f)?, k.clone())))
            .collect::<Result<Vec<_>>>()?,
    );
    let rhs = divergence_def(space, &d_u)?;
    let pairing = module_inner(&ModuleElement::deterministic(space, h.conj()), u)?;
    Ok(lhs - rhs - pairing)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductSide {
    /// `δ(Fu) = Fδ(u) − F←D_u + (1/2)Σ[P+Q, F]F_j`.
    Left,
    /// `δ(uF) = δ(u)F − →D_uF + (1/2)ΣF_j[F, P+Q]`.
    Right,
}

/// `δ` of the product field minus the three-term right side. `d_f` is the
/// (symbolic, then evaluated) derivative of `f`.
pub fn product_formula(
    space: &FockSpace,
    f: &FockOp,
    d_f: &ModuleElement,
    u: &ElementaryField,
    side: ProductSide,
) -> Result<FockOp> {
    let (direct, main, grad) = match side {
        ProductSide::Left => (
            divergence_def(space, &u.left_mul(f))?,
            f * divergence_def(space, u)?,
            gradient(GradientSide::Left, u, d_f)?,
        ),
        ProductSide::Right => (
            divergence_def(space, &u.right_mul(f))?,
            divergence_def(space, u)? * f,
            gradient(GradientSide::Right, u, d_f)?,
        ),
    };
    let correction = commutator_correction(space, f, u, side)?;
    Ok(direct - (main - grad + correction))
}

/// The last term of the product formula; vanishes when `F` commutes with
/// every `P(h₁^{(j)}) + Q(h₂^{(j)})`.
pub fn commutator_correction(space: &FockSpace, f: &FockOp, u: &ElementaryField, side: ProductSide) -> Result<FockOp> {
    let mut acc = space.zero_op();
    for (fj, h) in u.pairs()? {
        let x = weyl_generator(space, &h.k1, &h.k2)?;
        let c = &x * f - f * &x;
        acc += match side {
            ProductSide::Left => c * fj,
            ProductSide::Right => -(fj * c),
        };
    }
    Ok(acc * C64::new(0.5, 0.0))
}

/// `𝔼(A δ(u) B) − 𝔼(A ↔D_u B)`.
pub fn duality_residual(
    space: &FockSpace,
    a: &FockOp,
    d_a: &ModuleElement,
    b: &FockOp,
    d_b: &ModuleElement,
    u: &ElementaryField,
) -> Result<C64> {
    let lhs = vacuum_expectation(&(a * divergence_def(space, u)? * b));
    let rhs = vacuum_expectation(&two_sided_gradient(u, a, d_a, b, d_b)?);
    Ok(lhs - rhs)
}

/// `B ψ = ⟨k₁ + ik₂, ψ⟩ Ω` and the vacuum expectation of `D_k B`.
pub fn nogo_counterexample(space: &FockSpace, k: &DirectionPair) -> Result<C64> {
    let g = k.complex_combination();
    if g.is_zero(1e-15) {
        return Err(Error::DegenerateDirection);
    }
    if space.cutoff() == 0 {
        return Err(Error::InvalidParameter("the counterexample needs cutoff at least 1"));
    }
    let b = space.vacuum() * space.one_particle(&g)?.adjoint();
    Ok(vacuum_expectation(&derive_direction(space, k, &b)?))
}

/// `−(i/2)⟨k₁+ik₂, k₁+ik₂⟩`.
pub fn nogo_value(k: &DirectionPair) -> C64 {
    let g = k.complex_combination();
    C64::new(0.0, -0.5) * g.inner(&g)
}

/// `(P(h₁)+Q(h₂)) ⋄ X = a†(h₂ − ih₁) X + X a(conj(h₂ + ih₁))`.
pub fn wick_linear(space: &FockSpace, h: &DirectionPair, x: &FockOp) -> Result<FockOp> {
    Ok(creation(space, &creation_argument(h))? * x + x * annihilation(space, &annihilation_argument(h))?)
}

#[derive(Clone, Debug)]
pub struct IteratedDivergence {
    pub recursive: FockOp,
    pub subset_sum: FockOp,
}

/// `δ(… δ(δ(id ⊗ h⁽¹⁾) ⊗ h⁽²⁾) … ⊗ h⁽ⁿ⁾)` alongside the normal-ordered sum
/// `Σ_I Π_{j∈I} a†(h₂⁽ʲ⁾ − ih₁⁽ʲ⁾) Π_{j∉I} a(conj(h₂⁽ʲ⁾ + ih₁⁽ʲ⁾))`.
pub fn iterated_divergence(space: &FockSpace, dirs: &[DirectionPair], max: usize) -> Result<IteratedDivergence> {
    if dirs.len() > max {
        return Err(Error::TooManyDirections { n: dirs.len(), max });
    }
    let mut recursive = space.identity();
    for h in dirs {
        let field = ModuleElement::from_pairs(alloc::vec![(recursive, h.clone())]);
        recursive = divergence_def(space, &field)?;
    }
    let creators = dirs
        .iter()
        .map(|h| creation(space, &creation_argument(h)))
        .collect::<Result<Vec<_>>>()?;
    let annihilators = dirs
        .iter()
        .map(|h| annihilation(space, &annihilation_argument(h)))
        .collect::<Result<Vec<_>>>()?;
    let n = dirs.len();
    let mut subset_sum = space.zero_op();
    for mask in 0u32..(1u32 << n) {
        let mut term = space.identity();
        for j in 0..n {
            if mask & (1 << j) != 0 {
                term = &term * &creators[j];
            }
        }
        for j in 0..n {
            if mask & (1 << j) == 0 {
                term = &term * &annihilators[j];
            }
        }
        subset_sum += term;
    }
    Ok(IteratedDivergence { recursive, subset_sum })
}
