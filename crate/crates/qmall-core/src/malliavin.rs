//! The derivation `D`: directional derivatives as commutators, the symbolic
//! module-valued derivative of smooth elements, the module inner product and
//! the gradients built from it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fock::{DirectionPair, FockOp, FockSpace, HVec, C64};
use crate::linalg::ensure_same_dim;
use crate::operators::{momentum, position, weyl};
use crate::state::State;
use crate::symbol::Symbol;
use crate::weyl_calculus::{quantize, Quadrature};

#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Weyl { h1: HVec, h2: HVec },
    Quant { h: DirectionPair, phi: Symbol },
}

impl Primitive {
    pub fn adjoint(&self) -> Primitive {
        match self {
            Primitive::Weyl { h1, h2 } => Primitive::Weyl { h1: -h1, h2: -h2 },
            Primitive::Quant { h, phi } => Primitive::Quant { h: h.clone(), phi: phi.conj() },
        }
    }

    /// First derivative as `(weight, replacement primitive, direction)` terms.
    fn derivative(&self) -> Vec<(C64, Primitive, DirectionPair)> {
        match self {
            Primitive::Weyl { h1, h2 } => {
                alloc::vec![(C64::i(), self.clone(), DirectionPair::new(h1.clone(), h2.clone()))]
            }
            Primitive::Quant { h, phi } => {
                let m = h.modes();
                alloc::vec![
                    (
                        C64::new(1.0, 0.0),
                        Primitive::Quant { h: h.clone(), phi: phi.dx() },
                        DirectionPair::new(h.k1.clone(), HVec::zeros(m)),
                    ),
                    (
                        C64::new(1.0, 0.0),
                        Primitive::Quant { h: h.clone(), phi: phi.dy() },
                        DirectionPair::new(HVec::zeros(m), h.k2.clone()),
                    ),
                ]
            }
        }
    }
}

/// Formal sum of weighted ordered products of primitives.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SmoothElement {
    pub terms: Vec<(C64, Vec<Primitive>)>,
}

impl SmoothElement {
    pub fn identity() -> Self {
        SmoothElement { terms: alloc::vec![(C64::new(1.0, 0.0), Vec::new())] }
    }

    pub fn weyl(h1: HVec, h2: HVec) -> Self {
        SmoothElement { terms: alloc::vec![(C64::new(1.0, 0.0), alloc::vec![Primitive::Weyl { h1, h2 }])] }
    }

    pub fn quant(h: DirectionPair, phi: Symbol) -> Self {
        SmoothElement { terms: alloc::vec![(C64::new(1.0, 0.0), alloc::vec![Primitive::Quant { h, phi }])] }
    }

    pub fn scaled(mut self, w: C64) -> Self {
        for t in &mut self.terms {
            t.0 *= w;
        }
        self
    }

    pub fn add(mut self, other: SmoothElement) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn mul(&self, other: &SmoothElement) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, pa) in &self.terms {
            for (b, pb) in &other.terms {
                let mut p = pa.clone();
                p.extend(pb.iter().cloned());
                terms.push((a * b, p));
            }
        }
        SmoothElement { terms }
    }

    /// `s*`: conjugate weights, reversed products of adjoint primitives.
    pub fn adjoint(&self) -> Self {
        SmoothElement {
            terms: self
                .terms
                .iter()
                .map(|(w, p)| (w.conj(), p.iter().rev().map(Primitive::adjoint).collect()))
                .collect(),
        }
    }

    pub fn is_weyl_only(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.iter().all(|q| matches!(q, Primitive::Weyl { .. })))
    }
}

/// Evaluates smooth elements as matrices. Quantized primitives use `quad`,
/// or the default rule for their symbol when it is `None`.
pub fn evaluate(space: &FockSpace, s: &SmoothElement, quad: Option<&Quadrature>) -> Result<FockOp> {
    let mut acc = space.zero_op();
    for (w, prims) in &s.terms {
        let mut prod = space.identity();
        for p in prims {
            prod *= evaluate_primitive(space, p, quad)?;
        }
        acc += prod * *w;
    }
    Ok(acc)
}

pub fn evaluate_primitive(space: &FockSpace, p: &Primitive, quad: Option<&Quadrature>) -> Result<FockOp> {
    match p {
        Primitive::Weyl { h1, h2 } => weyl(space, h1, h2),
        Primitive::Quant { h, phi } => {
            let q = quad.copied().unwrap_or_else(|| Quadrature::for_symbol(phi));
            quantize(space, h, phi, &q)
        }
    }
}

/// Operator-valued tensor field `Σ F_j ⊗ h^{(j)}_1 ⊗ … ⊗ h^{(j)}_r`. Rank one
/// is the Hilbert module proper; higher ranks hold iterated derivatives.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModuleElement {
    pub terms: Vec<(FockOp, Vec<DirectionPair>)>,
}

impl ModuleElement {
    pub fn from_pairs(terms: Vec<(FockOp, DirectionPair)>) -> Self {
        ModuleElement { terms: terms.into_iter().map(|(f, k)| (f, alloc::vec![k])).collect() }
    }

    /// `id ⊗ k`.
    pub fn deterministic(space: &FockSpace, k: DirectionPair) -> Self {
        Self::from_pairs(alloc::vec![(space.identity(), k)])
    }

    /// Termwise `(F*, k̄)`.
    pub fn conj(&self) -> Self {
        ModuleElement {
            terms: self
                .terms
                .iter()
                .map(|(f, ks)| (f.adjoint(), ks.iter().map(DirectionPair::conj).collect()))
                .collect(),
        }
    }

    /// Left action `X·u`.
    pub fn left_mul(&self, x: &FockOp) -> Self {
        ModuleElement { terms: self.terms.iter().map(|(f, k)| (x * f, k.clone())).collect() }
    }

    /// Right action `u·X`.
    pub fn right_mul(&self, x: &FockOp) -> Self {
        ModuleElement { terms: self.terms.iter().map(|(f, k)| (f * x, k.clone())).collect() }
    }

    pub fn add(mut self, other: ModuleElement) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Rank-one terms `(F_j, h^{(j)})`; errors if any term has another rank.
    pub fn pairs(&self) -> Result<Vec<(&FockOp, &DirectionPair)>> {
        self.terms
            .iter()
            .map(|(f, ks)| match ks.as_slice() {
                [k] => Ok((f, k)),
                _ => Err(Error::InvalidParameter("expected a rank-one module element")),
            })
            .collect()
    }
}

/// `⟨A,B⟩ = Σ F_i* G_j Π_r ⟨h^{(i)}_r, k^{(j)}_r⟩`.
pub fn module_inner(a: &ModuleElement, b: &ModuleElement) -> Result<FockOp> {
    let dim = a.terms.first().or(b.terms.first()).map(|(f, _)| f.nrows());
    let Some(dim) = dim else {
        return Err(Error::InvalidParameter("module inner product of two empty elements"));
    };
    let mut acc = FockOp::zeros(dim, dim);
    for (f, hs) in &a.terms {
        ensure_same_dim(dim, f.nrows())?;
        for (g, ks) in &b.terms {
            ensure_same_dim(dim, g.nrows())?;
            ensure_same_dim(hs.len(), ks.len())?;
            let c: C64 = hs.iter().zip(ks).map(|(h, k)| h.inner(k)).product();
            if c != C64::new(0.0, 0.0) {
                acc += f.adjoint() * g * c;
            }
        }
    }
    Ok(acc)
}

/// `Q(k₁) − P(k₂)`.
pub fn derivation_generator(space: &FockSpace, k: &DirectionPair) -> Result<FockOp> {
    Ok(position(space, &k.k1)? - momentum(space, &k.k2)?)
}

/// `D_k B = (i/2)[Q(k₁) − P(k₂), B]`.
pub fn derive_direction(space: &FockSpace, k: &DirectionPair, b: &FockOp) -> Result<FockOp> {
    ensure_same_dim(space.dim(), b.nrows())?;
    let g = derivation_generator(space, k)? * C64::new(0.0, 0.5);
    Ok(&g * b - b * &g)
}

/// `Σ (s_j, k^{(j)}_1 ⊗ …)`: a derivative before evaluation.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SymbolicModuleElement {
    pub terms: Vec<(SmoothElement, Vec<DirectionPair>)>,
}

impl SymbolicModuleElement {
    pub fn evaluate(&self, space: &FockSpace, quad: Option<&Quadrature>) -> Result<ModuleElement> {
        let terms = self
            .terms
            .iter()
            .map(|(s, ks)| Ok((evaluate(space, s, quad)?, ks.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleElement { terms })
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `D` applied once more; the new direction is appended.
    pub fn derive(&self) -> SymbolicModuleElement {
        let mut terms = Vec::new();
        for (s, ks) in &self.terms {
            for (t, k) in derive(s).terms {
                let mut dirs = ks.clone();
                dirs.extend(k);
                terms.push((t, dirs));
            }
        }
        SymbolicModuleElement { terms }
    }
}

/// Symbolic `D s` by the Leibniz rule over products and linearity over sums.
pub fn derive(s: &SmoothElement) -> SymbolicModuleElement {
    let mut terms = Vec::new();
    for (w, prims) in &s.terms {
        for (pos, p) in prims.iter().enumerate() {
            for (c, q, k) in p.derivative() {
                let mut replaced = prims.clone();
                replaced[pos] = q;
                terms.push((
                    SmoothElement { terms: alloc::vec![(w * c, replaced)] },
                    alloc::vec![k],
                ));
            }
        }
    }
    SymbolicModuleElement { terms }
}

/// `D^order s`, evaluated.
pub fn derive_n(
    space: &FockSpace,
    s: &SmoothElement,
    order: usize,
    quad: Option<&Quadrature>,
) -> Result<ModuleElement> {
    if order == 0 {
        return Err(Error::InvalidParameter("derivative order must be positive"));
    }
    let mut d = derive(s);
    for _ in 1..order {
        d = d.derive();
    }
    d.evaluate(space, quad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientSide {
    Right,
    Left,
}

/// Right gradient `→D_u O = ⟨ū, DO⟩` or left gradient `O←D_u = ⟨conj(DO), u⟩`.
pub fn gradient(side: GradientSide, u: &ModuleElement, d_o: &ModuleElement) -> Result<FockOp> {
    match side {
        GradientSide::Right => module_inner(&u.conj(), d_o),
        GradientSide::Left => module_inner(&d_o.conj(), u),
    }
}

/// `O₁(→D_u O₂) + (O₁←D_u)O₂`.
pub fn two_sided_gradient(
    u: &ModuleElement,
    o1: &FockOp,
    d_o1: &ModuleElement,
    o2: &FockOp,
    d_o2: &ModuleElement,
) -> Result<FockOp> {
    let right = gradient(GradientSide::Right, u, d_o2)?;
    let left = gradient(GradientSide::Left, u, d_o1)?;
    Ok(o1 * right + left * o2)
}

/// `‖Oψ‖² + Σ_{j≤n} ‖⟨ψ, ⟨D^jO, D^jO⟩ψ⟩‖`.
pub fn sobolev_seminorm_sq(
    space: &FockSpace,
    s: &SmoothElement,
    psi: &crate::fock::FockVec,
    order: usize,
    quad: Option<&Quadrature>,
) -> Result<f64> {
    let o = evaluate(space, s, quad)?;
    let mut total = (&o * psi).norm_squared();
    let mut d = derive(s);
    for j in 1..=order {
        if j > 1 {
            d = d.derive();
        }
        if d.is_empty() {
            break;
        }
        let m = d.evaluate(space, quad)?;
        let g = module_inner(&m, &m)?;
        total += psi.dotc(&(g * psi)).norm();
    }
    Ok(total)
}

/// `𝔼` in the given state; the vacuum is `State::vacuum`.
pub fn expectation(state: &State, x: &FockOp) -> Result<C64> {
    state.expectation(x)
}
