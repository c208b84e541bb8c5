//! White noise on `[0,T]` with time bins as modes: bin `j` is the normalized
//! indicator of `[t_j, t_{j+1})`, so step processes embed exactly and only
//! the Fock truncation is approximate.
//!
//! Weyl operators used as process coefficients are compressions of the exact
//! operators ([`weyl_compressed`]). Those commute with the ladder operators
//! of other modes on every row and column below the top degree, which is
//! where adaptedness and the Hudson–Parthasarathy comparison are measured.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::divergence::{divergence_def, ElementaryField};
use crate::error::{Error, Result};
use crate::fock::{exponential_vector, interior_norm, DirectionPair, FockOp, FockSpace, HVec, C64};
use crate::linalg::{commutator, ensure_same_dim};
use crate::malliavin::ModuleElement;
use crate::operators::{momentum, mode_lowering, position, weyl_compressed};

pub const ADAPTED_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub bins: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, bins: usize) -> Result<Self> {
        if !(horizon > 0.0) || bins == 0 {
            return Err(Error::InvalidParameter("time grid needs a positive horizon and bin count"));
        }
        Ok(TimeGrid { horizon, bins })
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.bins as f64
    }

    /// `√Δ e_j`, the increment of bin `j`.
    pub fn increment(&self, j: usize) -> HVec {
        HVec::mode(self.bins, j).scale_re(libm::sqrt(self.delta()))
    }

    /// `1_{[0, t_j]} = √Δ (e_0 + … + e_{j−1})`.
    pub fn indicator(&self, j: usize) -> HVec {
        let mut v = HVec::zeros(self.bins);
        for k in 0..j.min(self.bins) {
            v.0[k] = C64::new(libm::sqrt(self.delta()), 0.0);
        }
        v
    }

    pub fn check_space(&self, space: &FockSpace) -> Result<()> {
        if space.modes() != self.bins {
            return Err(Error::ModeMismatch { expected: self.bins, found: space.modes() });
        }
        Ok(())
    }
}

/// How a bin coefficient is specified before it is realized as a matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSpec {
    Zero,
    Identity,
    Weyl { h1: HVec, h2: HVec },
    Explicit(FockOp),
}

impl MatrixSpec {
    pub fn realize(&self, space: &FockSpace) -> Result<FockOp> {
        match self {
            MatrixSpec::Zero => Ok(space.zero_op()),
            MatrixSpec::Identity => Ok(space.identity()),
            MatrixSpec::Weyl { h1, h2 } => weyl_compressed(space, h1, h2),
            MatrixSpec::Explicit(m) => {
                ensure_same_dim(space.dim(), m.nrows())?;
                ensure_same_dim(space.dim(), m.ncols())?;
                Ok(m.clone())
            }
        }
    }
}

/// Per-bin coefficients `(X¹_j, X²_j)` of `∫X¹dP + ∫X²dQ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProcessPair {
    pub x1: Vec<FockOp>,
    pub x2: Vec<FockOp>,
}

impl StepProcessPair {
    pub fn zeros(space: &FockSpace, grid: &TimeGrid) -> Self {
        StepProcessPair {
            x1: (0..grid.bins).map(|_| space.zero_op()).collect(),
            x2: (0..grid.bins).map(|_| space.zero_op()).collect(),
        }
    }

    fn check(&self, space: &FockSpace, grid: &TimeGrid) -> Result<()> {
        grid.check_space(space)?;
        ensure_same_dim(grid.bins, self.x1.len())?;
        ensure_same_dim(grid.bins, self.x2.len())?;
        for m in self.x1.iter().chain(&self.x2) {
            ensure_same_dim(space.dim(), m.nrows())?;
            ensure_same_dim(space.dim(), m.ncols())?;
        }
        Ok(())
    }
}

/// `Σ_j X¹_j ⊗ (√Δe_j, 0) + X²_j ⊗ (0, √Δe_j)`; all-zero coefficients are dropped.
pub fn process_to_field(space: &FockSpace, grid: &TimeGrid, proc: &StepProcessPair) -> Result<ElementaryField> {
    proc.check(space, grid)?;
    let zero = HVec::zeros(grid.bins);
    let mut terms = Vec::new();
    for j in 0..grid.bins {
        let inc = grid.increment(j);
        if proc.x1[j].iter().any(|z| !z.is_zero()) {
            terms.push((proc.x1[j].clone(), DirectionPair::new(inc.clone(), zero.clone())));
        }
        if proc.x2[j].iter().any(|z| !z.is_zero()) {
            terms.push((proc.x2[j].clone(), DirectionPair::new(zero.clone(), inc)));
        }
    }
    Ok(ModuleElement::from_pairs(terms))
}

/// First `(bin, mode)` with a coefficient of that bin failing to commute with
/// `A_mode` or `A_mode†`, `mode ≥ bin`, measured below the top degree.
pub fn adaptedness_check(space: &FockSpace, grid: &TimeGrid, proc: &StepProcessPair) -> Result<Option<(usize, usize)>> {
    proc.check(space, grid)?;
    let d = space.cutoff().saturating_sub(1);
    let lowering: Vec<FockOp> = (0..grid.bins).map(|i| mode_lowering(space, i)).collect();
    for j in 0..grid.bins {
        for i in j..grid.bins {
            let a = &lowering[i];
            let ad = a.adjoint();
            for x in [&proc.x1[j], &proc.x2[j]] {
                let r1 = interior_norm(space, &commutator(x, a), d);
                let r2 = interior_norm(space, &commutator(x, &ad), d);
                if r1 > ADAPTED_TOL || r2 > ADAPTED_TOL {
                    return Ok(Some((j, i)));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct HpIntegral {
    pub value: FockOp,
    /// Largest `‖[X_j, ΔP_j]‖` or `‖[X_j, ΔQ_j]‖` below the top degree.
    pub ordering_residual: f64,
}

/// `Σ_j X¹_j ΔP_j + X²_j ΔQ_j`; refuses non-adapted processes.
pub fn hp_integral(space: &FockSpace, grid: &TimeGrid, proc: &StepProcessPair) -> Result<HpIntegral> {
    if let Some((bin, mode)) = adaptedness_check(space, grid, proc)? {
        return Err(Error::NotAdapted { bin, mode });
    }
    riemann_ito_sum(space, grid, proc)
}

/// The same sum without the adaptedness requirement.
pub fn riemann_ito_sum(space: &FockSpace, grid: &TimeGrid, proc: &StepProcessPair) -> Result<HpIntegral> {
    proc.check(space, grid)?;
    let d = space.cutoff().saturating_sub(1);
    let mut value = space.zero_op();
    let mut ordering_residual: f64 = 0.0;
    for j in 0..grid.bins {
        let inc = grid.increment(j);
        let dp = momentum(space, &inc)?;
        let dq = position(space, &inc)?;
        value += &proc.x1[j] * &dp + &proc.x2[j] * &dq;
        ordering_residual = ordering_residual
            .max(interior_norm(space, &commutator(&proc.x1[j], &dp), d))
            .max(interior_norm(space, &commutator(&proc.x2[j], &dq), d));
    }
    Ok(HpIntegral { value, ordering_residual })
}

/// `δ` of the embedded field: the Hitsuda–Skorohod integral.
pub fn skorohod_integral(space: &FockSpace, grid: &TimeGrid, proc: &StepProcessPair) -> Result<FockOp> {
    divergence_def(space, &process_to_field(space, grid, proc)?)
}

#[derive(Clone, Debug)]
pub struct BelavkinDecomposition {
    /// `G†_j = X²_j − iX¹_j`, integrated against `dA*`.
    pub creation: Vec<FockOp>,
    /// `G_j = X²_j + iX¹_j`, integrated against `dA`.
    pub annihilation: Vec<FockOp>,
}

pub fn belavkin_decomposition(proc: &StepProcessPair) -> BelavkinDecomposition {
    let i = C64::i();
    BelavkinDecomposition {
        creation: proc.x1.iter().zip(&proc.x2).map(|(a, b)| b - a * i).collect(),
        annihilation: proc.x1.iter().zip(&proc.x2).map(|(a, b)| b + a * i).collect(),
    }
}

/// `Σ_j √Δ (A_j† G†_j + G_j A_j)`.
pub fn belavkin_integral(space: &FockSpace, grid: &TimeGrid, dec: &BelavkinDecomposition) -> Result<FockOp> {
    grid.check_space(space)?;
    let s = libm::sqrt(grid.delta());
    let mut acc = space.zero_op();
    for j in 0..grid.bins {
        let a = mode_lowering(space, j);
        acc += (a.adjoint() * &dec.creation[j] + &dec.annihilation[j] * &a) * C64::new(s, 0.0);
    }
    Ok(acc)
}

/// `Σ_j √Δ (conj(k₁ⱼ)⟨ℰ(k₁), G†_j ℰ(k₂)⟩ + k₂ⱼ⟨ℰ(k₁), G_j ℰ(k₂)⟩)`.
pub fn belavkin_matrix_element(
    space: &FockSpace,
    grid: &TimeGrid,
    dec: &BelavkinDecomposition,
    k1: &HVec,
    k2: &HVec,
) -> Result<C64> {
    grid.check_space(space)?;
    let e1 = exponential_vector(space, k1)?;
    let e2 = exponential_vector(space, k2)?;
    let s = libm::sqrt(grid.delta());
    let mut acc = C64::zero();
    for j in 0..grid.bins {
        acc += k1.0[j].conj() * e1.dotc(&(&dec.creation[j] * &e2));
        acc += k2.0[j] * e1.dotc(&(&dec.annihilation[j] * &e2));
    }
    Ok(acc * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn setup() -> (FockSpace, TimeGrid) {
        (FockSpace::new(3, 4).unwrap(), TimeGrid::new(1.5, 3).unwrap())
    }

    #[test]
    fn constant_integrand_gives_momentum_of_the_indicator() {
        let (s, g) = setup();
        let mut p = StepProcessPair::zeros(&s, &g);
        for j in 0..3 {
            p.x1[j] = s.identity();
        }
        let target = momentum(&s, &g.indicator(3)).unwrap();
        let delta = skorohod_integral(&s, &g, &p).unwrap();
        assert!(max_abs(&(&delta - &target)) < 1e-14);
        let hp = hp_integral(&s, &g, &p).unwrap();
        assert!(max_abs(&(hp.value - target)) < 1e-14);
        assert_eq!(hp.ordering_residual, 0.0);
    }

    #[test]
    fn own_bin_position_is_not_adapted() {
        let (s, g) = setup();
        let mut p = StepProcessPair::zeros(&s, &g);
        p.x2[1] = position(&s, &HVec::mode(3, 1)).unwrap();
        assert_eq!(adaptedness_check(&s, &g, &p).unwrap(), Some((1, 1)));
        assert!(matches!(hp_integral(&s, &g, &p), Err(Error::NotAdapted { bin: 1, mode: 1 })));
    }

    #[test]
    fn earlier_mode_weyl_is_adapted() {
        let (s, g) = setup();
        let mut p = StepProcessPair::zeros(&s, &g);
        let w = MatrixSpec::Weyl { h1: HVec::real(&[0.4, 0.0, 0.0]), h2: HVec::real(&[-0.2, 0.0, 0.0]) };
        p.x1[1] = w.realize(&s).unwrap();
        p.x2[2] = w.realize(&s).unwrap();
        assert_eq!(adaptedness_check(&s, &g, &p).unwrap(), None);
        let hp = hp_integral(&s, &g, &p).unwrap();
        let delta = skorohod_integral(&s, &g, &p).unwrap();
        assert!(interior_norm(&s, &(delta - hp.value), 3) < 1e-13);
    }

    #[test]
    fn belavkin_form_is_the_normal_ordered_divergence() {
        let (s, g) = setup();
        let mut p = StepProcessPair::zeros(&s, &g);
        p.x1[0] = s.identity() * C64::new(0.3, 0.0);
        p.x1[2] = MatrixSpec::Weyl { h1: HVec::real(&[0.1, 0.2, 0.0]), h2: HVec::real(&[0.0, 0.3, 0.0]) }
            .realize(&s)
            .unwrap();
        p.x2[1] = s.identity();
        let dec = belavkin_decomposition(&p);
        let lhs = belavkin_integral(&s, &g, &dec).unwrap();
        let rhs = skorohod_integral(&s, &g, &p).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-13);
        let mut only_p = StepProcessPair::zeros(&s, &g);
        only_p.x1[0] = s.identity();
        let dec = belavkin_decomposition(&only_p);
        assert_eq!(dec.creation[0], s.identity() * -C64::i());
        assert_eq!(dec.annihilation[0], s.identity() * C64::i());
    }

    #[test]
    fn indicator_embedding() {
        let g = TimeGrid::new(2.0, 4).unwrap();
        let ind = g.indicator(4);
        assert!((ind.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((g.indicator(2).inner(&g.indicator(4)).re - 1.0).abs() < 1e-15);
        assert!(TimeGrid::new(0.0, 3).is_err());
    }
}
