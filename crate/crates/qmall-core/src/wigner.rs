//! Characteristic functions `χ(u,v) = Φ(U(uh₁,vh₂))`, Wigner densities of
//! the pair `(P(h₁), Q(h₂))`, pairings `Φ(O_h(φ))` and spectral distributions.
//!
//! With the Fourier convention of [`crate::symbol`], `Φ(O_h(φ)) = ∫φ w` holds
//! for `w(x,y) = (1/(2π)²)∫χ(u,v)e^{−i(ux+vy)}dudv`; the constant is fixed by
//! plane waves, for which both sides equal `χ(x₀,y₀)`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{DirectionPair, FockOp, FockSpace, C64};
use crate::linalg::hermitian_deviation;
use crate::operators::{weyl_compressed, GaussianSpec};
use crate::state::State;
use crate::symbol::Symbol;
use crate::weyl_calculus::{quantize, Quadrature};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
pub const DEFAULT_GRID_NODES: usize = 129;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;

/// Square grid `(i − c)·step`, `i = 0..nodes`, `c = (nodes−1)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub nodes: usize,
    /// Largest admissible `|χ|` on the boundary.
    pub boundary_tol: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter("grid half-width must be positive"));
        }
        if nodes < 3 || nodes % 2 == 0 {
            return Err(Error::InvalidParameter("grid node count must be odd and at least 3"));
        }
        Ok(GridSpec { half_width, nodes, boundary_tol: DEFAULT_BOUNDARY_TOL })
    }

    /// `L = 8/min(‖h₁‖,‖h₂‖)` with 129 nodes.
    pub fn default_for(h: &DirectionPair) -> Result<Self> {
        let m = h.k1.norm().min(h.k2.norm());
        if m == 0.0 {
            return Err(Error::InvalidParameter("both directions must be nonzero"));
        }
        GridSpec::new(8.0 / m, DEFAULT_GRID_NODES)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Characteristic,
    Density,
}

/// Samples on a symmetric odd grid, row-major with the first coordinate
/// slow: `values[i*nodes + j]` sits at `(axis(i), axis(j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub kind: GridKind,
    pub step: f64,
    pub nodes: usize,
    pub values: Vec<C64>,
}

impl DensityGrid {
    pub fn axis(&self, i: usize) -> f64 {
        (i as f64 - ((self.nodes - 1) / 2) as f64) * self.step
    }

    pub fn half_width(&self) -> f64 {
        self.axis(self.nodes - 1)
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.nodes + j]
    }

    pub fn cell_area(&self) -> f64 {
        self.step * self.step
    }

    /// `Σ values · cell area`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.cell_area()
    }

    /// `Σ w φ · cell area`.
    pub fn pair_with(&self, phi: &Symbol) -> C64 {
        let mut acc = C64::zero();
        for i in 0..self.nodes {
            for j in 0..self.nodes {
                acc += self.at(i, j) * phi.value(self.axis(i), self.axis(j));
            }
        }
        acc * self.cell_area()
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    fn boundary_max(&self) -> f64 {
        let n = self.nodes;
        let mut m: f64 = 0.0;
        for k in 0..n {
            for (i, j) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
                m = m.max(self.at(i, j).norm());
            }
        }
        m
    }
}

/// `χ(u,v)` on the grid, using compressions of the exact Weyl operators so
/// that large `|u|, |v|` stay accurate for states on the truncated space.
pub fn characteristic_function(
    space: &FockSpace,
    state: &State,
    h: &DirectionPair,
    grid: &GridSpec,
) -> Result<DensityGrid> {
    if !h.is_real(1e-14) {
        return Err(Error::InvalidParameter("characteristic functions need a real direction pair"));
    }
    let n = grid.nodes;
    let step = grid.step();
    let c = ((n - 1) / 2) as f64;
    let mut values = alloc::vec![C64::zero(); n * n];
    // χ(−u,−v) = conj χ(u,v): fill the second half from the first
    for idx in 0..=(n * n) / 2 {
        let (i, j) = (idx / n, idx % n);
        let u = (i as f64 - c) * step;
        let v = (j as f64 - c) * step;
        let w = weyl_compressed(space, &h.k1.scale_re(u), &h.k2.scale_re(v))?;
        let chi = state.expectation(&w)?;
        values[idx] = chi;
        values[n * n - 1 - idx] = chi.conj();
    }
    Ok(DensityGrid { kind: GridKind::Characteristic, step, nodes: n, values })
}

/// `w(x,y) = (1/(2π)²) Σ χ(u,v) e^{−i(ux+vy)} Δu²` on the dual grid with
/// `Δx = 2π/(nΔu)`.
pub fn wigner_from_characteristic(chi: &DensityGrid, boundary_tol: f64) -> Result<DensityGrid> {
    if chi.kind != GridKind::Characteristic {
        return Err(Error::InvalidParameter("expected a characteristic-function grid"));
    }
    let boundary = chi.boundary_max();
    if boundary > boundary_tol {
        return Err(Error::GridTooSmall { boundary });
    }
    let n = chi.nodes;
    let dx = TWO_PI / (n as f64 * chi.step);
    let scale = chi.step * chi.step / (TWO_PI * TWO_PI);
    let values = dft2(&chi.values, n, -1.0, scale);
    Ok(DensityGrid { kind: GridKind::Density, step: dx, nodes: n, values })
}

/// Inverse of [`wigner_from_characteristic`]: `χ(u,v) = Σ w e^{i(ux+vy)} Δx²`.
pub fn characteristic_from_wigner(w: &DensityGrid) -> DensityGrid {
    let n = w.nodes;
    let du = TWO_PI / (n as f64 * w.step);
    let values = dft2(&w.values, n, 1.0, w.step * w.step);
    DensityGrid { kind: GridKind::Characteristic, step: du, nodes: n, values }
}

// Σ_{i,j} f_{ij} e^{sign·2πi(i−c)(a−c)/n} e^{sign·2πi(j−c)(b−c)/n}, one axis at a time
fn dft2(f: &[C64], n: usize, sign: f64, scale: f64) -> Vec<C64> {
    let c = (n - 1) / 2;
    let twiddle: Vec<C64> = (0..n)
        .map(|k| C64::new(0.0, sign * TWO_PI * k as f64 / n as f64).exp())
        .collect();
    let phase = |p: usize, q: usize| {
        let prod = (p as i64 - c as i64) * (q as i64 - c as i64);
        twiddle[prod.rem_euclid(n as i64) as usize]
    };
    let mut rows = alloc::vec![C64::zero(); n * n];
    for i in 0..n {
        for b in 0..n {
            let mut acc = C64::zero();
            for j in 0..n {
                acc += f[i * n + j] * phase(j, b);
            }
            rows[i * n + b] = acc;
        }
    }
    let mut out = alloc::vec![C64::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = C64::zero();
            for i in 0..n {
                acc += rows[i * n + b] * phase(i, a);
            }
            out[a * n + b] = acc * scale;
        }
    }
    out
}

pub fn wigner_density(space: &FockSpace, state: &State, h: &DirectionPair, grid: &GridSpec) -> Result<DensityGrid> {
    let chi = characteristic_function(space, state, h, grid)?;
    wigner_from_characteristic(&chi, grid.boundary_tol)
}

/// `exp(−x²/(2a) − y²/(2b)) / (2π√(ab))` with `a = ‖h₁‖²`, `b = ‖h₂‖²`.
pub fn vacuum_density(h: &DirectionPair, x: f64, y: f64) -> f64 {
    let a = h.k1.norm() * h.k1.norm();
    let b = h.k2.norm() * h.k2.norm();
    libm::exp(-x * x / (2.0 * a) - y * y / (2.0 * b)) / (TWO_PI * libm::sqrt(a * b))
}

/// `exp(−(u²‖h₁‖² + v²‖h₂‖²)/2)`.
pub fn vacuum_characteristic(h: &DirectionPair, u: f64, v: f64) -> f64 {
    let a = h.k1.norm() * h.k1.norm();
    let b = h.k2.norm() * h.k2.norm();
    libm::exp(-(u * u * a + v * v * b) / 2.0)
}

/// `Π_j exp(−|z_j|²/2 · coth(tλ_j/2))` with `z = u h₁ + i v h₂`, for the
/// normalized untruncated state `Γ(T_t)/Z_t`.
pub fn thermal_characteristic(spec: &GaussianSpec, h: &DirectionPair, u: f64, v: f64) -> Result<f64> {
    if h.modes() != spec.lambdas().len() {
        return Err(Error::ModeMismatch { expected: spec.lambdas().len(), found: h.modes() });
    }
    let mut log = 0.0;
    for (j, l) in spec.lambdas().iter().enumerate() {
        let z = h.k1.0[j] * u + h.k2.0[j] * C64::new(0.0, v);
        let x = spec.t() * l / 2.0;
        let coth = libm::cosh(x) / libm::sinh(x);
        log -= z.norm_sqr() / 2.0 * coth;
    }
    Ok(libm::exp(log))
}

/// `Φ(O_h(φ))`.
pub fn pair_expectation(
    space: &FockSpace,
    state: &State,
    h: &DirectionPair,
    phi: &Symbol,
    quad: &Quadrature,
) -> Result<C64> {
    state.expectation(&quantize(space, h, phi, quad)?)
}

/// Atoms `(eigenvalue, Φ(spectral projector))` of a Hermitian `X`,
/// eigenvalues closer than `1e-9·max(1,|λ|)` merged, in increasing order.
pub fn spectral_distribution(x: &FockOp, state: &State) -> Result<Vec<(f64, f64)>> {
    let deviation = hermitian_deviation(x);
    if deviation > 1e-10 {
        return Err(Error::NotHermitian { deviation });
    }
    if state.dim() != x.nrows() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), found: state.dim() });
    }
    let eig = x.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..x.nrows())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let weight = match state {
                State::Vector(w) => v.dotc(w).norm_sqr(),
                State::Density(r) => v.dotc(&(r * v)).re,
            };
            (eig.eigenvalues[k], weight)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (l, w) in pairs {
        match atoms.last_mut() {
            Some(last) if (l - last.0).abs() <= 1e-9 * last.0.abs().max(1.0) => last.1 += w,
            _ => atoms.push((l, w)),
        }
    }
    Ok(atoms)
}

/// `Σ weight · λⁿ`.
pub fn moment(atoms: &[(f64, f64)], n: i32) -> f64 {
    atoms.iter().map(|(l, w)| w * libm::pow(*l, n as f64)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::HVec;
    use crate::operators::{position, second_quantization};
    use alloc::vec;

    fn unit_pair() -> DirectionPair {
        DirectionPair::new(HVec::real(&[1.0]), HVec::real(&[1.0]))
    }

    #[test]
    fn characteristic_at_origin_and_symmetry() {
        let s = FockSpace::new(1, 8).unwrap();
        let st = State::vector_normalized(
            crate::fock::exponential_vector(&s, &HVec::new(vec![C64::new(0.3, -0.4)])).unwrap(),
        )
        .unwrap();
        let g = GridSpec::new(2.0, 9).unwrap();
        let chi = characteristic_function(&s, &st, &unit_pair(), &g).unwrap();
        assert!((chi.at(4, 4) - C64::new(1.0, 0.0)).norm() < 1e-14);
        for i in 0..9 {
            for j in 0..9 {
                assert!((chi.at(8 - i, 8 - j) - chi.at(i, j).conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_characteristic_is_gaussian() {
        let s = FockSpace::new(2, 4).unwrap();
        let h = DirectionPair::new(HVec::real(&[0.6, 0.2]), HVec::real(&[-0.3, 0.5]));
        let g = GridSpec::new(6.0, 13).unwrap();
        let chi = characteristic_function(&s, &State::vacuum(&s), &h, &g).unwrap();
        for i in 0..13 {
            for j in 0..13 {
                let exact = vacuum_characteristic(&h, chi.axis(i), chi.axis(j));
                assert!((chi.at(i, j) - C64::new(exact, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_density_peak() {
        let s = FockSpace::new(1, 6).unwrap();
        let h = unit_pair();
        let w = wigner_density(&s, &State::vacuum(&s), &h, &GridSpec::default_for(&h).unwrap()).unwrap();
        assert!((w.at(64, 64).re - 1.0 / TWO_PI).abs() < 1e-10);
        assert!((w.integral().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_round_trip() {
        let n = 15;
        let values: Vec<C64> = (0..n * n)
            .map(|k| C64::new(libm::sin(k as f64 * 0.37), libm::cos(k as f64 * 0.11)) * 1e-3)
            .collect();
        let chi = DensityGrid { kind: GridKind::Characteristic, step: 0.4, nodes: n, values };
        let w = wigner_from_characteristic(&chi, 1.0).unwrap();
        let back = characteristic_from_wigner(&w);
        assert!((back.step - chi.step).abs() < 1e-15);
        for (a, b) in back.values.iter().zip(&chi.values) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn small_grid_is_refused() {
        let s = FockSpace::new(1, 6).unwrap();
        let g = GridSpec::new(1.0, 9).unwrap();
        let err = wigner_density(&s, &State::vacuum(&s), &unit_pair(), &g).unwrap_err();
        assert!(matches!(err, Error::GridTooSmall { .. }));
    }

    #[test]
    fn thermal_state_is_broader() {
        let s = FockSpace::new(1, 30).unwrap();
        let spec = GaussianSpec::new(vec![1.0], 1.0).unwrap();
        let rho = second_quantization(&s, &spec).unwrap().normalized();
        let st = State::density(rho).unwrap();
        let h = unit_pair();
        let g = GridSpec::new(3.0, 7).unwrap();
        let chi = characteristic_function(&s, &st, &h, &g).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let (u, v) = (chi.axis(i), chi.axis(j));
                let exact = thermal_characteristic(&spec, &h, u, v).unwrap();
                assert!((chi.at(i, j).re - exact).abs() < 1e-10);
                if (u, v) != (0.0, 0.0) {
                    assert!(exact < vacuum_characteristic(&h, u, v));
                }
            }
        }
    }

    #[test]
    fn spectral_atoms() {
        let s = FockSpace::new(1, 10).unwrap();
        let vac = State::vacuum(&s);
        let atoms = spectral_distribution(&s.identity(), &vac).unwrap();
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].0 - 1.0).abs() < 1e-14 && (atoms[0].1 - 1.0).abs() < 1e-14);
        let q = position(&s, &HVec::mode(1, 0)).unwrap();
        let atoms = spectral_distribution(&q, &vac).unwrap();
        assert!(moment(&atoms, 1).abs() < 1e-12);
        assert!((moment(&atoms, 2) - 1.0).abs() < 1e-12);
        let mut bad = s.zero_op();
        bad[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(spectral_distribution(&bad, &vac), Err(Error::NotHermitian { .. })));
    }
}
