//! Weyl quantization `φ ↦ O_h(φ) = (1/2π)∫𝓕⁻¹φ(u,v) U(uh₁,vh₂) du dv`,
//! conjugation by Weyl operators and the derivative generators `X₁, X₂`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{DirectionPair, FockOp, FockSpace, C64};
use crate::operators::{momentum, position, weyl, weyl_compressed};
use crate::symbol::Symbol;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
const REAL_TOL: f64 = 1e-14;

pub const DEFAULT_NODES: usize = 129;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-10;

/// Tensor trapezoid rule on `[−L, L]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub half_width: f64,
    pub nodes: usize,
    /// Largest admissible `|𝓕⁻¹φ|` on the boundary, relative to its peak.
    pub boundary_tol: f64,
}

impl Quadrature {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter("quadrature half-width must be positive"));
        }
        if nodes < 3 || nodes % 2 == 0 {
            return Err(Error::InvalidParameter("quadrature node count must be odd and at least 3"));
        }
        Ok(Quadrature { half_width, nodes, boundary_tol: DEFAULT_BOUNDARY_TOL })
    }

    /// Default rule for `phi`; plane waves alone need no quadrature and get a
    /// unit domain.
    pub fn for_symbol(phi: &Symbol) -> Self {
        let half_width = phi.frequency_extent().unwrap_or(1.0);
        Quadrature { half_width, nodes: DEFAULT_NODES, boundary_tol: DEFAULT_BOUNDARY_TOL }
    }

    pub fn for_symbols(phis: &[Symbol]) -> Self {
        let half_width = phis.iter().filter_map(|p| p.frequency_extent()).fold(1.0, f64::max);
        Quadrature { half_width, nodes: DEFAULT_NODES, boundary_tol: DEFAULT_BOUNDARY_TOL }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step()
    }

    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nodes {
            0.5 * self.step()
        } else {
            self.step()
        }
    }
}

/// Which matrix stands in for `U(uh₁,vh₂)` at a quadrature node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WeylRoute {
    /// Exponential of the truncated generator, see [`weyl`].
    #[default]
    Generator,
    /// Compression of the exact operator, see [`weyl_compressed`].
    Compressed,
}

fn weyl_by(route: WeylRoute, space: &FockSpace, h: &DirectionPair, u: f64, v: f64) -> Result<FockOp> {
    let h1 = h.k1.scale_re(u);
    let h2 = h.k2.scale_re(v);
    match route {
        WeylRoute::Generator => weyl(space, &h1, &h2),
        WeylRoute::Compressed => weyl_compressed(space, &h1, &h2),
    }
}

pub fn quantize(space: &FockSpace, h: &DirectionPair, phi: &Symbol, quad: &Quadrature) -> Result<FockOp> {
    let mut out = quantize_many(space, h, core::slice::from_ref(phi), quad, WeylRoute::Generator)?;
    Ok(out.pop().expect("one symbol in, one operator out"))
}

/// Quantizes several symbols against the same Weyl matrices, which are the
/// expensive part: one matrix per quadrature node.
pub fn quantize_many(
    space: &FockSpace,
    h: &DirectionPair,
    phis: &[Symbol],
    quad: &Quadrature,
    route: WeylRoute,
) -> Result<Vec<FockOp>> {
    space.check_modes(&h.k1)?;
    space.check_modes(&h.k2)?;
    if !h.is_real(REAL_TOL) {
        return Err(Error::InvalidParameter("quantization needs a real direction pair"));
    }
    let mut out: Vec<FockOp> = phis.iter().map(|_| space.zero_op()).collect();
    let split: Vec<_> = phis.iter().map(|p| p.split()).collect();

    for (acc, (waves, _)) in out.iter_mut().zip(&split) {
        for (w, x0, y0) in waves {
            *acc += weyl_by(route, space, h, *x0, *y0)? * *w;
        }
    }

    let smooth: Vec<Symbol> = split
        .iter()
        .map(|(_, parts)| Symbol::Sum(parts.clone()))
        .collect();
    if split.iter().all(|(_, parts)| parts.is_empty()) {
        return Ok(out);
    }

    let n = quad.nodes;
    let mut table: Vec<Vec<C64>> = smooth.iter().map(|_| Vec::with_capacity(n * n)).collect();
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (quad.node(i), quad.node(j));
            for (t, s) in table.iter_mut().zip(&smooth) {
                t.push(s.inverse_fourier(u, v));
            }
        }
    }
    let mut peaks = Vec::with_capacity(table.len());
    for t in &table {
        let peak = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let boundary = (0..n * n)
            .filter(|&idx| {
                let (i, j) = (idx / n, idx % n);
                i == 0 || j == 0 || i + 1 == n || j + 1 == n
            })
            .map(|idx| t[idx].norm())
            .fold(0.0, f64::max);
        if peak > 0.0 && boundary > quad.boundary_tol * peak {
            return Err(Error::QuadratureDomain { boundary, peak });
        }
        peaks.push(peak);
    }

    // The grid is symmetric, so node `idx` and its mirror `n²−1−idx` share
    // one matrix through `U(−u,−v) = U(u,v)*`.
    let significant = |idx: usize| table.iter().zip(&peaks).any(|(t, peak)| t[idx].norm() > 1e-17 * peak);
    for idx in 0..=(n * n - 1) / 2 {
        let mirror = n * n - 1 - idx;
        let (i, j) = (idx / n, idx % n);
        let use_here = significant(idx);
        let use_mirror = mirror != idx && significant(mirror);
        if !use_here && !use_mirror {
            continue;
        }
        let cell = quad.weight(i) * quad.weight(j) / TWO_PI;
        let u = weyl_by(route, space, h, quad.node(i), quad.node(j))?;
        for (acc, t) in out.iter_mut().zip(&table) {
            let c = t[idx] * cell;
            if use_here && !c.is_zero() {
                *acc += &u * c;
            }
        }
        if use_mirror {
            let ud = u.adjoint();
            for (acc, t) in out.iter_mut().zip(&table) {
                let c = t[mirror] * cell;
                if !c.is_zero() {
                    *acc += &ud * c;
                }
            }
        }
    }
    Ok(out)
}

/// `U(−k₂/2, k₁/2) M U(−k₂/2, k₁/2)*`.
pub fn conjugate_by_weyl(space: &FockSpace, k: &DirectionPair, m: &FockOp) -> Result<FockOp> {
    if !k.is_real(REAL_TOL) {
        return Err(Error::InvalidParameter("Girsanov shift needs a real direction pair"));
    }
    let w = weyl(space, &k.k2.scale_re(-0.5), &k.k1.scale_re(0.5))?;
    Ok(&w * m * w.adjoint())
}

/// The translation `(⟨k₁,h₁⟩, ⟨k₂,h₂⟩)` induced by the Girsanov shift along `k`.
pub fn girsanov_shift(h: &DirectionPair, k: &DirectionPair) -> (f64, f64) {
    (k.k1.inner(&h.k1).re, k.k2.inner(&h.k2).re)
}

/// `X₁, X₂` with `[X₁, O_h(φ)] = O_h(∂φ/∂x)` and `[X₂, O_h(φ)] = O_h(∂φ/∂y)`.
pub fn regularity_generators(
    space: &FockSpace,
    h: &DirectionPair,
    k: &DirectionPair,
    l: &DirectionPair,
) -> Result<(FockOp, FockOp)> {
    let a11 = h.k1.conj().inner(&k.k1);
    let a12 = h.k2.conj().inner(&k.k2);
    let a21 = h.k1.conj().inner(&l.k1);
    let a22 = h.k2.conj().inner(&l.k2);
    let det = a11 * a22 - a12 * a21;
    let scale = (a11.norm() + a12.norm()) * (a21.norm() + a22.norm());
    if det.norm() <= 1e-12 * scale.max(1e-300) {
        return Err(Error::SingularDirections { det: det.norm() });
    }
    let half_i = C64::new(0.0, 0.5);
    let yk = (position(space, &k.k1)? - momentum(space, &k.k2)?) * half_i;
    let yl = (position(space, &l.k1)? - momentum(space, &l.k2)?) * half_i;
    let x1 = (&yk * a22 - &yl * a12) / det;
    let x2 = (&yl * a11 - &yk * a21) / det;
    Ok((x1, x2))
}

/// `Σ_i w_i f(u_i)` on the 1-D trapezoid grid; used to sanity-check weights.
pub fn trapezoid_1d(quad: &Quadrature, f: impl Fn(f64) -> f64) -> f64 {
    (0..quad.nodes).map(|i| quad.weight(i) * f(quad.node(i))).sum()
}

/// `(i/2)[Q(k̄₁) − P(k̄₂), ·]` applied to `m`; the left side of the
/// integration-by-parts identity for quantized symbols.
pub fn ibp_commutator(space: &FockSpace, k: &DirectionPair, m: &FockOp) -> Result<FockOp> {
    let g = (position(space, &k.k1.conj())? - momentum(space, &k.k2.conj())?) * C64::new(0.0, 0.5);
    Ok(&g * m - m * &g)
}

/// `⟨k₁,h₁⟩∂φ/∂x + ⟨k₂,h₂⟩∂φ/∂y`, the right side of the same identity.
pub fn ibp_symbol(h: &DirectionPair, k: &DirectionPair, phi: &Symbol) -> Symbol {
    Symbol::combine(k.k1.inner(&h.k1), phi.dx(), k.k2.inner(&h.k2), phi.dy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{interior_norm, HVec};
    use crate::linalg::{commutator, max_abs};

    fn pair(a: &[f64], b: &[f64]) -> DirectionPair {
        DirectionPair::new(HVec::real(a), HVec::real(b))
    }

    #[test]
    fn trapezoid_integrates_a_gaussian() {
        let q = Quadrature::new(10.0, 129).unwrap();
        let v = trapezoid_1d(&q, |x| libm::exp(-x * x));
        assert!((v - core::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!(Quadrature::new(1.0, 128).is_err());
    }

    #[test]
    fn plane_wave_is_the_weyl_operator() {
        let s = FockSpace::new(2, 4).unwrap();
        let h = pair(&[0.3, 0.1], &[-0.2, 0.5]);
        let phi = Symbol::PlaneWave { x0: 0.7, y0: -1.3 };
        let o = quantize(&s, &h, &phi, &Quadrature::for_symbol(&phi)).unwrap();
        let u = weyl(&s, &h.k1.scale_re(0.7), &h.k2.scale_re(-1.3)).unwrap();
        assert_eq!(o, u);
        let one = quantize(&s, &h, &Symbol::constant(), &Quadrature::for_symbol(&phi)).unwrap();
        assert!(max_abs(&(one - s.identity())) < 1e-15);
    }

    #[test]
    fn real_packet_quantizes_to_hermitian() {
        let s = FockSpace::new(1, 10).unwrap();
        let h = pair(&[1.0], &[0.5]);
        let phi = Symbol::gaussian(0.7, 0.2, -0.1, 0.0, 0.0).unwrap();
        let o = quantize(&s, &h, &phi, &Quadrature::for_symbol(&phi)).unwrap();
        assert!(max_abs(&(&o - o.adjoint())) < 1e-12);
        let c = quantize(&s, &h, &phi.conj(), &Quadrature::for_symbol(&phi)).unwrap();
        assert!(max_abs(&(c - o.adjoint())) < 1e-12);
    }

    #[test]
    fn small_domain_is_refused() {
        let s = FockSpace::new(1, 4).unwrap();
        let phi = Symbol::gaussian(1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let q = Quadrature::new(1.0, 33).unwrap();
        let err = quantize(&s, &pair(&[1.0], &[1.0]), &phi, &q).unwrap_err();
        assert!(matches!(err, Error::QuadratureDomain { .. }));
    }

    #[test]
    fn regularity_generators_on_unit_matrix() {
        let s = FockSpace::new(1, 6).unwrap();
        let h = pair(&[1.0], &[1.0]);
        let (x1, x2) = regularity_generators(&s, &h, &pair(&[1.0], &[0.0]), &pair(&[0.0], &[1.0])).unwrap();
        let q = position(&s, &HVec::mode(1, 0)).unwrap();
        let p = momentum(&s, &HVec::mode(1, 0)).unwrap();
        assert!(max_abs(&(x1 - q * C64::new(0.0, 0.5))) < 1e-15);
        assert!(max_abs(&(x2 + p * C64::new(0.0, 0.5))) < 1e-15);
        let singular = regularity_generators(&s, &h, &pair(&[1.0], &[0.0]), &pair(&[1.0], &[0.0]));
        assert!(matches!(singular, Err(Error::SingularDirections { .. })));
    }

    #[test]
    fn generator_commutes_into_weyl_derivative() {
        // [X₁, U(uh₁,vh₂)] = iu U on the interior, the plane-wave case of ∂/∂x
        let s = FockSpace::new(1, 24).unwrap();
        let h = pair(&[1.0], &[1.0]);
        let (x1, x2) = regularity_generators(&s, &h, &pair(&[1.0], &[0.3]), &pair(&[-0.2], &[1.0])).unwrap();
        let (u, v) = (0.4, -0.3);
        let w = weyl(&s, &h.k1.scale_re(u), &h.k2.scale_re(v)).unwrap();
        let r1 = commutator(&x1, &w) - &w * C64::new(0.0, u);
        let r2 = commutator(&x2, &w) - &w * C64::new(0.0, v);
        assert!(interior_norm(&s, &r1, 8) < 1e-9);
        assert!(interior_norm(&s, &r2, 8) < 1e-9);
    }
}
