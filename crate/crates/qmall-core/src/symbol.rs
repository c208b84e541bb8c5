//! Closed-form test functions on `ℝ²`.
//!
//! Fourier convention: `𝓕φ(u,v) = (1/2π)∫φ(x,y)e^{i(ux+vy)}dxdy` and
//! `𝓕⁻¹φ(u,v) = (1/2π)∫φ(x,y)e^{−i(ux+vy)}dxdy`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::C64;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    /// `e^{i(x₀x + y₀y)}`.
    PlaneWave { x0: f64, y0: f64 },
    /// `e^{−α((x−cx)² + (y−cy)²)} e^{i(px x + py y)}`.
    GaussianPacket { alpha: f64, cx: f64, cy: f64, px: f64, py: f64 },
    /// `Σ c[a][b] (x−cx)^a (y−cy)^b e^{−α((x−cx)² + (y−cy)²)} e^{i(px x + py y)}`.
    PolyGaussian { alpha: f64, center: (f64, f64), momentum: (f64, f64), coeffs: Vec<Vec<C64>> },
    Sum(Vec<(C64, Symbol)>),
}

impl Symbol {
    pub fn constant() -> Self {
        Symbol::PlaneWave { x0: 0.0, y0: 0.0 }
    }

    pub fn gaussian(alpha: f64, cx: f64, cy: f64, px: f64, py: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("Gaussian width must be positive"));
        }
        Ok(Symbol::GaussianPacket { alpha, cx, cy, px, py })
    }

    pub fn scaled(self, w: C64) -> Self {
        Symbol::Sum(alloc::vec![(w, self)])
    }

    /// `α φ + β ψ`.
    pub fn combine(a: C64, phi: Symbol, b: C64, psi: Symbol) -> Self {
        Symbol::Sum(alloc::vec![(a, phi), (b, psi)])
    }

    pub fn value(&self, x: f64, y: f64) -> C64 {
        match self {
            Symbol::PlaneWave { x0, y0 } => C64::new(0.0, x0 * x + y0 * y).exp(),
            Symbol::GaussianPacket { .. } => self.to_poly().expect("packet").value(x, y),
            Symbol::PolyGaussian { alpha, center, momentum, coeffs } => {
                let (sx, sy) = (x - center.0, y - center.1);
                let mut poly = C64::zero();
                let mut xa = 1.0;
                for row in coeffs {
                    let mut yb = 1.0;
                    for c in row {
                        poly += c * (xa * yb);
                        yb *= sy;
                    }
                    xa *= sx;
                }
                let env = libm::exp(-alpha * (sx * sx + sy * sy));
                poly * env * C64::new(0.0, momentum.0 * x + momentum.1 * y).exp()
            }
            Symbol::Sum(terms) => terms.iter().map(|(w, s)| w * s.value(x, y)).sum(),
        }
    }

    /// The packet as a degree-zero polynomial Gaussian; `None` for other variants.
    pub fn to_poly(&self) -> Option<Symbol> {
        match self {
            Symbol::GaussianPacket { alpha, cx, cy, px, py } => Some(Symbol::PolyGaussian {
                alpha: *alpha,
                center: (*cx, *cy),
                momentum: (*px, *py),
                coeffs: alloc::vec![alloc::vec![C64::new(1.0, 0.0)]],
            }),
            Symbol::PolyGaussian { .. } => Some(self.clone()),
            _ => None,
        }
    }

    pub fn dx(&self) -> Symbol {
        self.partial(Axis::X)
    }

    pub fn dy(&self) -> Symbol {
        self.partial(Axis::Y)
    }

    fn partial(&self, axis: Axis) -> Symbol {
        match self {
            Symbol::PlaneWave { x0, y0 } => {
                let k = match axis {
                    Axis::X => *x0,
                    Axis::Y => *y0,
                };
                self.clone().scaled(C64::new(0.0, k))
            }
            Symbol::GaussianPacket { .. } => self.to_poly().expect("packet").partial(axis),
            Symbol::PolyGaussian { alpha, center, momentum, coeffs } => {
                let c = transpose_if(coeffs, axis == Axis::Y);
                let p = match axis {
                    Axis::X => momentum.0,
                    Axis::Y => momentum.1,
                };
                let rows = c.len() + 1;
                let cols = c.iter().map(|r| r.len()).max().unwrap_or(0);
                let get = |a: usize, b: usize| c.get(a).and_then(|r| r.get(b)).copied().unwrap_or(C64::zero());
                // ∂(s^a e^{−αs²} e^{ips}) = (a s^{a−1} − 2α s^{a+1} + ip s^a) e^{−αs²} e^{ips}
                let out: Vec<Vec<C64>> = (0..rows)
                    .map(|a| {
                        (0..cols)
                            .map(|b| {
                                let mut v = get(a + 1, b) * (a + 1) as f64 + get(a, b) * C64::new(0.0, p);
                                if a > 0 {
                                    v -= get(a - 1, b) * (2.0 * alpha);
                                }
                                v
                            })
                            .collect()
                    })
                    .collect();
                Symbol::PolyGaussian {
                    alpha: *alpha,
                    center: *center,
                    momentum: *momentum,
                    coeffs: transpose_if(&out, axis == Axis::Y),
                }
            }
            Symbol::Sum(terms) => Symbol::Sum(terms.iter().map(|(w, s)| (*w, s.partial(axis))).collect()),
        }
    }

    /// `T_{(x₀,y₀)}φ(x,y) = φ(x+x₀, y+y₀)`.
    pub fn translate(&self, x0: f64, y0: f64) -> Symbol {
        match self {
            Symbol::PlaneWave { x0: a, y0: b } => self.clone().scaled(C64::new(0.0, a * x0 + b * y0).exp()),
            Symbol::GaussianPacket { .. } => self.to_poly().expect("packet").translate(x0, y0),
            Symbol::PolyGaussian { alpha, center, momentum, coeffs } => {
                let phase = C64::new(0.0, momentum.0 * x0 + momentum.1 * y0).exp();
                Symbol::PolyGaussian {
                    alpha: *alpha,
                    center: (center.0 - x0, center.1 - y0),
                    momentum: *momentum,
                    coeffs: coeffs.iter().map(|r| r.iter().map(|c| c * phase).collect()).collect(),
                }
            }
            Symbol::Sum(terms) => Symbol::Sum(terms.iter().map(|(w, s)| (*w, s.translate(x0, y0))).collect()),
        }
    }

    pub fn conj(&self) -> Symbol {
        match self {
            Symbol::PlaneWave { x0, y0 } => Symbol::PlaneWave { x0: -x0, y0: -y0 },
            Symbol::GaussianPacket { alpha, cx, cy, px, py } => {
                Symbol::GaussianPacket { alpha: *alpha, cx: *cx, cy: *cy, px: -px, py: -py }
            }
            Symbol::PolyGaussian { alpha, center, momentum, coeffs } => Symbol::PolyGaussian {
                alpha: *alpha,
                center: *center,
                momentum: (-momentum.0, -momentum.1),
                coeffs: coeffs.iter().map(|r| r.iter().map(|c| c.conj()).collect()).collect(),
            },
            Symbol::Sum(terms) => Symbol::Sum(terms.iter().map(|(w, s)| (w.conj(), s.conj())).collect()),
        }
    }

    /// Plane-wave components `(weight, x₀, y₀)` and the remaining
    /// Gaussian-type components `(weight, symbol)`, with sums flattened.
    pub fn split(&self) -> (Vec<(C64, f64, f64)>, Vec<(C64, Symbol)>) {
        let mut waves = Vec::new();
        let mut smooth = Vec::new();
        self.split_into(C64::new(1.0, 0.0), &mut waves, &mut smooth);
        (waves, smooth)
    }

    fn split_into(&self, w: C64, waves: &mut Vec<(C64, f64, f64)>, smooth: &mut Vec<(C64, Symbol)>) {
        match self {
            Symbol::PlaneWave { x0, y0 } => waves.push((w, *x0, *y0)),
            Symbol::GaussianPacket { .. } | Symbol::PolyGaussian { .. } => smooth.push((w, self.clone())),
            Symbol::Sum(terms) => {
                for (v, s) in terms {
                    s.split_into(w * v, waves, smooth);
                }
            }
        }
    }

    /// Closed-form `𝓕⁻¹φ(u,v)`. Plane waves transform to point masses and
    /// contribute nothing here; use [`Symbol::split`] to handle them.
    pub fn inverse_fourier(&self, u: f64, v: f64) -> C64 {
        match self {
            Symbol::PlaneWave { .. } => C64::zero(),
            Symbol::GaussianPacket { .. } => self.to_poly().expect("packet").inverse_fourier(u, v),
            Symbol::PolyGaussian { alpha, center, momentum, coeffs } => {
                let da = coeffs.len();
                let db = coeffs.iter().map(|r| r.len()).max().unwrap_or(0);
                let xs = moment_transforms(*alpha, u - momentum.0, center.0, da);
                let ys = moment_transforms(*alpha, v - momentum.1, center.1, db);
                let mut acc = C64::zero();
                for (a, row) in coeffs.iter().enumerate() {
                    for (b, c) in row.iter().enumerate() {
                        acc += c * xs[a] * ys[b];
                    }
                }
                acc / TWO_PI
            }
            Symbol::Sum(terms) => terms.iter().map(|(w, s)| w * s.inverse_fourier(u, v)).sum(),
        }
    }

    /// Smallest width among the Gaussian components, if any.
    pub fn min_alpha(&self) -> Option<f64> {
        match self {
            Symbol::PlaneWave { .. } => None,
            Symbol::GaussianPacket { alpha, .. } | Symbol::PolyGaussian { alpha, .. } => Some(*alpha),
            Symbol::Sum(terms) => terms.iter().filter_map(|(_, s)| s.min_alpha()).reduce(f64::min),
        }
    }

    /// Half-width beyond which `𝓕⁻¹φ` is below `e^{−40}` of its Gaussian
    /// envelope on both axes: `max(|p| + √(160α))` over components.
    pub fn frequency_extent(&self) -> Option<f64> {
        match self {
            Symbol::PlaneWave { .. } => None,
            Symbol::GaussianPacket { .. } => self.to_poly().expect("packet").frequency_extent(),
            Symbol::PolyGaussian { alpha, momentum, coeffs, .. } => {
                let degree = coeffs.len().max(coeffs.iter().map(|r| r.len()).max().unwrap_or(0));
                let reach = libm::sqrt((160.0 + 8.0 * degree as f64) * alpha);
                Some(momentum.0.abs().max(momentum.1.abs()) + reach)
            }
            Symbol::Sum(terms) => terms.iter().filter_map(|(_, s)| s.frequency_extent()).reduce(f64::max),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

fn transpose_if(c: &[Vec<C64>], flip: bool) -> Vec<Vec<C64>> {
    if !flip {
        return c.to_vec();
    }
    let rows = c.iter().map(|r| r.len()).max().unwrap_or(0);
    (0..rows)
        .map(|b| c.iter().map(|r| r.get(b).copied().unwrap_or(C64::zero())).collect())
        .collect()
}

/// `e^{−iωc} ∫ s^a e^{−αs² − iωs} ds` for `a < count`.
fn moment_transforms(alpha: f64, omega: f64, center: f64, count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count.max(1));
    let i0 = C64::new(libm::sqrt(core::f64::consts::PI / alpha) * libm::exp(-omega * omega / (4.0 * alpha)), 0.0);
    out.push(i0);
    for a in 0..count.saturating_sub(1) {
        let prev = if a == 0 { C64::zero() } else { out[a - 1] };
        let next = (prev * a as f64 - C64::new(0.0, omega) * out[a]) / (2.0 * alpha);
        out.push(next);
    }
    out.truncate(count);
    let shift = C64::new(0.0, -omega * center).exp();
    out.iter().map(|z| z * shift).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn samples() -> Vec<Symbol> {
        vec![
            Symbol::gaussian(0.8, 0.3, -0.2, 0.5, -1.1).unwrap(),
            Symbol::PolyGaussian {
                alpha: 1.3,
                center: (-0.4, 0.25),
                momentum: (0.7, 0.2),
                coeffs: vec![vec![C64::new(1.0, 0.5), C64::new(0.0, -0.3)], vec![C64::new(0.4, 0.0)]],
            },
            Symbol::combine(
                C64::new(0.5, 0.2),
                Symbol::gaussian(1.5, 0.0, 0.0, 0.0, 0.0).unwrap(),
                C64::new(-1.0, 0.0),
                Symbol::gaussian(0.6, 0.1, 0.2, -0.3, 0.4).unwrap(),
            ),
        ]
    }

    // forward integral by a dense midpoint rule over a wide box
    fn numeric_inverse_fourier(phi: &Symbol, u: f64, v: f64) -> C64 {
        let n = 400;
        let l = 8.0;
        let h = 2.0 * l / n as f64;
        let mut acc = C64::zero();
        for i in 0..n {
            let x = -l + (i as f64 + 0.5) * h;
            for j in 0..n {
                let y = -l + (j as f64 + 0.5) * h;
                acc += phi.value(x, y) * C64::new(0.0, -(u * x + v * y)).exp();
            }
        }
        acc * h * h / TWO_PI
    }

    #[test]
    fn inverse_fourier_matches_quadrature() {
        for phi in samples() {
            for &(u, v) in &[(0.0, 0.0), (0.7, -0.4), (-1.2, 1.5)] {
                let exact = phi.inverse_fourier(u, v);
                let numeric = numeric_inverse_fourier(&phi, u, v);
                assert!((exact - numeric).norm() < 1e-9, "{phi:?} {u} {v}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for phi in samples() {
            for &(x, y) in &[(0.1, 0.2), (-0.6, 0.4), (1.0, -0.9)] {
                let fd_x = (phi.value(x + h, y) - phi.value(x - h, y)) / (2.0 * h);
                let fd_y = (phi.value(x, y + h) - phi.value(x, y - h)) / (2.0 * h);
                assert!((phi.dx().value(x, y) - fd_x).norm() < 1e-8);
                assert!((phi.dy().value(x, y) - fd_y).norm() < 1e-8);
            }
        }
        let w = Symbol::PlaneWave { x0: 0.3, y0: -2.0 };
        assert!((w.dy().value(0.5, 0.5) - C64::new(0.0, -2.0) * w.value(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn translation_and_conjugation_pointwise() {
        let mut all = samples();
        all.push(Symbol::PlaneWave { x0: 1.5, y0: 0.5 });
        for phi in all {
            let t = phi.translate(0.4, -0.7);
            let c = phi.conj();
            for &(x, y) in &[(0.0, 0.0), (0.3, -0.5), (-1.1, 0.8)] {
                assert!((t.value(x, y) - phi.value(x + 0.4, y - 0.7)).norm() < 1e-14);
                assert!((c.value(x, y) - phi.value(x, y).conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn inverse_fourier_of_translation_is_a_phase() {
        for phi in samples() {
            let (x0, y0) = (0.4, -0.3);
            for &(u, v) in &[(0.2, 0.1), (-0.8, 0.6)] {
                let lhs = phi.translate(x0, y0).inverse_fourier(u, v);
                let rhs = phi.inverse_fourier(u, v) * C64::new(0.0, u * x0 + v * y0).exp();
                assert!((lhs - rhs).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn split_flattens_sums() {
        let s = Symbol::combine(
            C64::new(2.0, 0.0),
            Symbol::PlaneWave { x0: 1.0, y0: 0.0 },
            C64::new(0.0, 1.0),
            Symbol::gaussian(1.0, 0.0, 0.0, 0.0, 0.0).unwrap().scaled(C64::new(3.0, 0.0)),
        );
        let (waves, smooth) = s.split();
        assert_eq!(waves, vec![(C64::new(2.0, 0.0), 1.0, 0.0)]);
        assert_eq!(smooth.len(), 1);
        assert_eq!(smooth[0].0, C64::new(0.0, 3.0));
        assert!(Symbol::gaussian(0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }
}
