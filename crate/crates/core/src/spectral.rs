//! Modal/grid conversions, spectral differentiation and periodic quadrature.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::curve::{Mode, SupportFourier};
use crate::error::{Error, Result};

/// Samples of a 2 pi-periodic function at `theta_j = 2 pi j / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    /// `N` must be a power of two, at least 8.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("grid size {n} is not a power of two >= 8")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new((0..n).map(|j| f(node(j, n))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn angle(&self, j: usize) -> f64 {
        node(j, self.len())
    }

    /// New grid function `f(theta_j, values[j])`.
    pub fn pointwise(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let n = self.len();
        GridFunction { values: self.values.iter().enumerate().map(|(j, &v)| f(node(j, n), v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        GridFunction { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn node(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

/// Default diagnostic grid: `max(256, 8 (K + 1))`, rounded up to a power of two.
pub fn default_grid_size(order: usize) -> usize {
    (8 * (order + 1)).max(256).next_power_of_two()
}

/// Evaluates the series at the `n` grid nodes.
pub fn synthesize(p: &SupportFourier, n: usize) -> Result<GridFunction> {
    if n < 2 * p.order() + 2 {
        return Err(Error::Alias { n, k: p.order() });
    }
    GridFunction::from_fn(n, |t| p.value(t))
}

/// Discrete Fourier coefficients up to degree `k`; exact inverse of
/// [`synthesize`] for trigonometric polynomials of degree `<= k`.
pub fn analyze(g: &GridFunction, k: usize) -> Result<SupportFourier> {
    let n = g.len();
    if 2 * k + 2 > n {
        return Err(Error::Alias { n, k });
    }
    let v = g.values();
    let a0 = v.iter().sum::<f64>() / n as f64;
    let scale = 2.0 / n as f64;
    let modes = (1..=k).map(|m| {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, &x) in v.iter().enumerate() {
            // reduce the index mod n so the angle stays in [0, 2 pi)
            let (s, c) = node((m * j) % n, n).sin_cos();
            a += x * c;
            b += x * s;
        }
        Mode::new(m, scale * a, scale * b)
    });
    SupportFourier::new(a0, modes)
}

/// `d^order / d theta^order`, computed modally: `(a, b) -> (k b, -k a)` per order.
pub fn derivative(p: &SupportFourier, order: usize) -> SupportFourier {
    let a0 = if order == 0 { p.a0() } else { 0.0 };
    p.map_modes(a0, |k, mut a, mut b| {
        let kf = k as f64;
        for _ in 0..order {
            (a, b) = (kf * b, -kf * a);
        }
        (a, b)
    })
}

/// Trapezoid rule over one period; exact for trigonometric polynomials of degree `< N`.
pub fn periodic_quadrature(g: &GridFunction) -> f64 {
    TAU / g.len() as f64 * g.values().iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Quantities {
    /// `int p^2`
    pub int_p2: f64,
    /// `int (p')^2`
    pub int_dp2: f64,
}

/// Parseval: `int p^2 = 2 pi a0^2 + pi sum (a_k^2 + b_k^2)`,
/// `int (p')^2 = pi sum k^2 (a_k^2 + b_k^2)`.
pub fn l2_quantities(p: &SupportFourier) -> L2Quantities {
    let (mut s0, mut s1) = (0.0, 0.0);
    for m in p.modes() {
        let e = m.energy();
        s0 += e;
        s1 += (m.k * m.k) as f64 * e;
    }
    L2Quantities { int_p2: TAU * p.a0() * p.a0() + PI * s0, int_dp2: PI * s1 }
}

/// FFT-based operator on a fixed grid: spectral derivatives with an optional
/// band limit. Plans are built once and reused.
pub struct SpectralOperator {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOperator").field("n", &self.n).finish()
    }
}

impl SpectralOperator {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("grid size {n} is not a power of two >= 8")));
        }
        let mut planner = FftPlanner::new();
        Ok(SpectralOperator { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Applies the Fourier multiplier `symbol(k)` to wavenumbers `|k| <= band`
    /// and zeroes the rest. The Nyquist mode is always dropped.
    pub fn apply(&self, values: &[f64], band: usize, symbol: impl Fn(i64) -> Complex64) -> Vec<f64> {
        assert_eq!(values.len(), self.n, "grid size mismatch");
        let n = self.n as i64;
        let band = band.min(self.n / 2 - 1) as i64;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (i, c) in buf.iter_mut().enumerate() {
            let i = i as i64;
            let k = if i <= n / 2 { i } else { i - n };
            if k.abs() > band || 2 * k.abs() == n {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= symbol(k);
            }
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Spectral derivative of a grid function restricted to modes `<= band`.
    pub fn derivative(&self, values: &[f64], order: u32, band: usize) -> Vec<f64> {
        self.apply(values, band, |k| Complex64::new(0.0, k as f64).powu(order))
    }

    /// Orthogonal projection onto modes `<= band`.
    pub fn project(&self, values: &[f64], band: usize) -> Vec<f64> {
        self.apply(values, band, |_| Complex64::new(1.0, 0.0))
    }
}

/// Spectral derivative of a grid function using every resolvable mode.
pub fn grid_derivative(g: &GridFunction, order: u32) -> Result<GridFunction> {
    let op = SpectralOperator::new(g.len())?;
    GridFunction::new(op.derivative(g.values(), order, g.len() / 2 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_series(a0: f64, coeffs: &[(f64, f64)]) -> SupportFourier {
        coeffs.iter().enumerate().fold(SupportFourier::constant(a0), |p, (i, &(a, b))| p.with_mode(i + 1, a, b))
    }

    fn coeffs(max_k: usize) -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
        (-2.0..2.0f64, prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_k))
    }

    #[test]
    fn synthesize_examples() {
        let g = synthesize(&SupportFourier::constant(1.0), 8).unwrap();
        assert!(g.values().iter().all(|&v| v == 1.0));
        let g = synthesize(&SupportFourier::constant(0.0).with_mode(2, 0.0, 1.0), 8).unwrap();
        for (v, e) in g.values().iter().zip([0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0]) {
            assert!((v - e).abs() < 1e-15);
        }
        let p = SupportFourier::constant(0.0).with_mode(4, 1.0, 0.0);
        assert!(matches!(synthesize(&p, 8), Err(Error::Alias { n: 8, k: 4 })));
    }

    #[test]
    fn analyze_examples() {
        let c = analyze(&GridFunction::from_fn(16, |_| 3.5).unwrap(), 3).unwrap();
        assert!((c.a0() - 3.5).abs() < 1e-15 && c.max_abs_mode_from(1) < 1e-15);
        let g = GridFunction::from_fn(16, |t| (3.0 * t).cos()).unwrap();
        let c = analyze(&g, 4).unwrap();
        let expect = SupportFourier::constant(0.0).with_mode(3, 1.0, 0.0);
        assert!(c.max_coefficient_diff(&expect) < 1e-14);
        assert!(matches!(analyze(&g, 8), Err(Error::Alias { .. })));
    }

    #[test]
    fn grid_function_validation() {
        assert!(GridFunction::new(vec![0.0; 12]).is_err());
        assert!(GridFunction::new(vec![0.0; 4]).is_err());
        assert!(GridFunction::new(vec![f64::NAN; 8]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = derivative(&SupportFourier::constant(5.0), 1);
        assert_eq!(d.a0(), 0.0);
        let d = derivative(&SupportFourier::constant(0.0).with_mode(2, 0.0, 1.0), 1);
        assert_eq!(d.mode(2), (2.0, 0.0));
        let p = SupportFourier::constant(0.0).with_mode(3, 0.7, 0.0);
        let (a, b) = derivative(&p, 2).mode(3);
        assert!((a + 6.3).abs() < 1e-15 && b == 0.0);
    }

    #[test]
    fn quadrature_examples() {
        let one = GridFunction::from_fn(8, |_| 1.0).unwrap();
        assert!((periodic_quadrature(&one) - TAU).abs() < 1e-15);
        let c2 = GridFunction::from_fn(16, |t| t.cos().powi(2)).unwrap();
        assert!((periodic_quadrature(&c2) - PI).abs() < 1e-14);
        let s3 = GridFunction::from_fn(16, |t| (3.0 * t).sin()).unwrap();
        assert!(periodic_quadrature(&s3).abs() < 1e-14);
    }

    #[test]
    fn l2_examples() {
        let q = l2_quantities(&SupportFourier::constant(1.0));
        assert_eq!(q, L2Quantities { int_p2: TAU, int_dp2: 0.0 });
        let q = l2_quantities(&SupportFourier::constant(0.0).with_mode(2, 0.0, 1.0));
        assert!((q.int_p2 - PI).abs() < 1e-15 && (q.int_dp2 - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn fft_derivative_matches_modal_derivative() {
        let p = random_series(0.3, &[(0.1, -0.4), (1.0, 0.2), (0.0, -0.3), (0.25, 0.5)]);
        let g = synthesize(&p, 64).unwrap();
        for order in 1..=3u32 {
            let fft = grid_derivative(&g, order).unwrap();
            let modal = synthesize(&derivative(&p, order as usize), 64).unwrap();
            let err = fft.zip_with(&modal, |a, b| a - b).max_abs() / modal.max_abs();
            assert!(err < 1e-12, "order {order}: {err}");
        }
    }

    #[test]
    fn band_limited_projection_drops_high_modes() {
        let op = SpectralOperator::new(32).unwrap();
        let p = random_series(1.0, &[(0.0, 0.0), (0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (0.3, 0.1)]);
        let g = synthesize(&p, 32).unwrap();
        let low = op.project(g.values(), 3);
        let expect = synthesize(&SupportFourier::constant(1.0).with_mode(2, 0.5, 0.0), 32).unwrap();
        for (a, b) in low.iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn analyze_inverts_synthesize((a0, cs) in coeffs(16)) {
            let p = random_series(a0, &cs);
            let back = analyze(&synthesize(&p, 64).unwrap(), p.order()).unwrap();
            prop_assert!(back.max_coefficient_diff(&p) < 1e-13);
        }

        #[test]
        fn parseval_matches_quadrature((a0, cs) in coeffs(16)) {
            let p = random_series(a0, &cs);
            let q = l2_quantities(&p);
            let g = synthesize(&p, 256).unwrap();
            let dg = synthesize(&derivative(&p, 1), 256).unwrap();
            prop_assert!((periodic_quadrature(&g.pointwise(|_, v| v * v)) - q.int_p2).abs() < 1e-10);
            prop_assert!((periodic_quadrature(&dg.pointwise(|_, v| v * v)) - q.int_dp2).abs() < 1e-10);
        }

        #[test]
        fn differentiation_commutes_with_synthesis((a0, cs) in coeffs(4)) {
            // centered differences on 4096 points; Taylor remainder h^2/6 |p'''|
            let p = random_series(a0, &cs);
            let n = 4096;
            let h = TAU / n as f64;
            let g = synthesize(&p, n).unwrap();
            let exact = synthesize(&derivative(&p, 1), n).unwrap();
            let bound = h * h / 6.0
                * p.modes().iter().map(|m| (m.k as f64).powi(3) * (m.a.abs() + m.b.abs())).sum::<f64>()
                + 1e-9;
            let v = g.values();
            for j in 0..n {
                let fd = (v[(j + 1) % n] - v[(j + n - 1) % n]) / (2.0 * h);
                prop_assert!((fd - exact.values()[j]).abs() <= bound);
            }
        }
    }
}
