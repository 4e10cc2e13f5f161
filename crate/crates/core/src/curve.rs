//! Legendre curves with `ell = 1`, represented by the Fourier series of
//! their support function.
//!
//! A curve is generated from its support function `p` by
//! `gamma(theta) = p(theta) nu(theta) + p'(theta) mu(theta)` with the fixed
//! frame `nu = (cos theta, sin theta)`, `mu = (-sin theta, cos theta)`.
//! Its second invariant is `beta = p + p''`; zeros of `beta` are cusps.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{periodic_quadrature, GridFunction};

/// `|beta|` at or below this is treated as a singular point by [`curvature_at`].
pub const SINGULARITY_TOL: f64 = 1e-9;

/// Grid values of `beta` below this count as tangential zeros in [`singular_angles`].
pub const ROOT_TOL: f64 = 1e-9;

const BISECTION_TOL: f64 = 1e-12;

/// One Fourier mode `a cos(k theta) + b sin(k theta)`, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub k: usize,
    pub a: f64,
    pub b: f64,
}

impl Mode {
    pub fn new(k: usize, a: f64, b: f64) -> Self {
        Mode { k, a, b }
    }

    /// `a^2 + b^2`.
    pub fn energy(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }
}

/// Truncated Fourier series `a0 + sum_k (a_k cos k theta + b_k sin k theta)`.
///
/// Used for support functions and for every series derived from them
/// (`beta`, derivatives). Modes are stored sparsely and kept sorted by `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportFourier {
    a0: f64,
    modes: Vec<Mode>,
}

impl SupportFourier {
    pub fn constant(a0: f64) -> Self {
        SupportFourier { a0, modes: Vec::new() }
    }

    /// Builds a series from an unordered list of modes. Rejects `k = 0`,
    /// repeated `k` and non-finite coefficients.
    pub fn new(a0: f64, modes: impl IntoIterator<Item = Mode>) -> Result<Self> {
        if !a0.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut modes: Vec<Mode> = modes.into_iter().collect();
        for m in &modes {
            if m.k == 0 {
                return Err(Error::InvalidMode { k: 0 });
            }
            if !m.a.is_finite() || !m.b.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        modes.sort_by_key(|m| m.k);
        if let Some(w) = modes.windows(2).find(|w| w[0].k == w[1].k) {
            return Err(Error::DuplicateMode { k: w[0].k, line: None });
        }
        Ok(SupportFourier { a0, modes })
    }

    /// Sets mode `k`, replacing any existing entry.
    ///
    /// Panics if `k == 0`; use the constant term for that.
    pub fn with_mode(mut self, k: usize, a: f64, b: f64) -> Self {
        self.set_mode(k, a, b);
        self
    }

    pub fn set_mode(&mut self, k: usize, a: f64, b: f64) {
        assert!(k >= 1, "mode index must be >= 1");
        match self.modes.binary_search_by_key(&k, |m| m.k) {
            Ok(i) => {
                self.modes[i].a = a;
                self.modes[i].b = b;
            }
            Err(i) => self.modes.insert(i, Mode { k, a, b }),
        }
    }

    pub fn with_a0(mut self, a0: f64) -> Self {
        self.a0 = a0;
        self
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Coefficients of mode `k` (`(a0, 0)` for `k = 0`), zero when absent.
    pub fn mode(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            return (self.a0, 0.0);
        }
        self.modes.binary_search_by_key(&k, |m| m.k).map(|i| (self.modes[i].a, self.modes[i].b)).unwrap_or((0.0, 0.0))
    }

    /// Truncation order: the largest `k` present, 0 for a constant.
    pub fn order(&self) -> usize {
        self.modes.last().map_or(0, |m| m.k)
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.a0
            + self
                .modes
                .iter()
                .map(|m| {
                    let (s, c) = (m.k as f64 * theta).sin_cos();
                    m.a * c + m.b * s
                })
                .sum::<f64>()
    }

    /// First derivative in `theta`, evaluated pointwise.
    pub fn slope(&self, theta: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let k = m.k as f64;
                let (s, c) = (k * theta).sin_cos();
                k * (m.b * c - m.a * s)
            })
            .sum()
    }

    /// Applies `f(k, a, b) -> (a', b')` to every mode, keeping `a0`.
    pub fn map_modes(&self, a0: f64, mut f: impl FnMut(usize, f64, f64) -> (f64, f64)) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let (a, b) = f(m.k, m.a, m.b);
                Mode { k: m.k, a, b }
            })
            .collect();
        SupportFourier { a0, modes }
    }

    pub fn negated(&self) -> Self {
        self.map_modes(-self.a0, |_, a, b| (-a, -b))
    }

    /// Shifts the curve by `(dx, dy)`; only mode 1 changes.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let (a1, b1) = self.mode(1);
        self.clone().with_mode(1, a1 + dx, b1 + dy)
    }

    /// Largest `|a_k|, |b_k|` over modes with `k >= k_min`.
    pub fn max_abs_mode_from(&self, k_min: usize) -> f64 {
        self.modes.iter().filter(|m| m.k >= k_min).map(|m| m.a.abs().max(m.b.abs())).fold(0.0, f64::max)
    }

    /// Largest coefficient difference, treating missing modes as zero.
    pub fn max_coefficient_diff(&self, other: &SupportFourier) -> f64 {
        let top = self.order().max(other.order());
        (1..=top).fold((self.a0 - other.a0).abs(), |acc, k| {
            let (a, b) = self.mode(k);
            let (c, d) = other.mode(k);
            acc.max((a - c).abs()).max((b - d).abs())
        })
    }
}

impl fmt::Display for SupportFourier {
    /// Writes the curve text format; floats use the shortest representation
    /// that parses back to the same bits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a0 = {}", self.a0)?;
        for m in &self.modes {
            writeln!(f, "mode {} = {} {}", m.k, m.a, m.b)?;
        }
        Ok(())
    }
}

impl FromStr for SupportFourier {
    type Err = Error;

    /// Parses lines `a0 = <float>` and `mode <k> = <a_k> <b_k>`.
    /// Blank lines and `#` comments are skipped; anything else is an error.
    fn from_str(text: &str) -> Result<Self> {
        let mut a0: Option<f64> = None;
        let mut curve = SupportFourier::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            let key: Vec<&str> = key.split_whitespace().collect();
            let nums = value
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| parse_err(format!("`{s}` is not a number"))).and_then(|v| {
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(parse_err(format!("`{s}` is not finite")))
                        }
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            match key.as_slice() {
                ["a0"] => {
                    if a0.is_some() {
                        return Err(parse_err("a0 given twice".into()));
                    }
                    let [v] = nums[..] else {
                        return Err(parse_err("a0 takes exactly one value".into()));
                    };
                    a0 = Some(v);
                }
                ["mode", k] => {
                    let k: usize = k.parse().map_err(|_| parse_err(format!("`{k}` is not a mode index")))?;
                    if k == 0 {
                        return Err(parse_err("mode index must be >= 1; use a0".into()));
                    }
                    let [a, b] = nums[..] else {
                        return Err(parse_err(format!("mode {k} takes exactly two values")));
                    };
                    if curve.modes.iter().any(|m| m.k == k) {
                        return Err(Error::DuplicateMode { k, line: Some(line_no) });
                    }
                    curve.set_mode(k, a, b);
                }
                _ => return Err(parse_err(format!("unknown key `{}`", key.join(" ")))),
            }
        }
        curve.a0 = a0.unwrap_or(0.0);
        Ok(curve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// The curvature pair `(ell, beta)` with `ell` fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePairView {
    pub ell: f64,
    pub beta: SupportFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Convex,
    EllConvexNonconvex,
    DegeneratePoint,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CurveKind::Convex => "Convex",
            CurveKind::EllConvexNonconvex => "EllConvexNonconvex",
            CurveKind::DegeneratePoint => "DegeneratePoint",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveClass {
    pub kind: CurveKind,
    pub min_beta: f64,
    pub min_p: f64,
}

/// `gamma(theta) = p nu + p' mu`.
pub fn eval_point(p: &SupportFourier, theta: f64) -> Point2 {
    let (s, c) = theta.sin_cos();
    let (v, dv) = (p.value(theta), p.slope(theta));
    Point2::new(v * c - dv * s, v * s + dv * c)
}

/// `beta = p + p''`: mode `k` is scaled by `1 - k^2`, so mode 1 vanishes.
pub fn beta_of(p: &SupportFourier) -> CurvaturePairView {
    let beta = p.map_modes(p.a0(), |k, a, b| {
        let f = 1.0 - (k * k) as f64;
        (f * a, f * b)
    });
    CurvaturePairView { ell: 1.0, beta }
}

pub fn algebraic_length(p: &SupportFourier) -> f64 {
    TAU * p.a0()
}

/// `pi a0^2 + (pi/2) sum_{k>=2} (1 - k^2)(a_k^2 + b_k^2)`.
pub fn algebraic_area(p: &SupportFourier) -> f64 {
    let tail: f64 = p.modes().iter().filter(|m| m.k >= 2).map(|m| (1.0 - (m.k * m.k) as f64) * m.energy()).sum();
    PI * p.a0() * p.a0() + 0.5 * PI * tail
}

pub fn steiner_point(p: &SupportFourier) -> Point2 {
    let (a1, b1) = p.mode(1);
    Point2::new(a1, b1)
}

/// Classical curvature `1/|beta|`.
pub fn curvature_at(p: &SupportFourier, theta: f64) -> Result<f64> {
    let beta = beta_of(p).beta.value(theta);
    if beta.abs() <= SINGULARITY_TOL {
        return Err(Error::SingularPoint { theta, beta: beta.abs() });
    }
    Ok(1.0 / beta.abs())
}

fn check_scan_grid(p: &SupportFourier, n: usize) -> Result<()> {
    let need = 4 * (p.order() + 1);
    if n < need {
        return Err(Error::InvalidGrid(format!(
            "scan grid of {n} points is too coarse for order {}; need at least {need}",
            p.order()
        )));
    }
    Ok(())
}

/// Angles in `[0, 2 pi)` where `beta` vanishes (the cusps of the curve).
///
/// Sign changes on an `n`-point scan are bisected to 1e-12; grid points with
/// `|beta| < ROOT_TOL` are reported as tangential zeros.
pub fn singular_angles(p: &SupportFourier, n: usize) -> Result<Vec<f64>> {
    check_scan_grid(p, n)?;
    let beta = beta_of(p).beta;
    let h = TAU / n as f64;
    let samples: Vec<f64> = (0..n).map(|j| beta.value(j as f64 * h)).collect();
    let mut roots = Vec::new();
    for j in 0..n {
        let (t0, f0) = (j as f64 * h, samples[j]);
        let f1 = samples[(j + 1) % n];
        if f0.abs() < ROOT_TOL {
            roots.push(t0);
        } else if f1.abs() >= ROOT_TOL && f0.signum() != f1.signum() {
            roots.push(bisect(|t| beta.value(t), t0, t0 + h, f0));
        }
    }
    let mut roots: Vec<f64> = roots.into_iter().map(|t| t.rem_euclid(TAU)).collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() < 1e-9);
    if roots.len() > 1 && roots[0] + TAU - roots[roots.len() - 1] < 1e-9 {
        roots.pop();
    }
    Ok(roots)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn classify(p: &SupportFourier, n: usize) -> Result<CurveClass> {
    check_scan_grid(p, n)?;
    let beta = beta_of(p).beta;
    let h = TAU / n as f64;
    let (mut min_p, mut min_beta) = (f64::INFINITY, f64::INFINITY);
    for j in 0..n {
        let t = j as f64 * h;
        min_p = min_p.min(p.value(t));
        min_beta = min_beta.min(beta.value(t));
    }
    let only_translation = p.max_abs_mode_from(2) == 0.0;
    let kind = if only_translation && p.a0() == 0.0 {
        CurveKind::DegeneratePoint
    } else if min_p > 0.0 && min_beta > 0.0 {
        CurveKind::Convex
    } else {
        CurveKind::EllConvexNonconvex
    };
    Ok(CurveClass { kind, min_beta, min_p })
}

/// `(int beta cos, int beta sin)` by periodic quadrature. Both vanish for
/// any `beta` that comes from a support function.
pub fn ell_convex_residuals(beta: &GridFunction) -> (f64, f64) {
    let cos = beta.pointwise(|t, v| v * t.cos());
    let sin = beta.pointwise(|t, v| v * t.sin());
    (periodic_quadrature(&cos), periodic_quadrature(&sin))
}
