//! Geometric inequalities for `ell`-convex Legendre curves, checked on
//! single curves and over reproducible random ensembles.
//!
//! Every quantity is evaluated from the Fourier coefficients:
//! `L = 2 pi a0`, `A = pi a0^2 + (pi/2) sum (1 - k^2) c_k`,
//! `int beta^2 = 2 pi a0^2 + pi sum (1 - k^2)^2 c_k`,
//! `int beta_th^2 = pi sum k^2 (1 - k^2)^2 c_k` with `c_k = a_k^2 + b_k^2`.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{algebraic_area, algebraic_length, beta_of, Mode, SupportFourier};
use crate::error::{Error, Result};
use crate::flow::beta_l2;
use crate::par::{map_indexed, Execution};
use crate::spectral::{default_grid_size, l2_quantities};

/// A slack below this counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

/// `|L|` at or below this counts as zero length.
pub const ZERO_LENGTH_TOL: f64 = 1e-12;

const EXCLUDED_MODE_TOL: f64 = 1e-12;
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inequality {
    /// `L^2 - 4 pi A >= 0`
    Isoperimetric,
    /// `int beta^2 >= 2A + tau (L^2/4pi - A)`, sharp at `tau = 8`.
    BetaSquared { tau: f64 },
    /// `int beta^2 + tau A >= 0` for `L = 0`, sharp at `tau = 6`.
    BetaSquaredZeroLength { tau: f64 },
    /// `int beta_th^2 >= xi (L^2/4pi - A)`, sharp at `xi = 24`.
    Gradient { xi: f64 },
    /// `int beta_th^2 + xi A >= 0` for `L = 0`, sharp at `xi = 24`.
    GradientZeroLength { xi: f64 },
    /// `(1/12) int beta_th^2 - 2 (L^2/4pi - A) >= 0`
    ScaledGradient,
    /// `int beta^2 >= (L^2 - 2 pi A) / pi`
    GreenOsherQuadratic,
}

impl Inequality {
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            Inequality::BetaSquared { tau } | Inequality::BetaSquaredZeroLength { tau } => Some(tau),
            Inequality::Gradient { xi } | Inequality::GradientZeroLength { xi } => Some(xi),
            _ => None,
        }
    }

    /// True when the parameter lies beyond the sharp constant, so
    /// counterexamples are expected.
    pub fn expected_violable(&self) -> bool {
        match *self {
            Inequality::BetaSquared { tau } => tau > 8.0,
            Inequality::BetaSquaredZeroLength { tau } => tau > 6.0,
            Inequality::Gradient { xi } | Inequality::GradientZeroLength { xi } => xi > 24.0,
            _ => false,
        }
    }

    pub fn requires_zero_length(&self) -> bool {
        matches!(self, Inequality::BetaSquaredZeroLength { .. } | Inequality::GradientZeroLength { .. })
    }

    pub fn slack(&self, p: &SupportFourier) -> Result<f64> {
        match *self {
            Inequality::Isoperimetric => Ok(isoperimetric_deficit(p)),
            Inequality::BetaSquared { tau } => Ok(beta2_family_slack(p, tau)),
            Inequality::BetaSquaredZeroLength { tau } => {
                require_zero_length(p)?;
                Ok(beta_l2(p) + tau * algebraic_area(p))
            }
            Inequality::Gradient { xi } => Ok(grad_family_slack(p, xi)),
            Inequality::GradientZeroLength { xi } => {
                require_zero_length(p)?;
                Ok(beta_grad_l2(p) + xi * algebraic_area(p))
            }
            Inequality::ScaledGradient => Ok(beta_grad_l2(p) / 12.0 - 2.0 * circle_excess(p)),
            Inequality::GreenOsherQuadratic => {
                let l = algebraic_length(p);
                Ok(beta_l2(p) - (l * l - 2.0 * PI * algebraic_area(p)) / PI)
            }
        }
    }

    /// Evaluates the inequality on one curve.
    pub fn check(&self, p: &SupportFourier) -> Result<InequalityReport> {
        let slack = self.slack(p)?;
        Ok(InequalityReport {
            inequality: *self,
            slack,
            holds: slack >= -VIOLATION_TOL,
            expected_violable: self.expected_violable(),
            witness: p.clone(),
            witness_index: 0,
            violations: usize::from(slack < -VIOLATION_TOL),
            evaluated: 1,
        })
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Inequality::Isoperimetric => write!(f, "isoperimetric"),
            Inequality::BetaSquared { tau } => write!(f, "beta2[tau={tau}]"),
            Inequality::BetaSquaredZeroLength { tau } => write!(f, "beta2_zero_length[tau={tau}]"),
            Inequality::Gradient { xi } => write!(f, "gradient[xi={xi}]"),
            Inequality::GradientZeroLength { xi } => write!(f, "gradient_zero_length[xi={xi}]"),
            Inequality::ScaledGradient => write!(f, "scaled_gradient"),
            Inequality::GreenOsherQuadratic => write!(f, "green_osher_quadratic"),
        }
    }
}

/// Outcome of an inequality over one curve or an ensemble. For ensembles,
/// `slack` is the minimum and `witness` the curve attaining it (lowest index
/// on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub inequality: Inequality,
    pub slack: f64,
    pub holds: bool,
    pub expected_violable: bool,
    pub witness: SupportFourier,
    pub witness_index: usize,
    pub violations: usize,
    pub evaluated: usize,
}

impl InequalityReport {
    pub fn parameter(&self) -> Option<f64> {
        self.inequality.parameter()
    }
}

fn require_zero_length(p: &SupportFourier) -> Result<()> {
    let length = algebraic_length(p);
    if length.abs() > ZERO_LENGTH_TOL {
        return Err(Error::NotZeroLength { length });
    }
    Ok(())
}

/// `int beta_th^2`.
fn beta_grad_l2(p: &SupportFourier) -> f64 {
    l2_quantities(&beta_of(p).beta).int_dp2
}

/// `L^2 / 4 pi - A`.
fn circle_excess(p: &SupportFourier) -> f64 {
    let l = algebraic_length(p);
    l * l / (4.0 * PI) - algebraic_area(p)
}

pub fn isoperimetric_deficit(p: &SupportFourier) -> f64 {
    let l = algebraic_length(p);
    l * l - 4.0 * PI * algebraic_area(p)
}

fn beta2_family_slack(p: &SupportFourier, tau: f64) -> f64 {
    beta_l2(p) - 2.0 * algebraic_area(p) - tau * circle_excess(p)
}

fn grad_family_slack(p: &SupportFourier, xi: f64) -> f64 {
    beta_grad_l2(p) - xi * circle_excess(p)
}

pub fn check_beta2_family(p: &SupportFourier, tau: f64) -> InequalityReport {
    Inequality::BetaSquared { tau }.check(p).expect("no preconditions")
}

pub fn check_beta2_zero_length(p: &SupportFourier, tau: f64) -> Result<InequalityReport> {
    Inequality::BetaSquaredZeroLength { tau }.check(p)
}

/// With `zero_length` set, checks the `L = 0` form `int beta_th^2 + xi A >= 0`.
pub fn check_grad_family(p: &SupportFourier, xi: f64, zero_length: bool) -> Result<InequalityReport> {
    if zero_length {
        Inequality::GradientZeroLength { xi }.check(p)
    } else {
        Inequality::Gradient { xi }.check(p)
    }
}

pub fn green_osher_quadratic(p: &SupportFourier) -> InequalityReport {
    Inequality::GreenOsherQuadratic.check(p).expect("no preconditions")
}

/// Returns `(int (s')^2, 4 int s^2)` for a series with no mass on the
/// excluded modes (mode 0 is the constant term).
pub fn wirtinger_gap(series: &SupportFourier, excluded_modes: &[usize]) -> Result<(f64, f64)> {
    for &k in excluded_modes {
        let (a, b) = series.mode(k);
        let mass = a.abs().max(b.abs());
        if mass > EXCLUDED_MODE_TOL {
            return Err(Error::ModeNotExcluded { k, mass });
        }
    }
    let q = l2_quantities(series);
    Ok((q.int_dp2, 4.0 * q.int_p2))
}

/// The five-parameter family on which the sharp inequalities become equalities.
pub fn equality_family(a0: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> SupportFourier {
    SupportFourier::constant(a0).with_mode(1, a1, b1).with_mode(2, a2, b2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    None,
    /// Resample until `A > 0.01`.
    PositiveArea,
    /// Force `a0 = 0`.
    ZeroLength,
    /// Raise `a0` until `min beta > 0.1` and `min p > 0.1`.
    Convex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveEnsembleSpec {
    pub seed: u64,
    pub count: usize,
    /// Highest mode drawn.
    pub order: usize,
    /// Mode `k` coefficients are uniform in `+-(k + 1)^(-s)`.
    pub amplitude_decay: f64,
    pub constraint: Constraint,
}

impl CurveEnsembleSpec {
    pub fn new(seed: u64, count: usize, order: usize, amplitude_decay: f64, constraint: Constraint) -> Self {
        CurveEnsembleSpec { seed, count, order, amplitude_decay, constraint }
    }
}

/// Uniform draw keyed by `(seed, index, attempt, mode, slot)`.
///
/// The ChaCha stream id is the curve index and the word position encodes
/// `(attempt, mode, slot)`, so any coefficient can be produced independently
/// of every other one.
struct CoefficientStream {
    rng: ChaCha8Rng,
    order: usize,
}

impl CoefficientStream {
    fn new(seed: u64, index: usize, order: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        CoefficientStream { rng, order }
    }

    fn draw(&mut self, attempt: usize, mode: usize, slot: usize, bound: f64) -> f64 {
        let counter = (attempt as u128 * (self.order as u128 + 1) + mode as u128) * 2 + slot as u128;
        // two 32-bit words per u64 draw
        self.rng.set_word_pos(counter * 2);
        self.rng.random_range(-bound..=bound)
    }
}

fn draw_curve(stream: &mut CoefficientStream, spec: &CurveEnsembleSpec, attempt: usize) -> SupportFourier {
    let bound = |k: usize| (k as f64 + 1.0).powf(-spec.amplitude_decay);
    let a0 = stream.draw(attempt, 0, 0, bound(0));
    let modes: Vec<Mode> = (1..=spec.order)
        .map(|k| Mode::new(k, stream.draw(attempt, k, 0, bound(k)), stream.draw(attempt, k, 1, bound(k))))
        .collect();
    SupportFourier::new(a0, modes).expect("distinct finite modes")
}

/// Curve number `index` of the ensemble; identical for identical inputs.
pub fn random_curve(spec: &CurveEnsembleSpec, index: usize) -> Result<SupportFourier> {
    if index >= spec.count {
        return Err(Error::InvalidArgument(format!("index {index} outside ensemble of {}", spec.count)));
    }
    let mut stream = CoefficientStream::new(spec.seed, index, spec.order);
    match spec.constraint {
        Constraint::None => Ok(draw_curve(&mut stream, spec, 0)),
        Constraint::ZeroLength => Ok(draw_curve(&mut stream, spec, 0).with_a0(0.0)),
        Constraint::PositiveArea => (0..MAX_REJECTIONS)
            .map(|attempt| draw_curve(&mut stream, spec, attempt))
            .find(|p| algebraic_area(p) > 0.01)
            .ok_or(Error::RejectionExhausted { index, attempts: MAX_REJECTIONS }),
        Constraint::Convex => {
            let p = draw_curve(&mut stream, spec, 0);
            Ok(lift_to_convex(p, 0.1))
        }
    }
}

/// Raises `a0` so that `p` and `beta` both stay above `margin` on the
/// default diagnostic grid.
fn lift_to_convex(p: SupportFourier, margin: f64) -> SupportFourier {
    let n = default_grid_size(p.order());
    let rest = p.clone().with_a0(0.0);
    let rest_beta = beta_of(&rest).beta;
    let h = std::f64::consts::TAU / n as f64;
    let (mut min_p, mut min_beta) = (f64::INFINITY, f64::INFINITY);
    for j in 0..n {
        let t = j as f64 * h;
        min_p = min_p.min(rest.value(t));
        min_beta = min_beta.min(rest_beta.value(t));
    }
    let a0 = p.a0().max(margin - min_p).max(margin - min_beta);
    p.with_a0(a0)
}

/// Applies every inequality to every curve, keeping the minimum slack per
/// inequality. Curves are generated and checked in parallel when `exec`
/// allows; the reduction runs in index order.
pub fn run_ensemble_with(
    spec: &CurveEnsembleSpec,
    inequalities: &[Inequality],
    exec: Execution,
) -> Result<Vec<InequalityReport>> {
    if spec.count == 0 {
        return Err(Error::InvalidArgument("ensemble count must be at least 1".into()));
    }
    let per_curve: Vec<Result<(SupportFourier, Vec<f64>)>> = map_indexed(spec.count, exec, |i| {
        let p = random_curve(spec, i)?;
        let slacks = inequalities.iter().map(|q| q.slack(&p)).collect::<Result<Vec<f64>>>()?;
        Ok((p, slacks))
    });
    let per_curve = per_curve.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(inequalities
        .iter()
        .enumerate()
        .map(|(j, q)| {
            let (mut best, mut violations) = (0usize, 0usize);
            for (i, (_, slacks)) in per_curve.iter().enumerate() {
                if slacks[j] < per_curve[best].1[j] {
                    best = i;
                }
                violations += usize::from(slacks[j] < -VIOLATION_TOL);
            }
            let slack = per_curve[best].1[j];
            InequalityReport {
                inequality: *q,
                slack,
                holds: slack >= -VIOLATION_TOL,
                expected_violable: q.expected_violable(),
                witness: per_curve[best].0.clone(),
                witness_index: best,
                violations,
                evaluated: spec.count,
            }
        })
        .collect())
}

pub fn run_ensemble(spec: &CurveEnsembleSpec, inequalities: &[Inequality]) -> Result<Vec<InequalityReport>> {
    run_ensemble_with(spec, inequalities, Execution::default())
}

/// The inequalities that hold for every curve: the isoperimetric inequality,
/// the `beta^2` family at `tau`, the gradient family at `xi`, the scaled
/// gradient form and the quadratic Green-Osher bound.
pub fn standard_inequalities(taus: &[f64], xis: &[f64]) -> Vec<Inequality> {
    let mut v = vec![Inequality::Isoperimetric];
    v.extend(taus.iter().map(|&tau| Inequality::BetaSquared { tau }));
    v.extend(xis.iter().map(|&xi| Inequality::Gradient { xi }));
    v.push(Inequality::ScaledGradient);
    v.push(Inequality::GreenOsherQuadratic);
    v
}
