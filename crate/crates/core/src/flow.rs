//! Nonlocal inverse curvature flows `dp/dt = beta - lambda(t)`.
//!
//! In Fourier space the flow is diagonal for every mode `k >= 1`:
//! `d(a_k, b_k)/dt = (1 - k^2)(a_k, b_k)`. Only the constant term feels the
//! nonlocal term: `da0/dt = a0 - lambda(t)`.
//!
//! * length-preserving: `lambda = L / 2 pi = a0`, so `a0` is frozen;
//! * area-preserving: `lambda = (1/L) int beta^2`, which couples `a0` to the
//!   decaying higher modes through a scalar ODE.
//!
//! Two integrators are provided. [`Scheme::ExactModal`] advances the modes
//! with their exact exponential factors and updates `a0` in closed form.
//! [`Scheme::GridRk4`] is a method-of-lines discretisation on a uniform grid
//! with FFT derivatives and classical RK4; it exists as an independent check
//! of the modal integrator.

use std::f64::consts::{PI, TAU};

use crate::curve::{algebraic_area, algebraic_length, beta_of, steiner_point, Point2, SupportFourier};
use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};
use crate::spectral::{analyze, default_grid_size, synthesize, GridFunction, SpectralOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowType {
    AreaPreserving,
    LengthPreserving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExactModal,
    GridRk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub flow_type: FlowType,
    pub initial: SupportFourier,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Diagnostic grid (and the GridRk4 state grid).
    pub grid_n: usize,
    pub record_every: usize,
    /// Stop once `sup |beta - L/2pi|` drops below this; 0 disables.
    pub stop_sup_dev: f64,
    /// Smallest `|L|` for which the area-preserving nonlocal term is evaluated.
    pub lambda_floor: f64,
}

impl FlowConfig {
    /// Defaults: `T = 6`, `dt = 1e-3`, exact modal scheme, every step recorded.
    pub fn new(flow_type: FlowType, initial: SupportFourier) -> Self {
        let grid_n = default_grid_size(initial.order());
        FlowConfig {
            flow_type,
            initial,
            t_final: 6.0,
            dt: 1e-3,
            scheme: Scheme::ExactModal,
            grid_n,
            record_every: 1,
            stop_sup_dev: 0.0,
            lambda_floor: 1e-9,
        }
    }

    pub fn t_final(mut self, t: f64) -> Self {
        self.t_final = t;
        self
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn grid_n(mut self, n: usize) -> Self {
        self.grid_n = n;
        self
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn stop_sup_dev(mut self, threshold: f64) -> Self {
        self.stop_sup_dev = threshold;
        self
    }

    pub fn lambda_floor(mut self, floor: f64) -> Self {
        self.lambda_floor = floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad("t_final must be non-negative");
        }
        if self.t_final > 0.0 && self.dt > self.t_final {
            return bad("dt must not exceed t_final");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if !(self.stop_sup_dev >= 0.0) {
            return bad("stop_sup_dev must be non-negative");
        }
        if !(self.lambda_floor > 0.0) {
            return bad("lambda_floor must be positive");
        }
        if self.grid_n < 8 || !self.grid_n.is_power_of_two() {
            return bad("grid_n must be a power of two >= 8");
        }
        if self.grid_n < 2 * self.initial.order() + 2 {
            return Err(Error::Alias { n: self.grid_n, k: self.initial.order() });
        }
        if self.flow_type == FlowType::AreaPreserving {
            let length = algebraic_length(&self.initial);
            if length.abs() < self.lambda_floor {
                return Err(Error::DegenerateLength { length, t: 0.0 });
            }
            let area = algebraic_area(&self.initial);
            if area <= 0.0 {
                return Err(Error::NonPositiveArea { area });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub p: SupportFourier,
}

impl FlowState {
    pub fn new(t: f64, p: SupportFourier) -> Self {
        FlowState { t, p }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    /// `L^2 - 4 pi A`
    pub deficit: f64,
    /// `sup |beta - L/2pi|` on the diagnostic grid
    pub sup_dev: f64,
    /// `L^2/2pi - int beta^2`
    pub q: f64,
    pub lambda: f64,
    /// `int (beta')^2`
    pub e1: f64,
    /// `int (beta'')^2`
    pub e2: f64,
    pub a0: f64,
    /// `max |a_k|, |b_k|` over `k >= 2`
    pub max_mode: f64,
    pub p: SupportFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub config: FlowConfig,
    pub rows: Vec<DiagnosticsRow>,
    pub final_state: FlowState,
    pub status: RunStatus,
}

fn k2(k: usize) -> f64 {
    (k * k) as f64
}

/// `pi sum_k (1 - k^2)^2 (a_k^2 + b_k^2)` with each mode damped by
/// `exp(2 (1 - k^2) s)`: the non-constant part of `int beta^2` after time `s`.
fn beta_tail_energy(p: &SupportFourier, s: f64) -> f64 {
    PI * p
        .modes()
        .iter()
        .map(|m| {
            let f = 1.0 - k2(m.k);
            f * f * m.energy() * (2.0 * f * s).exp()
        })
        .sum::<f64>()
}

/// `int beta^2 = 2 pi a0^2 + pi sum (1 - k^2)^2 (a_k^2 + b_k^2)`.
pub fn beta_l2(p: &SupportFourier) -> f64 {
    TAU * p.a0() * p.a0() + beta_tail_energy(p, 0.0)
}

/// `lambda = L / 2 pi`.
pub fn lambda_length(state: &FlowState) -> f64 {
    algebraic_length(&state.p) / TAU
}

/// `lambda = (1/L) int beta^2`.
pub fn lambda_area(state: &FlowState, lambda_floor: f64) -> Result<f64> {
    let length = algebraic_length(&state.p);
    if length.abs() < lambda_floor {
        return Err(Error::DegenerateLength { length, t: state.t });
    }
    Ok(beta_l2(&state.p) / length)
}

/// `da0/dt = a0 - lambda` in closed form. For the area flow this is
/// `-(tail energy) / (2 pi a0)`, which avoids cancelling `a0` against `lambda`.
fn a0_rate(a0: f64, tail: f64, flow_type: FlowType, lambda_floor: f64, t: f64) -> Result<f64> {
    match flow_type {
        FlowType::LengthPreserving => Ok(0.0),
        FlowType::AreaPreserving => {
            let length = TAU * a0;
            if length.abs() < lambda_floor {
                return Err(Error::DegenerateLength { length, t });
            }
            Ok(-tail / length)
        }
    }
}

/// Time derivative of every coefficient; mode 1 is exactly zero.
pub fn modal_rhs(state: &FlowState, flow_type: FlowType, lambda_floor: f64) -> Result<SupportFourier> {
    let p = &state.p;
    let da0 = a0_rate(p.a0(), beta_tail_energy(p, 0.0), flow_type, lambda_floor, state.t)?;
    Ok(p.map_modes(da0, |k, a, b| {
        let f = 1.0 - k2(k);
        (f * a, f * b)
    }))
}

/// Advances one step: modes `k >= 1` by their exact factors `exp((1 - k^2) dt)`,
/// `a0` from the conserved quantity (area for the area flow, `a0` itself for
/// the length flow).
pub fn step_exact_modal(state: &FlowState, dt: f64, flow_type: FlowType, lambda_floor: f64) -> Result<FlowState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    let p = &state.p;
    let a0 = match flow_type {
        FlowType::LengthPreserving => p.a0(),
        FlowType::AreaPreserving => {
            if (TAU * p.a0()).abs() < lambda_floor {
                return Err(Error::DegenerateLength { length: TAU * p.a0(), t: state.t });
            }
            // A fixed pins a0^2 = A/pi - (1/2) sum (1 - k^2) c_k(t), and every
            // c_k(t) is known in closed form, so the step is exact
            let change: f64 = p
                .modes()
                .iter()
                .map(|m| {
                    let f = 1.0 - k2(m.k);
                    -0.5 * f * m.energy() * (2.0 * f * dt).exp_m1()
                })
                .sum();
            let y = p.a0() * p.a0() + change;
            let a0 = p.a0().signum() * y.max(0.0).sqrt();
            let length = TAU * a0;
            if !(y > 0.0) || length.abs() < lambda_floor {
                return Err(Error::DegenerateLength { length, t: state.t + dt });
            }
            a0
        }
    };
    let next = p.map_modes(a0, |k, a, b| {
        let g = ((1.0 - k2(k)) * dt).exp();
        (g * a, g * b)
    });
    Ok(FlowState::new(state.t + dt, next))
}

/// Grid state for the method-of-lines integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub t: f64,
    pub values: GridFunction,
    /// Highest wavenumber carried by the discretisation.
    pub band: usize,
}

/// `dt <= 1 / (band^2 + 1)`.
pub fn grid_stability_bound(band: usize) -> f64 {
    1.0 / (k2(band) + 1.0)
}

/// Largest band that the explicit scheme can step stably with `dt`, capped
/// by what an `n`-point grid resolves.
pub fn grid_band(n: usize, dt: f64) -> usize {
    let stable = ((1.0 / dt - 1.0).max(0.0)).sqrt().floor() as usize;
    let mut band = stable.min(n / 2 - 1);
    // guard the floor() against rounding on exact squares
    while band > 0 && dt > grid_stability_bound(band) {
        band -= 1;
    }
    band
}

impl GridState {
    /// Samples `p` on `n` points and picks the stable band for `dt`.
    pub fn new(p: &SupportFourier, n: usize, dt: f64) -> Result<Self> {
        let values = synthesize(p, n)?;
        let band = grid_band(n, dt);
        if band < p.order() {
            return Err(Error::Stability { dt, bound: grid_stability_bound(p.order()), t: 0.0 });
        }
        Ok(GridState { t: 0.0, values, band })
    }

    pub fn to_state(&self) -> Result<FlowState> {
        Ok(FlowState::new(self.t, analyze(&self.values, self.band)?))
    }
}

fn grid_rhs(
    op: &SpectralOperator,
    u: &[f64],
    band: usize,
    flow_type: FlowType,
    lambda_floor: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let h = TAU / u.len() as f64;
    // beta = u + u'' restricted to the band
    let beta = op.apply(u, band, |k| (1.0 - (k * k) as f64).into());
    let length = h * u.iter().sum::<f64>();
    let lambda = match flow_type {
        FlowType::LengthPreserving => length / TAU,
        FlowType::AreaPreserving => {
            if length.abs() < lambda_floor {
                return Err(Error::DegenerateLength { length, t });
            }
            h * beta.iter().map(|b| b * b).sum::<f64>() / length
        }
    };
    Ok(beta.into_iter().map(|b| b - lambda).collect())
}

/// One classical RK4 step of `p_t = p_thth + p - lambda(t)` on the grid.
pub fn step_grid_rk4(
    op: &SpectralOperator,
    state: &GridState,
    dt: f64,
    flow_type: FlowType,
    lambda_floor: f64,
) -> Result<GridState> {
    let bound = grid_stability_bound(state.band);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::Stability { dt, bound, t: state.t });
    }
    let u = state.values.values();
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let rhs = |v: &[f64], t: f64| grid_rhs(op, v, state.band, flow_type, lambda_floor, t);
    let t = state.t;
    let k1 = rhs(u, t)?;
    let k2 = rhs(&axpy(u, 0.5 * dt, &k1), t + 0.5 * dt)?;
    let k3 = rhs(&axpy(u, 0.5 * dt, &k2), t + 0.5 * dt)?;
    let k4 = rhs(&axpy(u, dt, &k3), t + dt)?;
    let next: Vec<f64> = (0..u.len()).map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
    Ok(GridState { t: t + dt, values: GridFunction::new(next)?, band: state.band })
}

/// Diagnostics for one state. `sup_dev` is sampled on `grid_n` points; the
/// rest is modal. `Q` uses its cancellation-free modal form
/// `-pi sum (1 - k^2)^2 (a_k^2 + b_k^2)`.
pub fn diagnostics(state: &FlowState, flow_type: FlowType, grid_n: usize, lambda_floor: f64) -> Result<DiagnosticsRow> {
    let p = &state.p;
    let length = algebraic_length(p);
    let area = algebraic_area(p);
    let beta = beta_of(p).beta;
    let h = TAU / grid_n as f64;
    let sup_dev = (0..grid_n).map(|j| (beta.value(j as f64 * h) - p.a0()).abs()).fold(0.0, f64::max);
    let (mut e1, mut e2) = (0.0, 0.0);
    for m in p.modes() {
        let f = 1.0 - k2(m.k);
        let w = f * f * m.energy();
        e1 += k2(m.k) * w;
        e2 += k2(m.k) * k2(m.k) * w;
    }
    let lambda = match flow_type {
        FlowType::LengthPreserving => lambda_length(state),
        FlowType::AreaPreserving => lambda_area(state, lambda_floor)?,
    };
    Ok(DiagnosticsRow {
        t: state.t,
        length,
        area,
        deficit: length * length - 4.0 * PI * area,
        sup_dev,
        q: -beta_tail_energy(p, 0.0),
        lambda,
        e1: PI * e1,
        e2: PI * e2,
        a0: p.a0(),
        max_mode: p.max_abs_mode_from(2),
        p: p.clone(),
    })
}

enum Integrator {
    Modal(FlowState),
    Grid(SpectralOperator, GridState),
}

/// Integrates the configured flow to `t_final` (or until the early-stop
/// threshold is met), recording a diagnostics row at `t = 0`, every
/// `record_every` steps, and at the final step.
pub fn run(config: &FlowConfig) -> Result<FlowTrace> {
    config.validate()?;
    let flow = config.flow_type;
    let floor = config.lambda_floor;
    let n_steps = if config.t_final == 0.0 { 0 } else { (config.t_final / config.dt - 1e-9).ceil() as usize };
    let mut integrator = match config.scheme {
        Scheme::ExactModal => Integrator::Modal(FlowState::new(0.0, config.initial.clone())),
        Scheme::GridRk4 => Integrator::Grid(
            SpectralOperator::new(config.grid_n)?,
            GridState::new(&config.initial, config.grid_n, config.dt)?,
        ),
    };
    let first = FlowState::new(0.0, config.initial.clone());
    let mut rows = vec![diagnostics(&first, flow, config.grid_n, floor)?];
    let mut status = RunStatus::Completed;
    let mut last = first;
    if config.stop_sup_dev > 0.0 && rows[0].sup_dev < config.stop_sup_dev {
        status = RunStatus::Converged;
    }

    for step in 1..=n_steps {
        if status == RunStatus::Converged {
            break;
        }
        let t_prev = (step - 1) as f64 * config.dt;
        let t_next = if step == n_steps { config.t_final } else { step as f64 * config.dt };
        let h = t_next - t_prev;
        integrator = match integrator {
            Integrator::Modal(s) => {
                let mut next = step_exact_modal(&s, h, flow, floor)?;
                next.t = t_next;
                Integrator::Modal(next)
            }
            Integrator::Grid(op, g) => {
                let mut next = step_grid_rk4(&op, &g, h, flow, floor)?;
                next.t = t_next;
                Integrator::Grid(op, next)
            }
        };
        if step % config.record_every == 0 || step == n_steps {
            let state = match &integrator {
                Integrator::Modal(s) => s.clone(),
                Integrator::Grid(_, g) => g.to_state()?,
            };
            let row = diagnostics(&state, flow, config.grid_n, floor)?;
            if config.stop_sup_dev > 0.0 && row.sup_dev < config.stop_sup_dev {
                status = RunStatus::Converged;
            }
            rows.push(row);
            last = state;
        }
    }

    Ok(FlowTrace { config: config.clone(), rows, final_state: last, status })
}

/// Runs independent configurations, in parallel when available.
pub fn run_batch(configs: &[FlowConfig], exec: Execution) -> Vec<Result<FlowTrace>> {
    map_slice(configs, exec, run)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayField {
    SupDev,
    AbsQ,
    E1,
    /// Amplitude `sqrt(a_k^2 + b_k^2)` of one mode.
    Mode(usize),
}

impl DecayField {
    fn value(&self, row: &DiagnosticsRow) -> f64 {
        match *self {
            DecayField::SupDev => row.sup_dev,
            DecayField::AbsQ => row.q.abs(),
            DecayField::E1 => row.e1,
            DecayField::Mode(k) => {
                let (a, b) = row.p.mode(k);
                a.hypot(b)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Exponential rate: the field behaves like `C exp(-alpha t)`.
    pub alpha: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least-squares fit of `log(field)` against `t` over rows in `[t_lo, t_hi]`.
pub fn fit_decay_rate(trace: &FlowTrace, field: DecayField, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> =
        trace.rows.iter().filter(|r| r.t >= lo && r.t <= hi).map(|r| (r.t, field.value(r))).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientWindow(format!("{} rows in [{lo}, {hi}]", pts.len())));
    }
    if let Some(&(t, v)) = pts.iter().find(|(_, v)| !(*v > 1e-13)) {
        return Err(Error::InsufficientWindow(format!("value {v:e} at t = {t} is at the noise floor")));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let (dt, dy) = (t - mean_t, v.ln() - mean_y);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let slope = sty / stt;
    let ss_res = syy - slope * sty;
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    if r2 < 0.99 {
        return Err(Error::WindowTooNoisy { r2 });
    }
    Ok(DecayFit { alpha: -slope, r2, points: pts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCircle {
    pub center: Point2,
    pub radius: f64,
    pub residual: f64,
}

/// Reads the limiting circle off the final state; fails unless every mode
/// `k >= 2` has decayed below 1e-6.
pub fn limit_circle(trace: &FlowTrace) -> Result<LimitCircle> {
    let p = &trace.final_state.p;
    let residual = p.max_abs_mode_from(2);
    if !(residual < 1e-6) {
        return Err(Error::NotConverged { residual });
    }
    Ok(LimitCircle { center: steiner_point(p), radius: p.a0(), residual })
}
