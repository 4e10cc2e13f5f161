//! Independent oracles: pointwise trigonometric sums and trapezoid
//! quadrature, built only from the coefficient list.

#![allow(dead_code)]

use legendre_flow::SupportFourier;
use std::f64::consts::TAU;

/// `d^i/dth^i` of `a cos k th + b sin k th`.
fn mode_deriv(k: usize, a: f64, b: f64, i: u32, th: f64) -> f64 {
    let kf = k as f64;
    let (s, c) = (kf * th).sin_cos();
    let amp = kf.powi(i as i32);
    match i % 4 {
        0 => amp * (a * c + b * s),
        1 => amp * (-a * s + b * c),
        2 => -amp * (a * c + b * s),
        _ => amp * (a * s - b * c),
    }
}

pub fn p_deriv(p: &SupportFourier, i: u32, th: f64) -> f64 {
    let base = if i == 0 { p.a0() } else { 0.0 };
    base + p.modes().iter().map(|m| mode_deriv(m.k, m.a, m.b, i, th)).sum::<f64>()
}

/// `d^i beta / dth^i` with `beta = p + p''`.
pub fn beta_deriv(p: &SupportFourier, i: u32, th: f64) -> f64 {
    p_deriv(p, i, th) + p_deriv(p, i + 2, th)
}

pub fn gamma(p: &SupportFourier, th: f64) -> (f64, f64) {
    let (v, dv) = (p_deriv(p, 0, th), p_deriv(p, 1, th));
    let (s, c) = th.sin_cos();
    // nu = (cos, sin), mu = (-sin, cos)
    (v * c - dv * s, v * s + dv * c)
}

pub fn quad(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = TAU / n as f64;
    (0..n).map(|j| f(j as f64 * h)).sum::<f64>() * h
}

pub const N: usize = 512;

pub fn length(p: &SupportFourier) -> f64 {
    quad(N, |t| p_deriv(p, 0, t))
}

pub fn area(p: &SupportFourier) -> f64 {
    0.5 * quad(N, |t| p_deriv(p, 0, t) * beta_deriv(p, 0, t))
}

pub fn beta_sq(p: &SupportFourier) -> f64 {
    quad(N, |t| beta_deriv(p, 0, t).powi(2))
}

pub fn beta_grad_sq(p: &SupportFourier) -> f64 {
    quad(N, |t| beta_deriv(p, 1, t).powi(2))
}
