mod common;

use legendre_flow::inequality::standard_inequalities;
use legendre_flow::{
    algebraic_length, random_curve, run, Constraint, CurveEnsembleSpec, FlowConfig, FlowType, Inequality, Scheme,
    SupportFourier,
};
use proptest::prelude::*;

fn ensemble(seed: u64, count: usize, constraint: Constraint) -> Vec<SupportFourier> {
    let spec = CurveEnsembleSpec::new(seed, count, 6, 1.5, constraint);
    (0..count).map(|i| random_curve(&spec, i).unwrap()).collect()
}

fn slack(ineq: Inequality, p: &SupportFourier) -> f64 {
    ineq.slack(p).unwrap()
}

#[test]
fn length_flow_monotone_quantities() {
    let w = Inequality::BetaSquared { tau: 8.0 };
    let v = Inequality::Gradient { xi: 24.0 };
    for p in ensemble(11, 40, Constraint::None) {
        let trace = run(&FlowConfig::new(FlowType::LengthPreserving, p).t_final(2.0).dt(1e-2)).unwrap();
        let l0 = trace.rows[0].length;
        for pair in trace.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!((b.length - l0).abs() <= 1e-12 * l0.abs().max(1.0));
            assert!(b.area >= a.area - 1e-12, "A fell at t = {}", b.t);
            assert!(b.deficit <= a.deficit + 1e-12);
            assert!(slack(w, &b.p) <= slack(w, &a.p) + 1e-12, "W rose at t = {}", b.t);
            assert!(slack(v, &b.p) <= slack(v, &a.p) + 1e-12, "V rose at t = {}", b.t);
        }
    }
}

#[test]
fn area_flow_monotone_quantities() {
    for p in ensemble(12, 40, Constraint::PositiveArea) {
        let trace = run(&FlowConfig::new(FlowType::AreaPreserving, p).t_final(2.0).dt(1e-3).record_every(20)).unwrap();
        let a0 = trace.rows[0].area;
        for pair in trace.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(
                (b.area - a0).abs() <= 1e-8 * a0.abs(),
                "A {} -> {} at t = {}, a0 {} -> {}",
                a0,
                b.area,
                b.t,
                trace.rows[0].a0,
                b.a0
            );
            // p -> -p commutes with the flow, so for L < 0 it is |L| that falls
            assert!(b.length.abs() <= a.length.abs() + 1e-12, "|L| rose at t = {}", b.t);
            assert!(b.deficit <= a.deficit + 1e-12);
            assert!(b.deficit >= -1e-9);
        }
        assert!(trace.rows.last().unwrap().deficit < trace.rows[0].deficit);
    }
}

#[test]
fn deficit_tends_to_zero() {
    let p = SupportFourier::constant(3.0).with_mode(2, 0.4, -0.2).with_mode(4, 0.05, 0.02);
    for flow in [FlowType::LengthPreserving, FlowType::AreaPreserving] {
        let trace = run(&FlowConfig::new(flow, p.clone()).t_final(6.0).dt(1e-3).record_every(500)).unwrap();
        let last = trace.rows.last().unwrap();
        assert!(last.deficit.abs() < 1e-12 * last.length.powi(2), "{flow:?}: {}", last.deficit);
    }
}

#[test]
fn grid_integrator_conserves_and_keeps_steiner_point() {
    let p = SupportFourier::constant(2.0).with_mode(1, 0.7, -0.4).with_mode(2, 0.0, 1.0).with_mode(3, 0.1, 0.2);
    for flow in [FlowType::LengthPreserving, FlowType::AreaPreserving] {
        let cfg =
            FlowConfig::new(flow, p.clone()).t_final(0.5).dt(1e-3).grid_n(64).scheme(Scheme::GridRk4).record_every(50);
        let trace = run(&cfg).unwrap();
        let (l0, a0) = (trace.rows[0].length, trace.rows[0].area);
        for r in &trace.rows {
            let (a1, b1) = r.p.mode(1);
            assert!((a1 - 0.7).abs() <= 1e-10 && (b1 + 0.4).abs() <= 1e-10);
            match flow {
                FlowType::LengthPreserving => assert!((r.length - l0).abs() <= 1e-8),
                FlowType::AreaPreserving => assert!((r.area - a0).abs() <= 1e-8 * a0),
            }
        }
    }
}

#[test]
fn exact_steps_carry_mode_one_bit_for_bit() {
    for p in ensemble(13, 20, Constraint::PositiveArea) {
        for flow in [FlowType::LengthPreserving, FlowType::AreaPreserving] {
            let trace = run(&FlowConfig::new(flow, p.clone()).t_final(1.0).dt(1e-2)).unwrap();
            assert!(trace.rows.iter().all(|r| r.p.mode(1) == p.mode(1)));
        }
    }
}

#[test]
fn zero_length_area_flow_is_rejected_but_length_flow_runs() {
    let p = SupportFourier::constant(0.0).with_mode(2, 0.5, 0.0);
    assert!(run(&FlowConfig::new(FlowType::AreaPreserving, p.clone())).is_err());
    let trace = run(&FlowConfig::new(FlowType::LengthPreserving, p).t_final(1.0).dt(1e-2)).unwrap();
    assert!(trace.rows.iter().all(|r| algebraic_length(&r.p) == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // L, A and every inequality slack ignore mode 1
    #[test]
    fn mode_one_blindness(seed in 0u64..1000, dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
        let p = random_curve(&CurveEnsembleSpec::new(seed, 1, 6, 1.0, Constraint::None), 0).unwrap();
        let q = p.translated(dx, dy);
        for ineq in standard_inequalities(&[0.0, 4.0, 8.0], &[0.0, 12.0, 24.0]) {
            let (a, b) = (slack(ineq, &p), slack(ineq, &q));
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    // gamma' is perpendicular to nu and has length |beta|
    #[test]
    fn legendre_frame(seed in 0u64..1000, t in 0.0f64..std::f64::consts::TAU) {
        let p = random_curve(&CurveEnsembleSpec::new(seed, 1, 5, 1.0, Constraint::None), 0).unwrap();
        let h = 1e-5;
        let (x1, y1) = common::gamma(&p, t + h);
        let (x0, y0) = common::gamma(&p, t - h);
        let (dx, dy) = ((x1 - x0) / (2.0 * h), (y1 - y0) / (2.0 * h));
        let scale = 1.0 + common::p_deriv(&p, 0, t).abs() + common::p_deriv(&p, 2, t).abs();
        prop_assert!((dx * t.cos() + dy * t.sin()).abs() < 1e-6 * scale);
        let beta = common::beta_deriv(&p, 0, t);
        prop_assert!((dx.hypot(dy) - beta.abs()).abs() < 1e-6 * scale);
    }

    // p -> -p reflects the curve through the origin: L flips, A is unchanged
    #[test]
    fn sign_flip(seed in 0u64..1000) {
        let p = random_curve(&CurveEnsembleSpec::new(seed, 1, 6, 1.0, Constraint::None), 0).unwrap();
        let n = p.negated();
        prop_assert_eq!(legendre_flow::algebraic_length(&n), -legendre_flow::algebraic_length(&p));
        prop_assert!((legendre_flow::algebraic_area(&n) - legendre_flow::algebraic_area(&p)).abs() < 1e-12);
        let (x, y) = common::gamma(&n, 0.3);
        let (xp, yp) = common::gamma(&p, 0.3);
        prop_assert!((x + xp).abs() < 1e-12 && (y + yp).abs() < 1e-12);
    }
}

// no explicit constant is available, so boundedness is checked against the
// Cauchy-Schwarz floor L/2pi and the limiting radius
#[test]
fn area_flow_lambda_stays_bounded() {
    for p in ensemble(14, 30, Constraint::Convex) {
        let trace = run(&FlowConfig::new(FlowType::AreaPreserving, p).t_final(6.0).dt(1e-3).record_every(100)).unwrap();
        let sup = trace.rows.iter().map(|r| r.lambda).fold(0.0, f64::max);
        assert!(sup.is_finite() && sup <= 2.0 * trace.rows[0].lambda);
        for r in &trace.rows {
            assert!(r.lambda >= r.length / std::f64::consts::TAU - 1e-12);
        }
        let last = trace.rows.last().unwrap();
        let radius = (last.area / std::f64::consts::PI).sqrt();
        assert!((last.lambda - radius).abs() < 1e-6 * radius);
    }
}
