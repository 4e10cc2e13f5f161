//! Spectral simulation of the area- and length-preserving inverse curvature
//! flows of `ell`-convex Legendre curves, plus checks of the geometric
//! inequalities these curves satisfy.
//!
//! Curves are held as truncated Fourier series of their support function
//! ([`SupportFourier`]). The flows are linear and diagonal in that basis apart
//! from the nonlocal term, so the core integrator is exact for every mode
//! `k >= 1`; a grid-based RK4 integrator serves as an independent check.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curve;
pub mod error;
pub mod flow;
pub mod inequality;
pub mod io;
pub mod par;
pub mod spectral;

pub use curve::{
    algebraic_area, algebraic_length, beta_of, classify, curvature_at, ell_convex_residuals, eval_point,
    singular_angles, steiner_point, CurvaturePairView, CurveClass, CurveKind, Mode, Point2, SupportFourier,
};
pub use error::{Error, Result};
pub use flow::{
    fit_decay_rate, limit_circle, run, run_batch, DecayField, DecayFit, DiagnosticsRow, FlowConfig, FlowState,
    FlowTrace, FlowType, LimitCircle, RunStatus, Scheme,
};
pub use inequality::{
    equality_family, isoperimetric_deficit, random_curve, run_ensemble, run_ensemble_with, Constraint,
    CurveEnsembleSpec, Inequality, InequalityReport,
};
pub use par::Execution;
pub use spectral::{analyze, derivative, l2_quantities, periodic_quadrature, synthesize, GridFunction};
