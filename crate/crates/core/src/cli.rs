//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on domain errors (a degenerate flow, a
//! violated inequality), 2 on usage errors (bad flags, unreadable or
//! malformed input files).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::curve::{algebraic_area, algebraic_length, classify, singular_angles, steiner_point, SupportFourier};
use crate::error::Error;
use crate::flow::{run, FlowConfig, FlowType, Scheme};
use crate::inequality::{
    run_ensemble_with, standard_inequalities, Constraint, CurveEnsembleSpec, Inequality, InequalityReport,
};
use crate::io::{parse_curve_file, write_curve_svg, write_examples, write_trace_csv};
use crate::par::Execution;
use crate::spectral::default_grid_size;

#[derive(Debug, Parser)]
#[command(name = "legendre-flow", version, about = "Inverse curvature flows of l-convex Legendre curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlowArg {
    Area,
    Length,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Exact,
    Grid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConstraintArg {
    None,
    PositiveArea,
    ZeroLength,
    Convex,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a flow and write its diagnostics trace as CSV.
    Simulate {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_enum)]
        flow: FlowArg,
        #[arg(long, default_value_t = 6.0)]
        t_final: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_enum, default_value = "exact")]
        scheme: SchemeArg,
        /// Diagnostic grid size; defaults to max(256, 8 (K + 1)).
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        #[arg(long, default_value_t = 0.0)]
        stop_sup_dev: f64,
        #[arg(long, default_value_t = 1e-9)]
        lambda_floor: f64,
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        /// Write an SVG snapshot every M recorded rows.
        #[arg(long)]
        svg_every: Option<usize>,
        #[arg(long, default_value = "snapshots")]
        svg_dir: PathBuf,
        #[arg(long, default_value_t = 512)]
        svg_samples: usize,
    },
    /// Check the geometric inequalities over a random curve ensemble.
    Inequalities {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value_t = 1.5)]
        decay: f64,
        #[arg(long, value_enum, default_value = "none")]
        constraint: ConstraintArg,
        #[arg(long, value_delimiter = ',', default_value = "0,4,8")]
        tau: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,12,24")]
        xi: Vec<f64>,
        /// Parameters of the zero-length forms (used with --constraint zero-length).
        #[arg(long, value_delimiter = ',', default_value = "6")]
        zero_length_tau: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "24")]
        zero_length_xi: Vec<f64>,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the static invariants of a curve file.
    Analyze {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Write the reference curves (and SVG drawings) into a directory.
    Examples {
        #[arg(long, default_value = "examples_out")]
        out: PathBuf,
    },
}

struct Failure {
    op: &'static str,
    error: Error,
}

fn at(op: &'static str) -> impl Fn(Error) -> Failure {
    move |error| Failure { op, error }
}

fn usage(op: &'static str, msg: String) -> Failure {
    Failure { op, error: Error::InvalidArgument(msg) }
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure { op, error }) => {
            let _ = writeln!(err, "error: {op}: {error}");
            if error.is_usage() || matches!(error, Error::Io(_)) && op.ends_with("parse_curve_file") {
                2
            } else {
                1
            }
        }
    }
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if !path.is_file() {
        return Err(usage("cli", format!("curve file {} does not exist", path.display())));
    }
    Ok(())
}

fn require_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(usage("cli", format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

fn load_curve(path: &Path) -> Result<SupportFourier, Failure> {
    require_file(path)?;
    parse_curve_file(path).map_err(at("io::parse_curve_file"))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Simulate {
            curve,
            flow,
            t_final,
            dt,
            scheme,
            grid_n,
            record_every,
            stop_sup_dev,
            lambda_floor,
            out: csv,
            svg_every,
            svg_dir,
            svg_samples,
        } => {
            require_parent(&csv)?;
            if svg_every == Some(0) {
                return Err(usage("cli", "--svg-every must be at least 1".into()));
            }
            let p = load_curve(&curve)?;
            let flow_type = match flow {
                FlowArg::Area => FlowType::AreaPreserving,
                FlowArg::Length => FlowType::LengthPreserving,
            };
            let scheme = match scheme {
                SchemeArg::Exact => Scheme::ExactModal,
                SchemeArg::Grid => Scheme::GridRk4,
            };
            let config = FlowConfig::new(flow_type, p.clone())
                .t_final(t_final)
                .dt(dt)
                .scheme(scheme)
                .grid_n(grid_n.unwrap_or_else(|| default_grid_size(p.order())))
                .record_every(record_every)
                .stop_sup_dev(stop_sup_dev)
                .lambda_floor(lambda_floor);
            let trace = run(&config).map_err(at("flow::run"))?;
            write_trace_csv(&trace, &csv).map_err(at("io::write_trace_csv"))?;
            if let Some(every) = svg_every {
                fs::create_dir_all(&svg_dir).map_err(|e| Failure { op: "io::write_curve_svg", error: e.into() })?;
                for (i, row) in trace.rows.iter().enumerate().step_by(every) {
                    let path = svg_dir.join(format!("snapshot_{i:05}.svg"));
                    write_curve_svg(&row.p, &path, svg_samples).map_err(at("io::write_curve_svg"))?;
                }
            }
            let last = trace.rows.last().expect("trace has a t = 0 row");
            let _ = writeln!(out, "rows = {}", trace.rows.len());
            let _ = writeln!(out, "t = {}", last.t);
            let _ = writeln!(out, "L = {}", last.length);
            let _ = writeln!(out, "A = {}", last.area);
            let _ = writeln!(out, "radius = {}", last.a0);
            let _ = writeln!(out, "max_mode = {:e}", last.max_mode);
            let c = steiner_point(&trace.final_state.p);
            let _ = writeln!(out, "center = ({}, {})", c.x, c.y);
            let _ = writeln!(out, "trace written to {}", csv.display());
            Ok(0)
        }
        Command::Inequalities {
            seed,
            count,
            order,
            decay,
            constraint,
            tau,
            xi,
            zero_length_tau,
            zero_length_xi,
            sequential,
            out: report,
        } => {
            if let Some(path) = &report {
                require_parent(path)?;
            }
            let constraint = match constraint {
                ConstraintArg::None => Constraint::None,
                ConstraintArg::PositiveArea => Constraint::PositiveArea,
                ConstraintArg::ZeroLength => Constraint::ZeroLength,
                ConstraintArg::Convex => Constraint::Convex,
            };
            if count == 0 || !(decay >= 0.0) {
                return Err(usage("cli", "--count must be >= 1 and --decay >= 0".into()));
            }
            let mut inequalities = standard_inequalities(&tau, &xi);
            if constraint == Constraint::ZeroLength {
                inequalities.extend(zero_length_tau.iter().map(|&tau| Inequality::BetaSquaredZeroLength { tau }));
                inequalities.extend(zero_length_xi.iter().map(|&xi| Inequality::GradientZeroLength { xi }));
            }
            let spec = CurveEnsembleSpec::new(seed, count, order, decay, constraint);
            let exec = if sequential { Execution::Sequential } else { Execution::default() };
            let reports = run_ensemble_with(&spec, &inequalities, exec).map_err(at("inequality::run_ensemble"))?;
            let text = format_reports(&reports);
            let _ = out.write_all(text.as_bytes());
            if let Some(path) = &report {
                fs::write(path, &text).map_err(|e| Failure { op: "inequality::run_ensemble", error: e.into() })?;
            }
            let unexpected = reports.iter().filter(|r| !r.holds && !r.expected_violable).count();
            if unexpected > 0 {
                let _ = writeln!(out, "{unexpected} inequalities violated");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Analyze { curve, grid_n } => {
            let p = load_curve(&curve)?;
            let n = grid_n.unwrap_or_else(|| default_grid_size(p.order()));
            let class = classify(&p, n).map_err(at("curve::classify"))?;
            let roots = singular_angles(&p, n).map_err(at("curve::singular_angles"))?;
            let (l, a) = (algebraic_length(&p), algebraic_area(&p));
            let s = steiner_point(&p);
            let _ = writeln!(out, "L = {l}");
            let _ = writeln!(out, "A = {a}");
            let _ = writeln!(out, "deficit = {}", l * l - 4.0 * std::f64::consts::PI * a);
            let _ = writeln!(out, "class = {}", class.kind);
            let _ = writeln!(out, "min_p = {}", class.min_p);
            let _ = writeln!(out, "min_beta = {}", class.min_beta);
            let _ = writeln!(out, "steiner = ({}, {})", s.x, s.y);
            let list: Vec<String> = roots.iter().map(|t| format!("{t:.12}")).collect();
            let _ = writeln!(out, "singular_angles = [{}]", list.join(", "));
            Ok(0)
        }
        Command::Examples { out: dir } => {
            let written = write_examples(&dir).map_err(at("io::write_examples"))?;
            for path in written {
                let _ = writeln!(out, "{}", path.display());
            }
            Ok(0)
        }
    }
}

fn format_reports(reports: &[InequalityReport]) -> String {
    let mut s =
        String::from("inequality,parameter,min_slack,holds,expected_violable,violations,evaluated,witness_index\n");
    for r in reports {
        let param = r.parameter().map(|v| v.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{:.16e},{},{},{},{},{}\n",
            r.inequality, param, r.slack, r.holds, r.expected_violable, r.violations, r.evaluated, r.witness_index
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli_main(std::iter::once("legendre-flow").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_cli(&[]).0, 2);
        assert_eq!(run_cli(&["frobnicate"]).0, 2);
        assert_eq!(run_cli(&["analyze", "--curve", "/nonexistent/x.curve"]).0, 2);
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("bad.curve");
        fs::write(&f, "radius = 1\n").unwrap();
        let (code, _, err) = run_cli(&["analyze", "--curve", f.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(err.contains("parse_curve_file"), "{err}");
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run_cli(&["--help"]).0, 0);
    }
}
