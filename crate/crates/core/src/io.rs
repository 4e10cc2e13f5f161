//! Curve files, CSV traces and SVG snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::curve::{eval_point, singular_angles, SupportFourier};
use crate::error::{Error, Result};
use crate::flow::{FlowTrace, FlowType, RunStatus, Scheme};
use crate::inequality::equality_family;

pub const TRACE_HEADER: &str = "t,L,A,deficit_U,sup_dev,Q,lambda,E1,E2,a0,max_mode";
pub const TRACE_COLUMNS: usize = 11;

/// Reads a curve in the `a0 = ...` / `mode k = a b` text format.
pub fn parse_curve_file(path: &Path) -> Result<SupportFourier> {
    fs::read_to_string(path)?.parse()
}

pub fn write_curve_file(p: &SupportFourier, path: &Path) -> Result<()> {
    fs::write(path, p.to_string())?;
    Ok(())
}

fn flow_name(flow: FlowType) -> &'static str {
    match flow {
        FlowType::AreaPreserving => "area-preserving",
        FlowType::LengthPreserving => "length-preserving",
    }
}

fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::ExactModal => "exact-modal",
        Scheme::GridRk4 => "grid-rk4",
    }
}

/// CSV text of a trace: `#` comment lines echoing the configuration, the
/// column header, then one row per record with 17 significant digits.
pub fn format_trace_csv(trace: &FlowTrace) -> String {
    let c = &trace.config;
    let mut s = String::new();
    let _ = writeln!(s, "# flow = {}", flow_name(c.flow_type));
    let _ = writeln!(s, "# scheme = {}", scheme_name(c.scheme));
    let _ = writeln!(s, "# t_final = {}", c.t_final);
    let _ = writeln!(s, "# dt = {}", c.dt);
    let _ = writeln!(s, "# grid_n = {}", c.grid_n);
    let _ = writeln!(s, "# record_every = {}", c.record_every);
    let _ = writeln!(s, "# stop_sup_dev = {}", c.stop_sup_dev);
    let _ = writeln!(s, "# lambda_floor = {}", c.lambda_floor);
    let _ = writeln!(s, "# order = {}", c.initial.order());
    for line in c.initial.to_string().lines() {
        let _ = writeln!(s, "# initial: {line}");
    }
    let status = match trace.status {
        RunStatus::Completed => "completed",
        RunStatus::Converged => "converged",
    };
    let _ = writeln!(s, "# status = {status}");
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &trace.rows {
        let cols = [r.t, r.length, r.area, r.deficit, r.sup_dev, r.q, r.lambda, r.e1, r.e2, r.a0, r.max_mode];
        let line: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_trace_csv(trace: &FlowTrace, path: &Path) -> Result<()> {
    fs::write(path, format_trace_csv(trace))?;
    Ok(())
}

/// Parses the numeric rows of a trace CSV, skipping comments and the header.
pub fn read_trace_csv(path: &Path) -> Result<Vec<[f64; TRACE_COLUMNS]>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != TRACE_HEADER {
                return Err(Error::Parse { line: i + 1, message: "missing trace header".into() });
            }
            seen_header = true;
            continue;
        }
        let vals = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        let row: [f64; TRACE_COLUMNS] = vals.try_into().map_err(|v: Vec<f64>| Error::Parse {
            line: i + 1,
            message: format!("expected {TRACE_COLUMNS} columns, got {}", v.len()),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// SVG drawing of the curve: a closed polyline through `samples` points,
/// with cusps marked. The y axis points up.
pub fn curve_svg(p: &SupportFourier, samples: usize) -> Result<String> {
    if samples < 64 {
        return Err(Error::InvalidArgument(format!("need at least 64 samples, got {samples}")));
    }
    let step = std::f64::consts::TAU / samples as f64;
    let pts: Vec<_> = (0..samples).map(|i| eval_point(p, i as f64 * step)).collect();
    let cusps: Vec<_> =
        singular_angles(p, samples.max(4 * (p.order() + 1)))?.into_iter().map(|t| eval_point(p, t)).collect();

    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for q in &pts {
        min_x = min_x.min(q.x);
        max_x = max_x.max(q.x);
        min_y = min_y.min(q.y);
        max_y = max_y.max(q.y);
    }
    let extent = (max_x - min_x).max(max_y - min_y);
    let extent = if extent > 1e-12 { extent } else { 1.0 };
    let margin = 0.1 * extent;
    let (vx, vy) = (min_x - margin, -(max_y + margin));
    let (vw, vh) = (max_x - min_x + 2.0 * margin, max_y - min_y + 2.0 * margin);
    let stroke = 0.004 * extent;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}" width="512" height="512">"#
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    let mut d = String::new();
    for (i, q) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.6} {:.6} ", if i == 0 { "M" } else { "L" }, q.x, q.y);
    }
    d.push('Z');
    let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="black" stroke-width="{stroke:.6}"/>"#);
    for c in &cusps {
        let _ = writeln!(s, r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="red"/>"#, c.x, c.y, 3.0 * stroke);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn write_curve_svg(p: &SupportFourier, path: &Path, samples: usize) -> Result<()> {
    fs::write(path, curve_svg(p, samples)?)?;
    Ok(())
}

/// Reference curves: the four cusped examples, the two zero-length curves
/// for which the area-preserving flow is undefined, and a parallel curve of
/// an astroid from the equality family.
pub fn example_curves() -> Vec<(&'static str, SupportFourier)> {
    let sin2 = |a0: f64, amp: f64| SupportFourier::constant(a0).with_mode(2, 0.0, amp);
    vec![
        ("cusped_two_plus_sin2", sin2(2.0, 1.0)),
        ("cusped_zero_area", sin2(1.5f64.sqrt(), 1.0)),
        ("cusped_negative_area", sin2(0.5, 1.0)),
        ("astroid", sin2(0.0, 2.0)),
        ("zero_length_point", SupportFourier::constant(0.0).with_mode(1, 2.0, 1.0)),
        ("zero_length_negative_area", SupportFourier::constant(0.0).with_mode(1, 2.0, 1.0).with_mode(2, 2.0, 1.0)),
        ("parallel_astroid", equality_family(0.5, 1.0, -1.0, 1.0, 0.0)),
    ]
}

/// Writes `<name>.curve` and `<name>.svg` for every example curve.
pub fn write_examples(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, p) in example_curves() {
        let curve = dir.join(format!("{name}.curve"));
        write_curve_file(&p, &curve)?;
        let svg = dir.join(format!("{name}.svg"));
        write_curve_svg(&p, &svg, 512)?;
        written.push(curve);
        written.push(svg);
    }
    Ok(written)
}
