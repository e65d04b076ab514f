//! Number formatting, CSV and JSON emission.

use std::fmt::Write as _;

use bell_asym_core::{BoundResult, CurvePoint, SimulationReport, SymmetryReport};
use serde_json::{json, Value};

const SIGNIFICANT_DIGITS: i32 = 12;

/// Decimal rendering with 12 significant digits and no trailing zeros.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - exponent).clamp(0, 340) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// The value as printed, for JSON fields.
pub fn round_num(v: f64) -> f64 {
    fmt_num(v).parse().unwrap_or(v)
}

pub const CURVE_HEADER: &str = "xi_x,xi_y,r_xy,r_yx,delta,d_a,d_b";

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let row = [p.xi_x, p.xi_y, p.r_xy, p.r_yx, p.delta, p.d_a, p.d_b].map(fmt_num);
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn curve_json(points: &[CurvePoint]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|p| {
                json!({
                    "xi_x": round_num(p.xi_x),
                    "xi_y": round_num(p.xi_y),
                    "r_xy": round_num(p.r_xy),
                    "r_yx": round_num(p.r_yx),
                    "delta": round_num(p.delta),
                    "d_a": round_num(p.d_a),
                    "d_b": round_num(p.d_b),
                })
            })
            .collect(),
    )
}

pub fn bound_json(r: &BoundResult) -> Value {
    let d = &r.diagnostics;
    json!({
        "xi_x": round_num(r.budget.xi_x),
        "xi_y": round_num(r.budget.xi_y),
        "value": round_num(r.value),
        "support": d.support_size,
        "lp_rows": d.lp_rows,
        "lp_columns": d.lp_columns,
        "pivots": d.pivots,
        "iterations": d.iterations,
        "residual": d.feasibility_residual,
        "budget_tight_a": d.budget_tight_a,
        "budget_tight_b": d.budget_tight_b,
        "budget_slack_a": round_num(d.budget_slack_a),
        "budget_slack_b": round_num(d.budget_slack_b),
        "unvalidated_marginals": d.unvalidated_marginals,
    })
}

/// `key: value` lines for a bound result.
pub fn bound_text(label: &str, r: &BoundResult) -> String {
    let d = &r.diagnostics;
    let mut out = String::new();
    let _ = writeln!(out, "{label}: {}", fmt_num(r.value));
    let _ = writeln!(out, "{label}_support: {}", d.support_size);
    let _ = writeln!(out, "{label}_pivots: {}", d.pivots);
    if d.iterations > 0 {
        let _ = writeln!(out, "{label}_iterations: {}", d.iterations);
    }
    let _ = writeln!(out, "{label}_residual: {:e}", d.feasibility_residual);
    let _ = writeln!(
        out,
        "{label}_budget_tight: A={} B={}",
        d.budget_tight_a, d.budget_tight_b
    );
    if d.unvalidated_marginals {
        let _ = writeln!(
            out,
            "{label}_note: non-uniform marginals, result not validated"
        );
    }
    out
}

pub fn simulation_json(analytic: f64, s: &SimulationReport) -> Value {
    json!({
        "shots": s.shots,
        "analytic_value": round_num(analytic),
        "empirical_value": round_num(s.empirical_value),
        "stderr": round_num(s.stderr_value),
        "setting_freqs_a": s.setting_freqs_a.iter().map(|&v| round_num(v)).collect::<Vec<_>>(),
        "setting_freqs_b": s.setting_freqs_b.iter().map(|&v| round_num(v)).collect::<Vec<_>>(),
    })
}

pub fn simulation_text(analytic: f64, s: &SimulationReport) -> String {
    let list = |v: &[f64]| v.iter().map(|&p| fmt_num(p)).collect::<Vec<_>>().join(" ");
    let z = if s.stderr_value > 0.0 {
        (s.empirical_value - analytic) / s.stderr_value
    } else {
        0.0
    };
    let mut out = String::new();
    let _ = writeln!(out, "shots: {}", s.shots);
    let _ = writeln!(out, "analytic_value: {}", fmt_num(analytic));
    let _ = writeln!(out, "empirical_value: {}", fmt_num(s.empirical_value));
    let _ = writeln!(out, "stderr: {}", fmt_num(s.stderr_value));
    let _ = writeln!(out, "z_score: {}", fmt_num(z));
    let _ = writeln!(out, "setting_freqs_a: {}", list(&s.setting_freqs_a));
    let _ = writeln!(out, "setting_freqs_b: {}", list(&s.setting_freqs_b));
    out
}

pub fn symmetry_json(r: &SymmetryReport) -> Value {
    json!({
        "transpose_invariant": r.transpose_invariant,
        "shapes_match": r.shapes_match,
        "marginals_match": r.marginals_match,
        "first_differing_entry": r.first_differing_entry.map(|(x, a, y, b)| [x, a, y, b]),
    })
}

pub fn symmetry_text(r: &SymmetryReport) -> String {
    let mut out = format!("transpose_invariant: {}\n", r.transpose_invariant);
    if !r.shapes_match {
        out.push_str("reason: parties have different setting or outcome counts\n");
    } else if let Some((x, a, y, b)) = r.first_differing_entry {
        let _ = writeln!(out, "first_differing_entry: x={x} a={a} y={y} b={b}");
    } else if !r.marginals_match {
        out.push_str("reason: setting marginals differ\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.125), "0.125");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(0.37500000000000155), "0.375");
        assert_eq!(fmt_num(123456.78901234567), "123456.789012");
        assert_eq!(fmt_num(-1.5e-7), "-0.00000015");
        assert_eq!(fmt_num(1e15), "1000000000000000");
        assert_eq!(fmt_num(-2.0), "-2");
    }

    #[test]
    fn csv_layout() {
        let p = CurvePoint {
            xi_x: 0.05,
            xi_y: 0.0,
            r_xy: 0.4,
            r_yx: 0.3843750000000008,
            delta: 0.015625,
            d_a: 0.025,
            d_b: 0.009375,
        };
        assert_eq!(
            curve_csv(&[p]),
            "xi_x,xi_y,r_xy,r_yx,delta,d_a,d_b\n0.05,0,0.4,0.384375,0.015625,0.025,0.009375\n"
        );
    }
}
