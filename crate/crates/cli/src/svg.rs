//! Static line chart of sweep means: one polyline per solver.

use std::fmt::Write as _;

use crate::sweep::{SweepRow, SweepSpec};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub fn render(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let finite: Vec<&SweepRow> = rows.iter().filter(|r| r.mean_objective.is_finite()).collect();
    let (x0, x1) = extent(finite.iter().map(|r| r.value));
    let (y0, y1) = extent(finite.iter().map(|r| r.mean_objective));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
            px(v),
            bottom + 18.0,
            short(v)
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(v) + 4.0,
            short(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        spec.param.name()
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">mean objective (h)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (k, solver) in spec.solvers.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = finite
            .iter()
            .filter(|r| r.solver == *solver)
            .map(|r| format!("{:.2},{:.2}", px(r.value), py(r.mean_objective)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{}</text>"#,
            right,
            solver.name()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Value range with a non-zero width so a flat series still plots.
fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn short(v: f64) -> String {
    format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{SolverKind, SweepParam, SweepSpec};
    use uavdeploy::generate::GenConfig;

    #[test]
    fn one_polyline_per_solver() {
        let spec = SweepSpec::new(
            SweepParam::N,
            vec![1.0, 2.0],
            vec![SolverKind::Fptas, SolverKind::Dp],
            GenConfig::default(),
        );
        let row = |value, solver, mean_objective| SweepRow {
            value,
            solver,
            runs: 1,
            infeasible: 0,
            mean_objective,
            std_objective: 0.0,
            mean_max_delay: 0.0,
            mean_total_delay: 0.0,
            mean_runtime: 0.0,
        };
        let rows = [
            row(1.0, SolverKind::Fptas, 2.0),
            row(1.0, SolverKind::Dp, 1.0),
            row(2.0, SolverKind::Fptas, 1.5),
            row(2.0, SolverKind::Dp, f64::NAN),
        ];
        let svg = render(&spec, &rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("NaN"));
    }
}
