//! Results CSV and the per-action bar chart.

use std::fmt::Write as _;

use hmp_core::experiment::{Condition, ResultRow, ResultsTable, AVERAGE_LABEL};

use crate::FormatError;

pub const RESULTS_HEADER: &str = "action,horizon_ms,error_mm,condition";

/// One row per (action, horizon, condition); errors in shortest
/// round-trip form so the file reproduces the table exactly.
pub fn results_csv(table: &ResultsTable) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(out, "{},{},{},{}", r.action, r.horizon_ms, r.error_mm, r.condition);
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<ResultsTable, FormatError> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(FormatError::MalformedHeader(format!("expected '{RESULTS_HEADER}'")));
    }
    let mut rows = Vec::new();
    for (frame, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        let bad = || FormatError::BadNumber {
            frame,
            text: line.to_string(),
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad());
        }
        rows.push(ResultRow {
            action: cols[0].to_string(),
            horizon_ms: cols[1].parse().map_err(|_| bad())?,
            error_mm: cols[2].parse().map_err(|_| bad())?,
            condition: cols[3].parse()?,
        });
    }
    Ok(ResultsTable { rows })
}

fn colour(c: Condition) -> &'static str {
    match c {
        Condition::Baseline => "#f4a6b7",
        Condition::WithVideo => "#4a7fd4",
        Condition::WithGt => "#7cbf7a",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bars per action (and the Average row) at one horizon.
pub fn bar_chart_svg(table: &ResultsTable, horizon_ms: u32) -> String {
    let mut labels = table.actions();
    labels.push(AVERAGE_LABEL.to_string());
    let mut conditions: Vec<Condition> = table.rows.iter().map(|r| r.condition).collect();
    conditions.sort();
    conditions.dedup();
    let max = table
        .rows
        .iter()
        .filter(|r| r.horizon_ms == horizon_ms)
        .map(|r| r.error_mm)
        .fold(0.0f64, f64::max)
        .max(1e-9);

    let (left, top, plot_h) = (60.0, 40.0, 300.0);
    let bar_w = 14.0;
    let group_w = bar_w * conditions.len() as f64 + 12.0;
    let width = left + group_w * labels.len() as f64 + 20.0;
    let height = top + plot_h + 90.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{left}" y="20" font-size="14">Prediction error at {horizon_ms} ms (mm)</text>"#
    );
    let axis_y = top + plot_h;
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{axis_y}" stroke="black"/><line x1="{left}" y1="{axis_y}" x2="{:.1}" y2="{axis_y}" stroke="black"/>"#,
        width - 10.0
    );
    for tick in 0..=4 {
        let v = max * tick as f64 / 4.0;
        let y = axis_y - plot_h * tick as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            left - 4.0,
            y + 4.0
        );
    }
    for (g, label) in labels.iter().enumerate() {
        let x0 = left + 8.0 + g as f64 * group_w;
        for (k, &c) in conditions.iter().enumerate() {
            let Some(v) = table.get(label, c, horizon_ms) else {
                continue;
            };
            let h = plot_h * v / max;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.1}" y="{:.1}" width="{bar_w}" height="{h:.1}" fill="{}"><title>{} {}: {v:.2}</title></rect>"#,
                x0 + k as f64 * bar_w,
                axis_y - h,
                colour(c),
                escape(label),
                c
            );
        }
        let cx = x0 + bar_w * conditions.len() as f64 / 2.0;
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.1}" y="{:.1}" transform="rotate(45 {cx:.1} {:.1})">{}</text>"#,
            axis_y + 14.0,
            axis_y + 14.0,
            escape(label)
        );
    }
    for (k, &c) in conditions.iter().enumerate() {
        let x = left + 130.0 * k as f64;
        let y = height - 12.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{y:.1}">{c}</text>"#,
            y - 9.0,
            colour(c),
            x + 14.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
