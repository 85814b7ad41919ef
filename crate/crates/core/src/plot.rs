//! Standalone SVG line charts of metric series against tick.

use alloc::string::String;
use core::fmt::Write as _;

use thiserror::Error;

use crate::metrics::{Column, MetricsRecord};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlotError {
    #[error("no series selected")]
    EmptySelection,
    #[error("need at least two records to plot, got {0}")]
    TooFewRecords(usize),
}

/// One `<polyline>` per selected column, shared axes, legend on the right.
pub fn emit_plot(records: &[MetricsRecord], series: &[Column]) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::EmptySelection);
    }
    if records.len() < 2 {
        return Err(PlotError::TooFewRecords(records.len()));
    }
    let t0 = records[0].tick as f64;
    let t1 = records[records.len() - 1].tick as f64;
    let x_span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let y_max = records
        .iter()
        .flat_map(|r| series.iter().map(move |c| c.value(r)))
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |t: f64| MARGIN_L + (t - t0) / x_span * plot_w;
    let sy = |v: f64| MARGIN_T + plot_h - v / y_max * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{MARGIN_L}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{b}"/></g>"#,
        b = MARGIN_T + plot_h,
        r = MARGIN_L + plot_w,
    );
    for i in 0..=4 {
        let frac = f64::from(i) / 4.0;
        let t = t0 + frac * x_span;
        let v = frac * y_max;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.0}</text>"#,
            sx(t),
            MARGIN_T + plot_h + 18.0,
            t
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.0}</text>"#,
            MARGIN_L - 6.0,
            sy(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">tick</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    );

    for (i, col) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            s,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points=""#,
            col.name()
        );
        for (j, r) in records.iter().enumerate() {
            if j > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", sx(r.tick as f64), sy(col.value(r)));
        }
        s.push_str("\"/>\n");
        let ly = MARGIN_T + 16.0 * i as f64 + 8.0;
        let lx = MARGIN_L + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            col.name()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::engine::run;
    use alloc::vec::Vec;

    fn points(svg: &str, series: &str) -> Vec<(f64, f64)> {
        let tag = alloc::format!("data-series=\"{series}\"");
        let line = svg.lines().find(|l| l.contains(&tag)).unwrap();
        let start = line.find("points=\"").unwrap() + 8;
        let body = &line[start..line[start..].find('"').unwrap() + start];
        body.split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn two_series_two_polylines() {
        let out = run(preset(1).unwrap(), 20).unwrap();
        let svg = emit_plot(&out.records, &[Column::TeffAct, Column::TregAct]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(points(&svg, "teff_act").len(), 21);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn unrecoverable_curve_never_rises_on_screen() {
        let out = run(preset(2).unwrap(), 400).unwrap();
        let svg = emit_plot(&out.records, &[Column::Unrecoverable]).unwrap();
        // SVG y grows downward, so a non-decreasing series has non-increasing y
        let pts = points(&svg, "unrecoverable");
        assert!(pts.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn selection_errors() {
        let out = run(preset(1).unwrap(), 3).unwrap();
        assert_eq!(emit_plot(&out.records, &[]), Err(PlotError::EmptySelection));
        assert_eq!(
            emit_plot(&out.records[..1], &[Column::Virus]),
            Err(PlotError::TooFewRecords(1))
        );
    }
}
