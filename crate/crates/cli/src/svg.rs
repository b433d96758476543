//! Minimal self-contained SVG line plots with a logarithmic y axis.

use std::fmt::Write as _;
use std::path::Path;

use structmc::diagnostics::SweepTable;
use structmc::table::MseTable;

use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    /// Standard deviation; the band spans `y ± spread/2`.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<PlotPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl Plot {
    /// MSE against the block multiplier, one series per method.
    pub fn from_mse_table(table: &MseTable, title: &str) -> Plot {
        let series = table
            .methods()
            .into_iter()
            .map(|m| Series {
                name: m.to_string(),
                points: table
                    .cells
                    .iter()
                    .filter(|c| c.method == m)
                    .map(|c| PlotPoint { x: c.multiplier as f64, y: c.mse, spread: c.std })
                    .collect(),
            })
            .collect();
        Plot { title: title.into(), x_label: "blocks (s / d)".into(), y_label: "MSE".into(), series }
    }

    pub fn from_sweep(table: &SweepTable, title: &str) -> Plot {
        let points = table.rows.iter().map(|r| PlotPoint { x: r.s as f64, y: r.mean_sup_err, spread: r.std }).collect();
        Plot {
            title: title.into(),
            x_label: "samples s".into(),
            y_label: "mean sup error".into(),
            series: vec![Series { name: table.method.to_string(), points }],
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the plot as SVG text.
pub fn render_svg(plot: &Plot) -> Result<String, CliError> {
    let all: Vec<&PlotPoint> = plot.series.iter().flat_map(|s| &s.points).collect();
    if all.is_empty() {
        return Err(structmc::Error::Arity("cannot plot an empty table".into()).into());
    }
    let positive: Vec<f64> = all.iter().map(|p| p.y).filter(|y| *y > 0.0 && y.is_finite()).collect();
    let floor = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor / 10.0 } else { 1e-12 };
    let clamp = |y: f64| if y > floor && y.is_finite() { y } else { floor };
    let lows = all.iter().map(|p| clamp(p.y - 0.5 * p.spread).min(clamp(p.y)));
    let highs = all.iter().map(|p| clamp(p.y + 0.5 * p.spread));
    let mut y_min = lows.fold(f64::INFINITY, f64::min).log10().floor();
    let mut y_max = highs.fold(f64::NEG_INFINITY, f64::max).log10().ceil();
    if y_max <= y_min {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let x_min = all.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let mut x_max = all.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| TOP + (y_max - clamp(y).log10()) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(&plot.title));
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for e in (y_min as i32)..=(y_max as i32) {
        let y = sy(10f64.powi(e));
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + plot_w);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let mut xs: Vec<f64> = all.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in &xs {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#, sx(*x), TOP + plot_h + 18.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, HEIGHT - 10.0, escape(&plot.x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&plot.y_label)
    );

    for (k, series) in plot.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let name = escape(&series.name);
        let _ = writeln!(out, r#"<g class="series" data-name="{name}">"#);
        if series.points.len() > 1 {
            let upper: Vec<String> =
                series.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y + 0.5 * p.spread))).collect();
            let lower: Vec<String> =
                series.points.iter().rev().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y - 0.5 * p.spread))).collect();
            let _ = writeln!(
                out,
                r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
            let line: Vec<String> = series.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        }
        for p in &series.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(p.x), sy(p.y));
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{name}</text>"#, lx + 26.0, ly + 4.0);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg_lineplot(plot: &Plot, path: &Path) -> Result<(), CliError> {
    let svg = render_svg(plot)?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, ys: &[f64]) -> Series {
        Series {
            name: name.into(),
            points: ys.iter().enumerate().map(|(i, y)| PlotPoint { x: i as f64 + 1.0, y: *y, spread: y / 2.0 }).collect(),
        }
    }

    fn plot(series: Vec<Series>) -> Plot {
        Plot { title: "a < b & c".into(), x_label: "x".into(), y_label: "y".into(), series }
    }

    #[test]
    fn two_methods_three_multipliers() {
        let svg = render_svg(&plot(vec![series("mc", &[1.0, 0.5, 0.3]), series("bomc", &[0.5, 0.2, 0.1])])).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let lines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
        assert_eq!(lines.len(), 2);
        for l in lines {
            assert_eq!(l.attribute("points").unwrap().split(' ').count(), 3);
        }
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polygon")).count(), 2);
    }

    #[test]
    fn single_cell_is_a_marker() {
        let svg = render_svg(&plot(vec![series("mc", &[0.25])])).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 0);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);
    }

    #[test]
    fn zero_values_and_empty_tables() {
        let svg = render_svg(&plot(vec![series("mc", &[0.0, 1e-3])])).unwrap();
        assert!(roxmltree::Document::parse(&svg).is_ok());
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert!(render_svg(&plot(vec![])).is_err());
        assert!(render_svg(&plot(vec![series("mc", &[])])).is_err());
    }
}
