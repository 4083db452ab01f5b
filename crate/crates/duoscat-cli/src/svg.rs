//! Self-contained SVG line plots: one polyline per series, labeled axes, a
//! legend, optional vertical threshold markers, linear or logarithmic x-axis.
//! No scripts, no external assets, deterministic output.

use std::fmt::Write as _;

use crate::error::CliError;
use crate::run::{BornRow, SweepRow};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f", "#aec7e8", "#98df8a",
];

/// One plotted curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A full plot description.
#[derive(Debug, Clone)]
pub struct Plot {
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    /// Vertical marker positions in data coordinates.
    pub markers: Vec<f64>,
    pub series: Vec<Series>,
}

impl Plot {
    /// Series for every channel coefficient plus the conservation total.
    pub fn from_sweep(rows: &[SweepRow], x_label: &str, log_x: bool, markers: Vec<f64>) -> Plot {
        let max_nc = rows.iter().map(|r| r.n_c).max().unwrap_or(0);
        let mut series = Vec::new();
        for n in 0..=max_nc {
            series.push(Series {
                label: format!("j_re[{n}]"),
                points: rows
                    .iter()
                    .map(|r| (r.value, r.j_re.get(n).copied().unwrap_or(0.0)))
                    .collect(),
            });
            series.push(Series {
                label: format!("j_tr[{n}]"),
                points: rows
                    .iter()
                    .map(|r| (r.value, r.j_tr.get(n).copied().unwrap_or(0.0)))
                    .collect(),
            });
        }
        series.push(Series {
            label: "j_total".into(),
            points: rows.iter().map(|r| (r.value, r.j_total)).collect(),
        });
        Plot {
            x_label: x_label.into(),
            y_label: "coefficient".into(),
            log_x,
            markers,
            series,
        }
    }

    /// First-order reference (dashed in spirit; separate labels) vs full solve.
    pub fn from_born(rows: &[BornRow], markers: Vec<f64>) -> Plot {
        let max_nc = rows.iter().map(|r| r.n_c).max().unwrap_or(0);
        let mut series = Vec::new();
        for n in 0..=max_nc {
            for (prefix, pick) in [
                ("born_re", 0usize),
                ("born_tr", 1),
                ("match_re", 2),
                ("match_tr", 3),
            ] {
                series.push(Series {
                    label: format!("{prefix}[{n}]"),
                    points: rows
                        .iter()
                        .map(|r| {
                            let values = match pick {
                                0 => &r.born_re,
                                1 => &r.born_tr,
                                2 => &r.match_re,
                                _ => &r.match_tr,
                            };
                            (r.value, values.get(n).copied().unwrap_or(0.0))
                        })
                        .collect(),
                });
            }
        }
        Plot {
            x_label: "k0".into(),
            y_label: "coefficient".into(),
            log_x: false,
            markers,
            series,
        }
    }
}

fn push_attr_num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.2}");
}

/// Tick positions with a 1/2/5 step covering [lo, hi].
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if span <= 0.0 || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        mag
    } else if norm <= 2.0 {
        2.0 * mag
    } else if norm <= 5.0 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= hi + 0.5 * step {
        // Snap near-zero accumulation noise for clean labels.
        let snapped = if t.abs() < 1e-12 * step { 0.0 } else { t };
        ticks.push(snapped);
        t += step;
    }
    ticks
}

/// Decade ticks for log axes; falls back to endpoint ticks inside one decade.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let mut p = lo.log10().ceil() as i32;
    while 10f64.powi(p) <= hi * (1.0 + 1e-12) {
        ticks.push(10f64.powi(p));
        p += 1;
    }
    if ticks.len() < 2 {
        ticks = vec![lo, hi];
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:e}")
    } else {
        // Shortest round-trip decimal keeps labels stable and readable.
        format!("{v}")
    }
}

/// Renders the plot; needs at least two x-positions to draw lines.
pub fn render(plot: &Plot) -> Result<String, CliError> {
    let points_per_series = plot
        .series
        .iter()
        .map(|s| s.points.len())
        .max()
        .unwrap_or(0);
    if plot.series.is_empty() || points_per_series < 2 {
        return Err(CliError::usage("an SVG plot needs at least two rows"));
    }
    let x_of = |x: f64| if plot.log_x { x.log10() } else { x };

    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in &plot.series {
        for &(x, y) in &s.points {
            let xt = x_of(x);
            if xt.is_finite() {
                x_lo = x_lo.min(xt);
                x_hi = x_hi.max(xt);
            }
            if y.is_finite() {
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
    }
    if !(x_lo.is_finite() && x_hi.is_finite() && y_lo.is_finite() && y_hi.is_finite()) {
        return Err(CliError::usage("an SVG plot needs finite data"));
    }
    if x_hi - x_lo <= 0.0 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi - y_lo <= 1e-12 {
        y_lo -= 0.05;
        y_hi += 0.05;
    } else {
        let pad = 0.05 * (y_hi - y_lo);
        y_lo -= pad;
        y_hi += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x_of(x) - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut out = String::with_capacity(16 * 1024);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Frame.
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>"
    );

    // Ticks and grid.
    let x_ticks = if plot.log_x {
        log_ticks(10f64.powf(x_lo), 10f64.powf(x_hi))
    } else {
        linear_ticks(x_lo, x_hi)
    };
    for &t in &x_ticks {
        let x = px(t);
        if !(MARGIN_LEFT - 0.5..=MARGIN_LEFT + plot_w + 0.5).contains(&x) {
            continue;
        }
        let _ = write!(out, "<line x1=\"");
        push_attr_num(&mut out, x);
        let _ = write!(out, "\" y1=\"");
        push_attr_num(&mut out, MARGIN_TOP);
        let _ = write!(out, "\" x2=\"");
        push_attr_num(&mut out, x);
        let _ = write!(out, "\" y2=\"");
        push_attr_num(&mut out, MARGIN_TOP + plot_h);
        let _ = writeln!(out, "\" stroke=\"#dddddd\" stroke-width=\"1\"/>");
        let _ = write!(out, "<text x=\"");
        push_attr_num(&mut out, x);
        let _ = write!(out, "\" y=\"");
        push_attr_num(&mut out, MARGIN_TOP + plot_h + 18.0);
        let _ = writeln!(
            out,
            "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            fmt_tick(t)
        );
    }
    for &t in &linear_ticks(y_lo, y_hi) {
        let y = py(t);
        if !(MARGIN_TOP - 0.5..=MARGIN_TOP + plot_h + 0.5).contains(&y) {
            continue;
        }
        let _ = write!(out, "<line x1=\"");
        push_attr_num(&mut out, MARGIN_LEFT);
        let _ = write!(out, "\" y1=\"");
        push_attr_num(&mut out, y);
        let _ = write!(out, "\" x2=\"");
        push_attr_num(&mut out, MARGIN_LEFT + plot_w);
        let _ = write!(out, "\" y2=\"");
        push_attr_num(&mut out, y);
        let _ = writeln!(out, "\" stroke=\"#dddddd\" stroke-width=\"1\"/>");
        let _ = write!(out, "<text x=\"");
        push_attr_num(&mut out, MARGIN_LEFT - 8.0);
        let _ = write!(out, "\" y=\"");
        push_attr_num(&mut out, y + 4.0);
        let _ = writeln!(
            out,
            "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>",
            fmt_tick(t)
        );
    }

    // Threshold markers.
    for &m in &plot.markers {
        let xt = x_of(m);
        if !(x_lo..=x_hi).contains(&xt) {
            continue;
        }
        let x = px(m);
        let _ = write!(out, "<line x1=\"");
        push_attr_num(&mut out, x);
        let _ = write!(out, "\" y1=\"");
        push_attr_num(&mut out, MARGIN_TOP);
        let _ = write!(out, "\" x2=\"");
        push_attr_num(&mut out, x);
        let _ = write!(out, "\" y2=\"");
        push_attr_num(&mut out, MARGIN_TOP + plot_h);
        let _ = writeln!(
            out,
            "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>"
        );
    }

    // Curves.
    for (i, s) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\""
        );
        let mut first = true;
        for &(x, y) in &s.points {
            if !(x_of(x).is_finite() && y.is_finite()) {
                continue;
            }
            if !first {
                out.push(' ');
            }
            push_attr_num(&mut out, px(x));
            out.push(',');
            push_attr_num(&mut out, py(y));
            first = false;
        }
        let _ = writeln!(out, "\"/>");
    }

    // Legend.
    let legend_x = MARGIN_LEFT + plot_w + 16.0;
    for (i, s) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let _ = write!(out, "<line x1=\"");
        push_attr_num(&mut out, legend_x);
        let _ = write!(out, "\" y1=\"");
        push_attr_num(&mut out, y);
        let _ = write!(out, "\" x2=\"");
        push_attr_num(&mut out, legend_x + 22.0);
        let _ = write!(out, "\" y2=\"");
        push_attr_num(&mut out, y);
        let _ = writeln!(out, "\" stroke=\"{color}\" stroke-width=\"2\"/>");
        let _ = write!(out, "<text x=\"");
        push_attr_num(&mut out, legend_x + 28.0);
        let _ = write!(out, "\" y=\"");
        push_attr_num(&mut out, y + 4.0);
        let _ = writeln!(
            out,
            "\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            xml_escape(&s.label)
        );
    }

    // Axis labels.
    let _ = write!(out, "<text x=\"");
    push_attr_num(&mut out, MARGIN_LEFT + plot_w / 2.0);
    let _ = write!(out, "\" y=\"");
    push_attr_num(&mut out, HEIGHT - 16.0);
    let _ = writeln!(
        out,
        "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        xml_escape(&plot.x_label)
    );
    let y_mid = MARGIN_TOP + plot_h / 2.0;
    let _ = write!(out, "<text x=\"18\" y=\"");
    push_attr_num(&mut out, y_mid);
    let _ = writeln!(
        out,
        "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {y_mid:.2})\">{}</text>",
        xml_escape(&plot.y_label)
    );

    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::Status;

    fn rows() -> Vec<SweepRow> {
        (0..6)
            .map(|i| SweepRow {
                value: 1.0 + i as f64,
                n_c: 1,
                j_re: vec![0.1 * i as f64, 0.05],
                j_tr: vec![1.0 - 0.1 * i as f64, 0.05],
                j_total: 1.0,
                residual: 1e-4,
                status: Status::Converged,
            })
            .collect()
    }

    #[test]
    fn renders_a_wellformed_selfcontained_document() {
        let plot = Plot::from_sweep(&rows(), "k0", false, vec![2.5]);
        let svg = render(&plot).unwrap();
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        // 2 channels x 2 directions + total = 5 polylines.
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        assert!(svg.contains("j_total"));
        // Self-contained: the only URL is the namespace declaration.
        assert_eq!(svg.matches("http").count(), 1);
    }

    #[test]
    fn log_axis_uses_decade_ticks() {
        let mut r = rows();
        for (i, row) in r.iter_mut().enumerate() {
            row.value = 10f64.powi(i as i32 + 2);
        }
        let plot = Plot::from_sweep(&r, "omega", true, vec![]);
        let svg = render(&plot).unwrap();
        for label in ["100", "1000", "1e4", "1e7"] {
            assert!(svg.contains(&format!(">{label}<")), "missing tick {label}");
        }
    }

    #[test]
    fn rejects_degenerate_plots() {
        let one = vec![rows().remove(0)];
        assert!(render(&Plot::from_sweep(&one, "k0", false, vec![])).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let plot = Plot::from_sweep(&rows(), "k0", false, vec![2.5, 3.5]);
        assert_eq!(render(&plot).unwrap(), render(&plot).unwrap());
    }
}
