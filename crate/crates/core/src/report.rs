//! Sweep result serialization: a CSV table and an SVG capacity-vs-SNR chart.
//!
//! Both renderings are deterministic byte-for-byte for a given result: CSV
//! floats use the shortest round-trip form, SVG coordinates a fixed two-digit
//! form.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::SweepResult;

/// Fixed CSV header.
pub const CSV_HEADER: &str = "snr_db,mean_com,std_com,mean_11ad,std_11ad,mean_gain,iters,seed";

/// Render the result as CSV text, one row per SNR point.
pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.snr_db,
            p.mean_com,
            p.std_com,
            p.mean_baseline,
            p.std_baseline,
            p.mean_gain,
            p.iterations,
            result.seed,
        ));
    }
    out
}

/// Write the CSV rendering to `path`.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, csv_string(result)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 56.0;
const COM_COLOR: &str = "#1f77b4";
const BASELINE_COLOR: &str = "#d62728";

struct Axis {
    min: f64,
    max: f64,
    offset: f64,
    span: f64,
}

impl Axis {
    fn x(points_min: f64, points_max: f64) -> Self {
        let (min, max) = pad_if_flat(points_min, points_max, 1.0);
        Self {
            min,
            max,
            offset: MARGIN_LEFT,
            span: SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        }
    }

    fn y(points_min: f64, points_max: f64) -> Self {
        let (min, max) = pad_if_flat(points_min.min(0.0), points_max, 1.0);
        Self {
            min,
            max,
            offset: MARGIN_TOP,
            span: SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
        }
    }

    fn to_px_x(&self, v: f64) -> f64 {
        self.offset + (v - self.min) / (self.max - self.min) * self.span
    }

    fn to_px_y(&self, v: f64) -> f64 {
        // SVG y grows downward.
        self.offset + (self.max - v) / (self.max - self.min) * self.span
    }
}

fn pad_if_flat(min: f64, max: f64, pad: f64) -> (f64, f64) {
    if min == max {
        (min - pad, max + pad)
    } else {
        (min, max)
    }
}

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

fn markers(points: &[(f64, f64)], color: &str) -> String {
    points
        .iter()
        .map(|(x, y)| {
            format!("  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3.5\" fill=\"{color}\"/>\n")
        })
        .collect()
}

/// Render the two capacity curves versus SNR as a self-contained SVG.
pub fn svg_string(result: &SweepResult) -> Result<String> {
    if result.points.is_empty() {
        return Err(Error::Config("cannot plot an empty sweep result".into()));
    }
    let snr_min = result.points.first().map(|p| p.snr_db).unwrap_or(0.0);
    let snr_max = result.points.last().map(|p| p.snr_db).unwrap_or(0.0);
    let cap_min = result
        .points
        .iter()
        .flat_map(|p| [p.mean_com, p.mean_baseline])
        .fold(f64::INFINITY, f64::min);
    let cap_max = result
        .points
        .iter()
        .flat_map(|p| [p.mean_com, p.mean_baseline])
        .fold(f64::NEG_INFINITY, f64::max);
    let x_axis = Axis::x(snr_min, snr_max);
    let y_axis = Axis::y(cap_min, cap_max);

    let com_px: Vec<(f64, f64)> = result
        .points
        .iter()
        .map(|p| (x_axis.to_px_x(p.snr_db), y_axis.to_px_y(p.mean_com)))
        .collect();
    let baseline_px: Vec<(f64, f64)> = result
        .points
        .iter()
        .map(|p| (x_axis.to_px_x(p.snr_db), y_axis.to_px_y(p.mean_baseline)))
        .collect();

    let plot_left = MARGIN_LEFT;
    let plot_right = SVG_WIDTH - MARGIN_RIGHT;
    let plot_top = MARGIN_TOP;
    let plot_bottom = SVG_HEIGHT - MARGIN_BOTTOM;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n"
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Frame.
    svg.push_str(&format!(
        "  <rect x=\"{plot_left:.2}\" y=\"{plot_top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>\n",
        plot_right - plot_left,
        plot_bottom - plot_top,
    ));

    // X ticks at each grid point.
    for p in &result.points {
        let x = x_axis.to_px_x(p.snr_db);
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{plot_bottom:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            plot_bottom + 6.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            plot_bottom + 20.0,
            p.snr_db
        ));
    }

    // Five evenly spaced y ticks.
    for i in 0..5 {
        let value = y_axis.min + (y_axis.max - y_axis.min) * i as f64 / 4.0;
        let y = y_axis.to_px_y(value);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{plot_left:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            plot_left - 6.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{value:.2}</text>\n",
            plot_left - 10.0,
            y + 4.0
        ));
    }

    // Axis labels.
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">SNR (dB)</text>\n",
        (plot_left + plot_right) / 2.0,
        SVG_HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">Capacity (bit/s/Hz)</text>\n",
        (plot_top + plot_bottom) / 2.0,
        (plot_top + plot_bottom) / 2.0
    ));

    // Curves: polylines only when there is something to connect.
    if result.points.len() >= 2 {
        svg.push_str(&polyline(&com_px, COM_COLOR));
        svg.push_str(&polyline(&baseline_px, BASELINE_COLOR));
    }
    svg.push_str(&markers(&com_px, COM_COLOR));
    svg.push_str(&markers(&baseline_px, BASELINE_COLOR));

    // Legend.
    let legend_x = plot_left + 12.0;
    let legend_y = plot_top + 16.0;
    svg.push_str(&format!(
        "  <line x1=\"{legend_x:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" stroke=\"{COM_COLOR}\" stroke-width=\"2\"/>\n",
        legend_x + 28.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">COM</text>\n",
        legend_x + 34.0,
        legend_y + 4.0
    ));
    svg.push_str(&format!(
        "  <line x1=\"{legend_x:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{BASELINE_COLOR}\" stroke-width=\"2\"/>\n",
        legend_y + 18.0,
        legend_x + 28.0,
        legend_y + 18.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">802.11ad baseline</text>\n",
        legend_x + 34.0,
        legend_y + 22.0
    ));

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Write the SVG rendering to `path`.
pub fn emit_plot(result: &SweepResult, path: &Path) -> Result<()> {
    let svg = svg_string(result)?;
    fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
