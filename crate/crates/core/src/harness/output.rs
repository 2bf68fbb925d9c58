//! CSV and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::AggregateSeries;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "step,mean_gmean,stderr";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One `step,mean_gmean,stderr` row per step, values with 9 significant digits.
pub fn emit_csv(series: &AggregateSeries, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(32 * (series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (t, (m, se)) in series.mean.iter().zip(&series.stderr).enumerate() {
        writeln!(out, "{t},{m:.8e},{se:.8e}").expect("writing to a String");
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Reads a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<AggregateSeries> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad =
        |line: usize, what: &str| Error::Config(format!("{}:{}: {what}", path.display(), line + 1));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, CSV_HEADER)) => {}
        _ => return Err(bad(0, "missing header")),
    }
    let mut series = AggregateSeries {
        mean: Vec::new(),
        stderr: Vec::new(),
    };
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(i, "expected 3 fields"));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad(i, "bad number"));
        series.mean.push(parse(fields[1])?);
        series.stderr.push(parse(fields[2])?);
    }
    Ok(series)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 1000;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Line chart of mean G-mean per step with a shaded standard-error band,
/// one line per named series.
pub fn emit_chart(title: &str, series: &[(String, &AggregateSeries)], path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Config("chart needs at least one series".into()));
    }
    let steps = series
        .iter()
        .map(|(_, s)| s.len())
        .max()
        .unwrap_or(0)
        .max(2);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: usize| LEFT + plot_w * t as f64 / (steps - 1) as f64;
    let sy = |v: f64| TOP + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        w,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // grid and ticks
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for i in 0..=5 {
        let t = (steps - 1) * i / 5;
        let x = sx(t);
        let _ = writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time step</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        w,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">prequential G-mean</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let stride = s.len().div_ceil(MAX_POINTS).max(1);
        let mut idx: Vec<usize> = (0..s.len()).step_by(stride).collect();
        if !s.is_empty() && idx.last() != Some(&(s.len() - 1)) {
            idx.push(s.len() - 1);
        }

        let upper = idx.iter().map(|&t| (sx(t), sy(s.mean[t] + s.stderr[t])));
        let lower = idx
            .iter()
            .rev()
            .map(|&t| (sx(t), sy(s.mean[t] - s.stderr[t])));
        let band: Vec<String> = upper
            .chain(lower)
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let line: Vec<String> = idx
            .iter()
            .map(|&t| format!("{:.2},{:.2}", sx(t), sy(s.mean[t])))
            .collect();
        let _ = writeln!(
            w,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let _ = writeln!(
            w,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );

        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            w,
            r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(io_err(path))
}
