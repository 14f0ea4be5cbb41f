use std::fmt::Write as _;
use std::path::Path;

use crate::autoencoder::LatentHistogram;
use crate::curves::ResponseCurve;
use crate::error::Result;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;
const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];
/// Points per plotted curve; curves with more samples are decimated.
const MAX_POINTS: usize = 256;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
}

fn px(x: f64) -> f64 {
    MARGIN + x * (WIDTH - 2.0 * MARGIN)
}

fn py(y: f64) -> f64 {
    HEIGHT - MARGIN - y * (HEIGHT - 2.0 * MARGIN)
}

/// Line plot on the unit square with one `<path>` per curve and a legend.
pub fn curves_svg(curves: &[(&str, &ResponseCurve)], title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    for (i, (label, curve)) in curves.iter().enumerate() {
        let n = curve.len();
        let step = n.div_ceil(MAX_POINTS).max(1);
        let mut d = String::new();
        let grid = crate::curves::SampleGrid::new(n).expect("curve length is valid");
        let mut idx: Vec<usize> = (0..n).step_by(step).collect();
        if idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        for (k, &j) in idx.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let y = curve.samples()[j].clamp(0.0, 1.0);
            let _ = write!(d, "{cmd}{:.2},{:.2} ", px(grid.position(j)), py(y));
        }
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></path>"#,
            d.trim_end(),
            escape(label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{}</text>"#,
            MARGIN + 6.0,
            MARGIN + 14.0 + 13.0 * i as f64,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart of a latent histogram, one `<rect>` per bin.
pub fn histogram_svg(hist: &LatentHistogram, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let bins = hist.counts.len().max(1);
    let peak = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let w = 1.0 / bins as f64;
    for (i, &c) in hist.counts.iter().enumerate() {
        let h = c as f64 / peak;
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4"/>"##,
            px(i as f64 * w),
            py(h),
            w * (WIDTH - 2.0 * MARGIN),
            h * (HEIGHT - 2.0 * MARGIN)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11">mean {:.3} sd {:.3} range [{}, {}]</text>"#,
        MARGIN + 6.0,
        MARGIN + 14.0,
        hist.mean,
        hist.sd,
        hist.lower,
        hist.upper
    );
    out.push_str("</svg>\n");
    out
}

pub fn emit_plot_data(svg: &str, path: &Path) -> Result<()> {
    std::fs::write(path, svg)?;
    Ok(())
}
