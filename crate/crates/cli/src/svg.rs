//! Diagnostic SVG of the `(r, theta)` chart.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write;

use cmc_orbit::{Family, FamilyKind};

const SCALE: f64 = 600.0 / std::f64::consts::PI;
const MARGIN: f64 = 20.0;
const MIRROR_SAMPLES: usize = 64;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Chart {
    r_max: f64,
}

impl Chart {
    fn x(&self, r: f64) -> f64 {
        MARGIN + r * SCALE
    }

    fn y(&self, theta: f64) -> f64 {
        MARGIN + (FRAC_PI_2 - theta) * SCALE
    }

    fn width(&self) -> f64 {
        2.0 * MARGIN + self.r_max * SCALE
    }

    fn height(&self) -> f64 {
        2.0 * MARGIN + FRAC_PI_2 * SCALE
    }

    fn polyline(&self, pts: impl Iterator<Item = (f64, f64)>) -> String {
        let mut s = String::new();
        for (i, (r, t)) in pts.enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{:.3},{:.3}", self.x(r), self.y(t)).unwrap();
        }
        s
    }
}

fn mirror_lines(family: Family, chart: &Chart, out: &mut String) {
    let dashed = r##"stroke="#888" stroke-width="1" stroke-dasharray="6 4" fill="none""##;
    writeln!(
        out,
        r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {dashed}/>"#,
        chart.x(0.0),
        chart.y(FRAC_PI_4),
        chart.x(chart.r_max),
        chart.y(FRAC_PI_4)
    )
    .unwrap();
    match family.kind {
        FamilyKind::S2n => {
            writeln!(
                out,
                r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {dashed}/>"#,
                chart.x(FRAC_PI_2),
                chart.y(0.0),
                chart.x(FRAC_PI_2),
                chart.y(FRAC_PI_2)
            )
            .unwrap();
        }
        FamilyKind::S3nMinus1 => {
            // x = z gives tan r cos theta = 1, y = z gives tan r sin theta = 1.
            let thetas = (0..=MIRROR_SAMPLES).map(|k| k as f64 / MIRROR_SAMPLES as f64 * FRAC_PI_2);
            let gamma = thetas.clone().map(|t| ((1.0 / t.cos()).atan(), t));
            let yz = thetas.map(|t| ((1.0 / t.sin()).atan(), t));
            for pts in [chart.polyline(gamma), chart.polyline(yz)] {
                writeln!(out, r#"  <polyline points="{pts}" {dashed}/>"#).unwrap();
            }
        }
    }
}

/// One `<path>` per entry of `copies`, the mirrors dashed, and a marker
/// at `start`.
pub fn render(family: Family, title: &str, copies: &[Vec<(f64, f64)>], start: (f64, f64)) -> String {
    let chart = Chart { r_max: family.r_max() };
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        chart.width().ceil(),
        chart.height().ceil(),
        chart.width(),
        chart.height()
    )
    .unwrap();
    writeln!(out, "  <title>{}</title>", escape(title)).unwrap();
    writeln!(
        out,
        r##"  <rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#000" stroke-width="1"/>"##,
        chart.r_max * SCALE,
        FRAC_PI_2 * SCALE
    )
    .unwrap();
    mirror_lines(family, &chart, &mut out);
    for (i, pts) in copies.iter().enumerate() {
        let mut d = String::new();
        for (k, &(r, t)) in pts.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            if k > 0 {
                d.push(' ');
            }
            write!(d, "{cmd}{:.3},{:.3}", chart.x(r), chart.y(t)).unwrap();
        }
        writeln!(
            out,
            r#"  <path d="{d}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            COLORS[i % COLORS.len()]
        )
        .unwrap();
    }
    writeln!(
        out,
        r##"  <circle cx="{:.3}" cy="{:.3}" r="4" fill="#000"/>"##,
        chart.x(start.0),
        chart.y(start.1)
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
