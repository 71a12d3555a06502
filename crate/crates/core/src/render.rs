//! CSV and SVG renderings of a [`RooflineReport`].

use std::fmt::Write as _;

use crate::roofline::{PointVariant, RooflineReport};

pub fn report_csv(report: &RooflineReport) -> String {
    let mut out = String::from("layer,variant,ops_per_bit,required_ops,classification,borderline\n");
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&p.point.layer_name),
            p.point.variant,
            p.point.ops_per_bit,
            p.point.required_ops,
            p.classification,
            p.borderline
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const RAW_COLOR: &str = "#d62728";
const PARTIAL_COLOR: &str = "#2ca02c";

struct LogAxis {
    lo: i32,
    hi: i32,
    px_lo: f64,
    px_hi: f64,
}

impl LogAxis {
    /// Whole decades covering every value.
    fn covering(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && *v > 0.0) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        let (lo, mut hi) = (lo.floor() as i32, hi.ceil() as i32);
        if hi <= lo {
            hi = lo + 1;
        }
        LogAxis { lo, hi, px_lo, px_hi }
    }

    fn min(&self) -> f64 {
        10f64.powi(self.lo)
    }

    fn max(&self) -> f64 {
        10f64.powi(self.hi)
    }

    fn px(&self, v: f64) -> f64 {
        let t = (v.log10() - self.lo as f64) / (self.hi - self.lo) as f64;
        self.px_lo + t * (self.px_hi - self.px_lo)
    }
}

/// Log-log roofline: flat compute ceiling, diagonal memory ceiling, ridge
/// marker, red raw points and green partial-sum points.
pub fn report_svg(report: &RooflineReport) -> String {
    let xs = report.points.iter().map(|p| p.point.ops_per_bit).chain([report.ridge_point]);
    let ys = report.points.iter().map(|p| p.point.required_ops).chain([report.compute_ceiling]);
    let x = LogAxis::covering(xs, LEFT, WIDTH - RIGHT);
    let y = LogAxis::covering(ys, HEIGHT - BOTTOM, TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}: {:.0} MHz, {}x{} array, {} partial sums</text>"#,
        WIDTH / 2.0,
        xml_escape(&report.network),
        report.frequency / 1e6,
        report.array.0,
        report.array.1,
        report.spill
    );

    // decade grid
    for d in x.lo..=x.hi {
        let px = x.px(10f64.powi(d));
        let _ = writeln!(s, r##"<line class="grid" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##, HEIGHT - BOTTOM);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, HEIGHT - BOTTOM + 18.0);
    }
    for d in y.lo..=y.hi {
        let py = y.px(10f64.powi(d));
        let _ = writeln!(s, r##"<line class="grid" x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, WIDTH - RIGHT);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 8.0, py + 4.0);
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Operation density [OPS/bit]</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">Performance [OPS/s]</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    );

    // compute ceiling
    let cy = y.px(report.compute_ceiling);
    let _ = writeln!(
        s,
        r##"<line class="compute-ceiling" x1="{LEFT}" y1="{cy:.2}" x2="{:.2}" y2="{cy:.2}" stroke="#1f77b4" stroke-width="2"><title>compute ceiling {:.4e} OPS/s</title></line>"##,
        WIDTH - RIGHT,
        report.compute_ceiling
    );

    // memory ceiling y = x·bandwidth, clipped to the plot
    let bw = report.bandwidth;
    let x0 = x.min().max(y.min() / bw);
    let x1 = x.max().min(y.max() / bw);
    if bw.is_finite() && x0 < x1 {
        let _ = writeln!(
            s,
            r##"<line class="memory-ceiling" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ff7f0e" stroke-width="2"><title>memory ceiling {:.4e} bit/s</title></line>"##,
            x.px(x0),
            y.px(x0 * bw),
            x.px(x1),
            y.px(x1 * bw),
            bw
        );
    }

    if report.ridge_point.is_finite() && report.ridge_point > 0.0 {
        let _ = writeln!(
            s,
            r##"<circle class="ridge" cx="{:.2}" cy="{cy:.2}" r="6" fill="none" stroke="#333" stroke-width="1.5"><title>ridge point {:.3} OPS/bit</title></circle>"##,
            x.px(report.ridge_point),
            report.ridge_point
        );
    }

    for p in &report.points {
        let (class, color) = match p.point.variant {
            PointVariant::Raw => ("raw", RAW_COLOR),
            PointVariant::PartialSum => ("partial-sum", PARTIAL_COLOR),
        };
        let _ = writeln!(
            s,
            r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="4" fill="{color}"><title>{} ({class}): {:.3} OPS/bit, {:.4e} OPS/s, {}{}</title></circle>"#,
            x.px(p.point.ops_per_bit),
            y.px(p.point.required_ops),
            xml_escape(&p.point.layer_name),
            p.point.ops_per_bit,
            p.point.required_ops,
            p.classification,
            if p.borderline { ", borderline" } else { "" }
        );
    }

    let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{RAW_COLOR}"/><text x="{:.1}" y="{:.1}">required</text>"#, LEFT + 16.0, TOP + 16.0, LEFT + 26.0, TOP + 20.0);
    let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{PARTIAL_COLOR}"/><text x="{:.1}" y="{:.1}">partial sums</text>"#, LEFT + 16.0, TOP + 34.0, LEFT + 26.0, TOP + 38.0);
    s.push_str("</svg>\n");
    s
}
