//! CSV histories and log-log convergence plots.

use std::fmt::Write as _;
use std::io::Write;

use crate::adapt::RunRecord;
use crate::error::Result;

/// `step,dofs,estimator[,error_u],wall_time`, reals with 17 significant digits.
pub fn write_csv<W: Write>(out: &mut W, records: &[RunRecord]) -> Result<()> {
    let with_error = records.iter().any(|r| r.error_u.is_some());
    if with_error {
        writeln!(out, "step,dofs,estimator,error_u,wall_time")?;
    } else {
        writeln!(out, "step,dofs,estimator,wall_time")?;
    }
    for r in records {
        write!(out, "{},{},{:.16e}", r.step, r.dofs, r.estimator)?;
        if with_error {
            write!(out, ",{:.16e}", r.error_u.unwrap_or(f64::NAN))?;
        }
        writeln!(out, ",{:.16e}", r.wall_time)?;
    }
    Ok(())
}

pub fn csv_string(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 70.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Decade-aligned range covering positive `values`.
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        let (lo, hi) = (lo.floor(), hi.ceil());
        Self { lo, hi: if hi > lo { hi } else { lo + 1.0 } }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.log10() - self.lo) / (self.hi - self.lo)
    }
}

/// Log-log plot of the estimator against the DoF count with a triangle of the
/// given slope anchored below the last point.
pub fn svg_plot(records: &[RunRecord], title: &str, rate: Option<f64>) -> String {
    let xa = Axis::new(records.iter().map(|r| r.dofs as f64));
    let ya = Axis::new(records.iter().map(|r| r.estimator));
    let px = |v: f64| MARGIN + xa.frac(v) * (W - 2.0 * MARGIN);
    let py = |v: f64| H - MARGIN - ya.frac(v) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#);

    for e in xa.lo as i32..=xa.hi as i32 {
        let x = px(10f64.powi(e));
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"#, y0 + 20.0);
    }
    for e in ya.lo as i32..=ya.hi as i32 {
        let y = py(10f64.powi(e));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">degrees of freedom</text>"#, W / 2.0, H - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">estimator</text>"#,
        H / 2.0,
        H / 2.0
    );

    let pts: Vec<String> = records
        .iter()
        .filter(|r| r.estimator > 0.0)
        .map(|r| format!("{:.2},{:.2}", px(r.dofs as f64), py(r.estimator)))
        .collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, pts.join(" "));
    for p in &pts {
        let (cx, cy) = p.split_once(',').expect("formatted pair");
        let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="steelblue"/>"#);
    }

    if let (Some(rate), Some(last)) = (rate, records.last()) {
        // one third of a decade in DoFs, placed under the last point
        let (n1, e1) = (last.dofs as f64, last.estimator * 0.5);
        let n0 = n1 / 10f64.powf(1.0 / 3.0);
        let e0 = e1 * (n1 / n0).powf(rate);
        let _ = writeln!(
            s,
            r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2} Z" fill="none" stroke="gray"/>"#,
            px(n0),
            py(e0),
            px(n1),
            py(e1),
            px(n0),
            py(e1)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="gray">{rate:.2}</text>"#, px(n0) - 4.0, py(e0.sqrt() * e1.sqrt()));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
