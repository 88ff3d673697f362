//! Zero-distribution and leading-coefficient diagnostics, and the CSV and
//! SVG writers for sweep rows.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::EquilibriumOracle;
use crate::polyops::{moments, Poly};

use super::RateRow;

/// Exact CSV header of a sweep.
pub const CSV_HEADER: &str = "n,err_p,err_sup,bound12,lead_coeff_scaled,zero_moment_gap";
/// Zero-distribution diagnostics need at least this many zeros.
pub const MIN_ZERO_DEGREE: usize = 8;
const ROOT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct ZeroReport {
    pub degree: usize,
    /// `max_k |m_k(zeros) - m_k(μ̂)|`.
    pub gap: f64,
    pub moments: Vec<crate::C64>,
    pub max_residual: f64,
    pub sweeps: usize,
}

/// Compares the normalized zero counting measure of `q` with the Leja
/// equilibrium proxy through its first `k_max` moments.
pub fn zero_report(q: &Poly, oracle: &EquilibriumOracle, k_max: usize) -> Result<ZeroReport> {
    if k_max == 0 || k_max > oracle.moment_table.len() {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} outside 1..={}",
            oracle.moment_table.len()
        )));
    }
    let trimmed = q.trimmed(crate::polyops::TRIM_RELATIVE);
    if trimmed.degree() < MIN_ZERO_DEGREE {
        return Err(Error::Roots(format!(
            "polynomial has {} zeros, need at least {MIN_ZERO_DEGREE} \
             (the map may be analytic on the closed domain)",
            trimmed.degree()
        )));
    }
    let zs = trimmed.roots(ROOT_TOL)?;
    if !zs.all_converged() {
        let bad = zs.converged.iter().filter(|c| !**c).count();
        return Err(Error::Roots(format!(
            "{bad} of {} zeros did not converge after {} sweeps",
            zs.roots.len(),
            zs.sweeps
        )));
    }
    let m = moments(&zs.roots, k_max, oracle.center, oracle.scale)?;
    let gap = m
        .iter()
        .zip(&oracle.moment_table)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(ZeroReport {
        degree: trimmed.degree(),
        gap,
        moments: m,
        max_residual: zs.max_residual(),
        sweeps: zs.sweeps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadReport {
    /// `|ã_n|^{1/n} · cap` per input row.
    pub scaled: Vec<f64>,
    /// Maximum of `scaled` over the upper half of the degree list.
    pub windowed_max: f64,
    /// Degrees whose leading coefficient was exactly zero.
    pub zero_leading: Vec<usize>,
}

/// `|ã_n|^{1/n} · capacity` for `(n, |ã_n|)` pairs in increasing `n`.
pub fn leading_coeff_report(leads: &[(usize, f64)], capacity: f64) -> Result<LeadReport> {
    if !(capacity > 0.0 && capacity.is_finite()) {
        return Err(Error::InvalidParameter(format!("capacity {capacity}")));
    }
    if leads.is_empty() {
        return Err(Error::InvalidParameter("no rows".into()));
    }
    let mut zero_leading = Vec::new();
    let scaled: Vec<f64> = leads
        .iter()
        .map(|&(n, a)| {
            if a == 0.0 || n == 0 {
                zero_leading.push(n);
                0.0
            } else {
                a.powf(1.0 / n as f64) * capacity
            }
        })
        .collect();
    let start = scaled.len() / 2;
    let windowed_max = scaled[start..].iter().copied().fold(0.0, f64::max);
    Ok(LeadReport {
        scaled,
        windowed_max,
        zero_leading,
    })
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// CSV with [`CSV_HEADER`]; absent metrics are empty fields.
pub fn rows_to_csv(rows: &[RateRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            field(Some(r.err_p)),
            field(r.err_sup),
            field(r.bound12),
            field(r.lead_coeff_scaled),
            field(r.zero_moment_gap)
        );
    }
    out
}

/// Log-log plot of `err_p`, `err_sup` and the bound against `n`.
pub fn rows_to_svg(rows: &[RateRow], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let series: [(&str, &str, Vec<(f64, f64)>); 3] = [
        ("err_p", "#1f77b4", rows.iter().map(|r| (r.n as f64, Some(r.err_p))).filter_map(pos).collect()),
        ("err_sup", "#d62728", rows.iter().map(|r| (r.n as f64, r.err_sup)).filter_map(pos).collect()),
        ("bound12", "#7f7f7f", rows.iter().map(|r| (r.n as f64, r.bound12)).filter_map(pos).collect()),
    ];
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().copied()).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    if all.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &all {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    let (x0, x1) = widen(x0, x1);
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| L + (x.log10() - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| T + (y1 - y.log10()) / (y1 - y0) * (H - T - B);
    let _ = writeln!(
        svg,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    );
    let mut e = y0 as i32;
    while e <= y1 as i32 {
        let y = py(10f64.powi(e));
        let _ = writeln!(svg, r##"<line x1="{L}" x2="{}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/>"##, W - R);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"#, L - 6.0, y + 4.0);
        e += 1;
    }
    for r in rows {
        let x = px(r.n as f64);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, H - B + 16.0, r.n);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">degree n (log scale)</text>"#, (L + W - R) / 2.0, H - 12.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">error (log scale)</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );
    for (i, (name, color, pts)) in series.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.1},{:.1}", px(*x), py(*y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for (x, y) in pts {
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(*x), py(*y));
        }
        let ly = T + 14.0 + 16.0 * i as f64;
        let _ = writeln!(svg, r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - R - 110.0, W - R - 90.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{name}</text>"#, W - R - 84.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

fn pos((x, y): (f64, Option<f64>)) -> Option<(f64, f64)> {
    y.filter(|v| *v > 0.0 && v.is_finite()).map(|v| (x, v))
}

fn widen(a: f64, b: f64) -> (f64, f64) {
    if b - a < 1e-9 {
        (a - 0.5, b + 0.5)
    } else {
        let pad = 0.05 * (b - a);
        (a - pad, b + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
