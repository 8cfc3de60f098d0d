//! Neutral-curve plots: log-k abscissa, stationary samples solid and
//! oscillatory samples dashed.

use std::fmt::Write;

use biostab_core::stability::{Branch, NeutralPoint};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

fn class(b: Branch) -> &'static str {
    b.as_str()
}

fn style(b: Branch) -> &'static str {
    match b {
        Branch::Stationary => "fill:none;stroke:#1f4e99;stroke-width:2",
        Branch::Oscillatory => "fill:none;stroke:#b2361b;stroke-width:2;stroke-dasharray:6 4",
    }
}

/// Runs of consecutive points on the same branch.
fn segments(curve: &[NeutralPoint]) -> Vec<(Branch, Vec<NeutralPoint>)> {
    let mut out: Vec<(Branch, Vec<NeutralPoint>)> = Vec::new();
    for p in curve {
        match out.last_mut() {
            Some((b, pts)) if *b == p.branch => pts.push(*p),
            _ => out.push((p.branch, vec![*p])),
        }
    }
    out
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn neutral_curve_svg(curve: &[NeutralPoint], log_r: bool, title: &str) -> String {
    let pts: Vec<&NeutralPoint> = curve.iter().filter(|p| p.k > 0.0 && p.r.is_finite()).collect();
    let fy = |r: f64| if log_r { r.max(f64::MIN_POSITIVE).log10() } else { r };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.k.log10());
        x1 = x1.max(p.k.log10());
        y0 = y0.min(fy(p.r));
        y1 = y1.max(fy(p.r));
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0).max(1e-12 * y1.abs().max(1.0));
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let segs = segments(curve);
    let mut used: Vec<Branch> = segs.iter().map(|s| s.0).collect();
    used.sort_by_key(|b| *b as u8);
    used.dedup();

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    s.push_str("<style>\n");
    for b in &used {
        writeln!(s, ".{} {{ {} }}", class(*b), style(*b)).unwrap();
    }
    s.push_str("</style>\n");
    writeln!(s, r#"<title>{title}</title>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    )
    .unwrap();
    for t in ticks(x0, x1, 5) {
        let x = px(t);
        writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, H - BOTTOM, H - BOTTOM + 5.0).unwrap();
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 18.0,
            label(10f64.powf(t))
        )
        .unwrap();
    }
    for t in ticks(y0, y1, 5) {
        let y = py(t);
        let v = if log_r { 10f64.powf(t) } else { t };
        writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            label(v)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">k</text>"#,
        0.5 * (LEFT + W - RIGHT),
        H - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">R</text>"#,
        0.5 * (TOP + H - BOTTOM),
        0.5 * (TOP + H - BOTTOM)
    )
    .unwrap();
    for (b, seg) in &segs {
        let coords: Vec<String> = seg
            .iter()
            .filter(|p| p.k > 0.0 && p.r.is_finite())
            .map(|p| format!("{:.2},{:.2}", px(p.k.log10()), py(fy(p.r))))
            .collect();
        writeln!(s, r#"<polyline class="{}" points="{}"/>"#, class(*b), coords.join(" ")).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
