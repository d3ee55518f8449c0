//! Minimal hand-written SVG charts. Coordinates are printed with fixed
//! precision so output is byte-stable.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
}

/// Diverging blue-white-red color for a value in [-1, 1].
fn diverging(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Square heatmap of a correlation-like matrix with a tick every `tick_every`
/// rows; `labels[i]` names row/column `i`.
pub fn heatmap(title: &str, matrix: &[Vec<f64>], labels: &[String], tick_every: usize) -> String {
    let n = matrix.len();
    let cell = (600.0 / n.max(1) as f64).clamp(2.0, 30.0);
    let (left, top) = (60.0, 40.0);
    let side = cell * n as f64;
    let (w, h) = (left + side + 80.0, top + side + 50.0);
    let mut out = String::new();
    header(&mut out, w, h, title);
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="{}"/>"#,
                left + j as f64 * cell,
                top + i as f64 * cell,
                diverging(v)
            );
        }
    }
    let step = tick_every.max(1);
    for i in (0..n).step_by(step) {
        let c = (i as f64 + 0.5) * cell;
        let label = escape(labels.get(i).map_or("", String::as_str));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
            left - 4.0,
            top + c
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            left + c,
            top + side + 14.0
        );
    }
    let lx = left + side + 20.0;
    for k in 0..=20 {
        let v = 1.0 - k as f64 / 10.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            top + k as f64 * side / 21.0,
            side / 21.0,
            diverging(v)
        );
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{top:.2}">1</text>"#, lx + 18.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">-1</text>"#, lx + 18.0, top + side);
    out.push_str("</svg>\n");
    out
}

/// Line chart of several series sharing an x axis `1..=len`. `None` values
/// leave gaps.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<Option<f64>>)]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 130.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let n = series.iter().map(|s| s.1.len()).max().unwrap_or(1).max(2);
    let values = series.iter().flat_map(|s| s.1.iter().flatten().copied());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.05;
        hi += 0.05;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |i: usize| left + pw * i as f64 / (n - 1) as f64;
    let py = |v: f64| top + ph * (hi - v) / (hi - lo);

    let mut out = String::new();
    header(&mut out, w, h, title);
    let _ = writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{v:.3}</text>"#,
            left - 4.0
        );
    }
    let tick = (n / 10).max(1);
    for i in (0..n).step_by(tick) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(i),
            top + ph + 14.0,
            i + 1
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for (i, v) in ys.iter().enumerate() {
            match v {
                Some(v) => {
                    let _ = write!(path, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(i), py(*v));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.trim_end()
        );
        let ly = top + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            left + pw + 10.0,
            left + pw + 30.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" dominant-baseline="middle">{}</text>"#,
            left + pw + 34.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bars with a label under each; `groups[i]` picks the color.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64, usize)], legend: &[&str]) -> String {
    let n = bars.len().max(1);
    let bw = 16.0;
    let (left, top, bottom) = (60.0, 40.0, 70.0);
    let pw = bw * n as f64 * 1.25;
    let (w, h) = (left + pw + 120.0, 360.0);
    let ph = h - top - bottom;
    let hi = bars.iter().map(|b| b.1).fold(0.0, f64::max).max(1e-12) * 1.05;
    let mut out = String::new();
    header(&mut out, w, h, title);
    let _ = writeln!(
        out,
        r#"<line x1="{left}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        top + ph,
        left + pw,
        top + ph
    );
    for k in 0..=4 {
        let v = hi * k as f64 / 4.0;
        let y = top + ph * (1.0 - k as f64 / 4.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{v:.3}</text>"#,
            left - 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, (label, v, group)) in bars.iter().enumerate() {
        let x = left + bw * 1.25 * i as f64 + bw * 0.125;
        let bh = ph * v.max(0.0) / hi;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="{bw:.2}" height="{bh:.2}" fill="{}"/>"#,
            top + ph - bh,
            PALETTE[group % PALETTE.len()]
        );
        let cx = x + bw / 2.0;
        let ty = top + ph + 8.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{ty:.2}" text-anchor="end" transform="rotate(-60 {cx:.2} {ty:.2})">{}</text>"#,
            escape(label)
        );
    }
    for (k, name) in legend.iter().enumerate() {
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = left + pw + 16.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            ly - 6.0,
            PALETTE[k % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" dominant-baseline="middle">{}</text>"#,
            lx + 16.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
