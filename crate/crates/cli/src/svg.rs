//! Minimal scatter-plot writer: axes, points, a `y = x` reference line and
//! a legend. No external plotting dependency.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 70.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Point<'a> {
    pub x: f64,
    pub y: f64,
    pub group: &'a str,
    pub label: &'a str,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Both axes share one range so the diagonal is the identity line.
pub fn scatter(points: &[Point], title: &str, x_label: &str, y_label: &str) -> String {
    let (mut lo, mut hi) = points
        .iter()
        .flat_map(|p| [p.x, p.y])
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let span = WIDTH - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + (v - lo) / (hi - lo) * span;
    let sy = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * span;

    let mut groups: Vec<&str> = Vec::new();
    for p in points {
        if !groups.contains(&p.group) {
            groups.push(p.group);
        }
    }
    let color = |g: &str| PALETTE[groups.iter().position(|x| *x == g).unwrap_or(0) % PALETTE.len()];

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    let (x0, x1, y0, y1) = (sx(lo), sx(hi), sy(lo), sy(hi));
    writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#).unwrap();
    writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="gray" stroke-dasharray="4 4"/>"#
    )
    .unwrap();
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#, sx(v), y0 + 18.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, x0 - 6.0, sy(v) + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 20.0, escape(x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
    for p in points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.7"><title>{}</title></circle>"#,
            sx(p.x),
            sy(p.y),
            color(p.group),
            escape(p.label)
        )
        .unwrap();
    }
    for (i, g) in groups.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        writeln!(s, r#"<circle cx="{}" cy="{y}" r="4" fill="{}"/>"#, MARGIN + 10.0, color(g)).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, MARGIN + 20.0, y + 4.0, escape(g)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_coordinates_sit_on_the_diagonal() {
        let pts = [
            Point { x: 0.1, y: 0.1, group: "a", label: "x<y" },
            Point { x: -0.3, y: -0.3, group: "b", label: "z" },
        ];
        let svg = scatter(&pts, "t", "before", "after");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("x&lt;y"));
        for line in svg.lines().filter(|l| l.starts_with("<circle cx") && l.contains("<title>")) {
            let num = |key: &str| -> f64 {
                let rest = &line[line.find(key).unwrap() + key.len()..];
                rest[..rest.find('"').unwrap()].parse().unwrap()
            };
            // on the diagonal: cx - MARGIN == HEIGHT - MARGIN - cy
            assert!((num("cx=\"") - MARGIN - (HEIGHT - MARGIN - num("cy=\""))).abs() < 0.02);
        }
    }

    #[test]
    fn empty_plot_is_well_formed() {
        let svg = scatter(&[], "empty", "x", "y");
        assert!(svg.contains("</svg>"));
    }
}
