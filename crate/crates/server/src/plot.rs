//! Minimal SVG chart writer for the analytics figures. Output is plain text
//! with fixed number formatting so repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

/// Fixed-width histogram bins anchored at zero: bin `i` covers `[i·w, (i+1)·w)`.
pub fn bin_counts(values: &[f64], width: f64) -> BTreeMap<i64, usize> {
    let mut bins = BTreeMap::new();
    for v in values.iter().filter(|v| v.is_finite()) {
        *bins.entry((v / width).floor() as i64).or_insert(0) += 1;
    }
    bins
}

/// Histogram of `values` with a red vertical reference line at `marker`.
pub fn histogram_svg(title: &str, x_label: &str, values: &[f64], bin_width: f64, marker: Option<f64>) -> String {
    let mut s = open(title);
    let bins = bin_counts(values, bin_width);
    let (plot_w, plot_h) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let lo_bin = bins.keys().next().copied().unwrap_or(0);
    let hi_bin = bins.keys().next_back().copied().unwrap_or(0);
    let mut x0 = lo_bin as f64 * bin_width;
    let mut x1 = (hi_bin + 1) as f64 * bin_width;
    if let Some(m) = marker.filter(|m| m.is_finite()) {
        x0 = x0.min(m - bin_width);
        x1 = x1.max(m + bin_width);
    }
    let max_count = bins.values().copied().max().unwrap_or(1).max(1) as f64;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |c: f64| TOP + plot_h - c / max_count * plot_h;

    for (&b, &c) in &bins {
        let (a, z) = (sx(b as f64 * bin_width), sx((b + 1) as f64 * bin_width));
        let _ = writeln!(
            s,
            r##"<rect x="{a:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4c72b0" stroke="white"/>"##,
            sy(c as f64),
            z - a,
            sy(0.0) - sy(c as f64)
        );
    }
    let base = sy(0.0);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="black"/>"#, W - RIGHT);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base:.2}" stroke="black"/>"#);
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * f64::from(i) / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.3}</text>"#, sx(x), base + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, TOP + 4.0, max_count);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#, LEFT - 6.0, base);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, H - 10.0, escape(x_label));
    if let Some(m) = marker.filter(|m| m.is_finite()) {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{base:.2}" stroke="red" stroke-width="2" stroke-dasharray="6 3"/>"#,
            sx(m)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One row of horizontal stacked bars per query skill, segments sized by the
/// fraction of neighbours from each dataset skill.
pub fn relevance_svg(title: &str, hist: &BTreeMap<String, BTreeMap<String, usize>>) -> String {
    const PALETTE: [&str; 8] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c"];
    let mut s = open(title);
    let skills: Vec<&String> = {
        let mut all: Vec<&String> = hist.values().flat_map(|r| r.keys()).collect();
        all.sort();
        all.dedup();
        all
    };
    let colour = |skill: &String| PALETTE[skills.iter().position(|s| *s == skill).unwrap_or(0) % PALETTE.len()];
    let label_w = 110.0;
    let plot_w = W - LEFT - RIGHT - label_w;
    let rows = hist.len().max(1) as f64;
    let row_h = ((H - TOP - BOTTOM) / rows).min(40.0);
    for (i, (query_skill, row)) in hist.iter().enumerate() {
        let y = TOP + i as f64 * row_h;
        let total: usize = row.values().sum();
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT + label_w - 6.0,
            y + row_h * 0.6,
            escape(query_skill)
        );
        let mut x = LEFT + label_w;
        for (skill, &count) in row {
            let w = if total == 0 { 0.0 } else { count as f64 / total as f64 * plot_w };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{}"><title>{}: {count}</title></rect>"#,
                y + 2.0,
                row_h - 4.0,
                colour(skill),
                escape(skill)
            );
            x += w;
        }
    }
    for (i, skill) in skills.iter().enumerate() {
        let x = LEFT + i as f64 * 100.0;
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#, H - 22.0, colour(skill));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 14.0, H - 13.0, escape(skill));
    }
    s.push_str("</svg>\n");
    s
}
