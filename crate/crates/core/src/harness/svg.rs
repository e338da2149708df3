//! Grouped-bar charts as plain SVG text. Every bar carries its value as a
//! text label so the numbers can be read back from the file.

use std::fmt::Write as _;

use crate::morph::ChartData;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

pub fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders proportions in [0, 1] as a grouped bar chart: one group per
/// category, one bar per series. Undefined series are drawn hollow and
/// labelled `n/a`.
pub fn grouped_bar_chart(chart: &ChartData) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let groups = chart.categories.len().max(1) as f64;
    let group_w = plot_w / groups;
    let bars = chart.series.len().max(1) as f64;
    let bar_w = group_w * 0.8 / bars;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape_xml(&chart.title));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape_xml(&chart.title)
    );

    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }

    for (ci, category) in chart.categories.iter().enumerate() {
        let gx = MARGIN_LEFT + group_w * ci as f64 + group_w * 0.1;
        for (si, series) in chart.series.iter().enumerate() {
            let colour = PALETTE[si % PALETTE.len()];
            let v = series.values.get(ci).copied().unwrap_or(0.0);
            let x = gx + bar_w * si as f64;
            let y = y_of(v);
            let h = MARGIN_TOP + plot_h - y;
            let (fill, label) = if series.defined {
                (colour.to_string(), format!("{v:.3}"))
            } else {
                ("none".to_string(), "n/a".to_string())
            };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{h:.1}" fill="{fill}" stroke="{colour}" data-series="{}" data-category="{}" data-value="{label}"/>"#,
                bar_w * 0.9,
                escape_xml(&series.name),
                escape_xml(category)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="9">{label}</text>"#,
                x + bar_w * 0.45,
                y - 3.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + group_w * (ci as f64 + 0.5),
            HEIGHT - MARGIN_BOTTOM + 18.0,
            escape_xml(category)
        );
    }

    let lx = WIDTH - MARGIN_RIGHT + 16.0;
    for (si, series) in chart.series.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{y:.1}" width="10" height="10" fill="{}"/>"#,
            PALETTE[si % PALETTE.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 14.0,
            y + 9.0,
            escape_xml(&series.name)
        );
    }
    s.push_str("</svg>\n");
    s
}
