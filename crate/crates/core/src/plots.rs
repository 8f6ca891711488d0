//! Static SVG charts for the reports: grouped bar charts and annotated
//! heatmaps. Output is plain text with fixed number formatting, so identical
//! inputs give identical files.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Grouped bars: one group per entry of `groups`, one bar per series.
/// Values are drawn on a `[0, y_max]` axis and clipped to it.
pub fn bar_chart(title: &str, groups: &[String], series: &[(String, Vec<f64>)], y_max: f64) -> String {
    let (left, top, plot_h) = (60.0, 40.0, 260.0);
    let bar_w = 14.0;
    let group_w = bar_w * series.len().max(1) as f64 + 16.0;
    let plot_w = group_w * groups.len().max(1) as f64;
    let width = left + plot_w + 150.0;
    let height = top + plot_h + 90.0;
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="14">{}</text>"#, escape(title));
    for t in 0..=4 {
        let v = y_max * t as f64 / 4.0;
        let y = top + plot_h - plot_h * t as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            left + plot_w,
            left - 6.0,
            y + 4.0
        );
    }
    for (g, name) in groups.iter().enumerate() {
        let gx = left + g as f64 * group_w + 8.0;
        for (k, (_, values)) in series.iter().enumerate() {
            let v = values.get(g).copied().unwrap_or(0.0).clamp(0.0, y_max);
            let h = plot_h * v / y_max;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{bar_w}" height="{h:.1}" fill="{}"/>"#,
                gx + k as f64 * bar_w,
                top + plot_h - h,
                PALETTE[k % PALETTE.len()]
            );
        }
        let cx = gx + bar_w * series.len() as f64 / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="end" transform="rotate(-40 {cx:.1} {:.1})">{}</text>"#,
            top + plot_h + 14.0,
            top + plot_h + 14.0,
            escape(name)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    for (k, (name, _)) in series.iter().enumerate() {
        let y = top + 10.0 + 18.0 * k as f64;
        let x = left + plot_w + 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{y:.1}">{}</text>"#,
            y - 9.0,
            PALETTE[k % PALETTE.len()],
            x + 14.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Annotated heatmap, shaded from white (0) to blue (`max`).
pub fn heatmap(title: &str, rows: &[String], cols: &[String], values: &[Vec<f64>], max: f64) -> String {
    let (left, top, cell_w, cell_h) = (110.0, 50.0, 70.0, 24.0);
    let width = left + cell_w * cols.len() as f64 + 20.0;
    let height = top + cell_h * rows.len() as f64 + 20.0;
    let max = if max > 0.0 { max } else { 1.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    for (j, c) in cols.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            left + cell_w * (j as f64 + 0.5),
            top - 6.0,
            escape(c)
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let y = top + cell_h * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + cell_h / 2.0 + 4.0,
            escape(r)
        );
        for j in 0..cols.len() {
            let v = values.get(i).and_then(|row| row.get(j)).copied().unwrap_or(0.0);
            let t = (v / max).clamp(0.0, 1.0);
            let shade = |full: f64| (255.0 - (255.0 - full) * t).round() as u8;
            let _ = writeln!(
                s,
                r##"<rect x="{:.1}" y="{y:.1}" width="{cell_w}" height="{cell_h}" fill="#{:02x}{:02x}{:02x}" stroke="#fff"/><text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"##,
                left + cell_w * j as f64,
                shade(33.0),
                shade(102.0),
                shade(172.0),
                left + cell_w * (j as f64 + 0.5),
                y + cell_h / 2.0 + 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_are_proportional() {
        let svg = bar_chart("F1", &["Color".into()], &[("A".into(), vec![0.5]), ("C".into(), vec![1.0])], 1.0);
        assert!(svg.contains(r#"height="130.0""#));
        assert!(svg.contains(r#"height="260.0""#));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = heatmap("a<b", &["x&y".into()], &["A".into()], &[vec![0.5]], 1.0);
        assert!(svg.contains("a&lt;b") && svg.contains("x&amp;y"));
        assert!(svg.contains("0.50"));
    }
}
