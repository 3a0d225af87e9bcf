//! Static stacked-bar chart of report proportions.

use std::collections::BTreeMap;
use std::fmt::Write;

use coach_stats::Proportions;

const BAR_W: f64 = 48.0;
const GAP: f64 = 16.0;
const PLOT_H: f64 = 240.0;
const TOP: f64 = 30.0;
const LEFT: f64 = 40.0;

/// One bar per group, stacked success / failure / absent from the bottom.
pub fn proportions_chart(title: &str, groups: &BTreeMap<String, Proportions>) -> String {
    let width = LEFT + groups.len() as f64 * (BAR_W + GAP) + GAP;
    let height = TOP + PLOT_H + 110.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18" font-size="14">{}</text>"#, escape(title));
    let base = TOP + PLOT_H;
    let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{base}" x2="{width}" y2="{base}" stroke="#333"/>"##);
    for (i, (label, p)) in groups.iter().enumerate() {
        let x = LEFT + GAP + i as f64 * (BAR_W + GAP);
        let mut y = base;
        for (share, color, name) in [(p.success, "#3a7d44", "success"), (p.failure, "#c8553d", "failure"), (p.absent, "#b0b0b0", "absent")] {
            let h = share * PLOT_H;
            y -= h;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{BAR_W}" height="{h:.1}" fill="{color}"><title>{} {name}: {share:.3}</title></rect>"#,
                escape(label)
            );
        }
        let cx = x + BAR_W / 2.0;
        let ly = base + 12.0;
        let _ = writeln!(s, r#"<text x="{cx:.1}" y="{ly}" transform="rotate(45 {cx:.1} {ly})">{} (n={})</text>"#, escape(label), p.n);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
