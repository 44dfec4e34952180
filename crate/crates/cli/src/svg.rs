//! Minimal static SVG rendering of dendrograms and labeled planar levels.

use std::collections::HashMap;
use std::fmt::Write;

use thc::labeling::LabeledPoint;
use thc::ultrametric::{Dendrogram, Node};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Leaves along the bottom in merge order, merges drawn as brackets at their
/// heights, and an optional dashed cut line.
pub fn dendrogram(d: &Dendrogram, cut: Option<f64>) -> String {
    let (width, height, pad) = (640.0, 400.0, 40.0);
    let order = leaf_order(d);
    let slot = (width - 2.0 * pad) / order.len().max(1) as f64;
    let x_of: HashMap<&str, f64> = order
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), pad + slot * (i as f64 + 0.5)))
        .collect();
    let top = d
        .merges()
        .last()
        .map_or(1.0, |m| m.height)
        .max(cut.unwrap_or(0.0))
        .max(f64::MIN_POSITIVE);
    let y = |h: f64| height - pad - (height - 2.0 * pad) * h / top;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    let mut pos: Vec<(f64, f64)> = Vec::with_capacity(d.merges().len());
    let at = |n: &Node, pos: &[(f64, f64)]| match n {
        Node::Leaf(l) => (x_of[l.as_str()], y(0.0)),
        Node::Merge(i) => pos[*i],
    };
    for m in d.merges() {
        let (a, b) = (at(&m.left, &pos), at(&m.right, &pos));
        let h = y(m.height);
        writeln!(
            out,
            r#"<path d="M{:.1},{:.1} V{h:.1} H{:.1} V{:.1}" fill="none" stroke="black"/>"#,
            a.0, a.1, b.0, b.1
        )
        .unwrap();
        pos.push(((a.0 + b.0) / 2.0, h));
    }
    for l in &order {
        let x = x_of[l.as_str()];
        writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            height - pad + 14.0,
            escape(l)
        )
        .unwrap();
    }
    if let Some(r) = cut {
        writeln!(
            out,
            r#"<line x1="{pad}" x2="{}" y1="{:.1}" y2="{:.1}" stroke="red" stroke-dasharray="6,4"/>"#,
            width - pad,
            y(r),
            y(r)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn leaf_order(d: &Dendrogram) -> Vec<String> {
    fn walk(d: &Dendrogram, n: &Node, out: &mut Vec<String>) {
        match n {
            Node::Leaf(l) => out.push(l.clone()),
            Node::Merge(i) => {
                walk(d, &d.merges()[*i].left, out);
                walk(d, &d.merges()[*i].right, out);
            }
        }
    }
    let mut out = Vec::with_capacity(d.leaves().len());
    match d.merges().len() {
        0 => out.extend(d.leaves().iter().cloned()),
        k => walk(d, &Node::Merge(k - 1), &mut out),
    }
    out
}

/// Planar points coloured by their smallest label, one panel per level.
pub fn labeled_levels(levels: &[Vec<LabeledPoint>], coords: &HashMap<String, (f64, f64)>) -> String {
    let (panel, pad) = (240.0, 12.0);
    let pts = coords.values();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &(x, y) in pts {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(f64::MIN_POSITIVE);
    let scale = (panel - 2.0 * pad) / span;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        panel * levels.len() as f64,
        panel + 16.0
    )
    .unwrap();
    for (i, level) in levels.iter().enumerate() {
        let ox = panel * i as f64;
        writeln!(
            out,
            r#"<rect x="{ox}" y="0" width="{panel}" height="{panel}" fill="none" stroke="gray"/><text x="{}" y="{}">level {i}</text>"#,
            ox + 4.0,
            panel + 12.0
        )
        .unwrap();
        for lp in level {
            let Some(&(x, y)) = coords.get(&lp.point) else { continue };
            let label = lp.labels.iter().min().copied().unwrap_or(0);
            writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"><title>{} {:?}</title></circle>"#,
                ox + pad + (x - lo.0) * scale,
                panel - pad - (y - lo.1) * scale,
                PALETTE[label as usize % PALETTE.len()],
                escape(&lp.point),
                lp.labels
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
