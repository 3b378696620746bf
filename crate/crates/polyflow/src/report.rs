//! Plain-text and SVG report writers. Everything here is deterministic:
//! identical inputs produce byte-identical output bodies.

use crate::geometry::Manifold;
use crate::num::Scalar;
use crate::stats::CoverageReport;
use crate::tracer::Trace;
use std::fmt::Write as _;

const SCALE: f64 = 120.0;
const PAD: f64 = 12.0;

struct Bounds {
    min: [i64; 2],
    max: [i64; 2],
}

fn bounds(m: &Manifold) -> Bounds {
    let mut min = [i64::MAX; 2];
    let mut max = [i64::MIN; 2];
    for c in m.cells() {
        let [i, j, _] = c.coords();
        min[0] = min[0].min(i);
        min[1] = min[1].min(j);
        max[0] = max[0].max(i + 1);
        max[1] = max[1].max(j + 1);
    }
    Bounds { min, max }
}

/// Map ambient (x, y) to SVG viewport coordinates (y axis flipped).
fn to_view(b: &Bounds, x: f64, y: f64) -> (f64, f64) {
    (
        PAD + (x - b.min[0] as f64) * SCALE,
        PAD + (b.max[1] as f64 - y) * SCALE,
    )
}

fn svg_open(b: &Bounds) -> String {
    let w = (b.max[0] - b.min[0]) as f64 * SCALE + 2.0 * PAD;
    let h = (b.max[1] - b.min[1]) as f64 * SCALE + 2.0 * PAD;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n"
    )
}

fn cell_outlines(m: &Manifold, b: &Bounds, out: &mut String) {
    for c in m.cells() {
        let [i, j, _] = c.coords();
        let (x, y) = to_view(b, i as f64, (j + 1) as f64);
        let _ = writeln!(
            out,
            "  <rect x=\"{x}\" y=\"{y}\" width=\"{SCALE}\" height=\"{SCALE}\" \
             fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>"
        );
    }
}

/// Polyline rendering of a 2-dimensional trace over the cell layout.
pub fn svg_trace_2d<S: Scalar>(m: &Manifold, tr: &Trace<S>) -> String {
    assert_eq!(m.dim, 2, "SVG trace export is for surfaces");
    let b = bounds(m);
    let mut out = svg_open(&b);
    cell_outlines(m, &b, &mut out);
    for seg in &tr.segments {
        let [i, j, _] = seg.cell.coords();
        let (x0, y0) = to_view(
            &b,
            i as f64 + seg.enter[0].as_f64(),
            j as f64 + seg.enter[1].as_f64(),
        );
        let (x1, y1) = to_view(
            &b,
            i as f64 + seg.exit[0].as_f64(),
            j as f64 + seg.exit[1].as_f64(),
        );
        let _ = writeln!(
            out,
            "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y1}\" \
             stroke=\"#c33\" stroke-width=\"1.2\"/>"
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Five-stop blue-to-red ramp for first-visit times.
fn ramp(t: f64) -> String {
    let stops = [
        (0x2c, 0x7b, 0xb6),
        (0xab, 0xd9, 0xe9),
        (0xff, 0xff, 0xbf),
        (0xfd, 0xae, 0x61),
        (0xd7, 0x19, 0x1c),
    ];
    let x = (t.clamp(0.0, 1.0)) * (stops.len() - 1) as f64;
    let i = (x.floor() as usize).min(stops.len() - 2);
    let f = x - i as f64;
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (r, g, bl) = (
        mix(stops[i].0, stops[i + 1].0),
        mix(stops[i].1, stops[i + 1].1),
        mix(stops[i].2, stops[i + 1].2),
    );
    format!("#{r:02x}{g:02x}{bl:02x}")
}

/// Heatmap of first-visit times for a 2-dimensional coverage report;
/// unvisited subcells stay dark.
pub fn svg_heatmap_2d(m: &Manifold, report: &CoverageReport) -> String {
    assert_eq!(m.dim, 2, "heatmap export is for surfaces");
    let b = bounds(m);
    let n = report.grid_n;
    let sub = SCALE / n as f64;
    let t_max = report
        .first_visits
        .values()
        .fold(0.0f64, |acc, t| acc.max(*t))
        .max(f64::MIN_POSITIVE);
    let mut out = svg_open(&b);
    for cell in m.cells() {
        let [i, j, _] = cell.coords();
        for gx in 0..n {
            for gy in 0..n {
                let colour = report
                    .first_visits
                    .get(&(*cell, [gx, gy, 0]))
                    .map(|t| ramp(t / t_max))
                    .unwrap_or_else(|| "#222".to_string());
                let (x, y) = to_view(
                    &b,
                    i as f64 + gx as f64 / n as f64,
                    j as f64 + (gy + 1) as f64 / n as f64,
                );
                let _ = writeln!(
                    out,
                    "  <rect x=\"{x}\" y=\"{y}\" width=\"{sub}\" height=\"{sub}\" \
                     fill=\"{colour}\"/>"
                );
            }
        }
    }
    cell_outlines(m, &b, &mut out);
    out.push_str("</svg>\n");
    out
}
