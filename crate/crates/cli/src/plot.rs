//! Static SVG scatter of labeled points.
//!
//! Points are drawn in their first two coordinates (the first image for
//! correspondences). Line and circle modes are overlaid; a line is drawn
//! across the extent of its inliers.

use std::io::Write;

use msh_core::{DataPoint, FittingResult, ModelParams};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"];

fn color(label: usize) -> &'static str {
    if label == 0 {
        "#c8c8c8"
    } else {
        PALETTE[(label - 1) % PALETTE.len()]
    }
}

struct Frame {
    lo: [f64; 2],
    span: f64,
}

impl Frame {
    fn fit(points: &[DataPoint]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p.coords()[a]);
                hi[a] = hi[a].max(p.coords()[a]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::EPSILON);
        Frame { lo, span }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let s = (SIZE - 2.0 * MARGIN) / self.span;
        (MARGIN + (x - self.lo[0]) * s, SIZE - MARGIN - (y - self.lo[1]) * s)
    }

    fn length(&self, d: f64) -> f64 {
        d * (SIZE - 2.0 * MARGIN) / self.span
    }
}

/// Point on the line and unit direction, in the plotted plane.
fn line_axis(params: &ModelParams) -> Option<([f64; 2], [f64; 2])> {
    match params {
        ModelParams::Line2D { a, b, c } => Some(([-a * c, -b * c], [-*b, *a])),
        ModelParams::Line3D { point, direction } => {
            let n = direction.x.hypot(direction.y);
            (n > 1e-9).then(|| ([point.x, point.y], [direction.x / n, direction.y / n]))
        }
        _ => None,
    }
}

pub fn write_svg<W: Write>(points: &[DataPoint], result: &FittingResult, mut out: W) -> std::io::Result<()> {
    let frame = Frame::fit(points);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;

    // Outliers first so structures stay on top.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| result.labels[i] != 0);
    for i in order {
        let c = points[i].coords();
        let (x, y) = frame.map(c[0], c[1]);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.2" fill="{}"/>"#, color(result.labels[i]))?;
    }

    for (m, mode) in result.modes.iter().enumerate() {
        let label = m + 1;
        let stroke = color(label);
        if let ModelParams::Circle2D { cx, cy, r } = mode.params {
            let (x, y) = frame.map(cx, cy);
            writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
                frame.length(r)
            )?;
        } else if let Some((origin, dir)) = line_axis(&mode.params) {
            let ts = points.iter().zip(&result.labels).filter(|(_, &l)| l == label).map(|(p, _)| {
                let c = p.coords();
                (c[0] - origin[0]) * dir[0] + (c[1] - origin[1]) * dir[1]
            });
            let (t0, t1) = ts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
            if t0 < t1 {
                let (x0, y0) = frame.map(origin[0] + t0 * dir[0], origin[1] + t0 * dir[1]);
                let (x1, y1) = frame.map(origin[0] + t1 * dir[0], origin[1] + t1 * dir[1]);
                writeln!(
                    out,
                    r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="{stroke}" stroke-width="1.5"/>"#
                )?;
            }
        }
    }
    writeln!(out, "</svg>")
}
