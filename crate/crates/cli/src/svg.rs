//! Minimal SVG writer with a fixed 800×800 view box.

use std::fmt::Write;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

const STYLE: &str = "\
.a { stroke: #c0392b; fill: none; stroke-width: 2.5; }
.a-pos { stroke: #c0392b; fill: #c0392b; }
.a-neg { stroke: #c0392b; fill: #ffffff; stroke-width: 2; }
.b { stroke: #2471a3; fill: none; stroke-width: 2; stroke-dasharray: 6 3; }
.b-fill { stroke: #2471a3; fill: #2471a3; fill-opacity: 0.25; stroke-width: 0.5; }
.t-pos { stroke: #222222; fill: #222222; }
.t-neg { stroke: #222222; fill: #ffffff; stroke-width: 1.5; }
.t { stroke: #222222; fill: none; stroke-width: 1; }
.data { stroke: #000000; fill: #f1c40f; stroke-width: 1.5; }
.tangent { stroke: #000000; stroke-width: 1.5; }
.sample { stroke: none; fill: #2471a3; fill-opacity: 0.5; }
.walk { stroke: #c0392b; fill: none; stroke-width: 1.5; }";

/// Maps data coordinates `(x, y)` to `(sx·x + tx, sy·y + ty)` with `sy < 0`.
pub struct Canvas {
    sx: f64,
    tx: f64,
    sy: f64,
    ty: f64,
    body: String,
}

impl Canvas {
    /// Fits the bounding box of `points` into the view box, keeping aspect.
    pub fn fit<I: IntoIterator<Item = [f64; 2]>>(points: I) -> Canvas {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for i in 0..2 {
                if p[i].is_finite() {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
        }
        if lo[0] > hi[0] {
            lo = [-1.0; 2];
            hi = [1.0; 2];
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let s = (SIZE - 2.0 * MARGIN) / extent;
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        Canvas {
            sx: s,
            tx: SIZE / 2.0 - s * mid[0],
            sy: -s,
            ty: SIZE / 2.0 + s * mid[1],
            body: String::new(),
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (self.sx * p[0] + self.tx, self.sy * p[1] + self.ty)
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], class: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#
        );
    }

    pub fn circle(&mut self, p: [f64; 2], r: f64, class: &str) {
        let (cx, cy) = self.map(p);
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{cx:.3}" cy="{cy:.3}" r="{r:.2}"/>"#
        );
    }

    fn points_attr(&self, pts: &[[f64; 2]]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], class: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(self.body, r#"<polyline class="{class}" points="{attr}"/>"#);
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], class: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(self.body, r#"<polygon class="{class}" points="{attr}"/>"#);
    }

    pub fn finish(self, title: &str) -> String {
        let title = title
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <!-- data-to-view transform: u = {:.9} * x + {:.9}, v = {:.9} * y + {:.9} -->\n\
             <title>{title}</title>\n\
             <style>\n{STYLE}\n</style>\n\
             <rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"#ffffff\"/>\n\
             {}</svg>\n",
            self.sx, self.tx, self.sy, self.ty, self.body
        )
    }
}

/// First two coordinates, padding with zeros.
pub fn planar(x: &[f64]) -> [f64; 2] {
    [
        x.first().copied().unwrap_or(0.0),
        x.get(1).copied().unwrap_or(0.0),
    ]
}
