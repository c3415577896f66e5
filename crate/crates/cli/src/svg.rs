//! Minimal self-contained SVG scatter figures.
//!
//! Fixed 640x480 canvas, framed plotting area, corner tick labels. Every
//! coordinate passes through the shared six-digit formatter, so reruns
//! that compute bitwise-equal numbers write byte-identical files.

use crate::numfmt::fmt_sig;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;

/// Affine map from data coordinates to the framed pixel area.
pub struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    /// Smallest frame covering the points, padded by five percent per
    /// side; an axis with zero extent widens to a unit interval.
    pub fn around(points: impl IntoIterator<Item = [f64; 2]>) -> Frame {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for [x, y] in points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if !(xmin.is_finite() && ymin.is_finite()) {
            (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: &mut f64, hi: &mut f64| {
            let span = *hi - *lo;
            if span == 0.0 {
                *lo -= 1.0;
                *hi += 1.0;
            } else {
                *lo -= 0.05 * span;
                *hi += 0.05 * span;
            }
        };
        pad(&mut xmin, &mut xmax);
        pad(&mut ymin, &mut ymax);
        Frame {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.xmin) / (self.xmax - self.xmin) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.ymin) / (self.ymax - self.ymin) * (HEIGHT - TOP - BOTTOM)
    }
}

/// One figure under construction; \[`finish`\](Figure::finish) closes it.
pub struct Figure {
    frame: Frame,
    body: String,
}

impl Figure {
    pub fn new(frame: Frame, title: &str, xlabel: &str, ylabel: &str) -> Figure {
        let mut body = String::new();
        let _ = write!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\" font-size=\"12\">\n"
        );
        let _ = writeln!(
            body,
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
        );
        let _ = writeln!(
            body,
            "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>",
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        let _ = writeln!(
            body,
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>",
            WIDTH / 2.0
        );
        let _ = writeln!(
            body,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>",
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            body,
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{ylabel}</text>",
            (TOP + HEIGHT - BOTTOM) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0
        );
        // corner tick labels, enough to read the figure's scale
        let ticks = [
            (LEFT, HEIGHT - BOTTOM + 18.0, "middle", frame.xmin),
            (WIDTH - RIGHT, HEIGHT - BOTTOM + 18.0, "middle", frame.xmax),
            (LEFT - 6.0, HEIGHT - BOTTOM + 4.0, "end", frame.ymin),
            (LEFT - 6.0, TOP + 4.0, "end", frame.ymax),
        ];
        for (x, y, anchor, value) in ticks {
            let _ = writeln!(
                body,
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\" font-size=\"10\">{}</text>",
                fmt_sig(value)
            );
        }
        Figure { frame, body }
    }

    pub fn dot(&mut self, p: [f64; 2], radius: f64, fill: &str, opacity: f64) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{radius}\" fill=\"{fill}\" fill-opacity=\"{opacity}\"/>",
            fmt_sig(self.frame.px(p[0])),
            fmt_sig(self.frame.py(p[1]))
        );
    }

    pub fn ring(&mut self, p: [f64; 2], radius: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{radius}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"/>",
            fmt_sig(self.frame.px(p[0])),
            fmt_sig(self.frame.py(p[1]))
        );
    }

    pub fn cross(&mut self, p: [f64; 2], half: f64, stroke: &str) {
        let cx = self.frame.px(p[0]);
        let cy = self.frame.py(p[1]);
        for (x1, y1, x2, y2) in [
            (cx - half, cy, cx + half, cy),
            (cx, cy - half, cx, cy + half),
        ] {
            let _ = writeln!(
                self.body,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"2\"/>",
                fmt_sig(x1),
                fmt_sig(y1),
                fmt_sig(x2),
                fmt_sig(y2)
            );
        }
    }

    pub fn path(&mut self, points: &[[f64; 2]], closed: bool, stroke: &str) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{} {}",
                if i == 0 { "M" } else { " L" },
                fmt_sig(self.frame.px(p[0])),
                fmt_sig(self.frame.py(p[1]))
            );
        }
        if closed {
            d.push_str(" Z");
        }
        let _ = writeln!(
            self.body,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>"
        );
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}
