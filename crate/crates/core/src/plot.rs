//! Static SVG overlay: TIC trace, shaded ROI spans, optional `pv` trace.
//!
//! Coordinates are printed with two decimals so identical results always
//! render to identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::pipeline::FrmvResult;

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotStyle {
    pub width_px: u32,
    pub height_px: u32,
    pub roi_shade: bool,
    pub show_pv: bool,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            width_px: 1200,
            height_px: 400,
            roi_shade: true,
            show_pv: false,
        }
    }
}

impl PlotStyle {
    pub fn validate(&self) -> Result<()> {
        if self.width_px < 100 || self.height_px < 100 {
            return Err(Error::Config(format!(
                "plot must be at least 100x100 px, got {}x{}",
                self.width_px, self.height_px
            )));
        }
        Ok(())
    }
}

/// Maps acquisition index and intensity to pixel coordinates.
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    n: usize,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    /// `index` is 1-based and may be fractional.
    fn x(&self, index: f64) -> f64 {
        if self.n <= 1 {
            return self.left;
        }
        let t = ((index - 1.0) / (self.n - 1) as f64).clamp(0.0, 1.0);
        self.left + t * self.width
    }

    fn y(&self, v: f64) -> f64 {
        let t = (v - self.y_min) / (self.y_max - self.y_min);
        self.top + (1.0 - t) * self.height
    }
}

/// Render the overlay as an SVG 1.1 document.
pub fn render_svg(result: &FrmvResult, style: &PlotStyle) -> Result<String> {
    style.validate()?;
    let n = result.n_acquisitions();
    if n == 0 {
        return Err(Error::Config("cannot plot an empty result".into()));
    }
    let (w, h) = (f64::from(style.width_px), f64::from(style.height_px));
    let y_max_data = result.tic.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_min = result.tic.iter().copied().fold(0.0, f64::min);
    let y_max = if y_max_data > y_min { y_max_data } else { y_min + 1.0 };
    let frame = Frame {
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        width: w - MARGIN_LEFT - MARGIN_RIGHT,
        height: h - MARGIN_TOP - MARGIN_BOTTOM,
        n,
        y_min,
        y_max,
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width_px, style.height_px, style.width_px, style.height_px
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white"/>"#);

    if style.roi_shade {
        let _ = writeln!(svg, r##"<g id="rois" fill="#b0b0b0" fill-opacity="0.5" stroke="none">"##);
        for roi in &result.rois {
            let (a, b) = if roi.start_index == roi.end_index {
                (roi.start_index as f64 - 0.5, roi.end_index as f64 + 0.5)
            } else {
                (roi.start_index as f64, roi.end_index as f64)
            };
            let x0 = frame.x(a);
            let x1 = frame.x(b);
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                x0,
                frame.top,
                x1 - x0,
                frame.height
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    // axes
    let bottom = frame.top + frame.height;
    let right = frame.left + frame.width;
    let _ = writeln!(
        svg,
        r#"<path id="axes" d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
        frame.left, frame.top, frame.left, bottom, right, bottom
    );
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    for k in 0..=4 {
        let idx = 1.0 + (n - 1) as f64 * f64::from(k) / 4.0;
        let label = idx.round() as usize;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.x(idx),
            bottom + 15.0,
            label
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">acquisition</text>"#,
        frame.left + frame.width / 2.0,
        bottom + 32.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3e}</text>"#,
        frame.left - 5.0,
        frame.top + 4.0,
        y_max
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3e}</text>"#,
        frame.left - 5.0,
        bottom,
        y_min
    );
    let _ = writeln!(svg, "</g>");

    let _ = write!(svg, r#"<polyline id="tic" fill="none" stroke="black" stroke-width="1" points=""#);
    for (i, &v) in result.tic.iter().enumerate() {
        if i > 0 {
            svg.push(' ');
        }
        let _ = write!(svg, "{:.2},{:.2}", frame.x((i + 1) as f64), frame.y(v));
    }
    let _ = writeln!(svg, r#""/>"#);

    if style.show_pv {
        // pv in [0, 1] is drawn against [0, max TIC]
        let _ = write!(
            svg,
            r##"<polyline id="pv" fill="none" stroke="#1f77b4" stroke-width="1" stroke-dasharray="4,3" points=""##
        );
        for (i, &p) in result.pv.iter().enumerate() {
            if i > 0 {
                svg.push(' ');
            }
            let _ = write!(svg, "{:.2},{:.2}", frame.x((i + 1) as f64), frame.y(p * y_max_data.max(0.0)));
        }
        let _ = writeln!(svg, r#""/>"#);
        let cut = frame.y(result.config.cutoff * y_max_data.max(0.0));
        let _ = writeln!(
            svg,
            r##"<line id="cutoff" x1="{:.2}" y1="{cut:.2}" x2="{:.2}" y2="{cut:.2}" stroke="#1f77b4" stroke-width="1"/>"##,
            frame.left, right
        );
    }

    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

pub fn render_plot(result: &FrmvResult, style: &PlotStyle, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(result, style)?;
    atomic_write(path, svg.as_bytes())
}
