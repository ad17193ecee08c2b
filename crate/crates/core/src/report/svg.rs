//! Minimal SVG 1.1 line/band plotting.

use std::fmt::Write as _;

/// Categorical palette, assigned by feature index.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// A polyline; `None` entries break the line into separate segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub color: String,
    pub points: Vec<Option<(f64, f64)>>,
    pub dashed: bool,
}

/// A filled region between `lower` and `upper`, sampled at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub color: String,
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// A line chart ready to render.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotDocument {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

impl PlotDocument {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        PlotDocument {
            title: title.to_owned(),
            x_label: x_label.to_owned(),
            y_label: y_label.to_owned(),
            width: 720.0,
            height: 440.0,
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            series: Vec::new(),
            bands: Vec::new(),
        }
    }

    /// Finite data values across all series and bands.
    fn data(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let s = self.series.iter().flat_map(|s| s.points.iter().flatten().copied());
        let b = self.bands.iter().flat_map(|b| {
            b.x.iter()
                .zip(&b.lower)
                .chain(b.x.iter().zip(&b.upper))
                .map(|(&x, &y)| (x, y))
        });
        s.chain(b).filter(|(x, y)| x.is_finite() && y.is_finite())
    }

    /// Sets both axis ranges to cover the data, with a small y margin.
    pub fn fit_ranges(&mut self) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in self.data() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return;
        }
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let pad = ((y1 - y0) * 0.05).max(1e-3);
        self.x_range = (x0, x1);
        self.y_range = (y0 - pad, y1 + pad);
    }

    /// Widens the ranges, if needed, so every data point is inside.
    pub fn cover_data(&mut self) {
        for (x, y) in self.data().collect::<Vec<_>>() {
            self.x_range = (self.x_range.0.min(x), self.x_range.1.max(x));
            self.y_range = (self.y_range.0.min(y), self.y_range.1.max(y));
        }
    }

    fn px(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        let w = self.width - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + if b > a { (x - a) / (b - a) * w } else { w / 2.0 }
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        let h = self.height - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + h - if b > a { (y - a) / (b - a) * h } else { h / 2.0 }
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        open(&mut s, self.width, self.height);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            self.width / 2.0,
            escape(&self.title)
        );
        self.axes(&mut s);

        for band in &self.bands {
            let mut pts: Vec<String> = Vec::new();
            for (k, &x) in band.x.iter().enumerate() {
                if band.upper[k].is_finite() {
                    pts.push(format!("{:.2},{:.2}", self.px(x), self.py(band.upper[k])));
                }
            }
            for (k, &x) in band.x.iter().enumerate().rev() {
                if band.lower[k].is_finite() {
                    pts.push(format!("{:.2},{:.2}", self.px(x), self.py(band.lower[k])));
                }
            }
            if !pts.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{}" fill-opacity="0.25" stroke="none"/>"#,
                    pts.join(" "),
                    band.color
                );
            }
        }

        for series in &self.series {
            let dash = if series.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            for segment in series.points.split(Option::is_none) {
                let pts: Vec<String> = segment
                    .iter()
                    .flatten()
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
                    .collect();
                match pts.len() {
                    0 => {}
                    1 => {
                        let (x, y) = pts[0].split_once(',').expect("coordinate pair");
                        let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#, series.color);
                    }
                    _ => {
                        let _ = writeln!(
                            s,
                            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                            pts.join(" "),
                            series.color
                        );
                    }
                }
            }
        }

        for (k, series) in self.series.iter().enumerate() {
            let x = self.width - MARGIN_RIGHT + 15.0;
            let y = MARGIN_TOP + 10.0 + 18.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/>"#,
                x + 18.0,
                series.color
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                x + 24.0,
                y + 4.0,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    fn axes(&self, s: &mut String) {
        let (x0, x1) = (MARGIN_LEFT, self.width - MARGIN_RIGHT);
        let (y0, y1) = (self.height - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            x1 - x0,
            y0 - y1
        );
        for k in 0..=5 {
            let t = k as f64 / 5.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                s,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="10">{xv:.2}</text>"#,
                y0 + 14.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{yv:.2}</text>"#,
                x0 - 6.0,
                py + 3.0
            );
            let _ = writeln!(
                s,
                r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#ddd"/>"##
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            (x0 + x1) / 2.0,
            self.height - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
    }
}

pub(crate) fn open(s: &mut String, width: f64, height: f64) {
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
}
