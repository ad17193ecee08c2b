//! Charts and tables for attributions and curves. Everything renders to SVG
//! or CSV text; writing files is left to the caller.

pub mod csv;
pub mod svg;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::shapley::{Attribution, CurveAttribution};
use crate::uncertainty::{BandedSeries, McAttribution};

pub use svg::{color, Band, PlotDocument, Series, PALETTE};

/// Tolerance of the waterfall identity `baseline + sum(bars) == total`.
pub const WATERFALL_TOLERANCE: f64 = 1e-9;

/// Below this magnitude a grid point's total contribution is treated as zero.
pub const RELATIVE_GAP: f64 = 1e-9;

/// A waterfall chart: the baseline, one signed step per feature, the total.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfallSpec {
    pub baseline_label: String,
    pub baseline: f64,
    /// (feature, contribution), by decreasing absolute contribution.
    pub bars: Vec<(String, f64)>,
    pub total_label: String,
    pub total: f64,
}

impl WaterfallSpec {
    pub fn check(&self) -> Result<()> {
        let sum: f64 = self.baseline + self.bars.iter().map(|b| b.1).sum::<f64>();
        if !(sum - self.total).abs().le(&WATERFALL_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "waterfall does not add up: {} + bars = {sum}, total {}",
                self.baseline, self.total
            )));
        }
        Ok(())
    }
}

pub fn waterfall(attr: &Attribution) -> WaterfallSpec {
    let label = attr.game.map_or_else(|| "metric".to_owned(), |g| g.target.label());
    WaterfallSpec {
        baseline_label: "random".to_owned(),
        baseline: attr.baseline,
        bars: attr.ranked().into_iter().map(|(n, v)| (n.to_owned(), v)).collect(),
        total_label: label,
        total: attr.total,
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

fn signed_pct(v: f64) -> String {
    format!("{:+.2}%", v * 100.0)
}

/// Horizontal waterfall chart. Fails if the bars do not add up.
pub fn render_waterfall(w: &WaterfallSpec, title: &str) -> Result<String> {
    w.check()?;
    let rows = w.bars.len() + 2;
    let (left, right, top, row_h) = (130.0, 110.0, 50.0, 28.0);
    let width = 720.0;
    let height = top + row_h * rows as f64 + 40.0;

    // Value range spanned by the running sum.
    let mut lo = w.baseline.min(w.total).min(0.0);
    let mut hi = w.baseline.max(w.total);
    let mut run = w.baseline;
    for (_, v) in &w.bars {
        run += v;
        lo = lo.min(run);
        hi = hi.max(run);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let plot_w = width - left - right;
    let px = |v: f64| left + (v - lo) / (hi - lo) * plot_w;

    let mut s = String::new();
    svg::open(&mut s, width, height);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="26" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        svg::escape(title)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{top:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="3,3"/>"##,
        px(w.baseline),
        px(w.baseline),
        top + row_h * rows as f64
    );

    let bar = |s: &mut String, row: usize, label: &str, from: f64, to: f64, fill: &str, text: String| {
        let y = top + row_h * row as f64 + 4.0;
        let (a, b) = (px(from.min(to)), px(from.max(to)));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
            left - 8.0,
            y + row_h / 2.0,
            svg::escape(label)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{a:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            (b - a).max(1.0),
            row_h - 8.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{text}</text>"#,
            b + 6.0,
            y + row_h / 2.0
        );
    };

    bar(&mut s, 0, &w.baseline_label, lo.min(0.0), w.baseline, "#7f7f7f", pct(w.baseline));
    let mut run = w.baseline;
    for (k, (name, v)) in w.bars.iter().enumerate() {
        let fill = if *v >= 0.0 { "#2ca02c" } else { "#d62728" };
        bar(&mut s, k + 1, name, run, run + v, fill, signed_pct(*v));
        run += v;
    }
    bar(&mut s, rows - 1, &w.total_label, lo.min(0.0), w.total, "#1f77b4", pct(w.total));
    s.push_str("</svg>\n");
    Ok(s)
}

/// One line per feature plus the dashed grand-coalition envelope.
pub fn contribution_curves(ca: &CurveAttribution) -> PlotDocument {
    let mut doc = PlotDocument::new("Feature contributions", ca.kind.x_label(), "contribution");
    for (i, name) in ca.feature_names.iter().enumerate() {
        doc.series.push(Series {
            name: name.clone(),
            color: color(i).to_owned(),
            points: ca.abscissae.iter().zip(&ca.series[i]).map(|(&x, &y)| Some((x, y))).collect(),
            dashed: false,
        });
    }
    doc.series.push(Series {
        name: "all features".to_owned(),
        color: "#000000".to_owned(),
        points: ca.abscissae.iter().zip(&ca.reference).map(|(&x, &y)| Some((x, y))).collect(),
        dashed: true,
    });
    doc.fit_ranges();
    doc
}

/// `phi_i / sum(phi)` per grid point; points where the sum vanishes are
/// left as gaps.
pub fn relative_series(ca: &CurveAttribution) -> Vec<Vec<Option<f64>>> {
    let sums: Vec<f64> = (0..ca.len()).map(|k| ca.series.iter().map(|s| s[k]).sum()).collect();
    ca.series
        .iter()
        .map(|s| {
            s.iter()
                .zip(&sums)
                .map(|(&v, &t)| if t.abs() < RELATIVE_GAP { None } else { Some(v / t) })
                .collect()
        })
        .collect()
}

pub fn relative_contributions(ca: &CurveAttribution) -> PlotDocument {
    let mut doc = PlotDocument::new("Relative feature contributions", ca.kind.x_label(), "share of total");
    for (i, (name, rel)) in ca.feature_names.iter().zip(relative_series(ca)).enumerate() {
        doc.series.push(Series {
            name: name.clone(),
            color: color(i).to_owned(),
            points: ca.abscissae.iter().zip(rel).map(|(&x, r)| r.map(|y| (x, y))).collect(),
            dashed: false,
        });
    }
    doc.fit_ranges();
    doc
}

/// Mean line with a mean ± std band. With `clip`, the band is cut to [0, 1].
pub fn banded_plot(b: &BandedSeries, title: &str, y_label: &str, clip: bool) -> PlotDocument {
    let mut doc = PlotDocument::new(title, "abscissa", y_label);
    add_band(&mut doc, b, "mean", color(0), clip);
    if clip {
        doc.cover_data();
    } else {
        doc.fit_ranges();
    }
    doc
}

fn add_band(doc: &mut PlotDocument, b: &BandedSeries, name: &str, c: &str, clip: bool) {
    let f = |v: f64| if clip { v.clamp(0.0, 1.0) } else { v };
    doc.bands.push(Band {
        color: c.to_owned(),
        x: b.abscissae.clone(),
        lower: b.mean.iter().zip(&b.std).map(|(m, s)| f(m - s)).collect(),
        upper: b.mean.iter().zip(&b.std).map(|(m, s)| f(m + s)).collect(),
    });
    doc.series.push(Series {
        name: name.to_owned(),
        color: c.to_owned(),
        points: b.abscissae.iter().zip(&b.mean).map(|(&x, &y)| Some((x, y))).collect(),
        dashed: false,
    });
}

/// Per-feature contribution bands from a Monte-Carlo curve run.
pub fn feature_bands(a: &McAttribution, x_label: &str) -> Option<PlotDocument> {
    let bands = a.bands.as_ref()?;
    let mut doc = PlotDocument::new("Feature contributions over iterations", x_label, "contribution");
    for (i, (name, b)) in a.feature_names.iter().zip(bands).enumerate() {
        add_band(&mut doc, b, name, color(i), false);
    }
    doc.fit_ranges();
    Some(doc)
}

/// Single ROC or PR curve.
pub fn curve_plot(points: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> PlotDocument {
    let mut doc = PlotDocument::new(title, x_label, y_label);
    doc.series.push(Series {
        name: title.to_owned(),
        color: color(0).to_owned(),
        points: points.iter().map(|&p| Some(p)).collect(),
        dashed: false,
    });
    doc.cover_data();
    doc
}

/// Mean ± std per feature as horizontal whiskers, in percent.
pub fn whisker_chart(names: &[String], mean: &[f64], std: &[f64], title: &str) -> String {
    let (left, right, top, row_h) = (130.0, 40.0, 50.0, 30.0);
    let width = 640.0;
    let height = top + row_h * names.len() as f64 + 50.0;
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for (m, s) in mean.iter().zip(std) {
        lo = lo.min(m - s);
        hi = hi.max(m + s);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |v: f64| left + (v - lo) / (hi - lo) * (width - left - right);

    let mut s = String::new();
    svg::open(&mut s, width, height);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="26" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        svg::escape(title)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{top:.2}" x2="{:.2}" y2="{:.2}" stroke="#999"/>"##,
        px(0.0),
        px(0.0),
        top + row_h * names.len() as f64
    );
    for (k, name) in names.iter().enumerate() {
        let y = top + row_h * (k as f64 + 0.5);
        let c = color(k);
        let (m, sd) = (mean[k], std[k]);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
            left - 8.0,
            y + 4.0,
            svg::escape(name)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{c}" stroke-width="2"/>"#,
            px(m - sd),
            px(m + sd)
        );
        for e in [m - sd, m + sd] {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{c}" stroke-width="2"/>"#,
                px(e),
                y - 6.0,
                y + 6.0
            );
        }
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{y:.2}" r="4" fill="{c}"/>"#, px(m));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{} ± {}</text>"#,
            px(m),
            y - 9.0,
            pct(m),
            pct(sd)
        );
    }
    s.push_str("</svg>\n");
    s
}
