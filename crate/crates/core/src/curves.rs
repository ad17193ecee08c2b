//! ROC and precision-recall curves built by a descending threshold sweep,
//! their trapezoidal areas, and estimation of a curve's value at an
//! arbitrary abscissa.
//!
//! Rows with equal scores cross the threshold together, so a tie block
//! produces a single (possibly diagonal) step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to read a curve between its knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Larger of the two bracketing values.
    Optimistic,
    /// Smaller of the two bracketing values.
    Pessimistic,
    /// Linear interpolation between the bracketing knots.
    Interpolation,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Pessimistic, Strategy::Interpolation, Strategy::Optimistic];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Optimistic => "optimistic",
            Strategy::Pessimistic => "pessimistic",
            Strategy::Interpolation => "interpolation",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimistic" => Ok(Strategy::Optimistic),
            "pessimistic" => Ok(Strategy::Pessimistic),
            "interpolation" | "interpolate" => Ok(Strategy::Interpolation),
            other => Err(Error::InvalidParameter(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Receiver operating characteristic: (fpr, tpr) knots and their area.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
    auc: f64,
}

/// Precision-recall curve: (recall, precision) knots and their area.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    points: Vec<(f64, f64)>,
    auprc: f64,
}

/// Trapezoidal area under a polyline given as (x, y) knots.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// Trapezoidal integral of `ys` sampled at `xs`.
pub fn trapezoid_xy(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[1] + y[0]) / 2.0)
        .sum()
}

/// Cumulative (true, false) positive counts after each tie block of the
/// descending sweep.
fn sweep(scores: &[f64], labels: &[u8]) -> Result<Vec<(usize, usize)>> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::DegenerateCurve(format!("non-finite score {s}")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut steps = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        steps.push((tp, fp));
    }
    Ok(steps)
}

fn check_sorted(points: &[(f64, f64)]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::DegenerateCurve("curve has no points".into()));
    }
    if points.iter().any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y)) {
        return Err(Error::DegenerateCurve("coordinates must lie in [0, 1]".into()));
    }
    if points.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::DegenerateCurve("abscissae must be non-decreasing".into()));
    }
    Ok(())
}

impl RocCurve {
    pub fn from_scores(scores: &[f64], labels: &[u8]) -> Result<Self> {
        let n_pos = labels.iter().filter(|&&y| y == 1).count();
        let n_neg = labels.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::SingleClassLabels);
        }
        let mut points = vec![(0.0, 0.0)];
        points.extend(
            sweep(scores, labels)?
                .into_iter()
                .map(|(tp, fp)| (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64)),
        );
        Ok(RocCurve { auc: trapezoid(&points), points })
    }

    /// Builds a curve from explicit knots, which must run from (0,0) to (1,1)
    /// with both coordinates non-decreasing.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        check_sorted(&points)?;
        if points.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::DegenerateCurve("tpr must be non-decreasing".into()));
        }
        if points[0] != (0.0, 0.0) || points[points.len() - 1] != (1.0, 1.0) {
            return Err(Error::DegenerateCurve("ROC curve must run from (0,0) to (1,1)".into()));
        }
        Ok(RocCurve { auc: trapezoid(&points), points })
    }

    /// (fpr, tpr) knots in sweep order.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn auc(&self) -> f64 {
        self.auc
    }

    pub fn estimate_tpr(&self, fpr: f64, strategy: Strategy) -> f64 {
        estimate(&self.points, fpr, strategy)
    }
}

impl PrCurve {
    /// Sweep of (recall, precision). A knot at recall 0 carrying the
    /// precision of the first threshold is prepended when the sweep does not
    /// already start there.
    pub fn from_scores(scores: &[f64], labels: &[u8]) -> Result<Self> {
        let n_pos = labels.iter().filter(|&&y| y == 1).count();
        if n_pos == 0 {
            return Err(Error::NoPositiveLabels);
        }
        let mut points: Vec<(f64, f64)> = sweep(scores, labels)?
            .into_iter()
            .map(|(tp, fp)| (tp as f64 / n_pos as f64, tp as f64 / (tp + fp) as f64))
            .collect();
        if points[0].0 > 0.0 {
            points.insert(0, (0.0, points[0].1));
        }
        Ok(PrCurve { auprc: trapezoid(&points), points })
    }

    /// Builds a curve from explicit knots sorted by recall.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        check_sorted(&points)?;
        Ok(PrCurve { auprc: trapezoid(&points), points })
    }

    /// (recall, precision) knots in sweep order.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn auprc(&self) -> f64 {
        self.auprc
    }

    pub fn estimate_precision(&self, recall: f64, strategy: Strategy) -> f64 {
        estimate(&self.points, recall, strategy)
    }
}

/// Reads a polyline at `q`.
///
/// If `q` falls strictly between knot abscissae, the bracketing knots are the
/// adjacent pair around it and the strategy picks max, min or the linear
/// interpolant. If `q` coincides with one or more knots (a vertical run), the
/// strategy picks the largest, smallest or the mean of the run's extremes.
/// Queries outside the abscissa span clamp to the nearest end knot.
pub(crate) fn estimate(points: &[(f64, f64)], q: f64, strategy: Strategy) -> f64 {
    let upto = points.partition_point(|p| p.0 <= q);
    let from = points.partition_point(|p| p.0 < q);
    if from < upto {
        let run = &points[from..upto];
        let lo = run.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = run.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        return match strategy {
            Strategy::Optimistic => hi,
            Strategy::Pessimistic => lo,
            Strategy::Interpolation => (lo + hi) / 2.0,
        };
    }
    if upto == 0 {
        return points[0].1;
    }
    if upto == points.len() {
        return points[points.len() - 1].1;
    }
    let (fa, ta) = points[upto - 1];
    let (fb, tb) = points[upto];
    match strategy {
        Strategy::Optimistic => ta.max(tb),
        Strategy::Pessimistic => ta.min(tb),
        Strategy::Interpolation => {
            let v = (tb - ta) * (q - fa) / (fb - fa) + ta;
            v.clamp(ta.min(tb), ta.max(tb))
        }
    }
}

/// `n` evenly spaced abscissae covering [0, 1].
pub fn uniform_grid(n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::InvalidParameter("grid needs at least one point".into())),
        1 => Ok(vec![0.0]),
        _ => Ok((0..n).map(|k| k as f64 / (n - 1) as f64).collect()),
    }
}

/// Default slicing grid: 0.00, 0.01, ..., 1.00.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(101).expect("non-empty grid")
}
