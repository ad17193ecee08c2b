//! Monte-Carlo cross-validation: repeat split → train → explain over seeded
//! random splits and summarize the spread of curves and attributions.
//!
//! Iteration `k` uses split seed `base_seed + k`. Iterations run in parallel
//! and are reduced in index order, so results do not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{default_grid, trapezoid_xy, PrCurve, RocCurve, Strategy};
use crate::dataset::{Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::game::{CurveKind, GameEvaluator, GameSpec, Target};
use crate::model::{Classifier, GaussianNb};
use crate::shapley::{shapley_curve, shapley_exact};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub iterations: usize,
    pub base_seed: u64,
    pub train_fraction: f64,
    pub grid: Vec<f64>,
    pub exact_cap: usize,
}

impl McConfig {
    pub fn new(iterations: usize, base_seed: u64) -> Self {
        McConfig {
            iterations,
            base_seed,
            train_fraction: 0.8,
            grid: default_grid(),
            exact_cap: crate::game::DEFAULT_EXACT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 2 {
            return Err(Error::InvalidParameter(format!(
                "Monte-Carlo runs need at least 2 iterations, got {}",
                self.iterations
            )));
        }
        if self.grid.is_empty() || self.grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter("grid must be non-empty and within [0, 1]".into()));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.iterations as u64).map(|k| self.base_seed.wrapping_add(k)).collect()
    }
}

/// Mean and population standard deviation of a series over iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandedSeries {
    pub abscissae: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub iterations: usize,
}

impl BandedSeries {
    /// Summarizes `samples[iteration][point]` over iterations.
    pub fn from_samples(abscissae: Vec<f64>, samples: &[Vec<f64>]) -> Result<Self> {
        let (mean, std) = mean_std(samples, abscissae.len())?;
        Ok(BandedSeries { abscissae, mean, std, iterations: samples.len() })
    }
}

/// Element-wise mean and population standard deviation (Welford).
pub fn mean_std(samples: &[Vec<f64>], width: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples to aggregate".into()));
    }
    let mut mean = vec![0.0; width];
    let mut m2 = vec![0.0; width];
    for (k, s) in samples.iter().enumerate() {
        if s.len() != width {
            return Err(Error::ShapeMismatch(format!("sample of length {} for width {width}", s.len())));
        }
        let count = (k + 1) as f64;
        for ((m, q), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(s) {
            let delta = x - *m;
            *m += delta / count;
            *q += delta * (x - *m);
        }
    }
    let n = samples.len() as f64;
    let std = m2.into_iter().map(|q| (q / n).max(0.0).sqrt()).collect();
    Ok((mean, std))
}

/// Runs `job` once per seed in parallel, returning results in seed order.
/// The first failure in seed order wins.
fn run_iterations<T: Send>(seeds: &[u64], job: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = seeds.par_iter().map(|&s| job(s)).collect();
    results.into_iter().collect()
}

/// Grand-coalition curves summarized over iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct McCurves {
    pub roc: BandedSeries,
    pub pr: Option<BandedSeries>,
    /// AUC (and AUPRC if requested) per iteration, in seed order.
    pub auc: Vec<f64>,
    pub auprc: Option<Vec<f64>>,
}

pub fn mc_curves(d: &Dataset, cfg: &McConfig, include_pr: bool) -> Result<McCurves> {
    cfg.validate()?;
    mc_curves_with_seeds(d, &cfg.seeds(), cfg.train_fraction, &cfg.grid, include_pr)
}

pub fn mc_curves_with_seeds(
    d: &Dataset,
    seeds: &[u64],
    train_fraction: f64,
    grid: &[f64],
    include_pr: bool,
) -> Result<McCurves> {
    let runs = run_iterations(seeds, |seed| {
        let (train, test) = d.split(&SplitSpec::new(train_fraction, seed))?;
        let scores = GaussianNb::default().fit(&train)?.score(&test)?;
        let roc = RocCurve::from_scores(scores.as_slice(), test.labels())?;
        let roc_ys: Vec<f64> = grid.iter().map(|&x| roc.estimate_tpr(x, Strategy::Interpolation)).collect();
        let pr = if include_pr {
            let pr = PrCurve::from_scores(scores.as_slice(), test.labels())?;
            let ys: Vec<f64> = grid.iter().map(|&x| pr.estimate_precision(x, Strategy::Interpolation)).collect();
            Some((ys, pr.auprc()))
        } else {
            None
        };
        Ok((roc_ys, roc.auc(), pr))
    })?;
    let roc_samples: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
    let auc = runs.iter().map(|r| r.1).collect();
    let (pr, auprc) = if include_pr {
        let samples: Vec<Vec<f64>> = runs.iter().map(|r| r.2.as_ref().expect("pr").0.clone()).collect();
        let areas = runs.iter().map(|r| r.2.as_ref().expect("pr").1).collect();
        (Some(BandedSeries::from_samples(grid.to_vec(), &samples)?), Some(areas))
    } else {
        (None, None)
    };
    Ok(McCurves {
        roc: BandedSeries::from_samples(grid.to_vec(), &roc_samples)?,
        pr,
        auc,
        auprc,
    })
}

/// What a Monte-Carlo attribution run explains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McTarget {
    Auc,
    Auprc,
    /// Every slice of the grid, read with the given strategy.
    Curve(CurveKind, Strategy),
}

/// Per-feature attribution statistics over iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct McAttribution {
    pub target: McTarget,
    pub feature_names: Vec<String>,
    /// Per-feature mean and std of the Shapley value (for curve targets, of
    /// its trapezoidal integral over the grid).
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Grand-coalition payoff per iteration (equals the sum of that
    /// iteration's Shapley values), in seed order.
    pub grand: Vec<f64>,
    /// Per-feature contribution bands over the grid, for curve targets.
    pub bands: Option<Vec<BandedSeries>>,
    /// Per-iteration Shapley values, in seed order.
    pub per_iteration: Vec<Vec<f64>>,
}

pub fn mc_attributions(d: &Dataset, cfg: &McConfig, target: McTarget) -> Result<McAttribution> {
    cfg.validate()?;
    mc_attributions_with_seeds(d, &cfg.seeds(), cfg.train_fraction, &cfg.grid, cfg.exact_cap, target)
}

pub fn mc_attributions_with_seeds(
    d: &Dataset,
    seeds: &[u64],
    train_fraction: f64,
    grid: &[f64],
    exact_cap: usize,
    target: McTarget,
) -> Result<McAttribution> {
    let n = d.n_features();
    if n > exact_cap {
        return Err(Error::TooManyFeaturesForExactMode { features: n, cap: exact_cap });
    }
    let runs = run_iterations(seeds, |seed| {
        let (train, test) = d.split(&SplitSpec::new(train_fraction, seed))?;
        let ev = GameEvaluator::new(&train, &test)?.with_exact_cap(exact_cap);
        match target {
            McTarget::Auc | McTarget::Auprc => {
                let spec = if target == McTarget::Auc { GameSpec::auc() } else { GameSpec::auprc() };
                let table = ev.evaluate_all(&spec)?;
                let attr = shapley_exact(&table)?;
                Ok((attr.values, table.grand(), None))
            }
            McTarget::Curve(kind, strategy) => {
                let tables = ev.evaluate_slices(kind, grid, strategy)?;
                let ca = shapley_curve(&tables)?;
                let areas = ca.series.iter().map(|s| trapezoid_xy(grid, s)).collect();
                let grand = trapezoid_xy(grid, &ca.reference);
                Ok((areas, grand, Some(ca.series)))
            }
        }
    })?;

    let per_iteration: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
    let (mean, std) = mean_std(&per_iteration, n)?;
    let grand = runs.iter().map(|r| r.1).collect();
    let bands = match target {
        McTarget::Curve(..) => {
            let mut bands = Vec::with_capacity(n);
            for i in 0..n {
                let samples: Vec<Vec<f64>> =
                    runs.iter().map(|r| r.2.as_ref().expect("series")[i].clone()).collect();
                bands.push(BandedSeries::from_samples(grid.to_vec(), &samples)?);
            }
            Some(bands)
        }
        _ => None,
    };
    Ok(McAttribution {
        target,
        feature_names: d.feature_names().to_vec(),
        mean,
        std,
        grand,
        bands,
        per_iteration,
    })
}

impl McAttribution {
    /// Random-classifier value of the explained metric (area targets).
    pub fn baseline(&self) -> f64 {
        match self.target {
            McTarget::Auc => Target::Auc.baseline(),
            McTarget::Auprc => Target::Auprc.baseline(),
            McTarget::Curve(..) => 0.0,
        }
    }
}
