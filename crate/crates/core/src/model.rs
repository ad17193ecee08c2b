//! Probabilistic binary classifiers.
//!
//! The game only needs "fit a dataset, score another one", so classifiers sit
//! behind [`Classifier`] and [`Scorer`]. Gaussian naive Bayes is the one
//! shipped implementation.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Absolute lower bound applied to every smoothed variance.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Positive-class probabilities, one per scored row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidParameter(format!("score {bad} outside [0, 1]")));
        }
        Ok(ScoreVector(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for ScoreVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub trait Scorer: Send + Sync {
    fn n_features(&self) -> usize;
    fn score(&self, test: &Dataset) -> Result<ScoreVector>;
}

pub trait Classifier: Send + Sync {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Scorer>>;
}

/// Gaussian naive Bayes with variance smoothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianNb {
    /// Fraction of the largest per-feature training variance added to every
    /// class variance.
    pub var_smoothing: f64,
}

impl Default for GaussianNb {
    fn default() -> Self {
        GaussianNb { var_smoothing: 1e-9 }
    }
}

/// Fitted Gaussian naive Bayes parameters. Index 0 is the negative class.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    priors: [f64; 2],
    means: Vec<[f64; 2]>,
    variances: Vec<[f64; 2]>,
}

impl GaussianNb {
    pub fn train(&self, train: &Dataset) -> Result<TrainedModel> {
        let n = train.n_rows();
        let n_pos = train.positive_count();
        if n_pos == 0 || n_pos == n {
            return Err(Error::SingleClassTrainingSet);
        }
        let counts = [(n - n_pos) as f64, n_pos as f64];
        let labels = train.labels();
        let d = train.n_features();

        let mut means = vec![[0.0; 2]; d];
        let mut variances = vec![[0.0; 2]; d];
        let mut max_var = 0.0_f64;
        for j in 0..d {
            let mut sum = [0.0; 2];
            let mut total = 0.0;
            for (x, &y) in train.column(j).zip(labels) {
                sum[y as usize] += x;
                total += x;
            }
            let mean = [sum[0] / counts[0], sum[1] / counts[1]];
            let total_mean = total / n as f64;
            let mut ss = [0.0; 2];
            let mut total_ss = 0.0;
            for (x, &y) in train.column(j).zip(labels) {
                let dev = x - mean[y as usize];
                ss[y as usize] += dev * dev;
                total_ss += (x - total_mean) * (x - total_mean);
            }
            means[j] = mean;
            variances[j] = [ss[0] / counts[0], ss[1] / counts[1]];
            max_var = max_var.max(total_ss / n as f64);
        }
        let epsilon = self.var_smoothing * max_var;
        for v in variances.iter_mut().flatten() {
            *v = (*v + epsilon).max(VARIANCE_FLOOR);
        }

        Ok(TrainedModel {
            priors: [counts[0] / n as f64, counts[1] / n as f64],
            means,
            variances,
        })
    }
}

impl Classifier for GaussianNb {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Scorer>> {
        Ok(Box::new(self.train(train)?))
    }
}

fn log_density(x: f64, mean: f64, var: f64) -> f64 {
    let dev = x - mean;
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - dev * dev / (2.0 * var)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl TrainedModel {
    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn means(&self) -> &[[f64; 2]] {
        &self.means
    }

    pub fn variances(&self) -> &[[f64; 2]] {
        &self.variances
    }

    /// Posterior log-odds of the positive class for one row.
    pub fn log_odds(&self, row: &[f64]) -> f64 {
        let mut terms: Vec<f64> = row
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(&x, (m, v))| log_density(x, m[1], v[1]) - log_density(x, m[0], v[0]))
            .collect();
        // Sorted so the sum does not depend on column order.
        terms.sort_unstable_by(f64::total_cmp);
        let prior = self.priors[1].ln() - self.priors[0].ln();
        terms.into_iter().fold(prior, |acc, t| acc + t)
    }
}

impl Scorer for TrainedModel {
    fn n_features(&self) -> usize {
        self.means.len()
    }

    fn score(&self, test: &Dataset) -> Result<ScoreVector> {
        if test.n_features() != self.means.len() {
            return Err(Error::ArityMismatch {
                expected: self.means.len(),
                actual: test.n_features(),
            });
        }
        let scores = (0..test.n_rows()).map(|i| sigmoid(self.log_odds(test.row(i)))).collect();
        ScoreVector::new(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalition::Coalition;

    fn ds(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
        let names = (0..rows[0].len()).map(|j| format!("f{j}")).collect();
        Dataset::new(rows, labels, names).unwrap()
    }

    #[test]
    fn maximum_likelihood_estimates() {
        let d = ds(vec![vec![0.0], vec![2.0], vec![10.0], vec![12.0]], vec![0, 0, 1, 1]);
        let m = GaussianNb::default().train(&d).unwrap();
        assert_eq!(m.priors(), [0.5, 0.5]);
        assert_eq!(m.means()[0], [1.0, 11.0]);
        // ML variance 1 per class, plus 1e-9 * total variance (26.0)
        let expected = 1.0 + 1e-9 * 26.0;
        assert!((m.variances()[0][0] - expected).abs() < 1e-15);
        assert!((m.variances()[0][1] - expected).abs() < 1e-15);
    }

    #[test]
    fn prior_only_model() {
        let d = ds(vec![vec![0.0], vec![2.0], vec![10.0], vec![12.0]], vec![0, 0, 1, 1]);
        let empty = d.project(Coalition::EMPTY).unwrap();
        let m = GaussianNb::default().train(&empty).unwrap();
        let s = m.score(&empty).unwrap();
        assert!(s.as_slice().iter().all(|&p| p == 0.5));

        let skewed = ds(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]], vec![0, 1, 1, 1]);
        let empty = skewed.project(Coalition::EMPTY).unwrap();
        let m = GaussianNb::default().train(&empty).unwrap();
        for p in m.score(&empty).unwrap().as_slice() {
            assert!((p - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn arity_mismatch_rejected() {
        let d = ds(vec![vec![0.0], vec![1.0]], vec![0, 1]);
        let m = TrainedModel { priors: [0.5, 0.5], means: vec![], variances: vec![] };
        assert!(matches!(m.score(&d), Err(Error::ArityMismatch { expected: 0, actual: 1 })));
    }

    #[test]
    fn confident_at_positive_mean() {
        let d = ds(vec![vec![0.0], vec![2.0], vec![10.0], vec![12.0]], vec![0, 0, 1, 1]);
        let m = GaussianNb::default().train(&d).unwrap();
        let t = ds(vec![vec![11.0], vec![1.0]], vec![1, 0]);
        let s = m.score(&t).unwrap();
        // log-odds at x=11: (100 - 0) / 2 = 50 nats
        assert!(s.as_slice()[0] > 0.99);
        assert!(s.as_slice()[1] < 0.01);
    }

    #[test]
    fn symmetric_midpoint() {
        let d = ds(vec![vec![-2.0], vec![-4.0], vec![2.0], vec![4.0]], vec![0, 0, 1, 1]);
        let m = GaussianNb::default().train(&d).unwrap();
        let t = ds(vec![vec![0.0], vec![1.0]], vec![0, 1]);
        assert!((m.score(&t).unwrap().as_slice()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn constant_column_leaves_scores_unchanged() {
        let rows = vec![vec![0.1], vec![0.7], vec![1.3], vec![2.9], vec![3.3], vec![1.0]];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let d = ds(rows.clone(), labels.clone());
        let with_const = ds(rows.iter().map(|r| vec![r[0], 5.0]).collect(), labels);
        let a = GaussianNb::default().train(&d).unwrap().score(&d).unwrap();
        let b = GaussianNb::default().train(&with_const).unwrap().score(&with_const).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn column_order_does_not_change_scores() {
        let rows = vec![
            vec![0.1, 3.0, -1.0],
            vec![0.7, 2.5, 0.0],
            vec![1.3, 1.0, 0.5],
            vec![2.9, 0.2, 1.5],
            vec![3.3, -0.4, 2.0],
            vec![1.0, 0.0, 0.1],
        ];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let d = ds(rows.clone(), labels.clone());
        let rev = ds(rows.iter().map(|r| r.iter().rev().copied().collect()).collect(), labels);
        let a = GaussianNb::default().train(&d).unwrap().score(&d).unwrap();
        let b = GaussianNb::default().train(&rev).unwrap().score(&rev).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn row_order_permutes_scores() {
        let rows = vec![vec![0.1], vec![0.7], vec![1.3], vec![2.9], vec![3.3], vec![1.0]];
        let d = ds(rows, vec![0, 0, 0, 1, 1, 1]);
        let m = GaussianNb::default().train(&d).unwrap();
        let perm = [5, 2, 0, 4, 1, 3];
        let shuffled = d.select_rows(&perm).unwrap();
        let a = m.score(&d).unwrap();
        let b = m.score(&shuffled).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(b.as_slice()[k], a.as_slice()[i]);
        }
    }
}
