//! Coalition games whose payoff is a robustness metric of a model trained on
//! a subset of features, measured relative to the random classifier.
//!
//! | target          | payoff of coalition A                  |
//! |-----------------|----------------------------------------|
//! | `Auc`           | AUC(A) - 0.5                           |
//! | `RocSlice(f)`   | tpr estimated at fpr f for A, minus f  |
//! | `Auprc`         | AUPRC(A) - 0.5                         |
//! | `PrcSlice(r)`   | precision estimated at recall r, - 0.5 |
//!
//! The empty coalition is the random classifier and is worth exactly 0 in
//! every game; no model is trained for it.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::curves::{PrCurve, RocCurve, Strategy};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{Classifier, GaussianNb};

/// Default largest feature count for exhaustive coalition enumeration.
pub const DEFAULT_EXACT_CAP: usize = 20;

/// Random-classifier precision used as the PR baseline.
pub const PR_BASELINE: f64 = 0.5;

/// Random-classifier area used as the AUC / AUPRC baseline.
pub const AREA_BASELINE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Roc,
    Prc,
}

impl CurveKind {
    pub fn slice(self, x: f64) -> Target {
        match self {
            CurveKind::Roc => Target::RocSlice(x),
            CurveKind::Prc => Target::PrcSlice(x),
        }
    }

    pub fn area(self) -> Target {
        match self {
            CurveKind::Roc => Target::Auc,
            CurveKind::Prc => Target::Auprc,
        }
    }

    pub fn x_label(self) -> &'static str {
        match self {
            CurveKind::Roc => "fpr",
            CurveKind::Prc => "recall",
        }
    }

    pub fn y_label(self) -> &'static str {
        match self {
            CurveKind::Roc => "tpr",
            CurveKind::Prc => "precision",
        }
    }
}

/// The metric a game explains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Auc,
    RocSlice(f64),
    Auprc,
    PrcSlice(f64),
}

impl Target {
    /// Metric value of the random classifier.
    pub fn baseline(self) -> f64 {
        match self {
            Target::Auc | Target::Auprc => AREA_BASELINE,
            Target::RocSlice(fpr) => fpr,
            Target::PrcSlice(_) => PR_BASELINE,
        }
    }

    pub fn kind(self) -> CurveKind {
        match self {
            Target::Auc | Target::RocSlice(_) => CurveKind::Roc,
            Target::Auprc | Target::PrcSlice(_) => CurveKind::Prc,
        }
    }

    pub fn is_slice(self) -> bool {
        matches!(self, Target::RocSlice(_) | Target::PrcSlice(_))
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Target::RocSlice(x) | Target::PrcSlice(x) if !(0.0..=1.0).contains(&x) => Err(
                Error::InvalidParameter(format!("slice abscissa {x} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    /// Short metric name, e.g. `AUC` or `TPR@fpr=0.2`.
    pub fn label(self) -> String {
        match self {
            Target::Auc => "AUC".into(),
            Target::Auprc => "AUPRC".into(),
            Target::RocSlice(x) => format!("TPR@fpr={x}"),
            Target::PrcSlice(x) => format!("precision@recall={x}"),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A game definition: the target metric and, for slices, how curves are read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub target: Target,
    pub strategy: Strategy,
}

impl GameSpec {
    pub fn new(target: Target, strategy: Strategy) -> Self {
        GameSpec { target, strategy }
    }

    pub fn auc() -> Self {
        GameSpec::new(Target::Auc, Strategy::Interpolation)
    }

    pub fn auprc() -> Self {
        GameSpec::new(Target::Auprc, Strategy::Interpolation)
    }

    /// Payoff of a coalition whose model produced `curves`.
    pub fn payoff_from(&self, curves: &CoalitionCurves) -> f64 {
        match self.target {
            Target::Auc => curves.roc.auc() - AREA_BASELINE,
            Target::RocSlice(fpr) => curves.roc.estimate_tpr(fpr, self.strategy) - fpr,
            Target::Auprc => curves.pr.auprc() - AREA_BASELINE,
            Target::PrcSlice(rec) => curves.pr.estimate_precision(rec, self.strategy) - PR_BASELINE,
        }
    }
}

/// Curves of the model trained on one coalition, scored on the test split.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionCurves {
    pub roc: RocCurve,
    pub pr: PrCurve,
}

/// Payoffs of every coalition of one game, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    n: usize,
    names: Vec<String>,
    game: Option<GameSpec>,
    values: Vec<f64>,
    evaluations: usize,
    warnings: Vec<(Coalition, String)>,
}

impl PayoffTable {
    /// Table from `2^n` payoffs in bitmask order. The empty coalition must be
    /// worth exactly 0.
    pub fn from_values(names: Vec<String>, game: Option<GameSpec>, values: Vec<f64>) -> Result<Self> {
        let n = names.len();
        if n > MAX_PLAYERS {
            return Err(Error::TooManyFeaturesForExactMode { features: n, cap: MAX_PLAYERS });
        }
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::IncompleteTable { expected, found: values.len() });
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "empty coalition must be worth 0, got {}",
                values[0]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite payoff {v}")));
        }
        let evaluations = expected - 1;
        Ok(PayoffTable { n, names, game, values, evaluations, warnings: Vec::new() })
    }

    /// Table from a characteristic function; `f` is not called for the empty
    /// coalition.
    pub fn from_fn(names: Vec<String>, game: Option<GameSpec>, mut f: impl FnMut(Coalition) -> f64) -> Result<Self> {
        let n = names.len();
        if n > MAX_PLAYERS {
            return Err(Error::TooManyFeaturesForExactMode { features: n, cap: MAX_PLAYERS });
        }
        let values = Coalition::all(n)
            .map(|c| if c.is_empty() { 0.0 } else { f(c) })
            .collect();
        Self::from_values(names, game, values)
    }

    pub fn n_players(&self) -> usize {
        self.n
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn game(&self) -> Option<GameSpec> {
        self.game
    }

    pub fn get(&self, c: Coalition) -> f64 {
        self.values[c.bits() as usize]
    }

    /// Payoff of the grand coalition.
    pub fn grand(&self) -> f64 {
        self.get(Coalition::full(self.n))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coalitions whose payoff required a trained model.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Coalitions whose model or curve degenerated and were scored as the
    /// random classifier.
    pub fn warnings(&self) -> &[(Coalition, String)] {
        &self.warnings
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coalition, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(bits, &v)| (Coalition::from_bits(bits as u64), v))
    }
}

type Outcome = std::result::Result<Arc<CoalitionCurves>, String>;

/// Trains one model per coalition on a fixed train/test split and caches the
/// resulting curves, so every game on that split reuses the same models.
pub struct GameEvaluator<'a> {
    train: &'a Dataset,
    test: &'a Dataset,
    classifier: Box<dyn Classifier + 'a>,
    exact_cap: usize,
    cache: Mutex<HashMap<Coalition, Outcome>>,
    trainings: AtomicUsize,
}

impl fmt::Debug for GameEvaluator<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameEvaluator")
            .field("features", &self.train.feature_names())
            .field("exact_cap", &self.exact_cap)
            .field("trainings", &self.trainings())
            .finish_non_exhaustive()
    }
}

impl<'a> GameEvaluator<'a> {
    /// Evaluator with Gaussian naive Bayes and the default exact-mode cap.
    pub fn new(train: &'a Dataset, test: &'a Dataset) -> Result<Self> {
        if train.feature_names() != test.feature_names() {
            return Err(Error::ShapeMismatch(
                "train and test splits have different features".into(),
            ));
        }
        if train.n_features() > MAX_PLAYERS {
            return Err(Error::InvalidParameter(format!(
                "at most {MAX_PLAYERS} features are supported"
            )));
        }
        Ok(GameEvaluator {
            train,
            test,
            classifier: Box::new(GaussianNb::default()),
            exact_cap: DEFAULT_EXACT_CAP,
            cache: Mutex::new(HashMap::new()),
            trainings: AtomicUsize::new(0),
        })
    }

    #[must_use]
    pub fn with_classifier(mut self, classifier: impl Classifier + 'a) -> Self {
        self.classifier = Box::new(classifier);
        self.cache.get_mut().expect("cache lock").clear();
        self
    }

    #[must_use]
    pub fn with_exact_cap(mut self, cap: usize) -> Self {
        self.exact_cap = cap;
        self
    }

    pub fn n_features(&self) -> usize {
        self.train.n_features()
    }

    pub fn feature_names(&self) -> &[String] {
        self.train.feature_names()
    }

    pub fn train(&self) -> &Dataset {
        self.train
    }

    pub fn test(&self) -> &Dataset {
        self.test
    }

    /// Number of models trained so far.
    pub fn trainings(&self) -> usize {
        self.trainings.load(Ordering::Relaxed)
    }

    fn compute(&self, c: Coalition) -> Outcome {
        self.trainings.fetch_add(1, Ordering::Relaxed);
        let run = || -> Result<CoalitionCurves> {
            let train = self.train.project(c)?;
            let test = self.test.project(c)?;
            let scores = self.classifier.fit(&train)?.score(&test)?;
            Ok(CoalitionCurves {
                roc: RocCurve::from_scores(scores.as_slice(), test.labels())?,
                pr: PrCurve::from_scores(scores.as_slice(), test.labels())?,
            })
        };
        run().map(Arc::new).map_err(|e| e.to_string())
    }

    /// Trains models for every listed coalition not yet cached, in parallel.
    pub fn prefetch(&self, coalitions: &[Coalition]) -> Result<()> {
        let arity = self.n_features();
        if let Some(c) = coalitions.iter().find(|c| c.span() > arity) {
            return Err(Error::IndexOutOfRange { index: c.span() - 1, arity });
        }
        let missing: Vec<Coalition> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut m: Vec<Coalition> = coalitions
                .iter()
                .copied()
                .filter(|c| !c.is_empty() && !cache.contains_key(c))
                .collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        let computed: Vec<(Coalition, Outcome)> =
            missing.into_par_iter().map(|c| (c, self.compute(c))).collect();
        let mut cache = self.cache.lock().expect("cache lock");
        for (c, outcome) in computed {
            cache.entry(c).or_insert(outcome);
        }
        Ok(())
    }

    fn outcome(&self, c: Coalition) -> Result<Outcome> {
        if let Some(o) = self.cache.lock().expect("cache lock").get(&c) {
            return Ok(o.clone());
        }
        self.prefetch(&[c])?;
        Ok(self.cache.lock().expect("cache lock")[&c].clone())
    }

    /// Curves for a non-empty coalition.
    pub fn curves(&self, c: Coalition) -> Result<Arc<CoalitionCurves>> {
        if c.is_empty() {
            return Err(Error::InvalidParameter(
                "the empty coalition has no trained model".into(),
            ));
        }
        self.outcome(c)?.map_err(Error::DegenerateCurve)
    }

    /// Payoff of one coalition. Degenerate coalitions are reported as errors.
    pub fn payoff(&self, spec: &GameSpec, c: Coalition) -> Result<f64> {
        spec.target.validate()?;
        if c.is_empty() {
            return Ok(0.0);
        }
        Ok(spec.payoff_from(&*self.curves(c)?))
    }

    /// Payoff of one coalition, falling back to the random-classifier value
    /// 0 when its model or curve degenerates. Returns the reason if so.
    pub fn payoff_or_baseline(&self, spec: &GameSpec, c: Coalition) -> Result<(f64, Option<String>)> {
        if c.is_empty() {
            return Ok((0.0, None));
        }
        match self.outcome(c)? {
            Ok(curves) => Ok((spec.payoff_from(&curves), None)),
            Err(reason) => {
                log::warn!("coalition {c:?} degenerated ({reason}); using the baseline payoff");
                Ok((0.0, Some(reason)))
            }
        }
    }

    fn check_cap(&self) -> Result<()> {
        let n = self.n_features();
        if n > self.exact_cap {
            return Err(Error::TooManyFeaturesForExactMode { features: n, cap: self.exact_cap });
        }
        Ok(())
    }

    /// Payoffs of all `2^n` coalitions.
    pub fn evaluate_all(&self, spec: &GameSpec) -> Result<PayoffTable> {
        spec.target.validate()?;
        self.check_cap()?;
        let n = self.n_features();
        let all: Vec<Coalition> = Coalition::all(n).collect();
        self.prefetch(&all)?;
        self.table(spec)
    }

    fn table(&self, spec: &GameSpec) -> Result<PayoffTable> {
        let n = self.n_features();
        let mut values = Vec::with_capacity(1 << n);
        let mut warnings = Vec::new();
        for c in Coalition::all(n) {
            let (v, warning) = self.payoff_or_baseline(spec, c)?;
            values.push(v);
            if let Some(w) = warning {
                warnings.push((c, w));
            }
        }
        let mut table = PayoffTable::from_values(self.feature_names().to_vec(), Some(*spec), values)?;
        table.warnings = warnings;
        Ok(table)
    }

    /// One table per abscissa of `grid`, all built from the same trained
    /// models.
    pub fn evaluate_slices(&self, kind: CurveKind, grid: &[f64], strategy: Strategy) -> Result<Vec<PayoffTable>> {
        let specs: Vec<GameSpec> = grid.iter().map(|&x| GameSpec::new(kind.slice(x), strategy)).collect();
        for s in &specs {
            s.target.validate()?;
        }
        self.check_cap()?;
        let all: Vec<Coalition> = Coalition::all(self.n_features()).collect();
        self.prefetch(&all)?;
        specs.par_iter().map(|s| self.table(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split() -> (Dataset, Dataset) {
        // Two informative features and one noise feature.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let y = (i % 2) as u8;
            let t = i as f64 * 0.37;
            rows.push(vec![
                y as f64 * 1.5 + t.sin(),
                y as f64 * 0.5 + (2.0 * t).cos(),
                (5.0 * t).sin(),
            ]);
            labels.push(y);
        }
        let names = vec!["a".into(), "b".into(), "noise".into()];
        let d = Dataset::new(rows, labels, names).unwrap();
        let idx_train: Vec<usize> = (0..40).filter(|i| i % 5 != 0).collect();
        let idx_test: Vec<usize> = (0..40).filter(|i| i % 5 == 0).collect();
        (d.select_rows(&idx_train).unwrap(), d.select_rows(&idx_test).unwrap())
    }

    #[test]
    fn empty_coalition_is_zero_without_training() {
        let (train, test) = split();
        let ev = GameEvaluator::new(&train, &test).unwrap();
        for spec in [GameSpec::auc(), GameSpec::auprc(), GameSpec::new(Target::RocSlice(0.3), Strategy::Optimistic)] {
            assert_eq!(ev.payoff(&spec, Coalition::EMPTY).unwrap(), 0.0);
        }
        assert_eq!(ev.trainings(), 0);
    }

    #[test]
    fn full_table_and_model_reuse() {
        let (train, test) = split();
        let ev = GameEvaluator::new(&train, &test).unwrap();
        let t = ev.evaluate_all(&GameSpec::auc()).unwrap();
        assert_eq!(t.values().len(), 8);
        assert_eq!(t.get(Coalition::EMPTY), 0.0);
        assert_eq!(ev.trainings(), 7);
        let again = ev.evaluate_all(&GameSpec::auc()).unwrap();
        assert_eq!(t, again);
        let _ = ev.evaluate_slices(CurveKind::Roc, &[0.0, 0.5, 1.0], Strategy::Pessimistic).unwrap();
        assert_eq!(ev.trainings(), 7);
    }

    #[test]
    fn payoff_ranges() {
        let (train, test) = split();
        let ev = GameEvaluator::new(&train, &test).unwrap();
        for t in ev.evaluate_slices(CurveKind::Roc, &[0.0, 1.0], Strategy::Interpolation).unwrap() {
            assert!(t.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        for spec in [GameSpec::auc(), GameSpec::auprc()] {
            let t = ev.evaluate_all(&spec).unwrap();
            assert!(t.values().iter().all(|v| (-0.5..=0.5).contains(v)));
        }
    }

    #[test]
    fn single_slice_matches_direct_payoff() {
        let (train, test) = split();
        let ev = GameEvaluator::new(&train, &test).unwrap();
        let spec = GameSpec::new(Target::RocSlice(0.2), Strategy::Interpolation);
        let direct = ev.evaluate_all(&spec).unwrap();
        let sliced = ev.evaluate_slices(CurveKind::Roc, &[0.2], Strategy::Interpolation).unwrap();
        assert_eq!(sliced.len(), 1);
        assert_eq!(sliced[0], direct);
        let grand = ev.curves(Coalition::full(3)).unwrap();
        assert_eq!(direct.grand(), grand.roc.estimate_tpr(0.2, Strategy::Interpolation) - 0.2);
    }

    #[test]
    fn cap_enforced() {
        let (train, test) = split();
        let ev = GameEvaluator::new(&train, &test).unwrap().with_exact_cap(2);
        assert!(matches!(
            ev.evaluate_all(&GameSpec::auc()),
            Err(Error::TooManyFeaturesForExactMode { features: 3, cap: 2 })
        ));
    }

    #[test]
    fn smallest_game() {
        let (train, test) = split();
        let (train, test) = (
            train.project(Coalition::singleton(0)).unwrap(),
            test.project(Coalition::singleton(0)).unwrap(),
        );
        let ev = GameEvaluator::new(&train, &test).unwrap();
        let t = ev.evaluate_all(&GameSpec::auc()).unwrap();
        assert_eq!(t.values().len(), 2);
        assert_eq!(t.values()[1], ev.curves(Coalition::singleton(0)).unwrap().roc.auc() - 0.5);
    }

    #[test]
    fn invalid_slice_rejected() {
        let (train, test) = split();
        let ev = GameEvaluator::new(&train, &test).unwrap();
        let spec = GameSpec::new(Target::RocSlice(1.5), Strategy::Interpolation);
        assert!(matches!(ev.payoff(&spec, Coalition::singleton(0)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn table_validation() {
        let names = vec!["x".to_string(), "y".to_string()];
        assert!(matches!(
            PayoffTable::from_values(names.clone(), None, vec![0.0, 1.0, 2.0]),
            Err(Error::IncompleteTable { expected: 4, found: 3 })
        ));
        assert!(PayoffTable::from_values(names, None, vec![0.1, 1.0, 2.0, 3.0]).is_err());
    }
}
