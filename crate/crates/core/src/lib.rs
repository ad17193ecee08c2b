//! Shapley-value attribution of ROC and precision-recall robustness metrics
//! to the input features of a binary classifier.
//!
//! Each feature subset (coalition) gets its own model, trained on the same
//! split; the payoff of a coalition is how far its metric rises above that
//! of a random classifier. Shapley values then split the full model's gain
//! among the features.
//!
//! ```
//! use robshap::{Dataset, GameEvaluator, GameSpec, SplitSpec, shapley_exact};
//!
//! let rows: Vec<Vec<f64>> = (0..40)
//!     .map(|i| vec![(i % 2) as f64 + 0.1 * (i % 7) as f64, (i % 5) as f64])
//!     .collect();
//! let labels: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
//! let d = Dataset::new(rows, labels, vec!["a".into(), "b".into()]).unwrap();
//! let (train, test) = d.split(&SplitSpec::new(0.8, 7)).unwrap();
//! let ev = GameEvaluator::new(&train, &test).unwrap();
//! let table = ev.evaluate_all(&GameSpec::auc()).unwrap();
//! let attr = shapley_exact(&table).unwrap();
//! assert!((attr.sum() - table.grand()).abs() < 1e-9);
//! ```

pub mod coalition;
pub mod curves;
pub mod dataset;
pub mod error;
pub mod game;
pub mod model;
pub mod report;
pub mod shapley;
pub mod uncertainty;

pub use coalition::{Coalition, MAX_PLAYERS};
pub use curves::{default_grid, trapezoid, trapezoid_xy, uniform_grid, PrCurve, RocCurve, Strategy};
pub use dataset::{Dataset, ImbalanceSpec, SplitSpec};
pub use error::{Error, Result};
pub use game::{CoalitionCurves, CurveKind, GameEvaluator, GameSpec, PayoffTable, Target, DEFAULT_EXACT_CAP};
pub use model::{Classifier, GaussianNb, ScoreVector, Scorer, TrainedModel};
pub use report::{PlotDocument, WaterfallSpec};
pub use shapley::{
    all_permutations, auc_roc_consistency, sample_permutations, shapley_curve, shapley_exact, shapley_sampled,
    shapley_sampled_over, shapley_weights, Attribution, CurveAttribution,
};
pub use uncertainty::{
    mc_attributions, mc_curves, BandedSeries, McAttribution, McConfig, McCurves, McTarget,
};
