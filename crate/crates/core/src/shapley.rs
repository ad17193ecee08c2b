//! Shapley values of coalition games: exact enumeration over a complete
//! payoff table, and a permutation-sampling estimator for larger games.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coalition::Coalition;
use crate::curves::trapezoid_xy;
use crate::error::{Error, Result};
use crate::game::{CurveKind, GameEvaluator, GameSpec, PayoffTable, Target};

/// Smallest grid accepted by [`auc_roc_consistency`].
pub const MIN_CONSISTENCY_GRID: usize = 11;

/// Per-feature contributions to one metric value.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    pub feature_names: Vec<String>,
    /// Shapley value per feature, in dataset column order.
    pub values: Vec<f64>,
    /// Metric value of the random classifier.
    pub baseline: f64,
    /// `baseline + sum(values)`: the metric reached by all features together.
    pub total: f64,
    pub game: Option<GameSpec>,
}

impl Attribution {
    fn new(feature_names: Vec<String>, values: Vec<f64>, game: Option<GameSpec>) -> Self {
        let baseline = game.map_or(0.0, |g| g.target.baseline());
        let total = baseline + values.iter().sum::<f64>();
        Attribution { feature_names, values, baseline, total, game }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.feature_names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// (name, value) pairs by decreasing absolute value; ties keep column order.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self
            .feature_names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
            .collect();
        v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        v
    }
}

/// Shapley values at every abscissa of a slicing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveAttribution {
    pub kind: CurveKind,
    pub abscissae: Vec<f64>,
    pub feature_names: Vec<String>,
    /// `series[i][k]`: contribution of feature `i` at `abscissae[k]`.
    pub series: Vec<Vec<f64>>,
    /// Grand-coalition payoff (metric minus baseline) at each abscissa.
    pub reference: Vec<f64>,
    /// Random-classifier value at each abscissa.
    pub baselines: Vec<f64>,
}

impl CurveAttribution {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// Metric value reached by all features at grid point `k`.
    pub fn metric(&self, k: usize) -> f64 {
        self.baselines[k] + self.reference[k]
    }

    /// Slice of the curve attribution at grid point `k`.
    pub fn at(&self, k: usize, strategy: crate::curves::Strategy) -> Attribution {
        let values = self.series.iter().map(|s| s[k]).collect();
        let game = GameSpec::new(self.kind.slice(self.abscissae[k]), strategy);
        Attribution::new(self.feature_names.clone(), values, Some(game))
    }
}

/// Weight of a coalition of size `s` in the Shapley sum over `n` players:
/// `s! (n - s - 1)! / n!`, for `s` in `0..n`.
pub fn shapley_weights(n: usize) -> Vec<f64> {
    // s!(n-s-1)!/n! == 1 / (n * C(n-1, s))
    let mut binom = 1.0_f64;
    (0..n)
        .map(|s| {
            if s > 0 {
                binom = binom * (n - s) as f64 / s as f64;
            }
            1.0 / (n as f64 * binom)
        })
        .collect()
}

/// Exact Shapley values from a complete payoff table.
pub fn shapley_exact(table: &PayoffTable) -> Result<Attribution> {
    let n = table.n_players();
    let values = table.values();
    if values.len() != 1usize << n {
        return Err(Error::IncompleteTable { expected: 1 << n, found: values.len() });
    }
    let weights = shapley_weights(n);
    let mut phi = vec![0.0; n];
    for (bits, &v) in values.iter().enumerate() {
        let c = Coalition::from_bits(bits as u64);
        let w = match weights.get(c.len()) {
            Some(&w) => w,
            None => continue, // grand coalition has no outside player
        };
        for (i, p) in phi.iter_mut().enumerate() {
            if !c.contains(i) {
                *p += w * (values[bits | (1 << i)] - v);
            }
        }
    }
    Ok(Attribution::new(table.feature_names().to_vec(), phi, table.game()))
}

/// Average marginal contribution of each player over the given orderings.
///
/// Every permutation must list each of the `names.len()` players once.
pub fn shapley_over_permutations<P, F>(
    names: Vec<String>,
    game: Option<GameSpec>,
    permutations: &[P],
    mut value: F,
) -> Result<Attribution>
where
    P: AsRef<[usize]>,
    F: FnMut(Coalition) -> Result<f64>,
{
    let n = names.len();
    if permutations.is_empty() {
        return Err(Error::InvalidParameter("at least one permutation is required".into()));
    }
    let mut sums = vec![0.0; n];
    for perm in permutations {
        let perm = perm.as_ref();
        if perm.len() != n || Coalition::from_indices(perm.iter().copied()) != Coalition::full(n) {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of {n} players")));
        }
        let mut coalition = Coalition::EMPTY;
        let mut prev = 0.0;
        for &i in perm {
            coalition = coalition.with(i);
            let v = value(coalition)?;
            sums[i] += v - prev;
            prev = v;
        }
    }
    let m = permutations.len() as f64;
    let phi = sums.into_iter().map(|s| s / m).collect();
    Ok(Attribution::new(names, phi, game))
}

/// `samples` uniformly random orderings of `n` players.
pub fn sample_permutations(n: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect()
}

/// Every ordering of `n` players, in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(k) = (1..n).rev().find(|&k| p[k - 1] < p[k]).map(|k| k - 1) else {
            return out;
        };
        let l = (k + 1..n).rev().find(|&l| p[k] < p[l]).expect("successor exists");
        p.swap(k, l);
        p[k + 1..].reverse();
    }
}

/// Permutation-sampling estimate of the Shapley values of `spec` on the
/// evaluator's split. Payoffs are memoized across permutations.
pub fn shapley_sampled(ev: &GameEvaluator<'_>, spec: &GameSpec, samples: usize, seed: u64) -> Result<Attribution> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    spec.target.validate()?;
    let perms = sample_permutations(ev.n_features(), samples, seed);
    shapley_sampled_over(ev, spec, &perms)
}

/// Like [`shapley_sampled`], with caller-supplied orderings.
pub fn shapley_sampled_over(ev: &GameEvaluator<'_>, spec: &GameSpec, perms: &[Vec<usize>]) -> Result<Attribution> {
    let mut needed: Vec<Coalition> = perms
        .iter()
        .flat_map(|p| {
            p.iter().scan(Coalition::EMPTY, |c, &i| {
                *c = c.with(i);
                Some(*c)
            })
        })
        .collect();
    needed.sort_unstable();
    needed.dedup();
    ev.prefetch(&needed)?;
    shapley_over_permutations(ev.feature_names().to_vec(), Some(*spec), perms, |c| {
        ev.payoff_or_baseline(spec, c).map(|(v, _)| v)
    })
}

/// Exact Shapley values at every grid point of a family of slice games.
pub fn shapley_curve(tables: &[PayoffTable]) -> Result<CurveAttribution> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one slice table is required".into()))?;
    let slice_of = |t: &PayoffTable| match t.game().map(|g| g.target) {
        Some(target @ (Target::RocSlice(x) | Target::PrcSlice(x))) => Ok((target.kind(), x, target.baseline())),
        _ => Err(Error::InvalidParameter("curve attribution needs slice games".into())),
    };
    let (kind, _, _) = slice_of(first)?;
    let n = first.n_players();
    let mut abscissae = Vec::with_capacity(tables.len());
    let mut baselines = Vec::with_capacity(tables.len());
    let mut reference = Vec::with_capacity(tables.len());
    let mut series = vec![Vec::with_capacity(tables.len()); n];
    for t in tables {
        let (k, x, base) = slice_of(t)?;
        if k != kind || t.n_players() != n {
            return Err(Error::InvalidParameter("slice tables must share curve kind and players".into()));
        }
        let attr = shapley_exact(t)?;
        for (s, v) in series.iter_mut().zip(attr.values) {
            s.push(v);
        }
        abscissae.push(x);
        baselines.push(base);
        reference.push(t.grand());
    }
    Ok(CurveAttribution {
        kind,
        abscissae,
        feature_names: first.feature_names().to_vec(),
        series,
        reference,
        baselines,
    })
}

/// Per-feature gap between an area attribution and the trapezoidal integral
/// of the matching slice attribution over its grid.
pub fn auc_roc_consistency(area: &Attribution, curve: &CurveAttribution) -> Result<Vec<f64>> {
    if curve.len() < MIN_CONSISTENCY_GRID {
        return Err(Error::GridTooCoarse { points: curve.len(), min: MIN_CONSISTENCY_GRID });
    }
    if area.feature_names != curve.feature_names {
        return Err(Error::ShapeMismatch("attributions cover different features".into()));
    }
    Ok(curve
        .series
        .iter()
        .zip(&area.values)
        .map(|(s, &phi)| (trapezoid_xy(&curve.abscissae, s) - phi).abs())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn two_player_hand_example() {
        let t = PayoffTable::from_values(names(2), None, vec![0.0, 0.2, 0.1, 0.4]).unwrap();
        let a = shapley_exact(&t).unwrap();
        assert!((a.values[0] - 0.25).abs() < 1e-15);
        assert!((a.values[1] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_over_subsets_to_one() {
        for n in 1..=20 {
            let w = shapley_weights(n);
            // sum over coalitions not containing i: sum_s C(n-1, s) w[s] == 1
            let mut binom = 1.0;
            let mut total = 0.0;
            for (s, ws) in w.iter().enumerate() {
                if s > 0 {
                    binom = binom * (n - s) as f64 / s as f64;
                }
                total += binom * ws;
            }
            assert!((total - 1.0).abs() < 1e-12, "n={n}");
        }
        assert_eq!(shapley_weights(3), vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0]);
    }

    #[test]
    fn null_player_gets_zero() {
        // player 1 never changes the payoff
        let t = PayoffTable::from_fn(names(3), None, |c| {
            let c = c.without(1);
            0.1 * c.len() as f64 + if c.contains(0) && c.contains(2) { 0.05 } else { 0.0 }
        })
        .unwrap();
        let a = shapley_exact(&t).unwrap();
        assert_eq!(a.values[1], 0.0);
        assert!((a.sum() - t.grand()).abs() < 1e-12);
    }

    #[test]
    fn permutations_enumerated() {
        let p = all_permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(all_permutations(4).len(), 24);
        assert_eq!(all_permutations(1), vec![vec![0]]);
    }

    #[test]
    fn exhaustive_permutations_equal_exact() {
        let f = |c: Coalition| {
            let b = c.bits() as f64;
            (b * 0.37).sin() * 0.3 + c.len() as f64 * 0.05
        };
        let t = PayoffTable::from_fn(names(3), None, f).unwrap();
        let exact = shapley_exact(&t).unwrap();
        let perm = shapley_over_permutations(names(3), None, &all_permutations(3), |c| Ok(t.get(c))).unwrap();
        for (a, b) in exact.values.iter().zip(&perm.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_permutation_telescopes() {
        let t = PayoffTable::from_fn(names(4), None, |c| (c.bits() as f64).sqrt() / 10.0).unwrap();
        let perms = sample_permutations(4, 1, 9);
        let a = shapley_over_permutations(names(4), None, &perms, |c| Ok(t.get(c))).unwrap();
        assert!((a.sum() - t.grand()).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seeded() {
        assert_eq!(sample_permutations(5, 10, 3), sample_permutations(5, 10, 3));
        assert_ne!(sample_permutations(5, 10, 3), sample_permutations(5, 10, 4));
    }

    #[test]
    fn bad_permutation_rejected() {
        let r = shapley_over_permutations(names(3), None, &[vec![0, 0, 1]], |_| Ok(0.0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ranking_by_magnitude() {
        let t = PayoffTable::from_values(names(2), None, vec![0.0, -0.3, 0.1, -0.1]).unwrap();
        let a = shapley_exact(&t).unwrap();
        let r = a.ranked();
        assert_eq!(r[0].0, "p0");
        assert!(r[0].1 < 0.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let area = Attribution::new(names(1), vec![0.0], None);
        let curve = CurveAttribution {
            kind: CurveKind::Roc,
            abscissae: vec![0.0, 1.0],
            feature_names: names(1),
            series: vec![vec![0.0, 0.0]],
            reference: vec![0.0, 0.0],
            baselines: vec![0.0, 1.0],
        };
        assert!(matches!(
            auc_roc_consistency(&area, &curve),
            Err(Error::GridTooCoarse { points: 2, .. })
        ));
    }

    #[test]
    fn zero_game_is_consistent() {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let area = Attribution::new(names(2), vec![0.0, 0.0], None);
        let curve = CurveAttribution {
            kind: CurveKind::Roc,
            abscissae: grid.clone(),
            feature_names: names(2),
            series: vec![vec![0.0; 21], vec![0.0; 21]],
            reference: vec![0.0; 21],
            baselines: grid,
        };
        assert_eq!(auc_roc_consistency(&area, &curve).unwrap(), vec![0.0, 0.0]);
    }
}
