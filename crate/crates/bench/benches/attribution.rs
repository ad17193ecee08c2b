use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robshap::{
    default_grid, shapley_exact, Classifier, CurveKind, Dataset, GameEvaluator, GameSpec, GaussianNb, PayoffTable,
    RocCurve, SplitSpec, Strategy,
};

fn dataset(rows: usize, features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let y = if i < 2 { i as u8 } else { rng.gen_range(0..2u8) };
        data.push((0..features).map(|j| y as f64 / (j + 1) as f64 + rng.gen_range(-1.0..1.0)).collect());
        labels.push(y);
    }
    let names = (0..features).map(|j| format!("x{j}")).collect();
    Dataset::new(data, labels, names).unwrap()
}

fn roc_sweep(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scores: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
    let labels: Vec<u8> = (0..10_000).map(|i| (i % 3 == 0) as u8).collect();
    c.bench_function("roc_from_scores_10k", |b| {
        b.iter(|| RocCurve::from_scores(black_box(&scores), black_box(&labels)).unwrap())
    });
}

fn exact_shapley(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [10usize, 16] {
        let names = (0..n).map(|i| format!("p{i}")).collect();
        let table = PayoffTable::from_fn(names, None, |c| if c.is_empty() { 0.0 } else { rng.gen() }).unwrap();
        c.bench_function(&format!("shapley_exact_n{n}"), |b| b.iter(|| shapley_exact(black_box(&table)).unwrap()));
    }
}

fn gnb_training(c: &mut Criterion) {
    let d = dataset(1372, 4, 3);
    c.bench_function("gnb_fit_score_1372x4", |b| {
        b.iter(|| GaussianNb::default().fit(black_box(&d)).unwrap().score(&d).unwrap())
    });
}

fn full_game(c: &mut Criterion) {
    let d = dataset(1372, 4, 4);
    let (train, test) = d.split(&SplitSpec::new(0.8, 0)).unwrap();
    c.bench_function("evaluate_all_auc_n4", |b| {
        b.iter_batched(
            || GameEvaluator::new(&train, &test).unwrap(),
            |ev| ev.evaluate_all(&GameSpec::auc()).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let grid = default_grid();
    c.bench_function("evaluate_slices_roc_n4_101", |b| {
        b.iter_batched(
            || GameEvaluator::new(&train, &test).unwrap(),
            |ev| ev.evaluate_slices(CurveKind::Roc, &grid, Strategy::Interpolation).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, roc_sweep, exact_shapley, gnb_training, full_game);
criterion_main!(benches);
