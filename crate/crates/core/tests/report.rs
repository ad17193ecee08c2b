use robshap::report::{self, csv};
use robshap::{
    shapley_curve, shapley_exact, uniform_grid, BandedSeries, CurveKind, Dataset, GameEvaluator, GameSpec, SplitSpec,
    Strategy,
};

fn data() -> Dataset {
    let rows: Vec<Vec<f64>> = (0..80)
        .map(|i| {
            let y = (i % 3 == 0) as u8 as f64;
            let t = i as f64 * 0.7;
            vec![y * 1.4 + t.sin(), y * 0.5 + (1.3 * t).cos(), (2.1 * t).sin()]
        })
        .collect();
    let labels = (0..80).map(|i| (i % 3 == 0) as u8).collect();
    let d = Dataset::new(rows, labels, vec!["a".into(), "b".into(), "c".into()]).unwrap();
    d.duplicate_feature(0, "a_copy").unwrap()
}

/// Parses the document and checks every number in it is finite.
fn well_formed(svg: &str) {
    let doc = roxmltree::Document::parse(svg).unwrap_or_else(|e| panic!("{e}\n{svg}"));
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    for node in doc.descendants().filter(|n| n.is_element()) {
        for attr in node.attributes() {
            for token in attr.value().split([' ', ',']) {
                if let Ok(v) = token.parse::<f64>() {
                    assert!(v.is_finite(), "{}={}", attr.name(), attr.value());
                }
            }
            assert!(!attr.value().contains("NaN"), "{}={}", attr.name(), attr.value());
        }
    }
}

#[test]
fn every_chart_is_valid_svg() {
    let d = data();
    let (train, test) = d.split(&SplitSpec::new(0.75, 1)).unwrap();
    let ev = GameEvaluator::new(&train, &test).unwrap();
    let attr = shapley_exact(&ev.evaluate_all(&GameSpec::auc()).unwrap()).unwrap();
    well_formed(&report::render_waterfall(&report::waterfall(&attr), "AUC <& \"quoted\">").unwrap());

    for grid in [uniform_grid(21).unwrap(), vec![0.5]] {
        let ca = shapley_curve(&ev.evaluate_slices(CurveKind::Roc, &grid, Strategy::Interpolation).unwrap()).unwrap();
        let doc = report::contribution_curves(&ca);
        assert_eq!(doc.series.len(), 5);
        well_formed(&doc.to_svg());
        well_formed(&report::relative_contributions(&ca).to_svg());
    }

    let b = BandedSeries { abscissae: vec![0.0, 0.5, 1.0], mean: vec![0.2, 0.9, 1.0], std: vec![0.0, 0.3, 0.1], iterations: 3 };
    well_formed(&report::banded_plot(&b, "ROC", "tpr", true).to_svg());
    well_formed(&report::whisker_chart(&attr.feature_names, &attr.values, &[0.01; 4], "spread"));
    let roc = ev.curves(robshap::Coalition::full(4)).unwrap();
    well_formed(&report::curve_plot(roc.roc.points(), "ROC", "fpr", "tpr").to_svg());
}

#[test]
fn duplicated_feature_series_coincide() {
    let d = data();
    let (train, test) = d.split(&SplitSpec::new(0.75, 2)).unwrap();
    let ev = GameEvaluator::new(&train, &test).unwrap();
    let ca = shapley_curve(&ev.evaluate_slices(CurveKind::Roc, &uniform_grid(11).unwrap(), Strategy::Optimistic).unwrap())
        .unwrap();
    let doc = report::contribution_curves(&ca);
    for (p, q) in doc.series[0].points.iter().zip(&doc.series[3].points) {
        let (p, q) = (p.unwrap(), q.unwrap());
        assert!((p.1 - q.1).abs() <= 1e-9);
    }
}

#[test]
fn zero_std_band_collapses_to_line() {
    let b = BandedSeries { abscissae: vec![0.0, 1.0], mean: vec![0.3, 0.6], std: vec![0.0, 0.0], iterations: 2 };
    let doc = report::banded_plot(&b, "t", "y", true);
    assert_eq!(doc.bands[0].lower, doc.bands[0].upper);
    assert_eq!(doc.bands[0].upper, b.mean);
}

#[test]
fn csv_round_trips_to_twelve_digits() {
    let d = data();
    let (train, test) = d.split(&SplitSpec::new(0.75, 3)).unwrap();
    let ev = GameEvaluator::new(&train, &test).unwrap();
    let ca = shapley_curve(&ev.evaluate_slices(CurveKind::Prc, &uniform_grid(11).unwrap(), Strategy::Pessimistic).unwrap())
        .unwrap();
    let (header, rows) = csv::parse_numeric(&csv::curve_attribution(&ca), &[]).unwrap();
    assert_eq!(header[0], "recall");
    for (k, row) in rows.iter().enumerate() {
        for (i, s) in ca.series.iter().enumerate() {
            let (a, b) = (row[i + 1], s[k]);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
        }
    }

    let attr = shapley_exact(&ev.evaluate_all(&GameSpec::auprc()).unwrap()).unwrap();
    let (_, rows) = csv::parse_numeric(&csv::attribution(&attr), &["feature"]).unwrap();
    let back: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(back, attr.values);
}
