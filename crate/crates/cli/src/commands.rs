use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};

use robshap::report::{self, csv as rcsv};
use robshap::{
    shapley_curve, shapley_exact, shapley_sampled, uniform_grid, Attribution, Coalition, CurveAttribution,
    CurveKind, Dataset, GameEvaluator, GameSpec, ImbalanceSpec, McConfig, McTarget, PayoffTable, SplitSpec,
    Strategy, Target,
};

use crate::args::{AreaKind, Command, Common, McKind, RunManifest};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag value or combination.
    Usage(String),
    Lib(robshap::Error),
    Write { path: PathBuf, source: std::io::Error },
}

impl From<robshap::Error> for CliError {
    fn from(e: robshap::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(robshap::Error::UnknownFeature(_) | robshap::Error::InvalidParameter(_)) => 2,
            CliError::Lib(e) if e.is_data_error() => 3,
            CliError::Lib(_) => 4,
            CliError::Write { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "InvalidArgument",
            CliError::Lib(e) => e.kind(),
            CliError::Write { .. } => "Io",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Write { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Output directory that remembers what was written.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_owned(), source })?;
        Ok(Outputs { dir: dir.to_owned(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Write { path, source })?;
        self.written.push(name.to_owned());
        Ok(())
    }
}

fn in_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(usage(format!("--{name} must lie in [0, 1], got {v}")))
    }
}

fn validate(cmd: &Command) -> Result<()> {
    let c = cmd.common();
    if !(c.train_fraction > 0.0 && c.train_fraction < 1.0) {
        return Err(usage(format!("--train-fraction must lie in (0, 1), got {}", c.train_fraction)));
    }
    if c.grid < 2 {
        return Err(usage(format!("--grid needs at least 2 points, got {}", c.grid)));
    }
    if let Some(p) = c.imbalance {
        if !(p > 0.0 && p < 1.0) {
            return Err(usage(format!("--imbalance must lie in (0, 1), got {p}")));
        }
    }
    if c.sampled == Some(0) {
        return Err(usage("--sampled needs at least one permutation"));
    }
    if c.exact_cap > robshap::MAX_PLAYERS {
        return Err(usage(format!("--exact-cap cannot exceed {}", robshap::MAX_PLAYERS)));
    }
    match cmd {
        Command::ExplainRoc { fpr: Some(x), .. } => in_unit("fpr", *x),
        Command::ExplainPrc { recall: Some(x), .. } => in_unit("recall", *x),
        Command::Uncertainty { iterations, .. } if *iterations < 2 => {
            Err(usage(format!("--iterations must be at least 2, got {iterations}")))
        }
        Command::Uncertainty { common, .. } if common.sampled.is_some() => {
            Err(usage("uncertainty runs exact games only; drop --sampled"))
        }
        Command::FeatureSelect { drop, .. } if drop.is_empty() => Err(usage("--drop needs at least one feature")),
        _ => Ok(()),
    }
}

fn load(c: &Common) -> Result<Dataset> {
    let d = Dataset::load_csv(&c.input, &c.label)?;
    info!("loaded {} rows, {} features from {}", d.n_rows(), d.n_features(), c.input.display());
    match c.imbalance {
        Some(p) => {
            let sub = d.subsample_imbalance(&ImbalanceSpec::new(p, c.seed))?;
            info!("sub-sampled to {} rows ({} positive)", sub.n_rows(), sub.positive_count());
            Ok(sub)
        }
        None => Ok(d),
    }
}

fn split(d: &Dataset, c: &Common) -> Result<(Dataset, Dataset)> {
    Ok(d.split(&SplitSpec::new(c.train_fraction, c.seed))?)
}

fn evaluator<'a>(train: &'a Dataset, test: &'a Dataset, c: &Common) -> Result<GameEvaluator<'a>> {
    Ok(GameEvaluator::new(train, test)?.with_exact_cap(c.exact_cap))
}

fn attribute(ev: &GameEvaluator<'_>, spec: &GameSpec, c: &Common) -> Result<(Attribution, Option<PayoffTable>)> {
    match c.sampled {
        Some(n) => Ok((shapley_sampled(ev, spec, n, c.seed)?, None)),
        None => {
            let table = ev.evaluate_all(spec)?;
            for (coalition, why) in table.warnings() {
                warn!("coalition {coalition:?} scored at baseline: {why}");
            }
            Ok((shapley_exact(&table)?, Some(table)))
        }
    }
}

fn attribute_curve(ev: &GameEvaluator<'_>, kind: CurveKind, grid: &[f64], c: &Common) -> Result<CurveAttribution> {
    let strategy = Strategy::from(c.strategy);
    let Some(samples) = c.sampled else {
        return Ok(shapley_curve(&ev.evaluate_slices(kind, grid, strategy)?)?);
    };
    let mut series = vec![Vec::with_capacity(grid.len()); ev.n_features()];
    let (mut reference, mut baselines) = (Vec::new(), Vec::new());
    for &x in grid {
        let spec = GameSpec::new(kind.slice(x), strategy);
        let a = shapley_sampled(ev, &spec, samples, c.seed)?;
        for (s, v) in series.iter_mut().zip(&a.values) {
            s.push(*v);
        }
        reference.push(ev.payoff_or_baseline(&spec, Coalition::full(ev.n_features()))?.0);
        baselines.push(a.baseline);
    }
    Ok(CurveAttribution {
        kind,
        abscissae: grid.to_vec(),
        feature_names: ev.feature_names().to_vec(),
        series,
        reference,
        baselines,
    })
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn signed_pct(v: f64) -> String {
    format!("{:+.2}%", 100.0 * v)
}

struct Summary(String);

impl Summary {
    fn new(cmd: &Command, d: &Dataset, split: Option<(&Dataset, &Dataset)>) -> Self {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", cmd.name());
        let _ = writeln!(
            s,
            "rows: {} ({} positive), features: {}",
            d.n_rows(),
            d.positive_count(),
            d.n_features()
        );
        if let Some((train, test)) = split {
            let _ = writeln!(s, "split: {} train, {} test", train.n_rows(), test.n_rows());
        }
        let c = cmd.common();
        let mode = c.sampled.map_or_else(|| "exact".to_owned(), |n| format!("sampled ({n} permutations)"));
        let _ = writeln!(s, "shapley: {mode}");
        Summary(s)
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.0.push_str(text.as_ref());
        self.0.push('\n');
    }

    fn attribution(&mut self, title: &str, a: &Attribution) {
        let label = a.game.map_or_else(|| "metric".to_owned(), |g| g.target.label());
        self.line(format!("{title}{label}: {} (baseline {})", pct(a.total), pct(a.baseline)));
        if let Some((top, _)) = a.ranked().first() {
            self.line(format!("{title}top feature: {top}"));
        }
        let width = a.feature_names.iter().map(String::len).max().unwrap_or(0);
        for (name, v) in a.ranked() {
            self.line(format!("  {name:<width$}  {}", signed_pct(v)));
        }
    }
}

fn area_spec(kind: AreaKind) -> GameSpec {
    match kind {
        AreaKind::Auc => GameSpec::auc(),
        AreaKind::Auprc => GameSpec::auprc(),
    }
}

/// Metric (including the baseline) of the full model of `ev`.
fn full_curve(ev: &GameEvaluator<'_>, kind: CurveKind) -> Result<(Vec<(f64, f64)>, f64)> {
    let curves = ev.curves(Coalition::full(ev.n_features()))?;
    Ok(match kind {
        CurveKind::Roc => (curves.roc.points().to_vec(), curves.roc.auc()),
        CurveKind::Prc => (curves.pr.points().to_vec(), curves.pr.auprc()),
    })
}

fn write_curve(out: &mut Outputs, ev: &GameEvaluator<'_>, kind: CurveKind) -> Result<()> {
    let (points, _) = full_curve(ev, kind)?;
    let (title, xl, yl) = match kind {
        CurveKind::Roc => ("ROC curve", "fpr", "tpr"),
        CurveKind::Prc => ("Precision-recall curve", "recall", "precision"),
    };
    out.write("curve.csv", rcsv::curve_points(&points, xl, yl))?;
    out.write("curve.svg", report::curve_plot(&points, title, xl, yl).to_svg())
}

fn write_attribution(out: &mut Outputs, prefix: &str, a: &Attribution, table: Option<&PayoffTable>) -> Result<()> {
    out.write(&format!("{prefix}attribution.csv"), rcsv::attribution(a))?;
    let title = a.game.map_or_else(|| "Attribution".to_owned(), |g| format!("{} attribution", g.target.label()));
    out.write(&format!("{prefix}waterfall.svg"), report::render_waterfall(&report::waterfall(a), &title)?)?;
    if let Some(t) = table {
        out.write(&format!("{prefix}payoffs.csv"), rcsv::payoff_table(t))?;
    }
    Ok(())
}

/// Runs `cmd`, writing every artifact plus `manifest.json` and
/// `summary.txt` into the output directory. Returns the summary text.
pub fn run(cmd: &Command) -> Result<String> {
    validate(cmd)?;
    let mut cmd = cmd.clone();
    // Recorded absolute so a manifest can be re-run from anywhere.
    if let Ok(abs) = fs::canonicalize(&cmd.common().input) {
        cmd.common_mut().input = abs;
    }
    let cmd = &cmd;
    let c = cmd.common();
    let d = load(c)?;
    let mut out = Outputs::create(&c.out)?;
    let manifest = serde_json::to_string_pretty(&RunManifest::new(cmd.clone())).expect("manifest serializes");
    out.write("manifest.json", manifest + "\n")?;

    let summary = match cmd {
        Command::ExplainAuc { .. } | Command::ExplainAuprc { .. } => {
            let kind = if matches!(cmd, Command::ExplainAuc { .. }) { AreaKind::Auc } else { AreaKind::Auprc };
            let (train, test) = split(&d, c)?;
            let ev = evaluator(&train, &test, c)?;
            let (a, table) = attribute(&ev, &area_spec(kind), c)?;
            write_attribution(&mut out, "", &a, table.as_ref())?;
            write_curve(&mut out, &ev, if kind == AreaKind::Auc { CurveKind::Roc } else { CurveKind::Prc })?;
            let mut s = Summary::new(cmd, &d, Some((&train, &test)));
            s.attribution("", &a);
            s
        }
        Command::ExplainRoc { fpr, .. } => curve_command(cmd, &d, &mut out, CurveKind::Roc, *fpr)?,
        Command::ExplainPrc { recall, .. } => curve_command(cmd, &d, &mut out, CurveKind::Prc, *recall)?,
        Command::Uncertainty { iterations, target, .. } => uncertainty(cmd, &d, &mut out, *iterations, *target)?,
        Command::FeatureSelect { drop, target, .. } => feature_select(cmd, &d, &mut out, drop, *target)?,
        Command::Duplicate { feature, new_name, target, .. } => {
            let index = d.feature_index(feature)?;
            let name = new_name.clone().unwrap_or_else(|| format!("{feature}_dup"));
            let dup = d.duplicate_feature(index, &name)?;
            let (train, test) = split(&dup, c)?;
            let ev = evaluator(&train, &test, c)?;
            let (a, table) = attribute(&ev, &area_spec(*target), c)?;
            write_attribution(&mut out, "", &a, table.as_ref())?;
            let (orig, copy) = (a.values[index], a.values[dup.n_features() - 1]);
            let mut s = Summary::new(cmd, &dup, Some((&train, &test)));
            s.attribution("", &a);
            s.line(format!("{feature}: {}, {name}: {}, |difference| {:e}", pct(orig), pct(copy), (orig - copy).abs()));
            s
        }
    };

    let mut text = summary.0;
    let _ = writeln!(text, "outputs: {}, summary.txt", out.written.join(", "));
    out.write("summary.txt", &text)?;
    Ok(text)
}

fn curve_command(cmd: &Command, d: &Dataset, out: &mut Outputs, kind: CurveKind, at: Option<f64>) -> Result<Summary> {
    let c = cmd.common();
    let grid = uniform_grid(c.grid)?;
    let (train, test) = split(d, c)?;
    let ev = evaluator(&train, &test, c)?;
    let ca = attribute_curve(&ev, kind, &grid, c)?;
    out.write("contributions.csv", rcsv::curve_attribution(&ca))?;
    out.write("contributions.svg", report::contribution_curves(&ca).to_svg())?;
    out.write("relative.svg", report::relative_contributions(&ca).to_svg())?;
    write_curve(out, &ev, kind)?;

    let mut s = Summary::new(cmd, d, Some((&train, &test)));
    let (_, area) = full_curve(&ev, kind)?;
    let area_name = if kind == CurveKind::Roc { "AUC" } else { "AUPRC" };
    s.line(format!("{area_name}: {}", pct(area)));
    s.line(format!("strategy: {}, grid: {} points", Strategy::from(c.strategy), grid.len()));
    s.line("integrated contribution over the grid:");
    for (name, series) in ca.feature_names.iter().zip(&ca.series) {
        s.line(format!("  {name}  {}", signed_pct(robshap::trapezoid_xy(&grid, series))));
    }
    if let Some(x) = at {
        let spec = GameSpec::new(kind.slice(x), Strategy::from(c.strategy));
        let (a, table) = attribute(&ev, &spec, c)?;
        write_attribution(out, "slice_", &a, table.as_ref())?;
        s.attribution("slice ", &a);
    }
    Ok(s)
}

fn uncertainty(cmd: &Command, d: &Dataset, out: &mut Outputs, iterations: usize, kind: McKind) -> Result<Summary> {
    let c = cmd.common();
    let cfg = McConfig {
        iterations,
        base_seed: c.seed,
        train_fraction: c.train_fraction,
        grid: uniform_grid(c.grid)?,
        exact_cap: c.exact_cap,
    };
    let strategy = Strategy::from(c.strategy);
    let include_pr = matches!(kind, McKind::Auprc | McKind::Prc);
    let curves = robshap::mc_curves(d, &cfg, include_pr)?;
    out.write("roc_band.csv", rcsv::banded(&curves.roc))?;
    out.write("roc_band.svg", report::banded_plot(&curves.roc, "ROC over iterations", "tpr", true).to_svg())?;
    if let Some(pr) = &curves.pr {
        out.write("pr_band.csv", rcsv::banded(pr))?;
        out.write("pr_band.svg", report::banded_plot(pr, "Precision-recall over iterations", "precision", true).to_svg())?;
    }

    let target = match kind {
        McKind::Auc => McTarget::Auc,
        McKind::Auprc => McTarget::Auprc,
        McKind::Roc => McTarget::Curve(CurveKind::Roc, strategy),
        McKind::Prc => McTarget::Curve(CurveKind::Prc, strategy),
    };
    let attr = robshap::mc_attributions(d, &cfg, target)?;
    out.write("attribution_mc.csv", rcsv::mc_attribution(&attr))?;
    let title = format!("Contributions over {iterations} iterations (mean ± std)");
    out.write("whiskers.svg", report::whisker_chart(&attr.feature_names, &attr.mean, &attr.std, &title))?;
    if let Some(bands) = &attr.bands {
        out.write("feature_bands.csv", rcsv::banded_many(&attr.feature_names, bands))?;
        let x_label = if kind == McKind::Roc { "fpr" } else { "recall" };
        if let Some(doc) = report::feature_bands(&attr, x_label) {
            out.write("feature_bands.svg", doc.to_svg())?;
        }
    }

    let mut s = Summary::new(cmd, d, None);
    let mean_std = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
        format!("{} ± {}", pct(m), pct(sd))
    };
    s.line(format!("iterations: {iterations}, base seed: {}", c.seed));
    s.line(format!("AUC: {}", mean_std(&curves.auc)));
    if let Some(a) = &curves.auprc {
        s.line(format!("AUPRC: {}", mean_std(a)));
    }
    s.line("per-feature contribution (mean ± std):");
    for (i, name) in attr.feature_names.iter().enumerate() {
        s.line(format!("  {name}  {} ± {}", signed_pct(attr.mean[i]), pct(attr.std[i])));
    }
    Ok(s)
}

fn feature_select(cmd: &Command, d: &Dataset, out: &mut Outputs, drop: &[String], kind: AreaKind) -> Result<Summary> {
    let c = cmd.common();
    let dropped = d.coalition_of(drop)?;
    let kept = Coalition::full(d.n_features()).bits() & !dropped.bits();
    if kept == 0 {
        return Err(usage("cannot drop every feature"));
    }
    let kept = Coalition::from_bits(kept);
    let spec = area_spec(kind);
    let (train, test) = split(d, c)?;

    let ev = evaluator(&train, &test, c)?;
    let (full, table) = attribute(&ev, &spec, c)?;
    write_attribution(out, "full_", &full, table.as_ref())?;

    let (rtrain, rtest) = (train.project(kept)?, test.project(kept)?);
    let rev = evaluator(&rtrain, &rtest, c)?;
    let (reduced, rtable) = attribute(&rev, &spec, c)?;
    write_attribution(out, "reduced_", &reduced, rtable.as_ref())?;

    let mut s = Summary::new(cmd, d, Some((&train, &test)));
    s.attribution("full ", &full);
    s.attribution("reduced ", &reduced);
    let label = match spec.target {
        Target::Auc => "AUC",
        _ => "AUPRC",
    };
    s.line(format!("dropped: {}", drop.join(", ")));
    s.line(format!(
        "{label}: {} -> {} (delta {})",
        pct(full.total),
        pct(reduced.total),
        signed_pct(reduced.total - full.total)
    ));
    Ok(s)
}
