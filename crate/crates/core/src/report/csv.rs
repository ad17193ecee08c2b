//! CSV emitters for curves, tables and attributions. Every file has a header
//! row; floats are written in shortest round-trip form.

use crate::error::{Error, Result};
use crate::game::PayoffTable;
use crate::shapley::{Attribution, CurveAttribution};
use crate::uncertainty::{BandedSeries, McAttribution};

fn write_rows<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Two-column `x,y` listing of curve knots.
pub fn curve_points(points: &[(f64, f64)], x_name: &str, y_name: &str) -> String {
    write_rows(&[x_name, y_name], points.iter().map(|&(x, y)| [num(x), num(y)]))
}

/// `feature,value,percent` per feature, in column order.
pub fn attribution(attr: &Attribution) -> String {
    write_rows(
        &["feature", "value", "percent"],
        attr.feature_names
            .iter()
            .zip(&attr.values)
            .map(|(name, &v)| [name.clone(), num(v), num(v * 100.0)]),
    )
}

/// One row per grid point: abscissa, each feature's contribution, the
/// grand-coalition reference and the baseline.
pub fn curve_attribution(ca: &CurveAttribution) -> String {
    let x = ca.kind.x_label();
    let mut header: Vec<&str> = vec![x];
    header.extend(ca.feature_names.iter().map(String::as_str));
    header.extend(["reference", "baseline"]);
    write_rows(
        &header,
        (0..ca.len()).map(|k| {
            let mut row = vec![num(ca.abscissae[k])];
            row.extend(ca.series.iter().map(|s| num(s[k])));
            row.push(num(ca.reference[k]));
            row.push(num(ca.baselines[k]));
            row
        }),
    )
}

/// `abscissa,mean,std`.
pub fn banded(b: &BandedSeries) -> String {
    write_rows(
        &["abscissa", "mean", "std"],
        (0..b.abscissae.len()).map(|k| [num(b.abscissae[k]), num(b.mean[k]), num(b.std[k])]),
    )
}

/// Several bands over a shared grid: `abscissa` then `<name>_mean,<name>_std`
/// per series.
pub fn banded_many(names: &[String], bands: &[BandedSeries]) -> String {
    let cols: Vec<String> = names.iter().flat_map(|n| [format!("{n}_mean"), format!("{n}_std")]).collect();
    let mut header = vec!["abscissa"];
    header.extend(cols.iter().map(String::as_str));
    let len = bands.first().map_or(0, |b| b.abscissae.len());
    write_rows(
        &header,
        (0..len).map(|k| {
            let mut row = vec![num(bands[0].abscissae[k])];
            for b in bands {
                row.push(num(b.mean[k]));
                row.push(num(b.std[k]));
            }
            row
        }),
    )
}

/// `feature,mean,std` for a Monte-Carlo attribution run.
pub fn mc_attribution(a: &McAttribution) -> String {
    write_rows(
        &["feature", "mean", "std"],
        a.feature_names
            .iter()
            .enumerate()
            .map(|(i, name)| [name.clone(), num(a.mean[i]), num(a.std[i])]),
    )
}

/// Audit trail of a game: `bitmask,members,payoff` for every coalition.
pub fn payoff_table(t: &PayoffTable) -> String {
    let names = t.feature_names();
    write_rows(
        &["bitmask", "members", "payoff"],
        t.iter().map(|(c, v)| {
            let members: Vec<&str> = c.indices().map(|i| names[i].as_str()).collect();
            [c.bits().to_string(), members.join(";"), num(v)]
        }),
    )
}

/// Parses a headered CSV whose cells are all numeric except columns listed
/// in `text_columns`, which are skipped.
pub fn parse_numeric(text: &str, text_columns: &[&str]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let keep: Vec<usize> = (0..header.len())
        .filter(|&j| !text_columns.contains(&header[j].as_str()))
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = keep
            .iter()
            .map(|&j| {
                rec[j].parse::<f64>().map_err(|_| Error::NonNumericCell {
                    row: i + 1,
                    column: header[j].clone(),
                    value: rec[j].to_owned(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((keep.into_iter().map(|j| header[j].clone()).collect(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_table_lists_members() {
        let t = PayoffTable::from_values(vec!["a".into(), "b".into()], None, vec![0.0, 0.1, 0.2, 0.5]).unwrap();
        let s = payoff_table(&t);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "bitmask,members,payoff");
        assert_eq!(lines[1], "0,,0");
        assert_eq!(lines[4], "3,a;b,0.5");
    }

    #[test]
    fn curve_points_round_trip() {
        let pts = vec![(0.0, 0.0), (1.0 / 3.0, 0.7), (1.0, 1.0)];
        let (h, rows) = parse_numeric(&curve_points(&pts, "fpr", "tpr"), &[]).unwrap();
        assert_eq!(h, vec!["fpr", "tpr"]);
        assert_eq!(rows[1], vec![1.0 / 3.0, 0.7]);
    }
}
