//! Aggregation of metric records along analysis axes, and table rendering.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::BugInstance;
use crate::evalkit::MetricRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Overall,
    Language,
    Category,
    Subtype,
    TokenBucket,
    ErrorCount,
}

impl Axis {
    pub const ALL: [Axis; 6] =
        [Axis::Overall, Axis::Language, Axis::Category, Axis::Subtype, Axis::TokenBucket, Axis::ErrorCount];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Overall => "overall",
            Axis::Language => "language",
            Axis::Category => "category",
            Axis::Subtype => "subtype",
            Axis::TokenBucket => "token_bucket",
            Axis::ErrorCount => "error_count",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s.replace('-', "_"))
            .ok_or_else(|| format!("unknown axis {s:?}"))
    }
}

/// Upper bounds (exclusive) of the token buckets; the last bucket is open.
pub const TOKEN_BOUNDS: [usize; 5] = [500, 1000, 2000, 5000, 10000];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BucketMode {
    /// Each instance lands in exactly one bucket.
    #[default]
    Disjoint,
    /// `<N` holds every instance below N.
    Cumulative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub group_key: String,
    pub n: usize,
    pub bi: f64,
    pub obl: f64,
    pub abl: f64,
    pub es: f64,
    pub em: f64,
    pub pass1: Option<f64>,
    /// Records contributing to `pass1`.
    pub pass1_n: usize,
    pub parse_failures: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("metric record refers to unknown instance {0}")]
    UnknownInstance(String),
}

/// Group keys for one instance, with a sort ordinal each.
fn groups(inst: &BugInstance, axis: Axis, mode: BucketMode) -> Vec<(u64, String)> {
    match axis {
        Axis::Overall => vec![(0, "all".into())],
        Axis::Language => vec![(0, inst.language.name().into())],
        Axis::Category => vec![(inst.category as u64, inst.category.name().into())],
        Axis::Subtype => vec![(inst.subtype_index.into(), format!("{:02} {}", inst.subtype_index, inst.subtype_name))],
        Axis::ErrorCount => vec![(inst.locations.len() as u64, inst.locations.len().to_string())],
        Axis::TokenBucket => {
            let t = inst.token_count;
            let mut out: Vec<(u64, String)> = TOKEN_BOUNDS
                .iter()
                .enumerate()
                .filter(|(i, &b)| match mode {
                    BucketMode::Cumulative => t < b,
                    BucketMode::Disjoint => t < b && (*i == 0 || t >= TOKEN_BOUNDS[i - 1]),
                })
                .map(|(i, b)| (i as u64, format!("<{b}")))
                .collect();
            if t >= TOKEN_BOUNDS[TOKEN_BOUNDS.len() - 1] {
                out.push((TOKEN_BOUNDS.len() as u64, format!(">={}", TOKEN_BOUNDS[TOKEN_BOUNDS.len() - 1])));
            }
            out
        }
    }
}

#[derive(Default)]
struct Acc {
    n: usize,
    bi: f64,
    obl: f64,
    abl: f64,
    es: f64,
    em: f64,
    pass1: f64,
    pass1_n: usize,
    parse_failures: usize,
}

/// Means ×100 per group, rows in group order.
pub fn aggregate(
    records: &[MetricRecord],
    instances: &[BugInstance],
    axis: Axis,
    mode: BucketMode,
) -> Result<Vec<AggregateRow>, ReportError> {
    let by_id: HashMap<&str, &BugInstance> = instances.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut accs: BTreeMap<(u64, String), Acc> = BTreeMap::new();
    for r in records {
        let inst = by_id
            .get(r.instance_id.as_str())
            .ok_or_else(|| ReportError::UnknownInstance(r.instance_id.clone()))?;
        for key in groups(inst, axis, mode) {
            let a = accs.entry(key).or_default();
            a.n += 1;
            a.bi += f64::from(r.bi);
            a.obl += f64::from(r.obl);
            a.abl += f64::from(r.abl);
            a.es += r.es;
            a.em += r.em;
            if let Some(p) = r.pass1 {
                a.pass1 += f64::from(p);
                a.pass1_n += 1;
            }
            a.parse_failures += usize::from(r.parse_failed);
        }
    }
    Ok(accs
        .into_iter()
        .map(|((_, group_key), a)| {
            let mean = |sum: f64| 100.0 * sum / a.n as f64;
            AggregateRow {
                group_key,
                n: a.n,
                bi: mean(a.bi),
                obl: mean(a.obl),
                abl: mean(a.abl),
                es: mean(a.es),
                em: mean(a.em),
                pass1: (a.pass1_n > 0).then(|| 100.0 * a.pass1 / a.pass1_n as f64),
                pass1_n: a.pass1_n,
                parse_failures: a.parse_failures,
            }
        })
        .collect())
}

/// Combines shard results by count-weighted means. Groups keep first-seen order.
pub fn merge_rows(shards: &[Vec<AggregateRow>]) -> Vec<AggregateRow> {
    let mut order: Vec<String> = Vec::new();
    let mut merged: HashMap<String, AggregateRow> = HashMap::new();
    for row in shards.iter().flatten() {
        match merged.get_mut(&row.group_key) {
            None => {
                order.push(row.group_key.clone());
                merged.insert(row.group_key.clone(), row.clone());
            }
            Some(m) => {
                let (n0, n1) = (m.n as f64, row.n as f64);
                let w = |a: f64, b: f64| (a * n0 + b * n1) / (n0 + n1);
                m.bi = w(m.bi, row.bi);
                m.obl = w(m.obl, row.obl);
                m.abl = w(m.abl, row.abl);
                m.es = w(m.es, row.es);
                m.em = w(m.em, row.em);
                m.pass1 = match (m.pass1, row.pass1) {
                    (Some(a), Some(b)) => {
                        let (p0, p1) = (m.pass1_n as f64, row.pass1_n as f64);
                        Some((a * p0 + b * p1) / (p0 + p1))
                    }
                    (a, b) => a.or(b),
                };
                m.n += row.n;
                m.pass1_n += row.pass1_n;
                m.parse_failures += row.parse_failures;
            }
        }
    }
    order.into_iter().map(|k| merged.remove(&k).expect("key recorded")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Markdown => "md",
            TableFormat::Csv => "csv",
        }
    }
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

const HEADER: [&str; 9] = ["group", "n", "bi", "obl", "abl", "es", "em", "pass1", "parse_failures"];

fn cells(row: &AggregateRow) -> [String; 9] {
    [
        row.group_key.clone(),
        row.n.to_string(),
        format!("{:.2}", row.bi),
        format!("{:.2}", row.obl),
        format!("{:.2}", row.abl),
        format!("{:.2}", row.es),
        format!("{:.2}", row.em),
        row.pass1.map(|p| format!("{p:.2}")).unwrap_or_else(|| "-".into()),
        row.parse_failures.to_string(),
    ]
}

pub fn render_table(rows: &[AggregateRow], format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => {
            let mut out = format!("| {} |\n|---|{}\n", HEADER.join(" | "), "---:|".repeat(HEADER.len() - 1));
            for row in rows {
                out.push_str(&format!("| {} |\n", cells(row).join(" | ")));
            }
            out
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(HEADER).expect("in-memory write");
            for row in rows {
                w.write_record(cells(row)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::tests::{types_instance, two_line_instance};
    use proptest::prelude::*;

    fn record(id: &str, bi: u8, es: f64) -> MetricRecord {
        MetricRecord {
            instance_id: id.into(),
            bi,
            obl: 1,
            abl: bi,
            es,
            em: if es == 1.0 { 1.0 } else { 0.0 },
            pass1: None,
            parse_failed: false,
            oracle_error: None,
        }
    }

    fn corpus(tokens: &[usize]) -> Vec<BugInstance> {
        tokens
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut inst = if i % 3 == 0 { two_line_instance() } else { types_instance() };
                inst.id = format!("i{i}");
                inst.token_count = t;
                inst
            })
            .collect()
    }

    #[test]
    fn group_mean() {
        let xs = corpus(&[10, 20]);
        let rs = vec![record("i0", 1, 1.0), record("i1", 0, 0.0)];
        let rows = aggregate(&rs, &xs, Axis::Overall, BucketMode::Disjoint).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].n, rows[0].es, rows[0].bi), (2, 50.0, 50.0));
        assert_eq!(render_table(&rows, TableFormat::Markdown).lines().nth(2).unwrap(),
            "| all | 2 | 50.00 | 100.00 | 50.00 | 50.00 | 50.00 | - | 0 |");
    }

    #[test]
    fn unknown_instance_is_named() {
        let err = aggregate(&[record("ghost", 1, 1.0)], &[], Axis::Language, BucketMode::Disjoint).unwrap_err();
        assert_eq!(err, ReportError::UnknownInstance("ghost".into()));
    }

    #[test]
    fn token_buckets() {
        let xs = corpus(&[0, 499, 500, 999, 1999, 4999, 9999, 10000, 250000]);
        let rs: Vec<MetricRecord> = xs.iter().map(|i| record(&i.id, 1, 1.0)).collect();
        let rows = aggregate(&rs, &xs, Axis::TokenBucket, BucketMode::Disjoint).unwrap();
        let got: Vec<(&str, usize)> = rows.iter().map(|r| (r.group_key.as_str(), r.n)).collect();
        assert_eq!(got, [("<500", 2), ("<1000", 2), ("<2000", 1), ("<5000", 1), ("<10000", 1), (">=10000", 2)]);
        let rows = aggregate(&rs, &xs, Axis::TokenBucket, BucketMode::Cumulative).unwrap();
        let got: Vec<usize> = rows.iter().map(|r| r.n).collect();
        assert_eq!(got, [2, 4, 5, 6, 7, 2]);
    }

    #[test]
    fn error_count_and_subtype_axes() {
        let xs = corpus(&[1, 2, 3, 4]);
        let rs: Vec<MetricRecord> = xs.iter().map(|i| record(&i.id, 0, 0.5)).collect();
        let rows = aggregate(&rs, &xs, Axis::ErrorCount, BucketMode::Disjoint).unwrap();
        assert_eq!(rows.iter().map(|r| r.group_key.as_str()).collect::<Vec<_>>(), ["1", "2"]);
        let rows = aggregate(&rs, &xs, Axis::Subtype, BucketMode::Disjoint).unwrap();
        assert_eq!(rows[0].group_key, "13 wrong function call");
        assert_eq!(rows[1].group_key, "20 double bugs");
        assert!(rows.iter().all(|r| r.obl >= r.abl));
    }

    #[test]
    fn render_shapes() {
        assert_eq!(render_table(&[], TableFormat::Markdown).lines().count(), 2);
        assert_eq!(render_table(&[], TableFormat::Csv), "group,n,bi,obl,abl,es,em,pass1,parse_failures\n");
        let xs = corpus(&[5]);
        let rows = aggregate(&[record("i0", 1, 1.0)], &xs, Axis::Language, BucketMode::Disjoint).unwrap();
        let text = render_table(&rows, TableFormat::Csv);
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let recs: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 1);
        assert_eq!(&recs[0][0], "Python");
        assert_eq!(&recs[0][5], "100.00");
    }

    proptest! {
        #[test]
        fn shards_merge_to_whole(
            scores in prop::collection::vec((0u8..2, 0.0f64..=1.0, 1usize..20000, prop::option::of(0u8..2)), 1..60),
            cut in 0usize..60,
        ) {
            let tokens: Vec<usize> = scores.iter().map(|s| s.2).collect();
            let xs = corpus(&tokens);
            let rs: Vec<MetricRecord> = scores
                .iter()
                .enumerate()
                .map(|(i, &(bi, es, _, p))| MetricRecord { pass1: p, ..record(&format!("i{i}"), bi, es) })
                .collect();
            let cut = cut.min(rs.len());
            for axis in Axis::ALL {
                let whole = aggregate(&rs, &xs, axis, BucketMode::Disjoint).unwrap();
                let a = aggregate(&rs[..cut], &xs, axis, BucketMode::Disjoint).unwrap();
                let b = aggregate(&rs[cut..], &xs, axis, BucketMode::Disjoint).unwrap();
                let mut merged = merge_rows(&[a, b]);
                merged.sort_by_key(|r| whole.iter().position(|w| w.group_key == r.group_key));
                prop_assert_eq!(merged.len(), whole.len());
                for (m, w) in merged.iter().zip(&whole) {
                    prop_assert_eq!(&m.group_key, &w.group_key);
                    prop_assert_eq!(m.n, w.n);
                    for (x, y) in [(m.bi, w.bi), (m.obl, w.obl), (m.abl, w.abl), (m.es, w.es), (m.em, w.em)] {
                        prop_assert!((x - y).abs() < 1e-9);
                    }
                    prop_assert_eq!(m.pass1.is_some(), w.pass1.is_some());
                    if let (Some(x), Some(y)) = (m.pass1, w.pass1) {
                        prop_assert!((x - y).abs() < 1e-9);
                    }
                }
                // permutation invariance
                let mut rev = rs.clone();
                rev.reverse();
                let flipped = aggregate(&rev, &xs, axis, BucketMode::Disjoint).unwrap();
                for (f, w) in flipped.iter().zip(&whole) {
                    prop_assert!((f.es - w.es).abs() < 1e-9 && f.n == w.n);
                }
            }
            // grand mean equals the count-weighted mean of group means
            let all = aggregate(&rs, &xs, Axis::Overall, BucketMode::Disjoint).unwrap();
            let groups = aggregate(&rs, &xs, Axis::TokenBucket, BucketMode::Disjoint).unwrap();
            let weighted: f64 = groups.iter().map(|g| g.es * g.n as f64).sum::<f64>() / rs.len() as f64;
            prop_assert!((weighted - all[0].es).abs() < 1e-9);
        }
    }
}
