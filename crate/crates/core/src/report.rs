//! Inter-coder reliability and rendering of the summary tables as CSV and
//! markdown.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Stage, StageCounts};
use crate::error::{Error, Result};
use crate::preprocess::TokenStats;
use crate::topics::{CellStatus, TopicGrid};

/// Labels per annotator, keyed by tweet id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    pub annotators: BTreeMap<String, BTreeMap<String, Category>>,
}

impl AnnotationSet {
    /// Wide CSV: `id,<annotator>,<annotator>,...`; an empty cell means the
    /// annotator skipped the item.
    pub fn parse_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::parse(1, e))?.clone();
        if headers.get(0) != Some("id") || headers.len() < 2 {
            return Err(Error::parse(1, "expected header `id,<annotator>,...`"));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut annotators: BTreeMap<String, BTreeMap<String, Category>> =
            names.iter().map(|n| (n.clone(), BTreeMap::new())).collect();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(line, e))?;
            let id = rec.get(0).unwrap_or_default().to_string();
            for (name, cell) in names.iter().zip(rec.iter().skip(1)) {
                if cell.is_empty() {
                    continue;
                }
                let code: i64 = cell
                    .parse()
                    .map_err(|_| Error::parse(line, format!("label `{cell}` is not an integer")))?;
                let labels = annotators.get_mut(name).expect("annotator from header");
                if labels.insert(id.clone(), Category::from_code(code)?).is_some() {
                    return Err(Error::DuplicateId(id.clone()));
                }
            }
        }
        Ok(AnnotationSet { annotators })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    pub annotators: Vec<String>,
    /// Symmetric agreement matrix with ones on the diagonal.
    pub pairwise: Vec<Vec<f64>>,
    pub overall: f64,
}

/// Fraction of shared items with identical labels, per annotator pair, and
/// the mean over pairs.
pub fn intercoder_reliability(set: &AnnotationSet) -> Result<Reliability> {
    let names: Vec<&String> = set.annotators.keys().collect();
    if names.len() < 2 {
        return Err(Error::Config("reliability needs at least two annotators".into()));
    }
    let n = names.len();
    let mut pairwise = vec![vec![1.0; n]; n];
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            let la = &set.annotators[names[a]];
            let lb = &set.annotators[names[b]];
            let (mut shared, mut agree) = (0usize, 0usize);
            for (id, ca) in la {
                if let Some(cb) = lb.get(id) {
                    shared += 1;
                    agree += usize::from(ca == cb);
                }
            }
            if shared == 0 {
                return Err(Error::Config(format!(
                    "annotators `{}` and `{}` share no items",
                    names[a], names[b]
                )));
            }
            let value = agree as f64 / shared as f64;
            pairwise[a][b] = value;
            pairwise[b][a] = value;
            sum += value;
            pairs += 1;
        }
    }
    Ok(Reliability {
        annotators: names.into_iter().cloned().collect(),
        pairwise,
        overall: sum / pairs as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub technique: String,
    /// Percent.
    pub accuracy: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub category: Category,
    pub stage: Stage,
    pub topic: usize,
    pub rank: usize,
    pub word: String,
    pub probability: f64,
}

fn csv_string<F>(header: &[&str], rows: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    rows(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn csv_records(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let found = rdr.headers().map_err(|e| Error::parse(1, e))?;
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::parse(1, format!("expected header `{}`", header.join(","))));
    }
    rdr.records()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::parse(i + 2, e)))
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    rec.get(i)
        .ok_or_else(|| Error::parse(line, format!("missing column {i}")))?
        .parse()
        .map_err(|e: T::Err| Error::parse(line, e))
}

fn category_by_name(name: &str, line: usize) -> Result<Category> {
    Category::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::parse(line, format!("unknown category `{name}`")))
}

fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}|", header.iter().map(|_| "---").collect::<Vec<_>>().join("|"));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out
}

const COMPARISON_HEADER: [&str; 3] = ["technique", "accuracy", "f1"];

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    csv_string(&COMPARISON_HEADER, |w| {
        for r in rows {
            w.write_record([r.technique.clone(), r.accuracy.to_string(), r.f1.to_string()])?;
        }
        Ok(())
    })
}

pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    csv_records(text, &COMPARISON_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(ComparisonRow {
                technique: r.get(0).unwrap_or_default().to_string(),
                accuracy: field(r, 1, i + 2)?,
                f1: field(r, 2, i + 2)?,
            })
        })
        .collect()
}

pub fn comparison_markdown(rows: &[ComparisonRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.technique.clone(), format!("{:.2}", r.accuracy), format!("{:.2}", r.f1)])
        .collect();
    markdown_table(&["Technique", "Accuracy(%)", "F1-score"], &body)
}

const COUNTS_HEADER: [&str; 5] = ["category", "total", "S1", "S2", "S3"];

/// Four racist categories × (total, S1, S2, S3).
pub fn counts_csv(counts: &StageCounts) -> String {
    csv_string(&COUNTS_HEADER, |w| {
        for c in Category::RACIST {
            let row = counts.cells[c.code()];
            w.write_record([
                c.name().to_string(),
                counts.total(c).to_string(),
                row[0].to_string(),
                row[1].to_string(),
                row[2].to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Recovers the count cells; totals are checked against the row sums.
pub fn parse_counts_csv(text: &str) -> Result<[[usize; 3]; 4]> {
    let records = csv_records(text, &COUNTS_HEADER)?;
    if records.len() != 4 {
        return Err(Error::parse(1, format!("expected 4 rows, found {}", records.len())));
    }
    let mut cells = [[0usize; 3]; 4];
    for (i, r) in records.iter().enumerate() {
        let line = i + 2;
        let c = category_by_name(r.get(0).unwrap_or_default(), line)?;
        if !c.is_racist() {
            return Err(Error::parse(line, "non-racist row in counts table"));
        }
        let total: usize = field(r, 1, line)?;
        for s in 0..3 {
            cells[c.code()][s] = field(r, s + 2, line)?;
        }
        if cells[c.code()].iter().sum::<usize>() != total {
            return Err(Error::parse(line, "total does not match stage counts"));
        }
    }
    Ok(cells)
}

pub fn counts_markdown(counts: &StageCounts) -> String {
    let body: Vec<Vec<String>> = Category::RACIST
        .iter()
        .map(|&c| {
            let row = counts.cells[c.code()];
            vec![
                c.name().to_string(),
                counts.total(c).to_string(),
                row[0].to_string(),
                row[1].to_string(),
                row[2].to_string(),
            ]
        })
        .collect();
    markdown_table(&["Category", "Total", "S1", "S2", "S3"], &body)
}

const TOPICS_HEADER: [&str; 6] = ["category", "stage", "topic", "rank", "word", "probability"];

pub fn topic_rows(grid: &TopicGrid) -> Vec<TopicRow> {
    let mut rows = Vec::new();
    for cell in grid.cells.iter().filter(|c| c.status == CellStatus::Fitted) {
        for (t, cluster) in cell.clusters.iter().enumerate() {
            for (r, (w, p)) in cluster.top_words.iter().zip(&cluster.probabilities).enumerate() {
                rows.push(TopicRow {
                    category: cell.category,
                    stage: cell.stage,
                    topic: t + 1,
                    rank: r + 1,
                    word: w.clone(),
                    probability: *p,
                });
            }
        }
    }
    rows
}

pub fn topics_csv(rows: &[TopicRow]) -> String {
    csv_string(&TOPICS_HEADER, |w| {
        for r in rows {
            w.write_record([
                r.category.name().to_string(),
                r.stage.name().to_string(),
                r.topic.to_string(),
                r.rank.to_string(),
                r.word.clone(),
                r.probability.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn parse_topics_csv(text: &str) -> Result<Vec<TopicRow>> {
    csv_records(text, &TOPICS_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 2;
            Ok(TopicRow {
                category: category_by_name(r.get(0).unwrap_or_default(), line)?,
                stage: r.get(1).unwrap_or_default().parse()?,
                topic: field(r, 2, line)?,
                rank: field(r, 3, line)?,
                word: r.get(4).unwrap_or_default().to_string(),
                probability: field(r, 5, line)?,
            })
        })
        .collect()
}

/// One grid per category: topics as rows, stages as columns, keywords
/// joined in each cell. Cells without a fitted model show `?`.
pub fn topics_markdown(grid: &TopicGrid, category: Category, n_topics: usize) -> String {
    let mut body = Vec::with_capacity(n_topics);
    for t in 0..n_topics {
        let mut row = vec![format!("Topic {}", t + 1)];
        for s in Stage::ALL {
            let words = grid
                .cell(category, s)
                .and_then(|c| c.clusters.get(t))
                .map(|c| c.top_words.join(", "))
                .unwrap_or_else(|| "?".to_string());
            row.push(words);
        }
        body.push(row);
    }
    format!("### {}\n\n{}", category.name(), markdown_table(&["", "S1", "S2", "S3"], &body))
}

const DAILY_HEADER: [&str; 2] = ["date", "count"];

pub fn daily_csv(daily: &BTreeMap<NaiveDate, usize>) -> String {
    csv_string(&DAILY_HEADER, |w| {
        for (d, c) in daily {
            w.write_record([d.to_string(), c.to_string()])?;
        }
        Ok(())
    })
}

pub fn parse_daily_csv(text: &str) -> Result<BTreeMap<NaiveDate, usize>> {
    csv_records(text, &DAILY_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, r)| Ok((field(r, 0, i + 2)?, field(r, 1, i + 2)?)))
        .collect()
}

const STATS_HEADER: [&str; 2] = ["statistic", "value"];

pub fn token_stats_csv(stats: &TokenStats) -> String {
    csv_string(&STATS_HEADER, |w| {
        w.write_record(["min", &stats.min.to_string()])?;
        w.write_record(["max", &stats.max.to_string()])?;
        w.write_record(["median", &stats.median.to_string()])?;
        w.write_record(["mean", &stats.mean.to_string()])?;
        Ok(())
    })
}

pub fn parse_token_stats_csv(text: &str) -> Result<TokenStats> {
    let records = csv_records(text, &STATS_HEADER)?;
    let get = |name: &str| -> Result<&str> {
        records
            .iter()
            .find(|r| r.get(0) == Some(name))
            .and_then(|r| r.get(1))
            .ok_or_else(|| Error::parse(1, format!("missing statistic `{name}`")))
    };
    let int = |name: &str| -> Result<usize> { get(name)?.parse().map_err(|e| Error::parse(1, e)) };
    Ok(TokenStats {
        min: int("min")?,
        max: int("max")?,
        median: int("median")?,
        mean: get("mean")?.parse().map_err(|e| Error::parse(1, e))?,
    })
}

pub fn reliability_csv(rel: &Reliability) -> String {
    let mut header = vec!["annotator"];
    header.extend(rel.annotators.iter().map(String::as_str));
    csv_string(&header, |w| {
        for (name, row) in rel.annotators.iter().zip(&rel.pairwise) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(rec)?;
        }
        Ok(())
    })
}

/// Everything the full report needs. Each piece comes from a different
/// pipeline step.
#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    pub comparison: Option<Vec<ComparisonRow>>,
    pub counts: Option<StageCounts>,
    pub topics: Option<TopicGrid>,
    pub daily: Option<BTreeMap<NaiveDate, usize>>,
    pub token_stats: Option<TokenStats>,
}

fn required<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::MissingArtifact(name.to_string()))
}

/// Writes every table into `dir` and returns the paths written.
pub fn render_tables(inputs: &ReportInputs, dir: &Path) -> Result<Vec<PathBuf>> {
    let comparison = required(&inputs.comparison, "model comparison (cv/grid)")?;
    let counts = required(&inputs.counts, "stage counts (ingest/import-preds)")?;
    let topics = required(&inputs.topics, "topic grid (topics)")?;
    let daily = required(&inputs.daily, "daily counts (ingest)")?;
    let stats = required(&inputs.token_stats, "token length statistics (ingest)")?;

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<(String, String)> = vec![
        ("model_comparison.csv".into(), comparison_csv(comparison)),
        ("model_comparison.md".into(), comparison_markdown(comparison)),
        ("stage_counts.csv".into(), counts_csv(counts)),
        ("stage_counts.md".into(), counts_markdown(counts)),
        ("topics.csv".into(), topics_csv(&topic_rows(topics))),
        ("daily_counts.csv".into(), daily_csv(daily)),
        ("token_lengths.csv".into(), token_stats_csv(stats)),
    ];
    for c in Category::RACIST {
        files.push((
            format!("topics_{}.md", c.name().to_lowercase()),
            topics_markdown(topics, c, 5),
        ));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
