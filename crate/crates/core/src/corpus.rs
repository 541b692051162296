//! Tweet corpus ingestion, the category taxonomy and stage partitioning.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use chrono::{DateTime, Days, NaiveDate, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annotation categories with their fixed integer codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Stigmatization = 0,
    Offensiveness = 1,
    Blame = 2,
    Exclusion = 3,
    NonRacist = 4,
}

impl Category {
    pub const COUNT: usize = 5;

    pub const ALL: [Category; 5] = [
        Category::Stigmatization,
        Category::Offensiveness,
        Category::Blame,
        Category::Exclusion,
        Category::NonRacist,
    ];

    /// The four racist/xenophobic categories, in code order.
    pub const RACIST: [Category; 4] = [
        Category::Stigmatization,
        Category::Offensiveness,
        Category::Blame,
        Category::Exclusion,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            0 => Ok(Category::Stigmatization),
            1 => Ok(Category::Offensiveness),
            2 => Ok(Category::Blame),
            3 => Ok(Category::Exclusion),
            4 => Ok(Category::NonRacist),
            other => Err(Error::InvalidCategory(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Stigmatization => "Stigmatization",
            Category::Offensiveness => "Offensiveness",
            Category::Blame => "Blame",
            Category::Exclusion => "Exclusion",
            Category::NonRacist => "NonRacist",
        }
    }

    pub fn is_racist(self) -> bool {
        self != Category::NonRacist
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three date-bounded phases of the study period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    S1,
    S2,
    S3,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::S1, Stage::S2, Stage::S3];

    /// Inclusive calendar-date window.
    pub fn window(self) -> (NaiveDate, NaiveDate) {
        let d = |m, day| NaiveDate::from_ymd_opt(2020, m, day).expect("valid date");
        match self {
            Stage::S1 => (d(1, 1), d(1, 31)),
            Stage::S2 => (d(2, 1), d(3, 11)),
            Stage::S3 => (d(3, 12), d(4, 30)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::S1 => "S1",
            Stage::S2 => "S2",
            Stage::S3 => "S3",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S1" | "s1" => Ok(Stage::S1),
            "S2" | "s2" => Ok(Stage::S2),
            "S3" | "s3" => Ok(Stage::S3),
            other => Err(Error::Config(format!("unknown stage `{other}`"))),
        }
    }
}

/// First and last day of the study range.
pub fn study_range() -> (NaiveDate, NaiveDate) {
    (Stage::S1.window().0, Stage::S3.window().1)
}

pub fn assign_stage_date(date: NaiveDate) -> Result<Stage> {
    Stage::ALL
        .into_iter()
        .find(|s| {
            let (lo, hi) = s.window();
            lo <= date && date <= hi
        })
        .ok_or(Error::OutOfRange(date))
}

/// Stage of a timestamp, compared on its UTC calendar date.
pub fn assign_stage(t: DateTime<Utc>) -> Result<Stage> {
    assign_stage_date(t.date_naive())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub hashtags: Vec<String>,
}

impl Tweet {
    /// Builds a tweet whose hashtags are extracted from the text.
    pub fn new(id: impl Into<String>, text: impl Into<String>, created_at: DateTime<Utc>) -> Self {
        let text = text.into();
        let hashtags = extract_hashtags(&text);
        Tweet {
            id: id.into(),
            text,
            created_at,
            hashtags,
        }
    }

    pub fn stage(&self) -> Result<Stage> {
        assign_stage(self.created_at)
    }

    pub fn has_hashtag(&self, tag: &str) -> bool {
        self.hashtags.iter().any(|h| h == tag)
    }
}

fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#(\w+)").expect("valid regex"))
}

/// `#` followed by a maximal run of word characters, lowercased.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    hashtag_re()
        .captures_iter(text)
        .map(|c| c[1].to_lowercase())
        .collect()
}

fn normalize_hashtag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

#[derive(Debug, Deserialize)]
struct RawTweet {
    id: String,
    text: String,
    created_at: String,
    #[serde(default)]
    hashtags: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    labels: BTreeMap<String, Category>,
}

impl Corpus {
    /// Checks id uniqueness.
    pub fn new(tweets: Vec<Tweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if t.id.is_empty() {
                return Err(Error::Config("empty tweet id".into()));
            }
            if !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId(t.id.clone()));
            }
        }
        Ok(Corpus {
            tweets,
            labels: BTreeMap::new(),
        })
    }

    /// Attaches gold labels; every key must name a tweet in the corpus.
    pub fn with_labels(mut self, labels: BTreeMap<String, Category>) -> Result<Self> {
        let ids: HashSet<&str> = self.tweets.iter().map(|t| t.id.as_str()).collect();
        if let Some(bad) = labels.keys().find(|k| !ids.contains(k.as_str())) {
            return Err(Error::UnknownId(bad.clone()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn labels(&self) -> &BTreeMap<String, Category> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Tweet> {
        self.tweets.iter().find(|t| t.id == id)
    }

    /// Tweets carrying a label, paired with it, in corpus order.
    pub fn labeled(&self) -> Vec<(&Tweet, Category)> {
        self.tweets
            .iter()
            .filter_map(|t| self.labels.get(&t.id).map(|&c| (t, c)))
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.tweets {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn parse_corpus<R: Read>(reader: R) -> Result<Corpus> {
    let mut tweets = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(line_no, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTweet = serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e))?;
        if raw.id.is_empty() {
            return Err(Error::parse(line_no, "empty id"));
        }
        let created_at = DateTime::parse_from_rfc3339(&raw.created_at)
            .map_err(|e| Error::parse(line_no, format!("created_at `{}`: {e}", raw.created_at)))?
            .with_timezone(&Utc);
        let hashtags = match raw.hashtags {
            Some(tags) => tags.iter().map(|t| normalize_hashtag(t)).collect(),
            None => extract_hashtags(&raw.text),
        };
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId(raw.id));
        }
        tweets.push(Tweet {
            id: raw.id,
            text: raw.text,
            created_at,
            hashtags,
        });
    }
    Ok(Corpus {
        tweets,
        labels: BTreeMap::new(),
    })
}

/// Reads a JSON-lines corpus.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(file)
}

/// Parses an `id,label` CSV. Shared by gold labels and imported predictions.
pub fn parse_labels<R: Read>(reader: R) -> Result<BTreeMap<String, Category>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(1, e))?.clone();
    if headers.len() < 2 || &headers[0] != "id" || &headers[1] != "label" {
        return Err(Error::parse(1, "expected header `id,label`"));
    }
    let mut map = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e))?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let raw = rec.get(1).unwrap_or_default();
        let code: i64 = raw
            .parse()
            .map_err(|_| Error::parse(line, format!("label `{raw}` is not an integer")))?;
        let cat = Category::from_code(code)?;
        if map.insert(id.clone(), cat).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(map)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, Category>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_labels(file)
}

pub fn write_labels<W: Write>(labels: &BTreeMap<String, Category>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Config(e.to_string());
    w.write_record(["id", "label"]).map_err(csv_err)?;
    for (id, c) in labels {
        w.write_record([id.as_str(), &c.code().to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<labels>", e))?;
    Ok(())
}

/// Category × stage tweet counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    /// `cells[category][stage]` for the four racist categories.
    pub cells: [[usize; 3]; 4],
    pub non_racist: [usize; 3],
    /// Tweets without a label.
    pub unlabeled: usize,
    /// Labeled tweets dated outside the study range.
    pub out_of_range: usize,
}

impl StageCounts {
    pub fn row(&self, c: Category) -> Option<[usize; 3]> {
        c.is_racist().then(|| self.cells[c.code()])
    }

    pub fn total(&self, c: Category) -> usize {
        match c {
            Category::NonRacist => self.non_racist.iter().sum(),
            _ => self.cells[c.code()].iter().sum(),
        }
    }

    pub fn racist_total(&self) -> usize {
        self.cells.iter().flatten().sum()
    }
}

pub fn stage_category_counts(corpus: &Corpus, labels: &BTreeMap<String, Category>) -> StageCounts {
    let mut counts = StageCounts::default();
    for t in corpus.tweets() {
        let Some(&cat) = labels.get(&t.id) else {
            counts.unlabeled += 1;
            continue;
        };
        let Ok(stage) = t.stage() else {
            counts.out_of_range += 1;
            continue;
        };
        match cat {
            Category::NonRacist => counts.non_racist[stage.index()] += 1,
            c => counts.cells[c.code()][stage.index()] += 1,
        }
    }
    counts
}

/// Tweets per calendar day. Every date in the study range is present; dates
/// outside it appear only when a tweet falls on them.
pub fn daily_counts(corpus: &Corpus) -> BTreeMap<NaiveDate, usize> {
    let (start, end) = study_range();
    let mut map = BTreeMap::new();
    let mut d = start;
    while d <= end {
        map.insert(d, 0);
        d = d + Days::new(1);
    }
    for t in corpus.tweets() {
        *map.entry(t.created_at.date_naive()).or_insert(0) += 1;
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn extracts_and_lowercases_hashtags() {
        let c = parse_corpus(
            r#"{"id":"1","text":"x #ChinaVirus","created_at":"2020-01-05T00:00:00Z"}"#.as_bytes(),
        )
        .unwrap();
        assert_eq!(c.tweets()[0].hashtags, vec!["chinavirus"]);
    }

    #[test]
    fn explicit_hashtags_are_normalized() {
        let c = parse_corpus(
            r##"{"id":"1","text":"x","created_at":"2020-01-05T00:00:00Z","hashtags":["#China_Is_Terrorist"]}"##
                .as_bytes(),
        )
        .unwrap();
        assert_eq!(c.tweets()[0].hashtags, vec!["china_is_terrorist"]);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        assert!(parse_corpus("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let input = "{\"id\":\"7\",\"text\":\"a\",\"created_at\":\"2020-01-05T00:00:00Z\"}\n\
                     {\"id\":\"7\",\"text\":\"b\",\"created_at\":\"2020-01-06T00:00:00Z\"}\n";
        match parse_corpus(input.as_bytes()) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "7"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "{\"id\":\"1\",\"text\":\"a\",\"created_at\":\"2020-01-05T00:00:00Z\"}\nnot json\n";
        match parse_corpus(input.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn offsets_are_normalized_to_utc() {
        let c = parse_corpus(
            r#"{"id":"1","text":"a","created_at":"2020-03-12T01:00:00+05:00"}"#.as_bytes(),
        )
        .unwrap();
        assert_eq!(c.tweets()[0].stage().unwrap(), Stage::S2);
    }

    #[test]
    fn stage_boundaries() {
        assert_eq!(assign_stage(ts("2020-01-15T12:00:00Z")).unwrap(), Stage::S1);
        assert_eq!(assign_stage(ts("2020-03-11T23:59:59Z")).unwrap(), Stage::S2);
        assert_eq!(assign_stage(ts("2020-03-12T00:00:00Z")).unwrap(), Stage::S3);
        assert!(matches!(
            assign_stage(ts("2019-12-31T23:59:59Z")),
            Err(Error::OutOfRange(_))
        ));
        assert!(assign_stage_date(date(2020, 5, 1)).is_err());
    }

    #[test]
    fn labels_parse_and_validate() {
        let m = parse_labels("id,label\n42,0\n".as_bytes()).unwrap();
        assert_eq!(m["42"], Category::Stigmatization);
        assert!(matches!(
            parse_labels("id,label\n42,5\n".as_bytes()),
            Err(Error::InvalidCategory(5))
        ));
        assert!(parse_labels("id,label\n".as_bytes()).unwrap().is_empty());
        assert!(matches!(
            parse_labels("id,label\n1,0\n1,2\n".as_bytes()),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn labels_must_reference_corpus() {
        let corpus = Corpus::new(vec![Tweet::new("1", "a", ts("2020-01-02T00:00:00Z"))]).unwrap();
        let mut labels = BTreeMap::new();
        labels.insert("2".to_string(), Category::Blame);
        assert!(matches!(corpus.with_labels(labels), Err(Error::UnknownId(_))));
    }

    #[test]
    fn single_blame_tweet_counts() {
        let corpus = Corpus::new(vec![
            Tweet::new("1", "a", ts("2020-02-10T00:00:00Z")),
            Tweet::new("2", "b", ts("2020-02-11T00:00:00Z")),
        ])
        .unwrap();
        let mut labels = BTreeMap::new();
        labels.insert("1".to_string(), Category::Blame);
        let counts = stage_category_counts(&corpus, &labels);
        assert_eq!(counts.row(Category::Blame), Some([0, 1, 0]));
        assert_eq!(counts.total(Category::Blame), 1);
        assert_eq!(counts.unlabeled, 1);
        assert_eq!(counts.row(Category::NonRacist), None);
    }

    #[test]
    fn daily_counts_cover_range() {
        let corpus = Corpus::new(
            (0..3)
                .map(|i| Tweet::new(i.to_string(), "x", ts("2020-01-02T10:00:00Z")))
                .collect(),
        )
        .unwrap();
        let daily = daily_counts(&corpus);
        assert_eq!(daily.len(), 121);
        assert_eq!(daily[&date(2020, 1, 2)], 3);
        assert_eq!(daily.values().sum::<usize>(), 3);

        let empty = daily_counts(&Corpus::default());
        assert!(empty.values().all(|&c| c == 0));
    }
}
