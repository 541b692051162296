//! Text normalization.
//!
//! Two cleaning paths exist. [`clean_for_classification`] keeps hashtag words
//! and only strips the `#` mark, producing a single string for n-gram
//! features. [`clean_for_topics`] drops mentions and hashtags entirely and
//! returns stopword-filtered, lemmatized tokens for topic modelling.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
const LEMMAS_EN: &str = include_str!("../data/lemmas_en.tsv");

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").expect("valid regex"))
}

fn mention_or_hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[@#]\w+").expect("valid regex"))
}

fn is_punctuation(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

fn strip_punctuation(s: &str) -> String {
    s.chars().filter(|&c| !is_punctuation(c)).collect()
}

/// Removes URLs and punctuation, lowercases, and collapses whitespace.
pub fn clean_for_classification(text: &str) -> String {
    let no_urls = url_re().replace_all(text, " ");
    let lowered = no_urls.to_lowercase();
    let stripped = strip_punctuation(&lowered);
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub source_id: String,
    pub tokens: Vec<String>,
}

impl TokenizedDoc {
    pub fn new(source_id: impl Into<String>, tokens: Vec<String>) -> Self {
        TokenizedDoc {
            source_id: source_id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Stopwords and a surface-form to lemma table.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    pub stopwords: HashSet<String>,
    pub lemma_map: HashMap<String, String>,
}

impl Lexicon {
    /// The bundled English stopword list and lemma table.
    pub fn english() -> Self {
        Lexicon {
            stopwords: parse_stopwords(STOPWORDS_EN),
            lemma_map: parse_lemmas(LEMMAS_EN).expect("bundled lemma table is valid"),
        }
    }

    pub fn from_files(stopwords: impl AsRef<Path>, lemmas: impl AsRef<Path>) -> Result<Self> {
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
        Ok(Lexicon {
            stopwords: parse_stopwords(&read(stopwords.as_ref())?),
            lemma_map: parse_lemmas(&read(lemmas.as_ref())?)?,
        })
    }

    pub fn with_stopwords<S: AsRef<str>>(words: &[S]) -> Self {
        Lexicon {
            stopwords: words.iter().map(|w| w.as_ref().to_lowercase()).collect(),
            lemma_map: HashMap::new(),
        }
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }
}

/// One token per line; blank lines ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// `surface<TAB>lemma` per line.
pub fn parse_lemmas(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (surface, lemma) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected `surface<TAB>lemma`"))?;
        let lemma = lemma.trim();
        if lemma.is_empty() {
            return Err(Error::parse(i + 1, "empty lemma"));
        }
        map.insert(surface.trim().to_lowercase(), lemma.to_lowercase());
    }
    Ok(map)
}

/// Lemma table lookup with a small suffix-stripping fallback.
pub fn lemmatize(token: &str, lexicon: &Lexicon) -> String {
    if let Some(lemma) = lexicon.lemma_map.get(token) {
        return lemma.clone();
    }
    let n = token.chars().count();
    let stem_len = |suffix: &str| n - suffix.chars().count();
    let cut = |suffix: &str| token[..token.len() - suffix.len()].to_string();

    if token.ends_with("sses") {
        return cut("es");
    }
    if token.ends_with("ies") && stem_len("ies") >= 1 {
        return cut("ies") + "y";
    }
    if token.ends_with("ing") && stem_len("ing") >= 3 {
        return cut("ing");
    }
    if token.ends_with("ed") && stem_len("ed") >= 3 {
        return cut("ed");
    }
    if token.ends_with('s') && !token.ends_with("ss") && n > 3 {
        return cut("s");
    }
    token.to_string()
}

fn stopword_or_short(token: &str, lexicon: &Lexicon) -> bool {
    token.chars().count() < 2 || lexicon.is_stopword(token)
}

/// Topic-modelling cleaning: drops URLs, mentions, hashtags, punctuation,
/// stopwords and one-character tokens, then lemmatizes.
pub fn clean_for_topics(source_id: &str, text: &str, lexicon: &Lexicon) -> TokenizedDoc {
    let text = text.replace(['\n', '\r'], " ");
    let text = url_re().replace_all(&text, " ");
    let text = mention_or_hashtag_re().replace_all(&text, " ");
    let lowered = text.to_lowercase();

    let mut tokens = Vec::new();
    for raw in lowered.split_whitespace() {
        // contractions are matched against the stopword list before the
        // apostrophe is stripped
        let with_apostrophes: String = raw
            .chars()
            .filter(|&c| c.is_alphanumeric() || c == '\'' || c == '\u{2019}')
            .map(|c| if c == '\u{2019}' { '\'' } else { c })
            .collect();
        if lexicon.is_stopword(&with_apostrophes) {
            continue;
        }
        let token = strip_punctuation(raw);
        if stopword_or_short(&token, lexicon) {
            continue;
        }
        let lemma = lemmatize(&token, lexicon);
        if stopword_or_short(&lemma, lexicon) {
            continue;
        }
        tokens.push(lemma);
    }
    TokenizedDoc::new(source_id, tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigramPolicy {
    pub min_count: usize,
    pub score_threshold: f64,
}

impl Default for BigramPolicy {
    fn default() -> Self {
        BigramPolicy {
            min_count: 5,
            score_threshold: 10.0,
        }
    }
}

impl BigramPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_count == 0 {
            return Err(Error::Config("bigram min_count must be >= 1".into()));
        }
        if !(self.score_threshold >= 0.0) {
            return Err(Error::Config("bigram score_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// `(count(a,b) - min_count) * V / (count(a) * count(b))`.
pub fn bigram_score(pair_count: usize, count_a: usize, count_b: usize, vocab_size: usize, min_count: usize) -> f64 {
    (pair_count as f64 - min_count as f64) * vocab_size as f64 / (count_a as f64 * count_b as f64)
}

/// Joins frequent adjacent pairs into `a_b` tokens, scanning left to right
/// without overlap.
pub fn detect_bigrams(docs: &[TokenizedDoc], policy: &BigramPolicy) -> Vec<TokenizedDoc> {
    let mut unigrams: HashMap<&str, usize> = HashMap::new();
    let mut pairs: HashMap<(&str, &str), usize> = HashMap::new();
    for doc in docs {
        for t in &doc.tokens {
            *unigrams.entry(t.as_str()).or_insert(0) += 1;
        }
        for w in doc.tokens.windows(2) {
            *pairs.entry((w[0].as_str(), w[1].as_str())).or_insert(0) += 1;
        }
    }
    let vocab_size = unigrams.len();
    let qualifies = |a: &str, b: &str| {
        let Some(&pc) = pairs.get(&(a, b)) else {
            return false;
        };
        pc >= policy.min_count
            && bigram_score(pc, unigrams[a], unigrams[b], vocab_size, policy.min_count)
                >= policy.score_threshold
    };

    docs.iter()
        .map(|doc| {
            let toks = &doc.tokens;
            let mut out = Vec::with_capacity(toks.len());
            let mut i = 0;
            while i < toks.len() {
                if i + 1 < toks.len() && qualifies(&toks[i], &toks[i + 1]) {
                    out.push(format!("{}_{}", toks[i], toks[i + 1]));
                    i += 2;
                } else {
                    out.push(toks[i].clone());
                    i += 1;
                }
            }
            TokenizedDoc::new(doc.source_id.clone(), out)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub min: usize,
    pub max: usize,
    /// Lower middle element for an even count.
    pub median: usize,
    pub mean: f64,
}

pub fn token_length_stats(counts: &[usize]) -> Result<TokenStats> {
    if counts.is_empty() {
        return Err(Error::Empty("token length statistics need at least one document"));
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    Ok(TokenStats {
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        median: sorted[(sorted.len() - 1) / 2],
        mean: sorted.iter().sum::<usize>() as f64 / sorted.len() as f64,
    })
}

pub fn doc_token_stats(docs: &[TokenizedDoc]) -> Result<TokenStats> {
    token_length_stats(&docs.iter().map(TokenizedDoc::len).collect::<Vec<_>>())
}
