//! Unigram+bigram vocabularies and BoW / TF-IDF / averaged-embedding vectors.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unigrams and adjacent bigrams (`"a b"`) of a whitespace-tokenized document.
pub fn ngram_terms(doc: &str) -> Vec<String> {
    let tokens: Vec<&str> = doc.split_whitespace().collect();
    let mut terms: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
    terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    terms
}

fn term_counts(doc: &str) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in ngram_terms(doc) {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    min_df: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from explicit `(term, df)` pairs; indices follow
    /// the given order.
    pub fn from_parts(entries: Vec<(String, usize)>, n_docs: usize, min_df: usize) -> Result<Self> {
        let mut vocab = Vocabulary {
            terms: Vec::with_capacity(entries.len()),
            df: Vec::with_capacity(entries.len()),
            n_docs,
            min_df,
            index: HashMap::new(),
        };
        for (term, df) in entries {
            if df > n_docs {
                return Err(Error::Config(format!("df({term}) = {df} exceeds n_docs = {n_docs}")));
            }
            vocab.terms.push(term);
            vocab.df.push(df);
        }
        vocab.rebuild_index()?;
        Ok(vocab)
    }

    fn rebuild_index(&mut self) -> Result<()> {
        self.index = HashMap::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            if self.index.insert(t.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.clone()));
            }
        }
        Ok(())
    }

    /// Restores the lookup index after deserialization.
    pub fn reindex(mut self) -> Result<Self> {
        self.rebuild_index()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self, i: usize) -> usize {
        self.df[i]
    }

    /// Smoothed idf: `ln((1 + n) / (1 + df)) + 1`.
    pub fn idf(&self, i: usize) -> f64 {
        smoothed_idf(self.n_docs, self.df[i])
    }

    /// `term<TAB>index<TAB>df` per line.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, (t, df)) in self.terms.iter().zip(&self.df).enumerate() {
            writeln!(out, "{t}\t{i}\t{df}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: Read>(reader: R, n_docs: usize, min_df: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse(line_no, e))?;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let [term, idx, df] = parts[..] else {
                return Err(Error::parse(line_no, "expected `term<TAB>index<TAB>df`"));
            };
            let idx: usize = idx.parse().map_err(|e| Error::parse(line_no, e))?;
            if idx != entries.len() {
                return Err(Error::parse(line_no, format!("index {idx} out of sequence")));
            }
            let df: usize = df.parse().map_err(|e| Error::parse(line_no, e))?;
            entries.push((term.to_string(), df));
        }
        Vocabulary::from_parts(entries, n_docs, min_df)
    }
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Collects unigrams and bigrams, keeps those with `df >= min_df`, and
/// indexes them in lexicographic order.
pub fn build_vocab<S: AsRef<str>>(docs: &[S], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Empty("vocabulary needs at least one document"));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        for term in term_counts(doc.as_ref()).into_keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let entries: Vec<(String, usize)> = df.into_iter().filter(|&(_, d)| d >= min_df).collect();
    if entries.is_empty() {
        return Err(Error::Empty("vocabulary is empty after min_df filtering"));
    }
    Vocabulary::from_parts(entries, docs.len(), min_df)
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// Sorts by index, sums duplicates and drops zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|e| e.1 != 0.0);
        FeatureVector { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        FeatureVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * dense[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for &(i, w) in &self.entries {
            v[i] = w;
        }
        v
    }
}

/// Raw in-vocabulary n-gram counts.
pub fn bow_vector(doc: &str, vocab: &Vocabulary) -> FeatureVector {
    FeatureVector::from_pairs(
        term_counts(doc)
            .into_iter()
            .filter_map(|(t, c)| vocab.index_of(&t).map(|i| (i, c as f64)))
            .collect(),
    )
}

/// `tf * idf`, L2-normalized.
pub fn tfidf_vector(doc: &str, vocab: &Vocabulary) -> FeatureVector {
    let mut v = bow_vector(doc, vocab);
    for e in &mut v.entries {
        e.1 *= vocab.idf(e.0);
    }
    let norm = v.norm();
    if norm > 0.0 {
        for e in &mut v.entries {
            e.1 /= norm;
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Config(format!(
                "embedding of length {} in a table of dimension {}",
                vector.len(),
                self.dim
            )));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }
}

/// Text embeddings: a word followed by its whitespace-separated components.
pub fn parse_embeddings<R: Read>(reader: R) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(line_no, e))?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(line_no, e))?;
        if values.is_empty() {
            return Err(Error::parse(line_no, "word without vector components"));
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
        if values.len() != table.dim {
            return Err(Error::parse(
                line_no,
                format!("expected {} components, found {}", table.dim, values.len()),
            ));
        }
        table.vectors.insert(word.to_string(), values);
    }
    table.ok_or(Error::Empty("embedding file has no vectors"))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    parse_embeddings(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Mean of the in-table token vectors; zero when none are known.
pub fn embed_average(doc: &str, table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim];
    let mut n = 0usize;
    for v in doc.split_whitespace().filter_map(|t| table.get(t)) {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Bow,
    Tfidf,
    #[serde(alias = "embed")]
    Embedding,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Bow => "bow",
            FeatureKind::Tfidf => "tfidf",
            FeatureKind::Embedding => "embed",
        }
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bow" => Ok(FeatureKind::Bow),
            "tfidf" => Ok(FeatureKind::Tfidf),
            "embed" | "embedding" => Ok(FeatureKind::Embedding),
            other => Err(Error::Config(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// A fitted document-to-vector mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Featurizer {
    Bow(Vocabulary),
    Tfidf(Vocabulary),
    Embedding(EmbeddingTable),
}

impl Featurizer {
    /// Fits a vocabulary on `train_docs` for the count-based kinds. The
    /// embedding kind needs a table instead.
    pub fn fit<S: AsRef<str>>(
        kind: FeatureKind,
        train_docs: &[S],
        min_df: usize,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Self> {
        match kind {
            FeatureKind::Bow => Ok(Featurizer::Bow(build_vocab(train_docs, min_df)?)),
            FeatureKind::Tfidf => Ok(Featurizer::Tfidf(build_vocab(train_docs, min_df)?)),
            FeatureKind::Embedding => embeddings
                .cloned()
                .map(Featurizer::Embedding)
                .ok_or_else(|| Error::Config("embedding features need an embedding table".into())),
        }
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            Featurizer::Bow(_) => FeatureKind::Bow,
            Featurizer::Tfidf(_) => FeatureKind::Tfidf,
            Featurizer::Embedding(_) => FeatureKind::Embedding,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Featurizer::Bow(v) | Featurizer::Tfidf(v) => v.len(),
            Featurizer::Embedding(t) => t.dim(),
        }
    }

    pub fn transform(&self, doc: &str) -> FeatureVector {
        match self {
            Featurizer::Bow(v) => bow_vector(doc, v),
            Featurizer::Tfidf(v) => tfidf_vector(doc, v),
            Featurizer::Embedding(t) => FeatureVector::from_dense(&embed_average(doc, t)),
        }
    }

    pub fn transform_all<S: AsRef<str>>(&self, docs: &[S]) -> Vec<FeatureVector> {
        docs.iter().map(|d| self.transform(d.as_ref())).collect()
    }

    /// Restores lookup indices after deserialization.
    pub fn reindex(self) -> Result<Self> {
        Ok(match self {
            Featurizer::Bow(v) => Featurizer::Bow(v.reindex()?),
            Featurizer::Tfidf(v) => Featurizer::Tfidf(v.reindex()?),
            e @ Featurizer::Embedding(_) => e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vocab_enumeration() {
        let v = build_vocab(&["a b", "a c"], 1).unwrap();
        assert_eq!(v.terms(), ["a", "a b", "a c", "b", "c"]);
        assert_eq!((0..5).map(|i| v.df(i)).collect::<Vec<_>>(), [2, 1, 1, 1, 1]);
        let v2 = build_vocab(&["a b", "a c"], 2).unwrap();
        assert_eq!(v2.terms(), ["a"]);
        assert_eq!(build_vocab(&["a b", "a c"], 1).unwrap(), v);
        assert!(build_vocab(&["a", "b"], 3).is_err());
        assert!(build_vocab::<&str>(&[], 1).is_err());
    }

    #[test]
    fn bow_counts() {
        let v = Vocabulary::from_parts(
            vec![("a".into(), 1), ("b".into(), 1), ("a a".into(), 1), ("a b".into(), 1)],
            1,
            1,
        )
        .unwrap();
        let f = bow_vector("a a b", &v);
        assert_eq!(f.entries(), [(0, 2.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        assert!(bow_vector("zzz yyy", &v).is_empty());
        assert!(bow_vector("", &v).is_empty());
    }

    #[test]
    fn tfidf_examples() {
        assert_eq!(smoothed_idf(3, 3), 1.0);
        let v = build_vocab(&["a b", "b"], 1).unwrap();
        let a = v.index_of("a").unwrap();
        assert_abs_diff_eq!(v.idf(a), 1.5f64.ln() + 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.idf(a), 1.405465108, epsilon = 1e-9);
        let f = tfidf_vector("a", &v);
        assert_eq!(f.entries(), [(a, 1.0)]);
        assert!(tfidf_vector("", &v).is_empty());
    }

    #[test]
    fn vocab_tsv_round_trip() {
        let v = build_vocab(&["x y z", "x y"], 1).unwrap();
        let mut buf = Vec::new();
        v.write_tsv(&mut buf).unwrap();
        let back = Vocabulary::read_tsv(buf.as_slice(), v.n_docs(), v.min_df()).unwrap();
        assert_eq!(back, v);
        assert!(Vocabulary::read_tsv("a\t1\t1\n".as_bytes(), 1, 1).is_err());
    }

    #[test]
    fn embeddings() {
        let t = parse_embeddings("a 1 0\nb 0 1\n".as_bytes()).unwrap();
        assert_eq!((t.dim(), t.len()), (2, 2));
        assert_eq!(embed_average("a b", &t), [0.5, 0.5]);
        assert_eq!(embed_average("q r", &t), [0.0, 0.0]);
        assert_eq!(embed_average("a", &t), [1.0, 0.0]);
        match parse_embeddings("a 1 0\nb 0 1 2\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_embeddings("".as_bytes()).is_err());
    }

    #[test]
    fn sparse_vector_normalizes_pairs() {
        let v = FeatureVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, -1.0), (0, 0.0)]);
        assert_eq!(v.entries(), [(1, 2.0)]);
    }
}
