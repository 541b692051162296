//! Collapsed Gibbs LDA, UMass coherence, topic-count selection and merging
//! of related topics into averaged clusters.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::corpus::{Category, Corpus, Stage};
use crate::error::{Error, Result};
use crate::par;
use crate::preprocess::{clean_for_topics, detect_bigrams, BigramPolicy, Lexicon, TokenizedDoc};

const MIN_ALPHA: f64 = 1e-8;
const MINKA_ITERATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means `1 / k`.
    pub alpha: Option<f64>,
    /// Symmetric topic-word prior; `None` means `1 / k`.
    pub beta: Option<f64>,
    pub iterations: usize,
    pub burn_in: usize,
    /// Re-estimate α every this many sweeps after burn-in; 0 disables it.
    pub optimize_interval: usize,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(k: usize) -> Self {
        LdaConfig {
            k,
            alpha: None,
            beta: None,
            iterations: 1000,
            burn_in: 100,
            optimize_interval: 10,
            seed: 0,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.k as f64)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(1.0 / self.k as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("topic count must be >= 1".into()));
        }
        if !(self.alpha() > 0.0) || !(self.beta() > 0.0) {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        if self.iterations < self.burn_in {
            return Err(Error::Config("iterations must be >= burn_in".into()));
        }
        Ok(())
    }

    fn optimizes_at(&self, iteration: usize) -> bool {
        self.optimize_interval > 0
            && iteration > self.burn_in
            && (iteration - self.burn_in) % self.optimize_interval == 0
    }
}

/// Documents encoded against a lexicographically sorted vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicCorpus {
    pub vocab: Vec<String>,
    pub docs: Vec<Vec<usize>>,
}

impl TopicCorpus {
    pub fn from_docs(docs: &[TokenizedDoc]) -> Result<Self> {
        let mut vocab: Vec<String> = docs.iter().flat_map(|d| d.tokens.iter().cloned()).collect();
        vocab.sort_unstable();
        vocab.dedup();
        if vocab.is_empty() {
            return Err(Error::Empty("topic corpus has an empty vocabulary"));
        }
        let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let encoded = docs
            .iter()
            .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
            .collect();
        Ok(TopicCorpus {
            vocab,
            docs: encoded,
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

/// Collapsed Gibbs sampler state. Exposed so callers can step sweeps and
/// inspect the count tables.
pub struct GibbsSampler<'a> {
    corpus: &'a TopicCorpus,
    cfg: LdaConfig,
    k: usize,
    v: usize,
    alpha: Vec<f64>,
    beta: f64,
    z: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_total: Vec<u32>,
    rng: ChaCha8Rng,
    iteration: usize,
    weights: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    /// Random initial assignments drawn from the seeded generator.
    pub fn new(corpus: &'a TopicCorpus, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        if corpus.vocab.is_empty() {
            return Err(Error::Empty("topic corpus has an empty vocabulary"));
        }
        let (k, v) = (cfg.k, corpus.vocab.len());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut doc_topic = vec![0u32; corpus.docs.len() * k];
        let mut topic_word = vec![0u32; k * v];
        let mut topic_total = vec![0u32; k];
        let z = corpus
            .docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.gen_range(0..k);
                        doc_topic[d * k + t] += 1;
                        topic_word[t * v + w] += 1;
                        topic_total[t] += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsSampler {
            corpus,
            cfg: *cfg,
            k,
            v,
            alpha: vec![cfg.alpha(); k],
            beta: cfg.beta(),
            z,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            iteration: 0,
            weights: vec![0.0; k],
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    /// One full pass over every token, followed by an α update when due.
    pub fn sweep(&mut self) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for (d, words) in self.corpus.docs.iter().enumerate() {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (i, &w) in words.iter().enumerate() {
                let old = self.z[d][i];
                dt[old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (dt[t] as f64 + self.alpha[t])
                        * (self.topic_word[t * v + w] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + vbeta);
                    total += p;
                    self.weights[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.z[d][i] = new;
                dt[new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.iteration += 1;
        if self.cfg.optimizes_at(self.iteration) {
            self.optimize_alpha();
        }
    }

    /// Minka's fixed-point iteration for an asymmetric Dirichlet over the
    /// current document-topic counts.
    pub fn optimize_alpha(&mut self) {
        let k = self.k;
        let lengths: Vec<usize> = self.corpus.docs.iter().map(Vec::len).collect();
        for _ in 0..MINKA_ITERATIONS {
            let alpha_sum: f64 = self.alpha.iter().sum();
            let psi_sum = digamma(alpha_sum);
            let denom: f64 = lengths
                .iter()
                .filter(|&&n| n > 0)
                .map(|&n| digamma(n as f64 + alpha_sum) - psi_sum)
                .sum();
            if denom <= 0.0 {
                return;
            }
            let mut max_change: f64 = 0.0;
            for t in 0..k {
                let a = self.alpha[t];
                let psi_a = digamma(a);
                let num: f64 = (0..lengths.len())
                    .map(|d| self.doc_topic[d * k + t])
                    .filter(|&c| c > 0)
                    .map(|c| digamma(c as f64 + a) - psi_a)
                    .sum();
                let updated = (a * num / denom).max(MIN_ALPHA);
                max_change = max_change.max((updated - a).abs());
                self.alpha[t] = updated;
            }
            if max_change < 1e-9 {
                break;
            }
        }
    }

    /// Recounts the tables from the assignments and checks every marginal.
    pub fn counts_consistent(&self) -> bool {
        let (k, v) = (self.k, self.v);
        let mut doc_topic = vec![0u32; self.doc_topic.len()];
        let mut topic_word = vec![0u32; self.topic_word.len()];
        for (d, (words, zs)) in self.corpus.docs.iter().zip(&self.z).enumerate() {
            for (&w, &t) in words.iter().zip(zs) {
                doc_topic[d * k + t] += 1;
                topic_word[t * v + w] += 1;
            }
        }
        if doc_topic != self.doc_topic || topic_word != self.topic_word {
            return false;
        }
        let docs_ok = self.corpus.docs.iter().enumerate().all(|(d, words)| {
            self.doc_topic[d * k..(d + 1) * k].iter().map(|&c| c as usize).sum::<usize>() == words.len()
        });
        let topics_ok = (0..k).all(|t| {
            let by_word: u64 = self.topic_word[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum();
            let by_doc: u64 = (0..self.corpus.docs.len()).map(|d| self.doc_topic[d * k + t] as u64).sum();
            by_word == self.topic_total[t] as u64 && by_doc == self.topic_total[t] as u64
        });
        docs_ok && topics_ok
    }

    pub fn run(&mut self) {
        while self.iteration < self.cfg.iterations {
            self.sweep();
        }
    }

    /// Point estimates of φ and θ from the current counts.
    pub fn into_model(self) -> LdaModel {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        let phi = (0..k)
            .map(|t| {
                let denom = self.topic_total[t] as f64 + vbeta;
                (0..v)
                    .map(|w| (self.topic_word[t * v + w] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect();
        let alpha_sum: f64 = self.alpha.iter().sum();
        let theta = self
            .corpus
            .docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                let denom = words.len() as f64 + alpha_sum;
                (0..k)
                    .map(|t| (self.doc_topic[d * k + t] as f64 + self.alpha[t]) / denom)
                    .collect()
            })
            .collect();
        LdaModel {
            vocab: self.corpus.vocab.clone(),
            phi,
            theta,
            assignments: self.z,
            alpha: self.alpha,
            beta: self.beta,
            config: self.cfg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub vocab: Vec<String>,
    /// Topic-word probabilities, K × V.
    pub phi: Vec<Vec<f64>>,
    /// Document-topic probabilities, D × K.
    pub theta: Vec<Vec<f64>>,
    pub assignments: Vec<Vec<usize>>,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub config: LdaConfig,
}

impl LdaModel {
    pub fn k(&self) -> usize {
        self.phi.len()
    }

    /// Word indices of topic `t` by descending probability (ties by index).
    pub fn ranked_words(&self, t: usize) -> Vec<usize> {
        let row = &self.phi[t];
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx
    }
}

pub fn fit_lda_corpus(corpus: &TopicCorpus, cfg: &LdaConfig) -> Result<LdaModel> {
    if corpus.docs.iter().filter(|d| !d.is_empty()).count() < 2 {
        return Err(Error::Empty("LDA needs at least two non-empty documents"));
    }
    let mut sampler = GibbsSampler::new(corpus, cfg)?;
    sampler.run();
    Ok(sampler.into_model())
}

pub fn fit_lda_gibbs(docs: &[TokenizedDoc], cfg: &LdaConfig) -> Result<LdaModel> {
    fit_lda_corpus(&TopicCorpus::from_docs(docs)?, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    /// Top words with zero document frequency, left out of the sums.
    pub excluded: Vec<String>,
}

/// UMass coherence: for the `top_n` words of each topic in descending
/// probability, `Σ_{i<j} ln((D(w_i, w_j) + 1) / D(w_j))`.
pub fn coherence_umass(model: &LdaModel, docs: &[TokenizedDoc], top_n: usize) -> Coherence {
    let index: HashMap<&str, usize> = model.vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut word_docs: Vec<Vec<u32>> = vec![Vec::new(); model.vocab.len()];
    for (d, doc) in docs.iter().enumerate() {
        let mut ids: Vec<usize> = doc.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        for w in ids {
            word_docs[w].push(d as u32);
        }
    }
    let co_docs = |a: usize, b: usize| {
        let (x, y) = (&word_docs[a], &word_docs[b]);
        let (mut i, mut j, mut n) = (0, 0, 0usize);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    };

    let mut excluded = Vec::new();
    let per_topic: Vec<f64> = (0..model.k())
        .map(|t| {
            let mut top: Vec<usize> = model.ranked_words(t).into_iter().take(top_n).collect();
            top.retain(|&w| {
                let keep = !word_docs[w].is_empty();
                if !keep {
                    excluded.push(model.vocab[w].clone());
                }
                keep
            });
            let mut score = 0.0;
            for j in 1..top.len() {
                let dj = word_docs[top[j]].len() as f64;
                for i in 0..j {
                    score += ((co_docs(top[i], top[j]) as f64 + 1.0) / dj).ln();
                }
            }
            score
        })
        .collect();
    excluded.sort();
    excluded.dedup();
    let mean = per_topic.iter().sum::<f64>() / per_topic.len().max(1) as f64;
    Coherence {
        per_topic,
        mean,
        excluded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub coherence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub best_k: usize,
    pub scores: Vec<KScore>,
    pub model: LdaModel,
}

pub const DEFAULT_KS: [usize; 5] = [5, 10, 15, 20, 25];

/// Fits one model per candidate `k` and keeps the one with the highest mean
/// coherence; ties prefer the smaller `k`.
pub fn select_k(docs: &[TokenizedDoc], ks: &[usize], template: &LdaConfig, top_n: usize) -> Result<KSelection> {
    if ks.is_empty() {
        return Err(Error::Empty("no candidate topic counts"));
    }
    let corpus = TopicCorpus::from_docs(docs)?;
    let mut fitted = par::map(ks, |&k| {
        let model = fit_lda_corpus(&corpus, &template.with_k(k))?;
        let c = coherence_umass(&model, docs, top_n);
        Ok((KScore { k, coherence: c.mean }, model))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, (s, _)) in fitted.iter().enumerate() {
        let b = &fitted[best].0;
        if s.coherence > b.coherence || (s.coherence == b.coherence && s.k < b.k) {
            best = i;
        }
    }
    let scores = fitted.iter().map(|(s, _)| *s).collect();
    let (score, model) = fitted.swap_remove(best);
    Ok(KSelection {
        best_k: score.k,
        scores,
        model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCluster {
    /// Ids of the merged topics, ascending.
    pub members: Vec<usize>,
    /// Per-word mean of the member topic distributions.
    pub distribution: Vec<f64>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Averages topic rows into one distribution.
pub fn average_rows(rows: &[&[f64]]) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut out = vec![0.0; rows.first().map_or(0, |r| r.len())];
    for row in rows {
        for (o, p) in out.iter_mut().zip(row.iter()) {
            *o += p;
        }
    }
    for o in &mut out {
        *o /= n;
    }
    out
}

/// Agglomerative average-linkage clustering of topic rows by cosine
/// similarity down to `target` clusters.
pub fn cluster_rows(phi: &[Vec<f64>], target: usize) -> Result<Vec<TopicCluster>> {
    let k = phi.len();
    if target == 0 || k < target {
        return Err(Error::Config(format!("cannot merge {k} topics into {target} clusters")));
    }
    let sim: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| cosine(&phi[a], &phi[b])).collect()).collect();
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|t| vec![t]).collect();
    while clusters.len() > target {
        let mut best = (0, 1, f64::NEG_INFINITY);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let total: f64 = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| sim[i][j])
                    .sum();
                let linkage = total / (clusters[a].len() * clusters[b].len()) as f64;
                if linkage > best.2 {
                    best = (a, b, linkage);
                }
            }
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
        clusters[best.0].sort_unstable();
    }
    Ok(clusters
        .into_iter()
        .map(|members| {
            let rows: Vec<&[f64]> = members.iter().map(|&m| phi[m].as_slice()).collect();
            TopicCluster {
                distribution: average_rows(&rows),
                members,
            }
        })
        .collect())
}

pub fn cluster_topics(model: &LdaModel, target: usize) -> Result<Vec<TopicCluster>> {
    cluster_rows(&model.phi, target)
}

/// The `n` most probable words; ties are broken lexicographically.
pub fn top_words(cluster: &TopicCluster, vocab: &[String], n: usize) -> Result<Vec<(String, f64)>> {
    if n > vocab.len() {
        return Err(Error::Config(format!("asked for {n} words from a vocabulary of {}", vocab.len())));
    }
    let p = &cluster.distribution;
    let mut idx: Vec<usize> = (0..vocab.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then_with(|| vocab[a].cmp(&vocab[b])));
    Ok(idx.into_iter().take(n).map(|i| (vocab[i].clone(), p[i])).collect())
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub lexicon: Lexicon,
    pub bigrams: Option<BigramPolicy>,
    pub ks: Vec<usize>,
    pub lda: LdaConfig,
    pub target_clusters: usize,
    pub min_docs: usize,
    pub top_n: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            lexicon: Lexicon::english(),
            bigrams: Some(BigramPolicy::default()),
            ks: DEFAULT_KS.to_vec(),
            lda: LdaConfig::new(DEFAULT_KS[0]),
            target_clusters: 5,
            min_docs: 50,
            top_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub members: Vec<usize>,
    pub top_words: Vec<String>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Fitted,
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCell {
    pub category: Category,
    pub stage: Stage,
    pub status: CellStatus,
    pub n_docs: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "coherence_by_K")]
    pub coherence_by_k: Vec<KScore>,
    pub clusters: Vec<ClusterSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TopicCell {
    fn insufficient(category: Category, stage: Stage, n_docs: usize, note: String) -> Self {
        TopicCell {
            category,
            stage,
            status: CellStatus::Insufficient,
            n_docs,
            k: None,
            coherence_by_k: Vec::new(),
            clusters: Vec::new(),
            note: Some(note),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicGrid {
    pub cells: Vec<TopicCell>,
}

impl TopicGrid {
    pub fn cell(&self, category: Category, stage: Stage) -> Option<&TopicCell> {
        self.cells.iter().find(|c| c.category == category && c.stage == stage)
    }
}

/// Topic-path documents of one (category, stage) cell, in corpus order.
pub fn cell_documents(
    corpus: &Corpus,
    predictions: &BTreeMap<String, Category>,
    category: Category,
    stage: Stage,
    lexicon: &Lexicon,
) -> Vec<TokenizedDoc> {
    corpus
        .tweets()
        .iter()
        .filter(|t| predictions.get(&t.id) == Some(&category) && t.stage().ok() == Some(stage))
        .map(|t| clean_for_topics(&t.id, &t.text, lexicon))
        .filter(|d| !d.is_empty())
        .collect()
}

pub fn fit_cell(docs: &[TokenizedDoc], category: Category, stage: Stage, opts: &PipelineOptions) -> Result<TopicCell> {
    let n_docs = docs.len();
    if n_docs < opts.min_docs.max(2) {
        return Ok(TopicCell::insufficient(
            category,
            stage,
            n_docs,
            format!("{n_docs} documents (need {})", opts.min_docs),
        ));
    }
    let docs = match &opts.bigrams {
        Some(policy) => detect_bigrams(docs, policy),
        None => docs.to_vec(),
    };
    let corpus = TopicCorpus::from_docs(&docs)?;
    if corpus.vocab.len() < opts.top_n {
        return Ok(TopicCell::insufficient(
            category,
            stage,
            n_docs,
            format!("vocabulary of {} words (need {})", corpus.vocab.len(), opts.top_n),
        ));
    }
    let selection = select_k(&docs, &opts.ks, &opts.lda, opts.top_n)?;
    let clusters = cluster_topics(&selection.model, opts.target_clusters)?
        .iter()
        .map(|c| {
            let words = top_words(c, &selection.model.vocab, opts.top_n)?;
            Ok(ClusterSummary {
                members: c.members.clone(),
                top_words: words.iter().map(|w| w.0.clone()).collect(),
                probabilities: words.iter().map(|w| w.1).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TopicCell {
        category,
        stage,
        status: CellStatus::Fitted,
        n_docs,
        k: Some(selection.best_k),
        coherence_by_k: selection.scores,
        clusters,
        note: None,
    })
}

/// Runs cleaning, K selection, fitting and merging for each of the twelve
/// (racist category, stage) cells.
pub fn run_topic_pipeline(
    corpus: &Corpus,
    predictions: &BTreeMap<String, Category>,
    opts: &PipelineOptions,
) -> Result<TopicGrid> {
    if let Some(&k) = opts.ks.iter().find(|&&k| k < opts.target_clusters) {
        return Err(Error::Config(format!(
            "candidate K = {k} is below the {} merged clusters",
            opts.target_clusters
        )));
    }
    let cells: Vec<(Category, Stage)> = Category::RACIST
        .iter()
        .flat_map(|&c| Stage::ALL.iter().map(move |&s| (c, s)))
        .collect();
    let results = par::map(&cells, |&(c, s)| {
        let docs = cell_documents(corpus, predictions, c, s, &opts.lexicon);
        fit_cell(&docs, c, s, opts)
    });
    Ok(TopicGrid {
        cells: results.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(words: &[&str]) -> TokenizedDoc {
        TokenizedDoc::new("d", words.iter().map(|w| w.to_string()).collect())
    }

    fn quick(k: usize) -> LdaConfig {
        LdaConfig {
            iterations: 50,
            burn_in: 10,
            ..LdaConfig::new(k)
        }
    }

    #[test]
    fn single_topic_is_smoothed_unigram() {
        let docs = vec![doc(&["a", "a", "b"]), doc(&["c", "a"])];
        let m = fit_lda_gibbs(&docs, &LdaConfig { k: 1, ..quick(1) }).unwrap();
        // counts a=3, b=1, c=1; beta = 1; V = 3
        let expected = [4.0 / 8.0, 2.0 / 8.0, 2.0 / 8.0];
        for (p, e) in m.phi[0].iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let docs = vec![doc(&["a", "b", "c"]), doc(&["c", "d", "a"]), doc(&["b", "b"])];
        let a = fit_lda_gibbs(&docs, &quick(2)).unwrap();
        let b = fit_lda_gibbs(&docs, &quick(2)).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a, b);
    }

    #[test]
    fn rows_are_distributions() {
        let docs = vec![doc(&["a", "b", "c"]), doc(&["c", "d", "a"]), doc(&[])];
        let m = fit_lda_gibbs(&docs, &quick(3)).unwrap();
        for row in m.phi.iter().chain(&m.theta) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn fit_errors() {
        assert!(fit_lda_gibbs(&[doc(&[]), doc(&[])], &quick(2)).is_err());
        assert!(fit_lda_gibbs(&[doc(&["a"])], &quick(2)).is_err());
        let bad = LdaConfig {
            iterations: 5,
            burn_in: 10,
            ..LdaConfig::new(2)
        };
        assert!(fit_lda_gibbs(&[doc(&["a"]), doc(&["b"])], &bad).is_err());
    }

    #[test]
    fn disabled_optimization_keeps_symmetric_prior() {
        let docs = vec![doc(&["a", "b", "c", "a"]), doc(&["c", "d", "a", "d"])];
        let cfg = LdaConfig {
            iterations: 30,
            burn_in: 0,
            optimize_interval: 31,
            ..LdaConfig::new(3)
        };
        let m = fit_lda_gibbs(&docs, &cfg).unwrap();
        assert!(m.alpha.iter().all(|&a| a == 1.0 / 3.0));
        let cfg_off = LdaConfig {
            optimize_interval: 0,
            ..cfg
        };
        let off = fit_lda_gibbs(&docs, &cfg_off).unwrap();
        assert_eq!(off.assignments, m.assignments);
        assert_eq!(off.phi, m.phi);
        assert_eq!(off.alpha, m.alpha);
    }

    #[test]
    fn minka_keeps_alpha_positive() {
        let docs: Vec<TokenizedDoc> = (0..20)
            .map(|i| if i % 2 == 0 { doc(&["a", "b", "a", "b"]) } else { doc(&["c", "d", "c"]) })
            .collect();
        let cfg = LdaConfig {
            iterations: 60,
            burn_in: 10,
            optimize_interval: 5,
            ..LdaConfig::new(4)
        };
        let m = fit_lda_gibbs(&docs, &cfg).unwrap();
        assert!(m.alpha.iter().all(|&a| a > 0.0 && a.is_finite()));
        assert!(m.alpha.iter().any(|&a| a != 0.25));
    }

    #[test]
    fn coherence_bounds() {
        let model = LdaModel {
            vocab: vec!["a".into(), "b".into(), "c".into()],
            phi: vec![vec![0.5, 0.4, 0.1], vec![0.1, 0.2, 0.7]],
            theta: Vec::new(),
            assignments: Vec::new(),
            alpha: vec![0.5; 2],
            beta: 0.5,
            config: LdaConfig::new(2),
        };
        // a and b always together (4 docs), c alone (2 docs)
        let docs = vec![doc(&["a", "b"]), doc(&["a", "b"]), doc(&["b", "a"]), doc(&["a", "b"]), doc(&["c"]), doc(&["c"])];
        let c = coherence_umass(&model, &docs, 2);
        assert!((c.per_topic[0] - (5.0f64 / 4.0).ln()).abs() < 1e-12);
        // topic 1 top words c, b never co-occur: ln(1 / D(b)) = ln(1/4)
        assert!((c.per_topic[1] - 0.25f64.ln()).abs() < 1e-12);
        assert!(c.per_topic[1] < 0.0);
        assert!((c.mean - (c.per_topic[0] + c.per_topic[1]) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_excludes_unseen_words() {
        let model = LdaModel {
            vocab: vec!["a".into(), "z".into()],
            phi: vec![vec![0.5, 0.5]],
            theta: Vec::new(),
            assignments: Vec::new(),
            alpha: vec![1.0],
            beta: 1.0,
            config: LdaConfig::new(1),
        };
        let c = coherence_umass(&model, &[doc(&["a"])], 2);
        assert_eq!(c.excluded, vec!["z"]);
        assert_eq!(c.per_topic[0], 0.0);
    }

    #[test]
    fn cluster_identity_and_equal_rows() {
        let phi = vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.2, 0.8], vec![0.1, 0.1, 0.8]];
        let same = cluster_rows(&phi, 3).unwrap();
        for (t, c) in same.iter().enumerate() {
            assert_eq!(c.members, vec![t]);
            assert_eq!(c.distribution, phi[t]);
        }
        let twins = vec![vec![0.3, 0.7], vec![0.3, 0.7], vec![0.9, 0.1]];
        let merged = cluster_rows(&twins, 2).unwrap();
        assert_eq!(merged[0].members, vec![0, 1]);
        assert_eq!(merged[0].distribution, twins[0]);
        assert!(cluster_rows(&twins, 4).is_err());
    }

    #[test]
    fn top_words_ordering() {
        let vocab: Vec<String> = ["d", "c", "b", "a"].iter().map(|s| s.to_string()).collect();
        let uniform = TopicCluster {
            members: vec![0],
            distribution: vec![0.25; 4],
        };
        let w = top_words(&uniform, &vocab, 2).unwrap();
        assert_eq!(w.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        let point = TopicCluster {
            members: vec![0],
            distribution: vec![0.0, 1.0, 0.0, 0.0],
        };
        let w = top_words(&point, &vocab, 4).unwrap();
        assert_eq!(w[0].0, "c");
        assert_eq!(w.len(), 4);
        assert!(top_words(&point, &vocab, 5).is_err());
    }

    #[test]
    fn select_k_single_candidate() {
        let docs: Vec<TokenizedDoc> = (0..10).map(|i| doc(&["x", "y", if i % 2 == 0 { "p" } else { "q" }])).collect();
        let sel = select_k(&docs, &[2], &quick(2), 3).unwrap();
        assert_eq!(sel.best_k, 2);
        assert_eq!(sel.scores.len(), 1);
        assert!(select_k(&docs, &[], &quick(2), 3).is_err());
    }
}
