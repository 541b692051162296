//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain strings and numbers and returns a JSON
//! string, so the page needs no generated type glue beyond `wasm-bindgen`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use stagewise::features::{build_vocab, tfidf_vector};
use stagewise::preprocess::{clean_for_classification, clean_for_topics, detect_bigrams, BigramPolicy, Lexicon, TokenizedDoc};
use stagewise::topics::{cluster_topics, coherence_umass, fit_lda_gibbs, top_words, LdaConfig};

#[derive(Serialize)]
struct Cleaned {
    classification: String,
    topic_tokens: Vec<String>,
}

/// Both cleaning paths for one piece of text.
pub fn clean(text: &str) -> Result<String, String> {
    let out = Cleaned {
        classification: clean_for_classification(text),
        topic_tokens: clean_for_topics("input", text, &Lexicon::english()).tokens,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Weighted {
    term: String,
    df: usize,
    idf: f64,
    weight: f64,
}

#[derive(Serialize)]
struct TfidfView {
    documents: usize,
    vocabulary: usize,
    terms: Vec<Weighted>,
}

fn lines(corpus: &str) -> Vec<&str> {
    corpus.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// Fits a vocabulary on the corpus (one document per line) and lists the
/// weighted terms of `query`, heaviest first.
pub fn tfidf(corpus: &str, query: &str, min_df: usize) -> Result<String, String> {
    let docs: Vec<String> = lines(corpus).into_iter().map(clean_for_classification).collect();
    let vocab = build_vocab(&docs, min_df.max(1)).map_err(|e| e.to_string())?;
    let v = tfidf_vector(&clean_for_classification(query), &vocab);
    let mut terms: Vec<Weighted> = v
        .entries()
        .iter()
        .map(|&(i, w)| Weighted {
            term: vocab.term(i).to_string(),
            df: vocab.df(i),
            idf: vocab.idf(i),
            weight: w,
        })
        .collect();
    terms.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
    serde_json::to_string(&TfidfView {
        documents: docs.len(),
        vocabulary: vocab.len(),
        terms,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Cluster {
    members: Vec<usize>,
    words: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct TopicView {
    documents: usize,
    vocabulary: usize,
    k: usize,
    coherence: f64,
    clusters: Vec<Cluster>,
}

/// Topic-cleans the corpus (one document per line), fits `k` topics and
/// merges them into `target` clusters.
pub fn topics(corpus: &str, k: usize, target: usize, iterations: usize, seed: u64) -> Result<String, String> {
    let lexicon = Lexicon::english();
    let docs: Vec<TokenizedDoc> = lines(corpus)
        .iter()
        .enumerate()
        .map(|(i, l)| clean_for_topics(&i.to_string(), l, &lexicon))
        .filter(|d| !d.is_empty())
        .collect();
    let docs = detect_bigrams(&docs, &BigramPolicy::default());
    let cfg = LdaConfig {
        iterations,
        burn_in: (iterations / 10).min(100),
        seed,
        ..LdaConfig::new(k)
    };
    let model = fit_lda_gibbs(&docs, &cfg).map_err(|e| e.to_string())?;
    let n_words = model.vocab.len().min(10);
    let coherence = coherence_umass(&model, &docs, n_words).mean;
    let clusters = cluster_topics(&model, target)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|c| {
            Ok(Cluster {
                members: c.members.clone(),
                words: top_words(c, &model.vocab, n_words).map_err(|e| e.to_string())?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&TopicView {
        documents: docs.len(),
        vocabulary: model.vocab.len(),
        k,
        coherence,
        clusters,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = cleanText)]
pub fn clean_text_js(text: &str) -> Result<String, JsError> {
    clean(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = tfidfTerms)]
pub fn tfidf_js(corpus: &str, query: &str, min_df: usize) -> Result<String, JsError> {
    tfidf(corpus, query, min_df).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fitTopics)]
pub fn topics_js(corpus: &str, k: usize, target: usize, iterations: usize, seed: u32) -> Result<String, JsError> {
    topics(corpus, k, target, iterations, seed as u64).map_err(|e| JsError::new(&e))
}
