use stagewise::preprocess::TokenizedDoc;
use stagewise::synth::{planted_topics, planted_tweets};
use stagewise::topics::{
    cluster_rows, coherence_umass, fit_lda_gibbs, run_topic_pipeline, select_k, top_words, CellStatus,
    GibbsSampler, LdaConfig, PipelineOptions, TopicCluster, TopicCorpus, DEFAULT_KS,
};
use stagewise::{Category, Stage};

fn best_permutation_overlap(found: &[Vec<String>], planted: &[Vec<String>]) -> Vec<usize> {
    // Exhaustive over permutations; only used with a handful of topics.
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }
    let overlap = |a: &[String], b: &[String]| a.iter().filter(|w| b.contains(w)).count();
    permutations(planted.len())
        .into_iter()
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| overlap(&found[i], &planted[j]))
                .collect::<Vec<_>>()
        })
        .max_by_key(|o| o.iter().sum::<usize>())
        .unwrap()
}

fn top_n(model: &stagewise::topics::LdaModel, t: usize, n: usize) -> Vec<String> {
    model.ranked_words(t).into_iter().take(n).map(|i| model.vocab[i].clone()).collect()
}

#[test]
fn two_pair_topics_concentrate_mass() {
    let mut docs = Vec::new();
    for i in 0..200 {
        let pair = if i % 2 == 0 { ["a", "b"] } else { ["c", "d"] };
        let tokens = (0..20).map(|j| pair[(j * 7 + i) % 3 % 2].to_string()).collect();
        docs.push(TokenizedDoc::new(format!("d{i}"), tokens));
    }
    let model = fit_lda_gibbs(&docs, &LdaConfig { seed: 3, ..LdaConfig::new(2) }).unwrap();
    let idx = |w: &str| model.vocab.iter().position(|v| v == w).unwrap();
    let mass = |t: usize, ws: [&str; 2]| ws.iter().map(|w| model.phi[t][idx(w)]).sum::<f64>();
    let direct = mass(0, ["a", "b"]).min(mass(1, ["c", "d"]));
    let swapped = mass(0, ["c", "d"]).min(mass(1, ["a", "b"]));
    assert!(direct.max(swapped) >= 0.9, "direct {direct} swapped {swapped}");
}

#[test]
fn planted_topics_recovered_with_conservation() {
    let planted = planted_topics(2, 10, 100, 20, 11);
    let corpus = TopicCorpus::from_docs(&planted.docs).unwrap();
    let cfg = LdaConfig { seed: 5, ..LdaConfig::new(2) };
    let mut sampler = GibbsSampler::new(&corpus, &cfg).unwrap();
    for it in 1..=cfg.iterations {
        sampler.sweep();
        if [1, 100, 1000].contains(&it) {
            assert!(sampler.counts_consistent(), "iteration {it}");
        }
    }
    let model = sampler.into_model();
    let found: Vec<Vec<String>> = (0..2).map(|t| top_n(&model, t, 10)).collect();
    let overlap = best_permutation_overlap(&found, &planted.topics);
    assert!(overlap.iter().all(|&o| o >= 9), "{overlap:?}");
}

#[test]
fn coherence_prefers_planted_topic_count() {
    let planted = planted_topics(2, 10, 100, 20, 2);
    let two = fit_lda_gibbs(&planted.docs, &LdaConfig { seed: 1, ..LdaConfig::new(2) }).unwrap();
    let eight = fit_lda_gibbs(&planted.docs, &LdaConfig { seed: 1, ..LdaConfig::new(8) }).unwrap();
    let c2 = coherence_umass(&two, &planted.docs, 10).mean;
    let c8 = coherence_umass(&eight, &planted.docs, 10).mean;
    assert!(c2 > c8, "K=2 {c2} vs K=8 {c8}");
}

#[test]
fn select_k_finds_five_planted_topics() {
    let mut hits = 0;
    let mut tables = Vec::new();
    for seed in 0..5u64 {
        let planted = planted_topics(5, 10, 40, 20, 100 + seed);
        let sel = select_k(&planted.docs, &DEFAULT_KS, &LdaConfig { seed, ..LdaConfig::new(5) }, 10).unwrap();
        assert_eq!(sel.scores.len(), DEFAULT_KS.len());
        if sel.best_k == 5 {
            hits += 1;
        }
        tables.push(sel.scores);
    }
    assert!(hits >= 4, "{hits}/5 runs chose K=5: {tables:?}");
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let n = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (n(a) * n(b))
}

#[test]
fn four_to_two_merge_matches_pairing_oracle() {
    let rows = vec![
        vec![0.70, 0.20, 0.05, 0.05],
        vec![0.05, 0.05, 0.60, 0.30],
        vec![0.60, 0.30, 0.05, 0.05],
        vec![0.05, 0.10, 0.50, 0.35],
    ];
    // The three ways to split four topics into two pairs; the agglomerative
    // result must be the pairing whose weakest pair is strongest here.
    let pairings = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
    let best = pairings
        .iter()
        .max_by(|x, y| {
            let s = |p: &[(usize, usize); 2]| p.iter().map(|&(a, b)| cosine(&rows[a], &rows[b])).fold(f64::MAX, f64::min);
            s(x).partial_cmp(&s(y)).unwrap()
        })
        .unwrap();
    let clusters = cluster_rows(&rows, 2).unwrap();
    let mut members: Vec<Vec<usize>> = clusters.iter().map(|c| c.members.clone()).collect();
    members.sort();
    let mut expected: Vec<Vec<usize>> = best.iter().map(|&(a, b)| vec![a, b]).collect();
    expected.sort();
    assert_eq!(members, expected);
    for c in &clusters {
        for w in 0..4 {
            let mean = c.members.iter().map(|&m| rows[m][w]).sum::<f64>() / c.members.len() as f64;
            assert!((c.distribution[w] - mean).abs() <= 1e-12);
        }
        assert!((c.distribution.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn uniform_cluster_lists_lexicographic_words() {
    let vocab: Vec<String> = ["delta", "alpha", "charlie", "bravo"].iter().map(|s| s.to_string()).collect();
    let cluster = TopicCluster {
        members: vec![0],
        distribution: vec![0.25; 4],
    };
    let words: Vec<String> = top_words(&cluster, &vocab, 3).unwrap().into_iter().map(|w| w.0).collect();
    assert_eq!(words, ["alpha", "bravo", "charlie"]);
}

fn quick_options() -> PipelineOptions {
    PipelineOptions {
        ks: vec![5, 10],
        lda: LdaConfig { iterations: 300, burn_in: 50, ..LdaConfig::new(5) },
        ..PipelineOptions::default()
    }
}

#[test]
fn pipeline_recovers_planted_keywords_per_cell() {
    let data = planted_tweets(60, 5, 6, 12, 9);
    let grid = run_topic_pipeline(&data.corpus, &data.labels, &quick_options()).unwrap();
    assert_eq!(grid.cells.len(), 12);
    for cell in &grid.cells {
        assert_eq!(cell.status, CellStatus::Fitted);
        assert_eq!(cell.clusters.len(), 5);
        let planted: Vec<String> = data.keywords[&(cell.category.code(), cell.stage.index())].concat();
        for cluster in &cell.clusters {
            assert_eq!(cluster.top_words.len(), 10);
            assert!(cluster.top_words.iter().any(|w| planted.contains(w)), "{:?}", cluster.top_words);
        }
        // Every planted keyword surfaces somewhere in the cell.
        let shown: Vec<&String> = cell.clusters.iter().flat_map(|c| &c.top_words).collect();
        assert!(planted.iter().all(|w| shown.contains(&w)), "{}/{}", cell.category, cell.stage);
    }
}

#[test]
fn single_populated_cell_leaves_eleven_insufficient() {
    let data = planted_tweets(60, 5, 6, 12, 4);
    let keep: std::collections::BTreeMap<_, _> = data
        .labels
        .iter()
        .filter(|(id, c)| **c == Category::Blame && data.corpus.get(id).unwrap().stage().unwrap() == Stage::S1)
        .map(|(id, c)| (id.clone(), *c))
        .collect();
    let grid = run_topic_pipeline(&data.corpus, &keep, &quick_options()).unwrap();
    let insufficient = grid.cells.iter().filter(|c| c.status == CellStatus::Insufficient).count();
    assert_eq!(insufficient, 11);
    assert_eq!(grid.cell(Category::Blame, Stage::S1).unwrap().status, CellStatus::Fitted);
}
