use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stagewise::classify::{
    cross_validate, evaluate, grid_search, predict, stratified_kfold, train_ovr_svm, CvOptions, LinearModel,
    TrainConfig,
};
use stagewise::features::{build_vocab, tfidf_vector, FeatureKind, Featurizer};
use stagewise::synth::planted_classes;
use stagewise::Category;

/// Dense TF-IDF written from the formulas alone: unigrams plus adjacent
/// bigrams, smoothed idf, L2 normalization, terms ordered lexicographically.
fn dense_tfidf(docs: &[String], min_df: usize) -> (Vec<String>, Vec<Vec<f64>>) {
    let grams = |d: &str| {
        let toks: Vec<&str> = d.split_whitespace().collect();
        let mut g: Vec<String> = toks.iter().map(|s| s.to_string()).collect();
        for i in 1..toks.len() {
            g.push(format!("{} {}", toks[i - 1], toks[i]));
        }
        g
    };
    let mut all = BTreeSet::new();
    for d in docs {
        all.extend(grams(d));
    }
    let n = docs.len() as f64;
    let terms: Vec<String> = all
        .into_iter()
        .filter(|t| docs.iter().filter(|d| grams(d).contains(t)).count() >= min_df)
        .collect();
    let idf: Vec<f64> = terms
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| grams(d).contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let rows = docs
        .iter()
        .map(|d| {
            let g = grams(d);
            let mut row: Vec<f64> = terms
                .iter()
                .zip(&idf)
                .map(|(t, w)| g.iter().filter(|x| *x == t).count() as f64 * w)
                .collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
            row
        })
        .collect();
    (terms, rows)
}

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<String> {
    let words = ["red", "green", "blue", "virus", "china", "flu", "mask", "wuhan", "ban", "x"];
    let n_docs = rng.gen_range(2..=30);
    (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(1..=12);
            (0..len).map(|_| *words.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

#[test]
fn sparse_tfidf_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let docs = random_corpus(&mut rng);
        let min_df = rng.gen_range(1..=2);
        let (terms, dense) = dense_tfidf(&docs, min_df);
        let Ok(vocab) = build_vocab(&docs, min_df) else {
            assert!(terms.is_empty());
            continue;
        };
        assert_eq!(vocab.terms(), terms.as_slice());
        for (doc, expected) in docs.iter().zip(&dense) {
            let got = tfidf_vector(doc, &vocab).to_dense(vocab.len());
            for (g, e) in got.iter().zip(expected) {
                assert!((g - e).abs() <= 1e-10, "{g} vs {e}");
            }
        }
    }
}

#[test]
fn hand_computed_single_term_weight() {
    let docs = ["a b", "b"];
    let vocab = build_vocab(&docs, 1).unwrap();
    let a = vocab.index_of("a").unwrap();
    assert!((vocab.idf(a) - ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
    let v = tfidf_vector("a", &vocab);
    assert_eq!(v.entries(), &[(a, 1.0)]);
}

/// Multiclass perceptron: if it reaches zero training errors the data is
/// linearly separable, which is what the SVM should then fit exactly.
fn perceptron_separates(xs: &[Vec<f64>], ys: &[usize]) -> bool {
    let dim = xs[0].len();
    let mut w = vec![vec![0.0; dim + 1]; 5];
    for _ in 0..1000 {
        let mut errors = 0;
        for (x, &y) in xs.iter().zip(ys) {
            let score = |c: usize| w[c][dim] + x.iter().zip(&w[c]).map(|(a, b)| a * b).sum::<f64>();
            let pred = (0..5).max_by(|&a, &b| score(a).partial_cmp(&score(b)).unwrap().then(b.cmp(&a))).unwrap();
            if pred != y {
                errors += 1;
                for j in 0..dim {
                    w[y][j] += x[j];
                    w[pred][j] -= x[j];
                }
                w[y][dim] += 1.0;
                w[pred][dim] -= 1.0;
            }
        }
        if errors == 0 {
            return true;
        }
    }
    false
}

#[test]
fn separable_corpus_is_fit_exactly() {
    let data = planted_classes(8, 20, 30, 8, 4, 1);
    let f = Featurizer::fit(FeatureKind::Tfidf, &data.docs, 1, None).unwrap();
    let xs = f.transform_all(&data.docs);
    let dense: Vec<Vec<f64>> = xs.iter().map(|x| x.to_dense(f.dim())).collect();
    let codes: Vec<usize> = data.labels.iter().map(|c| c.code()).collect();
    assert!(perceptron_separates(&dense, &codes));

    let model = train_ovr_svm(&xs, &data.labels, f.kind(), f.dim(), &TrainConfig::default()).unwrap();
    let correct = xs.iter().zip(&data.labels).filter(|(x, y)| predict(&model, x).0 == **y).count();
    assert_eq!(correct, data.docs.len());
}

fn nearest_centroid_cv(docs: &[String], labels: &[Category], folds: &[usize]) -> f64 {
    let mut accs = Vec::new();
    for f in 0..5 {
        let train: Vec<usize> = (0..docs.len()).filter(|&i| folds[i] != f).collect();
        let train_docs: Vec<&str> = train.iter().map(|&i| docs[i].as_str()).collect();
        let vocab = build_vocab(&train_docs, 2).unwrap();
        let mut centroids = vec![vec![0.0; vocab.len()]; 5];
        for &i in &train {
            for &(j, v) in tfidf_vector(&docs[i], &vocab).entries() {
                centroids[labels[i].code()][j] += v;
            }
        }
        let test: Vec<usize> = (0..docs.len()).filter(|&i| folds[i] == f).collect();
        let hits = test
            .iter()
            .filter(|&&i| {
                let x = tfidf_vector(&docs[i], &vocab);
                let best = (0..5)
                    .max_by(|&a, &b| x.dot(&centroids[a]).partial_cmp(&x.dot(&centroids[b])).unwrap())
                    .unwrap();
                best == labels[i].code()
            })
            .count();
        accs.push(hits as f64 / test.len() as f64);
    }
    accs.iter().sum::<f64>() / 5.0
}

#[test]
fn planted_classes_recovered_in_cross_validation() {
    let data = planted_classes(100, 20, 30, 6, 6, 7);
    let opts = CvOptions::new(FeatureKind::Tfidf);
    let folds = stratified_kfold(&data.labels, 5, opts.fold_seed).unwrap();
    let centroid = nearest_centroid_cv(&data.docs, &data.labels, &folds);
    assert!(centroid >= 0.95, "centroid oracle {centroid}");

    let report = cross_validate(&data.docs, &data.labels, &opts, &TrainConfig::default()).unwrap();
    assert!(report.mean_accuracy >= 0.95, "{}", report.mean_accuracy);
    assert!(report.mean_weighted_f1 >= 0.95, "{}", report.mean_weighted_f1);

    let mut shuffled = data.labels.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let chance = cross_validate(&data.docs, &shuffled, &opts, &TrainConfig::default()).unwrap();
    assert!((0.1..=0.3).contains(&chance.mean_accuracy), "{}", chance.mean_accuracy);
}

#[test]
fn grid_prefers_sane_regularization() {
    let data = planted_classes(30, 20, 30, 6, 6, 5);
    let grid = [
        TrainConfig { lambda: 1e6, ..TrainConfig::default() },
        TrainConfig { lambda: 1e-4, ..TrainConfig::default() },
    ];
    let result = grid_search(&data.docs, &data.labels, &grid, &CvOptions::new(FeatureKind::Tfidf)).unwrap();
    assert_eq!(result.best_index, 1);
    assert!(result.candidates[0].mean_weighted_f1 < result.candidates[1].mean_weighted_f1);
}

#[test]
fn test_only_terms_never_reach_the_vocabulary() {
    let data = planted_classes(20, 20, 30, 6, 6, 8);
    let opts = CvOptions::new(FeatureKind::Tfidf);
    let cfg = TrainConfig::default();
    let base = cross_validate(&data.docs, &data.labels, &opts, &cfg).unwrap();

    let folds = stratified_kfold(&data.labels, opts.folds, opts.fold_seed).unwrap();
    let mut leaked = data.docs.clone();
    for i in (0..leaked.len()).filter(|&i| folds[i] == 0).take(3) {
        leaked[i] = format!("{} leakterm", leaked[i]);
    }
    let after = cross_validate(&leaked, &data.labels, &opts, &cfg).unwrap();
    assert_eq!(after.fold_dims[0], base.fold_dims[0]);
    for f in 1..opts.folds {
        assert!(after.fold_dims[f] > base.fold_dims[f]);
    }
}

#[test]
fn hand_derived_metrics() {
    use Category::{Offensiveness as B, Stigmatization as A};
    let e = evaluate(&[A, B, B, B], &[A, A, B, B]).unwrap();
    assert_eq!(e.accuracy, 0.75);
    assert!((e.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
    assert!((e.per_class[1].f1 - 0.8).abs() < 1e-12);
    assert!((e.weighted_f1 - 0.7333333333333333).abs() < 1e-9);
}

fn category() -> impl Strategy<Value = Category> {
    (0usize..5).prop_map(|c| Category::ALL[c])
}

fn training_set() -> impl Strategy<Value = (Vec<Vec<(usize, f64)>>, Vec<Category>)> {
    (2usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec((0usize..12, -2.0f64..2.0), 1..6), n),
            prop::collection::vec(category(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn training_never_raises_the_objective((rows, ys) in training_set(), lambda in 1e-3f64..1.0, seed in 0u64..100) {
        prop_assume!(ys.iter().any(|y| *y != ys[0]));
        let xs: Vec<_> = rows.into_iter().map(stagewise::features::FeatureVector::from_pairs).collect();
        let cfg = TrainConfig { lambda, epochs: 20, seed, ..TrainConfig::default() };
        let model = train_ovr_svm(&xs, &ys, FeatureKind::Bow, 12, &cfg).unwrap();
        let start = LinearModel::zeros(FeatureKind::Bow, 12).objective(&xs, &ys, lambda);
        prop_assert!(model.objective(&xs, &ys, lambda) <= start + 1e-9);
    }

    #[test]
    fn argmax_ignores_positive_scaling(scores in prop::array::uniform5(-5.0f64..5.0), scale in 1e-3f64..1e3) {
        let scaled: Vec<f64> = scores.iter().map(|s| s * scale).collect();
        prop_assert_eq!(stagewise::classify::argmax(&scores), stagewise::classify::argmax(&scaled));
    }

    #[test]
    fn folds_partition_every_label_vector(ys in prop::collection::vec(category(), 5..200), seed in any::<u64>()) {
        let folds = stratified_kfold(&ys, 5, seed).unwrap();
        prop_assert_eq!(folds.len(), ys.len());
        let mut per: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (y, f) in ys.iter().zip(&folds) {
            prop_assert!(*f < 5);
            *per.entry((y.code(), *f)).or_insert(0) += 1;
        }
        for c in 0..5 {
            let counts: Vec<usize> = (0..5).map(|f| per.get(&(c, f)).copied().unwrap_or(0)).collect();
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn diagonal_confusion_gives_unit_scores(gold in prop::collection::vec(category(), 1..100)) {
        let e = evaluate(&gold, &gold).unwrap();
        prop_assert_eq!(e.accuracy, 1.0);
        prop_assert!((e.weighted_f1 - e.accuracy).abs() < 1e-12);
    }
}
