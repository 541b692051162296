//! Synthetic corpora with planted structure, for tests and demos.

use std::collections::BTreeMap;

use chrono::{DateTime, Days, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Category, Corpus, Stage, Tweet};
use crate::preprocess::TokenizedDoc;

/// Word `j` of planted topic `t`. Names interleave topics in lexicographic
/// order so that alphabetical ties never line up with a planted topic.
pub fn topic_word(t: usize, j: usize) -> String {
    format!("w{j:02}t{t}")
}

#[derive(Debug, Clone)]
pub struct PlantedTopics {
    pub docs: Vec<TokenizedDoc>,
    /// Words of each planted topic.
    pub topics: Vec<Vec<String>>,
    /// Planted topic of each document.
    pub doc_topic: Vec<usize>,
}

/// Single-topic documents: each token is drawn uniformly from the document's
/// planted topic vocabulary.
pub fn planted_topics(
    n_topics: usize,
    words_per_topic: usize,
    docs_per_topic: usize,
    doc_len: usize,
    seed: u64,
) -> PlantedTopics {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics: Vec<Vec<String>> = (0..n_topics)
        .map(|t| (0..words_per_topic).map(|j| topic_word(t, j)).collect())
        .collect();
    let mut order: Vec<usize> = (0..n_topics * docs_per_topic).map(|i| i % n_topics).collect();
    order.shuffle(&mut rng);
    let docs = order
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let tokens = (0..doc_len)
                .map(|_| topics[t][rng.gen_range(0..words_per_topic)].clone())
                .collect();
            TokenizedDoc::new(format!("d{i}"), tokens)
        })
        .collect();
    PlantedTopics {
        docs,
        topics,
        doc_topic: order,
    }
}

#[derive(Debug, Clone)]
pub struct PlantedClasses {
    pub docs: Vec<String>,
    pub labels: Vec<Category>,
    pub class_vocab: Vec<Vec<String>>,
    pub noise_vocab: Vec<String>,
}

/// Five classes with disjoint vocabularies plus shared noise words. Each
/// document mixes `class_tokens` class words with `noise_tokens` noise words.
pub fn planted_classes(
    docs_per_class: usize,
    class_words: usize,
    noise_words: usize,
    class_tokens: usize,
    noise_tokens: usize,
    seed: u64,
) -> PlantedClasses {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_vocab: Vec<Vec<String>> = Category::ALL
        .iter()
        .map(|c| (0..class_words).map(|j| format!("c{}x{j}", c.code())).collect())
        .collect();
    let noise_vocab: Vec<String> = (0..noise_words).map(|j| format!("noise{j}")).collect();
    let mut labels: Vec<Category> = (0..docs_per_class * Category::COUNT)
        .map(|i| Category::ALL[i % Category::COUNT])
        .collect();
    labels.shuffle(&mut rng);
    let docs = labels
        .iter()
        .map(|c| {
            let mut tokens: Vec<&str> = (0..class_tokens)
                .map(|_| class_vocab[c.code()][rng.gen_range(0..class_words)].as_str())
                .collect();
            tokens.extend((0..noise_tokens).map(|_| noise_vocab[rng.gen_range(0..noise_words)].as_str()));
            tokens.shuffle(&mut rng);
            tokens.join(" ")
        })
        .collect();
    PlantedClasses {
        docs,
        labels,
        class_vocab,
        noise_vocab,
    }
}

fn stage_day(stage: Stage, rng: &mut ChaCha8Rng) -> DateTime<Utc> {
    let (start, end) = stage.window();
    let span = (end - start).num_days() as u64;
    let day = start + Days::new(rng.gen_range(0..=span));
    Utc.from_utc_datetime(&day.and_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0).expect("valid time"))
}

#[derive(Debug, Clone)]
pub struct PlantedTweets {
    pub corpus: Corpus,
    pub labels: BTreeMap<String, Category>,
    /// Planted keywords per (racist category code, stage index), grouped by
    /// planted topic.
    pub keywords: BTreeMap<(usize, usize), Vec<Vec<String>>>,
}

/// Labeled tweets for every (racist category, stage) cell plus some
/// non-racist filler. Each cell has its own planted topics; tweets carry a
/// mention, a hashtag and a URL that topic cleaning must strip.
pub fn planted_tweets(docs_per_cell: usize, topics_per_cell: usize, words_per_topic: usize, doc_len: usize, seed: u64) -> PlantedTweets {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tweets = Vec::new();
    let mut labels = BTreeMap::new();
    let mut keywords = BTreeMap::new();
    let mut next_id = 0usize;
    for c in Category::RACIST {
        for s in Stage::ALL {
            let words: Vec<Vec<String>> = (0..topics_per_cell)
                .map(|t| {
                    (0..words_per_topic)
                        .map(|j| format!("{}{}w{j:02}t{t}", c.name().to_lowercase(), s.name().to_lowercase()))
                        .collect()
                })
                .collect();
            for i in 0..docs_per_cell {
                let topic = &words[i % topics_per_cell];
                let body: Vec<&str> = (0..doc_len)
                    .map(|_| topic[rng.gen_range(0..words_per_topic)].as_str())
                    .collect();
                let text = format!("@someone {} #ChinaVirus https://t.co/x{next_id}", body.join(" "));
                let id = format!("t{next_id}");
                next_id += 1;
                labels.insert(id.clone(), c);
                tweets.push(Tweet::new(id, text, stage_day(s, &mut rng)));
            }
            keywords.insert((c.code(), s.index()), words);
        }
    }
    for _ in 0..docs_per_cell {
        let s = Stage::ALL[rng.gen_range(0..3)];
        let id = format!("t{next_id}");
        next_id += 1;
        labels.insert(id.clone(), Category::NonRacist);
        tweets.push(Tweet::new(id, "stay safe and wash your hands", stage_day(s, &mut rng)));
    }
    tweets.shuffle(&mut rng);
    let corpus = Corpus::new(tweets).expect("unique ids").with_labels(labels.clone()).expect("known ids");
    PlantedTweets {
        corpus,
        labels,
        keywords,
    }
}

/// A fixed 1,000-tweet collection for exercising snowball discovery.
/// Tweet `i` has id `i` and carries these hashtags:
///
/// | ids      | hashtags                                  |
/// |----------|-------------------------------------------|
/// | 0..400   | chinavirus, ccpvirus                      |
/// | 0..200   | + kungflu                                 |
/// | 0..80    | + covid19                                 |
/// | 400..700 | wuhanvirus                                |
/// | 400..550 | + kungflu                                 |
/// | 430..440 | + batsoup                                 |
/// | 550..580 | + boycottchina                            |
/// | 580..610 | + chinaflu                                |
/// | 700..900 | ccpvirus                                  |
/// | 700..820 | + chinaliedpeopledied                     |
/// | 820..900 | + wuhan                                   |
/// | 850..900 | + kungflu                                 |
/// | 900..1000| covid19                                   |
/// | 900..949 | + stayhome                                |
pub fn snowball_trace_tweets() -> Vec<Tweet> {
    let spans: [(&str, std::ops::Range<usize>); 15] = [
        ("chinavirus", 0..400),
        ("ccpvirus", 0..400),
        ("kungflu", 0..200),
        ("covid19", 0..80),
        ("wuhanvirus", 400..700),
        ("kungflu", 400..550),
        ("batsoup", 430..440),
        ("boycottchina", 550..580),
        ("chinaflu", 580..610),
        ("ccpvirus", 700..900),
        ("chinaliedpeopledied", 700..820),
        ("wuhan", 820..900),
        ("kungflu", 850..900),
        ("covid19", 900..1000),
        ("stayhome", 900..949),
    ];
    let when = Utc.with_ymd_and_hms(2020, 3, 1, 12, 0, 0).single().expect("valid date");
    (0..1000)
        .map(|i| {
            let tags: Vec<String> = spans
                .iter()
                .filter(|(_, r)| r.contains(&i))
                .map(|(t, _)| format!("#{t}"))
                .collect();
            Tweet::new(i.to_string(), format!("tweet {i} {}", tags.join(" ")), when)
        })
        .collect()
}
