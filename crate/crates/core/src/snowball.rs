//! Dynamic hashtag selection by snowball sampling.
//!
//! Starting from seed hashtags, each round samples tweets for the current
//! query hashtags, counts the co-occurring hashtags that have not been used
//! or found yet, and promotes the most frequent ones to the next round.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowballConfig {
    pub seeds: Vec<String>,
    pub sample_size: usize,
    pub top_k: usize,
    /// Occurrence floor applied from the second round onwards.
    pub min_occurrences: usize,
    pub rounds: usize,
}

impl SnowballConfig {
    pub fn new<S: AsRef<str>>(seeds: &[S]) -> Self {
        SnowballConfig {
            seeds: seeds
                .iter()
                .map(|s| s.as_ref().trim_start_matches('#').to_lowercase())
                .collect(),
            sample_size: 500,
            top_k: 5,
            min_occurrences: 50,
            rounds: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("snowball needs at least one seed".into()));
        }
        if self.sample_size == 0 || self.top_k == 0 || self.min_occurrences == 0 {
            return Err(Error::Config(
                "sample_size, top_k and min_occurrences must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn floor_for_round(&self, round: usize) -> usize {
        if round == 1 {
            1
        } else {
            self.min_occurrences
        }
    }
}

/// A source of tweets containing a given hashtag.
///
/// Implementations must only return tweets that carry the queried hashtag.
pub trait TweetProvider {
    fn sample(&self, hashtag: &str, n: usize) -> std::result::Result<Vec<Tweet>, String>;
}

/// Replays a stored corpus: returns the first `n` tweets, in corpus order,
/// that carry the hashtag.
pub struct OfflineProvider<'a> {
    tweets: &'a [Tweet],
}

impl<'a> OfflineProvider<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        OfflineProvider {
            tweets: corpus.tweets(),
        }
    }

    pub fn from_tweets(tweets: &'a [Tweet]) -> Self {
        OfflineProvider { tweets }
    }
}

impl TweetProvider for OfflineProvider<'_> {
    fn sample(&self, hashtag: &str, n: usize) -> std::result::Result<Vec<Tweet>, String> {
        Ok(self
            .tweets
            .iter()
            .filter(|t| t.has_hashtag(hashtag))
            .take(n)
            .cloned()
            .collect())
    }
}

/// Hashtag occurrence counts within a sample.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyTable(pub BTreeMap<String, usize>);

impl FrequencyTable {
    pub fn get(&self, tag: &str) -> usize {
        self.0.get(tag).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Counts every hashtag occurrence, including repeats inside one tweet.
pub fn count_hashtags(sample: &[Tweet], exclude: &BTreeSet<String>) -> FrequencyTable {
    let mut table = BTreeMap::new();
    for tag in sample.iter().flat_map(|t| &t.hashtags) {
        if !exclude.contains(tag) {
            *table.entry(tag.clone()).or_insert(0) += 1;
        }
    }
    FrequencyTable(table)
}

/// The `k` most frequent hashtags with at least `floor` occurrences.
/// Ties are broken lexicographically.
pub fn top_hashtags(table: &FrequencyTable, k: usize, floor: usize) -> Vec<String> {
    let mut ranked: Vec<(&String, usize)> = table
        .0
        .iter()
        .filter(|(_, &c)| c >= floor)
        .map(|(t, &c)| (t, c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(t, _)| t.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub hashtag: String,
    pub sample_size: usize,
    pub frequencies: FrequencyTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub floor: usize,
    pub queried: Vec<String>,
    pub samples: Vec<SampleEntry>,
    pub skipped: Vec<String>,
    /// Counts over the round's distinct sampled tweets.
    pub combined: FrequencyTable,
    /// Newly discovered hashtags with their combined counts.
    pub discovered: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowballResult {
    /// Seeds followed by discovered hashtags in discovery order.
    pub hashtags: Vec<String>,
    pub rounds: Vec<RoundLog>,
}

impl SnowballResult {
    pub fn discovered(&self) -> impl Iterator<Item = &(String, usize)> {
        self.rounds.iter().flat_map(|r| &r.discovered)
    }
}

pub fn run_snowball<P: TweetProvider + ?Sized>(
    provider: &P,
    config: &SnowballConfig,
) -> Result<SnowballResult> {
    config.validate()?;

    let mut hashtags: Vec<String> = Vec::new();
    let mut known: BTreeSet<String> = BTreeSet::new();
    for s in &config.seeds {
        if known.insert(s.clone()) {
            hashtags.push(s.clone());
        }
    }

    let mut query = hashtags.clone();
    let mut rounds = Vec::new();
    for round in 1..=config.rounds {
        let floor = config.floor_for_round(round);
        let mut samples = Vec::new();
        let mut skipped = Vec::new();
        let mut combined_tweets: Vec<Tweet> = Vec::new();
        let mut seen_ids = HashSet::new();

        for tag in &query {
            let sample = provider
                .sample(tag, config.sample_size)
                .map_err(|message| Error::Provider {
                    hashtag: tag.clone(),
                    message,
                })?;
            if sample.is_empty() {
                skipped.push(tag.clone());
                continue;
            }
            samples.push(SampleEntry {
                hashtag: tag.clone(),
                sample_size: sample.len(),
                frequencies: count_hashtags(&sample, &known),
            });
            for t in sample {
                if seen_ids.insert(t.id.clone()) {
                    combined_tweets.push(t);
                }
            }
        }

        let combined = count_hashtags(&combined_tweets, &known);
        let picked = top_hashtags(&combined, config.top_k, floor);
        let discovered: Vec<(String, usize)> = picked
            .into_iter()
            .map(|t| {
                let c = combined.get(&t);
                (t, c)
            })
            .collect();
        for (t, _) in &discovered {
            known.insert(t.clone());
            hashtags.push(t.clone());
        }

        let done = discovered.is_empty();
        let next: Vec<String> = discovered.iter().map(|(t, _)| t.clone()).collect();
        rounds.push(RoundLog {
            round,
            floor,
            queried: std::mem::replace(&mut query, next),
            samples,
            skipped,
            combined,
            discovered,
        });
        if done {
            break;
        }
    }

    Ok(SnowballResult { hashtags, rounds })
}
