//! Optional TOML run configuration. Command-line flags take precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub data: DataSection,
    pub classify: ClassifySection,
    pub topics: TopicsSection,
    pub snowball: SnowballSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub preds: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub features: Option<String>,
    pub folds: Option<usize>,
    pub lambda: Option<f64>,
    pub epochs: Option<usize>,
    pub eta0: Option<f64>,
    pub min_df: Option<usize>,
    pub embeddings: Option<PathBuf>,
    pub grid_lambdas: Option<Vec<f64>>,
    pub grid_epochs: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsSection {
    pub ks: Option<Vec<usize>>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub optimize_interval: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub clusters: Option<usize>,
    pub min_docs: Option<usize>,
    pub top_n: Option<usize>,
    pub bigrams: Option<bool>,
    pub bigram_min_count: Option<usize>,
    pub bigram_threshold: Option<f64>,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnowballSection {
    pub seeds: Option<Vec<String>>,
    pub sample_size: Option<usize>,
    pub top_k: Option<usize>,
    pub min_occurrences: Option<usize>,
    pub rounds: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message())))
    }
}
