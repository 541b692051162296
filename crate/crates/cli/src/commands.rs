use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use stagewise::classify::{
    self, cross_validate, default_grid, evaluate, grid_search, predict, train_ovr_svm, CvOptions, CvReport,
    LinearModel, TrainConfig,
};
use stagewise::corpus::{self, daily_counts, load_corpus, load_labels, stage_category_counts, StageCounts};
use stagewise::features::{load_embeddings, EmbeddingTable, FeatureKind, Featurizer};
use stagewise::preprocess::{clean_for_classification, clean_for_topics, doc_token_stats, BigramPolicy, Lexicon};
use stagewise::report::{
    comparison_csv, comparison_markdown, counts_csv, counts_markdown, intercoder_reliability, reliability_csv,
    render_tables, ComparisonRow, ReportInputs,
};
use stagewise::snowball::{run_snowball, OfflineProvider, SnowballConfig};
use stagewise::topics::{run_topic_pipeline, LdaConfig, PipelineOptions, TopicGrid};
use stagewise::{Category, Corpus};

use crate::config::FileConfig;
use crate::manifest::Run;
use crate::{ClassifyArgs, Cli, CliError, Command};

const MODEL_FILE: &str = "models/model.json";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        file,
        config_path: cli.config.clone(),
    };
    let name = command_name(&cli.command);
    let mut run = Run::new(&cli.out, name)?;
    if let Some(p) = &ctx.config_path {
        run.input(p)?;
    }
    match cli.command {
        Command::Ingest { corpus, labels } => ingest(&ctx, &mut run, &corpus, labels.as_deref())?,
        Command::Snowball {
            corpus,
            seeds,
            sample_size,
            top_k,
            min_occurrences,
            rounds,
        } => {
            let s = &ctx.file.snowball;
            let seeds = if seeds.is_empty() {
                s.seeds.clone().unwrap_or_default()
            } else {
                seeds
            };
            let mut cfg = SnowballConfig::new(&seeds);
            cfg.sample_size = sample_size.or(s.sample_size).unwrap_or(cfg.sample_size);
            cfg.top_k = top_k.or(s.top_k).unwrap_or(cfg.top_k);
            cfg.min_occurrences = min_occurrences.or(s.min_occurrences).unwrap_or(cfg.min_occurrences);
            cfg.rounds = rounds.or(s.rounds).unwrap_or(cfg.rounds);
            snowball(&ctx, &mut run, corpus, cfg)?
        }
        Command::Reliability { annotations } => reliability(&mut run, &annotations)?,
        Command::Cv(args) => cv(&ctx, &mut run, &args)?,
        Command::Grid(args) => grid(&ctx, &mut run, &args)?,
        Command::Train(args) => train(&ctx, &mut run, &args)?,
        Command::Predict { corpus, model } => predict_cmd(&ctx, &mut run, corpus, &model)?,
        Command::ImportPreds { preds, corpus } => import_preds(&ctx, &mut run, &preds, corpus)?,
        Command::Topics {
            corpus,
            preds,
            ks,
            iterations,
            min_docs,
        } => topics(&ctx, &mut run, corpus, preds, ks, iterations, min_docs)?,
        Command::Report {
            corpus,
            preds,
            cv,
            topics,
        } => report(&ctx, &mut run, corpus, preds, &cv, topics)?,
    }
    run.finish()
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest { .. } => "ingest",
        Command::Snowball { .. } => "snowball",
        Command::Reliability { .. } => "reliability",
        Command::Cv(_) => "cv",
        Command::Grid(_) => "grid",
        Command::Train(_) => "train",
        Command::Predict { .. } => "predict",
        Command::ImportPreds { .. } => "import-preds",
        Command::Topics { .. } => "topics",
        Command::Report { .. } => "report",
    }
}

struct Context {
    seed: u64,
    file: FileConfig,
    config_path: Option<PathBuf>,
}

impl Context {
    fn corpus_path(&self, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.or_else(|| self.file.data.corpus.clone())
            .ok_or_else(|| CliError::input("no corpus given (use --corpus or [data] corpus)"))
    }

    fn labels_path(&self, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.or_else(|| self.file.data.labels.clone())
            .ok_or_else(|| CliError::input("no labels given (use --labels or [data] labels)"))
    }

    fn preds_path(&self, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.or_else(|| self.file.data.preds.clone())
            .or_else(|| self.file.data.labels.clone())
            .ok_or_else(|| CliError::input("no predictions given (use --preds or [data] preds)"))
    }

    fn lexicon(&self, run: &mut Run) -> Result<Lexicon, CliError> {
        let t = &self.file.topics;
        match (&t.stopwords, &t.lemmas) {
            (None, None) => Ok(Lexicon::english()),
            (Some(s), Some(l)) => {
                run.input(s)?;
                run.input(l)?;
                Ok(Lexicon::from_files(s, l)?)
            }
            _ => Err(CliError::input("[topics] stopwords and lemmas must be given together")),
        }
    }
}

fn load_corpus_recorded(run: &mut Run, path: &Path) -> Result<Corpus, CliError> {
    run.input(path)?;
    Ok(load_corpus(path)?)
}

fn load_labels_recorded(run: &mut Run, path: &Path) -> Result<BTreeMap<String, Category>, CliError> {
    run.input(path)?;
    Ok(load_labels(path)?)
}

fn token_stats(corpus: &Corpus, lexicon: &Lexicon) -> Result<stagewise::preprocess::TokenStats, CliError> {
    let docs: Vec<_> = corpus
        .tweets()
        .iter()
        .map(|t| clean_for_topics(&t.id, &t.text, lexicon))
        .collect();
    Ok(doc_token_stats(&docs)?)
}

#[derive(Serialize)]
struct IngestSummary {
    tweets: usize,
    hashtags: usize,
    first_day: Option<String>,
    last_day: Option<String>,
    labeled: Option<usize>,
    counts: Option<StageCounts>,
    token_lengths: stagewise::preprocess::TokenStats,
}

fn ingest(ctx: &Context, run: &mut Run, corpus_path: &Path, labels: Option<&Path>) -> Result<(), CliError> {
    let corpus = load_corpus_recorded(run, corpus_path)?;
    if corpus.is_empty() {
        return Err(CliError::input(format!("{}: corpus is empty", corpus_path.display())));
    }
    let lexicon = ctx.lexicon(run)?;
    let daily = daily_counts(&corpus);
    let stats = token_stats(&corpus, &lexicon)?;
    run.write("tables/daily_counts.csv", stagewise::report::daily_csv(&daily))?;
    run.write("tables/token_lengths.csv", stagewise::report::token_stats_csv(&stats))?;

    let mut counts = None;
    let mut labeled = None;
    if let Some(p) = labels {
        let map = load_labels_recorded(run, p)?;
        let corpus = corpus.clone().with_labels(map.clone())?;
        let c = stage_category_counts(&corpus, &map);
        run.write("tables/stage_counts.csv", counts_csv(&c))?;
        run.write("tables/stage_counts.md", counts_markdown(&c))?;
        labeled = Some(corpus.labeled().len());
        counts = Some(c);
    }
    let mut tags = std::collections::BTreeSet::new();
    for t in corpus.tweets() {
        tags.extend(t.hashtags.iter().cloned());
    }
    let summary = IngestSummary {
        tweets: corpus.len(),
        hashtags: tags.len(),
        first_day: daily.keys().next().map(|d| d.to_string()),
        last_day: daily.keys().next_back().map(|d| d.to_string()),
        labeled,
        counts,
        token_lengths: stats,
    };
    run.set_config(&serde_json::json!({ "corpus": corpus_path, "labels": labels }))?;
    run.write_result("ingest.json", &summary)?;
    Ok(())
}

fn snowball(ctx: &Context, run: &mut Run, corpus: Option<PathBuf>, cfg: SnowballConfig) -> Result<(), CliError> {
    let path = ctx.corpus_path(corpus)?;
    let corpus = load_corpus_recorded(run, &path)?;
    run.set_config(&cfg)?;
    let result = run_snowball(&OfflineProvider::new(&corpus), &cfg)?;
    run.write_result("snowball.json", &result)?;
    Ok(())
}

fn reliability(run: &mut Run, path: &Path) -> Result<(), CliError> {
    run.input(path)?;
    let file = std::fs::File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let set = stagewise::report::AnnotationSet::parse_csv(file)?;
    let rel = intercoder_reliability(&set)?;
    run.set_config(&serde_json::json!({ "annotations": path }))?;
    run.write("tables/reliability.csv", reliability_csv(&rel))?;
    run.write_result("reliability.json", &rel)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct ClassifySettings {
    corpus: PathBuf,
    labels: PathBuf,
    features: FeatureKind,
    folds: usize,
    min_df: usize,
    train: TrainConfig,
    embeddings: Option<PathBuf>,
}

struct LabeledData {
    docs: Vec<String>,
    labels: Vec<Category>,
    embeddings: Option<EmbeddingTable>,
}

fn classify_settings(ctx: &Context, args: &ClassifyArgs) -> Result<ClassifySettings, CliError> {
    let c = &ctx.file.classify;
    let features: FeatureKind = match args.features.as_ref().or(c.features.as_ref()) {
        Some(s) => s.parse().map_err(|e: stagewise::Error| CliError::input(e.to_string()))?,
        None => FeatureKind::Tfidf,
    };
    let defaults = TrainConfig::default();
    let train = TrainConfig {
        lambda: args.lambda.or(c.lambda).unwrap_or(defaults.lambda),
        epochs: args.epochs.or(c.epochs).unwrap_or(defaults.epochs),
        eta0: args.eta0.or(c.eta0).unwrap_or(defaults.eta0),
        seed: ctx.seed,
    };
    train.validate()?;
    Ok(ClassifySettings {
        corpus: ctx.corpus_path(args.corpus.clone())?,
        labels: ctx.labels_path(args.labels.clone())?,
        features,
        folds: args.folds.or(c.folds).unwrap_or(5),
        min_df: args.min_df.or(c.min_df).unwrap_or(2),
        train,
        embeddings: args.embeddings.clone().or_else(|| c.embeddings.clone()),
    })
}

fn labeled_data(run: &mut Run, s: &ClassifySettings) -> Result<LabeledData, CliError> {
    let corpus = load_corpus_recorded(run, &s.corpus)?;
    let labels = load_labels_recorded(run, &s.labels)?;
    let corpus = corpus.with_labels(labels)?;
    let (docs, labels) = corpus
        .labeled()
        .into_iter()
        .map(|(t, c)| (clean_for_classification(&t.text), c))
        .unzip();
    let embeddings = match (&s.embeddings, s.features) {
        (Some(p), _) => {
            run.input(p)?;
            Some(load_embeddings(p)?)
        }
        (None, FeatureKind::Embedding) => {
            return Err(CliError::input("--features embed needs --embeddings <file>"));
        }
        (None, _) => None,
    };
    Ok(LabeledData {
        docs,
        labels,
        embeddings,
    })
}

fn technique(kind: FeatureKind) -> String {
    let f = match kind {
        FeatureKind::Bow => "BoW",
        FeatureKind::Tfidf => "TF-IDF",
        FeatureKind::Embedding => "Embedding",
    };
    format!("SVM+{f}")
}

fn comparison_row(r: &CvReport) -> ComparisonRow {
    ComparisonRow {
        technique: technique(r.feature_kind),
        accuracy: 100.0 * r.mean_accuracy,
        f1: r.mean_weighted_f1,
    }
}

fn write_comparison(run: &mut Run, r: &CvReport) -> Result<(), CliError> {
    let rows = [comparison_row(r)];
    run.write("tables/model_comparison.csv", comparison_csv(&rows))?;
    run.write("tables/model_comparison.md", comparison_markdown(&rows))?;
    Ok(())
}

fn cv_options<'a>(s: &ClassifySettings, data: &'a LabeledData, seed: u64) -> CvOptions<'a> {
    CvOptions {
        kind: s.features,
        folds: s.folds,
        fold_seed: seed,
        min_df: s.min_df,
        embeddings: data.embeddings.as_ref(),
    }
}

fn cv(ctx: &Context, run: &mut Run, args: &ClassifyArgs) -> Result<(), CliError> {
    let s = classify_settings(ctx, args)?;
    run.set_config(&s)?;
    run.seed("fold", ctx.seed);
    run.seed("train", s.train.seed);
    let data = labeled_data(run, &s)?;
    let report = cross_validate(&data.docs, &data.labels, &cv_options(&s, &data, ctx.seed), &s.train)?;
    write_comparison(run, &report)?;
    run.write_result("cv.json", &report)?;
    Ok(())
}

fn grid(ctx: &Context, run: &mut Run, args: &ClassifyArgs) -> Result<(), CliError> {
    let s = classify_settings(ctx, args)?;
    let c = &ctx.file.classify;
    let configs = match (&c.grid_lambdas, &c.grid_epochs) {
        (None, None) => default_grid(ctx.seed),
        (lambdas, epochs) => {
            let lambdas = lambdas.clone().unwrap_or_else(|| vec![s.train.lambda]);
            let epochs = epochs.clone().unwrap_or_else(|| vec![s.train.epochs]);
            lambdas
                .iter()
                .flat_map(|&lambda| epochs.iter().map(move |&epochs| TrainConfig { lambda, epochs, ..s.train }))
                .collect()
        }
    };
    run.set_config(&serde_json::json!({ "settings": s, "grid": configs }))?;
    run.seed("fold", ctx.seed);
    run.seed("train", ctx.seed);
    let data = labeled_data(run, &s)?;
    let result = grid_search(&data.docs, &data.labels, &configs, &cv_options(&s, &data, ctx.seed))?;
    write_comparison(run, &result.report)?;
    run.write_result("grid.json", &result)?;
    Ok(())
}

/// Everything `predict` needs: the fitted featurizer and the linear model.
#[derive(Serialize, Deserialize)]
struct ModelBundle {
    featurizer: Featurizer,
    model: LinearModel,
}

#[derive(Serialize)]
struct TrainSummary {
    model: &'static str,
    features: FeatureKind,
    dim: usize,
    documents: usize,
    training_accuracy: f64,
    training_weighted_f1: f64,
    config: TrainConfig,
}

fn train(ctx: &Context, run: &mut Run, args: &ClassifyArgs) -> Result<(), CliError> {
    let s = classify_settings(ctx, args)?;
    run.set_config(&s)?;
    run.seed("train", s.train.seed);
    let data = labeled_data(run, &s)?;
    let featurizer = Featurizer::fit(s.features, &data.docs, s.min_df, data.embeddings.as_ref())?;
    let xs = featurizer.transform_all(&data.docs);
    let model = train_ovr_svm(&xs, &data.labels, s.features, featurizer.dim(), &s.train)?;
    let pred: Vec<Category> = xs.iter().map(|x| predict(&model, x).0).collect();
    let eval = evaluate(&pred, &data.labels)?;
    let summary = TrainSummary {
        model: MODEL_FILE,
        features: s.features,
        dim: featurizer.dim(),
        documents: data.docs.len(),
        training_accuracy: eval.accuracy,
        training_weighted_f1: eval.weighted_f1,
        config: s.train,
    };
    let bundle = ModelBundle { featurizer, model };
    let body = serde_json::to_vec(&bundle).map_err(|e| CliError::internal(e.to_string()))?;
    run.write(MODEL_FILE, body)?;
    run.write_result("train.json", &summary)?;
    Ok(())
}

fn predict_cmd(ctx: &Context, run: &mut Run, corpus: Option<PathBuf>, model_path: &Path) -> Result<(), CliError> {
    let path = ctx.corpus_path(corpus)?;
    let corpus = load_corpus_recorded(run, &path)?;
    run.input(model_path)?;
    let text = std::fs::read_to_string(model_path)
        .map_err(|e| CliError::input(format!("{}: {e}", model_path.display())))?;
    let bundle: ModelBundle = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: invalid model bundle: {e}", model_path.display())))?;
    let featurizer = bundle.featurizer.reindex()?;
    if featurizer.dim() != bundle.model.dim {
        return Err(CliError::input(format!(
            "{}: featurizer dimension {} does not match model dimension {}",
            model_path.display(),
            featurizer.dim(),
            bundle.model.dim
        )));
    }
    run.set_config(&serde_json::json!({ "corpus": path, "model": model_path }))?;
    let mut preds = BTreeMap::new();
    let mut csv = String::from("id,label\n");
    for t in corpus.tweets() {
        let (c, _) = predict(&bundle.model, &featurizer.transform(&clean_for_classification(&t.text)));
        csv.push_str(&format!("{},{}\n", t.id, c.code()));
        preds.insert(t.id.clone(), c);
    }
    run.write("predictions.csv", csv)?;
    let counts = stage_category_counts(&corpus, &preds);
    run.write("tables/stage_counts.csv", counts_csv(&counts))?;
    run.write("tables/stage_counts.md", counts_markdown(&counts))?;
    let mut per_class: BTreeMap<&str, usize> = BTreeMap::new();
    for c in preds.values() {
        *per_class.entry(c.name()).or_insert(0) += 1;
    }
    run.write_result(
        "predict.json",
        &serde_json::json!({ "predictions": "predictions.csv", "per_class": per_class, "counts": counts }),
    )?;
    Ok(())
}

fn import_preds(ctx: &Context, run: &mut Run, preds: &Path, corpus: Option<PathBuf>) -> Result<(), CliError> {
    run.input(preds)?;
    let corpus_path = corpus.or_else(|| ctx.file.data.corpus.clone());
    let corpus = corpus_path.as_deref().map(|p| load_corpus_recorded(run, p)).transpose()?;
    let imported = classify::import_external_predictions(preds, corpus.as_ref())?;
    for id in &imported.unknown_ids {
        eprintln!("stagewise: warning: prediction for unknown id {id}");
    }
    run.set_config(&serde_json::json!({ "preds": preds, "corpus": corpus_path }))?;
    let counts = corpus.as_ref().map(|c| stage_category_counts(c, &imported.predictions));
    if let Some(c) = &counts {
        run.write("tables/stage_counts.csv", counts_csv(c))?;
        run.write("tables/stage_counts.md", counts_markdown(c))?;
    }
    let mut buf = Vec::new();
    corpus::write_labels(&imported.predictions, &mut buf)?;
    run.write("predictions.csv", buf)?;
    run.write_result(
        "import.json",
        &serde_json::json!({
            "predictions": imported.predictions.len(),
            "unknown_ids": imported.unknown_ids,
            "counts": counts,
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct TopicSettings {
    corpus: PathBuf,
    preds: PathBuf,
    ks: Vec<usize>,
    lda: LdaConfig,
    bigrams: Option<BigramPolicy>,
    clusters: usize,
    min_docs: usize,
    top_n: usize,
}

fn topic_options(
    ctx: &Context,
    run: &mut Run,
    ks: Vec<usize>,
    iterations: Option<usize>,
    min_docs: Option<usize>,
) -> Result<PipelineOptions, CliError> {
    let t = &ctx.file.topics;
    let defaults = PipelineOptions::default();
    let mut lda = LdaConfig::new(5);
    lda.iterations = iterations.or(t.iterations).unwrap_or(lda.iterations);
    lda.burn_in = t.burn_in.unwrap_or(lda.burn_in).min(lda.iterations);
    lda.optimize_interval = t.optimize_interval.unwrap_or(lda.optimize_interval);
    lda.alpha = t.alpha;
    lda.beta = t.beta;
    lda.seed = ctx.seed;
    let bigrams = if t.bigrams.unwrap_or(true) {
        let d = BigramPolicy::default();
        let p = BigramPolicy {
            min_count: t.bigram_min_count.unwrap_or(d.min_count),
            score_threshold: t.bigram_threshold.unwrap_or(d.score_threshold),
        };
        p.validate()?;
        Some(p)
    } else {
        None
    };
    Ok(PipelineOptions {
        lexicon: ctx.lexicon(run)?,
        bigrams,
        ks: if ks.is_empty() {
            t.ks.clone().unwrap_or(defaults.ks)
        } else {
            ks
        },
        lda,
        target_clusters: t.clusters.unwrap_or(defaults.target_clusters),
        min_docs: min_docs.or(t.min_docs).unwrap_or(defaults.min_docs),
        top_n: t.top_n.unwrap_or(defaults.top_n),
    })
}

fn topics(
    ctx: &Context,
    run: &mut Run,
    corpus: Option<PathBuf>,
    preds: Option<PathBuf>,
    ks: Vec<usize>,
    iterations: Option<usize>,
    min_docs: Option<usize>,
) -> Result<(), CliError> {
    let corpus_path = ctx.corpus_path(corpus)?;
    let preds_path = ctx.preds_path(preds)?;
    let opts = topic_options(ctx, run, ks, iterations, min_docs)?;
    run.set_config(&TopicSettings {
        corpus: corpus_path.clone(),
        preds: preds_path.clone(),
        ks: opts.ks.clone(),
        lda: opts.lda,
        bigrams: opts.bigrams,
        clusters: opts.target_clusters,
        min_docs: opts.min_docs,
        top_n: opts.top_n,
    })?;
    run.seed("lda", opts.lda.seed);
    let corpus = load_corpus_recorded(run, &corpus_path)?;
    let preds = load_labels_recorded(run, &preds_path)?;
    let grid = run_topic_pipeline(&corpus, &preds, &opts)?;
    for cell in &grid.cells {
        let name = format!(
            "topics/{}_{}.json",
            cell.category.name().to_lowercase(),
            cell.stage.name().to_lowercase()
        );
        run.write_result(&name, cell)?;
    }
    let rows = stagewise::report::topic_rows(&grid);
    run.write("tables/topics.csv", stagewise::report::topics_csv(&rows))?;
    for c in Category::RACIST {
        run.write(
            &format!("tables/topics_{}.md", c.name().to_lowercase()),
            stagewise::report::topics_markdown(&grid, c, opts.target_clusters),
        )?;
    }
    run.write_result("topics/topics.json", &grid)?;
    Ok(())
}

#[derive(Deserialize)]
struct Envelope<T> {
    result: T,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CvOrGrid {
    Grid { report: CvReport },
    Cv(CvReport),
}

fn read_json<T: for<'de> Deserialize<'de>>(run: &mut Run, path: &Path) -> Result<T, CliError> {
    run.input(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let doc: Envelope<T> =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(doc.result)
}

fn report(
    ctx: &Context,
    run: &mut Run,
    corpus: Option<PathBuf>,
    preds: Option<PathBuf>,
    cv_files: &[PathBuf],
    topics: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut inputs = ReportInputs::default();
    if !cv_files.is_empty() {
        let mut rows = Vec::new();
        for p in cv_files {
            let r = match read_json::<CvOrGrid>(run, p)? {
                CvOrGrid::Grid { report } | CvOrGrid::Cv(report) => report,
            };
            rows.push(comparison_row(&r));
        }
        inputs.comparison = Some(rows);
    }
    if let Some(p) = &topics {
        inputs.topics = Some(read_json::<TopicGrid>(run, p)?);
    }
    let corpus_path = corpus.or_else(|| ctx.file.data.corpus.clone());
    if let Some(p) = &corpus_path {
        let corpus = load_corpus_recorded(run, p)?;
        let lexicon = ctx.lexicon(run)?;
        inputs.daily = Some(daily_counts(&corpus));
        inputs.token_stats = Some(token_stats(&corpus, &lexicon)?);
        let preds_path = preds.or_else(|| ctx.file.data.preds.clone()).or_else(|| ctx.file.data.labels.clone());
        if let Some(pp) = &preds_path {
            let map = load_labels_recorded(run, pp)?;
            inputs.counts = Some(stage_category_counts(&corpus, &map));
        }
    }
    run.set_config(&serde_json::json!({ "corpus": corpus_path, "cv": cv_files, "topics": topics }))?;
    let dir = run.out().join("tables");
    let written = render_tables(&inputs, &dir)?;
    for p in &written {
        run.record(p);
    }
    let names: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| format!("tables/{}", n.to_string_lossy())))
        .collect();
    run.write_result("report.json", &serde_json::json!({ "tables": names }))?;
    Ok(())
}
