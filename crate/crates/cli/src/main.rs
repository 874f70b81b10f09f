//! `simile`: the command-line front end of the simile miner.
//!
//! Exit codes: 0 success, 2 usage error, 3 unreadable or invalid input,
//! 4 failure while running.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use simile_core::classifier::{
    cross_validate, featurize_dataset, format_table, read_labeled, AlwaysPositive, AnyModel, CvReport, FeatureMask,
    FeatureVector, Featurizer, Label, LinearHyperparams, LinearLearner, LinearModel, Namespace, NbLearner, NbModel,
};
use simile_core::dedup::KeyMaker;
use simile_core::ingest::{self, Document, HttpFetcher, SourceConfig};
use simile_core::pipeline::{
    classify_into_store, read_candidates, sort_candidates, write_candidates, Extractor, PipelineRun,
};
use simile_core::store::CorpusStore;
use simile_core::tagger::{read_training_corpus, TaggerConfig};
use simile_core::{ExactMetrics, Metrics, Tagger};
use simile_server::Config;

const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "simile", version, about = "Mine, classify and curate Serbian similes")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tag documents and write simile candidates.
    Extract(ExtractArgs),
    /// Score candidates and load new ones into the store.
    Classify(ClassifyArgs),
    /// Cross-validate learners on a labeled phrase file.
    Eval(EvalArgs),
    /// Train the part-of-speech tagger on a tagged corpus.
    TrainTagger(TrainTaggerArgs),
    /// Train a classifier on a labeled phrase file.
    TrainClassifier(TrainClassifierArgs),
    /// Add approved phrases from a plain list, one per line.
    ImportSeed(ImportSeedArgs),
    /// Print corpus counts by status and origin.
    Stats(StatsArgs),
    /// Write the approved corpus.
    Export(ExportArgs),
    /// Fetch configured sites into a document cache.
    Crawl(CrawlArgs),
    /// Count documents per source directory.
    CountDocs(CountDocsArgs),
    /// Run the curation HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// A directory of text files, a document cache, or a sites TOML file.
    #[arg(long)]
    input: PathBuf,
    /// Tagger model written by `train-tagger`.
    #[arg(long)]
    tagger: PathBuf,
    /// Candidate file to write.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; output is identical for any value.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// With a sites file, also save the fetched documents here.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    candidates: PathBuf,
    /// Model written by `train-classifier`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    store: PathBuf,
    /// Name recorded in the entry history.
    #[arg(long, default_value = "classifier")]
    actor: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LearnerKind {
    Nb,
    Linear,
    AlwaysPositive,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Comma-separated feature namespaces (whole, whole_stem, left,
    /// left_stem, right, right_stem); all by default.
    #[arg(long, value_delimiter = ',')]
    features: Vec<Namespace>,
    /// Laplace smoothing for Naive Bayes.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Passes over the data for the linear learner.
    #[arg(long, default_value_t = LinearHyperparams::default().epochs)]
    epochs: usize,
    /// Step size for the linear learner.
    #[arg(long, default_value_t = LinearHyperparams::default().learning_rate)]
    learning_rate: f64,
    /// L2 strength for the linear learner.
    #[arg(long, default_value_t = LinearHyperparams::default().l2)]
    l2: f64,
}

impl FeatureArgs {
    fn mask(&self) -> FeatureMask {
        if self.features.is_empty() {
            return FeatureMask::all();
        }
        self.features.iter().fold(FeatureMask::none(), |m, ns| m.with(*ns))
    }

    fn linear(&self, seed: u64) -> LinearLearner {
        LinearLearner {
            hyper: LinearHyperparams {
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                l2: self.l2,
                seed,
            },
            mask: self.mask(),
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// `label<TAB>phrase` lines, label 1 for simile and 0 otherwise.
    #[arg(long)]
    data: PathBuf,
    /// Learners to compare; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nb")]
    learner: Vec<LearnerKind>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Seed for the fold assignment and the linear learner.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: FeatureArgs,
}

#[derive(Debug, Args)]
struct TrainTaggerArgs {
    /// `word<TAB>tag` lines, sentences separated by blank lines.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = TaggerConfig::default().max_suffix_len)]
    max_suffix_len: usize,
    #[arg(long, default_value_t = TaggerConfig::default().rare_threshold)]
    rare_threshold: u64,
}

#[derive(Debug, Args)]
struct TrainClassifierArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "nb")]
    learner: LearnerKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: FeatureArgs,
}

#[derive(Debug, Args)]
struct ImportSeedArgs {
    #[arg(long)]
    store: PathBuf,
    /// Plain text, one phrase per line.
    #[arg(long)]
    file: PathBuf,
    /// Source name kept in each entry's provenance; defaults to the file name.
    #[arg(long)]
    source: Option<String>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Text,
    Jsonl,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: ExportFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CrawlArgs {
    /// TOML file with one `[[site]]` table per site.
    #[arg(long)]
    sources: PathBuf,
    /// Document cache directory to write.
    #[arg(long)]
    cache: PathBuf,
}

#[derive(Debug, Args)]
struct CountDocsArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// TOML configuration; `SIMILE_*` environment variables override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Store path, overriding configuration and environment.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Listen address, overriding configuration and environment.
    #[arg(long)]
    bind: Option<String>,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
    fn usage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_INPUT,
            error: e.into(),
        })
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_RUNTIME,
            error: e.into(),
        })
    }
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_USAGE,
            error: e.into(),
        })
    }
}

fn run_id(stage: &str) -> String {
    let ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis());
    format!("{stage}-{ms}")
}

fn require_file(path: &Path, what: &str) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(anyhow!("{what} {} does not exist", path.display())).input()
    }
}

fn open_reader(path: &Path, what: &str) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {what} {}", path.display()))
        .input()
}

fn open_existing_store(path: &Path) -> Result<CorpusStore, Failure> {
    require_file(path, "store")?;
    CorpusStore::open(path, KeyMaker::default())
        .with_context(|| format!("cannot open store {}", path.display()))
        .input()
}

fn create_output(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .runtime()?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot write {}", path.display()))
        .runtime()
}

fn crawl_sites(sites: &[SourceConfig]) -> Result<Vec<Document>, Failure> {
    let mut fetcher = HttpFetcher::new(Duration::from_secs(30));
    let mut docs = Vec::new();
    for site in sites {
        let out = ingest::crawl(site, &mut fetcher).runtime()?;
        log::info!(
            "{}: {} documents, {} requests, {} off-domain links, {} blocked by robots.txt, {} failures",
            site.site_name,
            out.documents.len(),
            out.requested.len(),
            out.off_domain,
            out.robots_blocked,
            out.failures
        );
        docs.extend(out.documents);
    }
    Ok(docs)
}

/// Reads documents from a text tree, a document cache, or by crawling the
/// sites of a TOML file.
fn load_documents(input: &Path, cache: Option<&Path>) -> Result<Vec<Document>, Failure> {
    if input.is_dir() {
        if input.join(ingest::MANIFEST).is_file() {
            return ingest::read_cache(input).input();
        }
        return ingest::read_local(input).input();
    }
    if input.is_file() {
        let sites = ingest::load_sources(input)
            .with_context(|| format!("{} is neither a directory nor a sites file", input.display()))
            .input()?;
        let docs = crawl_sites(&sites)?;
        if let Some(dir) = cache {
            ingest::write_cache(dir, &docs).runtime()?;
        }
        return Ok(docs);
    }
    Err(anyhow!("input {} does not exist", input.display())).input()
}

fn extract(args: ExtractArgs) -> CmdResult {
    if args.jobs == 0 {
        return Err(anyhow!("--jobs must be at least 1")).usage();
    }
    require_file(&args.tagger, "tagger model")?;
    let mut run = PipelineRun::new(run_id("extract"));
    let tagger = Tagger::load(&args.tagger)
        .with_context(|| format!("cannot load tagger {}", args.tagger.display()))
        .input()?;
    let docs = run.time("ingest", || load_documents(&args.input, args.cache.as_deref()))?;
    let extractor = Extractor::new(tagger);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .runtime()?;
    let results = run.time("extract", || {
        pool.install(|| {
            docs.par_iter()
                .map(|d| extractor.extract_document(d))
                .collect::<Vec<_>>()
        })
    });
    let mut candidates = Vec::new();
    let mut sentences = 0;
    for r in results {
        sentences += r.sentences;
        candidates.extend(r.candidates);
    }
    sort_candidates(&mut candidates);
    let mut out = create_output(&args.out)?;
    write_candidates(&mut out, &candidates)
        .and_then(|_| out.flush())
        .with_context(|| format!("cannot write {}", args.out.display()))
        .runtime()?;
    run.documents = Some(docs.len());
    run.sentences = Some(sentences);
    run.candidates = Some(candidates.len());
    print!("{run}");
    Ok(())
}

fn classify(args: ClassifyArgs) -> CmdResult {
    require_file(&args.candidates, "candidate file")?;
    require_file(&args.model, "model")?;
    let mut run = PipelineRun::new(run_id("classify"));
    let records = read_candidates(open_reader(&args.candidates, "candidate file")?)
        .with_context(|| format!("{}", args.candidates.display()))
        .input()?;
    let model: AnyModel<f64> = AnyModel::load(&args.model)
        .with_context(|| format!("cannot load model {}", args.model.display()))
        .input()?;
    let mut store = CorpusStore::open(&args.store, KeyMaker::default())
        .with_context(|| format!("cannot open store {}", args.store.display()))
        .input()?;
    let featurizer = Featurizer::default();
    let summary = run
        .time("classify", || {
            classify_into_store(&records, &model, &featurizer, &mut store, &args.actor)
        })
        .runtime()?;
    run.candidates = Some(summary.candidates);
    run.positives = Some(summary.positives);
    run.stored = Some(summary.stored_pending);
    print!("{run}");
    println!("  rejected by model and stored: {}", summary.stored_rejected);
    println!("  already known: {}", summary.duplicates);
    Ok(())
}

fn load_labeled(path: &Path, mask: FeatureMask) -> Result<Vec<(FeatureVector, Label)>, Failure> {
    let phrases = read_labeled(open_reader(path, "labeled data")?)
        .with_context(|| format!("{}", path.display()))
        .input()?;
    let classes: BTreeSet<Label> = phrases.iter().map(|p| p.label).collect();
    if classes.len() < 2 {
        return Err(anyhow!(
            "{} must contain both simile and non-simile examples",
            path.display()
        ))
        .input();
    }
    featurize_dataset(&Featurizer::default(), &phrases, mask)
        .with_context(|| format!("{}", path.display()))
        .input()
}

fn eval(args: EvalArgs) -> CmdResult {
    if args.folds < 2 {
        return Err(anyhow!("--folds must be at least 2")).usage();
    }
    let mask = args.model.mask();
    let data = load_labeled(&args.data, mask)?;
    let mut reports: Vec<CvReport> = Vec::new();
    for kind in &args.learner {
        let report = match kind {
            LearnerKind::Nb => cross_validate::<f64, _>(
                &data,
                &NbLearner {
                    alpha: args.model.alpha,
                    mask,
                },
                args.folds,
                args.seed,
            ),
            LearnerKind::Linear => {
                cross_validate::<f64, _>(&data, &args.model.linear(args.seed), args.folds, args.seed)
            }
            LearnerKind::AlwaysPositive => cross_validate::<f64, _>(&data, &AlwaysPositive, args.folds, args.seed),
        };
        reports.push(report.input()?);
    }
    let rows: Vec<(String, Metrics)> = reports.iter().map(|r| (r.learner.clone(), r.metrics())).collect();
    print!("{}", format_table(&rows));
    println!();
    for r in &reports {
        let exact: ExactMetrics = r.metrics();
        let c = r.confusion;
        println!(
            "{}: tp={} fp={} fn={} tn={}; precision={} recall={} f={}",
            r.learner, c.tp, c.fp, c.fn_, c.tn, exact.precision, exact.recall, exact.f_measure
        );
    }
    Ok(())
}

fn train_tagger(args: TrainTaggerArgs) -> CmdResult {
    require_file(&args.corpus, "corpus")?;
    let corpus = read_training_corpus(open_reader(&args.corpus, "corpus")?)
        .with_context(|| format!("{}", args.corpus.display()))
        .input()?;
    let config = TaggerConfig {
        max_suffix_len: args.max_suffix_len,
        rare_threshold: args.rare_threshold,
    };
    let sentences = corpus.len();
    let model = Tagger::train(corpus, config).input()?;
    model
        .save(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))
        .runtime()?;
    let l = model.lambdas();
    println!(
        "trained on {} sentences; {} tags; lambdas {:.4} {:.4} {:.4}",
        sentences,
        model.tagset().len(),
        l[0],
        l[1],
        l[2]
    );
    Ok(())
}

fn train_classifier(args: TrainClassifierArgs) -> CmdResult {
    require_file(&args.data, "labeled data")?;
    let mask = args.model.mask();
    let data = load_labeled(&args.data, mask)?;
    let model: AnyModel<f64> = match args.learner {
        LearnerKind::Nb => AnyModel::NaiveBayes(NbModel::train(&data, args.model.alpha, mask).input()?),
        LearnerKind::Linear => {
            let learner = args.model.linear(args.seed);
            AnyModel::Linear(LinearModel::train(&data, learner.hyper, mask).input()?)
        }
        LearnerKind::AlwaysPositive => {
            return Err(anyhow!("the always-positive baseline has no model file")).usage();
        }
    };
    model
        .save(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))
        .runtime()?;
    println!("trained on {} phrases", data.len());
    Ok(())
}

fn import_seed(args: ImportSeedArgs) -> CmdResult {
    require_file(&args.file, "seed file")?;
    let source = args.source.clone().unwrap_or_else(|| {
        args.file
            .file_name()
            .map_or_else(|| "seed".to_string(), |n| n.to_string_lossy().into_owned())
    });
    let mut store = CorpusStore::open(&args.store, KeyMaker::default())
        .with_context(|| format!("cannot open store {}", args.store.display()))
        .input()?;
    let report = store
        .import_seed(open_reader(&args.file, "seed file")?, &source, "import")
        .input()?;
    println!(
        "imported {} phrases; {} already mined; {} blank lines skipped",
        report.added, report.overlap_with_mined, report.blank_lines
    );
    Ok(())
}

fn stats(args: StatsArgs) -> CmdResult {
    let store = open_existing_store(&args.store)?;
    let s = store.stats();
    if args.json {
        println!("{}", serde_json::to_string_pretty(&s).runtime()?);
        return Ok(());
    }
    println!(
        "{:<8} {:>8} {:>8} {:>8} {:>8}",
        "origin", "pending", "approved", "rejected", "total"
    );
    for (name, c) in [
        ("mined", &s.mined),
        ("manual", &s.manual),
        ("seed", &s.seed),
        ("all", &s.by_status),
    ] {
        println!(
            "{:<8} {:>8} {:>8} {:>8} {:>8}",
            name,
            c.pending,
            c.approved,
            c.rejected,
            c.total()
        );
    }
    println!("seed entries also mined: {}", s.seed_mined_overlap);
    Ok(())
}

fn export(args: ExportArgs) -> CmdResult {
    let store = open_existing_store(&args.store)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create_output(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match args.format {
        ExportFormat::Text => store.export_text(&mut out),
        ExportFormat::Jsonl => store.export_jsonl(&mut out),
    }
    .and_then(|_| out.flush())
    .runtime()
}

fn crawl(args: CrawlArgs) -> CmdResult {
    require_file(&args.sources, "sites file")?;
    let sites = ingest::load_sources(&args.sources).input()?;
    let docs = crawl_sites(&sites)?;
    ingest::write_cache(&args.cache, &docs).runtime()?;
    println!("{} documents written to {}", docs.len(), args.cache.display());
    Ok(())
}

fn count_docs(args: CountDocsArgs) -> CmdResult {
    let docs = ingest::read_local(&args.input).input()?;
    for (source, n) in ingest::count_by_source(&docs) {
        println!("{source}\t{n}");
    }
    println!("total\t{}", docs.len());
    Ok(())
}

fn serve(args: ServeArgs) -> CmdResult {
    if let Some(p) = &args.config {
        require_file(p, "configuration")?;
    }
    let mut config = Config::from_env(args.config.as_deref()).input()?;
    if let Some(store) = args.store {
        config.store = store;
    }
    if let Some(bind) = args.bind {
        config.bind = bind;
    }
    let store = CorpusStore::open(&config.store, KeyMaker::default())
        .and_then(|s| s.with_threshold(config.threshold))
        .with_context(|| format!("cannot open store {}", config.store.display()))
        .input()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .runtime()?;
    runtime
        .block_on(simile_server::serve(store, config))
        .context("server failed")
        .runtime()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Classify(a) => classify(a),
        Command::Eval(a) => eval(a),
        Command::TrainTagger(a) => train_tagger(a),
        Command::TrainClassifier(a) => train_classifier(a),
        Command::ImportSeed(a) => import_seed(a),
        Command::Stats(a) => stats(a),
        Command::Export(a) => export(a),
        Command::Crawl(a) => crawl(a),
        Command::CountDocs(a) => count_docs(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
