//! Command-line front end: ingest → slice → sample → train → recommend →
//! evaluate, plus plot-table emission. Every numeric flag falls back to the
//! `--config` file, then to the built-in default.

use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::embedding::{self, EmbeddingModel};
use crate::error::{Error, Result};
use crate::eval::{self, build_queries, prepare_slices, Report};
use crate::graph::{self, CitationGraph};
use crate::ranking::{self, Method, RankInputs, SeedSet};
use crate::sampling::{self, Strategy, WalkCorpus};

#[derive(Debug, Parser)]
#[command(name = "citerec", version, about = "Citation recommendation from graph embeddings")]
pub struct Cli {
    /// TOML file of `key = value` defaults; keys match the long flag names with `_` for `-`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed, fanned out to every stage [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for sampling and evaluation [default: 1]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse edge/node TSV files into a binary graph cache
    Ingest(IngestArgs),
    /// Keep papers published up to a year
    Slice(SliceArgs),
    /// Generate a walk or co-citation corpus
    Sample(SampleArgs),
    /// Train embeddings on a corpus
    Train(TrainArgs),
    /// Rank papers against a seed set
    Recommend(RecommendArgs),
    /// Run the random-hide experiment and write a recall report
    Evaluate(EvaluateArgs),
    /// Turn a report into recall-vs-k and recall-vs-ratio tables
    Plotdata(PlotArgs),
}

#[derive(Debug, Args, Default)]
pub struct GraphArgs {
    /// Binary graph cache written by `ingest` [default: none]
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Edges file, `<citing>\t<cited>` per line [default: none]
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Nodes file, `<paper>\t<year>` per line [default: none]
    #[arg(long)]
    pub nodes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Output cache path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Keep papers with year <= this
    #[arg(long)]
    pub year: i32,
    /// Output edges file
    #[arg(long)]
    pub out_edges: PathBuf,
    /// Output nodes file
    #[arg(long)]
    pub out_nodes: PathBuf,
    /// Also write a binary cache here [default: none]
    #[arg(long)]
    pub out_cache: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SamplingFlags {
    /// Walks (passes) per node [default: 10]
    #[arg(long)]
    pub n: Option<usize>,
    /// Walk length in steps [default: 80]
    #[arg(long)]
    pub t: Option<usize>,
    /// Return parameter of biased walks [default: 1]
    #[arg(long)]
    pub p: Option<f64>,
    /// In-out parameter of biased walks [default: 1]
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct TrainFlags {
    /// Embedding dimension [default: 128]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Context positions on each side of the target [default: 10]
    #[arg(long)]
    pub window: Option<usize>,
    /// Passes over the windows [default: 5]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Initial learning rate [default: 0.025]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Final learning rate of the linear decay [default: 0.0001]
    #[arg(long)]
    pub min_lr: Option<f64>,
    /// `exact` (full softmax) or `negative` (negative sampling) [default: exact]
    #[arg(long)]
    pub objective: Option<String>,
    /// Negatives per window with `--objective negative` [default: 5]
    #[arg(long)]
    pub negatives: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// uniform, biased or cocit [default: cocit]
    #[arg(long)]
    pub strategy: Option<String>,
    #[command(flatten)]
    pub sampling: SamplingFlags,
    /// Output corpus file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Corpus written by `sample`
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Output file for the input (embedding) matrix
    #[arg(long)]
    pub out_in: PathBuf,
    /// Output file for the output matrix
    #[arg(long)]
    pub out_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Input matrix written by `train` [default: none]
    #[arg(long)]
    pub model_in: Option<PathBuf>,
    /// Output matrix written by `train` [default: none]
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// simavg, simwgd, simref, citmod, paperrank or cf
    #[arg(long)]
    pub method: String,
    /// Comma-separated seed paper ids
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<String>,
    /// Number of recommendations [default: 10]
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// PaperRank damping [default: 0.85]
    #[arg(long)]
    pub damping: Option<f64>,
    /// Output CSV [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Comma-separated methods, `<strategy>+<ranker>` or `paperrank`, `cf`, `random`
    /// [default: every strategy/ranker pair for cocit and uniform, plus paperrank and cf]
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Comma-separated hidden ratios [default: 0.1]
    #[arg(long, value_delimiter = ',')]
    pub ratios: Vec<f64>,
    /// Comma-separated k values [default: 10,25,50,100]
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<usize>,
    /// Number of queries [default: 2500]
    #[arg(long)]
    pub queries: Option<usize>,
    /// Minimum reference count of a query paper [default: 20]
    #[arg(long)]
    pub ref_min: Option<usize>,
    /// Maximum reference count of a query paper [default: 200]
    #[arg(long)]
    pub ref_max: Option<usize>,
    /// First query publication year [default: 2005]
    #[arg(long)]
    pub year_min: Option<i32>,
    /// Last query publication year [default: 2010]
    #[arg(long)]
    pub year_max: Option<i32>,
    #[command(flatten)]
    pub sampling: SamplingFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Directory for per-slice trained models [default: none]
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Aggregate report CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Per-query recall CSV [default: none]
    #[arg(long)]
    pub per_query: Option<PathBuf>,
    /// Write the generated queries as JSON lines [default: none]
    #[arg(long)]
    pub queries_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Report CSV written by `evaluate`
    #[arg(long)]
    pub report: PathBuf,
    /// Directory for recall_vs_k.csv and recall_vs_ratio.csv
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

macro_rules! overlay {
    ($cfg:expr, $flags:expr, $($field:ident),+) => {
        $( if let Some(v) = $flags.$field.clone() { $cfg.$field = v; } )+
    };
}

fn apply_sampling(cfg: &mut RunConfig, f: &SamplingFlags) {
    overlay!(cfg, f, n, t, p, q);
}

fn apply_train(cfg: &mut RunConfig, f: &TrainFlags) {
    overlay!(cfg, f, dim, window, epochs, lr, min_lr, objective, negatives);
}

fn load_graph(args: &GraphArgs, cfg: &RunConfig) -> Result<CitationGraph> {
    let cache = args.graph.as_ref().or(cfg.graph.as_ref());
    let edges = args.edges.as_ref().or(cfg.edges.as_ref());
    let nodes = args.nodes.as_ref().or(cfg.nodes.as_ref());
    if let Some(c) = cache {
        return graph::read_cache(File::open(c)?);
    }
    match edges {
        Some(e) => Ok(graph::load_graph_files(e, nodes.map(PathBuf::as_path))?.0),
        None => Err(Error::Config("no graph given: use --graph or --edges".into())),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Parses `argv` and runs the subcommand, returning the summary line.
pub fn run<I, T>(argv: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Config(e.to_string()))?;
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Result<String> {
    let mut cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Ingest(a) => {
            let edges = a
                .graph
                .edges
                .as_ref()
                .or(cfg.edges.as_ref())
                .ok_or_else(|| Error::Config("ingest needs --edges".into()))?;
            let nodes = a.graph.nodes.as_ref().or(cfg.nodes.as_ref());
            let (g, rep) = graph::load_graph_files(edges, nodes.map(PathBuf::as_path))?;
            graph::write_cache(&g, File::create(&a.out)?)?;
            Ok(format!(
                "ingested {} papers, {} citations ({} duplicate edges, {} self-loops dropped) -> {}",
                g.node_count(),
                g.edge_count(),
                rep.duplicate_edges,
                rep.self_loops,
                a.out.display()
            ))
        }
        Command::Slice(a) => {
            let g = load_graph(&a.graph, &cfg)?;
            let s = g.time_slice(a.year)?;
            s.write_edges(create(&a.out_edges)?)?;
            s.write_nodes(create(&a.out_nodes)?)?;
            if let Some(c) = &a.out_cache {
                graph::write_cache(&s, File::create(c)?)?;
            }
            Ok(format!(
                "slice {}: {} papers, {} citations",
                a.year,
                s.node_count(),
                s.edge_count()
            ))
        }
        Command::Sample(a) => {
            if let Some(s) = &a.strategy {
                cfg.strategy = s.clone();
            }
            apply_sampling(&mut cfg, &a.sampling);
            let g = load_graph(&a.graph, &cfg)?;
            let strategy = cfg.strategy()?;
            let params = cfg.sampling_params()?;
            let mut corpus = sampling::generate_corpus(&g, strategy, &params, cfg.threads)?;
            let train = cfg.train_params()?;
            corpus.provenance.params_hash = Some(eval::params_hash(strategy, &params, &train));
            corpus.write(&g, create(&a.out)?)?;
            Ok(format!(
                "{} corpus: {} lines -> {}",
                strategy,
                corpus.len(),
                a.out.display()
            ))
        }
        Command::Train(a) => {
            apply_train(&mut cfg, &a.train);
            let g = load_graph(&a.graph, &cfg)?;
            let corpus = WalkCorpus::read(BufReader::new(File::open(&a.corpus)?), &g)?;
            let params = cfg.train_params()?;
            let init = embedding::init_model(&g, &params)?;
            let out = embedding::train_with_history(init, &corpus, &params)?;
            embedding::save_model(&out.model, &a.out_in, &a.out_out)?;
            Ok(format!(
                "trained {} x {} on {} lines, final epoch loss {:.6}",
                out.model.len(),
                out.model.dim(),
                corpus.len(),
                out.epoch_loss.last().copied().unwrap_or(f64::NAN)
            ))
        }
        Command::Recommend(a) => recommend(a, &mut cfg),
        Command::Evaluate(a) => evaluate(a, &mut cfg),
        Command::Plotdata(a) => {
            let rows = eval::read_report_file(&a.report)?;
            eval::write_plot_series(&rows, &a.out_dir)?;
            Ok(format!(
                "{} report rows -> {}",
                rows.len(),
                a.out_dir.display()
            ))
        }
    }
}

fn recommend(a: &RecommendArgs, cfg: &mut RunConfig) -> Result<String> {
    let method: Method = a.method.parse()?;
    if let Some(d) = a.damping {
        cfg.damping = d;
    }
    let has_graph = a.graph.graph.is_some()
        || a.graph.edges.is_some()
        || cfg.graph.is_some()
        || cfg.edges.is_some();
    let graph = if has_graph {
        Some(load_graph(&a.graph, cfg)?)
    } else {
        None
    };
    let model: Option<EmbeddingModel> = match (&a.model_in, &a.model_out) {
        (Some(i), Some(o)) => Some(embedding::load_model(i, o)?),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "--model-in and --model-out must be given together".into(),
            ))
        }
    };
    if let (Some(m), Some(g)) = (&model, &graph) {
        if !m.matches_graph(g) {
            return Err(Error::Config(
                "model vocabulary does not match the graph".into(),
            ));
        }
    }
    let tokens: Vec<String> = match (&model, &graph) {
        (Some(m), _) => m.tokens().to_vec(),
        (None, Some(g)) => g.tokens().to_vec(),
        (None, None) => {
            return Err(Error::MethodInput {
                method: method.to_string(),
                missing: "a model or a graph".into(),
            })
        }
    };
    let lookup = |t: &str| match (&model, &graph) {
        (Some(m), _) => m.index_of(t),
        (None, Some(g)) => g.index_of(t),
        _ => None,
    };
    let seeds = SeedSet::from_tokens(a.seeds.iter().map(String::as_str), tokens.len(), lookup)?;
    let inputs = RankInputs {
        model: model.as_ref(),
        graph: graph.as_ref(),
        pagerank: cfg.pagerank_params()?,
    };
    let ranked = ranking::recommend(method, &inputs, &seeds, a.k)?;
    let summary = format!(
        "{} recommendations by {} for {} seeds",
        ranked.len(),
        method,
        seeds.len()
    );
    match &a.out {
        Some(p) => {
            ranked.write_csv(&tokens, create(p)?)?;
            Ok(format!("{summary} -> {}", p.display()))
        }
        None => {
            ranked.write_csv(&tokens, io::stdout().lock())?;
            Ok(summary)
        }
    }
}

fn evaluate(a: &EvaluateArgs, cfg: &mut RunConfig) -> Result<String> {
    apply_sampling(cfg, &a.sampling);
    apply_train(cfg, &a.train);
    if !a.methods.is_empty() {
        cfg.methods = a.methods.clone();
    }
    if !a.ratios.is_empty() {
        cfg.ratios = a.ratios.clone();
    }
    if !a.ks.is_empty() {
        cfg.ks = a.ks.clone();
    }
    overlay!(cfg, a, queries, ref_min, ref_max, year_min, year_max);
    if a.cache_dir.is_some() {
        cfg.cache_dir = a.cache_dir.clone();
    }

    let g = load_graph(&a.graph, cfg)?;
    let exp = cfg.experiment_config()?;
    let mut strategies: Vec<Strategy> = exp.methods.iter().filter_map(|m| m.strategy).collect();
    strategies.sort();
    strategies.dedup();
    let slices = prepare_slices(
        &g,
        &exp.slice_years(),
        &strategies,
        &cfg.sampling_params()?,
        &cfg.train_params()?,
        cfg.threads,
        cfg.cache_dir.as_deref(),
    )?;

    let mut report = Report::default();
    let mut all_queries = Vec::new();
    let mut shortfall = 0;
    for &ratio in &cfg.ratios {
        let exp = eval::ExperimentConfig {
            hidden_ratio: ratio,
            ..exp.clone()
        };
        let batch = build_queries(&g, &exp)?;
        shortfall = shortfall.max(batch.shortfall);
        eval::verify_no_leakage(&g, &batch.queries, &slices)?;
        let r = eval::evaluate_queries(&batch.queries, &slices, &exp)?;
        report.rows.extend(r.rows);
        report.records.extend(r.records);
        all_queries.extend(batch.queries);
    }
    report.write_csv(create(&a.out)?)?;
    if let Some(p) = &a.per_query {
        report.write_records_csv(create(p)?)?;
    }
    if let Some(p) = &a.queries_out {
        eval::write_queries(&all_queries, create(p)?)?;
    }
    let warn = if shortfall > 0 {
        format!(" (warning: {shortfall} fewer eligible queries than requested)")
    } else {
        String::new()
    };
    Ok(format!(
        "evaluated {} methods x {} ratios on {} queries -> {}{}",
        exp.methods.len(),
        cfg.ratios.len(),
        all_queries.len() / cfg.ratios.len().max(1),
        a.out.display(),
        warn
    ))
}
