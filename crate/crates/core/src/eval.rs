//! Random-hide evaluation harness.
//!
//! A query is a paper published in the query-year range whose reference
//! list, restricted to papers present in the graph sliced at the year
//! before publication, is split into seeds and a hidden set. Each method
//! ranks candidates from that slice (with the embedding trained on that
//! slice) and is scored by recall@k of the hidden set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::PageRankParams;
use crate::embedding::{self, EmbeddingModel, TrainParams};
use crate::error::{Error, Result};
use crate::graph::{CitationGraph, NodeIdx};
use crate::ranking::{self, Method, RankInputs, RankedList, SeedSet};
use crate::rng::{self, TAG_HIDE, TAG_RANDOM_RANK, TAG_SELECT};
use crate::sampling::{self, SamplingParams, Strategy};

/// One random-hide query. Papers are stored as external ids so a query can
/// be resolved against any slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub year: i32,
    pub hidden_ratio: f64,
    pub seeds: Vec<String>,
    pub hidden: Vec<String>,
}

impl Query {
    /// Year of the graph slice this query is answered from.
    pub fn slice_year(&self) -> i32 {
        self.year - 1
    }
}

/// How a method produces its ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ranker {
    Method(Method),
    /// Uniformly random permutation of the candidates; a control.
    Random,
}

/// A labelled method, e.g. `cocit+citmod` or `paperrank`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMethod {
    pub label: String,
    pub ranker: Ranker,
    /// Embedding strategy for model-based rankers.
    pub strategy: Option<Strategy>,
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for EvalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(EvalMethod {
                label: s.into(),
                ranker: Ranker::Random,
                strategy: None,
            });
        }
        let (strategy, method) = match s.split_once('+') {
            Some((st, m)) => (Some(st.parse::<Strategy>()?), m.parse::<Method>()?),
            None => (None, s.parse::<Method>()?),
        };
        match (method.needs_model(), strategy) {
            (true, None) => Err(Error::InvalidParam(format!(
                "method `{s}` needs a strategy prefix, e.g. cocit+{method}"
            ))),
            (false, Some(_)) => Err(Error::InvalidParam(format!(
                "method `{method}` does not use an embedding"
            ))),
            _ => Ok(EvalMethod {
                label: match strategy {
                    Some(st) => format!("{st}+{method}"),
                    None => method.to_string(),
                },
                ranker: Ranker::Method(method),
                strategy,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub hidden_ratio: f64,
    pub query_count: usize,
    /// Inclusive range of reference counts for eligible query papers.
    pub ref_range: (usize, usize),
    /// Inclusive range of publication years for eligible query papers.
    pub year_range: (i32, i32),
    pub ks: Vec<usize>,
    pub methods: Vec<EvalMethod>,
    pub pagerank: PageRankParams,
    pub seed: u64,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            hidden_ratio: 0.1,
            query_count: 2500,
            ref_range: (20, 200),
            year_range: (2005, 2010),
            ks: vec![10, 25, 50, 100],
            methods: Vec::new(),
            pagerank: PageRankParams::default(),
            seed: 42,
            threads: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hidden_ratio > 0.0 && self.hidden_ratio < 1.0) {
            return Err(Error::InvalidParam("hidden ratio must be in (0,1)".into()));
        }
        if self.ref_range.0 > self.ref_range.1 || self.year_range.0 > self.year_range.1 {
            return Err(Error::InvalidParam("empty reference or year range".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::InvalidParam("k values must be >= 1".into()));
        }
        Ok(())
    }

    /// Years whose slices the queries may need.
    pub fn slice_years(&self) -> Vec<i32> {
        (self.year_range.0 - 1..self.year_range.1).collect()
    }
}

/// Hidden-set size: `ceil(ratio * refs)`, at least 1, leaving at least one seed.
pub fn hidden_count(ratio: f64, refs: usize) -> usize {
    let h = (ratio * refs as f64 - 1e-9).ceil().max(1.0) as usize;
    h.min(refs - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryBatch {
    pub queries: Vec<Query>,
    /// Requested queries that could not be filled.
    pub shortfall: usize,
}

/// Samples query papers uniformly without replacement and splits their
/// surviving references into seeds and hidden papers.
pub fn build_queries(g: &CitationGraph, cfg: &ExperimentConfig) -> Result<QueryBatch> {
    cfg.validate()?;
    if !g.has_years() {
        return Err(Error::MissingYears);
    }
    let mut eligible: Vec<NodeIdx> = (0..g.node_count() as NodeIdx)
        .filter(|&v| {
            let n = g.refs(v).len();
            matches!(g.year(v), Some(y) if y >= cfg.year_range.0 && y <= cfg.year_range.1)
                && n >= cfg.ref_range.0
                && n <= cfg.ref_range.1
        })
        .collect();
    eligible.shuffle(&mut rng::stream(cfg.seed, &[TAG_SELECT]));

    let mut queries = Vec::with_capacity(cfg.query_count.min(eligible.len()));
    for v in eligible {
        if queries.len() == cfg.query_count {
            break;
        }
        let year = g.year(v).expect("eligible papers have years");
        let mut refs: Vec<NodeIdx> = g
            .refs(v)
            .iter()
            .copied()
            .filter(|&w| matches!(g.year(w), Some(y) if y < year))
            .collect();
        if refs.len() < 2 {
            continue;
        }
        refs.shuffle(&mut rng::stream(cfg.seed, &[TAG_HIDE, v as u64]));
        let h = hidden_count(cfg.hidden_ratio, refs.len());
        let (hidden, seeds) = refs.split_at_mut(h);
        hidden.sort_unstable();
        seeds.sort_unstable();
        let names = |xs: &[NodeIdx]| xs.iter().map(|&x| g.token(x).to_string()).collect();
        queries.push(Query {
            query_id: g.token(v).to_string(),
            year,
            hidden_ratio: cfg.hidden_ratio,
            seeds: names(seeds),
            hidden: names(hidden),
        });
    }
    Ok(QueryBatch {
        shortfall: cfg.query_count - queries.len(),
        queries,
    })
}

/// Writes one JSON object per line.
pub fn write_queries<W: Write>(queries: &[Query], mut out: W) -> Result<()> {
    for q in queries {
        let line = serde_json::to_string(q).map_err(|e| Error::InvalidParam(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_queries<R: BufRead>(input: R) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::parse("queries", i + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

/// Fraction of `hidden` found in the first `k` entries of `ranked`.
pub fn recall_at_k(ranked: &RankedList, hidden: &[NodeIdx], k: usize) -> Result<f64> {
    if hidden.is_empty() {
        return Err(Error::InvalidParam("hidden set is empty".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let hidden: BTreeSet<NodeIdx> = hidden.iter().copied().collect();
    let hits = ranked.ids().take(k).filter(|v| hidden.contains(v)).count();
    Ok(hits as f64 / hidden.len() as f64)
}

/// Mean and variance of recall@k when `hidden` of `candidates` items are
/// ranked by a uniformly random permutation (hypergeometric law).
pub fn random_ranking_recall(candidates: usize, hidden: usize, k: usize) -> (f64, f64) {
    let n = candidates as f64;
    let k = k.min(candidates) as f64;
    let h = hidden as f64;
    let mean = k / n;
    let var = if candidates > 1 {
        k * (n - h) * (n - k) / (n * n * (n - 1.0) * h)
    } else {
        0.0
    };
    (mean, var)
}

/// The graph slice for one year and the embeddings trained on it.
#[derive(Debug, Clone)]
pub struct SliceArtifacts {
    pub graph: CitationGraph,
    pub models: BTreeMap<Strategy, EmbeddingModel>,
}

/// Stable hash of everything that determines a trained model.
pub fn params_hash(strategy: Strategy, sampling: &SamplingParams, train: &TrainParams) -> String {
    let desc = format!("{strategy}|{sampling:?}|{train:?}");
    format!("{:016x}", rng::fnv1a(desc.as_bytes()))
}

/// Builds the slice for each year and trains one model per strategy.
///
/// With a cache directory, models are stored as
/// `<year>-<strategy>-<params_hash>.{in,out}.txt` and reused when present.
/// A slice whose corpus is empty keeps its initial model.
pub fn prepare_slices(
    g: &CitationGraph,
    years: &[i32],
    strategies: &[Strategy],
    sampling: &SamplingParams,
    train: &TrainParams,
    threads: usize,
    cache_dir: Option<&Path>,
) -> Result<BTreeMap<i32, SliceArtifacts>> {
    if let Some(dir) = cache_dir {
        fs::create_dir_all(dir)?;
    }
    let mut out = BTreeMap::new();
    for &year in years {
        let graph = g.time_slice(year)?;
        let mut models = BTreeMap::new();
        if graph.is_empty() {
            out.insert(year, SliceArtifacts { graph, models });
            continue;
        }
        for &strategy in strategies {
            let hash = params_hash(strategy, sampling, train);
            let paths = cache_dir.map(|d| {
                let stem = format!("{year}-{strategy}-{hash}");
                (d.join(format!("{stem}.in.txt")), d.join(format!("{stem}.out.txt")))
            });
            if let Some((pi, po)) = &paths {
                if pi.exists() && po.exists() {
                    let m = embedding::load_model(pi, po)?;
                    if m.matches_graph(&graph) {
                        models.insert(strategy, m);
                        continue;
                    }
                }
            }
            let corpus = sampling::generate_corpus(&graph, strategy, sampling, threads)?;
            let init = embedding::init_model(&graph, train)?;
            let model = if corpus.is_empty() {
                init
            } else {
                embedding::train(init, &corpus, train)?
            };
            if let Some((pi, po)) = &paths {
                embedding::save_model(&model, pi, po)?;
            }
            models.insert(strategy, model);
        }
        out.insert(year, SliceArtifacts { graph, models });
    }
    Ok(out)
}

/// Checks that queries only see data from before their publication year.
pub fn verify_no_leakage(
    full: &CitationGraph,
    queries: &[Query],
    slices: &BTreeMap<i32, SliceArtifacts>,
) -> Result<()> {
    for (&year, s) in slices {
        for t in s.graph.tokens() {
            match full.index_of(t).and_then(|v| full.year(v)) {
                Some(y) if y <= year => {}
                other => {
                    return Err(Error::Leakage(format!(
                        "slice {year} contains {t} (year {other:?})"
                    )))
                }
            }
        }
        for (st, m) in &s.models {
            if !m.matches_graph(&s.graph) {
                return Err(Error::Leakage(format!(
                    "{st} model for {year} is not over the {year} slice"
                )));
            }
        }
    }
    for q in queries {
        let s = slices
            .get(&q.slice_year())
            .ok_or_else(|| Error::MissingSlices(vec![q.slice_year()]))?;
        if q.slice_year() >= q.year {
            return Err(Error::Leakage(format!("query {} uses its own year", q.query_id)));
        }
        let seeds: BTreeSet<&String> = q.seeds.iter().collect();
        for h in &q.hidden {
            if seeds.contains(h) {
                return Err(Error::Leakage(format!("{h} is both seed and hidden in {}", q.query_id)));
            }
        }
        for t in q.seeds.iter().chain(&q.hidden) {
            if s.graph.index_of(t).is_none() {
                return Err(Error::Leakage(format!(
                    "{t} in query {} is not in the {} slice",
                    q.query_id,
                    q.slice_year()
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub hidden_ratio: f64,
    pub k: usize,
    pub mean_recall: f64,
    pub n_queries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub method: String,
    pub hidden_ratio: f64,
    pub query_id: String,
    pub year: i32,
    pub k: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub records: Vec<QueryRecord>,
}

impl Report {
    pub fn mean_recall(&self, method: &str, ratio: f64, k: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.hidden_ratio == ratio && r.k == k)
            .map(|r| r.mean_recall)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method,hidden_ratio,k,mean_recall,n_queries")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6},{}",
                r.method, r.hidden_ratio, r.k, r.mean_recall, r.n_queries
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_records_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method,hidden_ratio,query_id,year,k,recall")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{:.6}",
                r.method, r.hidden_ratio, r.query_id, r.year, r.k, r.recall
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads the aggregate rows of a report CSV.
pub fn read_report<R: BufRead>(input: R) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if lineno == 1 {
            if line.trim() != "method,hidden_ratio,k,mean_recall,n_queries" {
                return Err(Error::parse("report", 1, "unexpected header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::parse("report", lineno, format!("bad row `{line}`"));
        if f.len() != 5 {
            return Err(bad());
        }
        rows.push(ReportRow {
            method: f[0].to_string(),
            hidden_ratio: f[1].parse().map_err(|_| bad())?,
            k: f[2].parse().map_err(|_| bad())?,
            mean_recall: f[3].parse().map_err(|_| bad())?,
            n_queries: f[4].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

fn rank_query(
    method: &EvalMethod,
    slice: &SliceArtifacts,
    seeds: &SeedSet,
    k: usize,
    query_index: u64,
    cfg: &ExperimentConfig,
) -> Result<RankedList> {
    let n = slice.graph.node_count();
    match method.ranker {
        Ranker::Random => {
            let scores = vec![0.0; n];
            let mut pool = ranking::rank_scores(&scores, seeds, usize::MAX).entries;
            let take = k.min(pool.len());
            let mut r = rng::stream(cfg.seed, &[TAG_RANDOM_RANK, query_index]);
            let (chosen, _) = pool.partial_shuffle(&mut r, take);
            Ok(RankedList {
                entries: chosen.to_vec(),
            })
        }
        Ranker::Method(m) => {
            let model = match method.strategy {
                Some(st) => Some(slice.models.get(&st).ok_or_else(|| Error::MethodInput {
                    method: method.label.clone(),
                    missing: format!("a {st} model"),
                })?),
                None => None,
            };
            let inputs = RankInputs {
                model,
                graph: Some(&slice.graph),
                pagerank: cfg.pagerank,
            };
            ranking::recommend(m, &inputs, seeds, k)
        }
    }
}

/// Runs every method over pre-built queries. Rows are ordered by method then k.
pub fn evaluate_queries(
    queries: &[Query],
    slices: &BTreeMap<i32, SliceArtifacts>,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    let mut missing: BTreeSet<i32> = BTreeSet::new();
    for q in queries {
        match slices.get(&q.slice_year()) {
            None => {
                missing.insert(q.slice_year());
            }
            Some(s) => {
                for m in &cfg.methods {
                    if let Some(st) = m.strategy {
                        if !s.models.contains_key(&st) {
                            missing.insert(q.slice_year());
                        }
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSlices(missing.into_iter().collect()));
    }
    let max_k = *cfg.ks.iter().max().unwrap_or(&1);

    let eval_one = |(qi, q): (usize, &Query)| -> Result<Vec<Vec<f64>>> {
        let slice = &slices[&q.slice_year()];
        let g = &slice.graph;
        let seeds = SeedSet::from_tokens(q.seeds.iter().map(String::as_str), g.node_count(), |t| {
            g.index_of(t)
        })?;
        let hidden = q
            .hidden
            .iter()
            .map(|t| g.require(t))
            .collect::<Result<Vec<_>>>()?;
        cfg.methods
            .iter()
            .map(|m| {
                let ranked = rank_query(m, slice, &seeds, max_k, qi as u64, cfg)?;
                cfg.ks
                    .iter()
                    .map(|&k| recall_at_k(&ranked, &hidden, k))
                    .collect()
            })
            .collect()
    };

    let per_query: Vec<Vec<Vec<f64>>> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
        pool.install(|| queries.par_iter().enumerate().map(eval_one).collect::<Result<_>>())?
    } else {
        queries.iter().enumerate().map(eval_one).collect::<Result<_>>()?
    };

    let mut report = Report::default();
    for (mi, m) in cfg.methods.iter().enumerate() {
        for (ki, &k) in cfg.ks.iter().enumerate() {
            let mut sum = 0.0;
            for (q, recalls) in queries.iter().zip(&per_query) {
                let recall = recalls[mi][ki];
                sum += recall;
                report.records.push(QueryRecord {
                    method: m.label.clone(),
                    hidden_ratio: q.hidden_ratio,
                    query_id: q.query_id.clone(),
                    year: q.year,
                    k,
                    recall,
                });
            }
            report.rows.push(ReportRow {
                method: m.label.clone(),
                hidden_ratio: cfg.hidden_ratio,
                k,
                mean_recall: if queries.is_empty() { 0.0 } else { sum / queries.len() as f64 },
                n_queries: queries.len(),
            });
        }
    }
    Ok(report)
}

/// Builds queries, checks for time leakage and evaluates every method.
pub fn run_experiment(
    g: &CitationGraph,
    slices: &BTreeMap<i32, SliceArtifacts>,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    let batch = build_queries(g, cfg)?;
    let needed: BTreeSet<i32> = batch.queries.iter().map(Query::slice_year).collect();
    let missing: Vec<i32> = needed.into_iter().filter(|y| !slices.contains_key(y)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingSlices(missing));
    }
    verify_no_leakage(g, &batch.queries, slices)?;
    evaluate_queries(&batch.queries, slices, cfg)
}

/// [`run_experiment`] once per hidden ratio, rows concatenated.
pub fn run_ratio_sweep(
    g: &CitationGraph,
    slices: &BTreeMap<i32, SliceArtifacts>,
    cfg: &ExperimentConfig,
    ratios: &[f64],
) -> Result<Report> {
    let mut all = Report::default();
    for &ratio in ratios {
        let cfg = ExperimentConfig {
            hidden_ratio: ratio,
            ..cfg.clone()
        };
        let r = run_experiment(g, slices, &cfg)?;
        all.rows.extend(r.rows);
        all.records.extend(r.records);
    }
    Ok(all)
}

/// Wide tables for plotting: recall against k (one block per ratio) and
/// recall against hidden ratio (one block per k), one column per method.
pub fn plot_series(rows: &[ReportRow]) -> (String, String) {
    let methods: Vec<String> = {
        let mut seen = Vec::new();
        for r in rows {
            if !seen.contains(&r.method) {
                seen.push(r.method.clone());
            }
        }
        seen
    };
    let key = |x: f64| (x * 1e9).round() as i64;
    let mut table: BTreeMap<(i64, usize), BTreeMap<&str, f64>> = BTreeMap::new();
    let mut ratio_of: BTreeMap<i64, f64> = BTreeMap::new();
    for r in rows {
        ratio_of.insert(key(r.hidden_ratio), r.hidden_ratio);
        table
            .entry((key(r.hidden_ratio), r.k))
            .or_default()
            .insert(&r.method, r.mean_recall);
    }
    let cells = |m: &BTreeMap<&str, f64>| -> String {
        methods
            .iter()
            .map(|name| m.get(name.as_str()).map_or(String::new(), |v| format!("{v:.6}")))
            .collect::<Vec<_>>()
            .join(",")
    };
    let header = methods.join(",");

    let mut by_k = format!("hidden_ratio,k,{header}\n");
    for ((rk, k), m) in &table {
        by_k.push_str(&format!("{},{},{}\n", ratio_of[rk], k, cells(m)));
    }
    let mut by_ratio = format!("k,hidden_ratio,{header}\n");
    let mut swapped: Vec<_> = table.iter().map(|((rk, k), m)| ((*k, *rk), m)).collect();
    swapped.sort_by_key(|e| e.0);
    for ((k, rk), m) in swapped {
        by_ratio.push_str(&format!("{},{},{}\n", k, ratio_of[&rk], cells(m)));
    }
    (by_k, by_ratio)
}

pub fn write_plot_series(rows: &[ReportRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (by_k, by_ratio) = plot_series(rows);
    fs::write(dir.join("recall_vs_k.csv"), by_k)?;
    fs::write(dir.join("recall_vs_ratio.csv"), by_ratio)?;
    Ok(())
}

pub fn read_report_file(path: &Path) -> Result<Vec<ReportRow>> {
    read_report(BufReader::new(File::open(path)?))
}
