//! Run configuration: a flat TOML file of `key = value` pairs whose keys
//! mirror the command-line flags. Flags given on the command line win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::baselines::PageRankParams;
use crate::embedding::{Objective, TrainParams};
use crate::error::{Error, Result};
use crate::eval::{EvalMethod, ExperimentConfig};
use crate::rng::derive_seed;
use crate::sampling::{SamplingParams, Strategy};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,

    pub graph: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub nodes: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,

    pub strategy: String,
    pub n: usize,
    pub t: usize,
    pub p: f64,
    pub q: f64,

    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub lr: f64,
    pub min_lr: f64,
    /// `exact` or `negative`.
    pub objective: String,
    pub negatives: usize,

    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,

    pub ratios: Vec<f64>,
    pub queries: usize,
    pub ref_min: usize,
    pub ref_max: usize,
    pub year_min: i32,
    pub year_max: i32,
    pub ks: Vec<usize>,
    pub methods: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SamplingParams::default();
        let t = TrainParams::default();
        let e = ExperimentConfig::default();
        let pr = PageRankParams::default();
        RunConfig {
            seed: 42,
            threads: 1,
            graph: None,
            edges: None,
            nodes: None,
            cache_dir: None,
            strategy: Strategy::CoCitation.to_string(),
            n: s.walks_per_node,
            t: s.walk_length,
            p: s.p,
            q: s.q,
            dim: t.dim,
            window: t.window,
            epochs: t.epochs,
            lr: t.learning_rate,
            min_lr: t.min_learning_rate,
            objective: "exact".into(),
            negatives: 5,
            damping: pr.damping,
            tolerance: pr.tolerance,
            max_iterations: pr.max_iterations,
            ratios: vec![e.hidden_ratio],
            queries: e.query_count,
            ref_min: e.ref_range.0,
            ref_max: e.ref_range.1,
            year_min: e.year_range.0,
            year_max: e.year_range.1,
            ks: e.ks,
            methods: [
                "cocit+simavg",
                "cocit+simwgd",
                "cocit+simref",
                "cocit+citmod",
                "uniform+simavg",
                "uniform+simwgd",
                "uniform+simref",
                "uniform+citmod",
                "paperrank",
                "cf",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

// Stage tags for fanning the single seed out.
const STAGE_SAMPLE: u64 = 1;
const STAGE_TRAIN: u64 = 2;
const STAGE_EVAL: u64 = 3;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn strategy(&self) -> Result<Strategy> {
        self.strategy.parse()
    }

    pub fn sampling_params(&self) -> Result<SamplingParams> {
        let p = SamplingParams {
            walks_per_node: self.n,
            walk_length: self.t,
            p: self.p,
            q: self.q,
            seed: derive_seed(self.seed, &[STAGE_SAMPLE]),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn train_params(&self) -> Result<TrainParams> {
        let objective = match self.objective.as_str() {
            "exact" => Objective::ExactSoftmax,
            "negative" | "ns" => Objective::NegativeSampling {
                negatives: self.negatives,
            },
            other => {
                return Err(Error::Config(format!(
                    "objective must be `exact` or `negative`, got `{other}`"
                )))
            }
        };
        let p = TrainParams {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            learning_rate: self.lr,
            min_learning_rate: self.min_lr,
            objective,
            seed: derive_seed(self.seed, &[STAGE_TRAIN]),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn pagerank_params(&self) -> Result<PageRankParams> {
        let p = PageRankParams {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        };
        p.validate()?;
        Ok(p)
    }

    /// Experiment settings for the first hidden ratio; sweep callers vary it.
    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<EvalMethod>())
            .collect::<Result<Vec<_>>>()?;
        let cfg = ExperimentConfig {
            hidden_ratio: *self
                .ratios
                .first()
                .ok_or_else(|| Error::Config("no hidden ratios".into()))?,
            query_count: self.queries,
            ref_range: (self.ref_min, self.ref_max),
            year_range: (self.year_min, self.year_max),
            ks: self.ks.clone(),
            methods,
            pagerank: self.pagerank_params()?,
            seed: derive_seed(self.seed, &[STAGE_EVAL]),
            threads: self.threads,
        };
        for &r in &self.ratios {
            ExperimentConfig { hidden_ratio: r, ..cfg.clone() }.validate()?;
        }
        Ok(cfg)
    }
}
