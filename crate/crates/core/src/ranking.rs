//! Candidate scoring against a seed set.
//!
//! Embedding-based schemes compare input rows by cosine similarity:
//! `simavg` averages per-seed similarities, `simwgd` weights each seed by
//! the inverse of its degree, `simref` compares against the mean seed
//! vector. `citmod` feeds the seeds through the trained model and ranks by
//! the softmax output. [`recommend`] also dispatches to the graph
//! baselines so every method shares one ranking contract.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::baselines::{self, PageRankParams};
use crate::embedding::{self, dot, EmbeddingModel};
use crate::error::{Error, Result};
use crate::graph::{CitationGraph, NodeIdx};

/// Non-empty, duplicate-free set of seed papers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet(Vec<NodeIdx>);

impl SeedSet {
    /// `universe` is the number of papers the seeds index into.
    pub fn new(ids: Vec<NodeIdx>, universe: usize) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidParam("seed set is empty".into()));
        }
        if let Some(&bad) = ids.iter().find(|&&v| v as usize >= universe) {
            return Err(Error::UnknownIndex(bad));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParam("seed set contains duplicates".into()));
        }
        Ok(SeedSet(ids))
    }

    /// Resolves tokens through `lookup`; unknown tokens are an error.
    pub fn from_tokens<'a>(
        tokens: impl IntoIterator<Item = &'a str>,
        universe: usize,
        lookup: impl Fn(&str) -> Option<NodeIdx>,
    ) -> Result<Self> {
        let ids = tokens
            .into_iter()
            .map(|t| lookup(t).ok_or_else(|| Error::UnknownPaper(t.to_string())))
            .collect::<Result<Vec<_>>>()?;
        SeedSet::new(ids, universe)
    }

    pub fn as_slice(&self) -> &[NodeIdx] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Candidates in descending score order; ties by ascending index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub entries: Vec<(NodeIdx, f64)>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// `rank,paper_id,score` with a header row and six-decimal scores.
    pub fn write_csv<W: Write>(&self, tokens: &[String], mut out: W) -> Result<()> {
        writeln!(out, "rank,paper_id,score")?;
        for (rank, &(v, s)) in self.entries.iter().enumerate() {
            writeln!(out, "{},{},{:.6}", rank + 1, tokens[v as usize], s)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SimAvg,
    SimWgd,
    SimRef,
    CitMod,
    PaperRank,
    Cf,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SimAvg,
        Method::SimWgd,
        Method::SimRef,
        Method::CitMod,
        Method::PaperRank,
        Method::Cf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SimAvg => "simavg",
            Method::SimWgd => "simwgd",
            Method::SimRef => "simref",
            Method::CitMod => "citmod",
            Method::PaperRank => "paperrank",
            Method::Cf => "cf",
        }
    }

    pub fn needs_model(self) -> bool {
        !matches!(self, Method::PaperRank | Method::Cf)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown method `{s}`")))
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

fn check_all(m: &EmbeddingModel, seeds: &SeedSet, candidates: &[NodeIdx]) -> Result<()> {
    m.check_ids(seeds.as_slice())?;
    m.check_ids(candidates)
}

/// `sum_s w_s * E_s / |E_s|`, divided by `|S|`. Zero-norm seeds drop out.
fn weighted_unit_sum(m: &EmbeddingModel, seeds: &SeedSet, weight: impl Fn(NodeIdx) -> f64) -> Vec<f64> {
    let mut acc = vec![0.0; m.dim()];
    for &s in seeds.as_slice() {
        let row = m.input_row(s);
        let n = norm(row);
        let w = weight(s);
        if n == 0.0 || w == 0.0 {
            continue;
        }
        for (a, x) in acc.iter_mut().zip(row) {
            *a += w * x / n;
        }
    }
    let inv = 1.0 / seeds.len() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

fn score_against(m: &EmbeddingModel, probe: &[f64], candidates: &[NodeIdx]) -> Vec<f64> {
    candidates
        .iter()
        .map(|&d| {
            let row = m.input_row(d);
            let n = norm(row);
            if n == 0.0 {
                0.0
            } else {
                dot(probe, row) / n
            }
        })
        .collect()
}

/// Mean cosine similarity between each candidate and the seeds.
pub fn sim_avg(m: &EmbeddingModel, seeds: &SeedSet, candidates: &[NodeIdx]) -> Result<Vec<f64>> {
    check_all(m, seeds, candidates)?;
    let probe = weighted_unit_sum(m, seeds, |_| 1.0);
    Ok(score_against(m, &probe, candidates))
}

/// Like [`sim_avg`] but each seed weighs `1/deg(s)`; isolated seeds contribute nothing.
pub fn sim_wgd(
    m: &EmbeddingModel,
    g: &CitationGraph,
    seeds: &SeedSet,
    candidates: &[NodeIdx],
) -> Result<Vec<f64>> {
    check_all(m, seeds, candidates)?;
    if g.node_count() != m.len() {
        return Err(Error::InvalidParam(
            "graph and model vocabularies differ".into(),
        ));
    }
    let probe = weighted_unit_sum(m, seeds, |s| match g.degree(s) {
        0 => 0.0,
        d => 1.0 / d as f64,
    });
    Ok(score_against(m, &probe, candidates))
}

/// Cosine similarity against the mean seed vector.
pub fn sim_ref(m: &EmbeddingModel, seeds: &SeedSet, candidates: &[NodeIdx]) -> Result<Vec<f64>> {
    check_all(m, seeds, candidates)?;
    let r = m.hidden(seeds.as_slice());
    if norm(&r) == 0.0 {
        return Ok(vec![0.0; candidates.len()]);
    }
    Ok(candidates.iter().map(|&d| cosine(&r, m.input_row(d))).collect())
}

/// Softmax output of the model with the seeds as context.
pub fn cit_mod(m: &EmbeddingModel, seeds: &SeedSet) -> Result<Vec<f64>> {
    embedding::forward(m, seeds.as_slice())
}

/// What a ranking method may draw on.
#[derive(Debug, Clone, Copy, Default)]
pub struct RankInputs<'a> {
    pub model: Option<&'a EmbeddingModel>,
    pub graph: Option<&'a CitationGraph>,
    pub pagerank: PageRankParams,
}

fn need<'a, T>(x: Option<&'a T>, method: Method, what: &str) -> Result<&'a T> {
    x.ok_or_else(|| Error::MethodInput {
        method: method.to_string(),
        missing: what.to_string(),
    })
}

/// Scores for every paper in the universe (seeds included).
pub fn score_all(method: Method, inputs: &RankInputs<'_>, seeds: &SeedSet) -> Result<Vec<f64>> {
    let all = |n: usize| (0..n as NodeIdx).collect::<Vec<_>>();
    match method {
        Method::SimAvg => {
            let m = need(inputs.model, method, "an embedding model")?;
            sim_avg(m, seeds, &all(m.len()))
        }
        Method::SimRef => {
            let m = need(inputs.model, method, "an embedding model")?;
            sim_ref(m, seeds, &all(m.len()))
        }
        Method::SimWgd => {
            let m = need(inputs.model, method, "an embedding model")?;
            let g = need(inputs.graph, method, "a graph")?;
            sim_wgd(m, g, seeds, &all(m.len()))
        }
        Method::CitMod => cit_mod(need(inputs.model, method, "an embedding model")?, seeds),
        Method::PaperRank => {
            baselines::paperrank(need(inputs.graph, method, "a graph")?, seeds, &inputs.pagerank)
        }
        Method::Cf => baselines::cf_scores(need(inputs.graph, method, "a graph")?, seeds),
    }
}

/// Drops seeds, orders by descending score (ties by index) and keeps the top `k`.
pub fn rank_scores(scores: &[f64], seeds: &SeedSet, k: usize) -> RankedList {
    let mut is_seed = vec![false; scores.len()];
    for &s in seeds.as_slice() {
        if let Some(x) = is_seed.get_mut(s as usize) {
            *x = true;
        }
    }
    let mut entries: Vec<(NodeIdx, f64)> = scores
        .iter()
        .enumerate()
        .filter(|(i, _)| !is_seed[*i])
        .map(|(i, &s)| (i as NodeIdx, s))
        .collect();
    let order = |a: &(NodeIdx, f64), b: &(NodeIdx, f64)| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    };
    if k < entries.len() {
        entries.select_nth_unstable_by(k, order);
        entries.truncate(k);
    }
    entries.sort_unstable_by(order);
    RankedList { entries }
}

pub fn recommend(
    method: Method,
    inputs: &RankInputs<'_>,
    seeds: &SeedSet,
    k: usize,
) -> Result<RankedList> {
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let scores = score_all(method, inputs, seeds)?;
    Ok(rank_scores(&scores, seeds, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rows: &[&[f64]]) -> EmbeddingModel {
        let d = rows[0].len();
        let tokens = (0..rows.len()).map(|i| format!("p{i}")).collect();
        let input: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let output = vec![0.0; input.len()];
        EmbeddingModel::from_parts(tokens, d, input, output).unwrap()
    }

    fn seeds(ids: &[u32], n: usize) -> SeedSet {
        SeedSet::new(ids.to_vec(), n).unwrap()
    }

    #[test]
    fn seed_set_validation() {
        assert!(SeedSet::new(vec![], 3).is_err());
        assert!(SeedSet::new(vec![1, 1], 3).is_err());
        assert!(matches!(SeedSet::new(vec![5], 3), Err(Error::UnknownIndex(5))));
    }

    #[test]
    fn sim_avg_cases() {
        let m = model(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]);
        let s = sim_avg(&m, &seeds(&[0], 3), &[1, 2]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert_eq!(s[1], 0.0);

        let m = model(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0]]);
        let s = sim_avg(&m, &seeds(&[0, 1], 3), &[2]).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sim_wgd_cases() {
        // degrees: s1 = 1, s2 = 4
        let g = CitationGraph::from_edges(
            &[("s1", "x"), ("s2", "a"), ("s2", "b"), ("s2", "c"), ("s2", "d")],
            &[],
        );
        let idx = |t: &str| g.index_of(t).unwrap();
        let mut rows = vec![vec![0.0, 0.0]; g.node_count()];
        // unit seeds on the x axis, candidate at cos 0.8 from both
        rows[idx("s1") as usize] = vec![1.0, 0.0];
        rows[idx("s2") as usize] = vec![1.0, 0.0];
        rows[idx("x") as usize] = vec![0.8, 0.6];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let m = model(&refs);
        let s = sim_wgd(&m, &g, &seeds(&[idx("s1"), idx("s2")], m.len()), &[idx("x")]).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-12, "{}", s[0]);

        let single = seeds(&[idx("s1")], m.len());
        let all: Vec<u32> = (0..m.len() as u32).collect();
        assert_eq!(
            sim_wgd(&m, &g, &single, &all).unwrap(),
            sim_avg(&m, &single, &all).unwrap()
        );

        let g = CitationGraph::from_edges(&[], &[("a", 1), ("b", 1)]);
        let m = model(&[&[1.0], &[1.0]]);
        assert_eq!(sim_wgd(&m, &g, &seeds(&[0], 2), &[1]).unwrap(), vec![0.0]);
    }

    #[test]
    fn sim_ref_cases() {
        let m = model(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.3, 0.7]]);
        assert_eq!(sim_ref(&m, &seeds(&[0, 1], 3), &[2]).unwrap(), vec![0.0]);
        let single = seeds(&[2], 3);
        let a = sim_ref(&m, &single, &[0, 1]).unwrap();
        let b = sim_avg(&m, &single, &[0, 1]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cit_mod_uniform_with_zero_output() {
        let m = model(&[&[1.0, 2.0], &[2.0, 4.0], &[0.5, 0.0], &[0.1, 0.1]]);
        let p = cit_mod(&m, &seeds(&[0, 2], 4)).unwrap();
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn recommend_contract() {
        let m = model(&[&[1.0, 0.0], &[0.9, 0.1], &[0.0, 1.0], &[0.9, 0.1], &[-1.0, 0.0]]);
        let inputs = RankInputs { model: Some(&m), ..Default::default() };
        let s = seeds(&[0], 5);
        let r = recommend(Method::SimAvg, &inputs, &s, 100).unwrap();
        assert_eq!(r.len(), 4);
        // 1 and 3 are bitwise tied: ascending index
        assert_eq!(r.ids().collect::<Vec<_>>(), vec![1, 3, 2, 4]);
        let r = recommend(Method::SimAvg, &inputs, &s, 1).unwrap();
        assert_eq!(r.ids().collect::<Vec<_>>(), vec![1]);

        let err = recommend(Method::Cf, &inputs, &s, 3).unwrap_err();
        assert!(matches!(err, Error::MethodInput { .. }));
        assert!(recommend(Method::SimAvg, &inputs, &s, 0).is_err());

        let mut csv = Vec::new();
        r.write_csv(m.tokens(), &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().collect::<Vec<_>>(), ["rank,paper_id,score", "1,p1,0.993884"]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("pagerank".parse::<Method>().is_err());
    }
}
