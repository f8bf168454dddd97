//! Graph baselines: PaperRank (random walk with restart to the seeds) and
//! item-based collaborative filtering over the citing-paper × cited-paper
//! incidence.

use crate::error::{Error, Result};
use crate::graph::{CitationGraph, NodeIdx};
use crate::ranking::SeedSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    /// Probability of following an edge rather than restarting.
    pub damping: f64,
    /// L1 change between iterates at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl PageRankParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParam(
                "damping must be in (0,1) and tolerance positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PageRankTrace {
    pub scores: Vec<f64>,
    /// L1 change of each iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

fn restart_vector(g: &CitationGraph, seeds: &SeedSet) -> Result<Vec<f64>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParam("seed set is empty".into()));
    }
    let mut r = vec![0.0; g.node_count()];
    let w = 1.0 / seeds.len() as f64;
    for &s in seeds.as_slice() {
        *r.get_mut(s as usize).ok_or(Error::UnknownIndex(s))? = w;
    }
    Ok(r)
}

/// Personalized PageRank on the undirected view, starting from the restart vector.
pub fn paperrank(g: &CitationGraph, seeds: &SeedSet, params: &PageRankParams) -> Result<Vec<f64>> {
    let r = restart_vector(g, seeds)?;
    Ok(paperrank_from(g, seeds, params, &r)?.scores)
}

/// Power iteration `x <- λ P x + (λ·dangling + 1 - λ) r` from an arbitrary start.
pub fn paperrank_from(
    g: &CitationGraph,
    seeds: &SeedSet,
    params: &PageRankParams,
    start: &[f64],
) -> Result<PageRankTrace> {
    params.validate()?;
    let r = restart_vector(g, seeds)?;
    let n = g.node_count();
    if start.len() != n {
        return Err(Error::InvalidParam("start vector has wrong length".into()));
    }
    let lambda = params.damping;
    let mut x = start.to_vec();
    let mut next = vec![0.0; n];
    let mut share = vec![0.0; n];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..params.max_iterations {
        let mut dangling = 0.0;
        for v in 0..n {
            match g.degree(v as NodeIdx) {
                0 => {
                    dangling += x[v];
                    share[v] = 0.0;
                }
                d => share[v] = x[v] / d as f64,
            }
        }
        let restart = lambda * dangling + (1.0 - lambda);
        let mut delta = 0.0;
        for w in 0..n {
            let inflow: f64 = g.adj(w as NodeIdx).iter().map(|&v| share[v as usize]).sum();
            next[w] = lambda * inflow + restart * r[w];
            delta += (next[w] - x[w]).abs();
        }
        std::mem::swap(&mut x, &mut next);
        residuals.push(delta);
        if delta < params.tolerance {
            converged = true;
            break;
        }
    }
    Ok(PageRankTrace {
        scores: x,
        residuals,
        converged,
    })
}

/// Item-based CF: `score(d) = Σ_s |Cit(s) ∩ Cit(d)| / (√|Cit(s)| √|Cit(d)|)`.
pub fn cf_scores(g: &CitationGraph, seeds: &SeedSet) -> Result<Vec<f64>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParam("seed set is empty".into()));
    }
    let n = g.node_count();
    let mut scores = vec![0.0; n];
    let mut overlap = vec![0u32; n];
    let mut touched = Vec::new();
    for &s in seeds.as_slice() {
        if s as usize >= n {
            return Err(Error::UnknownIndex(s));
        }
        let cs = g.cits(s).len();
        for &u in g.cits(s) {
            for &d in g.refs(u) {
                if overlap[d as usize] == 0 {
                    touched.push(d);
                }
                overlap[d as usize] += 1;
            }
        }
        for &d in &touched {
            let cd = g.cits(d).len();
            scores[d as usize] +=
                overlap[d as usize] as f64 / ((cs as f64).sqrt() * (cd as f64).sqrt());
            overlap[d as usize] = 0;
        }
        touched.clear();
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeds(g: &CitationGraph, t: &[&str]) -> SeedSet {
        SeedSet::from_tokens(t.iter().copied(), g.node_count(), |x| g.index_of(x)).unwrap()
    }

    #[test]
    fn single_node_fixed_point() {
        let g = CitationGraph::from_edges(&[], &[("A", 2000)]);
        let x = paperrank(&g, &seeds(&g, &["A"]), &PageRankParams::default()).unwrap();
        assert_eq!(x, vec![1.0]);
    }

    #[test]
    fn mass_is_conserved_with_dangling_nodes() {
        let g = CitationGraph::from_edges(
            &[("A", "B"), ("B", "C"), ("C", "A"), ("D", "C")],
            &[("E", 1), ("F", 1)],
        );
        let x = paperrank(&g, &seeds(&g, &["A", "E"]), &PageRankParams::default()).unwrap();
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(x[g.index_of("F").unwrap() as usize], 0.0);
    }

    #[test]
    fn rejects_bad_damping() {
        let g = CitationGraph::from_edges(&[("A", "B")], &[]);
        let p = PageRankParams { damping: 1.0, ..Default::default() };
        assert!(paperrank(&g, &seeds(&g, &["A"]), &p).is_err());
    }

    #[test]
    fn cf_identical_columns_and_orthogonal() {
        let mut edges = Vec::new();
        let citers = ["u1", "u2", "u3", "u4", "u5"];
        for u in citers {
            edges.push((u, "s"));
            edges.push((u, "d"));
        }
        edges.push(("v", "lonely"));
        let g = CitationGraph::from_edges(&edges, &[]);
        let x = cf_scores(&g, &seeds(&g, &["s"])).unwrap();
        assert!((x[g.index_of("d").unwrap() as usize] - 1.0).abs() < 1e-15);
        assert_eq!(x[g.index_of("lonely").unwrap() as usize], 0.0);
        // citing papers are never cited: zero column
        assert_eq!(x[g.index_of("u1").unwrap() as usize], 0.0);
    }
}
