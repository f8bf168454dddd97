//! Synthetic citation graphs for examples, tests and desk-scale experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{CitationGraph, GraphBuilder};
use crate::rng;

/// A graph whose citing papers reference targets of their own community.
#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub graph: CitationGraph,
    /// Community of every node, by index.
    pub community: Vec<usize>,
    /// Target papers of each community, by index.
    pub targets: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy)]
pub struct PlantedParams {
    pub communities: usize,
    pub targets_per_community: usize,
    pub citers_per_community: usize,
    pub refs_per_citer: usize,
    pub seed: u64,
}

impl Default for PlantedParams {
    /// 4 communities of 50 targets and 200 citers: 1,000 nodes.
    fn default() -> Self {
        PlantedParams {
            communities: 4,
            targets_per_community: 50,
            citers_per_community: 200,
            refs_per_citer: 10,
            seed: 7,
        }
    }
}

pub fn target_token(c: usize, i: usize) -> String {
    format!("c{c}t{i:04}")
}

pub fn citer_token(c: usize, j: usize) -> String {
    format!("c{c}u{j:04}")
}

/// Reference lists a citer of community `c` would have, drawn uniformly
/// without replacement from that community's targets.
pub fn planted_references<R: Rng>(p: &PlantedParams, c: usize, rng: &mut R) -> Vec<String> {
    let pool: Vec<usize> = (0..p.targets_per_community).collect();
    pool.choose_multiple(rng, p.refs_per_citer.min(pool.len()))
        .map(|&i| target_token(c, i))
        .collect()
}

pub fn planted_cocitation(p: &PlantedParams) -> PlantedGraph {
    let mut r = rng::stream(p.seed, &[0x504c_414e]);
    let mut b = GraphBuilder::new();
    for c in 0..p.communities {
        for j in 0..p.citers_per_community {
            let citer = citer_token(c, j);
            for t in planted_references(p, c, &mut r) {
                b.add_citation(&citer, &t);
            }
        }
    }
    let graph = b.build().0;
    let community_of = |t: &str| -> usize {
        t[1..t.find(['t', 'u']).unwrap()].parse().unwrap()
    };
    let community: Vec<usize> = graph.tokens().iter().map(|t| community_of(t)).collect();
    let mut targets = vec![Vec::new(); p.communities];
    for (v, t) in graph.tokens().iter().enumerate() {
        if t.contains('t') {
            targets[community[v]].push(v as u32);
        }
    }
    PlantedGraph {
        graph,
        community,
        targets,
    }
}

/// Parameters of a growing, time-stamped citation graph with topic structure.
#[derive(Debug, Clone, Copy)]
pub struct TemporalParams {
    pub first_year: i32,
    pub last_year: i32,
    /// Papers published in the first year; later years grow geometrically.
    pub initial_papers: usize,
    pub growth: f64,
    pub topics: usize,
    pub subtopics_per_topic: usize,
    /// Inclusive range of reference-list lengths.
    pub refs: (usize, usize),
    /// Probability a reference is drawn from the citing paper's subtopic.
    pub p_subtopic: f64,
    /// Probability a reference is drawn from the citing paper's topic (outside the subtopic).
    pub p_topic: f64,
    /// Probability a reference copies a reference of an earlier paper in the chosen pool.
    pub p_copy: f64,
    pub seed: u64,
}

impl Default for TemporalParams {
    fn default() -> Self {
        TemporalParams {
            first_year: 1990,
            last_year: 2010,
            initial_papers: 600,
            growth: 1.12,
            topics: 20,
            subtopics_per_topic: 8,
            refs: (5, 60),
            p_subtopic: 0.6,
            p_topic: 0.3,
            p_copy: 0.5,
            seed: 2019,
        }
    }
}

impl TemporalParams {
    /// Papers per year, first to last.
    pub fn yearly_counts(&self) -> Vec<usize> {
        let mut n = self.initial_papers as f64;
        (self.first_year..=self.last_year)
            .map(|_| {
                let c = n.round() as usize;
                n *= self.growth;
                c
            })
            .collect()
    }
}

/// Generates papers year by year; each cites earlier papers, mostly within
/// its own subtopic and topic, half the time by copying an earlier paper's
/// reference (which yields heavy-tailed citation counts).
pub fn temporal_citation_graph(p: &TemporalParams) -> CitationGraph {
    let mut r = rng::stream(p.seed, &[0x5445_4d50]);
    let n_sub = p.topics * p.subtopics_per_topic;
    let mut by_sub: Vec<Vec<u32>> = vec![Vec::new(); n_sub];
    let mut by_topic: Vec<Vec<u32>> = vec![Vec::new(); p.topics];
    let mut everyone: Vec<u32> = Vec::new();
    let mut refs_of: Vec<Vec<u32>> = Vec::new();
    let mut years = Vec::new();

    for (yi, &count) in p.yearly_counts().iter().enumerate() {
        let year = p.first_year + yi as i32;
        let mut fresh = Vec::with_capacity(count);
        for _ in 0..count {
            let sub = r.gen_range(0..n_sub);
            let topic = sub / p.subtopics_per_topic;
            let id = refs_of.len() as u32;
            let mut refs: Vec<u32> = Vec::new();
            if !everyone.is_empty() {
                let want = r.gen_range(p.refs.0..=p.refs.1);
                let mut attempts = 0;
                while refs.len() < want && attempts < want * 10 {
                    attempts += 1;
                    let u: f64 = r.gen();
                    let pool = if u < p.p_subtopic && !by_sub[sub].is_empty() {
                        &by_sub[sub]
                    } else if u < p.p_subtopic + p.p_topic && !by_topic[topic].is_empty() {
                        &by_topic[topic]
                    } else {
                        &everyone
                    };
                    let pick = *pool.choose(&mut r).unwrap();
                    let cand = if r.gen::<f64>() < p.p_copy {
                        match refs_of[pick as usize].choose(&mut r) {
                            Some(&x) => x,
                            None => pick,
                        }
                    } else {
                        pick
                    };
                    if !refs.contains(&cand) {
                        refs.push(cand);
                    }
                }
            }
            refs_of.push(refs);
            years.push(year);
            fresh.push((id, sub, topic));
        }
        // papers become citable the year after publication
        for (id, sub, topic) in fresh {
            by_sub[sub].push(id);
            by_topic[topic].push(id);
            everyone.push(id);
        }
    }

    let token = |i: usize| format!("P{i:07}");
    let mut b = GraphBuilder::new();
    for (i, &y) in years.iter().enumerate() {
        b.add_paper(&token(i), y);
    }
    for (i, refs) in refs_of.iter().enumerate() {
        for &w in refs {
            b.add_citation(&token(i), &token(w as usize));
        }
    }
    b.build().0
}
