//! Neighborhood construction: uniform walks, second-order biased walks and
//! co-citation reference lists.
//!
//! Walks run on the undirected view `Adj(v)`. Co-citation lines are shuffled
//! copies of `Ref(v)`. Every walk and every reference list draws from its own
//! random stream keyed by `(seed, pass, root)`, so corpora are identical for
//! any worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CitationGraph, NodeIdx};
use crate::rng::{self, TAG_REFLIST, TAG_SHUFFLE, TAG_WALK};

/// A node sequence; the first entry is the root.
pub type Walk = Vec<NodeIdx>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    /// Walks per node (passes over the graph).
    pub walks_per_node: usize,
    /// Steps per walk; a walk holds at most `walk_length + 1` nodes.
    pub walk_length: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            walks_per_node: 10,
            walk_length: 80,
            p: 1.0,
            q: 1.0,
            seed: 42,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 || self.walk_length < 1 {
            return Err(Error::InvalidParam(
                "walks per node and walk length must be >= 1".into(),
            ));
        }
        if !(self.p > 0.0 && self.p.is_finite() && self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidParam("p and q must be positive".into()));
        }
        Ok(())
    }
}

/// Neighborhood construction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// First-order walk, next node uniform over `Adj`.
    Uniform,
    /// Second-order walk biased by `p` and `q`.
    Biased,
    /// Shuffled reference lists.
    CoCitation,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Biased => "biased",
            Strategy::CoCitation => "cocit",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "rw" => Ok(Strategy::Uniform),
            "biased" | "n2v" => Ok(Strategy::Biased),
            "cocit" | "ccs" => Ok(Strategy::CoCitation),
            other => Err(Error::InvalidParam(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Search bias for a candidate at distance `d` (0, 1 or 2) from the previous node.
pub fn alpha(p: f64, q: f64, d: u8) -> Result<f64> {
    match d {
        0 => Ok(1.0 / p),
        1 => Ok(1.0),
        2 => Ok(1.0 / q),
        _ => Err(Error::InvalidParam(format!("distance {d} not in {{0,1,2}}"))),
    }
}

/// Uniform walk of up to `t` steps from `root`. Stops early at a node with no neighbors.
pub fn random_walk<R: Rng + ?Sized>(
    g: &CitationGraph,
    root: NodeIdx,
    t: usize,
    rng: &mut R,
) -> Walk {
    let mut walk = Vec::with_capacity(t + 1);
    walk.push(root);
    let mut cur = root;
    for _ in 0..t {
        let nbrs = g.adj(cur);
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.gen_range(0..nbrs.len())];
        walk.push(cur);
    }
    walk
}

/// One second-order step from `cur`, having arrived from `prev`.
///
/// Distance classes are resolved locally: the candidate is `prev` (0), is
/// adjacent to `prev` (1), or neither (2).
pub fn biased_step<R: Rng + ?Sized>(
    g: &CitationGraph,
    prev: NodeIdx,
    cur: NodeIdx,
    p: f64,
    q: f64,
    weights: &mut Vec<f64>,
    rng: &mut R,
) -> Option<NodeIdx> {
    let nbrs = g.adj(cur);
    if nbrs.is_empty() {
        return None;
    }
    let (w_return, w_out) = (1.0 / p, 1.0 / q);
    weights.clear();
    let mut total = 0.0;
    for &x in nbrs {
        let w = if x == prev {
            w_return
        } else if g.is_adjacent(prev, x) {
            1.0
        } else {
            w_out
        };
        total += w;
        weights.push(w);
    }
    let mut target = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return Some(nbrs[i]);
        }
        target -= w;
    }
    // rounding left the draw past the last bucket
    Some(nbrs[nbrs.len() - 1])
}

/// Second-order walk. The first step is uniform; later steps use [`biased_step`].
pub fn biased_walk<R: Rng + ?Sized>(
    g: &CitationGraph,
    root: NodeIdx,
    params: &SamplingParams,
    rng: &mut R,
) -> Walk {
    let t = params.walk_length;
    let mut walk = Vec::with_capacity(t + 1);
    walk.push(root);
    if t == 0 {
        return walk;
    }
    let first = g.adj(root);
    if first.is_empty() {
        return walk;
    }
    walk.push(first[rng.gen_range(0..first.len())]);
    let mut weights = Vec::new();
    while walk.len() <= t {
        let (prev, cur) = (walk[walk.len() - 2], walk[walk.len() - 1]);
        match biased_step(g, prev, cur, params.p, params.q, &mut weights, rng) {
            Some(next) => walk.push(next),
            None => break,
        }
    }
    walk
}

/// How a corpus was produced. Written as `#` header lines in corpus files.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub strategy: Strategy,
    pub params: SamplingParams,
    pub params_hash: Option<String>,
}

impl Provenance {
    fn header(&self) -> String {
        let p = &self.params;
        match self.strategy {
            Strategy::CoCitation => format!(
                "# strategy={} n={} seed={}",
                self.strategy, p.walks_per_node, p.seed
            ),
            _ => format!(
                "# strategy={} n={} t={} p={} q={} seed={}",
                self.strategy, p.walks_per_node, p.walk_length, p.p, p.q, p.seed
            ),
        }
    }
}

/// Ordered collection of node sequences plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    pub lines: Vec<Vec<NodeIdx>>,
    pub provenance: Provenance,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Occurrence count of every node, used for the negative-sampling noise law.
    pub fn frequencies(&self, n: usize) -> Vec<u64> {
        let mut f = vec![0u64; n];
        for line in &self.lines {
            for &v in line {
                f[v as usize] += 1;
            }
        }
        f
    }

    /// Writes one sequence per line as space-separated paper ids.
    pub fn write<W: Write>(&self, g: &CitationGraph, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.provenance.header())?;
        if let Some(h) = &self.provenance.params_hash {
            writeln!(out, "# params_hash={h}")?;
        }
        let mut buf = String::new();
        for line in &self.lines {
            buf.clear();
            for (i, &v) in line.iter().enumerate() {
                if i > 0 {
                    buf.push(' ');
                }
                buf.push_str(g.token(v));
            }
            buf.push('\n');
            out.write_all(buf.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a corpus file, resolving ids against `g`.
    pub fn read<R: BufRead>(input: R, g: &CitationGraph) -> Result<WalkCorpus> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        let mut lines = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if let Some(h) = line.strip_prefix('#') {
                for pair in h.split_whitespace() {
                    if let Some((k, v)) = pair.split_once('=') {
                        kv.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            let seq = line
                .split_whitespace()
                .map(|t| {
                    g.index_of(t).ok_or_else(|| {
                        Error::parse("corpus", lineno, format!("unknown paper id `{t}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if !seq.is_empty() {
                lines.push(seq);
            }
        }
        let num = |key: &str, default: f64| -> Result<f64> {
            kv.get(key).map_or(Ok(default), |v| {
                v.parse()
                    .map_err(|_| Error::parse("corpus", 1, format!("bad header value {key}={v}")))
            })
        };
        let d = SamplingParams::default();
        let strategy = kv
            .get("strategy")
            .map_or(Ok(Strategy::Uniform), |s| s.parse())?;
        let params = SamplingParams {
            walks_per_node: num("n", d.walks_per_node as f64)? as usize,
            walk_length: num("t", d.walk_length as f64)? as usize,
            p: num("p", d.p)?,
            q: num("q", d.q)?,
            seed: kv
                .get("seed")
                .map_or(Ok(d.seed), |s| s.parse())
                .map_err(|_| Error::parse("corpus", 1, "bad seed"))?,
        };
        Ok(WalkCorpus {
            lines,
            provenance: Provenance {
                strategy,
                params,
                params_hash: kv.get("params_hash").cloned(),
            },
        })
    }
}

fn shuffled_nodes(n: usize, seed: u64, pass: usize) -> Vec<NodeIdx> {
    let mut order: Vec<NodeIdx> = (0..n as NodeIdx).collect();
    order.shuffle(&mut rng::stream(seed, &[TAG_SHUFFLE, pass as u64]));
    order
}

fn map_ordered<T: Send>(
    order: &[NodeIdx],
    threads: usize,
    f: impl Fn(NodeIdx) -> T + Sync + Send,
) -> Result<Vec<T>> {
    if threads <= 1 {
        return Ok(order.iter().map(|&v| f(v)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    Ok(pool.install(|| order.par_iter().map(|&v| f(v)).collect()))
}

/// `n` passes; each pass shuffles the nodes and roots one walk at every node.
pub fn generate_walk_corpus(
    g: &CitationGraph,
    params: &SamplingParams,
    strategy: Strategy,
    threads: usize,
) -> Result<WalkCorpus> {
    params.validate()?;
    if strategy == Strategy::CoCitation {
        return Err(Error::InvalidParam(
            "co-citation is not a walk strategy".into(),
        ));
    }
    let mut lines = Vec::with_capacity(params.walks_per_node * g.node_count());
    for pass in 0..params.walks_per_node {
        let order = shuffled_nodes(g.node_count(), params.seed, pass);
        let walks = map_ordered(&order, threads, |root| {
            let mut r = rng::stream(params.seed, &[TAG_WALK, pass as u64, root as u64]);
            match strategy {
                Strategy::Biased => biased_walk(g, root, params, &mut r),
                _ => random_walk(g, root, params.walk_length, &mut r),
            }
        })?;
        lines.extend(walks);
    }
    Ok(WalkCorpus {
        lines,
        provenance: Provenance {
            strategy,
            params: *params,
            params_hash: None,
        },
    })
}

/// `n` passes; each pass shuffles the nodes and emits every node's shuffled
/// reference list as one line. Papers citing nothing emit nothing.
pub fn cocitation_corpus(g: &CitationGraph, n: usize, seed: u64) -> Result<WalkCorpus> {
    if n < 1 {
        return Err(Error::InvalidParam("walks per node must be >= 1".into()));
    }
    let mut lines = Vec::new();
    for pass in 0..n {
        for v in shuffled_nodes(g.node_count(), seed, pass) {
            let refs = g.refs(v);
            if refs.is_empty() {
                continue;
            }
            let mut line = refs.to_vec();
            line.shuffle(&mut rng::stream(seed, &[TAG_REFLIST, pass as u64, v as u64]));
            lines.push(line);
        }
    }
    Ok(WalkCorpus {
        lines,
        provenance: Provenance {
            strategy: Strategy::CoCitation,
            params: SamplingParams {
                walks_per_node: n,
                seed,
                ..SamplingParams::default()
            },
            params_hash: None,
        },
    })
}

/// Dispatches to the corpus generator for `strategy`.
pub fn generate_corpus(
    g: &CitationGraph,
    strategy: Strategy,
    params: &SamplingParams,
    threads: usize,
) -> Result<WalkCorpus> {
    match strategy {
        Strategy::CoCitation => {
            let mut c = cocitation_corpus(g, params.walks_per_node, params.seed)?;
            c.provenance.params = *params;
            Ok(c)
        }
        _ => generate_walk_corpus(g, params, strategy, threads),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn names(g: &CitationGraph, w: &[NodeIdx]) -> Vec<String> {
        w.iter().map(|&v| g.token(v).to_string()).collect()
    }

    #[test]
    fn alpha_cases() {
        for d in 0..3 {
            assert_eq!(alpha(1.0, 1.0, d).unwrap(), 1.0);
        }
        assert_eq!(alpha(2.0, 0.5, 0).unwrap(), 0.5);
        assert_eq!(alpha(2.0, 0.5, 1).unwrap(), 1.0);
        assert_eq!(alpha(2.0, 0.5, 2).unwrap(), 2.0);
        assert_eq!(alpha(4.0, 4.0, 0).unwrap(), 0.25);
        assert_eq!(alpha(4.0, 4.0, 2).unwrap(), 0.25);
        assert!(alpha(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn single_edge_forces_alternation() {
        let g = CitationGraph::from_edges(&[("A", "B")], &[]);
        let w = random_walk(&g, 0, 3, &mut rng(1));
        assert_eq!(names(&g, &w), ["A", "B", "A", "B"]);
        let params = SamplingParams {
            walk_length: 3,
            p: 3.0,
            q: 0.2,
            ..Default::default()
        };
        let w = biased_walk(&g, 0, &params, &mut rng(1));
        assert_eq!(names(&g, &w), ["A", "B", "A", "B"]);
    }

    #[test]
    fn isolated_root_stops_early() {
        let g = CitationGraph::from_edges(&[("A", "B")], &[("D", 2000)]);
        let d = g.index_of("D").unwrap();
        assert_eq!(random_walk(&g, d, 5, &mut rng(0)), vec![d]);
        let params = SamplingParams {
            walk_length: 5,
            ..Default::default()
        };
        assert_eq!(biased_walk(&g, d, &params, &mut rng(0)), vec![d]);
    }

    #[test]
    fn star_first_step_is_uniform() {
        let g = CitationGraph::from_edges(
            &[("L1", "C"), ("L2", "C"), ("L3", "C"), ("L4", "C")],
            &[],
        );
        let c = g.index_of("C").unwrap();
        let mut counts = [0usize; 5];
        let mut r = rng(99);
        let draws = 100_000;
        for _ in 0..draws {
            counts[random_walk(&g, c, 1, &mut r)[1] as usize] += 1;
        }
        for leaf in ["L1", "L2", "L3", "L4"] {
            let f = counts[g.index_of(leaf).unwrap() as usize] as f64 / draws as f64;
            assert!((f - 0.25).abs() <= 0.01, "{leaf}: {f}");
        }
    }

    fn step_freqs(g: &CitationGraph, prev: &str, cur: &str, p: f64, q: f64) -> Vec<f64> {
        let (pv, cv) = (g.index_of(prev).unwrap(), g.index_of(cur).unwrap());
        let mut counts = vec![0usize; g.node_count()];
        let mut r = rng(5);
        let mut buf = Vec::new();
        let draws = 100_000;
        for _ in 0..draws {
            counts[biased_step(g, pv, cv, p, q, &mut buf, &mut r).unwrap() as usize] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn triangle_with_pendant() {
        let g = CitationGraph::from_edges(&[("A", "B"), ("B", "C"), ("C", "A"), ("D", "B")], &[]);
        let at = |f: &[f64], t: &str| f[g.index_of(t).unwrap() as usize];
        let f = step_freqs(&g, "A", "B", 1.0, 1.0);
        for t in ["A", "C", "D"] {
            assert!((at(&f, t) - 1.0 / 3.0).abs() <= 0.01);
        }
        // α: A → 1e-6, C → 1 (adjacent to A), D → 1 (d=2, q=1)
        let f = step_freqs(&g, "A", "B", 1e6, 1.0);
        assert!(at(&f, "A") <= 0.001);
        assert!((at(&f, "C") - 0.5).abs() <= 0.01);
        assert!((at(&f, "D") - 0.5).abs() <= 0.01);
    }

    #[test]
    fn path_with_low_q() {
        let g = CitationGraph::from_edges(&[("A", "B"), ("B", "C")], &[]);
        let f = step_freqs(&g, "A", "B", 1.0, 0.25);
        assert!((f[0] - 0.2).abs() <= 0.01);
        assert!((f[2] - 0.8).abs() <= 0.01);
    }

    fn toy() -> CitationGraph {
        let mut edges = Vec::new();
        let names: Vec<String> = (0..100).map(|i| format!("n{i:03}")).collect();
        for i in 0..100 {
            for j in [1, 7, 31] {
                edges.push((names[i].as_str(), names[(i + j) % 100].as_str()));
            }
        }
        CitationGraph::from_edges(&edges, &[])
    }

    #[test]
    fn corpus_counts_and_lengths() {
        let g = toy();
        let params = SamplingParams {
            walks_per_node: 10,
            walk_length: 12,
            ..Default::default()
        };
        for strategy in [Strategy::Uniform, Strategy::Biased] {
            let c = generate_walk_corpus(&g, &params, strategy, 1).unwrap();
            assert_eq!(c.len(), 1000);
            for w in &c.lines {
                assert!(w.len() <= 13);
                assert!(w.windows(2).all(|p| g.is_adjacent(p[0], p[1])));
            }
            // every node is a root exactly once per pass
            for pass in c.lines.chunks(100) {
                let mut roots: Vec<_> = pass.iter().map(|w| w[0]).collect();
                roots.sort_unstable();
                assert_eq!(roots, (0..100).collect::<Vec<_>>());
            }
        }
        assert!(generate_walk_corpus(&g, &params, Strategy::CoCitation, 1).is_err());
    }

    #[test]
    fn corpus_is_independent_of_thread_count() {
        let g = toy();
        let params = SamplingParams {
            walks_per_node: 3,
            walk_length: 20,
            p: 0.5,
            q: 2.0,
            seed: 11,
        };
        let a = generate_walk_corpus(&g, &params, Strategy::Biased, 1).unwrap();
        let b = generate_walk_corpus(&g, &params, Strategy::Biased, 4).unwrap();
        assert_eq!(a, b);
        let mut fa = Vec::new();
        let mut fb = Vec::new();
        a.write(&g, &mut fa).unwrap();
        b.write(&g, &mut fb).unwrap();
        assert_eq!(fa, fb);
    }

    #[test]
    fn empty_graph_gives_empty_corpus() {
        let g = CitationGraph::from_edges(&[], &[]);
        let c = generate_walk_corpus(&g, &SamplingParams::default(), Strategy::Uniform, 1).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn cocitation_lines_are_reference_permutations() {
        let g = CitationGraph::from_edges(&[("A", "B"), ("A", "C"), ("A", "D")], &[]);
        let c = cocitation_corpus(&g, 1, 3).unwrap();
        assert_eq!(c.len(), 1);
        let mut line = c.lines[0].clone();
        line.sort_unstable();
        assert_eq!(line, g.refs(g.index_of("A").unwrap()));

        let g = CitationGraph::from_edges(&[], &[("X", 1), ("Y", 2)]);
        assert!(cocitation_corpus(&g, 4, 0).unwrap().is_empty());

        let g = CitationGraph::from_edges(
            &[("P", "a"), ("P", "b"), ("P", "c"), ("P", "d"), ("P", "e")],
            &[],
        );
        let c = cocitation_corpus(&g, 10, 1).unwrap();
        assert_eq!(c.len(), 10);
        assert!(c.lines.iter().all(|l| l.len() == 5));
        let f = c.frequencies(g.node_count());
        let p = g.index_of("P").unwrap() as usize;
        for (v, &count) in f.iter().enumerate() {
            assert_eq!(count, if v == p { 0 } else { 10 });
        }
    }

    #[test]
    fn corpus_file_round_trip() {
        let g = toy();
        let mut c = cocitation_corpus(&g, 2, 9).unwrap();
        c.provenance.params_hash = Some("abc".into());
        let mut buf = Vec::new();
        c.write(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# strategy=cocit n=2 seed=9\n# params_hash=abc\n"));
        let back = WalkCorpus::read(buf.as_slice(), &g).unwrap();
        assert_eq!(back.lines, c.lines);
        assert_eq!(back.provenance.strategy, Strategy::CoCitation);
        assert_eq!(back.provenance.params_hash.as_deref(), Some("abc"));

        let err = WalkCorpus::read("n000 ghost\n".as_bytes(), &g).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn rejects_bad_params() {
        let bad = SamplingParams {
            q: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplingParams {
            walk_length: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(SamplingParams::default().walks_per_node, 10);
        assert_eq!(SamplingParams::default().walk_length, 80);
    }
}
