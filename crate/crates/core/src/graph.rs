//! Citation graph storage, ingestion and time slicing.
//!
//! Papers are identified externally by opaque tokens and internally by a
//! dense index. Indices are assigned in lexicographic token order, so the
//! same set of papers always maps to the same indices no matter how the
//! input files are ordered. Adjacency is kept in three CSR blocks: `Ref(v)`
//! (papers `v` cites), `Cit(v)` (papers citing `v`) and their sorted union
//! `Adj(v)`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense internal node index.
pub type NodeIdx = u32;

/// Which neighbor set to return from [`CitationGraph::neighbors`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborMode {
    Refs,
    Cits,
    Adj,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<NodeIdx>,
}

impl Csr {
    /// Builds from `(row, col)` pairs already sorted by row then column.
    fn from_sorted(n: usize, pairs: impl Iterator<Item = (NodeIdx, NodeIdx)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::new();
        for (row, col) in pairs {
            offsets[row as usize + 1] += 1;
            targets.push(col);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, v: NodeIdx) -> &[NodeIdx] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Immutable directed citation graph with optional per-node years.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    tokens: Vec<String>,
    lookup: HashMap<String, NodeIdx>,
    years: Vec<Option<i32>>,
    has_years: bool,
    refs: Csr,
    cits: Csr,
    adj: Csr,
}

/// Counters collected while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub edge_records: usize,
    pub node_records: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Accumulates papers and citations, then produces a [`CitationGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    interned: HashMap<String, u32>,
    names: Vec<String>,
    years: Vec<Option<i32>>,
    edges: Vec<(u32, u32)>,
    has_years: bool,
    report: LoadReport,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.interned.get(token) {
            return id;
        }
        let id = self.names.len() as u32;
        self.interned.insert(token.to_string(), id);
        self.names.push(token.to_string());
        self.years.push(None);
        id
    }

    /// Records a year for `token`. Returns `false` if the paper already had one.
    pub fn add_paper(&mut self, token: &str, year: i32) -> bool {
        self.has_years = true;
        let id = self.intern(token) as usize;
        let fresh = self.years[id].is_none();
        self.years[id] = Some(year);
        fresh
    }

    /// Marks the graph as carrying year metadata even if no paper is added.
    pub fn with_years(mut self) -> Self {
        self.has_years = true;
        self
    }

    /// Adds the citation `citing -> cited`. Self-loops are counted and dropped.
    pub fn add_citation(&mut self, citing: &str, cited: &str) {
        if citing == cited {
            self.intern(citing);
            self.report.self_loops += 1;
            return;
        }
        let u = self.intern(citing);
        let w = self.intern(cited);
        self.edges.push((u, w));
    }

    pub fn build(self) -> (CitationGraph, LoadReport) {
        let GraphBuilder {
            names,
            years,
            mut edges,
            has_years,
            mut report,
            ..
        } = self;

        // canonical index = rank of the token in sorted order
        let mut order: Vec<u32> = (0..names.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| names[a as usize].cmp(&names[b as usize]));
        let mut remap = vec![0u32; names.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let mut names = names;
        let tokens: Vec<String> = order
            .iter()
            .map(|&old| std::mem::take(&mut names[old as usize]))
            .collect();
        let years: Vec<Option<i32>> = order.iter().map(|&old| years[old as usize]).collect();

        for e in edges.iter_mut() {
            *e = (remap[e.0 as usize], remap[e.1 as usize]);
        }
        let before = edges.len();
        edges.sort_unstable();
        edges.dedup();
        report.duplicate_edges += before - edges.len();

        let graph = CitationGraph::from_canonical(tokens, years, has_years, edges);
        (graph, report)
    }
}

impl CitationGraph {
    /// `tokens` must be sorted and unique; `edges` sorted, unique, loop-free.
    fn from_canonical(
        tokens: Vec<String>,
        years: Vec<Option<i32>>,
        has_years: bool,
        edges: Vec<(NodeIdx, NodeIdx)>,
    ) -> Self {
        let n = tokens.len();
        let refs = Csr::from_sorted(n, edges.iter().copied());
        let mut rev: Vec<(NodeIdx, NodeIdx)> = edges.iter().map(|&(u, w)| (w, u)).collect();
        rev.sort_unstable();
        let cits = Csr::from_sorted(n, rev.into_iter());

        let mut adj_offsets = vec![0usize; n + 1];
        let mut adj_targets = Vec::with_capacity(edges.len() * 2);
        for v in 0..n as NodeIdx {
            let (r, c) = (refs.row(v), cits.row(v));
            let (mut i, mut j) = (0, 0);
            while i < r.len() || j < c.len() {
                let next = match (r.get(i), c.get(j)) {
                    (Some(&a), Some(&b)) if a == b => {
                        i += 1;
                        j += 1;
                        a
                    }
                    (Some(&a), Some(&b)) if a < b => {
                        i += 1;
                        a
                    }
                    (Some(_), Some(&b)) => {
                        j += 1;
                        b
                    }
                    (Some(&a), None) => {
                        i += 1;
                        a
                    }
                    (None, Some(&b)) => {
                        j += 1;
                        b
                    }
                    (None, None) => unreachable!(),
                };
                adj_targets.push(next);
            }
            adj_offsets[v as usize + 1] = adj_targets.len();
        }
        let adj = Csr {
            offsets: adj_offsets,
            targets: adj_targets,
        };

        let lookup = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as NodeIdx))
            .collect();
        CitationGraph {
            tokens,
            lookup,
            years,
            has_years,
            refs,
            cits,
            adj,
        }
    }

    /// Convenience constructor from in-memory edge and year lists.
    pub fn from_edges(edges: &[(&str, &str)], years: &[(&str, i32)]) -> Self {
        let mut b = GraphBuilder::new();
        for &(t, y) in years {
            b.add_paper(t, y);
        }
        for &(u, w) in edges {
            b.add_citation(u, w);
        }
        b.build().0
    }

    pub fn node_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn edge_count(&self) -> usize {
        self.refs.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_years(&self) -> bool {
        self.has_years
    }

    pub fn token(&self, v: NodeIdx) -> &str {
        &self.tokens[v as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<NodeIdx> {
        self.lookup.get(token).copied()
    }

    /// Like [`index_of`](Self::index_of) but unknown tokens are an error.
    pub fn require(&self, token: &str) -> Result<NodeIdx> {
        self.index_of(token)
            .ok_or_else(|| Error::UnknownPaper(token.to_string()))
    }

    pub fn year(&self, v: NodeIdx) -> Option<i32> {
        self.years[v as usize]
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let mut it = self.years.iter().flatten();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), &y| (lo.min(y), hi.max(y))))
    }

    #[inline]
    pub fn refs(&self, v: NodeIdx) -> &[NodeIdx] {
        self.refs.row(v)
    }

    #[inline]
    pub fn cits(&self, v: NodeIdx) -> &[NodeIdx] {
        self.cits.row(v)
    }

    #[inline]
    pub fn adj(&self, v: NodeIdx) -> &[NodeIdx] {
        self.adj.row(v)
    }

    /// Undirected degree `|Adj(v)|`.
    #[inline]
    pub fn degree(&self, v: NodeIdx) -> usize {
        self.adj.row(v).len()
    }

    #[inline]
    pub fn is_adjacent(&self, a: NodeIdx, b: NodeIdx) -> bool {
        self.adj(a).binary_search(&b).is_ok()
    }

    pub fn neighbors(&self, token: &str, mode: NeighborMode) -> Result<&[NodeIdx]> {
        let v = self.require(token)?;
        Ok(match mode {
            NeighborMode::Refs => self.refs(v),
            NeighborMode::Cits => self.cits(v),
            NeighborMode::Adj => self.adj(v),
        })
    }

    /// Directed edges `(citing, cited)` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIdx, NodeIdx)> + '_ {
        (0..self.node_count() as NodeIdx)
            .flat_map(move |u| self.refs(u).iter().map(move |&w| (u, w)))
    }

    /// Sub-graph of papers with a known year `<= year`.
    pub fn time_slice(&self, year: i32) -> Result<CitationGraph> {
        if !self.has_years {
            return Err(Error::MissingYears);
        }
        Ok(self.induced(|v| matches!(self.year(v), Some(y) if y <= year)))
    }

    /// Sub-graph induced by the nodes for which `keep` returns true.
    pub fn induced(&self, keep: impl Fn(NodeIdx) -> bool) -> CitationGraph {
        let n = self.node_count();
        let mut remap = vec![NodeIdx::MAX; n];
        let mut tokens = Vec::new();
        let mut years = Vec::new();
        for v in 0..n as NodeIdx {
            if keep(v) {
                remap[v as usize] = tokens.len() as NodeIdx;
                tokens.push(self.tokens[v as usize].clone());
                years.push(self.years[v as usize]);
            }
        }
        // order-preserving remap keeps edges sorted
        let edges = self
            .edges()
            .filter_map(|(u, w)| {
                let (a, b) = (remap[u as usize], remap[w as usize]);
                (a != NodeIdx::MAX && b != NodeIdx::MAX).then_some((a, b))
            })
            .collect();
        CitationGraph::from_canonical(tokens, years, self.has_years, edges)
    }

    /// Checks every structural invariant by full scan.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut total = 0;
        for v in 0..self.node_count() as NodeIdx {
            let r = self.refs(v);
            total += r.len();
            if r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("Ref({}) not strictly sorted", self.token(v)));
            }
            if r.contains(&v) {
                return Err(format!("self-loop at {}", self.token(v)));
            }
            for &w in r {
                if self.cits(w).binary_search(&v).is_err() {
                    return Err(format!(
                        "{} -> {} missing from Cit",
                        self.token(v),
                        self.token(w)
                    ));
                }
            }
            let mut union: Vec<NodeIdx> = r.iter().chain(self.cits(v)).copied().collect();
            union.sort_unstable();
            union.dedup();
            if union != self.adj(v) {
                return Err(format!("Adj({}) is not Ref ∪ Cit", self.token(v)));
            }
        }
        if total != self.edge_count() || self.cits.targets.len() != total {
            return Err("edge counts disagree".into());
        }
        Ok(())
    }

    /// Writes the edges file: `<citing>\t<cited>` per line.
    pub fn write_edges<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, w) in self.edges() {
            writeln!(out, "{}\t{}", self.token(u), self.token(w))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes the nodes file: `<paper>\t<year>` for every paper with a known year.
    pub fn write_nodes<W: Write>(&self, mut out: W) -> Result<()> {
        for (t, y) in self.tokens.iter().zip(&self.years) {
            if let Some(y) = y {
                writeln!(out, "{t}\t{y}")?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_tsv(&self, edges: &Path, nodes: Option<&Path>) -> Result<()> {
        self.write_edges(BufWriter::new(File::create(edges)?))?;
        if let Some(nodes) = nodes {
            self.write_nodes(BufWriter::new(File::create(nodes)?))?;
        }
        Ok(())
    }
}

fn split_record<'a>(line: &'a str, name: &str, lineno: usize) -> Result<(&'a str, &'a str)> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 2 {
        return Err(Error::parse(
            name,
            lineno,
            format!("expected 2 tab-separated fields, found {}", fields.len()),
        ));
    }
    for f in &fields {
        if f.is_empty() || f.chars().any(char::is_whitespace) {
            return Err(Error::parse(name, lineno, format!("invalid paper id `{f}`")));
        }
    }
    Ok((fields[0], fields[1]))
}

fn records<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Parses an edges file and an optional nodes file into a graph.
///
/// Blank lines are skipped and a trailing `\r` is tolerated.
pub fn load_graph<E: BufRead, N: BufRead>(
    edges: E,
    nodes: Option<N>,
) -> Result<(CitationGraph, LoadReport)> {
    let mut b = GraphBuilder::new();
    if let Some(nodes) = nodes {
        b = b.with_years();
        for (lineno, line) in records(nodes) {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (id, year) = split_record(line, "nodes", lineno)?;
            let year: i32 = year.parse().map_err(|_| {
                Error::parse("nodes", lineno, format!("year `{year}` is not an integer"))
            })?;
            if !b.add_paper(id, year) {
                return Err(Error::parse(
                    "nodes",
                    lineno,
                    format!("duplicate paper id `{id}`"),
                ));
            }
            b.report.node_records += 1;
        }
    }
    for (lineno, line) in records(edges) {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (u, w) = split_record(line, "edges", lineno)?;
        b.add_citation(u, w);
        b.report.edge_records += 1;
    }
    Ok(b.build())
}

pub fn load_graph_files(edges: &Path, nodes: Option<&Path>) -> Result<(CitationGraph, LoadReport)> {
    let e = BufReader::new(File::open(edges)?);
    match nodes {
        Some(p) => load_graph(e, Some(BufReader::new(File::open(p)?))),
        None => load_graph(e, None::<BufReader<File>>),
    }
}

const CACHE_MAGIC: &[u8; 8] = b"CITGRPH1";
const NO_YEAR: i32 = i32::MIN;

/// Binary cache: magic, flags, node table (token, year), edge list. Little endian.
pub fn write_cache<W: Write>(g: &CitationGraph, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&[g.has_years as u8])?;
    out.write_all(&(g.node_count() as u64).to_le_bytes())?;
    for (t, y) in g.tokens.iter().zip(&g.years) {
        out.write_all(&(t.len() as u32).to_le_bytes())?;
        out.write_all(t.as_bytes())?;
        out.write_all(&y.unwrap_or(NO_YEAR).to_le_bytes())?;
    }
    out.write_all(&(g.edge_count() as u64).to_le_bytes())?;
    for (u, w) in g.edges() {
        out.write_all(&u.to_le_bytes())?;
        out.write_all(&w.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cache<R: Read>(input: R) -> Result<CitationGraph> {
    let mut r = BufReader::new(input);
    let bad = |msg: &str| Error::parse("cache", 0, msg.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(bad("not a graph cache"));
    }
    let mut b1 = [0u8; 1];
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b1)?;
    let has_years = b1[0] != 0;
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut tokens = Vec::with_capacity(n);
    let mut years = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b4)?;
        let mut buf = vec![0u8; u32::from_le_bytes(b4) as usize];
        r.read_exact(&mut buf)?;
        tokens.push(String::from_utf8(buf).map_err(|_| bad("token is not UTF-8"))?);
        r.read_exact(&mut b4)?;
        let y = i32::from_le_bytes(b4);
        years.push((y != NO_YEAR).then_some(y));
    }
    if tokens.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("node table not in canonical order"));
    }
    r.read_exact(&mut b8)?;
    let m = u64::from_le_bytes(b8) as usize;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        r.read_exact(&mut b4)?;
        let u = u32::from_le_bytes(b4);
        r.read_exact(&mut b4)?;
        let w = u32::from_le_bytes(b4);
        if u as usize >= n || w as usize >= n || u == w {
            return Err(bad("edge endpoint out of range"));
        }
        edges.push((u, w));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("edge list not in canonical order"));
    }
    Ok(CitationGraph::from_canonical(tokens, years, has_years, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(g: &CitationGraph, t: &str) -> NodeIdx {
        g.index_of(t).unwrap()
    }

    fn toks<'a>(g: &'a CitationGraph, vs: &[NodeIdx]) -> Vec<&'a str> {
        vs.iter().map(|&v| g.token(v)).collect()
    }

    #[test]
    fn three_edge_triangle() {
        let g = CitationGraph::from_edges(&[("A", "B"), ("A", "C"), ("B", "C")], &[]);
        assert_eq!((g.node_count(), g.edge_count()), (3, 3));
        assert_eq!(toks(&g, g.refs(idx(&g, "A"))), ["B", "C"]);
        assert_eq!(toks(&g, g.cits(idx(&g, "C"))), ["A", "B"]);
        assert_eq!(g.degree(idx(&g, "C")), 2);
        g.check_invariants().unwrap();
    }

    #[test]
    fn duplicates_and_self_loops() {
        let (g, rep) = load_graph("A\tB\nA\tB\n".as_bytes(), None::<&[u8]>).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(rep.duplicate_edges, 1);

        let (g, rep) = load_graph("A\tA\n".as_bytes(), None::<&[u8]>).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(rep.self_loops, 1);
    }

    #[test]
    fn malformed_records_report_line() {
        let err = load_graph("A\tB\nA\tB\tC\n".as_bytes(), None::<&[u8]>).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = load_graph("A\tB\n".as_bytes(), Some("A\t2001\nB\tlate\n".as_bytes()))
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("not an integer"));
    }

    #[test]
    fn nodes_only_in_edges_have_unknown_year() {
        let (g, _) =
            load_graph("A\tB\n".as_bytes(), Some("A\t2001\n".as_bytes())).unwrap();
        assert_eq!(g.year(idx(&g, "A")), Some(2001));
        assert_eq!(g.year(idx(&g, "B")), None);
        assert!(g.has_years());
    }

    #[test]
    fn time_slice_cases() {
        let g = CitationGraph::from_edges(
            &[("C", "A"), ("B", "A")],
            &[("A", 2004), ("B", 2006), ("C", 2007)],
        );
        let s = g.time_slice(2006).unwrap();
        assert_eq!(s.tokens(), ["A", "B"]);
        assert_eq!(s.edges().collect::<Vec<_>>(), vec![(1, 0)]);
        assert_eq!(g.time_slice(2007).unwrap(), g);
        assert_eq!(g.time_slice(2030).unwrap(), g);
        let empty = g.time_slice(2000).unwrap();
        assert_eq!((empty.node_count(), empty.edge_count()), (0, 0));
        assert_eq!(s.time_slice(2006).unwrap(), s);
    }

    #[test]
    fn time_slice_needs_years() {
        let g = CitationGraph::from_edges(&[("A", "B")], &[]);
        let err = g.time_slice(2000).unwrap_err();
        assert_eq!(err.to_string(), "time-slice requires years");
    }

    #[test]
    fn unknown_year_nodes_never_survive_a_slice() {
        let g = CitationGraph::from_edges(&[("A", "B")], &[("A", 2000)]);
        assert_eq!(g.time_slice(3000).unwrap().tokens(), ["A"]);
    }

    #[test]
    fn neighbor_modes() {
        let g = CitationGraph::from_edges(&[("A", "B"), ("C", "A")], &[]);
        assert_eq!(toks(&g, g.neighbors("A", NeighborMode::Refs).unwrap()), ["B"]);
        assert_eq!(toks(&g, g.neighbors("A", NeighborMode::Cits).unwrap()), ["C"]);
        assert_eq!(toks(&g, g.neighbors("A", NeighborMode::Adj).unwrap()), ["B", "C"]);
        assert!(matches!(
            g.neighbors("Z", NeighborMode::Adj),
            Err(Error::UnknownPaper(_))
        ));

        let g = CitationGraph::from_edges(&[("A", "B"), ("B", "A")], &[("D", 1999)]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(toks(&g, g.neighbors("A", NeighborMode::Adj).unwrap()), ["B"]);
        for mode in [NeighborMode::Refs, NeighborMode::Cits, NeighborMode::Adj] {
            assert!(g.neighbors("D", mode).unwrap().is_empty());
        }
    }

    #[test]
    fn cache_round_trip() {
        let g = CitationGraph::from_edges(
            &[("p1", "p2"), ("p3", "p1"), ("p3", "p2"), ("p4", "p9")],
            &[("p1", 2001), ("p2", 1999), ("p3", 2003), ("iso", 2005)],
        );
        let mut buf = Vec::new();
        write_cache(&g, &mut buf).unwrap();
        assert_eq!(read_cache(buf.as_slice()).unwrap(), g);
        assert!(read_cache(&b"garbage!"[..]).is_err());
    }
}
