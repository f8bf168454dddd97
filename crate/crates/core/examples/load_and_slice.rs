//! Load a citation graph from TSV, inspect it and cut time slices.
//!
//! ```text
//! cargo run --example load_and_slice [edges.tsv nodes.tsv]
//! ```
//! Without arguments a small synthetic graph is written to a temp dir first.

use std::env;
use std::path::PathBuf;

use citerec::graph::{load_graph_files, NeighborMode};
use citerec::synth::{self, TemporalParams};

fn main() -> citerec::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let tmp = env::temp_dir().join("citerec-load-and-slice");
    let (edges, nodes) = match args.as_slice() {
        [e, n] => (PathBuf::from(e), PathBuf::from(n)),
        _ => {
            std::fs::create_dir_all(&tmp)?;
            let g = synth::temporal_citation_graph(&TemporalParams {
                first_year: 2000,
                last_year: 2006,
                initial_papers: 50,
                ..Default::default()
            });
            let (e, n) = (tmp.join("edges.tsv"), tmp.join("nodes.tsv"));
            g.save_tsv(&e, Some(&n))?;
            (e, n)
        }
    };

    let (g, report) = load_graph_files(&edges, Some(&nodes))?;
    println!(
        "{} papers, {} citations ({} duplicates, {} self-loops dropped)",
        g.node_count(),
        g.edge_count(),
        report.duplicate_edges,
        report.self_loops
    );
    if let Some((lo, hi)) = g.year_range() {
        println!("years {lo}..={hi}");
        for y in lo..=hi {
            let s = g.time_slice(y)?;
            println!("  slice {y}: {:>5} papers {:>6} citations", s.node_count(), s.edge_count());
        }
    }

    let busiest = (0..g.node_count() as u32).max_by_key(|&v| g.cits(v).len()).unwrap();
    let tok = g.token(busiest);
    println!(
        "most cited: {tok} ({} citations, {} references, {} undirected neighbors)",
        g.neighbors(tok, NeighborMode::Cits)?.len(),
        g.neighbors(tok, NeighborMode::Refs)?.len(),
        g.neighbors(tok, NeighborMode::Adj)?.len()
    );
    Ok(())
}
