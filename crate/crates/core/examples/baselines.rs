//! Graph-only baselines: PaperRank and item-based collaborative filtering.

use citerec::baselines::{cf_scores, paperrank_from, PageRankParams};
use citerec::graph::CitationGraph;
use citerec::ranking::{rank_scores, SeedSet};

fn main() -> citerec::Result<()> {
    let g = CitationGraph::from_edges(
        &[
            ("u1", "x"),
            ("u1", "y"),
            ("u2", "x"),
            ("u2", "y"),
            ("u2", "z"),
            ("u3", "z"),
            ("u3", "w"),
            ("u4", "w"),
        ],
        &[],
    );
    let seeds = SeedSet::from_tokens(["x"], g.node_count(), |t| g.index_of(t))?;

    let params = PageRankParams::default();
    let mut start = vec![0.0; g.node_count()];
    start[g.require("x")? as usize] = 1.0;
    let trace = paperrank_from(&g, &seeds, &params, &start)?;
    println!(
        "paperrank: {} iterations, converged {}, last residual {:.1e}",
        trace.residuals.len(),
        trace.converged,
        trace.residuals.last().unwrap()
    );
    for (v, s) in rank_scores(&trace.scores, &seeds, 4).entries {
        println!("  {:>3} {s:.4}", g.token(v));
    }

    println!("cf:");
    let cf = cf_scores(&g, &seeds)?;
    for (v, s) in rank_scores(&cf, &seeds, 4).entries {
        println!("  {:>3} {s:.4}", g.token(v));
    }
    Ok(())
}
