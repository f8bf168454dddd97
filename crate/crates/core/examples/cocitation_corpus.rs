//! Build a co-citation corpus: every paper's reference list, shuffled, as one line.

use citerec::graph::CitationGraph;
use citerec::sampling::cocitation_corpus;

fn main() -> citerec::Result<()> {
    let g = CitationGraph::from_edges(
        &[("p1", "a"), ("p1", "b"), ("p1", "c"), ("p2", "b"), ("p2", "c"), ("p3", "d")],
        &[],
    );
    let corpus = cocitation_corpus(&g, 3, 42)?;
    let mut out = Vec::new();
    corpus.write(&g, &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));

    let freq = corpus.frequencies(g.node_count());
    for v in 0..g.node_count() as u32 {
        println!("{:>3} appears {} times", g.token(v), freq[v as usize]);
    }
    Ok(())
}
