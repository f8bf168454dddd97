//! Uniform and second-order biased walks, and how p and q shape them.

use citerec::graph::CitationGraph;
use citerec::rng;
use citerec::sampling::{biased_walk, generate_corpus, random_walk, SamplingParams, Strategy};

fn main() -> citerec::Result<()> {
    // two triangles joined by a bridge c - d
    let g = CitationGraph::from_edges(
        &[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "d")],
        &[],
    );
    let name = |w: &[u32]| w.iter().map(|&v| g.token(v)).collect::<Vec<_>>().join(" ");
    let a = g.require("a")?;

    let mut r = rng::stream(7, &[1]);
    println!("uniform      {}", name(&random_walk(&g, a, 12, &mut r)));
    for (p, q) in [(4.0, 0.25), (0.25, 4.0)] {
        let params = SamplingParams { walk_length: 12, p, q, ..Default::default() };
        let mut r = rng::stream(7, &[1]);
        println!("p={p:<4} q={q:<4} {}", name(&biased_walk(&g, a, &params, &mut r)));
    }

    // low q pushes walks outward: count bridge crossings per corpus
    for q in [0.25, 1.0, 4.0] {
        let params = SamplingParams { walks_per_node: 50, walk_length: 40, q, ..Default::default() };
        let corpus = generate_corpus(&g, Strategy::Biased, &params, 1)?;
        let (c, d) = (g.require("c")?, g.require("d")?);
        let crossings: usize = corpus
            .lines
            .iter()
            .map(|w| w.windows(2).filter(|s| (s[0] == c && s[1] == d) || (s[0] == d && s[1] == c)).count())
            .sum();
        println!("q={q:<4}: {crossings} bridge crossings in {} walks", corpus.len());
    }
    Ok(())
}
