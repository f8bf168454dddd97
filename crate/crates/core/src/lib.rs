//! Citation recommendation from citation-graph embeddings.
//!
//! The pipeline: load a [`graph::CitationGraph`], build a corpus of node
//! sequences with one of the [`sampling`] strategies (uniform walks,
//! second-order biased walks, co-citation reference lists), train CBOW
//! embeddings with [`embedding`], then rank candidates for a seed set with
//! [`ranking`] or the graph [`baselines`]. [`eval`] runs the random-hide
//! recall@k experiment over year-sliced graphs.
//!
//! ```
//! use citerec::graph::CitationGraph;
//! use citerec::ranking::{recommend, Method, RankInputs, SeedSet};
//!
//! let g = CitationGraph::from_edges(&[("a", "x"), ("a", "y"), ("b", "x"), ("b", "y"), ("c", "z")], &[]);
//! let seeds = SeedSet::new(vec![g.index_of("x").unwrap()], g.node_count()).unwrap();
//! let inputs = RankInputs { graph: Some(&g), ..Default::default() };
//! let top = recommend(Method::Cf, &inputs, &seeds, 1).unwrap();
//! assert_eq!(g.token(top.entries[0].0), "y");
//! ```

pub mod baselines;
pub mod cli;
pub mod config;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ranking;
pub mod rng;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{CitationGraph, NodeIdx};
