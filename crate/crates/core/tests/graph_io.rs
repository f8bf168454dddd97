use std::fs::File;
use std::io::{BufReader, Cursor};

use citerec::embedding::{self, TrainParams};
use citerec::graph::{load_graph, load_graph_files, read_cache, write_cache, CitationGraph};
use citerec::sampling::{self, SamplingParams, Strategy, WalkCorpus};
use citerec::synth::{self, TemporalParams};

fn sample_graph() -> CitationGraph {
    synth::temporal_citation_graph(&TemporalParams {
        first_year: 2001,
        last_year: 2006,
        initial_papers: 30,
        ..TemporalParams::default()
    })
}

#[test]
fn tsv_round_trip_preserves_graph_and_indices() {
    let g = sample_graph();
    let dir = tempfile::tempdir().unwrap();
    let (e, n) = (dir.path().join("e.tsv"), dir.path().join("n.tsv"));
    g.save_tsv(&e, Some(&n)).unwrap();
    let (back, report) = load_graph_files(&e, Some(&n)).unwrap();
    assert_eq!(back, g);
    assert_eq!(report.edge_records, g.edge_count());
    for v in 0..g.node_count() as u32 {
        assert_eq!(back.token(v), g.token(v));
        assert_eq!(back.year(v), g.year(v));
    }
}

#[test]
fn binary_cache_round_trip() {
    let g = sample_graph();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    write_cache(&g, File::create(&path).unwrap()).unwrap();
    let back = read_cache(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, g);
    assert!(read_cache(Cursor::new(b"NOTAGRPH".to_vec())).is_err());
}

#[test]
fn slice_of_loaded_graph_matches_slice_of_original() {
    let g = sample_graph();
    let mut edges = Vec::new();
    let mut nodes = Vec::new();
    g.write_edges(&mut edges).unwrap();
    g.write_nodes(&mut nodes).unwrap();
    let (back, _) = load_graph(Cursor::new(edges), Some(Cursor::new(nodes))).unwrap();
    for y in 2001..=2006 {
        assert_eq!(back.time_slice(y).unwrap(), g.time_slice(y).unwrap());
    }
}

#[test]
fn corpus_and_model_files_round_trip() {
    let g = sample_graph().time_slice(2003).unwrap();
    let params = SamplingParams { walks_per_node: 2, walk_length: 6, ..SamplingParams::default() };
    let corpus = sampling::generate_corpus(&g, Strategy::Uniform, &params, 1).unwrap();
    let mut buf = Vec::new();
    corpus.write(&g, &mut buf).unwrap();
    let back = WalkCorpus::read(Cursor::new(buf), &g).unwrap();
    assert_eq!(back.lines, corpus.lines);
    assert_eq!(back.provenance.strategy, Strategy::Uniform);

    let tp = TrainParams { dim: 5, epochs: 1, ..TrainParams::default() };
    let m = embedding::train(embedding::init_model(&g, &tp).unwrap(), &corpus, &tp).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (pi, po) = (dir.path().join("m.in"), dir.path().join("m.out"));
    embedding::save_model(&m, &pi, &po).unwrap();
    let loaded = embedding::load_model(&pi, &po).unwrap();
    assert!(loaded.matches_graph(&g));
    for (a, b) in loaded.input_matrix().iter().zip(m.input_matrix()) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300));
    }
}
