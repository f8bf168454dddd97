//! The random-hide experiment on a synthetic time-stamped graph: slice by
//! year, train per slice, hide references, report recall@k.

use citerec::embedding::{Objective, TrainParams};
use citerec::eval::{plot_series, prepare_slices, run_ratio_sweep, ExperimentConfig};
use citerec::sampling::{SamplingParams, Strategy};
use citerec::synth::{temporal_citation_graph, TemporalParams};

fn main() -> citerec::Result<()> {
    let g = temporal_citation_graph(&TemporalParams {
        first_year: 2000,
        last_year: 2008,
        initial_papers: 120,
        growth: 1.15,
        topics: 6,
        subtopics_per_topic: 4,
        refs: (5, 30),
        ..Default::default()
    });
    println!("{} papers, {} citations", g.node_count(), g.edge_count());

    let cfg = ExperimentConfig {
        query_count: 100,
        ref_range: (10, 200),
        year_range: (2007, 2008),
        ks: vec![10, 25, 50],
        methods: ["cocit+citmod", "cocit+simavg", "uniform+citmod", "paperrank", "cf", "random"]
            .iter()
            .map(|m| m.parse())
            .collect::<citerec::Result<_>>()?,
        ..Default::default()
    };
    let sampling = SamplingParams { walks_per_node: 5, walk_length: 40, ..Default::default() };
    let train = TrainParams {
        dim: 32,
        window: 5,
        epochs: 5,
        objective: Objective::NegativeSampling { negatives: 5 },
        ..Default::default()
    };
    let slices = prepare_slices(
        &g,
        &cfg.slice_years(),
        &[Strategy::CoCitation, Strategy::Uniform],
        &sampling,
        &train,
        1,
        None,
    )?;
    let report = run_ratio_sweep(&g, &slices, &cfg, &[0.1, 0.5, 0.9])?;
    report.write_csv(std::io::stdout().lock())?;
    let (by_k, _) = plot_series(&report.rows);
    println!("\n{by_k}");
    Ok(())
}
