//! Train CBOW embeddings on a co-citation corpus and look at nearest neighbors.

use citerec::embedding::{init_model, save_model, train_with_history, Objective, TrainParams};
use citerec::ranking::cosine;
use citerec::sampling::cocitation_corpus;
use citerec::synth::{planted_cocitation, PlantedParams};

fn main() -> citerec::Result<()> {
    let pg = planted_cocitation(&PlantedParams::default());
    let g = &pg.graph;
    let corpus = cocitation_corpus(g, 10, 1)?;
    println!("{} papers, {} corpus lines", g.node_count(), corpus.len());

    for objective in [Objective::ExactSoftmax, Objective::NegativeSampling { negatives: 5 }] {
        let params = TrainParams { dim: 32, epochs: 5, objective, ..Default::default() };
        let out = train_with_history(init_model(g, &params)?, &corpus, &params)?;
        let losses: Vec<String> = out.epoch_loss.iter().map(|l| format!("{l:.3}")).collect();
        println!("{objective:?}: loss per epoch [{}]", losses.join(", "));

        let m = &out.model;
        let probe = pg.targets[0][0];
        let mut near: Vec<(f64, u32)> = pg
            .targets
            .iter()
            .flatten()
            .filter(|&&w| w != probe)
            .map(|&w| (cosine(m.input_row(probe), m.input_row(w)), w))
            .collect();
        near.sort_by(|a, b| b.0.total_cmp(&a.0));
        let names: Vec<&str> = near[..5].iter().map(|&(_, w)| g.token(w)).collect();
        println!("  nearest to {}: {}", g.token(probe), names.join(" "));

        if matches!(objective, Objective::ExactSoftmax) {
            let dir = std::env::temp_dir();
            save_model(m, &dir.join("citerec.in.txt"), &dir.join("citerec.out.txt"))?;
            println!("  saved to {}", dir.join("citerec.{in,out}.txt").display());
        }
    }
    Ok(())
}
