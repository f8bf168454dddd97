//! Rank recommendations for a seed set with every method.

use citerec::baselines::PageRankParams;
use citerec::embedding::{init_model, train, TrainParams};
use citerec::ranking::{recommend, Method, RankInputs, SeedSet};
use citerec::sampling::cocitation_corpus;
use citerec::synth::{planted_cocitation, PlantedParams};

fn main() -> citerec::Result<()> {
    let pg = planted_cocitation(&PlantedParams::default());
    let g = &pg.graph;
    let params = TrainParams { dim: 32, ..Default::default() };
    let model = train(init_model(g, &params)?, &cocitation_corpus(g, 10, 1)?, &params)?;

    let seed_tokens = ["c2t0003", "c2t0017", "c2t0031"];
    let seeds = SeedSet::from_tokens(seed_tokens, g.node_count(), |t| g.index_of(t))?;
    let inputs = RankInputs { model: Some(&model), graph: Some(g), pagerank: PageRankParams::default() };
    println!("seeds: {}", seed_tokens.join(", "));
    for method in Method::ALL {
        let ranked = recommend(method, &inputs, &seeds, 8)?;
        let same = ranked.ids().filter(|&v| pg.community[v as usize] == 2).count();
        let top: Vec<&str> = ranked.ids().take(4).map(|v| g.token(v)).collect();
        println!("{:>9}: {same}/8 in the seeds' community; top {}", method.as_str(), top.join(" "));
    }

    let ranked = recommend(Method::CitMod, &inputs, &seeds, 5)?;
    ranked.write_csv(g.tokens(), std::io::stdout().lock())?;
    Ok(())
}
