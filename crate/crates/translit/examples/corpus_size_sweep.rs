//! Reproduce the shape of the corpus-size experiments: train each engine on
//! growing sub-corpora over several seeded repartitions and report mean
//! error rates per size.
//!
//! Run with: cargo run --release --example corpus_size_sweep

use std::path::PathBuf;

use translit::corpus::load_corpus;
use translit::experiment::{run_experiment, Engine, EngineSettings, ExperimentPlan};
use translit::phonology::LanguageResource;
use translit::symbolic::RuleSet;

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();
    let rules = RuleSet::load(&data.join("cantonese.rules")).unwrap();
    let corpus = load_corpus(&data.join("sample_cantonese.tsv"), &resource).unwrap();

    // Fixed shared test set of 40 entries; sub-corpora come from the rest.
    let plan = ExperimentPlan {
        sizes: vec![40, 80, 120],
        train_fraction: 0.75,
        repartitions: 3,
        seed: 42,
        test_size: Some(40),
        test_fraction: None,
        tune: false,
    };
    let engines = [Engine::Proposed, Engine::Joint, Engine::Symbolic];
    let report = run_experiment(
        &corpus,
        &plan,
        &engines,
        &resource,
        Some(&rules),
        &EngineSettings::default(),
    )
    .unwrap();

    println!("mean token error rate by engine and size:");
    println!("{:>10} {:>6} {:>8}", "engine", "size", "ter");
    for engine in engines {
        for &size in &plan.sizes {
            let ter = report.mean_rate(engine, size, "ter").unwrap();
            println!(
                "{:>10} {:>6} {:>7.2}%",
                engine.to_string(),
                size,
                ter * 100.0
            );
        }
    }
    println!("\n(the symbolic engine generated this corpus, so it scores 0)");
}
