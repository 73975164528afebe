//! Models persist as versioned plain text with counts verbatim: retraining
//! with the same inputs rewrites the same bytes, and diffs stay readable.
//!
//! Run with: cargo run --example model_files

use std::path::PathBuf;

use translit::corpus::load_corpus;
use translit::model_io::{load_model, save_model, StoredModel};
use translit::phonology::LanguageResource;
use translit::pipeline::{train_pipeline, PipelineConfig};

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();
    let corpus = load_corpus(&data.join("sample_cantonese.tsv"), &resource).unwrap();

    let train = || train_pipeline(&corpus, &resource, &PipelineConfig::default()).unwrap();
    let text_a = save_model(&StoredModel::Pipeline(Box::new(train())));
    let text_b = save_model(&StoredModel::Pipeline(Box::new(train())));
    assert_eq!(text_a, text_b, "same inputs, same bytes");
    println!("model file is {} bytes; first lines:", text_a.len());
    for line in text_a.lines().take(12) {
        println!("  {line}");
    }

    let reloaded = load_model(&text_a).unwrap();
    assert_eq!(save_model(&reloaded), text_a);
    println!("round trip reproduces the file byte for byte");
}
