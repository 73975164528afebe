//! Train the full three-step pipeline on a corpus and transliterate new
//! words. Every output is guaranteed to satisfy the target phonology.
//!
//! Run with: cargo run --example train_and_transliterate

use std::path::PathBuf;

use translit::corpus::load_corpus;
use translit::phonology::{serialize_pronunciation, validate, LanguageResource};
use translit::pipeline::{train_pipeline, transliterate_proposed, PipelineConfig};

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();
    let corpus = load_corpus(&data.join("sample_cantonese.tsv"), &resource).unwrap();
    println!("training on {} entries", corpus.len());

    let config = PipelineConfig::default();
    let model = train_pipeline(&corpus, &resource, &config).unwrap();
    if !model.skipped.is_empty() {
        println!(
            "{} entries had no explaining labeling and were skipped",
            model.skipped.len()
        );
    }

    for word in ["BOLT", "NEWTON", "KODAK", "VIVALDI", "STRUDEL"] {
        let w = resource.classify_word(word).unwrap();
        let pron = transliterate_proposed(&w, None, &model, &resource).unwrap();
        assert!(validate(&pron, &resource).is_empty());
        let tokens = serialize_pronunciation(&pron).unwrap();
        println!("{word:10} -> {}", tokens.join(" "));
    }
}
