//! The joint grapheme-phoneme n-gram baseline, including the failure mode
//! that motivates phonological constraints: with sparse training data its
//! outputs stop being pronounceable.
//!
//! Run with: cargo run --example joint_baseline

use std::path::PathBuf;

use translit::corpus::load_corpus;
use translit::joint::{decode_joint, derive_cosegments, train_joint, SegmentCaps};
use translit::phonology::{parse_pronunciation, LanguageResource};

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();
    let corpus = load_corpus(&data.join("sample_cantonese.tsv"), &resource).unwrap();

    // A pair is segmented into cosegments carrying letters and tokens
    // together; alignment falls out of the segmentation.
    let entry = &corpus[0];
    let segmentation =
        derive_cosegments(&entry.word, &entry.target_tokens, SegmentCaps::default()).unwrap();
    let rendered: Vec<String> = segmentation.iter().map(|c| format!("[{c}]")).collect();
    println!("{} cosegments: {}", entry.word, rendered.join(" "));

    let pairs: Vec<_> = corpus
        .iter()
        .map(|e| (e.word.clone(), e.target_tokens.clone()))
        .collect();
    let (model, skipped) = train_joint(&pairs, 2, SegmentCaps::default()).unwrap();
    println!(
        "trained order-{} model, vocabulary {} cosegments, {} pairs skipped",
        model.order(),
        model.vocabulary().len(),
        skipped.len()
    );

    // No phonological checks anywhere: outputs for unseen words often break
    // syllable structure, which the parser then reports.
    for word in ["BOLT", "KODAK", "VIVALDI"] {
        let w = resource.classify_word(word).unwrap();
        let tokens = decode_joint(&w, &model).unwrap();
        let verdict = match parse_pronunciation(&tokens, &resource) {
            Ok(_) => "valid".to_string(),
            Err(e) => format!("INVALID ({e})"),
        };
        println!("{word:8} -> {}  [{verdict}]", tokens.join(" "));
    }
}
