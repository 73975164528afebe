//! Deterministic rule-based transliteration: cluster segmentation, role
//! assignment with epenthesis and liquid deletion, vowel splitting, then
//! first-match grapheme-to-phoneme and tone rules.
//!
//! Run with: cargo run --example symbolic_rules

use std::path::PathBuf;

use translit::phonology::{serialize_pronunciation, LanguageResource};
use translit::symbolic::{
    assign_roles, postprocess_vowels, segment_clusters, transliterate_symbolic, RuleSet,
};

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();
    let rules = RuleSet::load(&data.join("cantonese.rules")).unwrap();

    for word in ["ALBANIA", "GREENLAND", "BOLT", "FORD"] {
        let w = resource.classify_word(word).unwrap();
        let segments = segment_clusters(&w);
        let seg_text: Vec<String> = segments.iter().map(|s| s.to_string()).collect();
        let roles = postprocess_vowels(assign_roles(&segments, &rules), &rules);
        let role_text: Vec<String> = roles.iter().map(|s| s.to_string()).collect();
        let pron = transliterate_symbolic(&w, &rules, &resource).unwrap();
        println!("{word}");
        println!("  segments: {}", seg_text.join(" "));
        println!("  roles:    {}", role_text.join(" "));
        println!(
            "  output:   {}",
            serialize_pronunciation(&pron).unwrap().join(" ")
        );
    }
}
