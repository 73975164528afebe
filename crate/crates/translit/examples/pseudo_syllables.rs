//! Group a foreign word's letters into pseudo-syllables with graphemic
//! labels, and recover ground-truth labelings from a training pair.
//!
//! Run with: cargo run --example pseudo_syllables

use std::path::PathBuf;

use translit::phonology::{parse_pronunciation, LanguageResource};
use translit::pseudo::{derive_ground_truth_labels, form_pseudo_syllables, GraphemicLabel};

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("vietnamese.resource")).unwrap();

    // Labels per letter: O(nset), N(ucleus), Cd (coda), ON (onset plus an
    // inserted epenthetic nucleus), X (letter dropped).
    let word = resource.classify_word("DISNEYLAND").unwrap();
    let labels: Vec<GraphemicLabel> = ["O", "N", "ON", "O", "N", "N", "O", "N", "Cd", "X"]
        .iter()
        .map(|c| GraphemicLabel::from_code(c).unwrap())
        .collect();
    let syllables = form_pseudo_syllables(&word, &labels, &resource).unwrap();
    let rendered: Vec<String> = syllables.iter().map(|s| s.to_string()).collect();
    println!("{word} + labels -> {}", rendered.join(" "));

    // Structurally impossible labelings are rejected with the offending
    // position: two onsets in a row leave the first syllable without a
    // nucleus.
    let bad: Vec<GraphemicLabel> = ["O", "O", "N", "N", "N", "N", "N", "N", "N", "N"]
        .iter()
        .map(|c| GraphemicLabel::from_code(c).unwrap())
        .collect();
    println!(
        "double onset: {:?}",
        form_pseudo_syllables(&word, &bad, &resource)
    );

    // Given a reference pronunciation, search all labelings whose syllable
    // structures reproduce it. The first result keeps the most letters with
    // the fewest insertions.
    let tokens = [
        "d", "i", "2", ".", "s", "@", "4", ".", "n", "ej", "5", ".", "l", "a", "n", "1",
    ];
    let target = parse_pronunciation(&tokens, &resource).unwrap();
    let all = derive_ground_truth_labels(&word, &target, &resource).unwrap();
    println!("{} valid labelings; best:", all.len());
    let codes: Vec<&str> = all[0].iter().map(|l| l.code()).collect();
    println!("  {}", codes.join(","));
}
