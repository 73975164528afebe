//! Parse pronunciation token streams against a language resource, inspect
//! syllable structure, and check validity.
//!
//! Run with: cargo run --example parse_pronunciation

use std::path::PathBuf;

use translit::phonology::{
    parse_pronunciation, serialize_pronunciation, structure_of, validate, LanguageResource,
    Pronunciation, Syllable, Tone,
};

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();

    // A two-syllable Jyutping pronunciation: phoneme symbols, one tone
    // numeral per syllable, "." between syllables.
    let tokens = ["g", "aa", "k", "3", ".", "l", "i", "ng", "4"];
    let pron = parse_pronunciation(&tokens, &resource).unwrap();
    println!("parsed {} syllables", pron.syllables.len());
    for (syl, structure) in pron.syllables.iter().zip(structure_of(&pron)) {
        println!(
            "  onset={:?} nucleus={:?} coda={:?} tone={} structure={}",
            syl.onset,
            syl.nucleus,
            syl.coda,
            syl.tone.unwrap(),
            structure,
        );
    }

    // Serialization puts the tone last in each syllable and round-trips.
    let rendered = serialize_pronunciation(&pron).unwrap();
    println!("serialized: {}", rendered.join(" "));
    assert_eq!(parse_pronunciation(&rendered, &resource).unwrap(), pron);

    // validate() reports every structural problem instead of failing fast.
    let broken = Pronunciation::new(vec![
        Syllable::new(
            vec!["s".into(), "n".into()], // onset cluster: not allowed here
            vec!["ei".into()],
            vec![],
            Some(Tone(2)),
        ),
        Syllable::new(vec!["l".into()], vec!["aa".into()], vec![], None), // no tone
    ]);
    println!("violations in a hand-built pronunciation:");
    for violation in validate(&broken, &resource) {
        println!("  {violation}");
    }
}
