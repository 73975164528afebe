//! Assign lexical tones from tonal and phonetic context. The decoder
//! maximizes the product of per-syllable factors exactly, coupling each tone
//! to both neighbors.
//!
//! Run with: cargo run --example tone_assignment

use translit::phonology::{Pronunciation, Syllable, Tone};
use translit::tones::{assign_tones, retone, train_tone_model};

fn syl(onset: &[&str], nucleus: &[&str], coda: &[&str], tone: Option<u8>) -> Syllable {
    Syllable::new(
        onset.iter().map(|s| s.to_string()).collect(),
        nucleus.iter().map(|s| s.to_string()).collect(),
        coda.iter().map(|s| s.to_string()).collect(),
        tone.map(Tone),
    )
}

fn main() {
    // Toy corpus obeying a checked-tone pattern: k codas carry tone 3 or 6,
    // open syllables vary with their neighbors.
    let corpus = vec![
        Pronunciation::new(vec![
            syl(&["g"], &["aa"], &["k"], Some(3)),
            syl(&["l"], &["i"], &["ng"], Some(4)),
        ]),
        Pronunciation::new(vec![
            syl(&["d"], &["a"], &["k"], Some(6)),
            syl(&["l"], &["i"], &["ng"], Some(4)),
        ]),
        Pronunciation::new(vec![syl(&["l"], &["i"], &[], Some(5))]),
        Pronunciation::new(vec![syl(&["d"], &["a"], &["k"], Some(6))]),
    ];
    let model = train_tone_model(&corpus, 6).unwrap();

    let toneless = Pronunciation::new(vec![
        syl(&["g"], &["aa"], &["k"], None),
        syl(&["l"], &["i"], &["ng"], None),
    ]);
    let tones = assign_tones(&toneless, &model);
    println!(
        "assigned tones: {:?}",
        tones.iter().map(|t| t.0).collect::<Vec<_>>()
    );

    // An unseen syllable backs off: no full-context match, so the open-coda
    // statistics decide (li carried tone 5).
    let partial = Pronunciation::new(vec![syl(&["b"], &["u"], &[], None)]);
    println!("backed-off context: {:?}", assign_tones(&partial, &model));

    // A coda the model never saw at any level hits the uniform floor, and
    // ties resolve to the smallest tone number.
    let unseen = Pronunciation::new(vec![syl(&["b"], &["u"], &["m"], None)]);
    println!("unseen context: {:?}", assign_tones(&unseen, &model));

    // retone() decorates a pronunciation in place.
    let toned = retone(&toneless, &model);
    for s in &toned.syllables {
        println!(
            "{}{}{} -> tone {}",
            s.onset.join(""),
            s.nucleus.join(""),
            s.coda.join(""),
            s.tone.unwrap()
        );
    }
}
