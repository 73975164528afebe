//! Score hypothesis transliterations against references: token and string
//! error rates, syllable error rate, and per-unit onset/nucleus/coda/tone
//! rates over structure-matched syllables.
//!
//! Run with: cargo run --example score_outputs

use std::path::PathBuf;

use translit::metrics::{align, score_pairs, EditOp, TokenPair};
use translit::phonology::LanguageResource;

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(|t| t.to_string()).collect()
}

fn main() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let resource = LanguageResource::load(&data.join("cantonese.resource")).unwrap();

    // Alignment shows exactly where a hypothesis diverges.
    let reference = toks("g aa k 3 . l i ng 4");
    let hypothesis = toks("g aa 3 . l i n 4");
    let alignment = align(&reference, &hypothesis);
    println!("edit cost {}:", alignment.cost);
    for op in &alignment.ops {
        match op {
            EditOp::Match { reference: r, .. } => println!("  match  {}", reference[*r]),
            EditOp::Substitution {
                reference: r,
                hypothesis: h,
            } => {
                println!("  sub    {} -> {}", reference[*r], hypothesis[*h])
            }
            EditOp::Deletion { reference: r } => println!("  del    {}", reference[*r]),
            EditOp::Insertion { hypothesis: h } => println!("  ins    {}", hypothesis[*h]),
        }
    }

    // Full report over a small test set; one syllable-level mistake in the
    // second pair, a tone mistake in the third.
    let pairs: Vec<TokenPair> = vec![
        (toks("b o 1 . j i 5"), toks("b o 1 . j i 5")),
        (toks("f u k 1 . d a k 6"), toks("f u k 1 . t a k 6")),
        (toks("m aa 3"), toks("m aa 4")),
    ];
    let report = score_pairs(&pairs, &resource).unwrap();
    println!("\n{}", report.summary_table());
    print!("{}", report.to_tsv());
}
