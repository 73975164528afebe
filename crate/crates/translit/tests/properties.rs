//! Property tests over randomly generated inputs: serialization round trips,
//! formation totality, and decoder validity.

use proptest::prelude::*;

use translit::label_model::fallback_labels;
use translit::phonology::{
    parse_pronunciation, serialize_pronunciation, structure_of, validate, LanguageResource, Role,
};
use translit::pseudo::{form_pseudo_syllables, structures_of_sequence, GraphemicLabel, ALL_LABELS};

fn resource() -> LanguageResource {
    LanguageResource::builder("prop")
        .phoneme("b", &[Role::Onset])
        .unwrap()
        .phoneme("l", &[Role::Onset])
        .unwrap()
        .phoneme("n", &[Role::Onset, Role::Coda])
        .unwrap()
        .phoneme("k", &[Role::Onset, Role::Coda])
        .unwrap()
        .phoneme("aa", &[Role::Nucleus])
        .unwrap()
        .phoneme("i", &[Role::Nucleus, Role::Coda])
        .unwrap()
        .phoneme("o", &[Role::Nucleus])
        .unwrap()
        .tones(6)
        .latin_letters("AEIOUY")
        .cluster_caps(Some(1), Some(1))
        .build()
        .unwrap()
}

prop_compose! {
    /// Canonical token streams: per syllable an optional onset, one or two
    /// nucleus symbols, an optional coda, and a tone numeral last.
    fn pronunciation_tokens()(
        syllables in prop::collection::vec(
            (
                prop::option::of(prop::sample::select(vec!["b", "l", "n", "k"])),
                prop::sample::select(vec!["aa", "i", "o"]),
                prop::option::of(prop::sample::select(vec!["n", "k"])),
                1u8..=6,
            ),
            1..4,
        )
    ) -> Vec<String> {
        let mut tokens = Vec::new();
        for (idx, (onset, nucleus, coda, tone)) in syllables.iter().enumerate() {
            if idx > 0 {
                tokens.push(".".to_string());
            }
            if let Some(o) = onset {
                tokens.push(o.to_string());
            }
            tokens.push(nucleus.to_string());
            if let Some(c) = coda {
                tokens.push(c.to_string());
            }
            tokens.push(tone.to_string());
        }
        tokens
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// parse then serialize reproduces canonical token streams, and
    /// serialize then parse reproduces the parsed pronunciation.
    #[test]
    fn round_trip_identity(tokens in pronunciation_tokens()) {
        let res = resource();
        let parsed = parse_pronunciation(&tokens, &res).unwrap();
        prop_assert!(validate(&parsed, &res).is_empty());
        let rendered = serialize_pronunciation(&parsed).unwrap();
        prop_assert_eq!(&rendered, &tokens);
        prop_assert_eq!(parse_pronunciation(&rendered, &res).unwrap(), parsed);
    }

    /// Every syllable the parser accepts matches onset? nucleus coda?.
    #[test]
    fn parsed_structures_match_skeleton(tokens in pronunciation_tokens()) {
        let res = resource();
        let parsed = parse_pronunciation(&tokens, &res).unwrap();
        for s in structure_of(&parsed) {
            let roles = s.roles;
            let nucleus_at = roles.iter().position(|r| *r == Role::Nucleus);
            prop_assert!(nucleus_at.is_some());
            prop_assert!(roles.iter().filter(|r| **r == Role::Nucleus).count() == 1);
            // Onset strictly before the nucleus, coda strictly after.
            for (i, r) in roles.iter().enumerate() {
                match r {
                    Role::Onset => prop_assert!(i < nucleus_at.unwrap()),
                    Role::Coda => prop_assert!(i > nucleus_at.unwrap()),
                    Role::Nucleus => {}
                }
            }
        }
    }

    /// Formation is total: any labeling of any word either yields syllables
    /// that all match onset? nucleus coda?, or fails with a position inside
    /// the word.
    #[test]
    fn formation_is_total(
        text in "[A-Z]{1,7}",
        seed in prop::collection::vec(0usize..5, 7),
    ) {
        let res = resource();
        let word = res.classify_word(&text).unwrap();
        let labels: Vec<GraphemicLabel> =
            (0..word.len()).map(|i| ALL_LABELS[seed[i]]).collect();
        match form_pseudo_syllables(&word, &labels, &res) {
            Ok(seq) => {
                for s in structures_of_sequence(&seq) {
                    prop_assert!(s.has(Role::Nucleus));
                    prop_assert!(s.unit_count() <= 3);
                }
            }
            Err(translit::pseudo::FormationError::InvalidLabeling { position }) => {
                prop_assert!(position <= word.len());
            }
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }

    /// The rule fallback always produces a valid, non-empty formation.
    #[test]
    fn fallback_labels_always_form(text in "[A-Z]{1,10}") {
        let res = resource();
        let word = res.classify_word(&text).unwrap();
        let labels = fallback_labels(&word);
        let seq = form_pseudo_syllables(&word, &labels, &res).unwrap();
        prop_assert!(!seq.is_empty());
    }
}
