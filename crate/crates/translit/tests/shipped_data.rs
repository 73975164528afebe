//! The resources, rulesets, and plans shipped under data/ must load and
//! reproduce the documented outputs.

use std::path::PathBuf;

use translit::experiment::ExperimentPlan;
use translit::phonology::{serialize_pronunciation, validate, LanguageResource};
use translit::symbolic::{transliterate_symbolic, RuleSet};

fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(file)
}

#[test]
fn resources_load() {
    for name in ["cantonese.resource", "vietnamese.resource"] {
        let res = LanguageResource::load(&data(name)).unwrap();
        assert_eq!(res.tone_count, 6);
        assert_eq!(res.epenthetic, "@:");
        assert_eq!(res.max_onset, Some(1));
        assert_eq!(res.max_coda, Some(1));
    }
}

#[test]
fn plans_load() {
    let viet = ExperimentPlan::load(&data("vietnamese.plan")).unwrap();
    assert_eq!(viet.test_size, Some(140));
    assert_eq!(viet.repartitions, 4);
    let canto = ExperimentPlan::load(&data("cantonese.plan")).unwrap();
    assert_eq!(canto.test_fraction, Some(0.2));
    assert_eq!(canto.repartitions, 5);
}

#[test]
fn cantonese_ruleset_reproduces_documented_words() {
    let res = LanguageResource::load(&data("cantonese.resource")).unwrap();
    let rules = RuleSet::load(&data("cantonese.rules")).unwrap();
    let run = |word: &str| -> Vec<String> {
        let w = res.classify_word(word).unwrap();
        let p = transliterate_symbolic(&w, &rules, &res).unwrap();
        assert!(validate(&p, &res).is_empty(), "{word} output invalid");
        serialize_pronunciation(&p).unwrap()
    };
    assert_eq!(run("GREENLAND").join(" "), "g aa k 3 . l i ng 4 . l aa n 4");
    assert_eq!(run("BOLT").join(" "), "b o 1 . j i 5 . d a k 6");
    assert_eq!(run("FORD").join(" "), "f u k 1 . d a k 6");
    assert_eq!(
        run("ALBANIA").join(" "),
        "aa 3 . j i 5 . b aa 1 . n ei 4 . aa 3"
    );
}

#[test]
fn vietnamese_corpus_lines_load() {
    use translit::corpus::parse_corpus;
    let res = LanguageResource::load(&data("vietnamese.resource")).unwrap();
    let entries = parse_corpus(
        "DISNEYLAND\td i 2 . s @ 4 . n ej 5 . l E n 1\nMANCHESTER\tm a n 1 . c E t 5 . s @ 2 . t @ 2\n",
        &res,
    )
    .unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0].target.syllables.len(), 4);
}

#[test]
fn vietnamese_ruleset_is_total_and_valid() {
    let res = LanguageResource::load(&data("vietnamese.resource")).unwrap();
    let rules = RuleSet::load(&data("vietnamese.rules")).unwrap();
    for word in ["MANCHESTER", "DISNEYLAND", "BOLT", "XYZQ", "AEIOU", "A"] {
        let w = res.classify_word(word).unwrap();
        let p = transliterate_symbolic(&w, &rules, &res).unwrap();
        assert!(
            validate(&p, &res).is_empty(),
            "{word} -> {:?} invalid",
            serialize_pronunciation(&p)
        );
    }
}
