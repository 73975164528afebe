//! Smoothed n-gram model over graphemic labels, and the constrained beam
//! decoder that picks the most likely structurally valid labeling.
//!
//! Each position is scored from its letter window `f_{i-n/2}..f_{i+n/2}`.
//! To fight sparsity the window is smeared: the `t` leftmost and `k`
//! rightmost letters are replaced by their consonant/vowel class, every
//! combination contributing with weight `lambda^(k+t)`. Beyond the full
//! smear the window is shortened symmetrically down to the bare center
//! letter and finally its class, continuing the same geometric decay, so
//! weights strictly decrease as contexts get more generic.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::phonology::{GraphemeClass, LanguageResource, SourceWord};
use crate::pseudo::{GraphemicLabel, LabelSequence, StructureState, ALL_LABELS};

/// One position of a scoring window before smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowToken {
    Letter { symbol: char, class: GraphemeClass },
    Boundary,
}

const BOUNDARY_KEY: &str = "<#>";

fn class_key(class: GraphemeClass) -> &'static str {
    match class {
        GraphemeClass::Consonant => "<C>",
        GraphemeClass::Vowel => "<V>",
    }
}

/// The letter window centered on position `i`, padded with boundary tokens.
pub fn window_at(word: &SourceWord, position: usize, window: usize) -> Vec<WindowToken> {
    let half = (window / 2) as isize;
    let center = position as isize;
    (center - half..=center + half)
        .map(|j| {
            if j < 0 || j >= word.len() as isize {
                WindowToken::Boundary
            } else {
                let g = word.graphemes()[j as usize];
                WindowToken::Letter {
                    symbol: g.symbol,
                    class: g.class,
                }
            }
        })
        .collect()
}

/// All smoothed variants of a window, with the decay exponent of each.
///
/// Grid variants replace the `t` leftmost / `k` rightmost positions by their
/// class (boundary tokens are never smoothed) at exponent `k + t`; the
/// back-off chain then shortens the window symmetrically one position per
/// side down to the bare center and finally the center's class, at exponents
/// continuing past `n`. Duplicates keep their lowest exponent.
pub fn generate_smoothed_contexts(window: &[WindowToken]) -> Vec<(String, u32)> {
    assert!(window.len() % 2 == 1, "window must have odd length");
    let half = window.len() / 2;
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    let mut out = Vec::new();
    let mut push = |key: String, exponent: u32, out: &mut Vec<(String, u32)>| {
        if seen.insert(key.clone(), ()).is_none() {
            out.push((key, exponent));
        }
    };
    for level in 0..=(2 * half) as u32 {
        for t in 0..=level.min(half as u32) {
            let k = level - t;
            if k > half as u32 {
                continue;
            }
            let key = encode_grid_variant(window, t as usize, k as usize);
            push(key, level, &mut out);
        }
    }
    // Shortening back-offs: half-width half-1 .. 0, then the center's class.
    let n = (2 * half) as u32;
    let mut exponent = n;
    for width in (0..half).rev() {
        exponent += 1;
        let slice = &window[half - width..=half + width];
        let key = slice
            .iter()
            .map(encode_literal)
            .collect::<Vec<_>>()
            .join(" ");
        push(key, exponent, &mut out);
    }
    exponent += 1;
    if let WindowToken::Letter { class, .. } = window[half] {
        push(class_key(class).to_string(), exponent, &mut out);
    }
    out
}

fn encode_literal(token: &WindowToken) -> String {
    match token {
        WindowToken::Letter { symbol, .. } => symbol.to_string(),
        WindowToken::Boundary => BOUNDARY_KEY.to_string(),
    }
}

fn encode_grid_variant(window: &[WindowToken], t: usize, k: usize) -> String {
    let len = window.len();
    window
        .iter()
        .enumerate()
        .map(|(j, token)| match token {
            WindowToken::Boundary => BOUNDARY_KEY.to_string(),
            WindowToken::Letter { symbol, class } => {
                if j < t || j >= len - k {
                    class_key(*class).to_string()
                } else {
                    symbol.to_string()
                }
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn label_index(label: GraphemicLabel) -> usize {
    match label {
        GraphemicLabel::Onset => 0,
        GraphemicLabel::Nucleus => 1,
        GraphemicLabel::Coda => 2,
        GraphemicLabel::OnsetEpenthetic => 3,
        GraphemicLabel::Excluded => 4,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContextCounts {
    pub per_label: [u64; 5],
}

impl ContextCounts {
    pub fn total(&self) -> u64 {
        self.per_label.iter().sum()
    }
}

/// Counts of (smoothed context, label) observations plus the decay
/// configuration, immutable once trained.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedNgramLabelModel {
    window: usize,
    lambda: f64,
    counts: BTreeMap<String, ContextCounts>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("window must be an even number, got {0}")]
    OddWindow(usize),
    #[error("lambda must lie in (0, 1), got {0}")]
    BadLambda(String),
    #[error("word `{word}` has {labels} labels for {letters} letters")]
    LengthMismatch {
        word: String,
        labels: usize,
        letters: usize,
    },
}

impl SmoothedNgramLabelModel {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `lambda^exponent` by left-to-right multiplication, so the value is
    /// identical across build profiles (powi lowers differently when
    /// constant-folded).
    pub fn weight(&self, exponent: u32) -> f64 {
        let mut w = 1.0;
        for _ in 0..exponent {
            w *= self.lambda;
        }
        w
    }

    pub fn context_counts(&self) -> impl Iterator<Item = (&str, &ContextCounts)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Rebuild a model from persisted counts.
    pub fn from_parts(
        window: usize,
        lambda: f64,
        counts: BTreeMap<String, ContextCounts>,
    ) -> Result<Self, LabelModelError> {
        check_config(window, lambda)?;
        Ok(SmoothedNgramLabelModel {
            window,
            lambda,
            counts,
        })
    }

    /// Weighted back-off score `q(label)` for one position: the sum over all
    /// smoothed context variants of `weight * relative frequency`, unseen
    /// contexts contributing nothing. When every variant is unseen the score
    /// falls back to the uniform `1/5` for every label.
    pub fn score_label(&self, word: &SourceWord, position: usize, label: GraphemicLabel) -> f64 {
        self.score_all(word, position)[label_index(label)]
    }

    pub fn score_all(&self, word: &SourceWord, position: usize) -> [f64; 5] {
        let window = window_at(word, position, self.window);
        let variants = generate_smoothed_contexts(&window);
        let mut scores = [0.0f64; 5];
        let mut any_seen = false;
        for (key, exponent) in &variants {
            if let Some(counts) = self.counts.get(key) {
                let total = counts.total();
                if total == 0 {
                    continue;
                }
                any_seen = true;
                let w = self.weight(*exponent);
                for (score, count) in scores.iter_mut().zip(counts.per_label) {
                    *score += w * (count as f64 / total as f64);
                }
            }
        }
        if !any_seen {
            scores = [1.0 / 5.0; 5];
        }
        scores
    }
}

fn check_config(window: usize, lambda: f64) -> Result<(), LabelModelError> {
    if !window.is_multiple_of(2) {
        return Err(LabelModelError::OddWindow(window));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(LabelModelError::BadLambda(lambda.to_string()));
    }
    Ok(())
}

/// Accumulate context/label counts over a labeled corpus.
pub fn train_label_model(
    corpus: &[(SourceWord, LabelSequence)],
    window: usize,
    lambda: f64,
) -> Result<SmoothedNgramLabelModel, LabelModelError> {
    check_config(window, lambda)?;
    if corpus.is_empty() {
        return Err(LabelModelError::EmptyCorpus);
    }
    let mut counts: BTreeMap<String, ContextCounts> = BTreeMap::new();
    for (word, labels) in corpus {
        if labels.len() != word.len() {
            return Err(LabelModelError::LengthMismatch {
                word: word.text(),
                labels: labels.len(),
                letters: word.len(),
            });
        }
        for (position, label) in labels.iter().enumerate() {
            let win = window_at(word, position, window);
            for (key, _) in generate_smoothed_contexts(&win) {
                counts.entry(key).or_default().per_label[label_index(*label)] += 1;
            }
        }
    }
    Ok(SmoothedNgramLabelModel {
        window,
        lambda,
        counts,
    })
}

/// Deterministic rule labeling used when the beam is left without a single
/// structurally valid hypothesis: vowels become nuclei, a consonant right
/// before a vowel becomes an onset, a word-final consonant right after a
/// vowel becomes a coda, and every other consonant epenthesizes.
pub fn fallback_labels(word: &SourceWord) -> LabelSequence {
    let graphemes = word.graphemes();
    graphemes
        .iter()
        .enumerate()
        .map(|(i, g)| {
            if g.class == GraphemeClass::Vowel {
                GraphemicLabel::Nucleus
            } else if graphemes
                .get(i + 1)
                .is_some_and(|n| n.class == GraphemeClass::Vowel)
            {
                GraphemicLabel::Onset
            } else if i + 1 == graphemes.len()
                && i > 0
                && graphemes[i - 1].class == GraphemeClass::Vowel
            {
                GraphemicLabel::Coda
            } else {
                GraphemicLabel::OnsetEpenthetic
            }
        })
        .collect()
}

#[derive(Clone)]
struct Hypothesis {
    labels: LabelSequence,
    state: StructureState,
    score: f64,
}

/// Beam-search the most likely label sequence whose formation is valid.
///
/// Hypotheses that break syllable structure are pruned as they are extended,
/// so the winner always forms pseudo-syllables. Ties are broken toward the
/// sequence that is smallest in label order at the earliest position. With a
/// beam at least `5^M` wide nothing is ever pruned and the result is the
/// exact constrained argmax. Returns the deterministic fallback labeling if
/// no hypothesis survives.
pub fn decode_labels(
    word: &SourceWord,
    model: &SmoothedNgramLabelModel,
    _resource: &LanguageResource,
    beam_width: usize,
) -> LabelSequence {
    let beam_width = beam_width.max(1);
    let mut beam = vec![Hypothesis {
        labels: Vec::new(),
        state: StructureState::new(),
        score: 0.0,
    }];
    for position in 0..word.len() {
        let scores = model.score_all(word, position);
        let mut next: Vec<Hypothesis> = Vec::with_capacity(beam.len() * 5);
        for hyp in &beam {
            for label in ALL_LABELS {
                let mut state = hyp.state;
                if state.step(label, None).is_err() {
                    continue;
                }
                let q = scores[label_index(label)];
                let mut labels = hyp.labels.clone();
                labels.push(label);
                next.push(Hypothesis {
                    labels,
                    state,
                    score: hyp.score + q.ln(),
                });
            }
        }
        next.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap()
                .then_with(|| a.labels.cmp(&b.labels))
        });
        next.truncate(beam_width);
        if next.is_empty() {
            return fallback_labels(word);
        }
        beam = next;
    }
    let mut finished: Vec<(f64, LabelSequence)> = beam
        .into_iter()
        .filter_map(|hyp| {
            let count = hyp.state.finish(None).ok()?;
            if count == 0 {
                return None;
            }
            Some((hyp.score, hyp.labels))
        })
        .collect();
    finished.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    match finished.into_iter().next() {
        Some((_, labels)) => labels,
        None => fallback_labels(word),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::{LanguageResource, Role};
    use crate::pseudo::form_pseudo_syllables;

    fn resource() -> LanguageResource {
        LanguageResource::builder("test")
            .phoneme("x", &[Role::Onset])
            .unwrap()
            .phoneme("a", &[Role::Nucleus])
            .unwrap()
            .tones(6)
            .latin_letters("AEIOUY")
            .build()
            .unwrap()
    }

    fn word(res: &LanguageResource, text: &str) -> SourceWord {
        res.classify_word(text).unwrap()
    }

    fn labels(codes: &[&str]) -> LabelSequence {
        codes
            .iter()
            .map(|c| GraphemicLabel::from_code(c).unwrap())
            .collect()
    }

    fn tokens_of(chars: &str) -> Vec<WindowToken> {
        chars
            .chars()
            .map(|c| match c {
                '#' => WindowToken::Boundary,
                c if "AEIOUY".contains(c) => WindowToken::Letter {
                    symbol: c,
                    class: GraphemeClass::Vowel,
                },
                c => WindowToken::Letter {
                    symbol: c,
                    class: GraphemeClass::Consonant,
                },
            })
            .collect()
    }

    #[test]
    fn trigram_variants_match_worked_set() {
        let variants = generate_smoothed_contexts(&tokens_of("BES"));
        let keys: Vec<&str> = variants.iter().map(|(k, _)| k.as_str()).collect();
        assert!(keys.contains(&"B E S"));
        assert!(keys.contains(&"<C> E S"));
        assert!(keys.contains(&"B E <C>"));
        assert!(keys.contains(&"<C> E <C>"));
        assert!(keys.contains(&"E"));
        assert!(keys.contains(&"<V>"));
        // literal window sits at exponent 0, higher exponents are strictly
        // more generic
        assert_eq!(variants[0], ("B E S".to_string(), 0));
        assert_eq!(variants.last().unwrap(), &("<V>".to_string(), 4));
    }

    #[test]
    fn variant_count_matches_direct_enumeration_for_boundary_free_windows() {
        // Oracle: distinct (k, t) grid variants plus the shortening chain.
        for (window, expected) in [("BES", 4 + 2), ("XABES", 9 + 3)] {
            let variants = generate_smoothed_contexts(&tokens_of(window));
            assert_eq!(variants.len(), expected, "window {window}");
        }
    }

    #[test]
    fn boundary_positions_are_never_smoothed() {
        let variants = generate_smoothed_contexts(&tokens_of("#BA"));
        let keys: Vec<&str> = variants.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, vec!["<#> B A", "<#> B <V>", "B", "<C>"]);
    }

    #[test]
    fn weights_strictly_decrease_with_exponent() {
        let model = train_label_model(&[(word(&resource(), "A"), labels(&["N"]))], 4, 0.4).unwrap();
        let max_exponent = 4 + 4 / 2 + 1;
        for e in 0..max_exponent {
            assert!(
                model.weight(e) > model.weight(e + 1),
                "weight at {e} not above {}",
                e + 1
            );
        }
    }

    #[test]
    fn hand_computed_scores_on_tiny_corpus() {
        let res = resource();
        let corpus = vec![(word(&res, "BA"), labels(&["O", "N"]))];
        let model = train_label_model(&corpus, 2, 0.4).unwrap();

        // Position 0 of "BA": variants (# B A), (# B <V>), (B), (<C>), all
        // seen exactly once with label O.
        let q_onset = model.score_label(&word(&res, "BA"), 0, GraphemicLabel::Onset);
        let expected = 1.0 + 0.4 + 0.4 * 0.4 * 0.4 + 0.4 * 0.4 * 0.4 * 0.4;
        assert_eq!(q_onset, expected);
        assert_eq!(
            model.score_label(&word(&res, "BA"), 0, GraphemicLabel::Nucleus),
            0.0
        );

        // "DA": only the bare class context <C> is shared with training.
        let q = model.score_label(&word(&res, "DA"), 0, GraphemicLabel::Onset);
        assert_eq!(q, 0.4 * 0.4 * 0.4 * 0.4);

        // A consonant-only word shares no context at all: uniform floor.
        let scores = train_label_model(&[(word(&res, "A"), labels(&["N"]))], 2, 0.4)
            .unwrap()
            .score_all(&word(&res, "B"), 0);
        assert_eq!(scores, [0.2; 5]);
    }

    #[test]
    fn observed_label_outscores_unobserved() {
        let res = resource();
        let model = train_label_model(&[(word(&res, "A"), labels(&["N"]))], 4, 0.4).unwrap();
        let q_n = model.score_label(&word(&res, "A"), 0, GraphemicLabel::Nucleus);
        let q_o = model.score_label(&word(&res, "A"), 0, GraphemicLabel::Onset);
        assert!(q_n > q_o);
    }

    #[test]
    fn training_is_order_independent() {
        let res = resource();
        let a = (word(&res, "BA"), labels(&["O", "N"]));
        let b = (word(&res, "AB"), labels(&["N", "Cd"]));
        let m1 = train_label_model(&[a.clone(), b.clone()], 2, 0.4).unwrap();
        let m2 = train_label_model(&[b, a], 2, 0.4).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert_eq!(
            train_label_model(&[], 2, 0.4).unwrap_err(),
            LabelModelError::EmptyCorpus
        );
    }

    #[test]
    fn decode_memorizes_singleton_corpus() {
        let res = resource();
        let train = labels(&["O", "N", "ON", "O", "N", "N", "O", "N", "Cd", "X"]);
        let model =
            train_label_model(&[(word(&res, "DISNEYLAND"), train.clone())], 4, 0.4).unwrap();
        let decoded = decode_labels(&word(&res, "DISNEYLAND"), &model, &res, 10);
        assert_eq!(decoded, train);
    }

    #[test]
    fn decoded_labels_always_form_valid_syllables() {
        let res = resource();
        let model = train_label_model(
            &[
                (word(&res, "BA"), labels(&["O", "N"])),
                (word(&res, "AB"), labels(&["N", "Cd"])),
            ],
            2,
            0.4,
        )
        .unwrap();
        for text in ["B", "BBBB", "ABBA", "YYY", "BAB", "A"] {
            let w = word(&res, text);
            let decoded = decode_labels(&w, &model, &res, 5);
            let formed = form_pseudo_syllables(&w, &decoded, &res);
            assert!(formed.is_ok(), "decode of {text} formed invalid syllables");
            assert!(!formed.unwrap().is_empty());
        }
    }

    /// Exhaustive oracle: score every valid labeling with the same per
    /// position scores and pick the best by (score, label order).
    fn exhaustive_best(
        w: &SourceWord,
        model: &SmoothedNgramLabelModel,
        res: &LanguageResource,
    ) -> LabelSequence {
        let m = w.len();
        let mut best: Option<(f64, LabelSequence)> = None;
        for mut code in 0..5usize.pow(m as u32) {
            let mut labels = Vec::with_capacity(m);
            for _ in 0..m {
                labels.push(ALL_LABELS[code % 5]);
                code /= 5;
            }
            match form_pseudo_syllables(w, &labels, res) {
                Ok(seq) if !seq.is_empty() => {}
                _ => continue,
            }
            let mut score = 0.0;
            for (i, l) in labels.iter().enumerate() {
                score += model.score_label(w, i, *l).ln();
            }
            let better = match &best {
                None => true,
                Some((bs, bl)) => score > *bs || (score == *bs && labels < *bl),
            };
            if better {
                best = Some((score, labels));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn full_beam_equals_exhaustive_argmax() {
        let res = resource();
        let model = train_label_model(
            &[
                (word(&res, "BA"), labels(&["O", "N"])),
                (word(&res, "ABBA"), labels(&["N", "Cd", "O", "N"])),
                (word(&res, "BAXY"), labels(&["O", "N", "X", "N"])),
            ],
            2,
            0.4,
        )
        .unwrap();
        for text in ["BA", "AB", "BAB", "ABBA", "XYZA", "QQQQ"] {
            let w = word(&res, text);
            let wide = 5usize.pow(w.len() as u32);
            let decoded = decode_labels(&w, &model, &res, wide);
            let oracle = exhaustive_best(&w, &model, &res);
            assert_eq!(decoded, oracle, "word {text}");
        }
    }

    #[test]
    fn fallback_is_always_valid() {
        let res = resource();
        for text in ["B", "A", "BBBB", "ABAB", "XAYB", "BBAA", "Q"] {
            let w = word(&res, text);
            let fl = fallback_labels(&w);
            let formed = form_pseudo_syllables(&w, &fl, &res).unwrap();
            assert!(!formed.is_empty());
        }
    }
}
