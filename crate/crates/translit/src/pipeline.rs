//! The full statistical pipeline: label decoding, unit mapping, and tone
//! assignment bundled behind one train/transliterate pair.
//!
//! Training derives ground-truth labelings for every corpus entry (pairs no
//! labeling can explain are skipped and reported), then fits the label
//! n-gram model, the unit mapping counts, and the tone model. Decoding runs
//! the three steps in order; by construction the output always satisfies the
//! resource's syllable phonology.

use thiserror::Error;

use crate::corpus::CorpusEntry;
use crate::label_model::{
    decode_labels, train_label_model, LabelModelError, SmoothedNgramLabelModel,
};
use crate::mapping::{
    extract_unit_pairs, map_units, train_mapping_for, unit_phonemes_for, MappingError,
    SourcePhonemes, UnitMappingModel,
};
use crate::phonology::{LanguageResource, Pronunciation, SourceWord, Tone};
use crate::pseudo::{
    derive_ground_truth_labels, form_pseudo_syllables, label_sequence_rank, LabelSequence,
};
use crate::tones::{assign_tones, train_tone_model, ToneError, ToneModel};

/// Tunables for the statistical pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Context window n (letters each side = n/2).
    pub window: usize,
    /// Geometric decay of smoothing weights.
    pub lambda: f64,
    /// Beam width for label decoding.
    pub beam: usize,
    /// Train on every valid labeling of a pair instead of the best one.
    pub use_all_labelings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 4,
            lambda: 0.4,
            beam: 8,
            use_all_labelings: false,
        }
    }
}

/// A skipped training entry: index into the corpus plus the word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedEntry {
    pub index: usize,
    pub word: String,
}

/// The trained three-step model bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineModel {
    pub resource_name: String,
    pub config: PipelineConfig,
    pub labels: SmoothedNgramLabelModel,
    pub mapping: UnitMappingModel,
    pub tones: ToneModel,
    pub skipped: Vec<SkippedEntry>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("every training entry was skipped (no valid labeling)")]
    AllEntriesSkipped,
    #[error("label model: {0}")]
    Labels(#[from] LabelModelError),
    #[error("unit mapping: {0}")]
    Mapping(#[from] MappingError),
    #[error("tone model: {0}")]
    Tones(#[from] ToneError),
    #[error("model was trained for resource `{model}`, not `{requested}`")]
    ResourceMismatch { model: String, requested: String },
}

/// Train all three models from a validated corpus.
pub fn train_pipeline(
    corpus: &[CorpusEntry],
    resource: &LanguageResource,
    config: &PipelineConfig,
) -> Result<PipelineModel, PipelineError> {
    if corpus.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let mut labeled: Vec<(SourceWord, LabelSequence)> = Vec::new();
    let mut unit_pairs = Vec::new();
    let mut tone_corpus = Vec::new();
    let mut skipped = Vec::new();
    for (index, entry) in corpus.iter().enumerate() {
        let labelings = match derive_ground_truth_labels(&entry.word, &entry.target, resource) {
            Ok(all) => all,
            Err(_) => {
                skipped.push(SkippedEntry {
                    index,
                    word: entry.word.text(),
                });
                continue;
            }
        };
        let used: &[LabelSequence] = if config.use_all_labelings {
            &labelings
        } else {
            std::slice::from_ref(&labelings[0])
        };
        for labeling in used {
            unit_pairs.extend(extract_unit_pairs(
                &entry.word,
                labeling,
                &entry.target,
                entry.source_phonemes.as_ref(),
                resource,
            )?);
            labeled.push((entry.word.clone(), labeling.clone()));
        }
        tone_corpus.push(entry.target.clone());
    }
    if labeled.is_empty() {
        return Err(PipelineError::AllEntriesSkipped);
    }
    Ok(PipelineModel {
        resource_name: resource.name.clone(),
        config: config.clone(),
        labels: train_label_model(&labeled, config.window, config.lambda)?,
        mapping: train_mapping_for(&unit_pairs, resource)?,
        tones: train_tone_model(&tone_corpus, resource.tone_count)?,
        skipped,
    })
}

/// Run the three decoding steps on one word.
pub fn transliterate_proposed(
    word: &SourceWord,
    source_phonemes: Option<&SourcePhonemes>,
    model: &PipelineModel,
    resource: &LanguageResource,
) -> Result<Pronunciation, PipelineError> {
    if model.resource_name != resource.name {
        return Err(PipelineError::ResourceMismatch {
            model: model.resource_name.clone(),
            requested: resource.name.clone(),
        });
    }
    let labels = decode_labels(word, &model.labels, resource, model.config.beam);
    let sequence = form_pseudo_syllables(word, &labels, resource)
        .expect("decoded labelings always form valid pseudo-syllables");
    let unit_phonemes = match source_phonemes {
        Some(sp) => Some(unit_phonemes_for(word, &labels, sp, resource)?),
        None => None,
    };
    let toneless = map_units(
        &sequence,
        unit_phonemes.as_deref(),
        &model.mapping,
        resource,
    )?;
    let tones: Vec<Tone> = assign_tones(&toneless, &model.tones);
    let mut out = toneless;
    for (syl, tone) in out.syllables.iter_mut().zip(tones) {
        syl.tone = Some(tone);
    }
    Ok(out)
}

/// The best ground-truth labeling of a pair under the training preference
/// order, for inspection tools.
pub fn best_labeling(
    word: &SourceWord,
    target: &Pronunciation,
    resource: &LanguageResource,
) -> Option<LabelSequence> {
    derive_ground_truth_labels(word, target, resource)
        .ok()
        .and_then(|mut all| {
            all.sort_by_key(label_sequence_rank);
            all.into_iter().next()
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;
    use crate::phonology::{serialize_pronunciation, validate, Role};

    fn resource() -> LanguageResource {
        LanguageResource::builder("test")
            .phoneme("d", &[Role::Onset])
            .unwrap()
            .phoneme("s", &[Role::Onset])
            .unwrap()
            .phoneme("n", &[Role::Onset, Role::Coda])
            .unwrap()
            .phoneme("l", &[Role::Onset])
            .unwrap()
            .phoneme("b", &[Role::Onset])
            .unwrap()
            .phoneme("i", &[Role::Nucleus])
            .unwrap()
            .phoneme("a", &[Role::Nucleus])
            .unwrap()
            .phoneme("@", &[Role::Nucleus])
            .unwrap()
            .phoneme("ej", &[Role::Nucleus])
            .unwrap()
            .tones(6)
            .latin_letters("AEIOUY")
            .cluster_caps(Some(1), Some(1))
            .build()
            .unwrap()
    }

    fn toy_corpus(res: &LanguageResource) -> Vec<CorpusEntry> {
        parse_corpus(
            "DINA\td i 2 . n a 1\nBLA\tb @ 3 . l a 1\nSAN\ts a n 4\n",
            res,
        )
        .unwrap()
    }

    #[test]
    fn memorizes_toy_corpus() {
        let res = resource();
        let corpus = toy_corpus(&res);
        let model = train_pipeline(&corpus, &res, &PipelineConfig::default()).unwrap();
        assert!(model.skipped.is_empty());
        for entry in &corpus {
            let out = transliterate_proposed(&entry.word, None, &model, &res).unwrap();
            assert_eq!(
                serialize_pronunciation(&out).unwrap(),
                entry.target_tokens,
                "word {}",
                entry.word
            );
        }
    }

    #[test]
    fn source_phonemes_steer_the_mapping() {
        let res = resource();
        // The letter A maps to /a/ by default but to /i/ when its source
        // phoneme says IY; both readings appear in training.
        let corpus = parse_corpus(
            "DA\td a 1\tD AH\nDA\td i 1\tD IY\nNA\tn a 2\tN AH\nNA\tn i 2\tN IY\n",
            &res,
        )
        .unwrap();
        let model = train_pipeline(&corpus, &res, &PipelineConfig::default()).unwrap();
        let word = res.classify_word("DA").unwrap();
        let with_ah = transliterate_proposed(
            &word,
            Some(&vec![Some("D".into()), Some("AH".into())]),
            &model,
            &res,
        )
        .unwrap();
        let with_iy = transliterate_proposed(
            &word,
            Some(&vec![Some("D".into()), Some("IY".into())]),
            &model,
            &res,
        )
        .unwrap();
        assert_eq!(with_ah.syllables[0].nucleus, vec!["a"]);
        assert_eq!(with_iy.syllables[0].nucleus, vec!["i"]);
    }

    #[test]
    fn outputs_always_validate() {
        let res = resource();
        let model = train_pipeline(&toy_corpus(&res), &res, &PipelineConfig::default()).unwrap();
        for text in ["D", "BDLS", "AAAA", "DILBAN", "XYZQW", "A"] {
            let word = res.classify_word(text).unwrap();
            let out = transliterate_proposed(&word, None, &model, &res).unwrap();
            assert!(
                validate(&out, &res).is_empty(),
                "pipeline output for {text} failed validation"
            );
        }
    }

    #[test]
    fn unexplainable_entries_are_skipped_and_reported() {
        let res = resource();
        // Second entry wants three syllables out of one letter: impossible.
        let corpus = parse_corpus("DI\td i 2\nA\ta 1 . a 2 . d a 3\n", &res).unwrap();
        let model = train_pipeline(&corpus, &res, &PipelineConfig::default()).unwrap();
        assert_eq!(model.skipped.len(), 1);
        assert_eq!(model.skipped[0].index, 1);
        assert_eq!(model.skipped[0].word, "A");
        // The skip list is exactly the set of entries the labeling search
        // rejects standalone.
        let expect: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                crate::pseudo::derive_ground_truth_labels(&e.word, &e.target, &res).is_err()
            })
            .map(|(i, _)| i)
            .collect();
        let got: Vec<usize> = model.skipped.iter().map(|s| s.index).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn all_skipped_is_an_error() {
        let res = resource();
        let corpus = parse_corpus("A\ta 1 . a 2 . d a 3\n", &res).unwrap();
        assert_eq!(
            train_pipeline(&corpus, &res, &PipelineConfig::default()).unwrap_err(),
            PipelineError::AllEntriesSkipped
        );
    }

    #[test]
    fn retraining_is_deterministic() {
        let res = resource();
        let corpus = toy_corpus(&res);
        let a = train_pipeline(&corpus, &res, &PipelineConfig::default()).unwrap();
        let b = train_pipeline(&corpus, &res, &PipelineConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resource_mismatch_is_refused() {
        let res = resource();
        let model = train_pipeline(&toy_corpus(&res), &res, &PipelineConfig::default()).unwrap();
        let other = LanguageResource::builder("other")
            .phoneme("a", &[Role::Nucleus])
            .unwrap()
            .tones(6)
            .latin_letters("AEIOU")
            .build()
            .unwrap();
        let word = other.classify_word("A").unwrap();
        assert!(matches!(
            transliterate_proposed(&word, None, &model, &other),
            Err(PipelineError::ResourceMismatch { .. })
        ));
    }
}
