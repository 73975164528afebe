//! Per-unit mapping from pseudo-syllable graphemes (plus optional source
//! phonemes) to target phoneme groups.
//!
//! Because a ground-truth labeling reproduces the target's syllable
//! structures exactly, the i-th pseudo-syllable's onset/nucleus/coda pair up
//! one-to-one with the i-th target syllable's. Counts are kept at three
//! back-off levels — (role, graphemes, source phoneme), (role, graphemes),
//! (role, consonant/vowel pattern) — with a role-wide argmax as the last
//! resort, and the most specific level with data always wins.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::phonology::{LanguageResource, Pronunciation, Role, SourceWord};
use crate::pseudo::{form_tracked, LabelSequence, PseudoSyllable};

/// Conditioning side of one mapping observation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UnitKey {
    pub role: Role,
    /// Grapheme symbols of the unit, or the epenthetic token alone.
    pub source: Vec<String>,
    /// Concatenated source phonemes covering the unit, when known.
    pub source_phoneme: Option<String>,
}

/// A target phoneme group, e.g. a single onset consonant or a diphthong
/// nucleus.
pub type PhonemeGroup = Vec<String>;

/// Per-grapheme source phonemes for a word; `None` marks letters with no
/// phoneme of their own.
pub type SourcePhonemes = Vec<Option<String>>;

/// Source phonemes regrouped per syllable unit, ready for [`map_units`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitPhonemes {
    pub onset: Option<String>,
    pub nucleus: Option<String>,
    pub coda: Option<String>,
}

impl UnitPhonemes {
    pub fn get(&self, role: Role) -> Option<&str> {
        match role {
            Role::Onset => self.onset.as_deref(),
            Role::Nucleus => self.nucleus.as_deref(),
            Role::Coda => self.coda.as_deref(),
        }
    }
}

type TargetCounts = BTreeMap<String, u64>;

/// Counts for every back-off level. Keys join grapheme symbols and phoneme
/// symbols with single spaces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitMappingModel {
    by_source_and_phoneme: BTreeMap<(Role, String, String), TargetCounts>,
    by_source: BTreeMap<(Role, String), TargetCounts>,
    by_class_pattern: BTreeMap<(Role, String), TargetCounts>,
    by_role: BTreeMap<Role, TargetCounts>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("no training pairs")]
    EmptyTrainingPairs,
    #[error("pseudo-syllable structures do not match the target pronunciation")]
    StructureMismatch,
    #[error("source phoneme column has {provided} entries for {letters} letters")]
    SourcePhonemeLength { provided: usize, letters: usize },
    #[error("no training data for any unit in role {role}")]
    UnmappableUnit { role: Role },
}

/// How far down the back-off cascade a lookup had to go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackoffLevel {
    SourceAndPhoneme,
    Source,
    ClassPattern,
    Role,
}

pub fn join_symbols(symbols: &[String]) -> String {
    symbols.join(" ")
}

pub fn split_symbols(joined: &str) -> Vec<String> {
    joined.split_whitespace().map(|s| s.to_string()).collect()
}

/// Consonant/vowel pattern of a unit's graphemes; tokens without a class
/// (the epenthetic nucleus) stand for themselves.
fn class_pattern(source: &[String], resource: &LanguageResource) -> String {
    source
        .iter()
        .map(|item| {
            let mut chars = item.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => match resource.class_of(c) {
                    Some(class) => class.to_string(),
                    None => item.clone(),
                },
                _ => item.clone(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Pair up each pseudo-syllable unit with the corresponding target unit for
/// one training example. `labels` must be a ground-truth labeling of the
/// pair, so the structures line up positionally.
pub fn extract_unit_pairs(
    word: &SourceWord,
    labels: &LabelSequence,
    pronunciation: &Pronunciation,
    source_phonemes: Option<&SourcePhonemes>,
    resource: &LanguageResource,
) -> Result<Vec<(UnitKey, PhonemeGroup)>, MappingError> {
    if let Some(sp) = source_phonemes {
        if sp.len() != word.len() {
            return Err(MappingError::SourcePhonemeLength {
                provided: sp.len(),
                letters: word.len(),
            });
        }
    }
    let tracked =
        form_tracked(word, labels, resource).map_err(|_| MappingError::StructureMismatch)?;
    if tracked.len() != pronunciation.syllables.len() {
        return Err(MappingError::StructureMismatch);
    }
    let mut pairs = Vec::new();
    for (pseudo, target) in tracked.iter().zip(&pronunciation.syllables) {
        if pseudo.syllable.structure() != target.structure() {
            return Err(MappingError::StructureMismatch);
        }
        for role in pseudo.syllable.structure().roles.clone() {
            let source = pseudo.syllable.unit(role).to_vec();
            let target_group: PhonemeGroup = match role {
                Role::Onset => target.onset.clone(),
                Role::Nucleus => target.nucleus.clone(),
                Role::Coda => target.coda.clone(),
            };
            let source_phoneme = source_phonemes.and_then(|sp| {
                let tokens: Vec<&str> = pseudo
                    .positions(role)
                    .iter()
                    .filter_map(|&pos| sp[pos].as_deref())
                    .collect();
                if tokens.is_empty() {
                    None
                } else {
                    Some(tokens.join(" "))
                }
            });
            pairs.push((
                UnitKey {
                    role,
                    source,
                    source_phoneme,
                },
                target_group,
            ));
        }
    }
    Ok(pairs)
}

/// Accumulate counts at every back-off level. Order-independent; the
/// resource supplies the consonant/vowel pattern of the middle level.
pub fn train_mapping_for(
    pairs: &[(UnitKey, PhonemeGroup)],
    resource: &LanguageResource,
) -> Result<UnitMappingModel, MappingError> {
    if pairs.is_empty() {
        return Err(MappingError::EmptyTrainingPairs);
    }
    let mut model = UnitMappingModel::default();
    for (key, target) in pairs {
        let source = join_symbols(&key.source);
        let target = join_symbols(target);
        if let Some(v) = &key.source_phoneme {
            *model
                .by_source_and_phoneme
                .entry((key.role, source.clone(), v.clone()))
                .or_default()
                .entry(target.clone())
                .or_insert(0) += 1;
        }
        *model
            .by_source
            .entry((key.role, source))
            .or_default()
            .entry(target.clone())
            .or_insert(0) += 1;
        *model
            .by_class_pattern
            .entry((key.role, class_pattern(&key.source, resource)))
            .or_default()
            .entry(target.clone())
            .or_insert(0) += 1;
        *model
            .by_role
            .entry(key.role)
            .or_default()
            .entry(target)
            .or_insert(0) += 1;
    }
    Ok(model)
}

impl UnitMappingModel {
    /// Highest-count role-compatible target for a unit, trying the most
    /// specific level first; count ties go to the lexicographically smaller
    /// group.
    pub fn lookup(
        &self,
        key: &UnitKey,
        resource: &LanguageResource,
    ) -> Result<(PhonemeGroup, BackoffLevel), MappingError> {
        let source = join_symbols(&key.source);
        if let Some(v) = &key.source_phoneme {
            let full = (key.role, source.clone(), v.clone());
            if let Some(group) = self
                .by_source_and_phoneme
                .get(&full)
                .and_then(|c| argmax(c, key.role, resource))
            {
                return Ok((group, BackoffLevel::SourceAndPhoneme));
            }
        }
        if let Some(group) = self
            .by_source
            .get(&(key.role, source))
            .and_then(|c| argmax(c, key.role, resource))
        {
            return Ok((group, BackoffLevel::Source));
        }
        let pattern = class_pattern(&key.source, resource);
        if let Some(group) = self
            .by_class_pattern
            .get(&(key.role, pattern))
            .and_then(|c| argmax(c, key.role, resource))
        {
            return Ok((group, BackoffLevel::ClassPattern));
        }
        if let Some(group) = self
            .by_role
            .get(&key.role)
            .and_then(|c| argmax(c, key.role, resource))
        {
            return Ok((group, BackoffLevel::Role));
        }
        Err(MappingError::UnmappableUnit { role: key.role })
    }

    pub fn entries_sv(&self) -> impl Iterator<Item = (&(Role, String, String), &TargetCounts)> {
        self.by_source_and_phoneme.iter()
    }

    pub fn entries_s(&self) -> impl Iterator<Item = (&(Role, String), &TargetCounts)> {
        self.by_source.iter()
    }

    pub fn entries_class(&self) -> impl Iterator<Item = (&(Role, String), &TargetCounts)> {
        self.by_class_pattern.iter()
    }

    pub fn entries_role(&self) -> impl Iterator<Item = (&Role, &TargetCounts)> {
        self.by_role.iter()
    }

    pub fn from_parts(
        by_source_and_phoneme: BTreeMap<(Role, String, String), TargetCounts>,
        by_source: BTreeMap<(Role, String), TargetCounts>,
        by_class_pattern: BTreeMap<(Role, String), TargetCounts>,
        by_role: BTreeMap<Role, TargetCounts>,
    ) -> Self {
        UnitMappingModel {
            by_source_and_phoneme,
            by_source,
            by_class_pattern,
            by_role,
        }
    }
}

/// Highest count wins; ties go to the smaller target string. Targets whose
/// phonemes cannot legally fill the role are skipped, which only matters for
/// hand-edited model files.
fn argmax(counts: &TargetCounts, role: Role, resource: &LanguageResource) -> Option<PhonemeGroup> {
    counts
        .iter()
        .filter(|(target, _)| {
            split_symbols(target).iter().all(|sym| {
                resource
                    .phoneme_roles(sym)
                    .is_some_and(|roles| roles.contains(role))
            })
        })
        .max_by(|(ta, ca), (tb, cb)| ca.cmp(cb).then_with(|| tb.cmp(ta)))
        .map(|(target, _)| split_symbols(target))
}

/// Map every unit of a pseudo-syllable sequence to phonemes, producing a
/// tone-less pronunciation with identical syllable structures.
pub fn map_units(
    sequence: &[PseudoSyllable],
    unit_phonemes: Option<&[UnitPhonemes]>,
    model: &UnitMappingModel,
    resource: &LanguageResource,
) -> Result<Pronunciation, MappingError> {
    let mut syllables = Vec::with_capacity(sequence.len());
    for (idx, pseudo) in sequence.iter().enumerate() {
        let mut onset = Vec::new();
        let mut nucleus = Vec::new();
        let mut coda = Vec::new();
        for role in pseudo.structure().roles.clone() {
            let key = UnitKey {
                role,
                source: pseudo.unit(role).to_vec(),
                source_phoneme: unit_phonemes
                    .and_then(|u| u.get(idx))
                    .and_then(|u| u.get(role).map(|s| s.to_string())),
            };
            let (group, _) = model.lookup(&key, resource)?;
            match role {
                Role::Onset => onset = group,
                Role::Nucleus => nucleus = group,
                Role::Coda => coda = group,
            }
        }
        syllables.push(crate::phonology::Syllable::new(onset, nucleus, coda, None));
    }
    Ok(Pronunciation::new(syllables))
}

/// Regroup a word's per-grapheme source phonemes by the units of a tracked
/// formation, for feeding [`map_units`] at decode time.
pub fn unit_phonemes_for(
    word: &SourceWord,
    labels: &LabelSequence,
    source_phonemes: &SourcePhonemes,
    resource: &LanguageResource,
) -> Result<Vec<UnitPhonemes>, MappingError> {
    if source_phonemes.len() != word.len() {
        return Err(MappingError::SourcePhonemeLength {
            provided: source_phonemes.len(),
            letters: word.len(),
        });
    }
    let tracked =
        form_tracked(word, labels, resource).map_err(|_| MappingError::StructureMismatch)?;
    Ok(tracked
        .iter()
        .map(|t| {
            let gather = |role: Role| {
                let tokens: Vec<&str> = t
                    .positions(role)
                    .iter()
                    .filter_map(|&pos| source_phonemes[pos].as_deref())
                    .collect();
                if tokens.is_empty() {
                    None
                } else {
                    Some(tokens.join(" "))
                }
            };
            UnitPhonemes {
                onset: gather(Role::Onset),
                nucleus: gather(Role::Nucleus),
                coda: gather(Role::Coda),
            }
        })
        .collect())
}
