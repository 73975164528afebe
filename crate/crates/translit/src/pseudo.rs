//! Pseudo-syllables: grouping source letters into target-language syllable
//! structure before any phoneme is chosen.
//!
//! Each letter gets one of five labels. `O`, `N`, `Cd` place the letter in an
//! onset, nucleus, or coda; `ON` places it in an onset and inserts the
//! reserved epenthetic token as the nucleus of the same syllable; `X` drops
//! the letter. The formation function walks the labels left to right and
//! either produces a sequence of well-formed pseudo-syllables or pinpoints
//! the position where the labeling breaks syllable structure.

use std::fmt;

use thiserror::Error;

use crate::phonology::{LanguageResource, Pronunciation, Role, SourceWord, SyllableStructure};

/// Per-letter label driving pseudo-syllable formation.
///
/// The enum order (`O < N < Cd < ON < X`) is the tie-break order used
/// wherever label sequences are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphemicLabel {
    Onset,
    Nucleus,
    Coda,
    OnsetEpenthetic,
    Excluded,
}

pub const ALL_LABELS: [GraphemicLabel; 5] = [
    GraphemicLabel::Onset,
    GraphemicLabel::Nucleus,
    GraphemicLabel::Coda,
    GraphemicLabel::OnsetEpenthetic,
    GraphemicLabel::Excluded,
];

impl GraphemicLabel {
    pub fn code(&self) -> &'static str {
        match self {
            GraphemicLabel::Onset => "O",
            GraphemicLabel::Nucleus => "N",
            GraphemicLabel::Coda => "Cd",
            GraphemicLabel::OnsetEpenthetic => "ON",
            GraphemicLabel::Excluded => "X",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "O" => Some(GraphemicLabel::Onset),
            "N" => Some(GraphemicLabel::Nucleus),
            "Cd" => Some(GraphemicLabel::Coda),
            "ON" => Some(GraphemicLabel::OnsetEpenthetic),
            "X" => Some(GraphemicLabel::Excluded),
            _ => None,
        }
    }
}

impl fmt::Display for GraphemicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// A label per grapheme, same length as the word it annotates.
pub type LabelSequence = Vec<GraphemicLabel>;

/// One pseudo-syllable: grapheme groups for onset/nucleus/coda, where the
/// nucleus may instead hold the epenthetic token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoSyllable {
    pub onset: Vec<String>,
    pub nucleus: Vec<String>,
    pub coda: Vec<String>,
}

impl PseudoSyllable {
    pub fn structure(&self) -> SyllableStructure {
        let mut roles = Vec::with_capacity(3);
        if !self.onset.is_empty() {
            roles.push(Role::Onset);
        }
        roles.push(Role::Nucleus);
        if !self.coda.is_empty() {
            roles.push(Role::Coda);
        }
        SyllableStructure { roles }
    }

    pub fn unit(&self, role: Role) -> &[String] {
        match role {
            Role::Onset => &self.onset,
            Role::Nucleus => &self.nucleus,
            Role::Coda => &self.coda,
        }
    }
}

impl fmt::Display for PseudoSyllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[String]| v.join("");
        let mut parts = Vec::new();
        if !self.onset.is_empty() {
            parts.push(join(&self.onset));
        }
        parts.push(join(&self.nucleus));
        if !self.coda.is_empty() {
            parts.push(join(&self.coda));
        }
        write!(f, "{{{}}}", parts.join("|"))
    }
}

pub type PseudoSyllableSequence = Vec<PseudoSyllable>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormationError {
    /// The labeling cannot yield structurally valid pseudo-syllables; the
    /// position is the 0-based grapheme index where the walk failed (equal to
    /// the word length when the final syllable is left without a nucleus).
    #[error("invalid labeling at position {position}")]
    InvalidLabeling { position: usize },
    #[error("label sequence length {labels} does not match word length {word}")]
    LengthMismatch { labels: usize, word: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundTruthError {
    #[error("no graphemic labeling reproduces the target structure")]
    NoValidLabeling,
}

/// A pseudo-syllable plus the word positions its graphemes came from; the
/// epenthetic nucleus has a symbol but no position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TrackedSyllable {
    pub(crate) syllable: PseudoSyllable,
    pub(crate) onset_positions: Vec<usize>,
    pub(crate) nucleus_positions: Vec<usize>,
    pub(crate) coda_positions: Vec<usize>,
}

impl TrackedSyllable {
    fn with_onset(grapheme: &str, position: usize) -> Self {
        TrackedSyllable {
            syllable: PseudoSyllable {
                onset: vec![grapheme.to_string()],
                nucleus: Vec::new(),
                coda: Vec::new(),
            },
            onset_positions: vec![position],
            nucleus_positions: Vec::new(),
            coda_positions: Vec::new(),
        }
    }

    fn with_nucleus(grapheme: &str, position: usize) -> Self {
        TrackedSyllable {
            syllable: PseudoSyllable {
                onset: Vec::new(),
                nucleus: vec![grapheme.to_string()],
                coda: Vec::new(),
            },
            onset_positions: Vec::new(),
            nucleus_positions: vec![position],
            coda_positions: Vec::new(),
        }
    }

    pub(crate) fn positions(&self, role: Role) -> &[usize] {
        match role {
            Role::Onset => &self.onset_positions,
            Role::Nucleus => &self.nucleus_positions,
            Role::Coda => &self.coda_positions,
        }
    }
}

/// Incremental formation state shared by the full formation walk, the
/// ground-truth search, and the decoder's validity pruning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FormationState {
    completed: Vec<TrackedSyllable>,
    open: Option<TrackedSyllable>,
    /// Label of the most recent non-`X` position, for nucleus joining.
    prev_effective: Option<GraphemicLabel>,
}

impl FormationState {
    pub(crate) fn new() -> Self {
        FormationState {
            completed: Vec::new(),
            open: None,
            prev_effective: None,
        }
    }

    fn close_open(&mut self, position: usize) -> Result<(), FormationError> {
        if let Some(open) = self.open.take() {
            if open.syllable.nucleus.is_empty() {
                return Err(FormationError::InvalidLabeling { position });
            }
            self.completed.push(open);
        }
        Ok(())
    }

    pub(crate) fn step(
        &mut self,
        position: usize,
        grapheme: &str,
        label: GraphemicLabel,
        epenthetic: &str,
    ) -> Result<(), FormationError> {
        match label {
            GraphemicLabel::Onset => {
                self.close_open(position)?;
                self.open = Some(TrackedSyllable::with_onset(grapheme, position));
            }
            GraphemicLabel::OnsetEpenthetic => {
                self.close_open(position)?;
                let mut syl = TrackedSyllable::with_onset(grapheme, position);
                syl.syllable.nucleus.push(epenthetic.to_string());
                self.completed.push(syl);
            }
            GraphemicLabel::Nucleus => {
                let joins = self.prev_effective == Some(GraphemicLabel::Nucleus);
                match &mut self.open {
                    Some(open) if joins && !open.syllable.nucleus.is_empty() => {
                        open.syllable.nucleus.push(grapheme.to_string());
                        open.nucleus_positions.push(position);
                    }
                    Some(open) if open.syllable.nucleus.is_empty() => {
                        open.syllable.nucleus.push(grapheme.to_string());
                        open.nucleus_positions.push(position);
                    }
                    _ => {
                        self.close_open(position)?;
                        self.open = Some(TrackedSyllable::with_nucleus(grapheme, position));
                    }
                }
            }
            GraphemicLabel::Coda => match &mut self.open {
                Some(open) if !open.syllable.nucleus.is_empty() => {
                    open.syllable.coda.push(grapheme.to_string());
                    open.coda_positions.push(position);
                }
                _ => return Err(FormationError::InvalidLabeling { position }),
            },
            GraphemicLabel::Excluded => return Ok(()),
        }
        self.prev_effective = Some(label);
        Ok(())
    }

    pub(crate) fn finish(
        mut self,
        word_len: usize,
    ) -> Result<Vec<TrackedSyllable>, FormationError> {
        self.close_open(word_len)?;
        Ok(self.completed)
    }
}

/// Structure-only formation state: tracks how many syllables are complete,
/// the open syllable's role flags, and whether the previous non-`X` label
/// was a nucleus. Copyable, so search and decoding stay allocation-free;
/// must transition exactly like [`FormationState`], which the tests check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct StructureState {
    done: usize,
    /// Bit 0 onset, bit 1 nucleus, bit 2 coda; `None` when nothing is open.
    open: Option<u8>,
    prev_was_nucleus: bool,
}

const HAS_ONSET: u8 = 1;
const HAS_NUCLEUS: u8 = 2;
const HAS_CODA: u8 = 4;

fn structure_bits(structure: &SyllableStructure) -> u8 {
    let mut bits = HAS_NUCLEUS;
    if structure.has(Role::Onset) {
        bits |= HAS_ONSET;
    }
    if structure.has(Role::Coda) {
        bits |= HAS_CODA;
    }
    bits
}

/// Can an open syllable with these flags still grow into `target`? Roles
/// are only appended in onset, nucleus, coda order.
fn open_bits_extend(bits: u8, target: u8) -> bool {
    if bits & HAS_ONSET != 0 && target & HAS_ONSET == 0 {
        return false;
    }
    if bits & HAS_NUCLEUS != 0 && bits & HAS_ONSET == 0 && target & HAS_ONSET != 0 {
        // Nucleus began without an onset; the target wants one.
        return false;
    }
    if bits & HAS_CODA != 0 && target & HAS_CODA == 0 {
        return false;
    }
    true
}

impl StructureState {
    pub(crate) fn new() -> Self {
        StructureState {
            done: 0,
            open: None,
            prev_was_nucleus: false,
        }
    }

    fn close(&mut self, target: Option<&[u8]>) -> Result<(), ()> {
        if let Some(bits) = self.open.take() {
            if bits & HAS_NUCLEUS == 0 {
                return Err(());
            }
            if let Some(target) = target {
                if self.done >= target.len() || target[self.done] != bits {
                    return Err(());
                }
            }
            self.done += 1;
        }
        Ok(())
    }

    /// Advance by one label. With a target structure list the state also
    /// fails as soon as it can no longer reproduce the target.
    pub(crate) fn step(&mut self, label: GraphemicLabel, target: Option<&[u8]>) -> Result<(), ()> {
        match label {
            GraphemicLabel::Onset => {
                self.close(target)?;
                self.open = Some(HAS_ONSET);
            }
            GraphemicLabel::OnsetEpenthetic => {
                self.close(target)?;
                if let Some(target) = target {
                    if self.done >= target.len() || target[self.done] != HAS_ONSET | HAS_NUCLEUS {
                        return Err(());
                    }
                }
                self.done += 1;
            }
            GraphemicLabel::Nucleus => match self.open {
                Some(bits)
                    if (self.prev_was_nucleus && bits & HAS_NUCLEUS != 0)
                        || bits & HAS_NUCLEUS == 0 =>
                {
                    self.open = Some(bits | HAS_NUCLEUS);
                }
                _ => {
                    self.close(target)?;
                    self.open = Some(HAS_NUCLEUS);
                }
            },
            GraphemicLabel::Coda => match self.open {
                Some(bits) if bits & HAS_NUCLEUS != 0 => {
                    self.open = Some(bits | HAS_CODA);
                }
                _ => return Err(()),
            },
            GraphemicLabel::Excluded => return Ok(()),
        }
        if let (Some(target), Some(bits)) = (target, self.open) {
            if self.done >= target.len() || !open_bits_extend(bits, target[self.done]) {
                return Err(());
            }
        }
        self.prev_was_nucleus = label == GraphemicLabel::Nucleus;
        Ok(())
    }

    /// Close out the final syllable; with a target, additionally demand an
    /// exact structure match.
    pub(crate) fn finish(mut self, target: Option<&[u8]>) -> Result<usize, ()> {
        self.close(target)?;
        if let Some(target) = target {
            if self.done != target.len() {
                return Err(());
            }
        }
        Ok(self.done)
    }
}

/// Form pseudo-syllables from a word and a label sequence.
///
/// `O` closes any open syllable and opens a new one with the letter as
/// onset; `ON` does the same, then inserts the epenthetic nucleus and closes
/// the syllable; `N` joins a running nucleus, fills an onset-only syllable,
/// or opens an onset-less syllable; `Cd` extends the open syllable's coda;
/// `X` skips the letter. Fails with the offending position if any syllable
/// would be left without a nucleus.
pub fn form_pseudo_syllables(
    word: &SourceWord,
    labels: &LabelSequence,
    resource: &LanguageResource,
) -> Result<PseudoSyllableSequence, FormationError> {
    Ok(form_tracked(word, labels, resource)?
        .into_iter()
        .map(|t| t.syllable)
        .collect())
}

/// Formation that also reports which word positions filled each unit.
pub(crate) fn form_tracked(
    word: &SourceWord,
    labels: &LabelSequence,
    resource: &LanguageResource,
) -> Result<Vec<TrackedSyllable>, FormationError> {
    if labels.len() != word.len() {
        return Err(FormationError::LengthMismatch {
            labels: labels.len(),
            word: word.len(),
        });
    }
    let mut state = FormationState::new();
    for (pos, (grapheme, label)) in word.graphemes().iter().zip(labels).enumerate() {
        state.step(
            pos,
            &grapheme.symbol.to_string(),
            *label,
            &resource.epenthetic,
        )?;
    }
    state.finish(word.len())
}

pub fn structures_of_sequence(seq: &PseudoSyllableSequence) -> Vec<SyllableStructure> {
    seq.iter().map(|s| s.structure()).collect()
}

/// Search every labeling of `word` whose pseudo-syllables match the
/// target pronunciation's syllable structures.
///
/// The search walks labels depth-first, rejecting a partial labeling as soon
/// as its partial formation is invalid or its structures stop being a prefix
/// of the target's. Results are ordered by fewest `X`, then fewest `ON`,
/// then label order, so the head of the list is the labeling that keeps the
/// most source material with the fewest insertions.
pub fn derive_ground_truth_labels(
    word: &SourceWord,
    pronunciation: &Pronunciation,
    resource: &LanguageResource,
) -> Result<Vec<LabelSequence>, GroundTruthError> {
    let target: Vec<u8> = crate::phonology::structure_of(pronunciation)
        .iter()
        .map(structure_bits)
        .collect();
    let mut results = Vec::new();
    let mut labels = Vec::with_capacity(word.len());
    search(
        word,
        &target,
        StructureState::new(),
        &mut labels,
        &mut results,
    );
    if results.is_empty() {
        return Err(GroundTruthError::NoValidLabeling);
    }
    results.sort_by_key(label_sequence_rank);
    debug_assert!(results.iter().all(|l| {
        form_pseudo_syllables(word, l, resource).is_ok_and(|seq| {
            structures_of_sequence(&seq) == crate::phonology::structure_of(pronunciation)
        })
    }));
    Ok(results)
}

/// Sort key implementing the fewest-`X`, fewest-`ON`, then label-order
/// preference.
pub fn label_sequence_rank(labels: &LabelSequence) -> (usize, usize, Vec<GraphemicLabel>) {
    let x = labels
        .iter()
        .filter(|l| **l == GraphemicLabel::Excluded)
        .count();
    let on = labels
        .iter()
        .filter(|l| **l == GraphemicLabel::OnsetEpenthetic)
        .count();
    (x, on, labels.clone())
}

fn search(
    word: &SourceWord,
    target: &[u8],
    state: StructureState,
    labels: &mut LabelSequence,
    results: &mut Vec<LabelSequence>,
) {
    let pos = labels.len();
    if pos == word.len() {
        if state.finish(Some(target)).is_ok() {
            results.push(labels.clone());
        }
        return;
    }
    for label in ALL_LABELS {
        let mut next = state;
        if next.step(label, Some(target)).is_err() {
            continue;
        }
        labels.push(label);
        search(word, target, next, labels, results);
        labels.pop();
    }
}
