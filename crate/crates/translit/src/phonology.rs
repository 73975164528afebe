//! Core phonology types: graphemes, phonemes, syllables, pronunciations,
//! and the per-language resource that constrains them.
//!
//! A syllable follows the universal shape `[Onset] Nucleus [Coda] + Tone`:
//! the nucleus is mandatory, onset and coda are optional, and every finalized
//! syllable carries exactly one lexical tone.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Consonant/vowel class of a source letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphemeClass {
    Consonant,
    Vowel,
}

impl fmt::Display for GraphemeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphemeClass::Consonant => write!(f, "C"),
            GraphemeClass::Vowel => write!(f, "V"),
        }
    }
}

/// A single source letter together with its consonant/vowel class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grapheme {
    pub symbol: char,
    pub class: GraphemeClass,
}

/// A source-language word as a non-empty sequence of classified letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceWord {
    graphemes: Vec<Grapheme>,
}

impl SourceWord {
    pub fn graphemes(&self) -> &[Grapheme] {
        &self.graphemes
    }

    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }

    /// The word spelled back as a plain string.
    pub fn text(&self) -> String {
        self.graphemes.iter().map(|g| g.symbol).collect()
    }
}

impl fmt::Display for SourceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

/// Sub-syllabic role a phoneme can occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Onset,
    Nucleus,
    Coda,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Onset => write!(f, "O"),
            Role::Nucleus => write!(f, "N"),
            Role::Coda => write!(f, "Cd"),
        }
    }
}

/// Set of roles a phoneme may occupy, stored as a small bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoleSet(u8);

impl RoleSet {
    pub fn empty() -> Self {
        RoleSet(0)
    }

    pub fn with(mut self, role: Role) -> Self {
        self.insert(role);
        self
    }

    pub fn insert(&mut self, role: Role) {
        self.0 |= Self::bit(role);
    }

    pub fn contains(&self, role: Role) -> bool {
        self.0 & Self::bit(role) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    fn bit(role: Role) -> u8 {
        match role {
            Role::Onset => 1,
            Role::Nucleus => 2,
            Role::Coda => 4,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Role> + '_ {
        [Role::Onset, Role::Nucleus, Role::Coda]
            .into_iter()
            .filter(|r| self.contains(*r))
    }
}

impl fmt::Display for RoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|r| r.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A lexical tone, numbered from 1 up to the resource's tone count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tone(pub u8);

impl fmt::Display for Tone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One target-language syllable: onset/nucleus/coda phoneme symbols plus an
/// optional tone (required once the pronunciation is finalized).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub onset: Vec<String>,
    pub nucleus: Vec<String>,
    pub coda: Vec<String>,
    pub tone: Option<Tone>,
}

impl Syllable {
    pub fn new(
        onset: Vec<String>,
        nucleus: Vec<String>,
        coda: Vec<String>,
        tone: Option<Tone>,
    ) -> Self {
        Syllable {
            onset,
            nucleus,
            coda,
            tone,
        }
    }

    /// Phoneme symbols in onset-nucleus-coda order, without the tone.
    pub fn phonemes(&self) -> impl Iterator<Item = &str> {
        self.onset
            .iter()
            .chain(self.nucleus.iter())
            .chain(self.coda.iter())
            .map(|s| s.as_str())
    }

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
}

/// The role skeleton of one syllable: `O? N Cd?` with repeated same-role
/// positions collapsed (a diphthong nucleus is still a single `N`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyllableStructure {
    pub roles: Vec<Role>,
}

impl SyllableStructure {
    pub fn has(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    pub fn unit_count(&self) -> usize {
        self.roles.len()
    }
}

impl fmt::Display for SyllableStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.roles.iter().map(|r| r.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A full pronunciation: a non-empty sequence of syllables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pronunciation {
    pub syllables: Vec<Syllable>,
}

impl Pronunciation {
    pub fn new(syllables: Vec<Syllable>) -> Self {
        Pronunciation { syllables }
    }
}

/// Everything the engine knows about a target language: phoneme inventory
/// with permitted roles, tone count, source-letter classes, the reserved
/// epenthetic nucleus token, and optional onset/coda cluster caps.
#[derive(Debug, Clone)]
pub struct LanguageResource {
    pub name: String,
    phonemes: BTreeMap<String, RoleSet>,
    pub tone_count: u8,
    grapheme_classes: BTreeMap<char, GraphemeClass>,
    pub epenthetic: String,
    pub max_onset: Option<usize>,
    pub max_coda: Option<usize>,
}

pub const SYLLABLE_DELIMITER: &str = ".";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResourceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate phoneme symbol `{0}`")]
    DuplicatePhoneme(String),
    #[error("phoneme `{0}` declares no roles")]
    NoRoles(String),
    #[error("reserved symbol `{0}` may not be declared as a phoneme or grapheme")]
    ReservedSymbol(String),
    #[error("missing required section or field: {0}")]
    Missing(String),
    #[error("io error: {0}")]
    Io(String),
}

impl LanguageResource {
    pub fn builder(name: &str) -> ResourceBuilder {
        ResourceBuilder {
            name: name.to_string(),
            phonemes: BTreeMap::new(),
            tone_count: 0,
            grapheme_classes: BTreeMap::new(),
            epenthetic: "@:".to_string(),
            max_onset: None,
            max_coda: None,
        }
    }

    pub fn phoneme_roles(&self, symbol: &str) -> Option<RoleSet> {
        self.phonemes.get(symbol).copied()
    }

    pub fn phonemes(&self) -> impl Iterator<Item = (&str, RoleSet)> {
        self.phonemes.iter().map(|(s, r)| (s.as_str(), *r))
    }

    pub fn phonemes_with_role(&self, role: Role) -> impl Iterator<Item = &str> {
        self.phonemes
            .iter()
            .filter(move |(_, r)| r.contains(role))
            .map(|(s, _)| s.as_str())
    }

    pub fn class_of(&self, letter: char) -> Option<GraphemeClass> {
        self.grapheme_classes
            .get(&letter.to_ascii_uppercase())
            .copied()
    }

    pub fn grapheme_classes(&self) -> impl Iterator<Item = (char, GraphemeClass)> + '_ {
        self.grapheme_classes.iter().map(|(c, k)| (*c, *k))
    }

    /// Turn a raw string into a classified source word. Unknown letters are
    /// rejected at ingestion.
    pub fn classify_word(&self, text: &str) -> Result<SourceWord, ParseError> {
        let mut graphemes = Vec::new();
        for ch in text.chars() {
            let upper = ch.to_ascii_uppercase();
            let class = self
                .class_of(upper)
                .ok_or(ParseError::UnknownGrapheme { letter: upper })?;
            graphemes.push(Grapheme {
                symbol: upper,
                class,
            });
        }
        if graphemes.is_empty() {
            return Err(ParseError::EmptyWord);
        }
        Ok(SourceWord { graphemes })
    }

    /// Is the token a tone numeral under this resource? Out-of-range numerals
    /// are still recognized as tones so they can be reported precisely.
    fn looks_like_tone(&self, token: &str) -> bool {
        !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit())
    }

    pub fn load(path: &Path) -> Result<LanguageResource, ResourceError> {
        let text = std::fs::read_to_string(path).map_err(|e| ResourceError::Io(e.to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "unnamed".to_string());
        Self::parse(&name, &text)
    }

    /// Parse the sectioned resource format:
    ///
    /// ```text
    /// [phonemes]
    /// b_< O
    /// O   N
    /// [tones]
    /// count 6
    /// [grapheme_classes]
    /// A V
    /// B C
    /// [special]
    /// epenthetic @:
    /// max_onset 1
    /// max_coda 1
    /// ```
    pub fn parse(name: &str, text: &str) -> Result<LanguageResource, ResourceError> {
        let mut builder = Self::builder(name);
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].to_string();
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            match section.as_str() {
                "phonemes" => {
                    let roles_field = rest.first().ok_or_else(|| ResourceError::Malformed {
                        line: line_no,
                        message: format!("phoneme `{head}` missing roles"),
                    })?;
                    let mut roles = RoleSet::empty();
                    for r in roles_field.split(',') {
                        match r {
                            "O" => roles.insert(Role::Onset),
                            "N" => roles.insert(Role::Nucleus),
                            "Cd" => roles.insert(Role::Coda),
                            other => {
                                return Err(ResourceError::Malformed {
                                    line: line_no,
                                    message: format!("unknown role `{other}`"),
                                })
                            }
                        }
                    }
                    builder = builder.phoneme_set(head, roles)?;
                }
                "tones" => {
                    if head != "count" {
                        return Err(ResourceError::Malformed {
                            line: line_no,
                            message: format!("expected `count N`, found `{head}`"),
                        });
                    }
                    let n = rest
                        .first()
                        .and_then(|v| v.parse::<u8>().ok())
                        .ok_or_else(|| ResourceError::Malformed {
                            line: line_no,
                            message: "tone count must be a small integer".to_string(),
                        })?;
                    builder.tone_count = n;
                }
                "grapheme_classes" => {
                    let class = match rest.first() {
                        Some(&"C") => GraphemeClass::Consonant,
                        Some(&"V") => GraphemeClass::Vowel,
                        _ => {
                            return Err(ResourceError::Malformed {
                                line: line_no,
                                message: format!("grapheme `{head}` must be classed C or V"),
                            })
                        }
                    };
                    let mut chars = head.chars();
                    let letter = chars.next().unwrap().to_ascii_uppercase();
                    if chars.next().is_some() {
                        return Err(ResourceError::Malformed {
                            line: line_no,
                            message: format!("grapheme `{head}` must be a single letter"),
                        });
                    }
                    builder.grapheme_classes.insert(letter, class);
                }
                "special" => match head {
                    "epenthetic" => {
                        builder.epenthetic = rest
                            .first()
                            .ok_or_else(|| ResourceError::Malformed {
                                line: line_no,
                                message: "epenthetic token missing".to_string(),
                            })?
                            .to_string();
                    }
                    "max_onset" => {
                        builder.max_onset = Some(parse_cap(rest.first(), line_no)?);
                    }
                    "max_coda" => {
                        builder.max_coda = Some(parse_cap(rest.first(), line_no)?);
                    }
                    other => {
                        return Err(ResourceError::Malformed {
                            line: line_no,
                            message: format!("unknown special key `{other}`"),
                        })
                    }
                },
                other => {
                    return Err(ResourceError::Malformed {
                        line: line_no,
                        message: format!("declaration outside a known section (`{other}`)"),
                    })
                }
            }
        }
        builder.build()
    }
}

fn parse_cap(field: Option<&&str>, line: usize) -> Result<usize, ResourceError> {
    field
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n >= 1)
        .ok_or_else(|| ResourceError::Malformed {
            line,
            message: "cluster cap must be a positive integer".to_string(),
        })
}

/// Incrementally assembles a [`LanguageResource`], validating invariants at
/// build time.
#[derive(Debug, Clone)]
pub struct ResourceBuilder {
    name: String,
    phonemes: BTreeMap<String, RoleSet>,
    tone_count: u8,
    grapheme_classes: BTreeMap<char, GraphemeClass>,
    epenthetic: String,
    max_onset: Option<usize>,
    max_coda: Option<usize>,
}

impl ResourceBuilder {
    pub fn phoneme(self, symbol: &str, roles: &[Role]) -> Result<Self, ResourceError> {
        let mut set = RoleSet::empty();
        for r in roles {
            set.insert(*r);
        }
        self.phoneme_set(symbol, set)
    }

    fn phoneme_set(mut self, symbol: &str, roles: RoleSet) -> Result<Self, ResourceError> {
        if self.phonemes.contains_key(symbol) {
            return Err(ResourceError::DuplicatePhoneme(symbol.to_string()));
        }
        if roles.is_empty() {
            return Err(ResourceError::NoRoles(symbol.to_string()));
        }
        self.phonemes.insert(symbol.to_string(), roles);
        Ok(self)
    }

    pub fn tones(mut self, count: u8) -> Self {
        self.tone_count = count;
        self
    }

    pub fn grapheme(mut self, letter: char, class: GraphemeClass) -> Self {
        self.grapheme_classes
            .insert(letter.to_ascii_uppercase(), class);
        self
    }

    /// Class every ASCII letter, treating the given set as vowels.
    pub fn latin_letters(mut self, vowels: &str) -> Self {
        for c in 'A'..='Z' {
            let class = if vowels.to_ascii_uppercase().contains(c) {
                GraphemeClass::Vowel
            } else {
                GraphemeClass::Consonant
            };
            self.grapheme_classes.insert(c, class);
        }
        self
    }

    pub fn epenthetic(mut self, token: &str) -> Self {
        self.epenthetic = token.to_string();
        self
    }

    pub fn cluster_caps(mut self, max_onset: Option<usize>, max_coda: Option<usize>) -> Self {
        self.max_onset = max_onset;
        self.max_coda = max_coda;
        self
    }

    pub fn build(self) -> Result<LanguageResource, ResourceError> {
        if self.tone_count == 0 {
            return Err(ResourceError::Missing("tone count".to_string()));
        }
        if self.phonemes.is_empty() {
            return Err(ResourceError::Missing("phoneme inventory".to_string()));
        }
        if self.grapheme_classes.is_empty() {
            return Err(ResourceError::Missing("grapheme class table".to_string()));
        }
        if self.phonemes.contains_key(&self.epenthetic) {
            return Err(ResourceError::ReservedSymbol(self.epenthetic));
        }
        if self.epenthetic.chars().count() == 1 {
            let c = self.epenthetic.chars().next().unwrap().to_ascii_uppercase();
            if self.grapheme_classes.contains_key(&c) {
                return Err(ResourceError::ReservedSymbol(self.epenthetic));
            }
        }
        for symbol in self.phonemes.keys() {
            if symbol == SYLLABLE_DELIMITER || symbol.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ResourceError::ReservedSymbol(symbol.clone()));
            }
        }
        Ok(LanguageResource {
            name: self.name,
            phonemes: self.phonemes,
            tone_count: self.tone_count,
            grapheme_classes: self.grapheme_classes,
            epenthetic: self.epenthetic,
            max_onset: self.max_onset,
            max_coda: self.max_coda,
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown token `{token}` in syllable {syllable}")]
    UnknownToken { syllable: usize, token: String },
    #[error("unknown source letter `{letter}`")]
    UnknownGrapheme { letter: char },
    #[error("empty source word")]
    EmptyWord,
    #[error("empty pronunciation")]
    EmptyPronunciation,
    #[error("syllable {syllable} has no possible nucleus")]
    NoNucleus { syllable: usize },
    #[error("syllable {syllable} is missing a tone")]
    MissingTone { syllable: usize },
    #[error("syllable {syllable} carries more than one tone")]
    MultipleTones { syllable: usize },
    #[error("tone {value} out of range 1..={max} in syllable {syllable}")]
    ToneOutOfRange {
        syllable: usize,
        value: u32,
        max: u8,
    },
    #[error("syllable {syllable} admits no valid onset/nucleus/coda split")]
    RoleViolation { syllable: usize },
}

/// One structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyPronunciation,
    MissingNucleus {
        syllable: usize,
    },
    UnknownPhoneme {
        syllable: usize,
        symbol: String,
    },
    RoleViolation {
        syllable: usize,
        symbol: String,
        role: Role,
    },
    ClusterTooLong {
        syllable: usize,
        role: Role,
        len: usize,
        max: usize,
    },
    MissingTone {
        syllable: usize,
    },
    ToneOutOfRange {
        syllable: usize,
        value: u8,
        max: u8,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyPronunciation => write!(f, "pronunciation has no syllables"),
            Violation::MissingNucleus { syllable } => {
                write!(f, "syllable {syllable}: missing nucleus")
            }
            Violation::UnknownPhoneme { syllable, symbol } => {
                write!(f, "syllable {syllable}: unknown phoneme `{symbol}`")
            }
            Violation::RoleViolation {
                syllable,
                symbol,
                role,
            } => {
                write!(
                    f,
                    "syllable {syllable}: `{symbol}` may not fill role {role}"
                )
            }
            Violation::ClusterTooLong {
                syllable,
                role,
                len,
                max,
            } => {
                write!(
                    f,
                    "syllable {syllable}: {role} cluster of {len} exceeds cap {max}"
                )
            }
            Violation::MissingTone { syllable } => {
                write!(f, "syllable {syllable}: missing tone")
            }
            Violation::ToneOutOfRange {
                syllable,
                value,
                max,
            } => {
                write!(f, "syllable {syllable}: tone {value} outside 1..={max}")
            }
        }
    }
}

/// Parse a token stream (phoneme symbols, tone numerals, `.` delimiters) into
/// a role-annotated pronunciation.
///
/// Within a syllable the split is chosen to maximize the nucleus; ties prefer
/// the shortest onset. Tone numerals may appear anywhere in the syllable span
/// but exactly one must be present.
pub fn parse_pronunciation(
    tokens: &[impl AsRef<str>],
    resource: &LanguageResource,
) -> Result<Pronunciation, ParseError> {
    let mut syllables = Vec::new();
    let mut chunk: Vec<&str> = Vec::new();
    let mut chunks: Vec<Vec<&str>> = Vec::new();
    for t in tokens {
        let t = t.as_ref();
        if t == SYLLABLE_DELIMITER {
            chunks.push(std::mem::take(&mut chunk));
        } else {
            chunk.push(t);
        }
    }
    if !chunk.is_empty() || !chunks.is_empty() {
        chunks.push(chunk);
    }
    if chunks.is_empty() {
        return Err(ParseError::EmptyPronunciation);
    }
    for (idx, chunk) in chunks.iter().enumerate() {
        syllables.push(parse_syllable(idx, chunk, resource)?);
    }
    Ok(Pronunciation { syllables })
}

fn parse_syllable(
    idx: usize,
    chunk: &[&str],
    resource: &LanguageResource,
) -> Result<Syllable, ParseError> {
    let mut phonemes: Vec<(&str, RoleSet)> = Vec::new();
    let mut tone: Option<Tone> = None;
    for token in chunk {
        if let Some(roles) = resource.phoneme_roles(token) {
            phonemes.push((token, roles));
        } else if resource.looks_like_tone(token) {
            let value: u32 = token.parse().map_err(|_| ParseError::UnknownToken {
                syllable: idx,
                token: token.to_string(),
            })?;
            if value < 1 || value > resource.tone_count as u32 {
                return Err(ParseError::ToneOutOfRange {
                    syllable: idx,
                    value,
                    max: resource.tone_count,
                });
            }
            if tone.is_some() {
                return Err(ParseError::MultipleTones { syllable: idx });
            }
            tone = Some(Tone(value as u8));
        } else {
            return Err(ParseError::UnknownToken {
                syllable: idx,
                token: token.to_string(),
            });
        }
    }
    let tone = tone.ok_or(ParseError::MissingTone { syllable: idx })?;
    let (onset, nucleus, coda) = split_roles(idx, &phonemes, resource)?;
    Ok(Syllable {
        onset,
        nucleus,
        coda,
        tone: Some(tone),
    })
}

type RoleSplit = (Vec<String>, Vec<String>, Vec<String>);

/// Choose onset/nucleus/coda spans for a syllable's phonemes. All valid
/// splits are enumerated; the one with the longest nucleus wins, ties going
/// to the shortest onset. Cluster caps from the resource are enforced here so
/// that parse acceptance coincides with [`validate`].
fn split_roles(
    idx: usize,
    phonemes: &[(&str, RoleSet)],
    resource: &LanguageResource,
) -> Result<RoleSplit, ParseError> {
    let n = phonemes.len();
    if n == 0 || !phonemes.iter().any(|(_, r)| r.contains(Role::Nucleus)) {
        return Err(ParseError::NoNucleus { syllable: idx });
    }
    let mut best: Option<(usize, usize)> = None;
    for start in 0..n {
        if resource.max_onset.is_some_and(|cap| start > cap) {
            break;
        }
        if !phonemes[..start]
            .iter()
            .all(|(_, r)| r.contains(Role::Onset))
        {
            break;
        }
        for end in (start + 1..=n).rev() {
            let coda_len = n - end;
            if resource.max_coda.is_some_and(|cap| coda_len > cap) {
                continue;
            }
            if !phonemes[start..end]
                .iter()
                .all(|(_, r)| r.contains(Role::Nucleus))
            {
                continue;
            }
            if !phonemes[end..].iter().all(|(_, r)| r.contains(Role::Coda)) {
                continue;
            }
            let better = match best {
                None => true,
                Some((bs, be)) => {
                    let (cur, old) = (end - start, be - bs);
                    cur > old || (cur == old && start < bs)
                }
            };
            if better {
                best = Some((start, end));
            }
        }
    }
    let (start, end) = best.ok_or(ParseError::RoleViolation { syllable: idx })?;
    let sym = |range: &[(&str, RoleSet)]| range.iter().map(|(s, _)| s.to_string()).collect();
    Ok((
        sym(&phonemes[..start]),
        sym(&phonemes[start..end]),
        sym(&phonemes[end..]),
    ))
}

/// The role skeleton of each syllable, in order.
pub fn structure_of(p: &Pronunciation) -> Vec<SyllableStructure> {
    p.syllables.iter().map(|s| s.structure()).collect()
}

/// Check a pronunciation against the resource, returning every violation
/// instead of failing on the first. An empty result means the pronunciation
/// is exactly one the parser would accept.
pub fn validate(p: &Pronunciation, resource: &LanguageResource) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.syllables.is_empty() {
        out.push(Violation::EmptyPronunciation);
        return out;
    }
    for (idx, syl) in p.syllables.iter().enumerate() {
        if syl.nucleus.is_empty() {
            out.push(Violation::MissingNucleus { syllable: idx });
        }
        for (role, symbols) in [
            (Role::Onset, &syl.onset),
            (Role::Nucleus, &syl.nucleus),
            (Role::Coda, &syl.coda),
        ] {
            for symbol in symbols {
                match resource.phoneme_roles(symbol) {
                    None => out.push(Violation::UnknownPhoneme {
                        syllable: idx,
                        symbol: symbol.clone(),
                    }),
                    Some(roles) if !roles.contains(role) => out.push(Violation::RoleViolation {
                        syllable: idx,
                        symbol: symbol.clone(),
                        role,
                    }),
                    _ => {}
                }
            }
        }
        if let Some(max) = resource.max_onset {
            if syl.onset.len() > max {
                out.push(Violation::ClusterTooLong {
                    syllable: idx,
                    role: Role::Onset,
                    len: syl.onset.len(),
                    max,
                });
            }
        }
        if let Some(max) = resource.max_coda {
            if syl.coda.len() > max {
                out.push(Violation::ClusterTooLong {
                    syllable: idx,
                    role: Role::Coda,
                    len: syl.coda.len(),
                    max,
                });
            }
        }
        match syl.tone {
            None => out.push(Violation::MissingTone { syllable: idx }),
            Some(Tone(v)) if v < 1 || v > resource.tone_count => {
                out.push(Violation::ToneOutOfRange {
                    syllable: idx,
                    value: v,
                    max: resource.tone_count,
                })
            }
            _ => {}
        }
    }
    out
}

/// Render a finalized pronunciation back to tokens: phoneme symbols in order,
/// the tone numeral last in each syllable, `.` between syllables.
pub fn serialize_pronunciation(p: &Pronunciation) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    for (idx, syl) in p.syllables.iter().enumerate() {
        if idx > 0 {
            out.push(SYLLABLE_DELIMITER.to_string());
        }
        for sym in syl.phonemes() {
            out.push(sym.to_string());
        }
        let tone = syl.tone.ok_or(ParseError::MissingTone { syllable: idx })?;
        out.push(tone.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn viet_like() -> LanguageResource {
        LanguageResource::builder("viet-test")
            .phoneme("b_<", &[Role::Onset])
            .unwrap()
            .phoneme("d", &[Role::Onset])
            .unwrap()
            .phoneme("s", &[Role::Onset])
            .unwrap()
            .phoneme("n", &[Role::Onset, Role::Coda])
            .unwrap()
            .phoneme("l", &[Role::Onset])
            .unwrap()
            .phoneme("O", &[Role::Nucleus])
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

    fn canto_like() -> LanguageResource {
        LanguageResource::builder("canto-test")
            .phoneme("g", &[Role::Onset])
            .unwrap()
            .phoneme("l", &[Role::Onset])
            .unwrap()
            .phoneme("aa", &[Role::Nucleus])
            .unwrap()
            .phoneme("i", &[Role::Nucleus, Role::Coda])
            .unwrap()
            .phoneme("k", &[Role::Onset, Role::Coda])
            .unwrap()
            .phoneme("ng", &[Role::Onset, Role::Coda])
            .unwrap()
            .tones(6)
            .latin_letters("AEIOUY")
            .cluster_caps(Some(1), Some(1))
            .build()
            .unwrap()
    }

    #[test]
    fn parses_cow_example() {
        let res = viet_like();
        let p = parse_pronunciation(&["b_<", "O", "3"], &res).unwrap();
        assert_eq!(p.syllables.len(), 1);
        let syl = &p.syllables[0];
        assert_eq!(syl.onset, vec!["b_<"]);
        assert_eq!(syl.nucleus, vec!["O"]);
        assert!(syl.coda.is_empty());
        assert_eq!(syl.tone, Some(Tone(3)));
    }

    #[test]
    fn parses_bare_nucleus() {
        let res = viet_like();
        let p = parse_pronunciation(&["O", "1"], &res).unwrap();
        let syl = &p.syllables[0];
        assert!(syl.onset.is_empty());
        assert_eq!(syl.nucleus, vec!["O"]);
        assert_eq!(syl.tone, Some(Tone(1)));
    }

    #[test]
    fn parses_two_syllable_jyutping() {
        let res = canto_like();
        let p =
            parse_pronunciation(&["g", "aa", "k", "3", ".", "l", "i", "ng", "4"], &res).unwrap();
        assert_eq!(p.syllables.len(), 2);
        let structs = structure_of(&p);
        let full = vec![Role::Onset, Role::Nucleus, Role::Coda];
        assert_eq!(structs[0].roles, full);
        assert_eq!(structs[1].roles, full);
    }

    #[test]
    fn disneyland_reference_structure() {
        let res = viet_like();
        // d i 2 . s @ 4 . n ej 5 . l a n 1
        let tokens = [
            "d", "i", "2", ".", "s", "@", "4", ".", "n", "ej", "5", ".", "l", "a", "n", "1",
        ];
        let p = parse_pronunciation(&tokens, &res).unwrap();
        let structs: Vec<Vec<Role>> = structure_of(&p).into_iter().map(|s| s.roles).collect();
        assert_eq!(
            structs,
            vec![
                vec![Role::Onset, Role::Nucleus],
                vec![Role::Onset, Role::Nucleus],
                vec![Role::Onset, Role::Nucleus],
                vec![Role::Onset, Role::Nucleus, Role::Coda],
            ]
        );
    }

    #[test]
    fn tone_position_is_tolerant() {
        let res = viet_like();
        let canonical = parse_pronunciation(&["b_<", "O", "3"], &res).unwrap();
        let shuffled = parse_pronunciation(&["3", "b_<", "O"], &res).unwrap();
        assert_eq!(canonical, shuffled);
        assert_eq!(
            serialize_pronunciation(&shuffled).unwrap(),
            vec!["b_<", "O", "3"]
        );
    }

    #[test]
    fn rejects_unknown_token() {
        let res = viet_like();
        let err = parse_pronunciation(&["zz", "1"], &res).unwrap_err();
        assert!(matches!(err, ParseError::UnknownToken { .. }));
    }

    #[test]
    fn rejects_missing_and_multiple_tones() {
        let res = viet_like();
        assert!(matches!(
            parse_pronunciation(&["b_<", "O"], &res),
            Err(ParseError::MissingTone { .. })
        ));
        assert!(matches!(
            parse_pronunciation(&["b_<", "O", "3", "4"], &res),
            Err(ParseError::MultipleTones { .. })
        ));
    }

    #[test]
    fn rejects_tone_out_of_range() {
        let res = viet_like();
        assert!(matches!(
            parse_pronunciation(&["b_<", "O", "9"], &res),
            Err(ParseError::ToneOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_onset_cluster_via_caps() {
        let res = viet_like();
        // "s n ej" inside one syllable: s and n are both onset-capable but the
        // cap of 1 rules the cluster out, and n cannot be a nucleus.
        let err = parse_pronunciation(&["s", "n", "ej", "2"], &res).unwrap_err();
        assert!(matches!(err, ParseError::RoleViolation { .. }));
    }

    #[test]
    fn rejects_no_nucleus() {
        let res = viet_like();
        let err = parse_pronunciation(&["s", "1"], &res).unwrap_err();
        assert!(matches!(err, ParseError::NoNucleus { .. }));
    }

    #[test]
    fn invalid_output_yields_two_violations() {
        let res = viet_like();
        // Constructed directly: an onset cluster plus a tone-less syllable.
        let p = Pronunciation::new(vec![
            Syllable::new(
                vec!["s".into(), "n".into()],
                vec!["ej".into()],
                vec![],
                Some(Tone(2)),
            ),
            Syllable::new(vec!["l".into()], vec!["a".into()], vec![], None),
        ]);
        let violations = validate(&p, &res);
        assert_eq!(violations.len(), 2);
        assert!(violations.iter().any(|v| matches!(
            v,
            Violation::ClusterTooLong {
                role: Role::Onset,
                ..
            }
        )));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::MissingTone { syllable: 1 })));
    }

    #[test]
    fn parse_accepts_iff_validate_empty() {
        let res = viet_like();
        // Fuzz token streams from the resource's token alphabet and check the
        // two paths agree.
        let alphabet: Vec<String> = res
            .phonemes()
            .map(|(s, _)| s.to_string())
            .chain([
                "1".to_string(),
                "3".to_string(),
                "9".to_string(),
                ".".to_string(),
            ])
            .collect();
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let len = (next() % 8 + 1) as usize;
            let tokens: Vec<String> = (0..len)
                .map(|_| alphabet[(next() as usize) % alphabet.len()].clone())
                .collect();
            match parse_pronunciation(&tokens, &res) {
                Ok(p) => {
                    assert!(
                        validate(&p, &res).is_empty(),
                        "parsed but invalid: {tokens:?}"
                    );
                }
                Err(_) => {
                    // No pronunciation to validate; nothing further to check.
                }
            }
        }
    }

    #[test]
    fn serialize_rejects_missing_tone() {
        let p = Pronunciation::new(vec![Syllable::new(vec![], vec!["a".into()], vec![], None)]);
        assert!(matches!(
            serialize_pronunciation(&p),
            Err(ParseError::MissingTone { .. })
        ));
    }

    #[test]
    fn bug_example_serializes_tone_last() {
        let p = Pronunciation::new(vec![Syllable::new(
            vec!["b_<".into()],
            vec!["O".into()],
            vec![],
            Some(Tone(6)),
        )]);
        assert_eq!(serialize_pronunciation(&p).unwrap(), vec!["b_<", "O", "6"]);
    }

    #[test]
    fn resource_round_trip_from_text() {
        let text = "\
# test resource
[phonemes]
b_< O
O N
n O,Cd
[tones]
count 6
[grapheme_classes]
A V
B C
[special]
epenthetic @:
max_onset 1
max_coda 1
";
        let res = LanguageResource::parse("mini", text).unwrap();
        assert_eq!(res.tone_count, 6);
        assert_eq!(res.epenthetic, "@:");
        assert_eq!(res.max_onset, Some(1));
        assert!(res.phoneme_roles("n").unwrap().contains(Role::Coda));
        assert_eq!(res.class_of('a'), Some(GraphemeClass::Vowel));
    }

    #[test]
    fn resource_rejects_epenthetic_collision() {
        let err = LanguageResource::builder("bad")
            .phoneme("@:", &[Role::Nucleus])
            .unwrap()
            .tones(6)
            .latin_letters("AEIOU")
            .build()
            .unwrap_err();
        assert!(matches!(err, ResourceError::ReservedSymbol(_)));
    }

    #[test]
    fn classify_rejects_unknown_letters() {
        let res = viet_like();
        assert!(res.classify_word("CAFÉ").is_err());
        let word = res.classify_word("disney").unwrap();
        assert_eq!(word.text(), "DISNEY");
        assert_eq!(word.graphemes()[1].class, GraphemeClass::Vowel);
    }
}
