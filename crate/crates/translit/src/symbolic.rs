//! Deterministic rule-based transliteration.
//!
//! The pipeline is: segment the word into alternating vowel/consonant
//! clusters, assign clusters to syllable roles (with epenthesis and deletion
//! compensating for clusters the target language cannot keep), optionally
//! split vowel clusters across two syllables, then map each unit to phonemes
//! and each syllable to a tone by ordered first-match rules. Rule tables are
//! data, not code; every table ends in a catch-all so the engine is total.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::phonology::{
    GraphemeClass, LanguageResource, ParseError, Pronunciation, Role, SourceWord, Syllable, Tone,
};
use crate::pseudo::{PseudoSyllable, PseudoSyllableSequence};

/// A maximal run of same-class letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSegment {
    pub kind: GraphemeClass,
    pub graphemes: Vec<String>,
}

impl fmt::Display for ClusterSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.graphemes.join(""))
    }
}

/// One context-sensitive grapheme-to-phoneme rewrite rule. Patterns are
/// grapheme strings; `*` matches anything, `#` matches a word edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G2pRule {
    pub role: Role,
    pub pattern: String,
    pub left: String,
    pub right: String,
    pub output: Vec<String>,
    pub enabled: bool,
}

/// One tone rule: patterns over the syllable's onset/nucleus/coda phonemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToneRule {
    pub onset: String,
    pub nucleus: String,
    pub coda: String,
    pub tone: Tone,
}

/// A vowel-cluster split: the matching nucleus cluster is divided between
/// two adjacent syllables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VowelSplitRule {
    pub pattern: String,
    pub left_len: usize,
}

/// The full symbolic rule inventory for one language.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    /// Letters treated as liquids (candidate deletions in coda clusters).
    pub liquids: Vec<String>,
    /// Liquids actually deleted when they lead a coda-side cluster.
    pub deletable: Vec<String>,
    /// Letters that may stand as a raw coda.
    pub coda_ok: Vec<String>,
    /// Cluster remnants dropped right after a successfully placed coda.
    pub postcoda_drop: Vec<String>,
    pub vowel_splits: Vec<VowelSplitRule>,
    pub g2p: Vec<G2pRule>,
    pub tones: Vec<ToneRule>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no {0} rule matched and no catch-all is present")]
    RuleGap(String),
    #[error("rule output failed phonology: {0}")]
    BadOutput(String),
    #[error("io error: {0}")]
    Io(String),
}

const WILDCARD: &str = "*";
const EDGE: &str = "#";

fn pattern_matches(pattern: &str, value: &str) -> bool {
    pattern == WILDCARD || pattern == value
}

impl RuleSet {
    pub fn load(path: &Path) -> Result<RuleSet, RuleError> {
        let text = std::fs::read_to_string(path).map_err(|e| RuleError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// Parse the sectioned rule format:
    ///
    /// ```text
    /// [role]
    /// liquid L R
    /// deletable R
    /// coda_ok M N P T K
    /// postcoda_drop D
    /// [vowel_split]
    /// IA -> I|A
    /// [g2p]
    /// O|L|*|@: -> j
    /// N|@:|G|* -> aa k
    /// [tones]
    /// *|*|k -> 3
    /// *|*|* -> 1
    /// ```
    ///
    /// A leading `!` on a g2p line ships the rule disabled.
    pub fn parse(text: &str) -> Result<RuleSet, RuleError> {
        let mut rules = RuleSet::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                // `#` begins a comment unless it is the edge marker inside a
                // rule body, so comments must start the line or follow space.
                Some(pos)
                    if pos == 0
                        || raw.as_bytes().get(pos.wrapping_sub(1)) == Some(&b' ')
                        || raw.as_bytes().get(pos.wrapping_sub(1)) == Some(&b'\t') =>
                {
                    &raw[..pos]
                }
                _ => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].to_string();
                continue;
            }
            match section.as_str() {
                "role" => {
                    let mut parts = line.split_whitespace();
                    let key = parts.next().unwrap();
                    let values: Vec<String> = parts.map(|p| p.to_ascii_uppercase()).collect();
                    match key {
                        "liquid" => rules.liquids = values,
                        "deletable" => rules.deletable = values,
                        "coda_ok" => rules.coda_ok = values,
                        "postcoda_drop" => rules.postcoda_drop = values,
                        other => {
                            return Err(RuleError::Malformed {
                                line: line_no,
                                message: format!("unknown role key `{other}`"),
                            })
                        }
                    }
                }
                "vowel_split" => {
                    let (pattern, split) =
                        line.split_once("->").ok_or_else(|| RuleError::Malformed {
                            line: line_no,
                            message: "expected `PATTERN -> LEFT|RIGHT`".to_string(),
                        })?;
                    let pattern = pattern.trim().to_ascii_uppercase();
                    let (left, right) =
                        split
                            .trim()
                            .split_once('|')
                            .ok_or_else(|| RuleError::Malformed {
                                line: line_no,
                                message: "split needs a `|`".to_string(),
                            })?;
                    let (left, right) = (left.trim(), right.trim());
                    if left.is_empty() || right.is_empty() || format!("{left}{right}") != pattern {
                        return Err(RuleError::Malformed {
                            line: line_no,
                            message: "split halves must rebuild the pattern".to_string(),
                        });
                    }
                    rules.vowel_splits.push(VowelSplitRule {
                        pattern,
                        left_len: left.chars().count(),
                    });
                }
                "g2p" => {
                    let (enabled, body) = match line.strip_prefix('!') {
                        Some(rest) => (false, rest.trim()),
                        None => (true, line),
                    };
                    let (head, output) =
                        body.split_once("->").ok_or_else(|| RuleError::Malformed {
                            line: line_no,
                            message: "expected `ROLE|PATTERN|LEFT|RIGHT -> phonemes`".to_string(),
                        })?;
                    let fields: Vec<&str> = head.trim().split('|').map(|f| f.trim()).collect();
                    if fields.len() != 4 {
                        return Err(RuleError::Malformed {
                            line: line_no,
                            message: format!("expected 4 fields, found {}", fields.len()),
                        });
                    }
                    let role = match fields[0] {
                        "O" => Role::Onset,
                        "N" => Role::Nucleus,
                        "Cd" => Role::Coda,
                        other => {
                            return Err(RuleError::Malformed {
                                line: line_no,
                                message: format!("unknown role `{other}`"),
                            })
                        }
                    };
                    rules.g2p.push(G2pRule {
                        role,
                        pattern: fields[1].to_string(),
                        left: fields[2].to_string(),
                        right: fields[3].to_string(),
                        output: output.split_whitespace().map(|s| s.to_string()).collect(),
                        enabled,
                    });
                }
                "tones" => {
                    let (head, tone) =
                        line.split_once("->").ok_or_else(|| RuleError::Malformed {
                            line: line_no,
                            message: "expected `O|N|Cd -> tone`".to_string(),
                        })?;
                    let fields: Vec<&str> = head.trim().split('|').map(|f| f.trim()).collect();
                    if fields.len() != 3 {
                        return Err(RuleError::Malformed {
                            line: line_no,
                            message: format!("expected 3 fields, found {}", fields.len()),
                        });
                    }
                    let value: u8 = tone.trim().parse().map_err(|_| RuleError::Malformed {
                        line: line_no,
                        message: format!("bad tone `{}`", tone.trim()),
                    })?;
                    rules.tones.push(ToneRule {
                        onset: fields[0].to_string(),
                        nucleus: fields[1].to_string(),
                        coda: fields[2].to_string(),
                        tone: Tone(value),
                    });
                }
                other => {
                    return Err(RuleError::Malformed {
                        line: line_no,
                        message: format!("declaration outside a known section (`{other}`)"),
                    })
                }
            }
        }
        Ok(rules)
    }

    fn is_deletable(&self, letter: &str) -> bool {
        self.deletable.iter().any(|l| l == letter)
    }

    fn is_coda_ok(&self, letter: &str) -> bool {
        self.coda_ok.iter().any(|l| l == letter)
    }

    fn drops_after_coda(&self, letter: &str) -> bool {
        self.postcoda_drop.iter().any(|l| l == letter)
    }

    /// First enabled g2p rule matching (role, unit text, contexts).
    fn g2p_lookup(
        &self,
        role: Role,
        unit: &str,
        left: &str,
        right: &str,
    ) -> Result<&[String], RuleError> {
        for rule in self.g2p.iter().filter(|r| r.enabled) {
            if rule.role == role
                && pattern_matches(&rule.pattern, unit)
                && pattern_matches(&rule.left, left)
                && pattern_matches(&rule.right, right)
            {
                return Ok(&rule.output);
            }
        }
        Err(RuleError::RuleGap(format!(
            "g2p {role}|{unit}|{left}|{right}"
        )))
    }

    /// First tone rule matching the syllable's phoneme units.
    fn tone_lookup(&self, onset: &str, nucleus: &str, coda: &str) -> Result<Tone, RuleError> {
        for rule in &self.tones {
            if pattern_matches(&rule.onset, onset)
                && pattern_matches(&rule.nucleus, nucleus)
                && pattern_matches(&rule.coda, coda)
            {
                return Ok(rule.tone);
            }
        }
        Err(RuleError::RuleGap(format!("tone {onset}|{nucleus}|{coda}")))
    }
}

/// Split a word into maximal vowel/consonant runs.
pub fn segment_clusters(word: &SourceWord) -> Vec<ClusterSegment> {
    let mut out: Vec<ClusterSegment> = Vec::new();
    for g in word.graphemes() {
        match out.last_mut() {
            Some(seg) if seg.kind == g.class => seg.graphemes.push(g.symbol.to_string()),
            _ => out.push(ClusterSegment {
                kind: g.class,
                graphemes: vec![g.symbol.to_string()],
            }),
        }
    }
    out
}

/// Assign cluster segments to syllable roles.
///
/// Vowel clusters become nuclei. A consonant cluster donates its last
/// consonant as the onset of a following vowel, if there is one. Of the
/// rest, the first consonant becomes the previous syllable's coda when the
/// language permits it, is deleted when it is a deletable liquid, and
/// otherwise receives an epenthesized syllable of its own; later remnants
/// are likewise epenthesized, except letters configured to drop right after
/// a placed coda.
pub fn assign_roles(segments: &[ClusterSegment], rules: &RuleSet) -> PseudoSyllableSequence {
    let mut syllables: Vec<PseudoSyllable> = Vec::new();
    // Onset carried into the next vowel cluster.
    let mut pending_onset: Vec<String> = Vec::new();
    for (idx, segment) in segments.iter().enumerate() {
        match segment.kind {
            GraphemeClass::Vowel => {
                syllables.push(PseudoSyllable {
                    onset: std::mem::take(&mut pending_onset),
                    nucleus: segment.graphemes.clone(),
                    coda: Vec::new(),
                });
            }
            GraphemeClass::Consonant => {
                let followed_by_vowel = segments
                    .get(idx + 1)
                    .is_some_and(|s| s.kind == GraphemeClass::Vowel);
                let mut remnant: &[String] = &segment.graphemes;
                let mut reserved: Option<&String> = None;
                if followed_by_vowel {
                    let (last, rest) = remnant.split_last().unwrap();
                    reserved = Some(last);
                    remnant = rest;
                }
                let cluster_len = segment.graphemes.len();
                let mut coda_placed = false;
                for (pos, letter) in remnant.iter().enumerate() {
                    let has_preceding = syllables.iter().any(|s| !s.nucleus.is_empty());
                    if pos == 0 && has_preceding && rules.is_coda_ok(letter) {
                        syllables.last_mut().unwrap().coda.push(letter.clone());
                        coda_placed = true;
                        continue;
                    }
                    if pos == 0 && has_preceding && cluster_len >= 2 && rules.is_deletable(letter) {
                        continue;
                    }
                    if pos > 0 && coda_placed && rules.drops_after_coda(letter) {
                        continue;
                    }
                    // Epenthesized syllable of its own.
                    syllables.push(PseudoSyllable {
                        onset: vec![letter.clone()],
                        nucleus: vec!["@:".to_string()],
                        coda: Vec::new(),
                    });
                }
                if let Some(onset) = reserved {
                    pending_onset = vec![onset.clone()];
                }
            }
        }
    }
    // A trailing reserved onset cannot happen: reservation requires a
    // following vowel cluster.
    debug_assert!(pending_onset.is_empty());
    syllables
}

/// Split vowel clusters that match a rule into the nuclei of two adjacent
/// syllables: the first keeps the onset, the second inherits the coda.
pub fn postprocess_vowels(
    sequence: PseudoSyllableSequence,
    rules: &RuleSet,
) -> PseudoSyllableSequence {
    let mut out = Vec::with_capacity(sequence.len());
    for syl in sequence {
        let nucleus_text = syl.nucleus.join("");
        match rules
            .vowel_splits
            .iter()
            .find(|r| r.pattern == nucleus_text)
        {
            Some(rule) => {
                let (left, right) = syl.nucleus.split_at(rule.left_len);
                out.push(PseudoSyllable {
                    onset: syl.onset.clone(),
                    nucleus: left.to_vec(),
                    coda: Vec::new(),
                });
                out.push(PseudoSyllable {
                    onset: Vec::new(),
                    nucleus: right.to_vec(),
                    coda: syl.coda.clone(),
                });
            }
            None => out.push(syl),
        }
    }
    out
}

/// Flattened unit list (syllable index, role, unit text) for rule contexts.
fn unit_texts(sequence: &[PseudoSyllable]) -> Vec<(usize, Role, String)> {
    let mut units = Vec::new();
    for (idx, syl) in sequence.iter().enumerate() {
        for role in syl.structure().roles.clone() {
            units.push((idx, role, syl.unit(role).join("")));
        }
    }
    units
}

/// Run the full symbolic pipeline on a word.
pub fn transliterate_symbolic(
    word: &SourceWord,
    rules: &RuleSet,
    resource: &LanguageResource,
) -> Result<Pronunciation, RuleError> {
    let segments = segment_clusters(word);
    let sequence = postprocess_vowels(assign_roles(&segments, rules), rules);
    let units = unit_texts(&sequence);
    let mut syllables: Vec<Syllable> = Vec::new();
    let mut tokens_per_syllable: Vec<Vec<String>> = vec![Vec::new(); sequence.len()];
    for (pos, (syl_idx, role, text)) in units.iter().enumerate() {
        let left = if pos == 0 {
            EDGE.to_string()
        } else {
            units[pos - 1].2.clone()
        };
        let right = if pos + 1 == units.len() {
            EDGE.to_string()
        } else {
            units[pos + 1].2.clone()
        };
        let output = rules.g2p_lookup(*role, text, &left, &right)?;
        tokens_per_syllable[*syl_idx].extend(output.iter().cloned());
    }
    for tokens in tokens_per_syllable {
        // Re-derive roles from the emitted phonemes: a rule may emit a
        // nucleus plus coda group in one go.
        let placed =
            place_tokens(&tokens, resource).map_err(|e| RuleError::BadOutput(e.to_string()))?;
        let tone = rules.tone_lookup(
            &placed.onset.join(" "),
            &placed.nucleus.join(" "),
            &placed.coda.join(" "),
        )?;
        syllables.push(Syllable::new(
            placed.onset,
            placed.nucleus,
            placed.coda,
            Some(tone),
        ));
    }
    Ok(Pronunciation::new(syllables))
}

struct PlacedUnits {
    onset: Vec<String>,
    nucleus: Vec<String>,
    coda: Vec<String>,
}

/// Assign emitted phoneme tokens to onset/nucleus/coda the same way the
/// pronunciation parser does, without requiring a tone.
fn place_tokens(tokens: &[String], resource: &LanguageResource) -> Result<PlacedUnits, ParseError> {
    let mut with_tone: Vec<String> = tokens.to_vec();
    with_tone.push("1".to_string());
    let parsed = crate::phonology::parse_pronunciation(&with_tone, resource)?;
    let syl = &parsed.syllables[0];
    Ok(PlacedUnits {
        onset: syl.onset.clone(),
        nucleus: syl.nucleus.clone(),
        coda: syl.coda.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resource() -> LanguageResource {
        LanguageResource::builder("canto-test")
            .phoneme("b", &[Role::Onset])
            .unwrap()
            .phoneme("d", &[Role::Onset])
            .unwrap()
            .phoneme("f", &[Role::Onset])
            .unwrap()
            .phoneme("g", &[Role::Onset])
            .unwrap()
            .phoneme("j", &[Role::Onset])
            .unwrap()
            .phoneme("l", &[Role::Onset])
            .unwrap()
            .phoneme("n", &[Role::Onset, Role::Coda])
            .unwrap()
            .phoneme("k", &[Role::Onset, Role::Coda])
            .unwrap()
            .phoneme("ng", &[Role::Onset, Role::Coda])
            .unwrap()
            .phoneme("aa", &[Role::Nucleus])
            .unwrap()
            .phoneme("a", &[Role::Nucleus])
            .unwrap()
            .phoneme("i", &[Role::Nucleus, Role::Coda])
            .unwrap()
            .phoneme("o", &[Role::Nucleus])
            .unwrap()
            .phoneme("u", &[Role::Nucleus, Role::Coda])
            .unwrap()
            .phoneme("ei", &[Role::Nucleus])
            .unwrap()
            .tones(6)
            .latin_letters("AEIOUY")
            .cluster_caps(Some(1), Some(1))
            .build()
            .unwrap()
    }

    fn rules() -> RuleSet {
        RuleSet::parse(
            "
[role]
liquid L R
deletable R
coda_ok M N NG P T K
postcoda_drop D
[vowel_split]
IA -> I|A
[g2p]
O|L|*|@: -> j
O|R|*|* -> l
O|G|*|* -> g
O|B|*|* -> b
O|N|*|* -> n
O|L|*|* -> l
O|T|*|@: -> d
O|D|*|* -> d
O|F|*|* -> f
N|@:|L|* -> i
N|@:|G|* -> aa k
N|@:|T|* -> a k
N|@:|D|* -> a k
N|@:|*|* -> a
N|O|*|D -> u k
N|O|*|* -> o
N|A|#|* -> aa
N|A|*|* -> aa
N|EE|*|* -> i
N|I|*|* -> ei
N|E|*|* -> e
Cd|N|*|# -> n
Cd|N|*|* -> ng
Cd|K|*|* -> k
Cd|M|*|* -> m
O|*|*|* -> b
N|*|*|* -> aa
Cd|*|*|* -> k
[tones]
d|*|k -> 6
g|*|k -> 3
*|*|k -> 1
*|*|p -> 3
*|*|t -> 3
j|i|* -> 5
*|*|ng -> 4
*|*|n -> 4
b|aa|* -> 1
n|ei|* -> 4
*|aa|* -> 3
*|*|* -> 1
",
        )
        .unwrap()
    }

    fn seg_texts(word: &str) -> Vec<String> {
        let res = resource();
        let w = res.classify_word(word).unwrap();
        segment_clusters(&w)
            .iter()
            .map(|s| s.graphemes.join(""))
            .collect()
    }

    #[test]
    fn albania_segments_alternate() {
        assert_eq!(seg_texts("ALBANIA"), vec!["A", "LB", "A", "N", "IA"]);
    }

    #[test]
    fn all_vowel_word_is_one_cluster() {
        assert_eq!(seg_texts("AEIOU"), vec!["AEIOU"]);
    }

    #[test]
    fn segments_rebuild_word_and_alternate() {
        let res = resource();
        for word in ["GREENLAND", "BOLT", "FORD", "A", "BBB", "ABBA"] {
            let w = res.classify_word(word).unwrap();
            let segments = segment_clusters(&w);
            let rebuilt: String = segments.iter().map(|s| s.graphemes.join("")).collect();
            assert_eq!(rebuilt, word);
            for pair in segments.windows(2) {
                assert_ne!(pair[0].kind, pair[1].kind);
            }
        }
    }

    fn pseudo_texts(word: &str) -> Vec<String> {
        let res = resource();
        let r = rules();
        let w = res.classify_word(word).unwrap();
        postprocess_vowels(assign_roles(&segment_clusters(&w), &r), &r)
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn greenland_roles() {
        // GR word-initial: G epenthesizes, R becomes the next onset; NL
        // splits into coda + onset; final ND keeps the nasal coda and drops
        // the stop.
        assert_eq!(
            pseudo_texts("GREENLAND"),
            vec!["{G|@:}", "{R|EE|N}", "{L|A|N}"]
        );
    }

    #[test]
    fn bolt_roles_epenthesize_both_finals() {
        // L cannot be a coda and is not deletable; T epenthesizes too.
        assert_eq!(pseudo_texts("BOLT"), vec!["{B|O}", "{L|@:}", "{T|@:}"]);
    }

    #[test]
    fn ford_deletes_liquid() {
        assert_eq!(pseudo_texts("FORD"), vec!["{F|O}", "{D|@:}"]);
    }

    #[test]
    fn albania_splits_ia() {
        assert_eq!(
            pseudo_texts("ALBANIA"),
            vec!["{A}", "{L|@:}", "{B|A}", "{N|I}", "{A}"]
        );
    }

    #[test]
    fn no_split_rule_is_identity() {
        // EE has no split rule.
        assert_eq!(pseudo_texts("BEE"), vec!["{B|EE}"]);
    }

    #[test]
    fn golden_greenland() {
        let res = resource();
        let out = transliterate_symbolic(&res.classify_word("GREENLAND").unwrap(), &rules(), &res)
            .unwrap();
        let tokens = crate::phonology::serialize_pronunciation(&out).unwrap();
        assert_eq!(
            tokens,
            vec!["g", "aa", "k", "3", ".", "l", "i", "ng", "4", ".", "l", "aa", "n", "4"]
        );
    }

    #[test]
    fn golden_bolt() {
        let res = resource();
        let out =
            transliterate_symbolic(&res.classify_word("BOLT").unwrap(), &rules(), &res).unwrap();
        let tokens = crate::phonology::serialize_pronunciation(&out).unwrap();
        assert_eq!(
            tokens,
            vec!["b", "o", "1", ".", "j", "i", "5", ".", "d", "a", "k", "6"]
        );
    }

    #[test]
    fn golden_ford() {
        let res = resource();
        let out =
            transliterate_symbolic(&res.classify_word("FORD").unwrap(), &rules(), &res).unwrap();
        let tokens = crate::phonology::serialize_pronunciation(&out).unwrap();
        assert_eq!(tokens, vec!["f", "u", "k", "1", ".", "d", "a", "k", "6"]);
    }

    #[test]
    fn golden_albania() {
        let res = resource();
        let out =
            transliterate_symbolic(&res.classify_word("ALBANIA").unwrap(), &rules(), &res).unwrap();
        let tokens = crate::phonology::serialize_pronunciation(&out).unwrap();
        assert_eq!(
            tokens,
            vec![
                "aa", "3", ".", "j", "i", "5", ".", "b", "aa", "1", ".", "n", "ei", "4", ".", "aa",
                "3"
            ]
        );
    }

    #[test]
    fn outputs_validate_and_are_deterministic() {
        let res = resource();
        let r = rules();
        for word in ["GREENLAND", "BOLT", "FORD", "ALBANIA", "QQXJV", "AAAA", "Y"] {
            let w = res.classify_word(word).unwrap();
            let a = transliterate_symbolic(&w, &r, &res).unwrap();
            let b = transliterate_symbolic(&w, &r, &res).unwrap();
            assert_eq!(a, b);
            assert!(
                crate::phonology::validate(&a, &res).is_empty(),
                "symbolic output for {word} failed validation"
            );
        }
    }

    #[test]
    fn deletable_liquid_never_surfaces() {
        let res = resource();
        let r = rules();
        // R leading a coda-side cluster: the R grapheme must not reach any
        // pseudo-syllable unit.
        for word in ["FORD", "PORT", "MARBLE", "CARD"] {
            let w = res.classify_word(word).unwrap();
            let seq = postprocess_vowels(assign_roles(&segment_clusters(&w), &r), &r);
            let has_r = seq.iter().any(|s| {
                s.onset
                    .iter()
                    .chain(&s.nucleus)
                    .chain(&s.coda)
                    .any(|g| g == "R")
            });
            assert!(!has_r, "R survived role assignment in {word}");
        }
    }

    #[test]
    fn missing_catchall_reports_gap() {
        let res = resource();
        let r = RuleSet::parse("[g2p]\nO|B|*|* -> b\n[tones]\n*|*|* -> 1\n").unwrap();
        let err = transliterate_symbolic(&res.classify_word("BA").unwrap(), &r, &res).unwrap_err();
        assert!(matches!(err, RuleError::RuleGap(_)));
    }

    #[test]
    fn disabled_rules_are_skipped() {
        let r = RuleSet::parse("[g2p]\n! O|B|*|* -> x\nO|B|*|* -> b\n").unwrap();
        assert_eq!(r.g2p.len(), 2);
        assert!(!r.g2p[0].enabled);
        let out = r.g2p_lookup(Role::Onset, "B", "#", "#").unwrap();
        assert_eq!(out, ["b"]);
    }
}
