//! Edit-distance scoring of transliteration output: token and string error
//! rates, plus syllable-level and onset/nucleus/coda/tone error analysis.
//!
//! Alignment uses unit costs with a fixed tie-break (match, then
//! substitution, then deletion, then insertion), so every rate is exactly
//! reproducible. Sub-syllabic rates are computed only over aligned syllable
//! pairs whose structures have the same number of units, which approximates
//! the true unit error rates; hypothesis syllables that do not parse are
//! excluded there (they already count as syllable errors).

use std::fmt;

use thiserror::Error;

use crate::phonology::{parse_pronunciation, LanguageResource, Role, SYLLABLE_DELIMITER};

/// One alignment operation, with indices into the reference and hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match { reference: usize, hypothesis: usize },
    Substitution { reference: usize, hypothesis: usize },
    Deletion { reference: usize },
    Insertion { hypothesis: usize },
}

/// A minimal-cost alignment; replaying `ops` transforms the reference into
/// the hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub ops: Vec<EditOp>,
    pub cost: usize,
}

impl Alignment {
    pub fn substitutions(&self) -> usize {
        self.count(|op| matches!(op, EditOp::Substitution { .. }))
    }

    pub fn deletions(&self) -> usize {
        self.count(|op| matches!(op, EditOp::Deletion { .. }))
    }

    pub fn insertions(&self) -> usize {
        self.count(|op| matches!(op, EditOp::Insertion { .. }))
    }

    fn count(&self, pred: impl Fn(&EditOp) -> bool) -> usize {
        self.ops.iter().filter(|op| pred(op)).count()
    }
}

/// Minimal-cost alignment with unit costs. On equal total cost the backtrace
/// prefers match over substitution over deletion over insertion.
pub fn align<T: Eq>(reference: &[T], hypothesis: &[T]) -> Alignment {
    let n = reference.len();
    let m = hypothesis.len();
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = dp[i - 1][j] + 1;
            let ins = dp[i][j - 1] + 1;
            dp[i][j] = sub.min(del).min(ins);
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i][j];
        if i > 0 && j > 0 {
            let equal = reference[i - 1] == hypothesis[j - 1];
            if dp[i - 1][j - 1] + usize::from(!equal) == here {
                ops.push(if equal {
                    EditOp::Match {
                        reference: i - 1,
                        hypothesis: j - 1,
                    }
                } else {
                    EditOp::Substitution {
                        reference: i - 1,
                        hypothesis: j - 1,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[i - 1][j] + 1 == here {
            ops.push(EditOp::Deletion { reference: i - 1 });
            i -= 1;
            continue;
        }
        ops.push(EditOp::Insertion { hypothesis: j - 1 });
        j -= 1;
    }
    ops.reverse();
    Alignment {
        ops,
        cost: dp[n][m],
    }
}

/// An error count over a denominator; the rate is `errors / total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateCount {
    pub errors: u64,
    pub total: u64,
}

impl RateCount {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.errors as f64 / self.total as f64
        }
    }

    fn add(&mut self, errors: u64, total: u64) {
        self.errors += errors;
        self.total += total;
    }
}

impl fmt::Display for RateCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} ({}/{})", self.rate(), self.errors, self.total)
    }
}

/// Every rate the scorer produces, with the counts backing each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoreReport {
    pub ter: RateCount,
    pub ser: RateCount,
    pub syllable_er: RateCount,
    pub onset_er: RateCount,
    pub nucleus_er: RateCount,
    pub coda_er: RateCount,
    pub tone_er: RateCount,
}

impl ScoreReport {
    pub fn metrics(&self) -> [(&'static str, RateCount); 7] {
        [
            ("ter", self.ter),
            ("ser", self.ser),
            ("syllable_er", self.syllable_er),
            ("onset_er", self.onset_er),
            ("nucleus_er", self.nucleus_er),
            ("coda_er", self.coda_er),
            ("tone_er", self.tone_er),
        ]
    }

    /// Machine-readable lines `metric<TAB>value<TAB>numer<TAB>denom`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (name, rc) in self.metrics() {
            out.push_str(&format!(
                "{name}\t{:.6}\t{}\t{}\n",
                rc.rate(),
                rc.errors,
                rc.total
            ));
        }
        out
    }

    /// Human-readable summary table.
    pub fn summary_table(&self) -> String {
        let mut out = String::from("metric        rate     errors/total\n");
        for (name, rc) in self.metrics() {
            out.push_str(&format!(
                "{name:<12}  {:>6.2}%  {}/{}\n",
                rc.rate() * 100.0,
                rc.errors,
                rc.total
            ));
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty test set")]
    EmptyTestSet,
}

/// A scored (reference, hypothesis) token pair.
pub type TokenPair = (Vec<String>, Vec<String>);

/// Token error rate: edit errors over reference tokens, summed over pairs.
/// Tokens include phonemes, tone numerals, and syllable delimiters.
pub fn token_error_rate(pairs: &[TokenPair]) -> Result<RateCount, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyTestSet);
    }
    let mut rc = RateCount::default();
    for (reference, hypothesis) in pairs {
        let alignment = align(reference, hypothesis);
        rc.add(alignment.cost as u64, reference.len() as u64);
    }
    Ok(rc)
}

/// String error rate: the fraction of pairs with any error at all.
pub fn string_error_rate(pairs: &[TokenPair]) -> Result<RateCount, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyTestSet);
    }
    let mut rc = RateCount::default();
    for (reference, hypothesis) in pairs {
        let alignment = align(reference, hypothesis);
        rc.add(u64::from(alignment.cost > 0), 1);
    }
    Ok(rc)
}

/// Split a token stream into per-syllable chunks at the delimiter. Empty
/// chunks from stray delimiters are kept so they score as errors.
pub fn syllable_chunks(tokens: &[String]) -> Vec<Vec<String>> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let mut chunks = vec![Vec::new()];
    for t in tokens {
        if t == SYLLABLE_DELIMITER {
            chunks.push(Vec::new());
        } else {
            chunks.last_mut().unwrap().push(t.clone());
        }
    }
    chunks
}

fn syllable_tokens(tokens: &[String]) -> Vec<String> {
    syllable_chunks(tokens)
        .into_iter()
        .map(|chunk| chunk.join(" "))
        .collect()
}

/// Syllable error rate: each syllable (its full phoneme and tone content) is
/// one token, and the rate is the token error rate over those sequences.
pub fn syllable_error_rate(pairs: &[TokenPair]) -> Result<RateCount, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyTestSet);
    }
    let mut rc = RateCount::default();
    for (reference, hypothesis) in pairs {
        let r = syllable_tokens(reference);
        let h = syllable_tokens(hypothesis);
        let alignment = align(&r, &h);
        rc.add(alignment.cost as u64, r.len() as u64);
    }
    Ok(rc)
}

/// Onset/nucleus/coda/tone error rates over aligned syllable pairs with the
/// same number of sub-syllabic units.
///
/// For each role the denominator counts only reference syllables possessing
/// that role; the tone is always compared. Hypothesis syllables that fail to
/// parse are excluded entirely.
pub fn subsyllabic_error_rates(
    pairs: &[TokenPair],
    resource: &LanguageResource,
) -> Result<(RateCount, RateCount, RateCount, RateCount), MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyTestSet);
    }
    let mut onset = RateCount::default();
    let mut nucleus = RateCount::default();
    let mut coda = RateCount::default();
    let mut tone = RateCount::default();
    for (reference, hypothesis) in pairs {
        let r_chunks = syllable_chunks(reference);
        let h_chunks = syllable_chunks(hypothesis);
        let r_tokens: Vec<String> = r_chunks.iter().map(|c| c.join(" ")).collect();
        let h_tokens: Vec<String> = h_chunks.iter().map(|c| c.join(" ")).collect();
        let alignment = align(&r_tokens, &h_tokens);
        for op in &alignment.ops {
            let (ri, hi) = match op {
                EditOp::Match {
                    reference,
                    hypothesis,
                }
                | EditOp::Substitution {
                    reference,
                    hypothesis,
                } => (*reference, *hypothesis),
                _ => continue,
            };
            let Ok(r_syl) = parse_pronunciation(&r_chunks[ri], resource) else {
                continue;
            };
            let Ok(h_syl) = parse_pronunciation(&h_chunks[hi], resource) else {
                continue;
            };
            let r_syl = &r_syl.syllables[0];
            let h_syl = &h_syl.syllables[0];
            if r_syl.structure().unit_count() != h_syl.structure().unit_count() {
                continue;
            }
            tone.add(u64::from(r_syl.tone != h_syl.tone), 1);
            for (role, rc) in [
                (Role::Onset, &mut onset),
                (Role::Nucleus, &mut nucleus),
                (Role::Coda, &mut coda),
            ] {
                let r_unit = match role {
                    Role::Onset => &r_syl.onset,
                    Role::Nucleus => &r_syl.nucleus,
                    Role::Coda => &r_syl.coda,
                };
                if r_unit.is_empty() {
                    continue;
                }
                let h_unit = match role {
                    Role::Onset => &h_syl.onset,
                    Role::Nucleus => &h_syl.nucleus,
                    Role::Coda => &h_syl.coda,
                };
                rc.add(u64::from(r_unit != h_unit), 1);
            }
        }
    }
    Ok((onset, nucleus, coda, tone))
}

/// Compute the full report for a set of pairs.
pub fn score_pairs(
    pairs: &[TokenPair],
    resource: &LanguageResource,
) -> Result<ScoreReport, MetricsError> {
    let (onset_er, nucleus_er, coda_er, tone_er) = subsyllabic_error_rates(pairs, resource)?;
    Ok(ScoreReport {
        ter: token_error_rate(pairs)?,
        ser: string_error_rate(pairs)?,
        syllable_er: syllable_error_rate(pairs)?,
        onset_er,
        nucleus_er,
        coda_er,
        tone_er,
    })
}
