//! Lexical tone assignment from tonal and phonetic context.
//!
//! Each syllable's tone is scored by `p(t_k | t_{k-1}, phones_k, t_{k+1})`,
//! estimated by relative frequency at the most specific level with data and
//! backed off by dropping the following tone, then the preceding tone, then
//! shrinking the phoneme context from (onset, nucleus, coda) to (nucleus,
//! coda) to (coda), with a uniform floor for contexts never seen at all.
//! Because each factor couples three consecutive tones, the global product is
//! maximized exactly by dynamic programming over pairs of adjacent tones.
//! Scores are exact rationals so ties break identically everywhere: toward
//! the smaller tone sequence.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::phonology::{Pronunciation, Syllable, Tone};

/// Tone slot in a conditioning context: a real tone or the sequence edge.
pub const BOUNDARY_TONE: u8 = 0;

type ToneCounts = Vec<u64>;

/// Counts of tone observations at every back-off level, immutable once
/// trained. Keys encode phoneme groups joined by spaces with `-` for an
/// absent unit, and `0` for the boundary tone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ToneModel {
    tone_count: u8,
    full: BTreeMap<(u8, String, u8), ToneCounts>,
    no_next: BTreeMap<(u8, String), ToneCounts>,
    phones_only: BTreeMap<String, ToneCounts>,
    nucleus_coda: BTreeMap<String, ToneCounts>,
    coda_only: BTreeMap<String, ToneCounts>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ToneError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("syllable {syllable} of training pronunciation {entry} has no tone")]
    MissingTone { entry: usize, syllable: usize },
    #[error("tone model was trained with zero tones")]
    NoTones,
}

fn unit_key(unit: &[String]) -> String {
    if unit.is_empty() {
        "-".to_string()
    } else {
        unit.join(" ")
    }
}

/// Full phoneme context key `onset|nucleus|coda`.
pub fn phones_key(syl: &Syllable) -> String {
    format!(
        "{}|{}|{}",
        unit_key(&syl.onset),
        unit_key(&syl.nucleus),
        unit_key(&syl.coda)
    )
}

fn nucleus_coda_key(syl: &Syllable) -> String {
    format!("{}|{}", unit_key(&syl.nucleus), unit_key(&syl.coda))
}

fn coda_key(syl: &Syllable) -> String {
    unit_key(&syl.coda)
}

impl ToneModel {
    pub fn tone_count(&self) -> u8 {
        self.tone_count
    }

    /// Conditional factor `p(t | t_prev, phones, t_next)` as an exact
    /// rational: relative frequency at the most specific level with any
    /// data, or the uniform floor when every level is empty.
    pub fn factor(&self, t_prev: u8, syl: &Syllable, t_next: u8, tone: Tone) -> BigRational {
        let idx = (tone.0 - 1) as usize;
        let full_key = phones_key(syl);
        let levels: [Option<&ToneCounts>; 5] = [
            self.full.get(&(t_prev, full_key.clone(), t_next)),
            self.no_next.get(&(t_prev, full_key.clone())),
            self.phones_only.get(&full_key),
            self.nucleus_coda.get(&nucleus_coda_key(syl)),
            self.coda_only.get(&coda_key(syl)),
        ];
        for counts in levels.into_iter().flatten() {
            let total: u64 = counts.iter().sum();
            if total > 0 {
                return BigRational::new(BigInt::from(counts[idx]), BigInt::from(total));
            }
        }
        BigRational::new(BigInt::one(), BigInt::from(self.tone_count))
    }

    /// Raw counts for one full-context entry, for inspection and tests.
    pub fn full_counts(&self, t_prev: u8, phones: &str, t_next: u8) -> Option<&[u64]> {
        self.full
            .get(&(t_prev, phones.to_string(), t_next))
            .map(|c| c.as_slice())
    }

    pub fn coda_counts(&self, coda: &str) -> Option<&[u64]> {
        self.coda_only.get(coda).map(|c| c.as_slice())
    }

    pub fn entries_full(&self) -> impl Iterator<Item = (&(u8, String, u8), &ToneCounts)> {
        self.full.iter()
    }

    pub fn entries_no_next(&self) -> impl Iterator<Item = (&(u8, String), &ToneCounts)> {
        self.no_next.iter()
    }

    pub fn entries_phones(&self) -> impl Iterator<Item = (&String, &ToneCounts)> {
        self.phones_only.iter()
    }

    pub fn entries_nucleus_coda(&self) -> impl Iterator<Item = (&String, &ToneCounts)> {
        self.nucleus_coda.iter()
    }

    pub fn entries_coda(&self) -> impl Iterator<Item = (&String, &ToneCounts)> {
        self.coda_only.iter()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        tone_count: u8,
        full: BTreeMap<(u8, String, u8), ToneCounts>,
        no_next: BTreeMap<(u8, String), ToneCounts>,
        phones_only: BTreeMap<String, ToneCounts>,
        nucleus_coda: BTreeMap<String, ToneCounts>,
        coda_only: BTreeMap<String, ToneCounts>,
    ) -> Self {
        ToneModel {
            tone_count,
            full,
            no_next,
            phones_only,
            nucleus_coda,
            coda_only,
        }
    }
}

/// Tally tone observations from finalized pronunciations.
pub fn train_tone_model(corpus: &[Pronunciation], tone_count: u8) -> Result<ToneModel, ToneError> {
    if tone_count == 0 {
        return Err(ToneError::NoTones);
    }
    if corpus.is_empty() {
        return Err(ToneError::EmptyCorpus);
    }
    let mut model = ToneModel {
        tone_count,
        ..ToneModel::default()
    };
    for (entry, pron) in corpus.iter().enumerate() {
        let tones: Vec<u8> = pron
            .syllables
            .iter()
            .enumerate()
            .map(|(syllable, s)| {
                s.tone
                    .map(|t| t.0)
                    .ok_or(ToneError::MissingTone { entry, syllable })
            })
            .collect::<Result<_, _>>()?;
        for (k, syl) in pron.syllables.iter().enumerate() {
            let t_prev = if k == 0 { BOUNDARY_TONE } else { tones[k - 1] };
            let t_next = if k + 1 == tones.len() {
                BOUNDARY_TONE
            } else {
                tones[k + 1]
            };
            let idx = (tones[k] - 1) as usize;
            let key = phones_key(syl);
            let zero = || vec![0u64; tone_count as usize];
            model
                .full
                .entry((t_prev, key.clone(), t_next))
                .or_insert_with(zero)[idx] += 1;
            model
                .no_next
                .entry((t_prev, key.clone()))
                .or_insert_with(zero)[idx] += 1;
            model.phones_only.entry(key).or_insert_with(zero)[idx] += 1;
            model
                .nucleus_coda
                .entry(nucleus_coda_key(syl))
                .or_insert_with(zero)[idx] += 1;
            model.coda_only.entry(coda_key(syl)).or_insert_with(zero)[idx] += 1;
        }
    }
    Ok(model)
}

/// Assign one tone per syllable, maximizing the product of contextual
/// factors exactly.
///
/// The factor at position k needs `t_{k+1}`, so the DP state is the pair
/// `(t_k, t_{k+1})` and factor k is charged when `t_{k+1}` is chosen; both
/// sequence edges use the boundary tone. Ties prefer the lexicographically
/// smaller tone sequence. Existing tones on the input are ignored.
pub fn assign_tones(p: &Pronunciation, model: &ToneModel) -> Vec<Tone> {
    let k_total = p.syllables.len();
    let t = model.tone_count();
    if k_total == 0 || t == 0 {
        return Vec::new();
    }
    // Path = tones chosen so far; score = product of charged factors.
    let mut states: Vec<(u8, BigRational, Vec<u8>)> = (1..=t)
        .map(|t1| (t1, BigRational::one(), vec![t1]))
        .collect();
    for k in 0..k_total {
        let syl = &p.syllables[k];
        let t_prev_of = |path: &[u8]| {
            if k == 0 {
                BOUNDARY_TONE
            } else {
                path[k - 1]
            }
        };
        let next_options: Vec<u8> = if k + 1 == k_total {
            vec![BOUNDARY_TONE]
        } else {
            (1..=t).collect()
        };
        let mut next_states: BTreeMap<(u8, u8), (BigRational, Vec<u8>)> = BTreeMap::new();
        for (t_k, score, path) in &states {
            let t_prev = t_prev_of(path);
            for &t_next in &next_options {
                // Zero factors still produce legal sequences; keeping them
                // makes the argmax total, matching enumeration.
                let f = model.factor(t_prev, syl, t_next, Tone(*t_k));
                let new_score = score * f;
                let mut new_path = path.clone();
                if t_next != BOUNDARY_TONE {
                    new_path.push(t_next);
                }
                let entry_key = (*t_k, t_next);
                match next_states.get_mut(&entry_key) {
                    None => {
                        next_states.insert(entry_key, (new_score, new_path));
                    }
                    Some((best_score, best_path)) => {
                        if new_score > *best_score
                            || (new_score == *best_score && new_path < *best_path)
                        {
                            *best_score = new_score;
                            *best_path = new_path;
                        }
                    }
                }
            }
        }
        states = next_states
            .into_iter()
            .map(|((_, t_next), (score, path))| {
                let cur = if t_next == BOUNDARY_TONE {
                    *path.last().unwrap()
                } else {
                    t_next
                };
                (cur, score, path)
            })
            .collect();
    }
    let best = states
        .into_iter()
        .map(|(_, score, path)| (score, path))
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)))
        .expect("at least one tone sequence exists");
    best.1.into_iter().map(Tone).collect()
}

/// Convenience: a copy of `p` with tones replaced by the model's argmax.
pub fn retone(p: &Pronunciation, model: &ToneModel) -> Pronunciation {
    let tones = assign_tones(p, model);
    let mut q = p.clone();
    for (syl, tone) in q.syllables.iter_mut().zip(tones) {
        syl.tone = Some(tone);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn syl(onset: &[&str], nucleus: &[&str], coda: &[&str], tone: Option<u8>) -> Syllable {
        Syllable::new(
            onset.iter().map(|s| s.to_string()).collect(),
            nucleus.iter().map(|s| s.to_string()).collect(),
            coda.iter().map(|s| s.to_string()).collect(),
            tone.map(Tone),
        )
    }

    fn pron(syllables: Vec<Syllable>) -> Pronunciation {
        Pronunciation::new(syllables)
    }

    #[test]
    fn k_coda_learns_tone_six() {
        let corpus = vec![
            pron(vec![syl(&["g"], &["aa"], &["k"], Some(6))]),
            pron(vec![syl(&["d"], &["a"], &["k"], Some(6))]),
            pron(vec![syl(&["l"], &["i"], &[], Some(4))]),
        ];
        let model = train_tone_model(&corpus, 6).unwrap();
        let toneless = pron(vec![syl(&["b"], &["o"], &["k"], None)]);
        assert_eq!(assign_tones(&toneless, &model), vec![Tone(6)]);
    }

    #[test]
    fn checked_coda_contexts_never_count_open_tones() {
        // Mirror of the loanword pattern: p/t/k codas only carry 1, 3 or 6.
        let corpus = vec![
            pron(vec![syl(&["g"], &["aa"], &["k"], Some(3))]),
            pron(vec![syl(&["f"], &["u"], &["k"], Some(1))]),
            pron(vec![syl(&["d"], &["a"], &["k"], Some(6))]),
            pron(vec![syl(&["b"], &["o"], &["t"], Some(3))]),
            pron(vec![syl(&["s"], &["a"], &["p"], Some(6))]),
            pron(vec![syl(&["l"], &["i"], &[], Some(4))]),
        ];
        let model = train_tone_model(&corpus, 6).unwrap();
        for coda in ["k", "t", "p"] {
            if let Some(counts) = model.coda_counts(coda) {
                assert_eq!(counts[1], 0, "tone 2 counted for coda {coda}");
                assert_eq!(counts[3], 0, "tone 4 counted for coda {coda}");
                assert_eq!(counts[4], 0, "tone 5 counted for coda {coda}");
            }
        }
    }

    #[test]
    fn tallies_match_recount() {
        let corpus = vec![
            pron(vec![
                syl(&["d"], &["i"], &[], Some(2)),
                syl(&["s"], &["@"], &[], Some(4)),
            ]),
            pron(vec![syl(&["d"], &["i"], &[], Some(2))]),
        ];
        let model = train_tone_model(&corpus, 6).unwrap();
        // (prev=boundary, d|i|-, next=4) observed once with tone 2.
        let counts = model.full_counts(0, "d|i|-", 4).unwrap();
        assert_eq!(counts[1], 1);
        // (prev=boundary, d|i|-, next=boundary) observed once with tone 2.
        let counts = model.full_counts(0, "d|i|-", 0).unwrap();
        assert_eq!(counts[1], 1);
        // coda-only "-" level saw tones 2, 4, 2.
        let counts = model.coda_counts("-").unwrap();
        assert_eq!(counts[1], 2);
        assert_eq!(counts[3], 1);
    }

    #[test]
    fn training_requires_tones() {
        let corpus = vec![pron(vec![syl(&[], &["a"], &[], None)])];
        assert!(matches!(
            train_tone_model(&corpus, 6),
            Err(ToneError::MissingTone { .. })
        ));
        assert_eq!(train_tone_model(&[], 6), Err(ToneError::EmptyCorpus));
    }

    #[test]
    fn single_syllable_uses_boundary_factors() {
        let corpus = vec![
            pron(vec![syl(&["l"], &["a"], &[], Some(5))]),
            pron(vec![
                syl(&["l"], &["a"], &[], Some(2)),
                syl(&["m"], &["o"], &[], Some(1)),
            ]),
        ];
        let model = train_tone_model(&corpus, 6).unwrap();
        // Standalone "l a" was seen with tone 5 in the boundary-boundary
        // context; the tone-2 observation has a following syllable.
        let toneless = pron(vec![syl(&["l"], &["a"], &[], None)]);
        assert_eq!(assign_tones(&toneless, &model), vec![Tone(5)]);
    }

    #[test]
    fn memorizes_own_tones() {
        let original = pron(vec![
            syl(&["g"], &["aa"], &["k"], Some(3)),
            syl(&["l"], &["i"], &["ng"], Some(4)),
            syl(&["l"], &["aa"], &["n"], Some(4)),
        ]);
        let model = train_tone_model(&[original.clone()], 6).unwrap();
        let toneless = pron(
            original
                .syllables
                .iter()
                .map(|s| Syllable::new(s.onset.clone(), s.nucleus.clone(), s.coda.clone(), None))
                .collect(),
        );
        let toned = retone(&toneless, &model);
        assert_eq!(toned, original);
    }

    #[test]
    fn unseen_context_floors_to_smallest_tone() {
        let corpus = vec![pron(vec![syl(&["l"], &["a"], &[], Some(5))])];
        let model = train_tone_model(&corpus, 6).unwrap();
        let toneless = pron(vec![syl(&["z"], &["uu"], &["q"], None)]);
        assert_eq!(assign_tones(&toneless, &model), vec![Tone(1)]);
    }

    fn random_model(rng: &mut ChaCha8Rng, tone_count: u8) -> ToneModel {
        // Random counts over a tiny phoneme vocabulary at every level.
        let phones = ["a|b|-", "c|d|e", "-|d|-"];
        let nc = ["b|-", "d|e", "d|-"];
        let cd = ["-", "e"];
        let mut full = BTreeMap::new();
        let mut no_next = BTreeMap::new();
        let mut phones_only = BTreeMap::new();
        let mut nucleus_coda = BTreeMap::new();
        let mut coda_only = BTreeMap::new();
        let counts = |rng: &mut ChaCha8Rng| -> Vec<u64> {
            (0..tone_count).map(|_| rng.random_range(0..4)).collect()
        };
        for p in phones {
            for prev in 0..=tone_count {
                for next in 0..=tone_count {
                    if rng.random_bool(0.3) {
                        full.insert((prev, p.to_string(), next), counts(rng));
                    }
                }
                if rng.random_bool(0.4) {
                    no_next.insert((prev, p.to_string()), counts(rng));
                }
            }
            if rng.random_bool(0.5) {
                phones_only.insert(p.to_string(), counts(rng));
            }
        }
        for p in nc {
            if rng.random_bool(0.5) {
                nucleus_coda.insert(p.to_string(), counts(rng));
            }
        }
        for p in cd {
            if rng.random_bool(0.5) {
                coda_only.insert(p.to_string(), counts(rng));
            }
        }
        ToneModel::from_parts(
            tone_count,
            full,
            no_next,
            phones_only,
            nucleus_coda,
            coda_only,
        )
    }

    fn random_toneless(rng: &mut ChaCha8Rng, k: usize) -> Pronunciation {
        let shapes = [
            (vec!["a"], vec!["b"], vec![]),
            (vec!["c"], vec!["d"], vec!["e"]),
            (vec![], vec!["d"], vec![]),
        ];
        pron(
            (0..k)
                .map(|_| {
                    let (o, n, c) = shapes[rng.random_range(0..shapes.len())].clone();
                    syl(&o, &n, &c, None)
                })
                .collect(),
        )
    }

    /// Oracle: score every tone sequence by multiplying factors in order,
    /// then take the maximum, ties to the smaller sequence.
    fn exhaustive_best(p: &Pronunciation, model: &ToneModel) -> Vec<Tone> {
        let k_total = p.syllables.len();
        let t = model.tone_count();
        let mut best: Option<(BigRational, Vec<u8>)> = None;
        let total = (t as u64).pow(k_total as u32);
        for mut code in 0..total {
            let mut tones = Vec::with_capacity(k_total);
            for _ in 0..k_total {
                tones.push((code % t as u64) as u8 + 1);
                code /= t as u64;
            }
            let mut score = BigRational::one();
            for k in 0..k_total {
                let t_prev = if k == 0 { BOUNDARY_TONE } else { tones[k - 1] };
                let t_next = if k + 1 == k_total {
                    BOUNDARY_TONE
                } else {
                    tones[k + 1]
                };
                score *= model.factor(t_prev, &p.syllables[k], t_next, Tone(tones[k]));
            }
            let better = match &best {
                None => true,
                Some((bs, bt)) => score > *bs || (score == *bs && tones < *bt),
            };
            if better {
                best = Some((score, tones));
            }
        }
        best.unwrap().1.into_iter().map(Tone).collect()
    }

    #[test]
    fn dp_matches_enumeration_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(20260809);
        for trial in 0..60 {
            let model = random_model(&mut rng, 6);
            let k = rng.random_range(1..=4);
            let p = random_toneless(&mut rng, k);
            let dp = assign_tones(&p, &model);
            let brute = exhaustive_best(&p, &model);
            assert_eq!(dp, brute, "trial {trial}, K={k}");
        }
    }
}
