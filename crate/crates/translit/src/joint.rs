//! Joint grapheme-phoneme n-gram baseline.
//!
//! Words and pronunciations are segmented into cosegments carrying a few
//! source letters and a few target tokens at once; an n-gram model over
//! cosegment sequences then handles alignment and mapping in one pass.
//! Decoding concatenates the token sides of the best cosegment path whose
//! grapheme sides spell the input. No phonological checks are applied
//! anywhere, which is exactly what this baseline is here to demonstrate:
//! its outputs can and do come out structurally invalid.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::phonology::SourceWord;

/// A few source letters paired with a few target tokens; at least one side
/// is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cosegment {
    pub graphemes: Vec<char>,
    pub tokens: Vec<String>,
}

impl Cosegment {
    fn size(&self) -> usize {
        self.graphemes.len() + self.tokens.len()
    }

    pub fn encode(&self) -> String {
        let graphemes: String = self.graphemes.iter().collect();
        format!("{}={}", graphemes, self.tokens.join(" "))
    }

    pub fn decode(text: &str) -> Option<Cosegment> {
        let (graphemes, tokens) = text.split_once('=')?;
        Some(Cosegment {
            graphemes: graphemes.chars().collect(),
            tokens: tokens.split_whitespace().map(|s| s.to_string()).collect(),
        })
    }
}

impl fmt::Display for Cosegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

/// Size caps for one cosegment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentCaps {
    pub max_graphemes: usize,
    pub max_tokens: usize,
}

impl Default for SegmentCaps {
    fn default() -> Self {
        SegmentCaps {
            max_graphemes: 3,
            max_tokens: 4,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JointError {
    #[error("pair cannot be segmented under caps {max_graphemes}/{max_tokens}")]
    NoSegmentation {
        max_graphemes: usize,
        max_tokens: usize,
    },
    #[error("caps must be at least 1/1")]
    BadCaps,
    #[error("n-gram order must be at least 1")]
    BadOrder,
    #[error("training corpus is empty or fully unsegmentable")]
    EmptyCorpus,
    #[error("no cosegment path spells the input")]
    NoPath,
}

/// One n-gram slot: a sequence marker or a real cosegment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Begin,
    End,
    Seg(Cosegment),
}

impl Slot {
    pub fn encode(&self) -> String {
        match self {
            Slot::Begin => "<s>".to_string(),
            Slot::End => "</s>".to_string(),
            Slot::Seg(c) => c.encode(),
        }
    }

    pub fn decode(text: &str) -> Option<Slot> {
        match text {
            "<s>" => Some(Slot::Begin),
            "</s>" => Some(Slot::End),
            other => Cosegment::decode(other).map(Slot::Seg),
        }
    }
}

/// N-gram counts over cosegment sequences with shorten-by-one back-off.
#[derive(Debug, Clone, PartialEq)]
pub struct JointNgramModel {
    order: usize,
    caps: SegmentCaps,
    /// (history, next) observation counts, history length = order - 1.
    counts: BTreeMap<(Vec<Slot>, Slot), u64>,
    /// Pair counts at every history suffix length, for back-off.
    backoff_counts: BTreeMap<(Vec<Slot>, Slot), u64>,
    /// Totals per history suffix of every length.
    context_totals: BTreeMap<Vec<Slot>, u64>,
    vocabulary: Vec<Cosegment>,
}

impl JointNgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn caps(&self) -> SegmentCaps {
        self.caps
    }

    /// All cosegments seen in training, in sorted order.
    pub fn vocabulary(&self) -> &[Cosegment] {
        &self.vocabulary
    }

    /// Full-history n-gram counts, the persisted representation.
    pub fn entries(&self) -> impl Iterator<Item = (&(Vec<Slot>, Slot), &u64)> {
        self.counts.iter()
    }

    pub fn from_parts(
        order: usize,
        caps: SegmentCaps,
        counts: BTreeMap<(Vec<Slot>, Slot), u64>,
    ) -> Result<Self, JointError> {
        if order < 1 {
            return Err(JointError::BadOrder);
        }
        let mut model = JointNgramModel {
            order,
            caps,
            counts: BTreeMap::new(),
            backoff_counts: BTreeMap::new(),
            context_totals: BTreeMap::new(),
            vocabulary: Vec::new(),
        };
        let mut vocab = std::collections::BTreeSet::new();
        for ((history, next), count) in counts {
            if let Slot::Seg(c) = &next {
                vocab.insert(c.clone());
            }
            model.add_counts(&history, &next, count);
        }
        model.vocabulary = vocab.into_iter().collect();
        Ok(model)
    }

    fn add_counts(&mut self, history: &[Slot], next: &Slot, count: u64) {
        *self
            .counts
            .entry((history.to_vec(), next.clone()))
            .or_insert(0) += count;
        for start in 0..=history.len() {
            let suffix = history[start..].to_vec();
            *self
                .backoff_counts
                .entry((suffix.clone(), next.clone()))
                .or_insert(0) += count;
            *self.context_totals.entry(suffix).or_insert(0) += count;
        }
    }

    /// `p(next | history)` with shorten-by-one back-off: the longest history
    /// suffix with a count for `next` wins; unseen everywhere gets an
    /// add-one-style floor.
    pub fn probability(&self, history: &[Slot], next: &Slot) -> f64 {
        for start in 0..=history.len() {
            let suffix = &history[start..];
            let pair_count = self
                .backoff_counts
                .get(&(suffix.to_vec(), next.clone()))
                .copied()
                .unwrap_or(0);
            if pair_count > 0 {
                let total = self.context_totals[suffix];
                return pair_count as f64 / total as f64;
            }
        }
        1.0 / self.floor_denominator() as f64
    }

    fn floor_denominator(&self) -> u64 {
        let unigram_total = self.context_totals.get(&Vec::new()).copied().unwrap_or(0);
        unigram_total + self.vocabulary.len() as u64 + 2
    }
}

/// Every candidate cosegment of one (word, tokens) pair within the caps.
fn candidate_cosegments(
    graphemes: &[char],
    tokens: &[String],
    caps: SegmentCaps,
) -> Vec<Cosegment> {
    let mut set = std::collections::BTreeSet::new();
    for gs in 0..graphemes.len() {
        for gl in 0..=caps.max_graphemes.min(graphemes.len() - gs) {
            for ts in 0..tokens.len() {
                for tl in 0..=caps.max_tokens.min(tokens.len() - ts) {
                    if gl + tl == 0 {
                        continue;
                    }
                    set.insert(Cosegment {
                        graphemes: graphemes[gs..gs + gl].to_vec(),
                        tokens: tokens[ts..ts + tl].to_vec(),
                    });
                }
            }
        }
    }
    // Zero-length slices at every position collapse to the same cosegments,
    // plus the pure one-sided pieces starting at the very ends.
    for gl in 1..=caps.max_graphemes.min(graphemes.len()) {
        for gs in 0..=graphemes.len() - gl {
            set.insert(Cosegment {
                graphemes: graphemes[gs..gs + gl].to_vec(),
                tokens: Vec::new(),
            });
        }
    }
    for tl in 1..=caps.max_tokens.min(tokens.len()) {
        for ts in 0..=tokens.len() - tl {
            set.insert(Cosegment {
                graphemes: Vec::new(),
                tokens: tokens[ts..ts + tl].to_vec(),
            });
        }
    }
    set.into_iter().collect()
}

/// One hard-EM iteration trace entry: the chosen segmentation and its exact
/// likelihood under the distribution that chose it.
#[derive(Debug, Clone)]
pub struct EmIteration {
    pub segmentation: Vec<Cosegment>,
    pub likelihood: BigRational,
}

/// Monotone segmentation of one pair by hard EM over cosegment unigrams.
///
/// Starting from a uniform distribution over all in-pair candidates, each
/// iteration picks the maximum-likelihood monotone segmentation (ties prefer
/// shorter cosegments from the left, then lexicographic content) and
/// re-estimates unigram frequencies from it, stopping at a fixed point.
pub fn derive_cosegments(
    word: &SourceWord,
    tokens: &[String],
    caps: SegmentCaps,
) -> Result<Vec<Cosegment>, JointError> {
    Ok(derive_cosegments_traced(word, tokens, caps)?
        .last()
        .expect("at least one EM iteration")
        .segmentation
        .clone())
}

pub fn derive_cosegments_traced(
    word: &SourceWord,
    tokens: &[String],
    caps: SegmentCaps,
) -> Result<Vec<EmIteration>, JointError> {
    if caps.max_graphemes < 1 || caps.max_tokens < 1 {
        return Err(JointError::BadCaps);
    }
    let graphemes: Vec<char> = word.graphemes().iter().map(|g| g.symbol).collect();
    let pair = PairIndex::build(&graphemes, tokens, caps);
    let uniform_exact = BigRational::new(
        BigInt::one(),
        BigInt::from(pair.candidates.len() as u64 + 1),
    );
    let uniform = 1.0 / (pair.candidates.len() as f64 + 1.0);
    let mut weights: Vec<f64> = vec![uniform; pair.candidates.len()];
    let mut exact_weights: Vec<BigRational> = vec![uniform_exact; pair.candidates.len()];
    let mut trace: Vec<EmIteration> = Vec::new();
    // Hard EM converges in very few steps; the cap only guards degenerate
    // oscillation between equal-likelihood segmentations.
    for _ in 0..10 {
        let chosen = pair
            .best_segmentation(&weights)
            .ok_or(JointError::NoSegmentation {
                max_graphemes: caps.max_graphemes,
                max_tokens: caps.max_tokens,
            })?;
        let segmentation: Vec<Cosegment> = chosen
            .iter()
            .map(|&id| pair.candidates[id as usize].clone())
            .collect();
        let likelihood: BigRational = chosen
            .iter()
            .map(|&id| exact_weights[id as usize].clone())
            .product();
        let done = trace
            .last()
            .is_some_and(|prev: &EmIteration| prev.segmentation == segmentation);
        trace.push(EmIteration {
            segmentation,
            likelihood,
        });
        if done {
            break;
        }
        // M-step: relative frequencies from the chosen segmentation.
        let total = chosen.len() as u64;
        let mut counts: Vec<u64> = vec![0; pair.candidates.len()];
        for &id in &chosen {
            counts[id as usize] += 1;
        }
        weights = counts
            .iter()
            .map(|&n| if n == 0 { 0.0 } else { n as f64 / total as f64 })
            .collect();
        exact_weights = counts
            .iter()
            .map(|&n| BigRational::new(BigInt::from(n), BigInt::from(total)))
            .collect();
    }
    Ok(trace)
}

/// Candidate cosegments of one pair, indexed so the segmentation DP can run
/// on integer ids.
struct PairIndex {
    candidates: Vec<Cosegment>,
    /// Tie-break rank per candidate: ascending (size, grapheme count,
    /// graphemes, tokens); smaller rank is preferred.
    rank: Vec<u32>,
    /// Candidate id per (i, j, di, dj) slice of the pair.
    grid: Vec<u32>,
    n: usize,
    m: usize,
    caps: SegmentCaps,
}

const NO_CANDIDATE: u32 = u32::MAX;

impl PairIndex {
    fn build(graphemes: &[char], tokens: &[String], caps: SegmentCaps) -> PairIndex {
        let candidates = candidate_cosegments(graphemes, tokens, caps);
        let id_of: BTreeMap<&Cosegment, u32> = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i as u32))
            .collect();
        let mut order: Vec<u32> = (0..candidates.len() as u32).collect();
        order.sort_by_key(|&id| {
            let c = &candidates[id as usize];
            (
                c.size(),
                c.graphemes.len(),
                c.graphemes.clone(),
                c.tokens.clone(),
            )
        });
        let mut rank = vec![0u32; candidates.len()];
        for (r, &id) in order.iter().enumerate() {
            rank[id as usize] = r as u32;
        }
        let (n, m) = (graphemes.len(), tokens.len());
        let stride = (caps.max_graphemes + 1) * (caps.max_tokens + 1);
        let mut grid = vec![NO_CANDIDATE; (n + 1) * (m + 1) * stride];
        for i in 0..=n {
            for j in 0..=m {
                for di in 0..=caps.max_graphemes.min(n - i) {
                    for dj in 0..=caps.max_tokens.min(m - j) {
                        if di + dj == 0 {
                            continue;
                        }
                        let seg = Cosegment {
                            graphemes: graphemes[i..i + di].to_vec(),
                            tokens: tokens[j..j + dj].to_vec(),
                        };
                        let idx = ((i * (m + 1) + j) * stride) + di * (caps.max_tokens + 1) + dj;
                        grid[idx] = id_of[&seg];
                    }
                }
            }
        }
        PairIndex {
            candidates,
            rank,
            grid,
            n,
            m,
            caps,
        }
    }

    fn candidate_at(&self, i: usize, j: usize, di: usize, dj: usize) -> u32 {
        let stride = (self.caps.max_graphemes + 1) * (self.caps.max_tokens + 1);
        self.grid[(i * (self.m + 1) + j) * stride + di * (self.caps.max_tokens + 1) + dj]
    }

    /// Maximum-likelihood monotone segmentation under the given unigram
    /// weights. Ties prefer, from the left, the smaller cosegment by rank.
    fn best_segmentation(&self, weights: &[f64]) -> Option<Vec<u32>> {
        struct Cell {
            score: f64,
            key: Vec<u32>,
            back: Option<(usize, usize, u32)>,
        }
        let (n, m) = (self.n, self.m);
        let mut best: Vec<Option<Cell>> = (0..(n + 1) * (m + 1)).map(|_| None).collect();
        best[0] = Some(Cell {
            score: 0.0,
            key: Vec::new(),
            back: None,
        });
        for i in 0..=n {
            for j in 0..=m {
                let at = i * (m + 1) + j;
                let Some(cell) = &best[at] else { continue };
                let (score, key) = (cell.score, cell.key.clone());
                for di in 0..=self.caps.max_graphemes.min(n - i) {
                    for dj in 0..=self.caps.max_tokens.min(m - j) {
                        if di + dj == 0 {
                            continue;
                        }
                        let id = self.candidate_at(i, j, di, dj);
                        if id == NO_CANDIDATE {
                            continue;
                        }
                        let w = weights[id as usize];
                        if w <= 0.0 {
                            continue;
                        }
                        let new_score = score + w.ln();
                        let target = (i + di) * (m + 1) + (j + dj);
                        let replace = match &best[target] {
                            None => true,
                            Some(old) => {
                                new_score > old.score
                                    || (new_score == old.score && {
                                        let mut new_key = key.clone();
                                        new_key.push(self.rank[id as usize]);
                                        new_key < old.key
                                    })
                            }
                        };
                        if replace {
                            let mut new_key = key.clone();
                            new_key.push(self.rank[id as usize]);
                            best[target] = Some(Cell {
                                score: new_score,
                                key: new_key,
                                back: Some((i, j, id)),
                            });
                        }
                    }
                }
            }
        }
        best[n * (m + 1) + m].as_ref()?;
        let mut path = Vec::new();
        let (mut i, mut j) = (n, m);
        while let Some((pi, pj, id)) = best[i * (m + 1) + j].as_ref().unwrap().back {
            path.push(id);
            i = pi;
            j = pj;
        }
        path.reverse();
        Some(path)
    }
}

/// Train the n-gram model; pairs that cannot be segmented are skipped and
/// their indices reported.
pub fn train_joint(
    pairs: &[(SourceWord, Vec<String>)],
    order: usize,
    caps: SegmentCaps,
) -> Result<(JointNgramModel, Vec<usize>), JointError> {
    if order < 1 {
        return Err(JointError::BadOrder);
    }
    let mut skipped = Vec::new();
    let mut counts: BTreeMap<(Vec<Slot>, Slot), u64> = BTreeMap::new();
    let mut any = false;
    for (idx, (word, tokens)) in pairs.iter().enumerate() {
        let segmentation = match derive_cosegments(word, tokens, caps) {
            Ok(s) => s,
            Err(_) => {
                skipped.push(idx);
                continue;
            }
        };
        any = true;
        let mut sequence: Vec<Slot> = vec![Slot::Begin; order - 1];
        sequence.extend(segmentation.into_iter().map(Slot::Seg));
        sequence.push(Slot::End);
        for pos in (order - 1)..sequence.len() {
            let history = sequence[pos + 1 - order..pos].to_vec();
            *counts.entry((history, sequence[pos].clone())).or_insert(0) += 1;
        }
    }
    if !any {
        return Err(JointError::EmptyCorpus);
    }
    let model = JointNgramModel::from_parts(order, caps, counts)?;
    Ok((model, skipped))
}

/// How many consecutive grapheme-less cosegments a decode path may use.
/// Keeps the lattice finite while still allowing tone and delimiter
/// insertions between letters.
pub const MAX_EPSILON_RUN: usize = 3;

/// Viterbi over all cosegment paths whose grapheme sides concatenate to the
/// input, emitting the concatenated token sides. Deliberately applies no
/// phonological validation.
pub fn decode_joint(word: &SourceWord, model: &JointNgramModel) -> Result<Vec<String>, JointError> {
    decode_joint_path(word, model).map(|path| path.into_iter().flat_map(|c| c.tokens).collect())
}

/// Interned lookup tables for decoding: cosegments become ids (in vocabulary
/// order, so id comparison is content comparison), and back-off counts are
/// keyed by id sequences.
struct DecodeIndex {
    /// Pair counts per history suffix, keyed by slot ids.
    pair: std::collections::HashMap<Vec<u32>, std::collections::HashMap<u32, u64>>,
    totals: std::collections::HashMap<Vec<u32>, u64>,
    floor: f64,
    begin_id: u32,
    end_id: u32,
}

impl DecodeIndex {
    fn build(model: &JointNgramModel) -> DecodeIndex {
        let begin_id = model.vocabulary.len() as u32;
        let end_id = begin_id + 1;
        let id_of = |slot: &Slot| -> u32 {
            match slot {
                Slot::Begin => begin_id,
                Slot::End => end_id,
                Slot::Seg(c) => model
                    .vocabulary
                    .binary_search(c)
                    .expect("slot from the model is in its vocabulary")
                    as u32,
            }
        };
        let mut pair: std::collections::HashMap<Vec<u32>, std::collections::HashMap<u32, u64>> =
            std::collections::HashMap::new();
        let mut totals: std::collections::HashMap<Vec<u32>, u64> = std::collections::HashMap::new();
        for ((history, next), count) in &model.backoff_counts {
            let ids: Vec<u32> = history.iter().map(&id_of).collect();
            *pair.entry(ids).or_default().entry(id_of(next)).or_insert(0) += count;
        }
        for (history, count) in &model.context_totals {
            let ids: Vec<u32> = history.iter().map(&id_of).collect();
            totals.insert(ids, *count);
        }
        DecodeIndex {
            pair,
            totals,
            floor: 1.0 / model.floor_denominator() as f64,
            begin_id,
            end_id,
        }
    }

    fn probability(&self, history: &[u32], next: u32) -> f64 {
        for start in 0..=history.len() {
            let suffix = &history[start..];
            if let Some(count) = self.pair.get(suffix).and_then(|m| m.get(&next)) {
                return *count as f64 / self.totals[suffix] as f64;
            }
        }
        self.floor
    }
}

/// As [`decode_joint`], but returns the winning cosegment path itself.
pub fn decode_joint_path(
    word: &SourceWord,
    model: &JointNgramModel,
) -> Result<Vec<Cosegment>, JointError> {
    let graphemes: Vec<char> = word.graphemes().iter().map(|g| g.symbol).collect();
    let n = graphemes.len();
    let hist_len = model.order() - 1;
    let index = DecodeIndex::build(model);
    // Arcs usable at each position, plus the grapheme-less ones.
    let arcs_at: Vec<Vec<u32>> = (0..=n)
        .map(|pos| {
            model
                .vocabulary
                .iter()
                .enumerate()
                .filter(|(_, seg)| {
                    let g = seg.graphemes.len();
                    g > 0 && pos + g <= n && graphemes[pos..pos + g] == seg.graphemes[..]
                })
                .map(|(id, _)| id as u32)
                .collect()
        })
        .collect();
    let eps_arcs: Vec<u32> = model
        .vocabulary
        .iter()
        .enumerate()
        .filter(|(_, seg)| seg.graphemes.is_empty())
        .map(|(id, _)| id as u32)
        .collect();

    // Paths are id sequences; vocabulary order makes id order equal content
    // order, so the path tie-break matches cosegment comparison. Layers are
    // processed in (position, epsilon run) order, which every transition
    // strictly increases, so each state is finalized exactly once.
    type Entry = (f64, Vec<u32>);
    type Layer = std::collections::HashMap<Vec<u32>, Entry>;
    let mut layers: Vec<Layer> = vec![Layer::new(); (n + 1) * (MAX_EPSILON_RUN + 1)];
    let layer_of = |pos: usize, eps: usize| pos * (MAX_EPSILON_RUN + 1) + eps;
    layers[0].insert(vec![index.begin_id; hist_len], (0.0, Vec::new()));
    let mut best_final: Option<Entry> = None;
    for pos in 0..=n {
        for eps_run in 0..=MAX_EPSILON_RUN {
            let layer = std::mem::take(&mut layers[layer_of(pos, eps_run)]);
            // Iterate states in sorted order so equal-score relaxations are
            // applied deterministically.
            let mut states: Vec<(Vec<u32>, Entry)> = layer.into_iter().collect();
            states.sort_by(|a, b| a.0.cmp(&b.0));
            for (history, (score, path)) in states {
                if pos == n {
                    let end_score = score + index.probability(&history, index.end_id).ln();
                    let better = match &best_final {
                        None => true,
                        Some((s, p)) => end_score > *s || (end_score == *s && path < *p),
                    };
                    if better {
                        best_final = Some((end_score, path.clone()));
                    }
                }
                let eps_iter = if eps_run < MAX_EPSILON_RUN {
                    &eps_arcs[..]
                } else {
                    &[]
                };
                for &id in arcs_at[pos].iter().chain(eps_iter) {
                    let g = model.vocabulary[id as usize].graphemes.len();
                    let new_score = score + index.probability(&history, id).ln();
                    let mut new_history = history.clone();
                    new_history.push(id);
                    if new_history.len() > hist_len {
                        new_history.remove(0);
                    }
                    let target = layer_of(pos + g, if g == 0 { eps_run + 1 } else { 0 });
                    match layers[target].get_mut(&new_history) {
                        None => {
                            let mut new_path = path.clone();
                            new_path.push(id);
                            layers[target].insert(new_history, (new_score, new_path));
                        }
                        Some((s, p)) => {
                            let tie = new_score == *s && {
                                let mut new_path = path.clone();
                                new_path.push(id);
                                new_path < *p
                            };
                            if new_score > *s || tie {
                                let mut new_path = path.clone();
                                new_path.push(id);
                                *s = new_score;
                                *p = new_path;
                            }
                        }
                    }
                }
            }
        }
    }
    let (_, path) = best_final.ok_or(JointError::NoPath)?;
    Ok(path
        .into_iter()
        .map(|id| model.vocabulary[id as usize].clone())
        .collect())
}
