//! Corpus-size sweep: train every engine on growing sub-corpora across
//! several seeded repartitions and score each cell on a held-out test set.
//!
//! Two split protocols are supported. With `test_size` a fixed test set is
//! carved out once and shared by every size and repartition; sub-corpora are
//! then drawn from the remaining pool and split into train/development by
//! `train_fraction`. With `test_fraction` each (size, repartition) cell
//! samples its own sub-corpus and splits it test-first, cross-validation
//! style. Everything is driven by one seed, so reports are reproducible to
//! the byte.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::CorpusEntry;
use crate::joint::{decode_joint, train_joint, SegmentCaps};
use crate::metrics::{score_pairs, ScoreReport, TokenPair};
use crate::phonology::{serialize_pronunciation, LanguageResource};
use crate::pipeline::{train_pipeline, transliterate_proposed, PipelineConfig};
use crate::symbolic::{transliterate_symbolic, RuleSet};

/// Which transliteration engine a cell uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Engine {
    Proposed,
    Symbolic,
    Joint,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Proposed => write!(f, "proposed"),
            Engine::Symbolic => write!(f, "symbolic"),
            Engine::Joint => write!(f, "joint"),
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Engine::Proposed),
            "symbolic" => Ok(Engine::Symbolic),
            "joint" => Ok(Engine::Joint),
            other => Err(format!("unknown engine `{other}`")),
        }
    }
}

/// The sweep description, usually loaded from a plan file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub sizes: Vec<usize>,
    pub train_fraction: f64,
    pub repartitions: u32,
    pub seed: u64,
    /// Fixed shared test set size; mutually exclusive with `test_fraction`.
    pub test_size: Option<usize>,
    /// Per-cell test fraction of the sub-corpus.
    pub test_fraction: Option<f64>,
    /// Grid-select lambda and window on the development split.
    pub tune: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            sizes: vec![100, 200, 300, 400, 500],
            train_fraction: 0.75,
            repartitions: 4,
            seed: 42,
            test_size: None,
            test_fraction: Some(0.2),
            tune: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("infeasible plan: {0}")]
    Infeasible(String),
    #[error("plan file line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("the symbolic engine needs a ruleset")]
    RulesetRequired,
    #[error("training failed: {0}")]
    Train(String),
    #[error("io error: {0}")]
    Io(String),
}

impl ExperimentPlan {
    pub fn load(path: &Path) -> Result<ExperimentPlan, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// Parse `key value` lines: `sizes`, `train_fraction`, `repartitions`,
    /// `seed`, `test_size` or `test_fraction`, `tune`.
    pub fn parse(text: &str) -> Result<ExperimentPlan, ExperimentError> {
        let mut plan = ExperimentPlan {
            test_fraction: None,
            ..ExperimentPlan::default()
        };
        let mut saw_test = false;
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
            let (key, value) =
                line.split_once(char::is_whitespace)
                    .ok_or_else(|| ExperimentError::Malformed {
                        line: line_no,
                        message: "expected `key value`".to_string(),
                    })?;
            let value = value.trim();
            let bad = |message: String| ExperimentError::Malformed {
                line: line_no,
                message,
            };
            match key {
                "sizes" => {
                    plan.sizes = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|v| !v.is_empty())
                        .map(|v| v.parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad(format!("bad sizes `{value}`")))?;
                }
                "train_fraction" => {
                    plan.train_fraction = value
                        .parse()
                        .map_err(|_| bad("bad train_fraction".into()))?;
                }
                "repartitions" => {
                    plan.repartitions =
                        value.parse().map_err(|_| bad("bad repartitions".into()))?;
                }
                "seed" => plan.seed = value.parse().map_err(|_| bad("bad seed".into()))?,
                "test_size" => {
                    plan.test_size = Some(value.parse().map_err(|_| bad("bad test_size".into()))?);
                    saw_test = true;
                }
                "test_fraction" => {
                    plan.test_fraction =
                        Some(value.parse().map_err(|_| bad("bad test_fraction".into()))?);
                    saw_test = true;
                }
                "tune" => plan.tune = value.parse().map_err(|_| bad("bad tune".into()))?,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        if !saw_test {
            plan.test_fraction = Some(0.2);
        }
        Ok(plan)
    }

    fn check(&self, corpus_len: usize) -> Result<(), ExperimentError> {
        let fail = |m: String| Err(ExperimentError::Infeasible(m));
        if self.sizes.is_empty() {
            return fail("no sizes declared".into());
        }
        if self.repartitions == 0 {
            return fail("repartitions must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail(format!(
                "train_fraction {} outside (0,1)",
                self.train_fraction
            ));
        }
        match (self.test_size, self.test_fraction) {
            (Some(_), Some(_)) => {
                return fail("declare either test_size or test_fraction, not both".into())
            }
            (None, None) => return fail("no test split declared".into()),
            (Some(n), None) => {
                if n == 0 || n >= corpus_len {
                    return fail(format!("test_size {n} leaves no training pool"));
                }
                let pool = corpus_len - n;
                for &size in &self.sizes {
                    if size > pool {
                        return fail(format!("size {size} exceeds pool of {pool}"));
                    }
                }
            }
            (None, Some(f)) => {
                if !(f > 0.0 && f < 1.0) {
                    return fail(format!("test_fraction {f} outside (0,1)"));
                }
                for &size in &self.sizes {
                    if size > corpus_len {
                        return fail(format!("size {size} exceeds corpus of {corpus_len}"));
                    }
                }
            }
        }
        for &size in &self.sizes {
            if size < 2 {
                return fail(format!("size {size} is too small to split"));
            }
        }
        Ok(())
    }
}

/// Engine-specific settings shared by all cells.
#[derive(Debug, Clone)]
pub struct EngineSettings {
    pub pipeline: PipelineConfig,
    pub joint_order: usize,
    pub joint_caps: SegmentCaps,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            pipeline: PipelineConfig::default(),
            joint_order: 2,
            joint_caps: SegmentCaps::default(),
        }
    }
}

/// Scores of one (engine, size, repartition) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub engine: Engine,
    pub size: usize,
    pub repartition: u32,
    pub scores: ScoreReport,
    /// Hyperparameters actually used (differs from the settings when tuned).
    pub lambda: f64,
    pub window: usize,
}

/// Mean rates over repartitions for one (engine, size).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanReport {
    pub engine: Engine,
    pub size: usize,
    pub rates: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<CellReport>,
    pub means: Vec<MeanReport>,
}

impl ExperimentReport {
    pub fn mean_rate(&self, engine: Engine, size: usize, metric: &str) -> Option<f64> {
        self.means
            .iter()
            .find(|m| m.engine == engine && m.size == size)
            .and_then(|m| m.rates.iter().find(|(name, _)| *name == metric))
            .map(|(_, v)| *v)
    }

    /// One row per cell and metric: engine, size, repartition, metric,
    /// value, errors, total.
    pub fn cells_tsv(&self) -> String {
        let mut out = String::from("engine\tsize\trepartition\tmetric\tvalue\terrors\ttotal\n");
        for cell in &self.cells {
            for (name, rc) in cell.scores.metrics() {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{name}\t{:.6}\t{}\t{}\n",
                    cell.engine,
                    cell.size,
                    cell.repartition,
                    rc.rate(),
                    rc.errors,
                    rc.total
                ));
            }
        }
        out
    }

    /// One row per (engine, size, metric) with the mean over repartitions.
    pub fn means_tsv(&self) -> String {
        let mut out = String::from("engine\tsize\tmetric\tmean\n");
        for mean in &self.means {
            for (name, value) in &mean.rates {
                out.push_str(&format!(
                    "{}\t{}\t{name}\t{value:.6}\n",
                    mean.engine, mean.size
                ));
            }
        }
        out
    }
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

fn cell_seed(seed: u64, size: usize, repartition: u32) -> u64 {
    seed ^ (size as u64).wrapping_mul(0x9e3779b97f4a7c15)
        ^ (repartition as u64 + 1).wrapping_mul(0x85ebca6b2c2f1e87)
}

const TUNE_LAMBDAS: [f64; 3] = [0.2, 0.4, 0.6];
const TUNE_WINDOWS: [usize; 2] = [2, 4];

/// Run the full sweep. Decoding failures score as empty outputs.
pub fn run_experiment(
    corpus: &[CorpusEntry],
    plan: &ExperimentPlan,
    engines: &[Engine],
    resource: &LanguageResource,
    ruleset: Option<&RuleSet>,
    settings: &EngineSettings,
) -> Result<ExperimentReport, ExperimentError> {
    plan.check(corpus.len())?;
    if engines.contains(&Engine::Symbolic) && ruleset.is_none() {
        return Err(ExperimentError::RulesetRequired);
    }
    // Carve the shared test set first when the plan declares one.
    let mut indices: Vec<usize> = (0..corpus.len()).collect();
    let (shared_test, pool): (Vec<usize>, Vec<usize>) = match plan.test_size {
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            shuffle(&mut indices, &mut rng);
            let test = indices[..n].to_vec();
            let pool = indices[n..].to_vec();
            (test, pool)
        }
        None => (Vec::new(), indices),
    };

    let mut cells = Vec::new();
    for &size in &plan.sizes {
        for repartition in 0..plan.repartitions {
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(plan.seed, size, repartition));
            let mut drawn = pool.clone();
            shuffle(&mut drawn, &mut rng);
            let (test_idx, rest): (Vec<usize>, Vec<usize>) = match plan.test_fraction {
                Some(f) => {
                    let sample = &drawn[..size];
                    let test_count = ((size as f64) * f).round().max(1.0) as usize;
                    if test_count >= size {
                        return Err(ExperimentError::Infeasible(format!(
                            "test fraction {f} consumes the whole sample of {size}"
                        )));
                    }
                    (sample[..test_count].to_vec(), sample[test_count..].to_vec())
                }
                None => (shared_test.clone(), drawn[..size].to_vec()),
            };
            let train_count = ((rest.len() as f64) * plan.train_fraction).round() as usize;
            let train_count = train_count.clamp(1, rest.len().saturating_sub(1).max(1));
            let (train_idx, dev_idx) = rest.split_at(train_count.min(rest.len()));
            debug_assert!(train_idx.iter().all(|i| !test_idx.contains(i)));

            let train: Vec<CorpusEntry> = train_idx.iter().map(|&i| corpus[i].clone()).collect();
            let dev: Vec<CorpusEntry> = dev_idx.iter().map(|&i| corpus[i].clone()).collect();
            let test: Vec<CorpusEntry> = test_idx.iter().map(|&i| corpus[i].clone()).collect();

            for &engine in engines {
                let (scores, lambda, window) = run_cell(
                    engine, &train, &dev, &test, plan, resource, ruleset, settings,
                )?;
                cells.push(CellReport {
                    engine,
                    size,
                    repartition,
                    scores,
                    lambda,
                    window,
                });
            }
        }
    }

    let mut means = Vec::new();
    let mut engines_sorted = engines.to_vec();
    engines_sorted.sort();
    for &engine in &engines_sorted {
        for &size in &plan.sizes {
            let group: Vec<&CellReport> = cells
                .iter()
                .filter(|c| c.engine == engine && c.size == size)
                .collect();
            if group.is_empty() {
                continue;
            }
            let rates = group[0]
                .scores
                .metrics()
                .iter()
                .map(|(name, _)| {
                    let sum: f64 = group
                        .iter()
                        .map(|c| {
                            c.scores
                                .metrics()
                                .iter()
                                .find(|(n, _)| n == name)
                                .unwrap()
                                .1
                                .rate()
                        })
                        .sum();
                    (*name, sum / group.len() as f64)
                })
                .collect();
            means.push(MeanReport {
                engine,
                size,
                rates,
            });
        }
    }
    Ok(ExperimentReport { cells, means })
}

type CellOutcome = (ScoreReport, f64, usize);

#[allow(clippy::too_many_arguments)]
fn run_cell(
    engine: Engine,
    train: &[CorpusEntry],
    dev: &[CorpusEntry],
    test: &[CorpusEntry],
    plan: &ExperimentPlan,
    resource: &LanguageResource,
    ruleset: Option<&RuleSet>,
    settings: &EngineSettings,
) -> Result<CellOutcome, ExperimentError> {
    let score = |hyps: Vec<Vec<String>>| -> Result<ScoreReport, ExperimentError> {
        let pairs: Vec<TokenPair> = test
            .iter()
            .zip(hyps)
            .map(|(entry, hyp)| (entry.target_tokens.clone(), hyp))
            .collect();
        score_pairs(&pairs, resource).map_err(|e| ExperimentError::Train(e.to_string()))
    };
    match engine {
        Engine::Proposed => {
            let mut config = settings.pipeline.clone();
            if plan.tune && !dev.is_empty() {
                config = tune_pipeline(train, dev, resource, &config)?;
            }
            let model = train_pipeline(train, resource, &config)
                .map_err(|e| ExperimentError::Train(e.to_string()))?;
            let hyps = test
                .iter()
                .map(|entry| {
                    transliterate_proposed(
                        &entry.word,
                        entry.source_phonemes.as_ref(),
                        &model,
                        resource,
                    )
                    .ok()
                    .and_then(|p| serialize_pronunciation(&p).ok())
                    .unwrap_or_default()
                })
                .collect();
            Ok((score(hyps)?, config.lambda, config.window))
        }
        Engine::Symbolic => {
            let rules = ruleset.ok_or(ExperimentError::RulesetRequired)?;
            let hyps = test
                .iter()
                .map(|entry| {
                    transliterate_symbolic(&entry.word, rules, resource)
                        .ok()
                        .and_then(|p| serialize_pronunciation(&p).ok())
                        .unwrap_or_default()
                })
                .collect();
            Ok((score(hyps)?, 0.0, 0))
        }
        Engine::Joint => {
            let pairs: Vec<_> = train
                .iter()
                .map(|e| (e.word.clone(), e.target_tokens.clone()))
                .collect();
            let (model, _skipped) = train_joint(&pairs, settings.joint_order, settings.joint_caps)
                .map_err(|e| ExperimentError::Train(e.to_string()))?;
            let hyps = test
                .iter()
                .map(|entry| decode_joint(&entry.word, &model).unwrap_or_default())
                .collect();
            Ok((score(hyps)?, 0.0, 0))
        }
    }
}

/// Pick (lambda, window) minimizing development TER over a small fixed grid;
/// ties keep the earliest grid entry.
fn tune_pipeline(
    train: &[CorpusEntry],
    dev: &[CorpusEntry],
    resource: &LanguageResource,
    base: &PipelineConfig,
) -> Result<PipelineConfig, ExperimentError> {
    let mut best: Option<(f64, PipelineConfig)> = None;
    for &window in &TUNE_WINDOWS {
        for &lambda in &TUNE_LAMBDAS {
            let config = PipelineConfig {
                window,
                lambda,
                ..base.clone()
            };
            let Ok(model) = train_pipeline(train, resource, &config) else {
                continue;
            };
            let pairs: Vec<TokenPair> = dev
                .iter()
                .map(|entry| {
                    let hyp = transliterate_proposed(
                        &entry.word,
                        entry.source_phonemes.as_ref(),
                        &model,
                        resource,
                    )
                    .ok()
                    .and_then(|p| serialize_pronunciation(&p).ok())
                    .unwrap_or_default();
                    (entry.target_tokens.clone(), hyp)
                })
                .collect();
            let Ok(ter) = crate::metrics::token_error_rate(&pairs) else {
                continue;
            };
            let rate = ter.rate();
            if best.as_ref().is_none_or(|(b, _)| rate < *b) {
                best = Some((rate, config));
            }
        }
    }
    Ok(best.map(|(_, c)| c).unwrap_or_else(|| base.clone()))
}
