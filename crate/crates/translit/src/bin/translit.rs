//! Command-line front end: corpus validation, training, transliteration,
//! scoring, label inspection, and the corpus-size experiment runner.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible plan.

use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use translit::corpus::{load_corpus, CorpusError};
use translit::experiment::{
    run_experiment, Engine, EngineSettings, ExperimentError, ExperimentPlan,
};
use translit::joint::{decode_joint, train_joint, SegmentCaps};
use translit::metrics::{score_pairs, TokenPair};
use translit::model_io::{read_model, write_model, JointBundle, StoredModel};
use translit::phonology::{serialize_pronunciation, LanguageResource};
use translit::pipeline::{best_labeling, train_pipeline, transliterate_proposed, PipelineConfig};
use translit::symbolic::{transliterate_symbolic, RuleSet};

#[derive(Parser)]
#[command(
    name = "translit",
    version,
    about = "Phonology-constrained transliteration tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineFlags {
    /// Label context window (letters each side = N/2)
    #[arg(long, default_value_t = 4)]
    window: usize,
    /// Smoothing weight decay in (0, 1)
    #[arg(long, default_value_t = 0.4)]
    lambda: f64,
    /// Beam width for label decoding
    #[arg(long, default_value_t = 8)]
    beam: usize,
    /// Train on every valid labeling instead of the best one
    #[arg(long)]
    all_labelings: bool,
}

impl PipelineFlags {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            window: self.window,
            lambda: self.lambda,
            beam: self.beam,
            use_all_labelings: self.all_labelings,
        }
    }
}

#[derive(Args)]
struct JointFlags {
    /// N-gram order of the joint baseline
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Most source letters per cosegment
    #[arg(long, default_value_t = 3)]
    max_graphemes: usize,
    /// Most target tokens per cosegment
    #[arg(long, default_value_t = 4)]
    max_tokens: usize,
}

impl JointFlags {
    fn caps(&self) -> SegmentCaps {
        SegmentCaps {
            max_graphemes: self.max_graphemes,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a statistical model and write it to a file
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        resource: PathBuf,
        /// Output model file
        #[arg(long)]
        model: PathBuf,
        /// proposed or joint (the symbolic engine is not trained)
        #[arg(long, default_value = "proposed")]
        engine: String,
        #[command(flatten)]
        pipeline: PipelineFlags,
        #[command(flatten)]
        joint: JointFlags,
    },
    /// Transliterate words given as arguments (or on stdin)
    Transliterate {
        #[arg(long)]
        resource: PathBuf,
        /// proposed, symbolic, or joint
        #[arg(long, default_value = "proposed")]
        engine: String,
        /// Model file (proposed and joint engines)
        #[arg(long)]
        model: Option<PathBuf>,
        /// Ruleset file (symbolic engine)
        #[arg(long)]
        ruleset: Option<PathBuf>,
        words: Vec<String>,
    },
    /// Score hypothesis transliterations against a reference corpus
    Evaluate {
        /// Reference corpus (word TAB target tokens)
        #[arg(long)]
        refs: PathBuf,
        /// Hypotheses (word TAB tokens), aligned line by line with the refs
        #[arg(long)]
        hyps: PathBuf,
        #[arg(long)]
        resource: PathBuf,
    },
    /// Print the best ground-truth labeling of every corpus entry
    DeriveLabels {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        resource: PathBuf,
    },
    /// Run a corpus-size sweep over one or more engines
    Experiment {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        resource: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Comma-separated engines, e.g. proposed,joint,symbolic
        #[arg(long, default_value = "proposed,joint")]
        engines: String,
        /// Ruleset file; required when the symbolic engine runs
        #[arg(long)]
        ruleset: Option<PathBuf>,
        /// Directory for cells.tsv and means.tsv
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the plan's seed
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        pipeline: PipelineFlags,
        #[command(flatten)]
        joint: JointFlags,
    },
    /// Check a corpus file against a resource, reporting every bad line
    ValidateCorpus {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        resource: PathBuf,
    },
}

enum AppError {
    Usage(String),
    Data(String),
    Infeasible(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Data(m) | AppError::Infeasible(m) => m,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> AppError {
    AppError::Data(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help and version requests as "errors" too; those
            // should stay success.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

type DecodeFn = Box<dyn Fn(&str) -> Result<Vec<String>, AppError>>;

fn load_resource(path: &Path) -> Result<LanguageResource, AppError> {
    LanguageResource::load(path).map_err(data_err)
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Train {
            corpus,
            resource,
            model,
            engine,
            pipeline,
            joint,
        } => {
            let res = load_resource(&resource)?;
            let entries = load_corpus(&corpus, &res).map_err(data_err)?;
            let stored = match engine.as_str() {
                "proposed" => {
                    let trained =
                        train_pipeline(&entries, &res, &pipeline.config()).map_err(data_err)?;
                    for skip in &trained.skipped {
                        eprintln!(
                            "skipped entry {} ({}): no valid labeling",
                            skip.index, skip.word
                        );
                    }
                    StoredModel::Pipeline(Box::new(trained))
                }
                "joint" => {
                    let pairs: Vec<_> = entries
                        .iter()
                        .map(|e| (e.word.clone(), e.target_tokens.clone()))
                        .collect();
                    let (trained, skipped) =
                        train_joint(&pairs, joint.order, joint.caps()).map_err(data_err)?;
                    for idx in &skipped {
                        eprintln!("skipped entry {idx}: unsegmentable under caps");
                    }
                    StoredModel::Joint(JointBundle {
                        resource_name: res.name.clone(),
                        model: trained,
                        skipped,
                    })
                }
                "symbolic" => {
                    return Err(AppError::Usage(
                        "the symbolic engine uses a ruleset file, not a trained model".into(),
                    ))
                }
                other => return Err(AppError::Usage(format!("unknown engine `{other}`"))),
            };
            write_model(&model, &stored).map_err(data_err)?;
            println!("wrote {}", model.display());
            Ok(())
        }
        Command::Transliterate {
            resource,
            engine,
            model,
            ruleset,
            words,
        } => {
            let res = load_resource(&resource)?;
            let words = if words.is_empty() {
                read_stdin_words()?
            } else {
                words
            };
            let decode: DecodeFn = match engine.as_str() {
                "proposed" => {
                    let path = model.as_ref().ok_or_else(|| {
                        AppError::Usage("--model is required for the proposed engine".into())
                    })?;
                    let StoredModel::Pipeline(m) = read_model(path).map_err(data_err)? else {
                        return Err(AppError::Data("model file is not a pipeline model".into()));
                    };
                    let res = res.clone();
                    Box::new(move |word| {
                        let w = res.classify_word(word).map_err(data_err)?;
                        let p = transliterate_proposed(&w, None, &m, &res).map_err(data_err)?;
                        serialize_pronunciation(&p).map_err(data_err)
                    })
                }
                "joint" => {
                    let path = model.as_ref().ok_or_else(|| {
                        AppError::Usage("--model is required for the joint engine".into())
                    })?;
                    let StoredModel::Joint(b) = read_model(path).map_err(data_err)? else {
                        return Err(AppError::Data("model file is not a joint model".into()));
                    };
                    let res = res.clone();
                    Box::new(move |word| {
                        let w = res.classify_word(word).map_err(data_err)?;
                        decode_joint(&w, &b.model).map_err(data_err)
                    })
                }
                "symbolic" => {
                    let path = ruleset.as_ref().ok_or_else(|| {
                        AppError::Usage("--ruleset is required for the symbolic engine".into())
                    })?;
                    let rules = RuleSet::load(path).map_err(data_err)?;
                    let res = res.clone();
                    Box::new(move |word| {
                        let w = res.classify_word(word).map_err(data_err)?;
                        let p = transliterate_symbolic(&w, &rules, &res).map_err(data_err)?;
                        serialize_pronunciation(&p).map_err(data_err)
                    })
                }
                other => return Err(AppError::Usage(format!("unknown engine `{other}`"))),
            };
            for word in &words {
                let tokens = decode(word)?;
                println!("{}\t{}", word.to_uppercase(), tokens.join(" "));
            }
            Ok(())
        }
        Command::Evaluate {
            refs,
            hyps,
            resource,
        } => {
            let res = load_resource(&resource)?;
            let references = load_corpus(&refs, &res).map_err(data_err)?;
            let hyp_text = std::fs::read_to_string(&hyps).map_err(data_err)?;
            let mut pairs: Vec<TokenPair> = Vec::new();
            let hyp_lines: Vec<&str> = hyp_text
                .lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
                .collect();
            if hyp_lines.len() != references.len() {
                return Err(AppError::Data(format!(
                    "{} hypotheses for {} references",
                    hyp_lines.len(),
                    references.len()
                )));
            }
            for (entry, line) in references.iter().zip(hyp_lines) {
                let (word, tokens) = line.split_once('\t').ok_or_else(|| {
                    AppError::Data(format!("hypothesis line `{line}` is not WORD<TAB>tokens"))
                })?;
                if !word.eq_ignore_ascii_case(&entry.word.text()) {
                    return Err(AppError::Data(format!(
                        "hypothesis word `{word}` does not match reference `{}`",
                        entry.word
                    )));
                }
                pairs.push((
                    entry.target_tokens.clone(),
                    tokens.split_whitespace().map(|t| t.to_string()).collect(),
                ));
            }
            let report = score_pairs(&pairs, &res).map_err(data_err)?;
            println!("{}", report.summary_table());
            print!("{}", report.to_tsv());
            Ok(())
        }
        Command::DeriveLabels { corpus, resource } => {
            let res = load_resource(&resource)?;
            let entries = load_corpus(&corpus, &res).map_err(data_err)?;
            for entry in &entries {
                match best_labeling(&entry.word, &entry.target, &res) {
                    Some(labels) => {
                        let codes: Vec<&str> = labels.iter().map(|l| l.code()).collect();
                        println!("{}\t{}", entry.word, codes.join(","));
                    }
                    None => eprintln!("{}: no valid labeling", entry.word),
                }
            }
            Ok(())
        }
        Command::Experiment {
            corpus,
            resource,
            plan,
            engines,
            ruleset,
            out,
            seed,
            pipeline,
            joint,
        } => {
            let res = load_resource(&resource)?;
            let entries = load_corpus(&corpus, &res).map_err(data_err)?;
            let mut plan = ExperimentPlan::load(&plan).map_err(experiment_err)?;
            if let Some(seed) = seed {
                plan.seed = seed;
            }
            let engines: Vec<Engine> = engines
                .split(',')
                .map(|e| e.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(AppError::Usage)?;
            let rules = match &ruleset {
                Some(path) => Some(RuleSet::load(path).map_err(data_err)?),
                None => None,
            };
            let settings = EngineSettings {
                pipeline: pipeline.config(),
                joint_order: joint.order,
                joint_caps: joint.caps(),
            };
            let report = run_experiment(&entries, &plan, &engines, &res, rules.as_ref(), &settings)
                .map_err(experiment_err)?;
            print!("{}", report.means_tsv());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(data_err)?;
                std::fs::write(dir.join("cells.tsv"), report.cells_tsv()).map_err(data_err)?;
                std::fs::write(dir.join("means.tsv"), report.means_tsv()).map_err(data_err)?;
                println!("wrote {}", dir.join("cells.tsv").display());
                println!("wrote {}", dir.join("means.tsv").display());
            }
            Ok(())
        }
        Command::ValidateCorpus { corpus, resource } => {
            let res = load_resource(&resource)?;
            match load_corpus(&corpus, &res) {
                Ok(entries) => {
                    println!("{} entries ok", entries.len());
                    Ok(())
                }
                Err(CorpusError::Invalid(issues)) => {
                    for issue in &issues {
                        println!("{issue}");
                    }
                    Err(AppError::Data(format!("{} invalid line(s)", issues.len())))
                }
                Err(e) => Err(data_err(e)),
            }
        }
    }
}

fn experiment_err(e: ExperimentError) -> AppError {
    match e {
        ExperimentError::Infeasible(m) => AppError::Infeasible(m),
        ExperimentError::RulesetRequired => AppError::Usage(e.to_string()),
        other => AppError::Data(other.to_string()),
    }
}

fn read_stdin_words() -> Result<Vec<String>, AppError> {
    let stdin = std::io::stdin();
    let mut words = Vec::new();
    for line in stdin.lock().lines() {
        let line = line.map_err(data_err)?;
        for word in line.split_whitespace() {
            words.push(word.to_string());
        }
    }
    Ok(words)
}
