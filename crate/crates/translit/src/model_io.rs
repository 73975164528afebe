//! Plain-text model persistence.
//!
//! Models are stored as versioned sectioned text with counts verbatim, so
//! retraining with the same inputs produces byte-identical files and model
//! diffs stay reviewable. Fields are tab-separated; keys may contain spaces
//! but never tabs.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::joint::{JointNgramModel, SegmentCaps, Slot};
use crate::label_model::{ContextCounts, SmoothedNgramLabelModel};
use crate::mapping::UnitMappingModel;
use crate::phonology::Role;
use crate::pipeline::{PipelineConfig, PipelineModel, SkippedEntry};
use crate::tones::ToneModel;

const MAGIC: &str = "translit-model v1";

/// A joint baseline model plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBundle {
    pub resource_name: String,
    pub model: JointNgramModel,
    pub skipped: Vec<usize>,
}

/// Any model file the tools can produce.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredModel {
    Pipeline(Box<PipelineModel>),
    Joint(JointBundle),
}

impl StoredModel {
    pub fn resource_name(&self) -> &str {
        match self {
            StoredModel::Pipeline(m) => &m.resource_name,
            StoredModel::Joint(b) => &b.resource_name,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelIoError {
    #[error("not a model file (bad header)")]
    BadHeader,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("io error: {0}")]
    Io(String),
}

fn role_code(role: Role) -> &'static str {
    match role {
        Role::Onset => "O",
        Role::Nucleus => "N",
        Role::Coda => "Cd",
    }
}

fn parse_role(code: &str, line: usize) -> Result<Role, ModelIoError> {
    match code {
        "O" => Ok(Role::Onset),
        "N" => Ok(Role::Nucleus),
        "Cd" => Ok(Role::Coda),
        other => Err(ModelIoError::Malformed {
            line,
            message: format!("unknown role `{other}`"),
        }),
    }
}

fn counts_field(counts: &[u64]) -> String {
    counts
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_counts(field: &str, line: usize) -> Result<Vec<u64>, ModelIoError> {
    field
        .split_whitespace()
        .map(|c| {
            c.parse::<u64>().map_err(|_| ModelIoError::Malformed {
                line,
                message: format!("bad count `{c}`"),
            })
        })
        .collect()
}

/// Render a model to the file format.
pub fn save_model(model: &StoredModel) -> String {
    let mut out = String::from(MAGIC);
    out.push('\n');
    match model {
        StoredModel::Pipeline(m) => {
            out.push_str("[meta]\n");
            out.push_str("kind pipeline\n");
            out.push_str(&format!("resource {}\n", m.resource_name));
            out.push_str(&format!("window {}\n", m.config.window));
            out.push_str(&format!("lambda {}\n", m.config.lambda));
            out.push_str(&format!("beam {}\n", m.config.beam));
            out.push_str(&format!(
                "use_all_labelings {}\n",
                m.config.use_all_labelings
            ));
            out.push_str(&format!("tone_count {}\n", m.tones.tone_count()));
            for skip in &m.skipped {
                out.push_str(&format!("skipped {} {}\n", skip.index, skip.word));
            }
            out.push_str("[label_counts]\n");
            for (ctx, counts) in m.labels.context_counts() {
                out.push_str(&format!("{ctx}\t{}\n", counts_field(&counts.per_label)));
            }
            out.push_str("[map_sv]\n");
            for ((role, source, v), targets) in m.mapping.entries_sv() {
                for (target, count) in targets {
                    out.push_str(&format!(
                        "{}\t{source}\t{v}\t{target}\t{count}\n",
                        role_code(*role)
                    ));
                }
            }
            out.push_str("[map_s]\n");
            for ((role, source), targets) in m.mapping.entries_s() {
                for (target, count) in targets {
                    out.push_str(&format!(
                        "{}\t{source}\t{target}\t{count}\n",
                        role_code(*role)
                    ));
                }
            }
            out.push_str("[map_class]\n");
            for ((role, pattern), targets) in m.mapping.entries_class() {
                for (target, count) in targets {
                    out.push_str(&format!(
                        "{}\t{pattern}\t{target}\t{count}\n",
                        role_code(*role)
                    ));
                }
            }
            out.push_str("[map_role]\n");
            for (role, targets) in m.mapping.entries_role() {
                for (target, count) in targets {
                    out.push_str(&format!("{}\t{target}\t{count}\n", role_code(*role)));
                }
            }
            out.push_str("[tone_full]\n");
            for ((prev, phones, next), counts) in m.tones.entries_full() {
                out.push_str(&format!(
                    "{prev}\t{phones}\t{next}\t{}\n",
                    counts_field(counts)
                ));
            }
            out.push_str("[tone_prev]\n");
            for ((prev, phones), counts) in m.tones.entries_no_next() {
                out.push_str(&format!("{prev}\t{phones}\t{}\n", counts_field(counts)));
            }
            out.push_str("[tone_phones]\n");
            for (phones, counts) in m.tones.entries_phones() {
                out.push_str(&format!("{phones}\t{}\n", counts_field(counts)));
            }
            out.push_str("[tone_nc]\n");
            for (key, counts) in m.tones.entries_nucleus_coda() {
                out.push_str(&format!("{key}\t{}\n", counts_field(counts)));
            }
            out.push_str("[tone_cd]\n");
            for (key, counts) in m.tones.entries_coda() {
                out.push_str(&format!("{key}\t{}\n", counts_field(counts)));
            }
        }
        StoredModel::Joint(b) => {
            out.push_str("[meta]\n");
            out.push_str("kind joint\n");
            out.push_str(&format!("resource {}\n", b.resource_name));
            out.push_str(&format!("order {}\n", b.model.order()));
            out.push_str(&format!("max_graphemes {}\n", b.model.caps().max_graphemes));
            out.push_str(&format!("max_tokens {}\n", b.model.caps().max_tokens));
            for idx in &b.skipped {
                out.push_str(&format!("skipped {idx}\n"));
            }
            out.push_str("[ngram_counts]\n");
            for ((history, next), count) in b.model.entries() {
                for slot in history {
                    out.push_str(&slot.encode());
                    out.push('\t');
                }
                out.push_str(&format!("{}\t{count}\n", next.encode()));
            }
        }
    }
    out
}

pub fn write_model(path: &Path, model: &StoredModel) -> Result<(), ModelIoError> {
    std::fs::write(path, save_model(model)).map_err(|e| ModelIoError::Io(e.to_string()))
}

pub fn read_model(path: &Path) -> Result<StoredModel, ModelIoError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelIoError::Io(e.to_string()))?;
    load_model(&text)
}

struct Sections<'a> {
    meta: BTreeMap<&'a str, Vec<&'a str>>,
    rows: BTreeMap<&'a str, Vec<(usize, &'a str)>>,
}

fn split_sections(text: &str) -> Result<Sections<'_>, ModelIoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == MAGIC => {}
        _ => return Err(ModelIoError::BadHeader),
    }
    let mut meta: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut rows: BTreeMap<&str, Vec<(usize, &str)>> = BTreeMap::new();
    let mut section = "";
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = &line[1..line.len() - 1];
            rows.entry(section).or_default();
            continue;
        }
        if section == "meta" {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            meta.entry(key).or_default().push(value);
        } else if section.is_empty() {
            return Err(ModelIoError::Malformed {
                line: line_no,
                message: "content before first section".to_string(),
            });
        } else {
            rows.get_mut(section).unwrap().push((line_no, line));
        }
    }
    Ok(Sections { meta, rows })
}

fn meta_value<'a>(sections: &'a Sections<'_>, key: &str) -> Result<&'a str, ModelIoError> {
    sections
        .meta
        .get(key)
        .and_then(|v| v.first())
        .copied()
        .ok_or_else(|| ModelIoError::Missing(key.to_string()))
}

fn fields(line: &str) -> Vec<&str> {
    line.split('\t').collect()
}

fn expect_fields(line: &str, line_no: usize, n: usize) -> Result<Vec<&str>, ModelIoError> {
    let f = fields(line);
    if f.len() != n {
        return Err(ModelIoError::Malformed {
            line: line_no,
            message: format!("expected {n} fields, found {}", f.len()),
        });
    }
    Ok(f)
}

/// Parse a model file.
pub fn load_model(text: &str) -> Result<StoredModel, ModelIoError> {
    let sections = split_sections(text)?;
    let kind = meta_value(&sections, "kind")?;
    let resource_name = meta_value(&sections, "resource")?.to_string();
    match kind {
        "pipeline" => {
            load_pipeline(&sections, resource_name).map(|m| StoredModel::Pipeline(Box::new(m)))
        }
        "joint" => load_joint(&sections, resource_name).map(StoredModel::Joint),
        other => Err(ModelIoError::Malformed {
            line: 0,
            message: format!("unknown model kind `{other}`"),
        }),
    }
}

fn parse_meta<T: std::str::FromStr>(sections: &Sections<'_>, key: &str) -> Result<T, ModelIoError> {
    meta_value(sections, key)?
        .parse::<T>()
        .map_err(|_| ModelIoError::Missing(key.to_string()))
}

fn load_pipeline(
    sections: &Sections<'_>,
    resource_name: String,
) -> Result<PipelineModel, ModelIoError> {
    let config = PipelineConfig {
        window: parse_meta(sections, "window")?,
        lambda: parse_meta(sections, "lambda")?,
        beam: parse_meta(sections, "beam")?,
        use_all_labelings: parse_meta(sections, "use_all_labelings")?,
    };
    let tone_count: u8 = parse_meta(sections, "tone_count")?;
    let mut skipped = Vec::new();
    if let Some(values) = sections.meta.get("skipped") {
        for value in values {
            let (index, word) = value
                .split_once(' ')
                .ok_or_else(|| ModelIoError::Missing("skipped entry word".to_string()))?;
            skipped.push(SkippedEntry {
                index: index
                    .parse()
                    .map_err(|_| ModelIoError::Missing("skipped index".into()))?,
                word: word.to_string(),
            });
        }
    }

    let mut label_counts = BTreeMap::new();
    for (line_no, line) in section_rows(sections, "label_counts")? {
        let f = expect_fields(line, *line_no, 2)?;
        let counts = parse_counts(f[1], *line_no)?;
        if counts.len() != 5 {
            return Err(ModelIoError::Malformed {
                line: *line_no,
                message: "label counts need 5 values".to_string(),
            });
        }
        let mut per_label = [0u64; 5];
        per_label.copy_from_slice(&counts);
        label_counts.insert(f[0].to_string(), ContextCounts { per_label });
    }
    let labels = SmoothedNgramLabelModel::from_parts(config.window, config.lambda, label_counts)
        .map_err(|e| ModelIoError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;

    let mut sv = BTreeMap::new();
    for (line_no, line) in section_rows(sections, "map_sv")? {
        let f = expect_fields(line, *line_no, 5)?;
        let role = parse_role(f[0], *line_no)?;
        *sv.entry((role, f[1].to_string(), f[2].to_string()))
            .or_insert_with(BTreeMap::new)
            .entry(f[3].to_string())
            .or_insert(0) += f[4].parse::<u64>().map_err(|_| ModelIoError::Malformed {
            line: *line_no,
            message: "bad count".to_string(),
        })?;
    }
    let mut s_level = BTreeMap::new();
    let mut class_level = BTreeMap::new();
    for (name, store) in [("map_s", &mut s_level), ("map_class", &mut class_level)] {
        for (line_no, line) in section_rows(sections, name)? {
            let f = expect_fields(line, *line_no, 4)?;
            let role = parse_role(f[0], *line_no)?;
            *store
                .entry((role, f[1].to_string()))
                .or_insert_with(BTreeMap::new)
                .entry(f[2].to_string())
                .or_insert(0) += f[3].parse::<u64>().map_err(|_| ModelIoError::Malformed {
                line: *line_no,
                message: "bad count".to_string(),
            })?;
        }
    }
    let mut role_level = BTreeMap::new();
    for (line_no, line) in section_rows(sections, "map_role")? {
        let f = expect_fields(line, *line_no, 3)?;
        let role = parse_role(f[0], *line_no)?;
        *role_level
            .entry(role)
            .or_insert_with(BTreeMap::new)
            .entry(f[1].to_string())
            .or_insert(0) += f[2].parse::<u64>().map_err(|_| ModelIoError::Malformed {
            line: *line_no,
            message: "bad count".to_string(),
        })?;
    }
    let mapping = UnitMappingModel::from_parts(sv, s_level, class_level, role_level);

    let mut tone_full = BTreeMap::new();
    for (line_no, line) in section_rows(sections, "tone_full")? {
        let f = expect_fields(line, *line_no, 4)?;
        tone_full.insert(
            (
                parse_u8(f[0], *line_no)?,
                f[1].to_string(),
                parse_u8(f[2], *line_no)?,
            ),
            parse_counts(f[3], *line_no)?,
        );
    }
    let mut tone_prev = BTreeMap::new();
    for (line_no, line) in section_rows(sections, "tone_prev")? {
        let f = expect_fields(line, *line_no, 3)?;
        tone_prev.insert(
            (parse_u8(f[0], *line_no)?, f[1].to_string()),
            parse_counts(f[2], *line_no)?,
        );
    }
    let mut tone_phones = BTreeMap::new();
    let mut tone_nc = BTreeMap::new();
    let mut tone_cd = BTreeMap::new();
    for (name, store) in [
        ("tone_phones", &mut tone_phones),
        ("tone_nc", &mut tone_nc),
        ("tone_cd", &mut tone_cd),
    ] {
        for (line_no, line) in section_rows(sections, name)? {
            let f = expect_fields(line, *line_no, 2)?;
            store.insert(f[0].to_string(), parse_counts(f[1], *line_no)?);
        }
    }
    let tones = ToneModel::from_parts(
        tone_count,
        tone_full,
        tone_prev,
        tone_phones,
        tone_nc,
        tone_cd,
    );

    Ok(PipelineModel {
        resource_name,
        config,
        labels,
        mapping,
        tones,
        skipped,
    })
}

fn parse_u8(field: &str, line: usize) -> Result<u8, ModelIoError> {
    field.parse().map_err(|_| ModelIoError::Malformed {
        line,
        message: format!("bad tone slot `{field}`"),
    })
}

fn section_rows<'a>(
    sections: &'a Sections<'_>,
    name: &str,
) -> Result<&'a [(usize, &'a str)], ModelIoError> {
    sections
        .rows
        .get(name)
        .map(|v| v.as_slice())
        .ok_or_else(|| ModelIoError::Missing(format!("[{name}] section")))
}

fn load_joint(sections: &Sections<'_>, resource_name: String) -> Result<JointBundle, ModelIoError> {
    let order: usize = parse_meta(sections, "order")?;
    let caps = SegmentCaps {
        max_graphemes: parse_meta(sections, "max_graphemes")?,
        max_tokens: parse_meta(sections, "max_tokens")?,
    };
    let mut skipped = Vec::new();
    if let Some(values) = sections.meta.get("skipped") {
        for value in values {
            skipped.push(
                value
                    .parse()
                    .map_err(|_| ModelIoError::Missing("skipped index".into()))?,
            );
        }
    }
    let mut counts = BTreeMap::new();
    for (line_no, line) in section_rows(sections, "ngram_counts")? {
        let f = fields(line);
        if f.len() != order + 1 {
            return Err(ModelIoError::Malformed {
                line: *line_no,
                message: format!("expected {} fields, found {}", order + 1, f.len()),
            });
        }
        let mut history = Vec::with_capacity(order - 1);
        for slot in &f[..order - 1] {
            history.push(Slot::decode(slot).ok_or_else(|| ModelIoError::Malformed {
                line: *line_no,
                message: format!("bad slot `{slot}`"),
            })?);
        }
        let next = Slot::decode(f[order - 1]).ok_or_else(|| ModelIoError::Malformed {
            line: *line_no,
            message: format!("bad slot `{}`", f[order - 1]),
        })?;
        let count: u64 = f[order].parse().map_err(|_| ModelIoError::Malformed {
            line: *line_no,
            message: "bad count".to_string(),
        })?;
        *counts.entry((history, next)).or_insert(0) += count;
    }
    let model =
        JointNgramModel::from_parts(order, caps, counts).map_err(|e| ModelIoError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
    Ok(JointBundle {
        resource_name,
        model,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;
    use crate::joint::train_joint;
    use crate::phonology::LanguageResource;
    use crate::pipeline::train_pipeline;

    fn resource() -> LanguageResource {
        LanguageResource::parse(
            "test",
            "
[phonemes]
d O
s O
n O,Cd
i N
a N
@ N
[tones]
count 6
[grapheme_classes]
A V
B C
D C
E V
I V
L C
N C
S C
U V
Y V
[special]
epenthetic @:
max_onset 1
max_coda 1
",
        )
        .unwrap()
    }

    #[test]
    fn pipeline_model_round_trips_bytes() {
        let res = resource();
        let corpus = parse_corpus("DINA\td i 2 . n a 1\nSAN\ts a n 4\tS _ N\n", &res).unwrap();
        let model = train_pipeline(&corpus, &res, &Default::default()).unwrap();
        let stored = StoredModel::Pipeline(Box::new(model));
        let text = save_model(&stored);
        let loaded = load_model(&text).unwrap();
        assert_eq!(loaded, stored);
        assert_eq!(save_model(&loaded), text);
    }

    #[test]
    fn joint_model_round_trips_bytes() {
        let res = resource();
        let pairs = vec![
            (
                res.classify_word("DI").unwrap(),
                vec!["d".into(), "i".into(), "2".into()],
            ),
            (
                res.classify_word("AN").unwrap(),
                vec!["a".into(), "n".into(), "1".into()],
            ),
        ];
        let (model, skipped) = train_joint(&pairs, 2, Default::default()).unwrap();
        let stored = StoredModel::Joint(JointBundle {
            resource_name: "test".into(),
            model,
            skipped,
        });
        let text = save_model(&stored);
        let loaded = load_model(&text).unwrap();
        assert_eq!(loaded, stored);
        assert_eq!(save_model(&loaded), text);
    }

    #[test]
    fn loaded_pipeline_decodes_identically() {
        let res = resource();
        let corpus = parse_corpus("DINA\td i 2 . n a 1\nSAN\ts a n 4\n", &res).unwrap();
        let model = train_pipeline(&corpus, &res, &Default::default()).unwrap();
        let text = save_model(&StoredModel::Pipeline(Box::new(model.clone())));
        let StoredModel::Pipeline(loaded) = load_model(&text).unwrap() else {
            panic!("wrong kind");
        };
        for probe in ["DINA", "SAN", "NADI", "BLUB"] {
            let word = res.classify_word(probe).unwrap();
            let a = crate::pipeline::transliterate_proposed(&word, None, &model, &res).unwrap();
            let b = crate::pipeline::transliterate_proposed(&word, None, &loaded, &res).unwrap();
            assert_eq!(a, b, "probe {probe}");
        }
    }

    #[test]
    fn bad_header_is_rejected() {
        assert_eq!(load_model("nonsense"), Err(ModelIoError::BadHeader));
    }
}
