//! Phonology-constrained transliteration of foreign words into syllabified,
//! toned pronunciations.
//!
//! The main pipeline groups source letters into pseudo-syllables with a
//! smoothed n-gram labeler, maps each sub-syllabic unit to target phonemes,
//! and assigns one lexical tone per syllable. A deterministic rule engine and
//! a joint grapheme-phoneme n-gram model are included as baselines, along
//! with edit-distance scoring down to onset/nucleus/coda/tone granularity
//! and a corpus-size experiment runner.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod corpus;
pub mod experiment;
pub mod joint;
pub mod label_model;
pub mod mapping;
pub mod metrics;
pub mod model_io;
pub mod phonology;
pub mod pipeline;
pub mod pseudo;
pub mod symbolic;
pub mod tones;

pub use phonology::{
    parse_pronunciation, serialize_pronunciation, structure_of, validate, GraphemeClass,
    LanguageResource, Pronunciation, Role, Syllable, SyllableStructure, Tone,
};
