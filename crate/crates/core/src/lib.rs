//! Rule-based dependency pre-annotation and morphology features for Turkish
//! treebanks.
//!
//! The crate reads CoNLL-U treebanks plus a morphological-analysis sidecar,
//! decides some heads with nine hand-written rules ([`engine`]), turns rule
//! codes and suffix information into per-token features for an external
//! parser ([`features`]), and scores, compares and ablates the results
//! ([`eval`]).

pub mod conllu;
pub mod engine;
pub mod eval;
pub mod features;
pub mod lexicon;
pub mod matrix;
pub mod morph;
pub mod sidecar;
pub mod synth;

pub use conllu::{parse_conllu, read_conllu, write_conllu, Features, Misc, ParseError, Sentence, Token};
pub use engine::{run, EngineError, EngineReport, Parse, RuleAssignment, RuleCode, RuleConfig, RuleSet};
pub use lexicon::{Lexicon, LexiconError};
pub use matrix::{build_matrix, LemmaSuffixMatrix, MatrixError};
pub use morph::{MorphAnalysis, MorphError, SuffixInventory};
pub use sidecar::{read_morph_sidecar, SidecarError, SidecarMap};
