//! Per-token features for a downstream neural parser.
//!
//! A [`HybridConfig`] selects which channels are filled: the rule code, and
//! at most one suffix view (all inflectional suffixes, the last suffix, or
//! the lemma's suffix vector). Features travel in the CoNLL-U MISC column
//! (`Rule=`, `InflSuffixes=`, `LastSuffix=`, `SufVec=`) or as JSON lines.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::Sentence;
use crate::engine::{RuleAssignment, RuleCode};
use crate::matrix::{format_fixed9, parse_fixed9, LemmaSuffixMatrix};
use crate::morph::{MorphAnalysis, MorphError, SuffixInventory, NO_SUFFIX};

pub const RULE_KEY: &str = "Rule";
pub const LAST_SUFFIX_KEY: &str = "LastSuffix";
pub const INFL_SUFFIXES_KEY: &str = "InflSuffixes";
pub const SUFFIX_VECTOR_KEY: &str = "SufVec";

/// Header comment naming the rule-code vocabulary.
pub const RULE_CODES_COMMENT: &str = "# global.rule_codes = CPI NC PC AC AJC AAJ AV AJN NV NONE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuffixMode {
    Inflectional,
    Last,
    Vector,
}

impl SuffixMode {
    fn as_str(self) -> &'static str {
        match self {
            SuffixMode::Inflectional => "infl",
            SuffixMode::Last => "last",
            SuffixMode::Vector => "sufvec",
        }
    }
}

/// Which feature channels to emit. Only one suffix view can be active.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct HybridConfig {
    pub rule: bool,
    pub suffix: Option<SuffixMode>,
}

impl HybridConfig {
    pub const RULE: HybridConfig = HybridConfig {
        rule: true,
        suffix: None,
    };

    pub fn suffix(mode: SuffixMode) -> Self {
        HybridConfig {
            rule: false,
            suffix: Some(mode),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.rule && self.suffix.is_none()
    }

    pub fn needs_analyses(&self) -> bool {
        self.suffix.is_some()
    }

    pub fn needs_matrix(&self) -> bool {
        self.suffix == Some(SuffixMode::Vector)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HybridConfigError {
    #[error("unknown feature mode {0:?}")]
    Unknown(String),
    #[error("suffix modes {0} and {1} cannot be combined")]
    Conflict(&'static str, &'static str),
}

/// Accepts `rule`, `infl`, `last`, `sufvec`, `+`-joined combinations such as
/// `rule+last`, and `none`.
impl FromStr for HybridConfig {
    type Err = HybridConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = HybridConfig::default();
        for part in s.split('+').map(str::trim) {
            let mode = match part.to_ascii_lowercase().as_str() {
                "none" | "" => continue,
                "rule" => {
                    cfg.rule = true;
                    continue;
                }
                "infl" | "inflectional" => SuffixMode::Inflectional,
                "last" => SuffixMode::Last,
                "sufvec" | "vector" => SuffixMode::Vector,
                _ => return Err(HybridConfigError::Unknown(part.to_owned())),
            };
            match cfg.suffix {
                Some(prev) if prev != mode => return Err(HybridConfigError::Conflict(prev.as_str(), mode.as_str())),
                _ => cfg.suffix = Some(mode),
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for HybridConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.rule {
            parts.push("rule");
        }
        parts.extend(self.suffix.map(SuffixMode::as_str));
        if parts.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

/// Features of one token. Unselected channels are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule_code: Option<RuleCode>,
    /// `NONE` for a word without suffixes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub last_suffix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inflectional_suffixes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suffix_vector: Option<Vec<f64>>,
}

impl FeatureBundle {
    pub fn is_empty(&self) -> bool {
        self.rule_code.is_none()
            && self.last_suffix.is_none()
            && self.inflectional_suffixes.is_none()
            && self.suffix_vector.is_none()
    }

    /// The bundle as it reads back after export: the suffix vector is rounded
    /// to the 9-decimal grid.
    pub fn quantized(&self) -> FeatureBundle {
        let mut out = self.clone();
        if let Some(v) = &mut out.suffix_vector {
            *v = format_fixed9(v)
                .iter()
                .map(|s| parse_fixed9(s).expect("formatted value parses"))
                .collect();
        }
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("token {token} ({form:?}) has no morphological analysis")]
    MissingAnalysis { token: usize, form: String },
    #[error("token {token} ({form:?}): {source}")]
    Morph {
        token: usize,
        form: String,
        source: MorphError,
    },
    #[error("the suffix-vector mode needs a lemma-suffix matrix")]
    MatrixRequired,
    #[error("a lemma-suffix matrix was given but the suffix-vector mode is off")]
    MatrixUnexpected,
    #[error("assignment for token {0}, which is not in the sentence")]
    BadAssignment(usize),
    #[error("sentence {sentence}: {tokens} tokens but {bundles} feature bundles")]
    Misaligned {
        sentence: usize,
        tokens: usize,
        bundles: usize,
    },
    #[error("token {token}: bad {key} value {value:?}")]
    BadValue { token: usize, key: &'static str, value: String },
}

/// Turns rule assignments and analyses into bundles for one configuration.
#[derive(Clone, Debug)]
pub struct Encoder {
    cfg: HybridConfig,
    inventory: SuffixInventory,
    matrix: Option<LemmaSuffixMatrix>,
}

impl Encoder {
    /// `matrix` must be given exactly when the suffix-vector mode is on.
    pub fn new(
        cfg: HybridConfig,
        inventory: SuffixInventory,
        matrix: Option<LemmaSuffixMatrix>,
    ) -> Result<Self, FeatureError> {
        match (cfg.needs_matrix(), matrix.is_some()) {
            (true, false) => Err(FeatureError::MatrixRequired),
            (false, true) => Err(FeatureError::MatrixUnexpected),
            _ => Ok(Encoder { cfg, inventory, matrix }),
        }
    }

    pub fn config(&self) -> HybridConfig {
        self.cfg
    }

    /// One bundle per token. `analyses[i]` belongs to token `i + 1` and is
    /// only consulted in suffix modes, where a short slice is an error.
    pub fn encode(
        &self,
        sentence: &Sentence,
        assignments: &[RuleAssignment],
        analyses: &[MorphAnalysis],
    ) -> Result<Vec<FeatureBundle>, FeatureError> {
        let n = sentence.tokens.len();
        let mut codes = vec![RuleCode::None; n];
        for a in assignments {
            if a.dependent == 0 || a.dependent > n {
                return Err(FeatureError::BadAssignment(a.dependent));
            }
            codes[a.dependent - 1] = a.code;
        }
        sentence
            .tokens
            .iter()
            .enumerate()
            .map(|(i, token)| {
                let mut bundle = FeatureBundle::default();
                if self.cfg.rule {
                    bundle.rule_code = Some(codes[i]);
                }
                let Some(mode) = self.cfg.suffix else {
                    return Ok(bundle);
                };
                let analysis = analyses.get(i).ok_or_else(|| FeatureError::MissingAnalysis {
                    token: token.id,
                    form: token.form.clone(),
                })?;
                match mode {
                    SuffixMode::Last => {
                        bundle.last_suffix = Some(analysis.last_suffix().unwrap_or(NO_SUFFIX).to_owned());
                    }
                    SuffixMode::Inflectional => {
                        let tags = self.inventory.inflectional_suffixes(analysis).map_err(|source| {
                            FeatureError::Morph {
                                token: token.id,
                                form: token.form.clone(),
                                source,
                            }
                        })?;
                        bundle.inflectional_suffixes = Some(tags.into_iter().map(str::to_owned).collect());
                    }
                    SuffixMode::Vector => {
                        let matrix = self.matrix.as_ref().ok_or(FeatureError::MatrixRequired)?;
                        bundle.suffix_vector = Some(matrix.suffix_vector(&analysis.lemma));
                    }
                }
                Ok(bundle)
            })
            .collect()
    }
}

/// Writes `bundles` into the MISC column of `sentence`, replacing any
/// feature keys already there.
pub fn annotate_sentence(sentence: &mut Sentence, bundles: &[FeatureBundle]) -> Result<(), FeatureError> {
    if sentence.tokens.len() != bundles.len() {
        return Err(FeatureError::Misaligned {
            sentence: 0,
            tokens: sentence.tokens.len(),
            bundles: bundles.len(),
        });
    }
    for (token, bundle) in sentence.tokens.iter_mut().zip(bundles) {
        let misc = &mut token.misc;
        for key in [RULE_KEY, LAST_SUFFIX_KEY, INFL_SUFFIXES_KEY, SUFFIX_VECTOR_KEY] {
            misc.remove(key);
        }
        if let Some(code) = bundle.rule_code {
            misc.insert(RULE_KEY, code.as_str());
        }
        if let Some(last) = &bundle.last_suffix {
            misc.insert(LAST_SUFFIX_KEY, last.as_str());
        }
        if let Some(tags) = &bundle.inflectional_suffixes {
            let value = if tags.is_empty() { NO_SUFFIX.to_owned() } else { tags.join("+") };
            misc.insert(INFL_SUFFIXES_KEY, value);
        }
        if let Some(v) = &bundle.suffix_vector {
            misc.insert(SUFFIX_VECTOR_KEY, format_fixed9(v).join(","));
        }
    }
    Ok(())
}

/// Annotates every sentence and puts the rule-code header on the first one
/// (once, even when re-exporting).
pub fn export(sentences: &mut [Sentence], bundles: &[Vec<FeatureBundle>]) -> Result<(), FeatureError> {
    if sentences.len() != bundles.len() {
        return Err(FeatureError::Misaligned {
            sentence: sentences.len().min(bundles.len()) + 1,
            tokens: 0,
            bundles: 0,
        });
    }
    for (i, (sentence, b)) in sentences.iter_mut().zip(bundles).enumerate() {
        annotate_sentence(sentence, b).map_err(|e| match e {
            FeatureError::Misaligned { tokens, bundles, .. } => FeatureError::Misaligned {
                sentence: i + 1,
                tokens,
                bundles,
            },
            e => e,
        })?;
    }
    if let Some(first) = sentences.first_mut() {
        if !first.comments.iter().any(|c| c == RULE_CODES_COMMENT) {
            first.comments.insert(0, RULE_CODES_COMMENT.to_owned());
        }
    }
    Ok(())
}

/// Reads the feature keys back out of a sentence's MISC column.
pub fn read_bundles(sentence: &Sentence) -> Result<Vec<FeatureBundle>, FeatureError> {
    sentence
        .tokens
        .iter()
        .map(|token| {
            let bad = |key: &'static str, value: &str| FeatureError::BadValue {
                token: token.id,
                key,
                value: value.to_owned(),
            };
            let misc = &token.misc;
            let mut bundle = FeatureBundle::default();
            if let Some(v) = misc.get(RULE_KEY) {
                bundle.rule_code = Some(v.parse().map_err(|_| bad(RULE_KEY, v))?);
            }
            if let Some(v) = misc.get(LAST_SUFFIX_KEY) {
                if v.is_empty() {
                    return Err(bad(LAST_SUFFIX_KEY, v));
                }
                bundle.last_suffix = Some(v.to_owned());
            }
            if let Some(v) = misc.get(INFL_SUFFIXES_KEY) {
                let tags = match v {
                    NO_SUFFIX => Vec::new(),
                    "" => return Err(bad(INFL_SUFFIXES_KEY, v)),
                    _ => v.split('+').map(str::to_owned).collect(),
                };
                if tags.iter().any(|t| t.is_empty() || t == NO_SUFFIX) {
                    return Err(bad(INFL_SUFFIXES_KEY, v));
                }
                bundle.inflectional_suffixes = Some(tags);
            }
            if let Some(v) = misc.get(SUFFIX_VECTOR_KEY) {
                let values: Option<Vec<f64>> = v.split(',').map(parse_fixed9).collect();
                bundle.suffix_vector = Some(values.ok_or_else(|| bad(SUFFIX_VECTOR_KEY, v))?);
            }
            Ok(bundle)
        })
        .collect()
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    sentence: usize,
    token: usize,
    form: &'a str,
    #[serde(flatten)]
    features: &'a FeatureBundle,
}

/// One JSON object per token: 1-based sentence ordinal, token id, form and
/// the selected features.
pub fn write_jsonl<W: Write>(
    mut w: W,
    sentences: &[Sentence],
    bundles: &[Vec<FeatureBundle>],
) -> io::Result<()> {
    for (i, (sentence, b)) in sentences.iter().zip(bundles).enumerate() {
        for (token, features) in sentence.tokens.iter().zip(b) {
            let record = JsonRecord {
                sentence: i + 1,
                token: token.id,
                form: &token.form,
                features,
            };
            serde_json::to_writer(&mut w, &record)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}
