//! Attachment scores, paired randomization tests and rule ablation.

mod ablation;
mod significance;

use serde::Serialize;
use thiserror::Error;

use crate::conllu::Sentence;
use crate::engine::EngineError;

pub use ablation::{ablate, no_av_nv_steps, table1_steps, AblationRow, AblationStep};
pub use significance::{randomization_test, Metric, SigResult, DEFAULT_SHUFFLES};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold has {gold} sentences but system output has {system}")]
    SentenceCount { gold: usize, system: usize },
    #[error("sentence {sentence}: gold has {gold} tokens but system output has {system}")]
    TokenCount {
        sentence: usize,
        gold: usize,
        system: usize,
    },
    #[error("sentence {sentence}, token {token}: gold head is missing")]
    MissingGoldHead { sentence: usize, token: usize },
    #[error("the number of shuffles must be at least 1")]
    NoShuffles,
    #[error("no system outputs to compare")]
    NoOutputs,
    #[error("output {output}: {source}")]
    Output { output: String, source: Box<EvalError> },
    #[error("sentence {sentence}: {source}")]
    Engine { sentence: usize, source: EngineError },
}

/// UAS/LAS over all syntactic words, punctuation included.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AttachmentScores {
    pub uas: f64,
    pub las: f64,
    pub total: usize,
    pub correct_heads: usize,
    pub correct_labeled: usize,
}

impl AttachmentScores {
    pub fn from_counts(total: usize, correct_heads: usize, correct_labeled: usize) -> Self {
        let ratio = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
        AttachmentScores {
            uas: ratio(correct_heads),
            las: ratio(correct_labeled),
            total,
            correct_heads,
            correct_labeled,
        }
    }
}

/// Per-sentence `(tokens, correct heads, correct heads and labels)`.
pub(crate) fn sentence_counts(gold: &[Sentence], system: &[Sentence]) -> Result<Vec<[usize; 3]>, EvalError> {
    if gold.len() != system.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            system: system.len(),
        });
    }
    gold.iter()
        .zip(system)
        .enumerate()
        .map(|(i, (g, s))| {
            if g.tokens.len() != s.tokens.len() {
                return Err(EvalError::TokenCount {
                    sentence: i + 1,
                    gold: g.tokens.len(),
                    system: s.tokens.len(),
                });
            }
            let mut counts = [g.tokens.len(), 0, 0];
            for (gt, st) in g.tokens.iter().zip(&s.tokens) {
                let head = gt.head.ok_or(EvalError::MissingGoldHead {
                    sentence: i + 1,
                    token: gt.id,
                })?;
                if st.head == Some(head) {
                    counts[1] += 1;
                    if st.deprel == gt.deprel {
                        counts[2] += 1;
                    }
                }
            }
            Ok(counts)
        })
        .collect()
}

/// Scores `system` against `gold`. Sentences and tokens must align.
pub fn score(gold: &[Sentence], system: &[Sentence]) -> Result<AttachmentScores, EvalError> {
    let counts = sentence_counts(gold, system)?;
    let sum = |k: usize| counts.iter().map(|c| c[k]).sum::<usize>();
    Ok(AttachmentScores::from_counts(sum(0), sum(1), sum(2)))
}
