//! Shared inputs for the criterion benches.

use ruleparse_core::conllu::to_conllu_string;
use ruleparse_core::synth::{corpus, SynthConfig};
use ruleparse_core::{MorphAnalysis, Sentence};

pub const SEED: u64 = 7;

/// `count` synthetic sentences of up to 30 tokens with analyses.
pub fn treebank(count: usize) -> (Vec<Sentence>, Vec<Vec<MorphAnalysis>>) {
    corpus(SEED, count, &SynthConfig::default())
}

pub fn treebank_text(count: usize) -> String {
    to_conllu_string(&treebank(count).0)
}
