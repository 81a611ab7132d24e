//! Rule-based unlabeled dependency pre-annotation.
//!
//! [`run`] applies AC and AJC (which also build the consecutive adverb and
//! adjective lists), then CPI and NC once, then loops over PC, AAJ, AV, AJN
//! and NV until a full pass assigns nothing. Every rule looks at adjacent
//! pairs of the *remaining* list, so removing a word makes its neighbours
//! adjacent.

mod rules;
mod word;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::Sentence;
use crate::lexicon::Lexicon;
use crate::morph::MorphAnalysis;

pub use rules::EngineState;
pub use word::{Word, WordClass};

/// The action that decided a token's head, or `NONE`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RuleCode {
    Cpi,
    Nc,
    Pc,
    Ac,
    Ajc,
    Aaj,
    Av,
    Ajn,
    Nv,
    None,
}

impl RuleCode {
    /// All ten symbols, in export order.
    pub const ALL: [RuleCode; 10] = [
        RuleCode::Cpi,
        RuleCode::Nc,
        RuleCode::Pc,
        RuleCode::Ac,
        RuleCode::Ajc,
        RuleCode::Aaj,
        RuleCode::Av,
        RuleCode::Ajn,
        RuleCode::Nv,
        RuleCode::None,
    ];

    /// The nine rules.
    pub const RULES: [RuleCode; 9] = [
        RuleCode::Cpi,
        RuleCode::Nc,
        RuleCode::Pc,
        RuleCode::Ac,
        RuleCode::Ajc,
        RuleCode::Aaj,
        RuleCode::Av,
        RuleCode::Ajn,
        RuleCode::Nv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::Cpi => "CPI",
            RuleCode::Nc => "NC",
            RuleCode::Pc => "PC",
            RuleCode::Ac => "AC",
            RuleCode::Ajc => "AJC",
            RuleCode::Aaj => "AAJ",
            RuleCode::Av => "AV",
            RuleCode::Ajn => "AJN",
            RuleCode::Nv => "NV",
            RuleCode::None => "NONE",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown rule {0:?}")]
pub struct UnknownRule(pub String);

impl FromStr for RuleCode {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleCode::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRule(s.to_owned()))
    }
}

/// A set of enabled rules. `NONE` is never a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RuleSet(u16);

impl RuleSet {
    pub const fn empty() -> Self {
        RuleSet(0)
    }

    pub fn all() -> Self {
        RuleCode::RULES.into_iter().collect()
    }

    /// Everything except AV and NV.
    pub fn default_rules() -> Self {
        Self::all().without(RuleCode::Av).without(RuleCode::Nv)
    }

    pub fn contains(self, rule: RuleCode) -> bool {
        rule != RuleCode::None && self.0 & (1 << rule.index()) != 0
    }

    #[must_use]
    pub fn with(self, rule: RuleCode) -> Self {
        if rule == RuleCode::None {
            return self;
        }
        RuleSet(self.0 | (1 << rule.index()))
    }

    #[must_use]
    pub fn without(self, rule: RuleCode) -> Self {
        RuleSet(self.0 & !(1 << rule.index()))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: RuleSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = RuleCode> {
        RuleCode::RULES.into_iter().filter(move |r| self.contains(*r))
    }
}

impl FromIterator<RuleCode> for RuleSet {
    fn from_iter<I: IntoIterator<Item = RuleCode>>(iter: I) -> Self {
        iter.into_iter().fold(RuleSet::empty(), RuleSet::with)
    }
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Comma-separated lowercase names; the empty set prints as `none`.
impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        let names: Vec<String> = self.iter().map(|r| r.as_str().to_ascii_lowercase()).collect();
        f.write_str(&names.join(","))
    }
}

/// Parses `cpi,nc,pc`; `none` or an empty string is the empty set and `all`
/// is every rule.
impl FromStr for RuleSet {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = RuleSet::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                set = RuleSet::all();
                continue;
            }
            match part.parse::<RuleCode>()? {
                RuleCode::None => {}
                rule => set = set.with(rule),
            }
        }
        Ok(set)
    }
}

impl Serialize for RuleSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RuleConfig {
    pub enabled: RuleSet,
    pub max_iterations: usize,
}

impl RuleConfig {
    pub fn new(enabled: RuleSet) -> Self {
        RuleConfig {
            enabled,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig::new(RuleSet::default_rules())
    }
}

/// One decided head. Ids are 1-based token ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RuleAssignment {
    pub dependent: usize,
    pub head: usize,
    pub code: RuleCode,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("{tokens} tokens but {analyses} analyses")]
    AnalysisCount { tokens: usize, analyses: usize },
    #[error("token {index} has id {id}; ids must run 1..n")]
    TokenId { index: usize, id: usize },
    #[error("rule loop did not settle within {0} iterations")]
    IterationCap(usize),
    #[error("max_iterations must be positive")]
    ZeroIterations,
}

/// Diagnostics for one or more runs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EngineReport {
    pub sentences: usize,
    pub tokens: usize,
    /// Assignments per rule code, in [`RuleCode::RULES`] order.
    pub fires: [usize; 9],
    pub queued_adverbs: usize,
    pub queued_adjectives: usize,
    pub skipped_cycles: usize,
    /// Passes of the PC..NV loop, including the final empty one.
    pub iterations: usize,
    pub assigned: usize,
}

impl EngineReport {
    pub fn fires_for(&self, rule: RuleCode) -> usize {
        if rule == RuleCode::None {
            return self.tokens - self.assigned;
        }
        self.fires[rule.index()]
    }

    pub fn unassigned(&self) -> usize {
        self.tokens - self.assigned
    }

    pub fn merge(&mut self, other: &EngineReport) {
        self.sentences += other.sentences;
        self.tokens += other.tokens;
        for (a, b) in self.fires.iter_mut().zip(other.fires) {
            *a += b;
        }
        self.queued_adverbs += other.queued_adverbs;
        self.queued_adjectives += other.queued_adjectives;
        self.skipped_cycles += other.skipped_cycles;
        self.iterations += other.iterations;
        self.assigned += other.assigned;
    }

    /// Per-rule fire counts keyed by code, for JSON output.
    pub fn fire_counts(&self) -> Vec<(RuleCode, usize)> {
        RuleCode::RULES.into_iter().map(|r| (r, self.fires[r.index()])).collect()
    }
}

/// The outcome of one [`run`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parse {
    pub assignments: Vec<RuleAssignment>,
    pub report: EngineReport,
}

impl Parse {
    fn len(&self) -> usize {
        self.report.tokens
    }

    /// Rule code per token (index = id - 1).
    pub fn codes(&self) -> Vec<RuleCode> {
        let mut codes = vec![RuleCode::None; self.len()];
        for a in &self.assignments {
            codes[a.dependent - 1] = a.code;
        }
        codes
    }

    /// Decided head per token (index = id - 1).
    pub fn heads(&self) -> Vec<Option<usize>> {
        let mut heads = vec![None; self.len()];
        for a in &self.assignments {
            heads[a.dependent - 1] = Some(a.head);
        }
        heads
    }

    pub fn head_of(&self, id: usize) -> Option<usize> {
        self.assignments.iter().find(|a| a.dependent == id).map(|a| a.head)
    }

    pub fn assignment(&self, id: usize) -> Option<&RuleAssignment> {
        self.assignments.iter().find(|a| a.dependent == id)
    }
}

/// Builds the per-token rule view of a sentence.
pub fn words(sentence: &Sentence, analyses: &[MorphAnalysis]) -> Result<Vec<Word>, EngineError> {
    if sentence.tokens.len() != analyses.len() {
        return Err(EngineError::AnalysisCount {
            tokens: sentence.tokens.len(),
            analyses: analyses.len(),
        });
    }
    sentence
        .tokens
        .iter()
        .zip(analyses)
        .enumerate()
        .map(|(index, (token, analysis))| {
            if token.id != index + 1 {
                return Err(EngineError::TokenId { index, id: token.id });
            }
            Ok(Word::new(token, analysis))
        })
        .collect()
}

/// Runs the enabled rules over one sentence.
pub fn run(
    sentence: &Sentence,
    analyses: &[MorphAnalysis],
    lex: &Lexicon,
    cfg: &RuleConfig,
) -> Result<Parse, EngineError> {
    let words = words(sentence, analyses)?;
    run_words(&words, lex, cfg)
}

/// [`run`] over prepared words; `words[i].id` must be `i + 1`.
pub fn run_words(words: &[Word], lex: &Lexicon, cfg: &RuleConfig) -> Result<Parse, EngineError> {
    if cfg.max_iterations == 0 {
        return Err(EngineError::ZeroIterations);
    }
    if let Some((index, w)) = words.iter().enumerate().find(|(i, w)| w.id != i + 1) {
        return Err(EngineError::TokenId { index, id: w.id });
    }
    let enabled = cfg.enabled;
    let mut state = EngineState::new(words, lex);

    if enabled.contains(RuleCode::Ac) {
        state.rule_ac();
    }
    if enabled.contains(RuleCode::Ajc) {
        state.rule_ajc();
    }
    if enabled.contains(RuleCode::Cpi) {
        state.rule_cpi();
    }
    if enabled.contains(RuleCode::Nc) {
        state.rule_nc();
    }

    const LOOP: [RuleCode; 5] = [RuleCode::Pc, RuleCode::Aaj, RuleCode::Av, RuleCode::Ajn, RuleCode::Nv];
    let looped: Vec<RuleCode> = LOOP.into_iter().filter(|r| enabled.contains(*r)).collect();
    if !looped.is_empty() {
        loop {
            if state.iterations == cfg.max_iterations {
                return Err(EngineError::IterationCap(cfg.max_iterations));
            }
            state.iterations += 1;
            let mut fired = 0;
            for rule in &looped {
                fired += state.apply(*rule);
            }
            if fired == 0 || state.remaining.len() < 2 {
                break;
            }
        }
    }
    Ok(state.finish())
}
