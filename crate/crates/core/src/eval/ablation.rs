use rayon::prelude::*;
use serde::Serialize;

use super::EvalError;
use crate::conllu::Sentence;
use crate::engine::{self, EngineReport, RuleCode, RuleConfig, RuleSet};
use crate::lexicon::Lexicon;
use crate::morph::MorphAnalysis;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AblationStep {
    pub label: &'static str,
    pub rules: RuleSet,
}

fn cumulative(increments: &[(&'static str, &[RuleCode])]) -> Vec<AblationStep> {
    let mut rules = RuleSet::empty();
    let mut steps = vec![AblationStep {
        label: "no rule",
        rules,
    }];
    for (label, added) in increments {
        rules = added.iter().fold(rules, |set, r| set.with(*r));
        steps.push(AblationStep { label, rules });
    }
    steps
}

/// The eight cumulative rule sets: none, CPI, +NC, +PC, +AC+AAJ, +AV,
/// +AJC+AJN, +NV.
pub fn table1_steps() -> Vec<AblationStep> {
    use RuleCode::*;
    cumulative(&[
        ("CPI", &[Cpi]),
        ("+NC", &[Nc]),
        ("+PC", &[Pc]),
        ("+AC+AAJ", &[Ac, Aaj]),
        ("+AV", &[Av]),
        ("+AJC+AJN", &[Ajc, Ajn]),
        ("+NV", &[Nv]),
    ])
}

/// The same progression without AV and NV (six steps).
pub fn no_av_nv_steps() -> Vec<AblationStep> {
    use RuleCode::*;
    cumulative(&[
        ("CPI", &[Cpi]),
        ("+NC", &[Nc]),
        ("+PC", &[Pc]),
        ("+AC+AAJ", &[Ac, Aaj]),
        ("+AJC+AJN", &[Ajc, Ajn]),
    ])
}

/// Rule coverage and precision of one step against gold heads.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub step: usize,
    pub label: &'static str,
    pub rules: RuleSet,
    pub total: usize,
    pub assigned: usize,
    pub correct: usize,
    /// Fraction of tokens given a head.
    pub coverage: f64,
    /// Fraction of assigned heads that match gold; absent when nothing was
    /// assigned.
    pub precision: Option<f64>,
    pub report: EngineReport,
}

/// Runs the engine once per step over every sentence. `analyses[i]` holds
/// the analyses of sentence `i`.
pub fn ablate(
    gold: &[Sentence],
    analyses: &[Vec<MorphAnalysis>],
    lex: &Lexicon,
    steps: &[AblationStep],
) -> Result<Vec<AblationRow>, EvalError> {
    if gold.len() != analyses.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            system: analyses.len(),
        });
    }
    let words: Vec<_> = gold
        .par_iter()
        .zip(analyses)
        .enumerate()
        .map(|(i, (s, a))| {
            engine::words(s, a).map_err(|source| EvalError::Engine { sentence: i + 1, source })
        })
        .collect::<Result<_, _>>()?;
    for (i, s) in gold.iter().enumerate() {
        if let Some(t) = s.tokens.iter().find(|t| t.head.is_none()) {
            return Err(EvalError::MissingGoldHead {
                sentence: i + 1,
                token: t.id,
            });
        }
    }
    steps
        .iter()
        .enumerate()
        .map(|(k, step)| {
            let cfg = RuleConfig::new(step.rules);
            let (report, correct) = gold
                .par_iter()
                .zip(&words)
                .enumerate()
                .map(|(i, (s, w))| {
                    let parse = engine::run_words(w, lex, &cfg)
                        .map_err(|source| EvalError::Engine { sentence: i + 1, source })?;
                    let correct = parse
                        .assignments
                        .iter()
                        .filter(|a| s.tokens[a.dependent - 1].head == Some(a.head))
                        .count();
                    Ok((parse.report, correct))
                })
                .try_reduce(
                    || (EngineReport::default(), 0),
                    |(mut r1, c1), (r2, c2)| {
                        r1.merge(&r2);
                        Ok((r1, c1 + c2))
                    },
                )?;
            let total = report.tokens;
            let assigned = report.assigned;
            Ok(AblationRow {
                step: k + 1,
                label: step.label,
                rules: step.rules,
                total,
                assigned,
                correct,
                coverage: if total == 0 { 0.0 } else { assigned as f64 / total as f64 },
                precision: (assigned > 0).then(|| correct as f64 / assigned as f64),
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_definitions() {
        let t = table1_steps();
        assert_eq!(t.len(), 8);
        assert!(t[0].rules.is_empty());
        assert_eq!(t[7].rules, RuleSet::all());
        assert_eq!(t[4].rules.to_string(), "cpi,nc,pc,ac,aaj");
        for w in t.windows(2) {
            assert!(w[0].rules.is_subset(w[1].rules) && w[0].rules != w[1].rules);
        }
        let f = no_av_nv_steps();
        assert_eq!(f.len(), 6);
        assert_eq!(f[5].rules, RuleSet::default_rules());
        let labels: Vec<_> = t.iter().map(|s| s.label).collect();
        assert_eq!(labels, ["no rule", "CPI", "+NC", "+PC", "+AC+AAJ", "+AV", "+AJC+AJN", "+NV"]);
    }

    #[test]
    fn empty_step_has_no_precision() {
        let gold = vec![Sentence::new(vec![
            crate::conllu::Token::new(1, "ev").with_upos("NOUN").with_head(0, "root"),
        ])];
        let analyses = vec![vec![MorphAnalysis::parse("ev", "Noun").unwrap()]];
        let rows = ablate(&gold, &analyses, &Lexicon::new(), &table1_steps()[..1]).unwrap();
        assert_eq!(rows[0].coverage, 0.0);
        assert_eq!(rows[0].precision, None);
        assert_eq!(rows[0].total, 1);
    }
}
