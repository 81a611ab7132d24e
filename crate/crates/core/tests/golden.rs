mod common;

use ruleparse_core::engine::{run, RuleCode, RuleConfig, RuleSet};
use ruleparse_core::Lexicon;

fn triples(p: &ruleparse_core::Parse) -> Vec<(usize, usize, RuleCode)> {
    let mut v: Vec<_> = p.assignments.iter().map(|a| (a.dependent, a.head, a.code)).collect();
    v.sort();
    v
}

#[test]
fn worked_examples() {
    let (sentences, analyses) = common::examples();
    let lex = Lexicon::sample();
    for g in common::golden() {
        let i = sentences
            .iter()
            .position(|s| s.comment_value("sent_id") == Some(g.sent_id))
            .unwrap_or_else(|| panic!("{} missing", g.sent_id));
        let parse = run(&sentences[i], &analyses[i], &lex, &RuleConfig::new(g.rules)).unwrap();
        let mut expected = g.expected.clone();
        expected.sort();
        assert_eq!(triples(&parse), expected, "{}", g.sent_id);
    }
}

#[test]
fn example_seven_stays_queued_without_av() {
    let (sentences, analyses) = common::examples();
    let i = sentences.iter().position(|s| s.comment_value("sent_id") == Some("ex7")).unwrap();
    let parse = run(&sentences[i], &analyses[i], &Lexicon::sample(), &RuleConfig::default()).unwrap();
    assert!(parse.assignments.is_empty());
    assert_eq!(parse.report.queued_adverbs, 1);
}

#[test]
fn assigned_heads_agree_with_gold() {
    let (sentences, analyses) = common::examples();
    let lex = Lexicon::sample();
    for (s, a) in sentences.iter().zip(&analyses) {
        let parse = run(s, a, &lex, &RuleConfig::new(RuleSet::default_rules().with(RuleCode::Av))).unwrap();
        for asg in &parse.assignments {
            assert_eq!(s.tokens[asg.dependent - 1].head, Some(asg.head), "{:?} {:?}", s.comment_value("sent_id"), asg);
        }
    }
}

#[test]
fn walkthrough_leaves_two_words() {
    let (sentences, analyses) = common::examples();
    let i = sentences.iter().position(|s| s.comment_value("sent_id") == Some("walkthrough")).unwrap();
    let parse = run(&sentences[i], &analyses[i], &Lexicon::sample(), &RuleConfig::default()).unwrap();
    let unassigned: Vec<usize> = parse.heads().iter().enumerate().filter(|(_, h)| h.is_none()).map(|(k, _)| k + 1).collect();
    assert_eq!(unassigned, vec![10, 14]);
    assert_eq!(parse.report.unassigned(), 2);
    for asg in &parse.assignments {
        assert_eq!(sentences[i].tokens[asg.dependent - 1].head, Some(asg.head), "{:?}", asg);
    }
}
