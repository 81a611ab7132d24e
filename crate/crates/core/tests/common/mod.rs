//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;
use ruleparse_core::conllu::Sentence;
use ruleparse_core::engine::{RuleCode, RuleSet};
use ruleparse_core::Parse;
use ruleparse_core::features::FeatureBundle;
use ruleparse_core::morph::{MorphAnalysis, SuffixInventory};
use ruleparse_core::sidecar::{align_analyses, read_morph_sidecar};
use ruleparse_core::parse_conllu;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// The encoded example sentences and their analyses.
pub fn examples() -> (Vec<Sentence>, Vec<Vec<MorphAnalysis>>) {
    let dir = data_dir().join("examples");
    let text = fs::read_to_string(dir.join("examples.conllu")).unwrap();
    let sentences = parse_conllu(&text).unwrap();
    let map = read_morph_sidecar(fs::read(dir.join("examples.morph")).unwrap().as_slice()).unwrap();
    let analyses = align_analyses(&map, &sentences).unwrap();
    (sentences, analyses)
}

pub struct Golden {
    pub sent_id: &'static str,
    pub rules: RuleSet,
    /// Every `(dependent, head, code)` the engine must produce, and nothing else.
    pub expected: Vec<(usize, usize, RuleCode)>,
}

/// Expected rule output for each example. Example 7 needs AV: nothing else
/// can give "çok" a head, and "sonra" only binds through it.
pub fn golden() -> Vec<Golden> {
    use RuleCode::*;
    let d = RuleSet::default_rules();
    let g = |sent_id, rules, expected| Golden {
        sent_id,
        rules,
        expected,
    };
    vec![
        g("ex1", d, vec![(1, 2, Pc), (4, 3, Cpi)]),
        g("ex2", d, vec![(2, 1, Nc)]),
        g("ex3", d, vec![(2, 1, Nc)]),
        g("ex4", d, vec![(1, 2, Pc)]),
        g("ex5", d, vec![(1, 2, Pc)]),
        g("ex6", d, vec![]),
        g("ex7", d.with(Av), vec![(2, 4, Ac), (3, 4, Av)]),
        g("ex8", d, vec![(2, 4, Ajc), (3, 4, Ajn)]),
    ]
}

/// Count-and-divide lemma-suffix rows: a direct transcription of the
/// definition, with no streaming, merging or capping.
pub fn oracle_matrix(inv: &SuffixInventory, corpus: &[MorphAnalysis]) -> BTreeMap<String, Vec<f64>> {
    let tags: Vec<&str> = inv.tags().collect();
    let mut counts: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for a in corpus {
        let row = counts.entry(a.lemma.clone()).or_insert_with(|| vec![0; tags.len()]);
        for t in &a.tags {
            for (j, tag) in tags.iter().enumerate() {
                if t == tag {
                    row[j] += 1;
                }
            }
        }
    }
    counts
        .into_iter()
        .map(|(lemma, row)| {
            let total: u64 = row.iter().sum();
            let v = row
                .iter()
                .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                .collect();
            (lemma, v)
        })
        .collect()
}

/// `(total, correct heads, correct heads and labels)` token by token.
pub fn recount(gold: &[Sentence], system: &[Sentence]) -> (usize, usize, usize) {
    let mut out = (0, 0, 0);
    for (g, s) in gold.iter().zip(system) {
        for i in 0..g.tokens.len() {
            out.0 += 1;
            if g.tokens[i].head == s.tokens[i].head {
                out.1 += 1;
                if g.tokens[i].deprel == s.tokens[i].deprel {
                    out.2 += 1;
                }
            }
        }
    }
    out
}

/// Exact p-value of the paired sign-flip test: the share of all 2^n swap
/// patterns whose |difference| reaches the observed one.
pub fn exhaustive_p(diffs: &[i64]) -> f64 {
    let n = diffs.len();
    let observed = diffs.iter().sum::<i64>().abs();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: i64 = diffs
            .iter()
            .enumerate()
            .map(|(i, d)| if mask >> i & 1 == 1 { -d } else { *d })
            .sum();
        if s.abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

const FORMS: &[&str] = &["ev", "İstanbul", "ağaç", "çocuklar", "ışık", "Öğretmen", "“alıntı”", "x_y", "3,5", "—"];
const UPOS: &[&str] = &["NOUN", "VERB", "ADJ", "ADV", "PUNCT", "PROPN", "DET"];
const FEATS: &[&str] = &["Case=Gen", "Number=Plur", "Person[psor]=3", "Tense=Past", "Mood=Ind"];
const MISC: &[&str] = &["SpaceAfter=No", "Translit=ev", "Gloss=house", "Note"];

fn pick<R: Rng>(rng: &mut R, options: &[&str]) -> String {
    options.choose(rng).unwrap().to_string()
}

fn maybe<R: Rng>(rng: &mut R, options: &[&str]) -> String {
    if rng.random_bool(0.3) {
        "_".into()
    } else {
        pick(rng, options)
    }
}

fn joined<R: Rng>(rng: &mut R, options: &[&str]) -> String {
    let k = rng.random_range(0..=3.min(options.len()));
    if k == 0 {
        return "_".into();
    }
    let mut chosen: Vec<&str> = options.choose_multiple(rng, k).copied().collect();
    chosen.sort_by_key(|s| s.to_ascii_lowercase());
    chosen.join("|")
}

/// One canonical CoNLL-U sentence block (ending in a blank line) with
/// comments, optional fields, multiword ranges and a valid tree or no heads.
pub fn fuzz_block<R: Rng>(rng: &mut R, ordinal: usize) -> String {
    let n = rng.random_range(1..=25);
    let mut out = format!("# sent_id = s{}\n", ordinal);
    if rng.random_bool(0.5) {
        out.push_str("# text = sentence text with  spaces\n");
    }
    if rng.random_bool(0.2) {
        out.push_str("# newpar\n");
    }
    let heads: Option<Vec<usize>> = rng.random_bool(0.9).then(|| ruleparse_core::synth::random_tree(rng, n));
    let mut i = 1;
    while i <= n {
        if i < n && rng.random_bool(0.1) {
            out.push_str(&format!("{}-{}\t{}\t_\t_\t_\t_\t_\t_\t_\t_\n", i, i + 1, pick(rng, FORMS)));
        }
        let (head, rel) = match &heads {
            Some(h) => (h[i - 1].to_string(), if h[i - 1] == 0 { "root".into() } else { pick(rng, &["nsubj", "obj", "nmod:poss", "compound:redup"]) }),
            None => ("_".into(), "_".into()),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i,
            pick(rng, FORMS),
            maybe(rng, FORMS),
            maybe(rng, UPOS),
            maybe(rng, &["Noun", "Verb"]),
            joined(rng, FEATS),
            head,
            rel,
            if head != "_" && rng.random_bool(0.1) { format!("{}:{}", head, rel) } else { "_".into() },
            joined(rng, MISC),
        ));
        i += 1;
    }
    out.push('\n');
    out
}

/// A random bundle as some hybrid configuration would produce it.
pub fn fuzz_bundle<R: Rng>(rng: &mut R, inv: &SuffixInventory) -> FeatureBundle {
    let tags: Vec<&str> = inv.tags().collect();
    let mut b = FeatureBundle::default();
    if rng.random_bool(0.7) {
        b.rule_code = Some(*RuleCode::ALL.choose(rng).unwrap());
    }
    match rng.random_range(0..4) {
        0 => {
            b.last_suffix = Some(if rng.random_bool(0.2) { "NONE".into() } else { pick(rng, &tags) });
        }
        1 => {
            let k = rng.random_range(0..5);
            b.inflectional_suffixes = Some((0..k).map(|_| pick(rng, &tags)).collect());
        }
        2 => {
            let mut v = vec![0.0; tags.len()];
            if rng.random_bool(0.8) {
                let hits = rng.random_range(1..=8);
                let counts: Vec<(usize, u32)> =
                    (0..hits).map(|_| (rng.random_range(0..tags.len()), rng.random_range(1..1000))).collect();
                let total: u32 = counts.iter().map(|c| c.1).sum();
                for (j, c) in counts {
                    v[j] += c as f64 / total as f64;
                }
            }
            b.suffix_vector = Some(v);
        }
        _ => {}
    }
    b
}

const LEMMAS: &[&str] = &["ev", "git", "güzel", "kitap", "oku", "göz", "su"];
const POS: &[&str] = &["Noun", "Verb", "Adj"];

/// Analyses over a small lemma set with inventory tags, root POS tags and
/// an occasional tag outside the inventory.
pub fn random_analyses<R: Rng>(rng: &mut R, inv: &SuffixInventory, n: usize) -> Vec<MorphAnalysis> {
    let tags: Vec<&str> = inv.tags().collect();
    (0..n)
        .map(|_| {
            let k = rng.random_range(0..6);
            let mut t: Vec<String> = (0..k).map(|_| tags.choose(rng).unwrap().to_string()).collect();
            if rng.random_bool(0.1) {
                t.push("Unknown".into());
            }
            let pos = rng.random_bool(0.8).then(|| *POS.choose(rng).unwrap());
            MorphAnalysis::new(*LEMMAS.choose(rng).unwrap(), pos, t)
        })
        .collect()
}

/// Checks the structural guarantees of one parse, returning a description
/// of the first violation.
pub fn check_parse(sentence: &Sentence, rules: RuleSet, parse: &Parse) -> Result<(), String> {
    let n = sentence.len();
    let mut head = vec![None; n + 1];
    for a in &parse.assignments {
        if a.dependent == 0 || a.dependent > n || a.head == 0 || a.head > n || a.head == a.dependent {
            return Err(format!("bad arc {:?}", a));
        }
        if head[a.dependent].replace(a.head).is_some() {
            return Err(format!("token {} assigned twice", a.dependent));
        }
        if a.code == RuleCode::None || !rules.contains(a.code) {
            return Err(format!("{:?} uses a disabled rule", a));
        }
    }
    for start in 1..=n {
        let mut node = start;
        for _ in 0..=n {
            match head[node] {
                Some(h) => node = h,
                None => break,
            }
        }
        if head[node].is_some() {
            return Err(format!("cycle through {}", start));
        }
    }
    let codes = parse.codes();
    for (i, code) in codes.iter().enumerate() {
        let expected = parse.assignments.iter().find(|a| a.dependent == i + 1).map_or(RuleCode::None, |a| a.code);
        if *code != expected {
            return Err(format!("code of {} is {:?}, expected {:?}", i + 1, code, expected));
        }
    }
    let r = &parse.report;
    if r.assigned != parse.assignments.len() || r.tokens != n {
        return Err(format!("report counts {:?}", r));
    }
    if RuleCode::RULES.iter().map(|c| r.fires_for(*c)).sum::<usize>() != r.assigned {
        return Err(format!("fires do not add up: {:?}", r));
    }
    Ok(())
}
