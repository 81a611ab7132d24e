//! Seeded synthetic treebanks for tests and benchmarks.
//!
//! Sentences mix random parts of speech with fragments that hit the bundled
//! [`Lexicon::sample`](crate::lexicon::Lexicon::sample) entries, and carry a
//! random (valid) gold tree plus matching morphological analyses.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::{Sentence, Token};
use crate::morph::MorphAnalysis;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub min_len: usize,
    pub max_len: usize,
    /// Chance that the next slot is filled with a lexicon fragment.
    pub lexicon_rate: f64,
    /// Chance that a token's UPOS is left empty.
    pub missing_upos_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_len: 1,
            max_len: 30,
            lexicon_rate: 0.15,
            missing_upos_rate: 0.05,
        }
    }
}

const NOUNS: &[&str] = &["ev", "okul", "kitap", "masa", "su", "adam", "çocuk", "makine", "yağ", "göz"];
const PROPER: &[&str] = &["Ali", "Ayşe", "Ankara", "Mustafa", "Kemal"];
const PRONOUNS: &[&str] = &["ben", "o", "biz", "onlar"];
const ADJECTIVES: &[&str] = &["güzel", "büyük", "eski", "yeni", "küçük", "bulanık", "anlamsız"];
const ADVERBS: &[&str] = &["hemen", "hep", "çok", "daha", "bile", "sonra", "önce", "az"];
const VERBS: &[&str] = &["gel", "git", "gör", "yap", "ak", "çevir", "şaşır"];
const DETERMINERS: &[&str] = &["bu", "bir", "her", "şu"];
const OTHER: &[(&str, &str, &str)] = &[("ve", "CCONJ", "Conj"), ("ile", "ADP", "Postp"), (".", "PUNCT", "Punc")];
const DEPRELS: &[&str] = &["nsubj", "obj", "obl", "nmod", "amod", "advmod", "det", "compound", "conj", "punct"];

/// `(form, upos, lemma, analysis)` runs that match bundled lexicon entries.
const FRAGMENTS: &[&[(&str, &str, &str, &str)]] = &[
    &[("kabul", "NOUN", "kabul", "Noun+A3sg+Pnon+Nom"), ("etti", "VERB", "et", "Verb+Pos+Past+A3sg")],
    &[("yerine", "NOUN", "yer", "Noun+A3sg+P3sg+Dat"), ("getirdi", "VERB", "getir", "Verb+Pos+Past+A3sg")],
    &[("göz", "NOUN", "göz", "Noun+A3sg+Pnon+Nom"), ("yumdu", "VERB", "yum", "Verb+Pos+Past+A3sg")],
    &[("kuru", "ADJ", "kuru", "Adj"), ("yemiş", "NOUN", "yemiş", "Noun+A3sg+Pnon+Nom")],
    &[("ders", "NOUN", "ders", "Noun+A3sg+Pnon+Nom"), ("kitabı", "NOUN", "kitap", "Noun+A3sg+P3sg+Nom")],
    &[("yavaş", "ADV", "yavaş", "Adverb"), ("yavaş", "ADV", "yavaş", "Adverb")],
    &[("arka", "NOUN", "arka", "Noun+A3sg+Pnon+Nom"), ("arkaya", "NOUN", "arka", "Noun+A3sg+Pnon+Dat")],
    &[
        ("ağzı", "NOUN", "ağız", "Noun+A3sg+P3sg+Nom"),
        ("açık", "ADJ", "açık", "Adj"),
        ("kaldı", "VERB", "kal", "Verb+Pos+Past+A3sg"),
    ],
];

const CASES: &[(&str, &str)] = &[
    ("Nom", "Nom"),
    ("Gen", "Gen"),
    ("Acc", "Acc"),
    ("Dat", "Dat"),
    ("Loc", "Loc"),
    ("Abl", "Abl"),
];

struct Draft {
    form: String,
    upos: &'static str,
    lemma: String,
    analysis: MorphAnalysis,
    feats: Vec<(&'static str, String)>,
}

fn nominal<R: Rng>(rng: &mut R, words: &[&str], upos: &'static str, pos: &str) -> Draft {
    let lemma = *words.choose(rng).unwrap();
    let plural = rng.random_bool(0.2);
    let possessive = rng.random_bool(0.3);
    let (case, ud_case) = *CASES.choose(rng).unwrap();
    let mut tags = vec![if plural { "A3pl" } else { "A3sg" }];
    tags.push(if possessive { "P3sg" } else { "Pnon" });
    tags.push(case);
    let mut feats = vec![("Case", ud_case.to_owned()), ("Number", if plural { "Plur" } else { "Sing" }.to_owned())];
    if possessive {
        feats.push(("Person[psor]", "3".to_owned()));
    }
    let mut all = Vec::new();
    if upos == "PROPN" {
        all.push("Prop");
    }
    all.extend(tags);
    let form = if case == "Nom" && !plural && !possessive {
        lemma.to_owned()
    } else {
        format!("{}-{}", lemma, case.to_lowercase())
    };
    Draft {
        form,
        upos,
        lemma: lemma.to_owned(),
        analysis: MorphAnalysis::new(lemma, Some(pos), all),
        feats,
    }
}

fn plain(lemma: &str, form: &str, upos: &'static str, tags: &str) -> Draft {
    Draft {
        form: form.to_owned(),
        upos,
        lemma: lemma.to_owned(),
        analysis: MorphAnalysis::parse(lemma, tags).expect("static analysis"),
        feats: Vec::new(),
    }
}

fn random_word<R: Rng>(rng: &mut R) -> Draft {
    match rng.random_range(0..10) {
        0..=2 => nominal(rng, NOUNS, "NOUN", "Noun"),
        3 => nominal(rng, PROPER, "PROPN", "Noun"),
        4 => nominal(rng, PRONOUNS, "PRON", "Pron"),
        5 => {
            let l = ADJECTIVES.choose(rng).unwrap();
            plain(l, l, "ADJ", "Adj")
        }
        6 => {
            let l = ADVERBS.choose(rng).unwrap();
            plain(l, l, "ADV", "Adverb")
        }
        7 => {
            let l = VERBS.choose(rng).unwrap();
            plain(l, &format!("{}di", l), "VERB", "Verb+Pos+Past+A3sg")
        }
        8 => {
            let l = DETERMINERS.choose(rng).unwrap();
            plain(l, l, "DET", "Det")
        }
        _ => {
            let (l, upos, tags) = *OTHER.choose(rng).unwrap();
            plain(l, l, upos, tags)
        }
    }
}

/// A uniformly random rooted tree over `n` tokens: heads (0 = root).
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k] - 1] = order[rng.random_range(0..k)];
    }
    heads
}

/// One sentence with its gold tree and per-token analyses.
pub fn random_sentence<R: Rng>(rng: &mut R, cfg: &SynthConfig) -> (Sentence, Vec<MorphAnalysis>) {
    let target = rng.random_range(cfg.min_len.max(1)..=cfg.max_len.max(cfg.min_len.max(1)));
    let mut drafts: Vec<Draft> = Vec::with_capacity(target);
    while drafts.len() < target {
        if rng.random_bool(cfg.lexicon_rate) {
            let frag = FRAGMENTS.choose(rng).unwrap();
            if drafts.len() + frag.len() <= target {
                drafts.extend(frag.iter().map(|(f, u, l, t)| plain(l, f, u, t)));
                continue;
            }
        }
        drafts.push(random_word(rng));
    }
    let heads = random_tree(rng, drafts.len());
    let mut analyses = Vec::with_capacity(drafts.len());
    let tokens = drafts
        .into_iter()
        .zip(heads)
        .enumerate()
        .map(|(i, (d, head))| {
            let rel = if head == 0 { "root" } else { DEPRELS.choose(rng).unwrap() };
            let mut token = Token::new(i + 1, d.form).with_lemma(d.lemma).with_head(head, rel);
            if !rng.random_bool(cfg.missing_upos_rate) {
                token = token.with_upos(d.upos);
            }
            for (k, v) in d.feats {
                token = token.with_feature(k, v);
            }
            analyses.push(d.analysis);
            token
        })
        .collect();
    (Sentence::new(tokens), analyses)
}

/// `count` sentences from `seed`.
pub fn corpus(seed: u64, count: usize, cfg: &SynthConfig) -> (Vec<Sentence>, Vec<Vec<MorphAnalysis>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_sentence(&mut rng, cfg)).unzip()
}

/// A copy of `gold` where each head is replaced with probability `head_noise`
/// and each label with probability `label_noise`. Heads stay in range but
/// need not form a tree.
pub fn perturb<R: Rng>(rng: &mut R, gold: &Sentence, head_noise: f64, label_noise: f64) -> Sentence {
    let n = gold.tokens.len();
    let mut out = gold.clone();
    for t in &mut out.tokens {
        if rng.random_bool(head_noise) {
            let mut h = rng.random_range(0..=n);
            if h == t.id {
                h = 0;
            }
            t.head = Some(h);
        }
        if rng.random_bool(label_noise) {
            t.deprel = Some(DEPRELS.choose(rng).unwrap().to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentences_are_valid_and_aligned() {
        let (sentences, analyses) = corpus(3, 200, &SynthConfig::default());
        for (s, a) in sentences.iter().zip(&analyses) {
            assert!((1..=30).contains(&s.len()));
            assert_eq!(s.len(), a.len());
            s.validate().unwrap();
        }
    }

    #[test]
    fn seeded() {
        let cfg = SynthConfig::default();
        assert_eq!(corpus(9, 20, &cfg), corpus(9, 20, &cfg));
        assert_ne!(corpus(9, 20, &cfg).0, corpus(10, 20, &cfg).0);
    }
}
