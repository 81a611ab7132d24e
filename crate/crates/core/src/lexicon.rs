//! Dictionaries consulted by the rules: complex predicates and idioms, the
//! three compound classes, and two adverb classes.
//!
//! Each class lives in its own UTF-8 file with one entry per line. Entries
//! are compared after Turkish-aware lowercasing (`I` → `ı`, `İ` → `i`).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

/// One lexicon file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LexiconFile {
    ComplexPredicates,
    NounCompounds,
    PossessiveCompounds,
    ReduplicatedCompounds,
    DegreeAdverbs,
    HeadEmphasizingAdverbs,
}

impl LexiconFile {
    pub const ALL: [LexiconFile; 6] = [
        LexiconFile::ComplexPredicates,
        LexiconFile::NounCompounds,
        LexiconFile::PossessiveCompounds,
        LexiconFile::ReduplicatedCompounds,
        LexiconFile::DegreeAdverbs,
        LexiconFile::HeadEmphasizingAdverbs,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            LexiconFile::ComplexPredicates => "cpi.txt",
            LexiconFile::NounCompounds => "nc.txt",
            LexiconFile::PossessiveCompounds => "pc.txt",
            LexiconFile::ReduplicatedCompounds => "redup.txt",
            LexiconFile::DegreeAdverbs => "adv_degree.txt",
            LexiconFile::HeadEmphasizingAdverbs => "adv_emph.txt",
        }
    }

    fn compound_class(self) -> Option<CompoundClass> {
        match self {
            LexiconFile::ComplexPredicates => Some(CompoundClass::ComplexPredicate),
            LexiconFile::NounCompounds => Some(CompoundClass::NounCompound),
            LexiconFile::PossessiveCompounds => Some(CompoundClass::PossessiveCompound),
            LexiconFile::ReduplicatedCompounds => Some(CompoundClass::Reduplicated),
            _ => None,
        }
    }
}

/// Multiword entry classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompoundClass {
    ComplexPredicate,
    NounCompound,
    PossessiveCompound,
    Reduplicated,
}

impl CompoundClass {
    pub const ALL: [CompoundClass; 4] = [
        CompoundClass::ComplexPredicate,
        CompoundClass::NounCompound,
        CompoundClass::PossessiveCompound,
        CompoundClass::Reduplicated,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error("{file}, line {line}: {message}")]
    Entry {
        file: String,
        line: usize,
        message: String,
    },
}

/// Lowercases with the Turkish dotted/dotless i mapping.
pub fn turkish_fold(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            'I' if chars.peek() == Some(&'\u{307}') => {
                chars.next();
                out.push('i');
            }
            'I' => out.push('ı'),
            'İ' => out.push('i'),
            c => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// A token as seen by multiword matching.
#[derive(Clone, Copy, Debug)]
pub struct WordKey<'a> {
    pub form: &'a str,
    pub lemma: &'a str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct EntrySet {
    joined: HashSet<String>,
    by_first: HashMap<String, Vec<Vec<String>>>,
}

impl EntrySet {
    fn insert(&mut self, components: Vec<String>) -> bool {
        if !self.joined.insert(components.join(" ")) {
            return false;
        }
        self.by_first
            .entry(components[0].clone())
            .or_default()
            .push(components);
        true
    }

    fn len(&self) -> usize {
        self.joined.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LexiconCounts {
    pub complex_predicates: usize,
    pub noun_compounds: usize,
    pub possessive_compounds: usize,
    pub reduplicated_compounds: usize,
    pub degree_adverbs: usize,
    pub head_emphasizing_adverbs: usize,
}

/// Immutable after loading.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    compounds: [EntrySet; 4],
    degree_adverbs: HashSet<String>,
    /// Plain emphasizers such as `bile`.
    emphasizers: HashSet<String>,
    /// Emphasizers that require an ablative word before them (`-DAn önce`).
    ablative_emphasizers: HashSet<String>,
}

const ABLATIVE_PREFIX: &str = "-dan ";

const SAMPLE: [(LexiconFile, &str); 6] = [
    (LexiconFile::ComplexPredicates, include_str!("../data/lexicon/cpi.txt")),
    (LexiconFile::NounCompounds, include_str!("../data/lexicon/nc.txt")),
    (LexiconFile::PossessiveCompounds, include_str!("../data/lexicon/pc.txt")),
    (LexiconFile::ReduplicatedCompounds, include_str!("../data/lexicon/redup.txt")),
    (LexiconFile::DegreeAdverbs, include_str!("../data/lexicon/adv_degree.txt")),
    (LexiconFile::HeadEmphasizingAdverbs, include_str!("../data/lexicon/adv_emph.txt")),
];

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The small bundled starter lexicon.
    pub fn sample() -> Self {
        let mut lex = Lexicon::new();
        for (file, text) in SAMPLE {
            lex.add_text(file, text).expect("bundled lexicon is valid");
        }
        lex
    }

    /// Loads `cpi.txt`, `nc.txt`, `pc.txt`, `redup.txt`, `adv_degree.txt` and
    /// `adv_emph.txt` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let dir = dir.as_ref();
        let mut lex = Lexicon::new();
        for file in LexiconFile::ALL {
            let path = dir.join(file.file_name());
            let text = fs::read_to_string(&path).map_err(|e| LexiconError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
            lex.add_text(file, &text)?;
        }
        Ok(lex)
    }

    /// Adds every entry of one file's text. Blank lines and `#` comments are
    /// skipped; duplicates collapse.
    pub fn add_text(&mut self, file: LexiconFile, text: &str) -> Result<(), LexiconError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.add_entry(file, line).map_err(|message| LexiconError::Entry {
                file: file.file_name().to_owned(),
                line: i + 1,
                message,
            })?;
        }
        Ok(())
    }

    /// Adds one entry; returns whether it was new.
    pub fn add_entry(&mut self, file: LexiconFile, entry: &str) -> Result<bool, String> {
        let components: Vec<String> = entry.split_whitespace().map(turkish_fold).collect();
        if components.is_empty() {
            return Err("empty entry".into());
        }
        if let Some(class) = file.compound_class() {
            if components.len() < 2 {
                return Err(format!("entry {:?} has fewer than 2 components", entry));
            }
            return Ok(self.compounds[class.slot()].insert(components));
        }
        let joined = components.join(" ");
        match file {
            LexiconFile::DegreeAdverbs if components.len() == 1 => Ok(self.degree_adverbs.insert(joined)),
            LexiconFile::HeadEmphasizingAdverbs if components.len() == 1 => Ok(self.emphasizers.insert(joined)),
            LexiconFile::HeadEmphasizingAdverbs if components.len() == 2 && joined.starts_with(ABLATIVE_PREFIX) => {
                Ok(self.ablative_emphasizers.insert(components[1].clone()))
            }
            _ => Err(format!("unsupported adverb entry {:?}", entry)),
        }
    }

    pub fn counts(&self) -> LexiconCounts {
        LexiconCounts {
            complex_predicates: self.compounds[0].len(),
            noun_compounds: self.compounds[1].len(),
            possessive_compounds: self.compounds[2].len(),
            reduplicated_compounds: self.compounds[3].len(),
            degree_adverbs: self.degree_adverbs.len(),
            head_emphasizing_adverbs: self.emphasizers.len() + self.ablative_emphasizers.len(),
        }
    }

    pub fn class_len(&self, class: CompoundClass) -> usize {
        self.compounds[class.slot()].len()
    }

    /// Whether the space-joined, case-folded pair is a two-word entry of `class`.
    pub fn match_multiword(&self, class: CompoundClass, pair: (&str, &str)) -> bool {
        let key = format!("{} {}", turkish_fold(pair.0), turkish_fold(pair.1));
        self.compounds[class.slot()].joined.contains(&key)
    }

    /// Longest entry of `class` matching a prefix of `words` (at least two
    /// words). Each component matches the word's form or lemma, except the
    /// last component of a complex predicate, which is verbal and matches the
    /// lemma only. Returns the number of words matched.
    pub fn match_prefix(&self, class: CompoundClass, words: &[WordKey<'_>]) -> Option<usize> {
        let set = &self.compounds[class.slot()];
        if set.by_first.is_empty() || words.len() < 2 {
            return None;
        }
        let first = (turkish_fold(words[0].form), turkish_fold(words[0].lemma));
        let mut candidates: Vec<&Vec<String>> = set.by_first.get(&first.1).into_iter().flatten().collect();
        if first.0 != first.1 {
            candidates.extend(set.by_first.get(&first.0).into_iter().flatten());
        }
        let longest = candidates.iter().map(|e| e.len()).max()?;
        let mut folded = vec![first];
        folded.extend(
            words[1..longest.min(words.len())]
                .iter()
                .map(|w| (turkish_fold(w.form), turkish_fold(w.lemma))),
        );
        let mut best = None;
        for entry in candidates {
            let k = entry.len();
            if k > words.len() || best.is_some_and(|b| b >= k) {
                continue;
            }
            let matches = entry.iter().enumerate().all(|(i, comp)| {
                let (form, lemma) = &folded[i];
                let verbal = class == CompoundClass::ComplexPredicate && i + 1 == k;
                comp == lemma || (!verbal && comp == form)
            });
            if matches {
                best = Some(k);
            }
        }
        best
    }

    pub fn is_degree_adverb(&self, word: WordKey<'_>) -> bool {
        self.degree_adverbs.contains(&turkish_fold(word.lemma)) || self.degree_adverbs.contains(&turkish_fold(word.form))
    }

    /// Whether `word` is an adverb that emphasizes the preceding word.
    /// `after_ablative` tells whether that preceding word is ablative.
    pub fn is_head_emphasizing(&self, word: WordKey<'_>, after_ablative: bool) -> bool {
        let lemma = turkish_fold(word.lemma);
        let form = turkish_fold(word.form);
        let plain = self.emphasizers.contains(&lemma) || self.emphasizers.contains(&form);
        let ablative = after_ablative
            && (self.ablative_emphasizers.contains(&lemma) || self.ablative_emphasizers.contains(&form));
        plain || ablative
    }
}

impl fmt::Display for LexiconCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cpi={} nc={} pc={} redup={} adv_degree={} adv_emph={}",
            self.complex_predicates,
            self.noun_compounds,
            self.possessive_compounds,
            self.reduplicated_compounds,
            self.degree_adverbs,
            self.head_emphasizing_adverbs
        )
    }
}
