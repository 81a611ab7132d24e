//! Morphological analyses and the suffix views used as parser features.
//!
//! Suffixes are abstract morpheme tags (`A3pl`, `Gen`, ...) rather than
//! surface allomorphs, so vowel-harmony variants of one suffix share a tag.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Root part-of-speech tags and minor category markers. These may appear in
/// an analysis but are never suffixes.
pub const ROOT_POS_TAGS: &[&str] = &[
    "Noun", "Adj", "Adverb", "Verb", "Pron", "Det", "Conj", "Postp", "Num", "Interj", "Punc",
    "Ques", "Dup", "Prop", "Abbr", "Card", "Ord", "Dist", "Range", "Real", "Ratio", "Time",
    "Pers", "Demons", "Quant",
];

/// Marker exported for words that have no suffix. Not a valid tag name.
pub const NO_SUFFIX: &str = "NONE";

pub fn is_root_pos_tag(tag: &str) -> bool {
    ROOT_POS_TAGS.contains(&tag)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MorphError {
    #[error("tag {0:?} is not in the suffix inventory")]
    UnknownTag(String),
    #[error("empty lemma")]
    EmptyLemma,
    #[error("malformed morpheme sequence {0:?}")]
    MalformedTags(String),
    #[error("inventory line {line}: {message}")]
    Inventory { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// A disambiguated analysis of one token: lemma, root POS, and its suffix
/// tags in suffixation order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorphAnalysis {
    pub lemma: String,
    pub pos: Option<String>,
    pub tags: Vec<String>,
}

impl MorphAnalysis {
    pub fn new<I, S>(lemma: impl Into<String>, pos: Option<&str>, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MorphAnalysis {
            lemma: lemma.into(),
            pos: pos.map(str::to_owned),
            tags: tags.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses a `+`-joined tag sequence such as `Noun+A3pl+Gen`. A leading
    /// root POS tag becomes [`pos`](Self::pos); `_` means no tags at all.
    pub fn parse(lemma: &str, tags: &str) -> Result<Self, MorphError> {
        if lemma.is_empty() || lemma.chars().any(char::is_whitespace) {
            return Err(MorphError::EmptyLemma);
        }
        if tags == "_" {
            return Ok(MorphAnalysis::new(lemma, None, Vec::<String>::new()));
        }
        let parts: Vec<&str> = tags.split('+').collect();
        let well_formed = |t: &&str| {
            !t.is_empty()
                && *t != NO_SUFFIX
                && t.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
        };
        if !parts.iter().all(well_formed) {
            return Err(MorphError::MalformedTags(tags.to_owned()));
        }
        let (pos, rest) = match parts.split_first() {
            Some((first, rest)) if is_root_pos_tag(first) => (Some(*first), rest),
            _ => (None, &parts[..]),
        };
        Ok(MorphAnalysis::new(lemma, pos, rest.iter().copied()))
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// The suffix tags, skipping category markers such as `Prop`.
    pub fn suffixes(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str).filter(|t| !is_root_pos_tag(t))
    }

    /// Final suffix of the word, inflectional or derivational.
    pub fn last_suffix(&self) -> Option<&str> {
        self.suffixes().last()
    }

    /// The sequence in sidecar notation, e.g. `Noun+A3pl+Gen`.
    pub fn tag_string(&self) -> String {
        let mut parts: Vec<&str> = Vec::with_capacity(self.tags.len() + 1);
        parts.extend(self.pos.as_deref());
        parts.extend(self.tags.iter().map(String::as_str));
        if parts.is_empty() {
            "_".to_owned()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for MorphAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.lemma, self.tag_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuffixClass {
    Inflectional,
    Derivational,
}

impl SuffixClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SuffixClass::Inflectional => "inflectional",
            SuffixClass::Derivational => "derivational",
        }
    }
}

const DEFAULT_INVENTORY: &str = include_str!("../data/suffixes.tsv");

/// Suffix tags with their class. Entry order fixes the column index used by
/// suffix vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixInventory {
    entries: Vec<(String, SuffixClass)>,
    index: HashMap<String, usize>,
}

impl SuffixInventory {
    /// Parses `tag<TAB>inflectional|derivational` lines. Blank lines and
    /// `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| MorphError::Inventory {
                line: i + 1,
                message,
            };
            let (tag, class) = line
                .split_once('\t')
                .ok_or_else(|| err(format!("expected tag<TAB>class, got {:?}", line)))?;
            let class = match class {
                "inflectional" => SuffixClass::Inflectional,
                "derivational" => SuffixClass::Derivational,
                other => return Err(err(format!("unknown suffix class {:?}", other))),
            };
            if tag.is_empty() || tag == NO_SUFFIX || is_root_pos_tag(tag) || tag.contains(char::is_whitespace) {
                return Err(err(format!("invalid tag {:?}", tag)));
            }
            if index.insert(tag.to_owned(), entries.len()).is_some() {
                return Err(err(format!("duplicate tag {:?}", tag)));
            }
            entries.push((tag.to_owned(), class));
        }
        if entries.is_empty() {
            return Err(MorphError::Inventory {
                line: 0,
                message: "inventory is empty".into(),
            });
        }
        Ok(SuffixInventory { entries, index })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MorphError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| MorphError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Number of suffixes, i.e. the suffix-vector dimension.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn class_of(&self, tag: &str) -> Option<SuffixClass> {
        self.index_of(tag).map(|i| self.entries[i].1)
    }

    pub fn tag(&self, index: usize) -> &str {
        &self.entries[index].0
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, SuffixClass)> {
        self.entries.iter().map(|(t, c)| (t.as_str(), *c))
    }

    /// The inflectional suffixes of `analysis`, in order. Category markers
    /// are skipped; any other tag missing from the inventory is an error.
    pub fn inflectional_suffixes<'a>(
        &self,
        analysis: &'a MorphAnalysis,
    ) -> Result<Vec<&'a str>, MorphError> {
        let mut out = Vec::new();
        for tag in analysis.suffixes() {
            match self.class_of(tag) {
                Some(SuffixClass::Inflectional) => out.push(tag),
                Some(SuffixClass::Derivational) => {}
                None => return Err(MorphError::UnknownTag(tag.to_owned())),
            }
        }
        Ok(out)
    }

    /// Serializes back to the inventory file format.
    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|(t, c)| format!("{}\t{}\n", t, c.as_str()))
            .collect()
    }
}

impl Default for SuffixInventory {
    /// The bundled 81-suffix Turkish inventory.
    fn default() -> Self {
        Self::parse(DEFAULT_INVENTORY).expect("bundled inventory is valid")
    }
}
