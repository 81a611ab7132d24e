//! Reading and writing CoNLL-U treebanks.
//!
//! Only syntactic words become [`Token`]s. Multiword-token range lines are kept
//! verbatim so that a parsed file can be written back unchanged, but they never
//! take part in rule application or scoring. Empty nodes (decimal ids) are
//! rejected.

use std::fmt;
use std::io::{self, BufRead, Write};

use indexmap::IndexMap;
use thiserror::Error;

/// Placeholder for an absent field.
pub const ABSENT: &str = "_";

/// Morphological features (`FEATS` column), kept in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Features(IndexMap<String, String>);

impl Features {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Inserts or replaces a feature. A replaced feature keeps its position.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn parse(field: &str) -> Result<Self, ParseErrorKind> {
        let mut feats = Features::new();
        if field == ABSENT {
            return Ok(feats);
        }
        for item in field.split('|') {
            let (key, value) = item
                .split_once('=')
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| ParseErrorKind::MalformedFeature(item.to_owned()))?;
            if feats.0.insert(key.to_owned(), value.to_owned()).is_some() {
                return Err(ParseErrorKind::DuplicateFeature(key.to_owned()));
            }
        }
        Ok(feats)
    }
}

impl fmt::Display for Features {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(ABSENT);
        }
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{}={}", k, v)?;
        }
        Ok(())
    }
}

/// The `MISC` column: ordered `Key=Value` entries. Entries without `=` are
/// stored with no value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Misc(IndexMap<String, Option<String>>);

impl Misc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(|v| v.as_deref())
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// Inserts or replaces an entry. New keys are appended; replaced keys keep
    /// their position.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.insert(key.into(), Some(value.into()));
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.0.shift_remove(key).flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_deref()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn parse(field: &str) -> Result<Self, ParseErrorKind> {
        let mut misc = Misc::new();
        if field == ABSENT {
            return Ok(misc);
        }
        for item in field.split('|') {
            if item.is_empty() {
                return Err(ParseErrorKind::MalformedMisc(field.to_owned()));
            }
            let (key, value) = match item.split_once('=') {
                Some((k, v)) => (k, Some(v.to_owned())),
                None => (item, None),
            };
            if key.is_empty() {
                return Err(ParseErrorKind::MalformedMisc(item.to_owned()));
            }
            if misc.0.insert(key.to_owned(), value).is_some() {
                return Err(ParseErrorKind::DuplicateMisc(key.to_owned()));
            }
        }
        Ok(misc)
    }
}

impl fmt::Display for Misc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(ABSENT);
        }
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            match v {
                Some(v) => write!(f, "{}={}", k, v)?,
                None => f.write_str(k)?,
            }
        }
        Ok(())
    }
}

/// A syntactic word.
///
/// Optional string fields must not be `Some("_")` or `Some("")`; both are
/// unrepresentable in the file format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub upos: Option<String>,
    pub xpos: Option<String>,
    pub feats: Features,
    /// `Some(0)` marks the root.
    pub head: Option<usize>,
    pub deprel: Option<String>,
    pub deps: Option<String>,
    pub misc: Misc,
}

impl Token {
    pub fn new(id: usize, form: impl Into<String>) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: None,
            upos: None,
            xpos: None,
            feats: Features::new(),
            head: None,
            deprel: None,
            deps: None,
            misc: Misc::new(),
        }
    }

    pub fn with_lemma(mut self, lemma: impl Into<String>) -> Self {
        self.lemma = Some(lemma.into());
        self
    }

    pub fn with_upos(mut self, upos: impl Into<String>) -> Self {
        self.upos = Some(upos.into());
        self
    }

    pub fn with_feature(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.feats.insert(key, value);
        self
    }

    pub fn with_head(mut self, head: usize, deprel: impl Into<String>) -> Self {
        self.head = Some(head);
        self.deprel = Some(deprel.into());
        self
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt(v: &Option<String>) -> &str {
            v.as_deref().unwrap_or(ABSENT)
        }
        let head = self.head.map(|h| h.to_string());
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.form,
            opt(&self.lemma),
            opt(&self.upos),
            opt(&self.xpos),
            self.feats,
            head.as_deref().unwrap_or(ABSENT),
            opt(&self.deprel),
            opt(&self.deps),
            self.misc
        )
    }
}

/// A multiword-token range line such as `3-4  vardı  _ ...`, kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiwordToken {
    pub first: usize,
    pub last: usize,
    pub line: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    /// Full comment lines, including the leading `#`.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub multiword: Vec<MultiwordToken>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            comments: Vec::new(),
            tokens,
            multiword: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based id.
    pub fn token(&self, id: usize) -> Option<&Token> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Value of a `# key = value` comment.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.strip_prefix('#')?.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }

    /// Checks the structural invariants: contiguous ids, heads in range and
    /// not self-referential, and a single-rooted acyclic tree when every
    /// token has a head.
    pub fn validate(&self) -> Result<(), ParseErrorKind> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(ParseErrorKind::EmptySentence);
        }
        for (i, token) in self.tokens.iter().enumerate() {
            if token.id != i + 1 {
                return Err(ParseErrorKind::NonContiguousIds {
                    expected: i + 1,
                    found: token.id,
                });
            }
            if let Some(head) = token.head {
                if head > n {
                    return Err(ParseErrorKind::HeadOutOfRange { id: token.id, head });
                }
                if head == token.id {
                    return Err(ParseErrorKind::SelfLoop(token.id));
                }
            }
        }
        for mw in &self.multiword {
            if mw.first < 1 || mw.last <= mw.first || mw.last > n {
                return Err(ParseErrorKind::BadRange(format!("{}-{}", mw.first, mw.last)));
            }
        }
        if self.tokens.iter().all(|t| t.head.is_some()) {
            check_tree(self.tokens.iter().map(|t| t.head.unwrap_or(0)))?;
        }
        Ok(())
    }
}

/// Checks that `heads` (head of token i+1 at index i) forms one tree rooted at 0.
fn check_tree(heads: impl Iterator<Item = usize>) -> Result<(), ParseErrorKind> {
    let heads: Vec<usize> = heads.collect();
    let roots = heads.iter().filter(|&&h| h == 0).count();
    match roots {
        0 => return Err(ParseErrorKind::NoRoot),
        1 => {}
        n => return Err(ParseErrorKind::MultipleRoots(n)),
    }
    // 0 = unvisited, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; heads.len() + 1];
    state[0] = 2;
    for start in 1..=heads.len() {
        let mut path = Vec::new();
        let mut node = start;
        while state[node] == 0 {
            state[node] = 1;
            path.push(node);
            node = heads[node - 1];
        }
        if state[node] == 1 {
            return Err(ParseErrorKind::Cycle(node));
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for comment in &self.comments {
            writeln!(f, "{}", comment)?;
        }
        let mut ranges = self.multiword.iter().peekable();
        for token in &self.tokens {
            while let Some(mw) = ranges.next_if(|mw| mw.first <= token.id) {
                writeln!(f, "{}", mw.line)?;
            }
            writeln!(f, "{}", token)?;
        }
        for mw in ranges {
            writeln!(f, "{}", mw.line)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected 10 tab-separated columns, found {0}")]
    ColumnCount(usize),
    #[error("empty {0} column")]
    EmptyField(&'static str),
    #[error("empty nodes are not supported (id {0})")]
    EmptyNode(String),
    #[error("invalid token id {0:?}")]
    BadId(String),
    #[error("invalid multiword range {0:?}")]
    BadRange(String),
    #[error("non-contiguous ids: expected {expected}, found {found}")]
    NonContiguousIds { expected: usize, found: usize },
    #[error("invalid head {0:?}")]
    BadHead(String),
    #[error("head {head} of token {id} is out of range")]
    HeadOutOfRange { id: usize, head: usize },
    #[error("token {0} is its own head")]
    SelfLoop(usize),
    #[error("no token is attached to the root")]
    NoRoot,
    #[error("{0} tokens are attached to the root")]
    MultipleRoots(usize),
    #[error("head cycle through token {0}")]
    Cycle(usize),
    #[error("malformed feature {0:?}")]
    MalformedFeature(String),
    #[error("duplicate feature {0:?}")]
    DuplicateFeature(String),
    #[error("malformed misc entry {0:?}")]
    MalformedMisc(String),
    #[error("duplicate misc key {0:?}")]
    DuplicateMisc(String),
    #[error("comment after token lines")]
    MisplacedComment,
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("read failed: {0}")]
    Io(String),
}

/// A format error, located by 1-based sentence ordinal and line number.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("sentence {sentence}, line {line}: {kind}")]
pub struct ParseError {
    pub sentence: usize,
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn parse_id(field: &str) -> Result<usize, ParseErrorKind> {
    match field.parse::<usize>() {
        Ok(id) if id >= 1 && !field.starts_with('0') && !field.starts_with('+') => Ok(id),
        _ => Err(ParseErrorKind::BadId(field.to_owned())),
    }
}

fn parse_range(field: &str) -> Result<(usize, usize), ParseErrorKind> {
    let bad = || ParseErrorKind::BadRange(field.to_owned());
    let (a, b) = field.split_once('-').ok_or_else(bad)?;
    let first = parse_id(a).map_err(|_| bad())?;
    let last = parse_id(b).map_err(|_| bad())?;
    if last <= first {
        return Err(bad());
    }
    Ok((first, last))
}

fn optional(field: &str) -> Option<String> {
    (field != ABSENT).then(|| field.to_owned())
}

const COLUMN_NAMES: [&str; 10] = [
    "ID", "FORM", "LEMMA", "UPOS", "XPOS", "FEATS", "HEAD", "DEPREL", "DEPS", "MISC",
];

enum Line {
    Token(Token),
    Range(MultiwordToken),
}

fn parse_line(line: &str) -> Result<Line, ParseErrorKind> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ParseErrorKind::ColumnCount(cols.len()));
    }
    if let Some(i) = cols.iter().position(|c| c.is_empty()) {
        return Err(ParseErrorKind::EmptyField(COLUMN_NAMES[i]));
    }
    let id = cols[0];
    if id.contains('.') {
        return Err(ParseErrorKind::EmptyNode(id.to_owned()));
    }
    if id.contains('-') {
        let (first, last) = parse_range(id)?;
        return Ok(Line::Range(MultiwordToken {
            first,
            last,
            line: line.to_owned(),
        }));
    }
    let head = match cols[6] {
        ABSENT => None,
        h => match h.parse::<usize>() {
            Ok(v) if h == v.to_string() => Some(v),
            _ => return Err(ParseErrorKind::BadHead(h.to_owned())),
        },
    };
    Ok(Line::Token(Token {
        id: parse_id(id)?,
        form: cols[1].to_owned(),
        lemma: optional(cols[2]),
        upos: optional(cols[3]),
        xpos: optional(cols[4]),
        feats: Features::parse(cols[5])?,
        head,
        deprel: optional(cols[7]),
        deps: optional(cols[8]),
        misc: Misc::parse(cols[9])?,
    }))
}

/// Streaming sentence reader over any buffered source.
pub struct SentenceReader<R> {
    reader: R,
    line_no: usize,
    ordinal: usize,
    buf: String,
    failed: bool,
}

impl<R: BufRead> SentenceReader<R> {
    pub fn new(reader: R) -> Self {
        SentenceReader {
            reader,
            line_no: 0,
            ordinal: 0,
            buf: String::new(),
            failed: false,
        }
    }

    fn read_sentence(&mut self) -> Result<Option<Sentence>, ParseError> {
        let mut sentence = Sentence::default();
        let mut start_line = 0;
        loop {
            self.buf.clear();
            let read = self.reader.read_line(&mut self.buf).map_err(|e| {
                let kind = if e.kind() == io::ErrorKind::InvalidData {
                    ParseErrorKind::InvalidUtf8
                } else {
                    ParseErrorKind::Io(e.to_string())
                };
                ParseError {
                    sentence: self.ordinal + 1,
                    line: self.line_no + 1,
                    kind,
                }
            })?;
            if read == 0 {
                break;
            }
            self.line_no += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                if start_line == 0 {
                    continue;
                }
                break;
            }
            if start_line == 0 {
                start_line = self.line_no;
                self.ordinal += 1;
            }
            let err = |kind| ParseError {
                sentence: self.ordinal,
                line: self.line_no,
                kind,
            };
            if line.starts_with('#') {
                if !sentence.tokens.is_empty() || !sentence.multiword.is_empty() {
                    return Err(err(ParseErrorKind::MisplacedComment));
                }
                sentence.comments.push(line.to_owned());
                continue;
            }
            match parse_line(line).map_err(err)? {
                Line::Token(token) => {
                    let expected = sentence.tokens.len() + 1;
                    if token.id != expected {
                        return Err(err(ParseErrorKind::NonContiguousIds {
                            expected,
                            found: token.id,
                        }));
                    }
                    if token.head == Some(token.id) {
                        return Err(err(ParseErrorKind::SelfLoop(token.id)));
                    }
                    sentence.tokens.push(token);
                }
                Line::Range(mw) => {
                    if mw.first != sentence.tokens.len() + 1 {
                        return Err(err(ParseErrorKind::BadRange(format!(
                            "{}-{}",
                            mw.first, mw.last
                        ))));
                    }
                    sentence.multiword.push(mw);
                }
            }
        }
        if start_line == 0 {
            return Ok(None);
        }
        // Per-line checks already passed; remaining failures are sentence-wide.
        sentence.validate().map_err(|kind| ParseError {
            sentence: self.ordinal,
            line: start_line,
            kind,
        })?;
        Ok(Some(sentence))
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = Result<Sentence, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let result = self.read_sentence().transpose();
        if matches!(result, Some(Err(_))) {
            self.failed = true;
        }
        result
    }
}

pub fn read_conllu<R: BufRead>(reader: R) -> Result<Vec<Sentence>, ParseError> {
    SentenceReader::new(reader).collect()
}

pub fn parse_conllu(input: &str) -> Result<Vec<Sentence>, ParseError> {
    read_conllu(input.as_bytes())
}

/// Parses raw bytes, reporting invalid UTF-8 as a located error.
pub fn parse_conllu_bytes(input: &[u8]) -> Result<Vec<Sentence>, ParseError> {
    match std::str::from_utf8(input) {
        Ok(text) => parse_conllu(text),
        Err(e) => {
            let valid = &input[..e.valid_up_to()];
            // Earlier complete sentences are parsed first so that their errors
            // win and the ordinal of the broken sentence is exact.
            let boundary = valid
                .windows(2)
                .rposition(|w| w == b"\n\n")
                .map_or(0, |p| p + 2);
            let ordinal = read_conllu(&valid[..boundary])?.len() + 1;
            Err(ParseError {
                sentence: ordinal,
                line: valid.iter().filter(|&&b| b == b'\n').count() + 1,
                kind: ParseErrorKind::InvalidUtf8,
            })
        }
    }
}

pub fn write_conllu<W: Write>(mut writer: W, sentences: &[Sentence]) -> io::Result<()> {
    for sentence in sentences {
        writeln!(writer, "{}", sentence)?;
    }
    Ok(())
}

pub fn to_conllu_string(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for sentence in sentences {
        out.push_str(&sentence.to_string());
        out.push('\n');
    }
    out
}
