//! Morphological-analysis sidecar files.
//!
//! One record per line: `sentence_ordinal<TAB>token_id<TAB>lemma<TAB>tag+tag+...`,
//! with 1-based positions. Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::conllu::Sentence;
use crate::morph::{MorphAnalysis, MorphError};

/// `(sentence ordinal, token id)`, both 1-based.
pub type Position = (usize, usize);

pub type SidecarMap = BTreeMap<Position, MorphAnalysis>;

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("line {line}: expected 4 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: invalid position {value:?}")]
    BadPosition { line: usize, value: String },
    #[error("line {line}: {source}")]
    Morph { line: usize, source: MorphError },
    #[error("line {line}: duplicate analysis for sentence {}, token {}", .position.0, .position.1)]
    Duplicate { line: usize, position: Position },
    #[error("no analysis for sentence {}, token {}", .0.0, .0.1)]
    Missing(Position),
    #[error("line {line}: {source}")]
    Io { line: usize, source: io::Error },
}

/// Streaming record reader; does not check for duplicates.
pub struct SidecarReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> SidecarReader<R> {
    pub fn new(reader: R) -> Self {
        SidecarReader {
            lines: reader.lines(),
            line_no: 0,
        }
    }

    /// Line number of the most recently returned record.
    pub fn line(&self) -> usize {
        self.line_no
    }
}

fn parse_position(line: usize, value: &str) -> Result<usize, SidecarError> {
    match value.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(SidecarError::BadPosition {
            line,
            value: value.to_owned(),
        }),
    }
}

fn parse_record(line_no: usize, line: &str) -> Result<(Position, MorphAnalysis), SidecarError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 4 {
        return Err(SidecarError::ColumnCount {
            line: line_no,
            found: cols.len(),
        });
    }
    let sentence = parse_position(line_no, cols[0])?;
    let token = parse_position(line_no, cols[1])?;
    let analysis =
        MorphAnalysis::parse(cols[2], cols[3]).map_err(|source| SidecarError::Morph { line: line_no, source })?;
    Ok(((sentence, token), analysis))
}

impl<R: BufRead> Iterator for SidecarReader<R> {
    type Item = Result<(Position, MorphAnalysis), SidecarError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(source) => {
                    return Some(Err(SidecarError::Io {
                        line: self.line_no + 1,
                        source,
                    }))
                }
            };
            self.line_no += 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            return Some(parse_record(self.line_no, line));
        }
    }
}

/// Reads a whole sidecar, rejecting duplicate positions.
pub fn read_morph_sidecar<R: BufRead>(reader: R) -> Result<SidecarMap, SidecarError> {
    let mut records = SidecarReader::new(reader);
    let mut map = SidecarMap::new();
    while let Some(record) = records.next() {
        let (position, analysis) = record?;
        if map.insert(position, analysis).is_some() {
            return Err(SidecarError::Duplicate {
                line: records.line(),
                position,
            });
        }
    }
    Ok(map)
}

pub fn write_morph_sidecar<W: Write>(mut w: W, map: &SidecarMap) -> io::Result<()> {
    for ((s, t), a) in map {
        writeln!(w, "{}\t{}\t{}\t{}", s, t, a.lemma, a.tag_string())?;
    }
    Ok(())
}

/// The analyses of sentence `ordinal`, one per token in token order.
pub fn sentence_analyses(
    map: &SidecarMap,
    ordinal: usize,
    sentence: &Sentence,
) -> Result<Vec<MorphAnalysis>, SidecarError> {
    sentence
        .tokens
        .iter()
        .map(|t| {
            map.get(&(ordinal, t.id))
                .cloned()
                .ok_or(SidecarError::Missing((ordinal, t.id)))
        })
        .collect()
}

/// Aligns a sidecar with a treebank (ordinals are 1-based).
pub fn align_analyses(map: &SidecarMap, sentences: &[Sentence]) -> Result<Vec<Vec<MorphAnalysis>>, SidecarError> {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| sentence_analyses(map, i + 1, s))
        .collect()
}
