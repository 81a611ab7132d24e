//! The lemma-suffix matrix: for each lemma, the relative frequency with which
//! it takes each suffix of the inventory.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::morph::{is_root_pos_tag, MorphAnalysis, SuffixInventory};

/// Default number of lemmas kept, most frequent first.
pub const DEFAULT_LEMMA_CAP: usize = 40_000;

const NANO: u64 = 1_000_000_000;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("matrix header does not match the suffix inventory")]
    HeaderMismatch,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct LemmaCounts {
    occurrences: u64,
    suffixes: Vec<u64>,
}

/// What happened while counting a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub analyses: u64,
    pub lemmas_seen: usize,
    pub lemmas_kept: usize,
    /// Tags missing from the inventory, with their occurrence counts.
    pub unknown_tags: BTreeMap<String, u64>,
}

/// Accumulates suffix counts. Builders over disjoint parts of a corpus can be
/// merged in any order with the same result.
#[derive(Clone, Debug)]
pub struct MatrixBuilder {
    inventory: SuffixInventory,
    counts: HashMap<String, LemmaCounts>,
    unknown: BTreeMap<String, u64>,
    analyses: u64,
}

impl MatrixBuilder {
    pub fn new(inventory: SuffixInventory) -> Self {
        MatrixBuilder {
            inventory,
            counts: HashMap::new(),
            unknown: BTreeMap::new(),
            analyses: 0,
        }
    }

    pub fn add(&mut self, analysis: &MorphAnalysis) {
        self.analyses += 1;
        let dim = self.inventory.len();
        let entry = self
            .counts
            .entry(analysis.lemma.clone())
            .or_insert_with(|| LemmaCounts {
                occurrences: 0,
                suffixes: vec![0; dim],
            });
        entry.occurrences += 1;
        for tag in &analysis.tags {
            if is_root_pos_tag(tag) {
                continue;
            }
            match self.inventory.index_of(tag) {
                Some(i) => entry.suffixes[i] += 1,
                None => *self.unknown.entry(tag.clone()).or_default() += 1,
            }
        }
    }

    /// Folds another builder's counts into this one.
    ///
    /// # Panics
    /// If the builders use different inventories.
    pub fn merge(mut self, other: MatrixBuilder) -> Self {
        assert_eq!(self.inventory, other.inventory, "merging builders over different inventories");
        self.analyses += other.analyses;
        for (tag, n) in other.unknown {
            *self.unknown.entry(tag).or_default() += n;
        }
        for (lemma, counts) in other.counts {
            match self.counts.get_mut(&lemma) {
                Some(mine) => {
                    mine.occurrences += counts.occurrences;
                    for (a, b) in mine.suffixes.iter_mut().zip(counts.suffixes) {
                        *a += b;
                    }
                }
                None => {
                    self.counts.insert(lemma, counts);
                }
            }
        }
        self
    }

    /// Keeps the `cap` most frequent lemmas (ties broken lexicographically)
    /// and normalizes each row by its sum. Rows with no suffixes stay zero.
    pub fn finish(self, cap: usize) -> (LemmaSuffixMatrix, BuildReport) {
        let lemmas_seen = self.counts.len();
        let mut ranked: Vec<(String, LemmaCounts)> = self.counts.into_iter().collect();
        ranked.sort_by(|(la, ca), (lb, cb)| cb.occurrences.cmp(&ca.occurrences).then_with(|| la.cmp(lb)));
        ranked.truncate(cap);

        let rows: BTreeMap<String, Vec<f64>> = ranked
            .into_iter()
            .map(|(lemma, counts)| {
                let total: u64 = counts.suffixes.iter().sum();
                let row = if total == 0 {
                    vec![0.0; counts.suffixes.len()]
                } else {
                    counts
                        .suffixes
                        .iter()
                        .map(|&c| c as f64 / total as f64)
                        .collect()
                };
                (lemma, row)
            })
            .collect();

        let report = BuildReport {
            analyses: self.analyses,
            lemmas_seen,
            lemmas_kept: rows.len(),
            unknown_tags: self.unknown,
        };
        (
            LemmaSuffixMatrix {
                inventory: self.inventory,
                rows,
            },
            report,
        )
    }
}

/// Counts a corpus sequentially.
pub fn build_matrix<'a, I>(inventory: &SuffixInventory, corpus: I, cap: usize) -> (LemmaSuffixMatrix, BuildReport)
where
    I: IntoIterator<Item = &'a MorphAnalysis>,
{
    let mut builder = MatrixBuilder::new(inventory.clone());
    for analysis in corpus {
        builder.add(analysis);
    }
    builder.finish(cap)
}

/// Counts a corpus with partial builders on the rayon pool.
pub fn build_matrix_parallel(
    inventory: &SuffixInventory,
    corpus: &[MorphAnalysis],
    cap: usize,
) -> (LemmaSuffixMatrix, BuildReport) {
    corpus
        .par_chunks(4096)
        .map(|chunk| {
            let mut b = MatrixBuilder::new(inventory.clone());
            chunk.iter().for_each(|a| b.add(a));
            b
        })
        .reduce(|| MatrixBuilder::new(inventory.clone()), MatrixBuilder::merge)
        .finish(cap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSuffixMatrix {
    inventory: SuffixInventory,
    rows: BTreeMap<String, Vec<f64>>,
}

impl LemmaSuffixMatrix {
    pub fn empty(inventory: SuffixInventory) -> Self {
        LemmaSuffixMatrix {
            inventory,
            rows: BTreeMap::new(),
        }
    }

    pub fn inventory(&self) -> &SuffixInventory {
        &self.inventory
    }

    /// Vector dimension (inventory size).
    pub fn dim(&self) -> usize {
        self.inventory.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, lemma: &str) -> Option<&[f64]> {
        self.rows.get(lemma).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.rows.iter().map(|(l, r)| (l.as_str(), r.as_slice()))
    }

    /// The lemma's row, or the zero vector for unknown lemmas.
    pub fn suffix_vector(&self, lemma: &str) -> Vec<f64> {
        match self.rows.get(lemma) {
            Some(row) => row.clone(),
            None => vec![0.0; self.dim()],
        }
    }

    /// Writes a header of suffix tags, then one `lemma<TAB>v0<TAB>...` row per
    /// lemma with 9-decimal fixed-point values.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "lemma")?;
        for tag in self.inventory.tags() {
            write!(w, "\t{}", tag)?;
        }
        writeln!(w)?;
        for (lemma, row) in &self.rows {
            write!(w, "{}", lemma)?;
            for v in format_fixed9(row) {
                write!(w, "\t{}", v)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("matrix text is UTF-8")
    }

    /// Reads a matrix written by [`write_tsv`](Self::write_tsv). The header
    /// must list exactly the inventory's tags in order.
    pub fn read_tsv<R: BufRead>(reader: R, inventory: SuffixInventory) -> Result<Self, MatrixError> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(MatrixError::Format {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        };
        let mut cols = header.trim_end_matches('\r').split('\t');
        if cols.next() != Some("lemma") || !cols.eq(inventory.tags()) {
            return Err(MatrixError::HeaderMismatch);
        }
        let dim = inventory.len();
        let mut rows = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line_no = i + 2;
            let err = |message: String| MatrixError::Format {
                line: line_no,
                message,
            };
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let lemma = fields.next().unwrap_or_default();
            if lemma.is_empty() {
                return Err(err("empty lemma".into()));
            }
            let row = fields
                .map(|f| parse_fixed9(f).ok_or_else(|| err(format!("invalid value {:?}", f))))
                .collect::<Result<Vec<f64>, _>>()?;
            if row.len() != dim {
                return Err(err(format!("expected {} values, found {}", dim, row.len())));
            }
            if rows.insert(lemma.to_owned(), row).is_some() {
                return Err(err(format!("duplicate lemma {:?}", lemma)));
            }
        }
        Ok(LemmaSuffixMatrix { inventory, rows })
    }
}

/// Converts values in `[0, 1]` to integer billionths. A vector that sums to
/// one is rounded with the largest-remainder method so the written digits
/// still sum to exactly one; other vectors are rounded entrywise.
pub(crate) fn to_nano_units(values: &[f64]) -> Vec<u64> {
    let scaled: Vec<f64> = values
        .iter()
        .map(|&v| v.clamp(0.0, 1.0) * NANO as f64)
        .collect();
    let sum: f64 = values.iter().sum();
    if values.is_empty() || (sum - 1.0).abs() > 1e-6 {
        return scaled.iter().map(|x| x.round() as u64).collect();
    }
    let mut units: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
    let deficit = NANO.saturating_sub(units.iter().sum());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(deficit as usize) {
        units[i] += 1;
    }
    units
}

pub(crate) fn format_nano(units: u64) -> String {
    format!("{}.{:09}", units / NANO, units % NANO)
}

/// Formats values as 9-decimal fixed point (see [`to_nano_units`]).
pub fn format_fixed9(values: &[f64]) -> Vec<String> {
    to_nano_units(values).into_iter().map(format_nano).collect()
}

/// Parses a non-negative 9-decimal fixed-point value.
pub fn parse_fixed9(field: &str) -> Option<f64> {
    let (int, frac) = field.split_once('.')?;
    if int.is_empty()
        || frac.len() != 9
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let v: f64 = field.parse().ok()?;
    (0.0..=1.0).contains(&v).then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(lemma: &str, tags: &str) -> MorphAnalysis {
        MorphAnalysis::parse(lemma, tags).unwrap()
    }

    #[test]
    fn single_observation() {
        let inv = SuffixInventory::default();
        let (m, _) = build_matrix(&inv, &[a("ev", "Noun+Gen")], 10);
        let row = m.row("ev").unwrap();
        let gen = inv.index_of("Gen").unwrap();
        assert_eq!(row[gen], 1.0);
        assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn two_thirds_one_third() {
        let inv = SuffixInventory::default();
        let corpus = [a("ev", "Noun+Gen"), a("ev", "Noun+Gen"), a("ev", "Noun+Loc")];
        let (m, _) = build_matrix(&inv, &corpus, 10);
        let row = m.row("ev").unwrap();
        assert_eq!(row[inv.index_of("Gen").unwrap()], 2.0 / 3.0);
        assert_eq!(row[inv.index_of("Loc").unwrap()], 1.0 / 3.0);
    }

    #[test]
    fn empty_corpus() {
        let inv = SuffixInventory::default();
        let (m, report) = build_matrix(&inv, &[], 10);
        assert!(m.is_empty());
        assert_eq!(report.analyses, 0);
        assert_eq!(m.to_tsv_string().lines().count(), 1);
    }

    #[test]
    fn suffixless_lemma_keeps_zero_row() {
        let inv = SuffixInventory::default();
        let (m, _) = build_matrix(&inv, &[a("ve", "Conj")], 10);
        assert!(m.row("ve").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unknown_tags_are_skipped_and_reported() {
        let inv = SuffixInventory::default();
        let corpus = [a("ev", "Noun+Gen+Weird"), a("ev", "Noun+Weird")];
        let (m, report) = build_matrix(&inv, &corpus, 10);
        assert_eq!(report.unknown_tags.get("Weird"), Some(&2));
        assert_eq!(m.row("ev").unwrap()[inv.index_of("Gen").unwrap()], 1.0);
    }

    #[test]
    fn cap_keeps_most_frequent_then_lexicographic() {
        let inv = SuffixInventory::default();
        let corpus = [
            a("zeytin", "Noun+Acc"),
            a("zeytin", "Noun+Acc"),
            a("elma", "Noun+Dat"),
            a("armut", "Noun+Dat"),
        ];
        let (m, report) = build_matrix(&inv, &corpus, 2);
        let kept: Vec<&str> = m.rows().map(|(l, _)| l).collect();
        assert_eq!(kept, vec!["armut", "zeytin"]);
        assert_eq!(report.lemmas_seen, 3);
        assert_eq!(report.lemmas_kept, 2);
    }

    #[test]
    fn unknown_lemma_gets_zero_vector() {
        let inv = SuffixInventory::default();
        let (m, _) = build_matrix(&inv, &[a("ev", "Noun+Gen")], 10);
        let v = m.suffix_vector("kedi");
        assert_eq!(v.len(), 81);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn parallel_equals_sequential() {
        let inv = SuffixInventory::default();
        let tags: Vec<&str> = inv.tags().collect();
        let corpus: Vec<MorphAnalysis> = (0..10_000)
            .map(|i| {
                MorphAnalysis::new(
                    format!("l{}", i % 97),
                    Some("Noun"),
                    [tags[i % 81], tags[(i * 7) % 81]],
                )
            })
            .collect();
        let seq = build_matrix(&inv, &corpus, 50);
        let par = build_matrix_parallel(&inv, &corpus, 50);
        assert_eq!(seq, par);
    }

    #[test]
    fn fixed9_rounding_preserves_unit_sum() {
        let row = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        assert_eq!(
            format_fixed9(&row),
            vec!["0.333333334", "0.333333333", "0.333333333"]
        );
        let units = to_nano_units(&[1.0 / 7.0; 7]);
        assert_eq!(units.iter().sum::<u64>(), NANO);
        assert_eq!(format_fixed9(&[0.0, 0.0]), vec!["0.000000000", "0.000000000"]);
        assert_eq!(format_fixed9(&[1.0]), vec!["1.000000000"]);
    }

    #[test]
    fn tsv_reload_is_bit_exact() {
        let inv = SuffixInventory::default();
        let corpus = [
            a("ev", "Noun+Gen"),
            a("ev", "Noun+A3pl+Loc"),
            a("ev", "Noun+P3sg+Acc"),
            a("git", "Verb+Past+A1sg"),
            a("ve", "Conj"),
        ];
        let (m, _) = build_matrix(&inv, &corpus, 10);
        let text = m.to_tsv_string();
        let reloaded = LemmaSuffixMatrix::read_tsv(text.as_bytes(), inv.clone()).unwrap();
        assert_eq!(reloaded.to_tsv_string(), text);
        let again = LemmaSuffixMatrix::read_tsv(reloaded.to_tsv_string().as_bytes(), inv).unwrap();
        for (lemma, row) in reloaded.rows() {
            let other = again.row(lemma).unwrap();
            assert!(row.iter().zip(other).all(|(x, y)| x.to_bits() == y.to_bits()));
            let sum: f64 = row.iter().sum();
            assert!(sum == 0.0 || (sum - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn header_must_match_inventory() {
        let inv = SuffixInventory::default();
        let other = SuffixInventory::parse("Gen\tinflectional\n").unwrap();
        let text = LemmaSuffixMatrix::empty(other).to_tsv_string();
        assert!(matches!(
            LemmaSuffixMatrix::read_tsv(text.as_bytes(), inv),
            Err(MatrixError::HeaderMismatch)
        ));
    }

    #[test]
    fn fixed9_parser_is_strict() {
        assert_eq!(parse_fixed9("0.500000000"), Some(0.5));
        assert_eq!(parse_fixed9("0.5"), None);
        assert_eq!(parse_fixed9("-0.500000000"), None);
        assert_eq!(parse_fixed9("1.500000000"), None);
        assert_eq!(parse_fixed9("0.5e000000"), None);
    }
}
