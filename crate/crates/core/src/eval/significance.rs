use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{sentence_counts, EvalError};
use crate::conllu::Sentence;

pub const DEFAULT_SHUFFLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    Uas,
    Las,
}

impl Metric {
    fn column(self) -> usize {
        match self {
            Metric::Uas => 1,
            Metric::Las => 2,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Uas => "UAS",
            Metric::Las => "LAS",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uas" => Ok(Metric::Uas),
            "las" => Ok(Metric::Las),
            _ => Err(format!("unknown metric {:?} (expected uas or las)", s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigResult {
    pub metric: Metric,
    /// `p_values[i][j]` compares output `i` of system A with output `j` of B.
    pub p_values: Vec<Vec<f64>>,
    pub harmonic_mean_p: f64,
    pub shuffles: usize,
    pub seed: u64,
}

impl SigResult {
    pub fn count(&self) -> usize {
        self.p_values.iter().map(Vec::len).sum()
    }
}

/// Per-sentence correct counts of one output under `metric`.
fn correct_per_sentence(gold: &[Sentence], output: &[Sentence], metric: Metric) -> Result<Vec<i64>, EvalError> {
    Ok(sentence_counts(gold, output)?
        .into_iter()
        .map(|c| c[metric.column()] as i64)
        .collect())
}

/// Two-sided p-value for one pair: `diffs[i]` is A's minus B's correct count
/// on sentence `i`. Each shuffle flips the sign of every sentence with
/// probability 1/2.
fn pair_p_value(diffs: &[i64], shuffles: usize, rng: &mut ChaCha8Rng) -> f64 {
    let observed = diffs.iter().sum::<i64>().abs();
    let mut hits = 0usize;
    for _ in 0..shuffles {
        let mut total = 0i64;
        for chunk in diffs.chunks(64) {
            let bits = rng.next_u64();
            for (k, d) in chunk.iter().enumerate() {
                if bits >> k & 1 == 1 {
                    total -= d;
                } else {
                    total += d;
                }
            }
        }
        if total.abs() >= observed {
            hits += 1;
        }
    }
    (1 + hits) as f64 / (1 + shuffles) as f64
}

/// Compares every output of system A with every output of system B by
/// sentence-level paired randomization and aggregates the p-values with
/// their harmonic mean. Deterministic for a given `seed`: pair `(i, j)`
/// draws from its own ChaCha stream.
pub fn randomization_test(
    gold: &[Sentence],
    outputs_a: &[Vec<Sentence>],
    outputs_b: &[Vec<Sentence>],
    shuffles: usize,
    metric: Metric,
    seed: u64,
) -> Result<SigResult, EvalError> {
    if shuffles == 0 {
        return Err(EvalError::NoShuffles);
    }
    if outputs_a.is_empty() || outputs_b.is_empty() {
        return Err(EvalError::NoOutputs);
    }
    let counts = |side: &str, outputs: &[Vec<Sentence>]| -> Result<Vec<Vec<i64>>, EvalError> {
        outputs
            .iter()
            .enumerate()
            .map(|(i, o)| {
                correct_per_sentence(gold, o, metric).map_err(|e| EvalError::Output {
                    output: format!("{}[{}]", side, i + 1),
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let a = counts("a", outputs_a)?;
    let b = counts("b", outputs_b)?;
    let pairs: Vec<(usize, usize)> = (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).collect();
    let flat: Vec<f64> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let diffs: Vec<i64> = a[i].iter().zip(&b[j]).map(|(x, y)| x - y).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            pair_p_value(&diffs, shuffles, &mut rng)
        })
        .collect();
    let harmonic_mean_p = flat.len() as f64 / flat.iter().map(|p| 1.0 / p).sum::<f64>();
    Ok(SigResult {
        metric,
        p_values: flat.chunks(b.len()).map(<[f64]>::to_vec).collect(),
        harmonic_mean_p,
        shuffles,
        seed,
    })
}
