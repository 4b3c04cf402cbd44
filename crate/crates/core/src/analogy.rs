//! Analogy pairs along a bias direction, and standard analogy solving.
//!
//! A pair `(a, b)` is scored by the cosine between `v_a - v_b` and the
//! direction axis, and only admitted when `||v_a - v_b|| <= delta`.

use std::collections::HashSet;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::bias::Direction;
use crate::embedding::{cosine, Embedding};
use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_VOCAB_LIMIT: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyPair {
    pub word_a: String,
    pub word_b: String,
    pub score: f64,
    pub pair_distance: f64,
}

/// Outcome of scoring a single pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairScore {
    Scored { score: f64, distance: f64 },
    /// The pair is farther apart than `delta`.
    Rejected { distance: f64 },
}

impl PairScore {
    pub fn score(&self) -> Option<f64> {
        match *self {
            PairScore::Scored { score, .. } => Some(score),
            PairScore::Rejected { .. } => None,
        }
    }
}

/// Scores rows `a` and `b`; `None` when the difference vector is zero.
/// Returns `(score, distance)` with the score clamped into `[-1, 1]`.
fn score_rows(va: &[f64], vb: &[f64], axis: &[f64]) -> Option<(f64, f64)> {
    let mut sq = 0.0;
    let mut proj = 0.0;
    for ((x, y), d) in va.iter().zip(vb).zip(axis) {
        let diff = x - y;
        sq += diff * diff;
        proj += diff * d;
    }
    let dist = sq.sqrt();
    if dist == 0.0 {
        return None;
    }
    Some(((proj / dist).clamp(-1.0, 1.0), dist))
}

pub fn score_pair(emb: &Embedding, dir: &Direction, a: &str, b: &str, delta: f64) -> Result<PairScore> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    check_dim(emb, dir)?;
    if a == b {
        return Err(Error::InvalidArgument(format!("pair words must differ, got {a:?} twice")));
    }
    let va = emb.vector(a)?;
    let vb = emb.vector(b)?;
    let (score, distance) = score_rows(va, vb, dir.axis())
        .ok_or_else(|| Error::ZeroVector(format!("{a:?} and {b:?} have identical vectors")))?;
    Ok(if distance <= delta {
        PairScore::Scored { score, distance }
    } else {
        PairScore::Rejected { distance }
    })
}

fn check_dim(emb: &Embedding, dir: &Direction) -> Result<()> {
    if dir.axis().len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            found: dir.axis().len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub delta: f64,
    pub top_k: usize,
    /// Explicit candidate words. OOV words and the anchors are filtered out.
    pub candidates: Option<Vec<String>>,
    /// Without explicit candidates, only the first `vocab_limit` vocabulary
    /// entries are enumerated (files are conventionally frequency-ordered).
    pub vocab_limit: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            top_k: 1000,
            candidates: None,
            vocab_limit: DEFAULT_VOCAB_LIMIT,
        }
    }
}

/// Generates the top-scoring analogy pairs for `dir`.
///
/// Every unordered candidate pair within `delta` is oriented so its score is
/// positive, sorted by descending score (ties by ascending vocabulary index
/// of `word_a`, then `word_b`), and deduplicated greedily: a pair is dropped
/// when either word already appears in a kept pair. At most `top_k` pairs are
/// returned.
pub fn generate_analogies(
    emb: &Embedding,
    dir: &Direction,
    opts: &GenerateOptions,
) -> Result<Vec<AnalogyPair>> {
    if !(opts.delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {}", opts.delta)));
    }
    if opts.top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    check_dim(emb, dir)?;
    let anchors = [dir.pos_anchor(), dir.neg_anchor()];
    let mut ids: Vec<usize> = match &opts.candidates {
        Some(words) => words.iter().filter_map(|w| emb.index_of(w)).collect(),
        None => (0..emb.len().min(opts.vocab_limit)).collect(),
    };
    ids.retain(|&i| !anchors.contains(&emb.token(i)));
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::Empty(format!(
            "analogy generation needs at least 2 candidate words, {} left after filtering",
            ids.len()
        )));
    }

    let axis = dir.axis();
    let delta = opts.delta;
    let mut scored: Vec<(f64, usize, usize, f64)> = (0..ids.len())
        .into_par_iter()
        .flat_map_iter(|x| {
            let i = ids[x];
            let vi = emb.row(i);
            ids[x + 1..].iter().filter_map(move |&j| {
                let (s, dist) = score_rows(vi, emb.row(j), axis)?;
                if dist > delta || s == 0.0 {
                    return None;
                }
                Some(if s > 0.0 { (s, i, j, dist) } else { (-s, j, i, dist) })
            })
        })
        .collect();
    scored.par_sort_unstable_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    Ok(greedy_dedup(scored, opts.top_k)
        .into_iter()
        .map(|(score, a, b, dist)| AnalogyPair {
            word_a: emb.token(a).to_string(),
            word_b: emb.token(b).to_string(),
            score,
            pair_distance: dist,
        })
        .collect())
}

fn greedy_dedup(sorted: Vec<(f64, usize, usize, f64)>, top_k: usize) -> Vec<(f64, usize, usize, f64)> {
    let mut used = HashSet::new();
    let mut kept = Vec::new();
    for p in sorted {
        if kept.len() == top_k {
            break;
        }
        if used.contains(&p.1) || used.contains(&p.2) {
            continue;
        }
        used.insert(p.1);
        used.insert(p.2);
        kept.push(p);
    }
    kept
}

/// Answers `a : b :: c : ?` with 3CosAdd over row-normalized vectors.
///
/// The answer maximizes `cos(v, n_b - n_a + n_c)` over the vocabulary minus
/// `{a, b, c}`; ties go to the lower vocabulary index.
pub fn solve_analogy(emb: &Embedding, a: &str, b: &str, c: &str) -> Result<String> {
    let normalized;
    let emb = if emb.is_normalized() {
        emb
    } else {
        normalized = emb.normalize_rows()?;
        &normalized
    };
    solve_normalized(emb, a, b, c).map(|i| emb.token(i).to_string())
}

/// `emb` must already be row-normalized. Returns the answer's index.
pub(crate) fn solve_normalized(emb: &Embedding, a: &str, b: &str, c: &str) -> Result<usize> {
    let ia = emb.index_of(a).ok_or_else(|| Error::OutOfVocabulary(a.into()))?;
    let ib = emb.index_of(b).ok_or_else(|| Error::OutOfVocabulary(b.into()))?;
    let ic = emb.index_of(c).ok_or_else(|| Error::OutOfVocabulary(c.into()))?;
    let target: Vec<f64> = (0..emb.dim())
        .map(|k| emb.row(ib)[k] - emb.row(ia)[k] + emb.row(ic)[k])
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, row) in emb.rows().enumerate() {
        if i == ia || i == ib || i == ic {
            continue;
        }
        let s = cosine(row, &target);
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::Empty("no vocabulary left after excluding the query words".into()))
}

/// Writes pairs as `rank,word_a,word_b,score,pair_distance`.
pub fn write_pairs_csv<W: Write>(out: W, pairs: &[AnalogyPair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "word_a", "word_b", "score", "pair_distance"])?;
    for (i, p) in pairs.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            p.word_a.clone(),
            p.word_b.clone(),
            p.score.to_string(),
            p.pair_distance.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_pairs_csv<R: Read>(input: R) -> Result<Vec<AnalogyPair>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).ok_or_else(|| bad_row(i, "missing column"));
        let num = |k: usize| -> Result<f64> {
            field(k)?.parse().map_err(|_| bad_row(i, "non-numeric value"))
        };
        out.push(AnalogyPair {
            word_a: field(1)?.to_string(),
            word_b: field(2)?.to_string(),
            score: num(3)?,
            pair_distance: num(4)?,
        });
    }
    Ok(out)
}

fn bad_row(i: usize, msg: &str) -> Error {
    Error::parse("<pairs csv>", i + 2, msg)
}
