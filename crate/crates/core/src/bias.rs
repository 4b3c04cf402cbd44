//! Bias directions and projection statistics.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::embedding::{dot, norm, Embedding};
use crate::error::{Error, Result};

/// A unit axis pointing from `neg_anchor` toward `pos_anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    axis: Vec<f64>,
    pos_anchor: String,
    neg_anchor: String,
}

impl Direction {
    /// Normalizes `v` into a direction labelled with the given anchors.
    pub fn from_vector(v: &[f64], pos_anchor: &str, neg_anchor: &str) -> Result<Self> {
        let n = norm(v);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector(format!(
                "direction {pos_anchor:?} - {neg_anchor:?} has zero length"
            )));
        }
        Ok(Self {
            axis: v.iter().map(|x| x / n).collect(),
            pos_anchor: pos_anchor.to_string(),
            neg_anchor: neg_anchor.to_string(),
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn pos_anchor(&self) -> &str {
        &self.pos_anchor
    }

    pub fn neg_anchor(&self) -> &str {
        &self.neg_anchor
    }
}

/// `(v_pos - v_neg) / ||v_pos - v_neg||`.
pub fn bias_direction(emb: &Embedding, pos: &str, neg: &str) -> Result<Direction> {
    let vp = emb.vector(pos)?;
    let vn = emb.vector(neg)?;
    let diff: Vec<f64> = vp.iter().zip(vn).map(|(a, b)| a - b).collect();
    Direction::from_vector(&diff, pos, neg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovPolicy {
    Skip,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRecord {
    pub word: String,
    pub projection: f64,
}

pub fn project_words<S: AsRef<str>>(
    emb: &Embedding,
    words: &[S],
    dir: &Direction,
    on_oov: OovPolicy,
) -> Result<Vec<ProjectionRecord>> {
    if words.is_empty() {
        return Err(Error::Empty("word list".into()));
    }
    if dir.axis.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            found: dir.axis.len(),
        });
    }
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let w = w.as_ref();
        match emb.vector(w) {
            Ok(v) => out.push(ProjectionRecord {
                word: w.to_string(),
                projection: dot(v, &dir.axis),
            }),
            Err(e) if on_oov == OovPolicy::Error => return Err(e),
            Err(_) => {}
        }
    }
    Ok(out)
}

/// Population variance of the projection values.
pub fn projection_variance(records: &[ProjectionRecord]) -> Result<f64> {
    let values: Vec<f64> = records.iter().map(|r| r.projection).collect();
    variance(&values)
}

pub(crate) fn variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "variance needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedProjection {
    pub word: String,
    pub proj_a: f64,
    pub proj_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossEmbeddingReport {
    pub records: Vec<PairedProjection>,
    /// Number of requested words found in both embeddings.
    pub coverage: usize,
    pub requested: usize,
}

/// Projections of the same words in two embeddings, each on its own axis.
pub fn cross_embedding_report<S: AsRef<str>>(
    emb_a: &Embedding,
    emb_b: &Embedding,
    words: &[S],
    dir_a: &Direction,
    dir_b: &Direction,
) -> CrossEmbeddingReport {
    let records: Vec<PairedProjection> = words
        .iter()
        .filter_map(|w| {
            let w = w.as_ref();
            let va = emb_a.vector(w).ok()?;
            let vb = emb_b.vector(w).ok()?;
            Some(PairedProjection {
                word: w.to_string(),
                proj_a: dot(va, dir_a.axis()),
                proj_b: dot(vb, dir_b.axis()),
            })
        })
        .collect();
    CrossEmbeddingReport {
        coverage: records.len(),
        requested: words.len(),
        records,
    }
}

/// Reads a word list: one token per line, `#` starts a comment line.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn write_projections_csv<W: Write>(out: W, records: &[ProjectionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["word", "projection"])?;
    for r in records {
        w.write_record([r.word.as_str(), &r.projection.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_cross_csv<W: Write>(out: W, report: &CrossEmbeddingReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["word", "projA", "projB"])?;
    for r in &report.records {
        w.write_record([r.word.as_str(), &r.proj_a.to_string(), &r.proj_b.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
