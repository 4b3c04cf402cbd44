//! Word-similarity and analogy benchmarks.
//!
//! Items with any out-of-vocabulary token are skipped and show up in the
//! reported coverage instead of counting as failures.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::analogy::solve_normalized;
use crate::embedding::{cosine, Embedding};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyDataset {
    pub name: String,
    pub questions: Vec<AnalogyQuestion>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub name: String,
    /// Spearman ρ for similarity sets, accuracy for analogy sets.
    pub metric: f64,
    pub coverage: f64,
    pub used: usize,
    pub total: usize,
}

/// Reads `word1 word2 score` lines separated by tabs or spaces.
/// Blank lines and lines starting with `#` are ignored.
pub fn load_similarity_dataset(path: impl AsRef<Path>, name: &str) -> Result<SimilarityDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_similarity(&text, name, path)
}

pub fn parse_similarity(text: &str, name: &str, path: &Path) -> Result<SimilarityDataset> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected `word1 word2 score`, found {} fields", fields.len()),
            ));
        }
        let score: f64 = fields[2]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(path, i + 1, format!("non-numeric score {:?}", fields[2])))?;
        pairs.push((fields[0].to_string(), fields[1].to_string(), score));
    }
    if pairs.is_empty() {
        return Err(Error::Empty(format!("similarity dataset {}", path.display())));
    }
    Ok(SimilarityDataset {
        name: name.to_string(),
        pairs,
    })
}

/// Reads `a b c expected` lines; lines starting with `:` open a section.
pub fn load_analogy_dataset(path: impl AsRef<Path>, name: &str) -> Result<AnalogyDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_analogies(&text, name, path)
}

pub fn parse_analogies(text: &str, name: &str, path: &Path) -> Result<AnalogyDataset> {
    let mut questions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(':') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected `a b c expected`, found {} fields", f.len()),
            ));
        }
        questions.push(AnalogyQuestion {
            a: f[0].into(),
            b: f[1].into(),
            c: f[2].into(),
            expected: f[3].into(),
        });
    }
    if questions.is_empty() {
        return Err(Error::Empty(format!("analogy dataset {}", path.display())));
    }
    Ok(AnalogyDataset {
        name: name.to_string(),
        questions,
    })
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman ρ: Pearson correlation of average ranks.
///
/// Rank sums are exact in floating point, so the result does not depend on
/// the order of the inputs.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("Spearman needs at least 2 items".into()));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (rx.iter().sum(), ry.iter().sum());
    let sxx: f64 = rx.iter().map(|a| a * a).sum();
    let syy: f64 = ry.iter().map(|a| a * a).sum();
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
    let cov = sxy - sx * sy / n;
    let vx = sxx - sx * sx / n;
    let vy = syy - sy * sy / n;
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::InvalidArgument(
            "Spearman is undefined when one side is constant".into(),
        ));
    }
    Ok((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

pub fn evaluate_similarity(emb: &Embedding, ds: &SimilarityDataset) -> Result<BenchmarkResult> {
    if ds.pairs.is_empty() {
        return Err(Error::Empty(format!("similarity dataset {}", ds.name)));
    }
    let scored: Vec<(f64, f64)> = ds
        .pairs
        .par_iter()
        .filter_map(|(a, b, human)| {
            let (va, vb) = (emb.vector(a).ok()?, emb.vector(b).ok()?);
            Some((*human, cosine(va, vb)))
        })
        .collect();
    if scored.is_empty() {
        return Err(Error::Empty(format!(
            "no in-vocabulary pairs in similarity dataset {}",
            ds.name
        )));
    }
    let (human, model): (Vec<f64>, Vec<f64>) = scored.iter().copied().unzip();
    Ok(BenchmarkResult {
        name: ds.name.clone(),
        metric: spearman(&human, &model)?,
        coverage: scored.len() as f64 / ds.pairs.len() as f64,
        used: scored.len(),
        total: ds.pairs.len(),
    })
}

pub fn evaluate_analogy(emb: &Embedding, ds: &AnalogyDataset) -> Result<BenchmarkResult> {
    if ds.questions.is_empty() {
        return Err(Error::Empty(format!("analogy dataset {}", ds.name)));
    }
    let normalized;
    let emb = if emb.is_normalized() {
        emb
    } else {
        normalized = emb.normalize_rows()?;
        &normalized
    };
    let outcomes: Vec<bool> = ds
        .questions
        .par_iter()
        .filter(|q| [&q.a, &q.b, &q.c, &q.expected].iter().all(|w| emb.contains(w)))
        .map(|q| solve_normalized(emb, &q.a, &q.b, &q.c).map(|i| emb.token(i) == q.expected))
        .collect::<Result<_>>()?;
    if outcomes.is_empty() {
        return Err(Error::Empty(format!(
            "no in-vocabulary questions in analogy dataset {}",
            ds.name
        )));
    }
    let correct = outcomes.iter().filter(|&&ok| ok).count();
    Ok(BenchmarkResult {
        name: ds.name.clone(),
        metric: correct as f64 / outcomes.len() as f64,
        coverage: outcomes.len() as f64 / ds.questions.len() as f64,
        used: outcomes.len(),
        total: ds.questions.len(),
    })
}

/// One row per `(embedding label, result)`:
/// `embedding,dataset,kind,metric,coverage,used,total`.
pub fn write_results_csv<W: Write>(out: W, rows: &[(String, &'static str, BenchmarkResult)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["embedding", "dataset", "kind", "metric", "coverage", "used", "total"])?;
    for (label, kind, r) in rows {
        w.write_record([
            label.clone(),
            r.name.clone(),
            kind.to_string(),
            r.metric.to_string(),
            r.coverage.to_string(),
            r.used.to_string(),
            r.total.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
