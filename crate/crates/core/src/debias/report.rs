//! Before/after diagnostics for a debiasing transform.

use std::io::Write;

use crate::bias::{bias_direction, project_words, variance, OovPolicy};
use crate::embedding::Embedding;
use crate::error::{Error, Result};

/// Full-scale reference variances reported for the 3M-word news embedding:
/// `(group, before, after)`. Context for reports only; not reproducible on
/// small embeddings.
pub const REFERENCE_VARIANCES: [(&str, f64, f64); 2] =
    [("stereotype", 0.02, 0.001), ("background", 0.005, 0.0055)];

#[derive(Debug, Clone, PartialEq)]
pub struct GroupVariance {
    pub group: String,
    pub requested: usize,
    /// Words present in both embeddings.
    pub covered: usize,
    /// `None` when fewer than two words are covered.
    pub before: Option<f64>,
    pub after: Option<f64>,
}

impl GroupVariance {
    /// `after / before`.
    pub fn ratio(&self) -> Option<f64> {
        match (self.before, self.after) {
            (Some(b), Some(a)) if b > 0.0 => Some(a / b),
            (Some(b), Some(a)) if b == 0.0 && a == 0.0 => Some(1.0),
            _ => None,
        }
    }
}

/// One point of the `|projection|` before/after scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsProjection {
    pub word: String,
    pub group: String,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionReport {
    pub pos_anchor: String,
    pub neg_anchor: String,
    pub seeds: GroupVariance,
    pub background: GroupVariance,
    pub points: Vec<AbsProjection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DebiasReport {
    pub directions: Vec<DirectionReport>,
}

/// Projection variance of held-out seed words and background words on each
/// direction, with the direction recomputed inside each embedding.
pub fn debias_report<S: AsRef<str>>(
    before: &Embedding,
    after: &Embedding,
    dir_pairs: &[(S, S)],
    seed_test_words: &[S],
    background_sample: &[S],
) -> Result<DebiasReport> {
    if dir_pairs.is_empty() {
        return Err(Error::Empty("direction anchor pairs".into()));
    }
    let mut directions = Vec::with_capacity(dir_pairs.len());
    for (pos, neg) in dir_pairs {
        let (pos, neg) = (pos.as_ref(), neg.as_ref());
        let d_before = bias_direction(before, pos, neg)?;
        let d_after = bias_direction(after, pos, neg)?;
        let mut points = Vec::new();
        let mut group = |name: &str, words: &[S]| -> Result<GroupVariance> {
            let shared: Vec<&str> = words
                .iter()
                .map(|w| w.as_ref())
                .filter(|w| before.contains(w) && after.contains(w))
                .collect();
            let (b, a) = if shared.is_empty() {
                (Vec::new(), Vec::new())
            } else {
                (
                    project_words(before, &shared, &d_before, OovPolicy::Error)?,
                    project_words(after, &shared, &d_after, OovPolicy::Error)?,
                )
            };
            for (rb, ra) in b.iter().zip(&a) {
                points.push(AbsProjection {
                    word: rb.word.clone(),
                    group: name.to_string(),
                    before: rb.projection.abs(),
                    after: ra.projection.abs(),
                });
            }
            let values = |recs: &[crate::bias::ProjectionRecord]| {
                variance(&recs.iter().map(|r| r.projection).collect::<Vec<_>>()).ok()
            };
            Ok(GroupVariance {
                group: name.to_string(),
                requested: words.len(),
                covered: shared.len(),
                before: values(&b),
                after: values(&a),
            })
        };
        let seeds = group("stereotype", seed_test_words)?;
        let background = group("background", background_sample)?;
        directions.push(DirectionReport {
            pos_anchor: pos.to_string(),
            neg_anchor: neg.to_string(),
            seeds,
            background,
            points,
        });
    }
    Ok(DebiasReport { directions })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionStats {
    pub pairs: usize,
    /// Mean of `|d_after − d_before| / d_before` over the pairs.
    pub mean_relative: f64,
    pub max_relative: f64,
}

/// Relative change of Euclidean distances for word pairs present in both
/// embeddings. Pairs with zero initial distance are skipped.
pub fn distance_distortion<S: AsRef<str>>(
    before: &Embedding,
    after: &Embedding,
    pairs: &[(S, S)],
) -> Result<DistortionStats> {
    let dist = |e: &Embedding, a: &str, b: &str| -> Option<f64> {
        let (va, vb) = (e.vector(a).ok()?, e.vector(b).ok()?);
        Some(va.iter().zip(vb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
    };
    let rel: Vec<f64> = pairs
        .iter()
        .filter_map(|(a, b)| {
            let (a, b) = (a.as_ref(), b.as_ref());
            let d0 = dist(before, a, b)?;
            let d1 = dist(after, a, b)?;
            (d0 > 0.0).then(|| (d1 - d0).abs() / d0)
        })
        .collect();
    if rel.is_empty() {
        return Err(Error::Empty("no resolvable word pairs for distance distortion".into()));
    }
    Ok(DistortionStats {
        pairs: rel.len(),
        mean_relative: rel.iter().sum::<f64>() / rel.len() as f64,
        max_relative: rel.iter().copied().fold(0.0, f64::max),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `direction,group,requested,covered,variance_before,variance_after,ratio`
pub fn write_report_csv<W: Write>(out: W, report: &DebiasReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "direction",
        "group",
        "requested",
        "covered",
        "variance_before",
        "variance_after",
        "ratio",
    ])?;
    for d in &report.directions {
        let label = format!("{}-{}", d.pos_anchor, d.neg_anchor);
        for g in [&d.seeds, &d.background] {
            w.write_record([
                label.clone(),
                g.group.clone(),
                g.requested.to_string(),
                g.covered.to_string(),
                opt(g.before),
                opt(g.after),
                opt(g.ratio()),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// `direction,word,group,abs_before,abs_after`
pub fn write_points_csv<W: Write>(out: W, report: &DebiasReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["direction", "word", "group", "abs_before", "abs_after"])?;
    for d in &report.directions {
        let label = format!("{}-{}", d.pos_anchor, d.neg_anchor);
        for p in &d.points {
            w.write_record([
                label.clone(),
                p.word.clone(),
                p.group.clone(),
                p.before.to_string(),
                p.after.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
