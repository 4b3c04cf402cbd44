//! Human rating tasks for generated analogies: CSV export, response import
//! and vote aggregation.
//!
//! Task file columns: `id,pos_anchor,neg_anchor,word_a,word_b,score`.
//! Response file columns: `id,rater_id,is_stereotype,is_nonsensical`, with
//! the two flags encoded as `0` or `1`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::analogy::AnalogyPair;
use crate::error::{Error, Result};

/// One `pos:neg :: word_a:word_b` question put to raters.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTask {
    pub id: u64,
    pub pos_anchor: String,
    pub neg_anchor: String,
    pub word_a: String,
    pub word_b: String,
    pub score: f64,
}

impl RatingTask {
    pub fn prompt(&self) -> String {
        format!("{}:{} :: {}:{}", self.pos_anchor, self.neg_anchor, self.word_a, self.word_b)
    }
}

/// Numbers tasks from 1 in pair order.
pub fn rating_tasks(pairs: &[AnalogyPair], pos_anchor: &str, neg_anchor: &str) -> Vec<RatingTask> {
    pairs
        .iter()
        .zip(1u64..)
        .map(|(p, id)| RatingTask {
            id,
            pos_anchor: pos_anchor.to_string(),
            neg_anchor: neg_anchor.to_string(),
            word_a: p.word_a.clone(),
            word_b: p.word_b.clone(),
            score: p.score,
        })
        .collect()
}

pub fn export_rating_tasks(
    pairs: &[AnalogyPair],
    template: (&str, &str),
    path: impl AsRef<Path>,
) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Empty("no analogy pairs to export".into()));
    }
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_tasks_csv(file, &rating_tasks(pairs, template.0, template.1))
}

pub fn write_tasks_csv<W: Write>(out: W, tasks: &[RatingTask]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "pos_anchor", "neg_anchor", "word_a", "word_b", "score"])?;
    for t in tasks {
        w.write_record([
            t.id.to_string(),
            t.pos_anchor.clone(),
            t.neg_anchor.clone(),
            t.word_a.clone(),
            t.word_b.clone(),
            t.score.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn load_rating_tasks(path: impl AsRef<Path>) -> Result<Vec<RatingTask>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_tasks_csv(file)
}

pub fn read_tasks_csv<R: Read>(input: R) -> Result<Vec<RatingTask>> {
    let mut r = csv::Reader::from_reader(input);
    let cols = header_index(
        r.headers()?,
        &["id", "pos_anchor", "neg_anchor", "word_a", "word_b", "score"],
    )?;
    let mut tasks = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |c: usize| rec.get(cols[c]).unwrap_or_default();
        let id: u64 = get(0)
            .parse()
            .map_err(|_| Error::Ratings(format!("line {line}: bad task id {:?}", get(0))))?;
        if !seen.insert(id) {
            return Err(Error::Ratings(format!("line {line}: duplicate task id {id}")));
        }
        let score: f64 = get(5)
            .parse()
            .map_err(|_| Error::Ratings(format!("line {line}: bad score {:?}", get(5))))?;
        tasks.push(RatingTask {
            id,
            pos_anchor: get(1).to_string(),
            neg_anchor: get(2).to_string(),
            word_a: get(3).to_string(),
            word_b: get(4).to_string(),
            score,
        });
    }
    Ok(tasks)
}

fn header_index(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|w| {
            headers
                .iter()
                .position(|h| h.trim() == *w)
                .ok_or_else(|| Error::Ratings(format!("missing column {w:?}")))
        })
        .collect()
}

/// A single rater's answers for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingResponse {
    pub id: u64,
    pub rater_id: String,
    pub is_stereotype: bool,
    pub is_nonsensical: bool,
}

pub fn read_responses_csv<R: Read>(input: R) -> Result<Vec<RatingResponse>> {
    let mut r = csv::Reader::from_reader(input);
    let cols = header_index(r.headers()?, &["id", "rater_id", "is_stereotype", "is_nonsensical"])?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |c: usize| rec.get(cols[c]).unwrap_or_default().trim();
        let flag = |c: usize| match get(c) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Ratings(format!(
                "line {line}: expected 0 or 1, found {other:?}"
            ))),
        };
        out.push(RatingResponse {
            id: get(0)
                .parse()
                .map_err(|_| Error::Ratings(format!("line {line}: bad task id {:?}", get(0))))?,
            rater_id: get(1).to_string(),
            is_stereotype: flag(2)?,
            is_nonsensical: flag(3)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingAggregate {
    pub task: RatingTask,
    pub n_raters: usize,
    pub n_stereotype: usize,
    pub n_nonsensical: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingSummary {
    /// Sorted by `n_stereotype` descending, then task id ascending.
    pub aggregates: Vec<RatingAggregate>,
    pub n_judgments: usize,
    /// Fractions over individual judgments, not per-pair majorities.
    pub fraction_stereotype: f64,
    pub fraction_nonsensical: f64,
}

pub fn aggregate_ratings(tasks: &[RatingTask], responses_path: impl AsRef<Path>) -> Result<RatingSummary> {
    let path = responses_path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    aggregate_responses(tasks, &read_responses_csv(file)?)
}

pub fn aggregate_responses(tasks: &[RatingTask], responses: &[RatingResponse]) -> Result<RatingSummary> {
    let slot: HashMap<u64, usize> = tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let mut aggregates: Vec<RatingAggregate> = tasks
        .iter()
        .map(|t| RatingAggregate {
            task: t.clone(),
            n_raters: 0,
            n_stereotype: 0,
            n_nonsensical: 0,
        })
        .collect();
    let mut seen = HashSet::new();
    let (mut n_st, mut n_ns) = (0usize, 0usize);
    for r in responses {
        let &i = slot
            .get(&r.id)
            .ok_or_else(|| Error::Ratings(format!("response for unknown task id {}", r.id)))?;
        if !seen.insert((r.id, r.rater_id.as_str())) {
            return Err(Error::Ratings(format!(
                "duplicate response from rater {:?} for task {}",
                r.rater_id, r.id
            )));
        }
        let a = &mut aggregates[i];
        a.n_raters += 1;
        a.n_stereotype += usize::from(r.is_stereotype);
        a.n_nonsensical += usize::from(r.is_nonsensical);
        n_st += usize::from(r.is_stereotype);
        n_ns += usize::from(r.is_nonsensical);
    }
    aggregates.sort_by(|x, y| y.n_stereotype.cmp(&x.n_stereotype).then(x.task.id.cmp(&y.task.id)));
    let n = responses.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Ok(RatingSummary {
        aggregates,
        n_judgments: n,
        fraction_stereotype: frac(n_st),
        fraction_nonsensical: frac(n_ns),
    })
}

pub fn write_aggregate_csv<W: Write>(out: W, summary: &RatingSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "id",
        "word_a",
        "word_b",
        "score",
        "n_raters",
        "n_stereotype",
        "n_nonsensical",
    ])?;
    for a in &summary.aggregates {
        w.write_record([
            a.task.id.to_string(),
            a.task.word_a.clone(),
            a.task.word_b.clone(),
            a.task.score.to_string(),
            a.n_raters.to_string(),
            a.n_stereotype.to_string(),
            a.n_nonsensical.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, summary: &RatingSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_pairs", "n_judgments", "fraction_stereotype", "fraction_nonsensical"])?;
    w.write_record([
        summary.aggregates.len().to_string(),
        summary.n_judgments.to_string(),
        summary.fraction_stereotype.to_string(),
        summary.fraction_nonsensical.to_string(),
    ])?;
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str, s: f64) -> AnalogyPair {
        AnalogyPair {
            word_a: a.into(),
            word_b: b.into(),
            score: s,
            pair_distance: 0.5,
        }
    }

    fn response(id: u64, rater: usize, st: bool, ns: bool) -> RatingResponse {
        RatingResponse {
            id,
            rater_id: format!("r{rater}"),
            is_stereotype: st,
            is_nonsensical: ns,
        }
    }

    #[test]
    fn one_pair_one_row() {
        let tasks = rating_tasks(&[pair("surgeon", "nurse", 0.8)], "he", "she");
        let mut buf = Vec::new();
        write_tasks_csv(&mut buf, &tasks).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(tasks[0].prompt(), "he:she :: surgeon:nurse");
    }

    #[test]
    fn tasks_round_trip_with_quoting() {
        let tasks = rating_tasks(
            &[pair("a,b", "c\"d", 0.1 + 0.2), pair("x", "y", 1.0 / 3.0)],
            "he",
            "she",
        );
        let mut buf = Vec::new();
        write_tasks_csv(&mut buf, &tasks).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("\"a,b\""));
        assert_eq!(read_tasks_csv(buf.as_slice()).unwrap(), tasks);
    }

    #[test]
    fn export_refuses_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(export_rating_tasks(&[], ("he", "she"), dir.path().join("t.csv")).is_err());
    }

    #[test]
    fn unanimous_bucket() {
        let tasks = rating_tasks(&[pair("surgeon", "nurse", 0.8)], "he", "she");
        let resp: Vec<_> = (0..10).map(|r| response(1, r, true, false)).collect();
        let s = aggregate_responses(&tasks, &resp).unwrap();
        assert_eq!(s.aggregates[0].n_stereotype, 10);
        assert_eq!(s.aggregates[0].n_raters, 10);
        assert_eq!(s.fraction_stereotype, 1.0);
    }

    #[test]
    fn all_zero_votes() {
        let tasks = rating_tasks(&[pair("a", "b", 0.5), pair("c", "d", 0.4)], "he", "she");
        let resp: Vec<_> = (0..10)
            .flat_map(|r| [response(1, r, false, false), response(2, r, false, false)])
            .collect();
        let s = aggregate_responses(&tasks, &resp).unwrap();
        assert_eq!((s.fraction_stereotype, s.fraction_nonsensical), (0.0, 0.0));
    }

    #[test]
    fn three_pairs_hand_count() {
        let tasks = rating_tasks(
            &[pair("a", "b", 0.9), pair("c", "d", 0.8), pair("e", "f", 0.7)],
            "he",
            "she",
        );
        // pair 1: 3 stereotype / 1 nonsensical; pair 2: 10 / 0; pair 3: 0 / 6
        let mut resp = Vec::new();
        for r in 0..10 {
            resp.push(response(1, r, r < 3, r == 9));
            resp.push(response(2, r, true, false));
            resp.push(response(3, r, false, r < 6));
        }
        let s = aggregate_responses(&tasks, &resp).unwrap();
        let order: Vec<u64> = s.aggregates.iter().map(|a| a.task.id).collect();
        assert_eq!(order, vec![2, 1, 3]);
        assert_eq!(s.n_judgments, 30);
        assert_eq!(s.fraction_stereotype, 13.0 / 30.0);
        assert_eq!(s.fraction_nonsensical, 7.0 / 30.0);
    }

    #[test]
    fn rejects_bad_responses() {
        let tasks = rating_tasks(&[pair("a", "b", 0.9)], "he", "she");
        assert!(aggregate_responses(&tasks, &[response(1, 0, true, false), response(1, 0, false, false)]).is_err());
        assert!(aggregate_responses(&tasks, &[response(7, 0, true, false)]).is_err());
        let bad = "id,rater_id,is_stereotype,is_nonsensical\n1,r0,yes,0\n";
        assert!(read_responses_csv(bad.as_bytes()).is_err());
    }
}
