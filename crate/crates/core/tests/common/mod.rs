//! Independent reference implementations used by the integration tests.
//! None of these call into the library code they check.

#![allow(dead_code)]

use std::collections::HashSet;

use embias::analogy::AnalogyPair;
use embias::{DMatrix, Embedding};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, r: usize) -> DMatrix<f64> {
    let m = random_matrix(rng, r, r);
    (&m + m.transpose()) * 0.5
}

/// `||A X Aᵀ − A Aᵀ||²` computed directly on the `n x n` matrices.
pub fn direct_distortion(a: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    (a * x * a.transpose() - a * a.transpose()).norm_squared()
}

/// Full objective with the background given as rows.
pub fn direct_objective(a: &DMatrix<f64>, p: &DMatrix<f64>, b: &DMatrix<f64>, lambda: f64, x: &DMatrix<f64>) -> f64 {
    direct_distortion(a, x) + lambda * (p * x * b.transpose()).norm_squared()
}

/// Central differences along symmetric unit directions `(E_ij + E_ji)/2`.
pub fn fd_gradient(f: impl Fn(&DMatrix<f64>) -> f64, x: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let r = x.nrows();
    let mut g = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let mut e = DMatrix::zeros(r, r);
            e[(i, j)] += 0.5;
            e[(j, i)] += 0.5;
            let d = (f(&(x + &e * h)) - f(&(x - &e * h))) / (2.0 * h);
            g[(i, j)] = d;
            g[(j, i)] = d;
        }
    }
    g
}

/// All ordered pairs with a positive score within `delta`, sorted and
/// greedily deduplicated. Written with explicit loops on purpose.
pub fn brute_force_analogies(
    emb: &Embedding,
    axis: &[f64],
    anchors: (&str, &str),
    delta: f64,
    top_k: usize,
) -> Vec<AnalogyPair> {
    let n = emb.len();
    let mut all: Vec<(f64, usize, usize, f64)> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (ta, tb) = (emb.token(a), emb.token(b));
            if ta == anchors.0 || ta == anchors.1 || tb == anchors.0 || tb == anchors.1 {
                continue;
            }
            let (va, vb) = (emb.row(a), emb.row(b));
            let mut sq = 0.0;
            let mut proj = 0.0;
            for k in 0..emb.dim() {
                let diff = va[k] - vb[k];
                sq += diff * diff;
                proj += diff * axis[k];
            }
            let dist = sq.sqrt();
            if dist == 0.0 || dist > delta {
                continue;
            }
            let s = (proj / dist).clamp(-1.0, 1.0);
            if s > 0.0 {
                all.push((s, a, b, dist));
            }
        }
    }
    all.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap()
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for (s, a, b, dist) in all {
        if out.len() == top_k {
            break;
        }
        if used.contains(&a) || used.contains(&b) {
            continue;
        }
        used.insert(a);
        used.insert(b);
        out.push(AnalogyPair {
            word_a: emb.token(a).to_string(),
            word_b: emb.token(b).to_string(),
            score: s,
            pair_distance: dist,
        });
    }
    out
}

/// Population variance, two-pass.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Raw projections `v · (v_pos − v_neg)/|v_pos − v_neg|`.
pub fn projections(emb: &Embedding, pos: &str, neg: &str, words: &[String]) -> Vec<f64> {
    let (p, q) = (emb.vector(pos).unwrap(), emb.vector(neg).unwrap());
    let d: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
    let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    words
        .iter()
        .map(|w| {
            let v = emb.vector(w).unwrap();
            v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / len
        })
        .collect()
}

/// Random orthogonal matrix from the QR factorization of a Gaussian-ish one.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, r: usize) -> DMatrix<f64> {
    random_matrix(rng, r, r).qr().q()
}

/// Planned votes for the rating oracle: task `i` (1-based) of 30 receives
/// `stereotype_votes(i)` stereotype and `nonsense_votes(i)` nonsensical
/// flags out of 10 raters.
pub fn stereotype_votes(i: u64) -> usize {
    match i {
        1 | 7 | 19 => 10,
        _ => ((i * 7) % 10) as usize,
    }
}

pub fn nonsense_votes(i: u64) -> usize {
    ((i * 3) % 5) as usize
}

/// Response CSV text realizing the planned votes: rater `k` (0-based) flags
/// stereotype iff `k < stereotype_votes`, nonsensical iff `k >= 10 - nonsense_votes`.
pub fn planned_responses(n_tasks: u64, n_raters: usize) -> String {
    let mut s = String::from("id,rater_id,is_stereotype,is_nonsensical\n");
    for k in 0..n_raters {
        for i in 1..=n_tasks {
            let st = (k < stereotype_votes(i)) as u8;
            let ns = (k >= n_raters - nonsense_votes(i)) as u8;
            s.push_str(&format!("{i},rater{k:02},{st},{ns}\n"));
        }
    }
    s
}
