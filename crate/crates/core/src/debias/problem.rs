use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::embedding::Embedding;
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.2;

/// Above this many background entries (`n_a * r`) the problem keeps only
/// the Gram matrix `AᵀA` instead of `A` itself.
pub const DEFAULT_DENSE_LIMIT: usize = 50_000_000;

/// The words whose pairwise geometry the transform should preserve.
#[derive(Debug, Clone)]
pub enum Background {
    /// Rows of `A`, one per background word.
    Rows(DMatrix<f64>),
    /// `AᵀA` accumulated without materializing `A`.
    Gram { gram: DMatrix<f64>, rows: usize },
}

impl Background {
    pub fn dim(&self) -> usize {
        match self {
            Background::Rows(a) => a.ncols(),
            Background::Gram { gram, .. } => gram.ncols(),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Background::Rows(a) => a.nrows(),
            Background::Gram { rows, .. } => *rows,
        }
    }
}

/// `min_{X ⪰ 0} ||A X Aᵀ − A Aᵀ||² + λ ||P X Bᵀ||²`, with rows of `A`, `B`
/// and `P` holding background words, bias directions and seed words.
#[derive(Debug, Clone)]
pub struct DebiasProblem {
    background: Background,
    directions: DMatrix<f64>,
    seeds: DMatrix<f64>,
    lambda: f64,
}

impl DebiasProblem {
    pub fn new(
        background: Background,
        directions: DMatrix<f64>,
        seeds: DMatrix<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let r = background.dim();
        if r == 0 {
            return Err(Error::InvalidArgument("problem dimension must be positive".into()));
        }
        if let Background::Gram { gram, .. } = &background {
            if gram.nrows() != gram.ncols() {
                return Err(Error::InvalidArgument("Gram matrix must be square".into()));
            }
        }
        if background.rows() == 0 {
            return Err(Error::Empty("background set".into()));
        }
        for (name, m) in [("direction", &directions), ("seed", &seeds)] {
            if m.ncols() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    found: m.ncols(),
                });
            }
            if m.nrows() == 0 {
                return Err(Error::Empty(format!("{name} matrix has no rows")));
            }
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        if background.rows() < r {
            log::warn!(
                "background has {} rows for dimension {r}; distances are only constrained on its span",
                background.rows()
            );
        }
        Ok(Self {
            background,
            directions,
            seeds,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.background.dim()
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn seeds(&self) -> &DMatrix<f64> {
        &self.seeds
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundPolicy {
    /// Every vocabulary word except seeds and anchors.
    AllExceptSeedsAndAnchors,
    /// As above, also leaving out the listed words (for example held-out
    /// evaluation words). Unknown words are ignored.
    AllExcept(Vec<String>),
    /// The listed words; OOV entries are skipped with a warning.
    Explicit(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub background: BackgroundPolicy,
    pub lambda: f64,
    /// Scale every direction row to unit length.
    pub normalize_directions: bool,
    pub dense_limit: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            background: BackgroundPolicy::AllExceptSeedsAndAnchors,
            lambda: DEFAULT_LAMBDA,
            normalize_directions: false,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

/// Assembles `A`, `B` and `P` from an embedding.
///
/// `B` rows are `v_pos − v_neg` for each anchor pair, `P` rows are the seed
/// vectors, and `A` follows the background policy.
pub fn build_problem<S: AsRef<str>>(
    emb: &Embedding,
    seed_words: &[S],
    direction_pairs: &[(S, S)],
    opts: &BuildOptions,
) -> Result<DebiasProblem> {
    let r = emb.dim();
    if seed_words.is_empty() {
        return Err(Error::Empty("seed word list".into()));
    }
    if direction_pairs.is_empty() {
        return Err(Error::Empty("direction anchor pairs".into()));
    }

    let mut excluded = HashSet::new();
    let mut b_rows = Vec::with_capacity(direction_pairs.len() * r);
    for (pos, neg) in direction_pairs {
        let vp = emb.vector(pos.as_ref())?;
        let vn = emb.vector(neg.as_ref())?;
        let mut diff: Vec<f64> = vp.iter().zip(vn).map(|(a, b)| a - b).collect();
        if opts.normalize_directions {
            let n = crate::embedding::norm(&diff);
            if n == 0.0 {
                return Err(Error::ZeroVector(format!(
                    "direction {:?} - {:?}",
                    pos.as_ref(),
                    neg.as_ref()
                )));
            }
            diff.iter_mut().for_each(|v| *v /= n);
        }
        b_rows.extend(diff);
        excluded.insert(emb.index_of(pos.as_ref()).unwrap());
        excluded.insert(emb.index_of(neg.as_ref()).unwrap());
    }
    let directions = DMatrix::from_row_slice(direction_pairs.len(), r, &b_rows);

    let mut p_rows = Vec::with_capacity(seed_words.len() * r);
    for w in seed_words {
        p_rows.extend_from_slice(emb.vector(w.as_ref())?);
        excluded.insert(emb.index_of(w.as_ref()).unwrap());
    }
    let seeds = DMatrix::from_row_slice(seed_words.len(), r, &p_rows);

    let background_ids: Vec<usize> = match &opts.background {
        BackgroundPolicy::AllExceptSeedsAndAnchors => {
            (0..emb.len()).filter(|i| !excluded.contains(i)).collect()
        }
        BackgroundPolicy::AllExcept(words) => {
            excluded.extend(words.iter().filter_map(|w| emb.index_of(w)));
            (0..emb.len()).filter(|i| !excluded.contains(i)).collect()
        }
        BackgroundPolicy::Explicit(words) => {
            let mut seen = HashSet::new();
            words
                .iter()
                .filter_map(|w| {
                    let id = emb.index_of(w);
                    if id.is_none() {
                        log::warn!("background word {w:?} is not in the vocabulary; skipped");
                    }
                    id
                })
                .filter(|i| seen.insert(*i))
                .collect()
        }
    };
    if background_ids.is_empty() {
        return Err(Error::Empty("background set".into()));
    }

    let background = if background_ids.len() * r > opts.dense_limit {
        let mut gram = DMatrix::zeros(r, r);
        for &i in &background_ids {
            let v = emb.row(i);
            for (j, &vj) in v.iter().enumerate() {
                for (k, &vk) in v.iter().enumerate().skip(j) {
                    gram[(j, k)] += vj * vk;
                }
            }
        }
        gram.fill_lower_triangle_with_upper_triangle();
        Background::Gram {
            gram,
            rows: background_ids.len(),
        }
    } else {
        let mut data = Vec::with_capacity(background_ids.len() * r);
        for &i in &background_ids {
            data.extend_from_slice(emb.row(i));
        }
        Background::Rows(DMatrix::from_row_slice(background_ids.len(), r, &data))
    };

    DebiasProblem::new(background, directions, seeds, opts.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Embedding {
        Embedding::from_rows([
            ("he", vec![1.0, 0.2, 0.0]),
            ("she", vec![-1.0, 0.2, 0.0]),
            ("manager", vec![0.4, 1.0, 0.1]),
            ("table", vec![0.0, 0.3, 1.0]),
            ("river", vec![0.1, -0.5, 0.7]),
        ])
        .unwrap()
    }

    #[test]
    fn default_background_drops_seeds_and_anchors() {
        let e = toy();
        let p = build_problem(&e, &["manager"], &[("he", "she")], &BuildOptions::default()).unwrap();
        assert_eq!(p.directions().nrows(), 1);
        assert_eq!(p.seeds().nrows(), 1);
        assert_eq!(p.background().rows(), e.len() - 3);
        assert_eq!(p.directions().row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 0.0, 0.0]);
        assert_eq!(p.lambda(), DEFAULT_LAMBDA);
    }

    #[test]
    fn held_out_words_leave_the_background() {
        let e = toy();
        let opts = BuildOptions {
            background: BackgroundPolicy::AllExcept(vec!["river".into(), "unknown".into()]),
            ..Default::default()
        };
        let p = build_problem(&e, &["manager"], &[("he", "she")], &opts).unwrap();
        assert_eq!(p.background().rows(), 1);
    }

    #[test]
    fn explicit_full_background_is_whole_matrix() {
        let e = toy();
        let opts = BuildOptions {
            background: BackgroundPolicy::Explicit(e.vocab().to_vec()),
            ..Default::default()
        };
        let p = build_problem(&e, &["manager"], &[("he", "she")], &opts).unwrap();
        match p.background() {
            Background::Rows(a) => {
                assert_eq!(a.nrows(), e.len());
                for i in 0..e.len() {
                    assert_eq!(a.row(i).iter().copied().collect::<Vec<_>>(), e.row(i));
                }
            }
            _ => panic!("expected dense rows"),
        }
    }

    #[test]
    fn gram_route_above_dense_limit() {
        let e = toy();
        let opts = BuildOptions {
            dense_limit: 1,
            ..Default::default()
        };
        let p = build_problem(&e, &["manager"], &[("he", "she")], &opts).unwrap();
        let dense = build_problem(&e, &["manager"], &[("he", "she")], &BuildOptions::default()).unwrap();
        let (Background::Gram { gram, rows }, Background::Rows(a)) = (p.background(), dense.background()) else {
            panic!("unexpected background kinds");
        };
        assert_eq!(*rows, 2);
        assert!((gram - a.transpose() * a).norm() < 1e-14);
    }

    #[test]
    fn oov_seed_is_named() {
        let e = toy();
        let err = build_problem(&e, &["manager", "astronaut"], &[("he", "she")], &BuildOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("astronaut"));
    }

    #[test]
    fn validates_inputs() {
        let e = toy();
        let none: [&str; 0] = [];
        assert!(build_problem(&e, &none, &[("he", "she")], &BuildOptions::default()).is_err());
        let opts = BuildOptions {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(build_problem(&e, &["manager"], &[("he", "she")], &opts).is_err());
        let opts = BuildOptions {
            background: BackgroundPolicy::Explicit(vec!["nope".into()]),
            ..Default::default()
        };
        assert!(matches!(
            build_problem(&e, &["manager"], &[("he", "she")], &opts),
            Err(Error::Empty(_))
        ));
    }
}
