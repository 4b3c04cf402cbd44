//! In-memory word embeddings and the read-only queries over them.
//!
//! An [`Embedding`] owns an ordered vocabulary and a row-major `n x r`
//! matrix of `f64` values. Rows are addressed by vocabulary index; the
//! token lookup is exact and case-sensitive.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Tolerance on row norms for an embedding flagged as normalized.
pub const NORMALIZED_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    dim: usize,
    normalized: bool,
}

impl Embedding {
    /// Builds an embedding from a vocabulary and a row-major matrix.
    ///
    /// Rejects duplicate or malformed tokens, non-finite values and a data
    /// length that does not match `vocab.len() * dim`.
    pub fn new(vocab: Vec<String>, data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        if data.len() != vocab.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: vocab.len() * dim,
                found: data.len(),
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, token) in vocab.iter().enumerate() {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::InvalidToken(token.clone()));
            }
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::DuplicateToken(token.clone()));
            }
            if data[i * dim..(i + 1) * dim].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(token.clone()));
            }
        }
        Ok(Self {
            vocab,
            index,
            data,
            dim,
            normalized: false,
        })
    }

    /// Builds an embedding from `(token, vector)` rows.
    pub fn from_rows<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut vocab = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (token, v) in rows {
            let token = token.into();
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    })
                }
                _ => {}
            }
            vocab.push(token);
            data.extend_from_slice(&v);
        }
        let dim = dim.ok_or_else(|| Error::Empty("no rows given".into()))?;
        Self::new(vocab, data, dim)
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Row-major backing storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn token(&self, index: usize) -> &str {
        &self.vocab[index]
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Exact stored vector for `word`.
    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        self.index_of(word)
            .map(|i| self.row(i))
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }

    /// Returns a copy with every row scaled to unit L2 norm.
    pub fn normalize_rows(&self) -> Result<Self> {
        let mut data = self.data.clone();
        for (i, row) in data.chunks_exact_mut(self.dim).enumerate() {
            let n = norm(row);
            if n == 0.0 {
                return Err(Error::ZeroVector(format!("row for {:?}", self.vocab[i])));
            }
            row.iter_mut().for_each(|v| *v /= n);
        }
        Ok(Self {
            vocab: self.vocab.clone(),
            index: self.index.clone(),
            data,
            dim: self.dim,
            normalized: true,
        })
    }

    /// Replaces the matrix while keeping the vocabulary. Used by transforms.
    pub(crate) fn with_data(&self, data: Vec<f64>, dim: usize) -> Result<Self> {
        if data.len() != self.vocab.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: self.vocab.len() * dim,
                found: data.len(),
            });
        }
        if let Some(i) = data
            .chunks_exact(dim)
            .position(|row| row.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite(self.vocab[i].clone()));
        }
        Ok(Self {
            vocab: self.vocab.clone(),
            index: self.index.clone(),
            data,
            dim,
            normalized: false,
        })
    }

    /// The `k` tokens most cosine-similar to `query`, skipping `exclude`.
    ///
    /// Results are sorted by descending cosine; equal cosines keep
    /// ascending vocabulary order. Zero rows score a cosine of 0.
    pub fn nearest_neighbors(
        &self,
        query: &[f64],
        k: usize,
        exclude: &HashSet<&str>,
    ) -> Result<Vec<(String, f64)>> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!(
                "k must be in 1..={}, got {k}",
                self.len()
            )));
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::ZeroVector("query vector".into()));
        }
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&i| !exclude.contains(self.vocab[i].as_str()))
            .map(|i| (i, cosine_with_norm(query, qn, self.row(i))))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(i, c)| (self.vocab[i].clone(), c))
            .collect())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    cosine_with_norm(a, norm(a), b)
}

fn cosine_with_norm(a: &[f64], a_norm: f64, b: &[f64]) -> f64 {
    let bn = norm(b);
    if a_norm == 0.0 || bn == 0.0 {
        0.0
    } else {
        dot(a, b) / (a_norm * bn)
    }
}
