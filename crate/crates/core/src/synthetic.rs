//! Seeded synthetic embeddings with a planted bias component.
//!
//! Vectors are built in a random orthonormal basis `q_0 .. q_{r-1}`:
//!
//! * `q_0` is the bias direction. The anchors differ only along it.
//! * `q_1 ..= q_k` span a "seed topic" subspace. Seed words live mostly in
//!   it, and their bias coordinate is a fixed linear function of their topic
//!   coordinates (plus small noise), so the bias is learnable from a subset.
//! * Background words vary mostly in the remaining coordinates and carry a
//!   small independent bias coordinate.
//!
//! A few background "analogy families" share a common offset vector so that
//! `x_i : y_i :: x_j : y_j` questions have exact vector-arithmetic answers.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embedding::Embedding;
use crate::eval::{AnalogyDataset, AnalogyQuestion, SimilarityDataset};

#[derive(Debug, Clone)]
pub struct PlantedBiasConfig {
    pub n_words: usize,
    pub dim: usize,
    pub n_seeds: usize,
    /// Dimension of the seed topic subspace.
    pub topic_dim: usize,
    /// Standard deviation of the seeds' bias coordinate.
    pub seed_bias: f64,
    /// Standard deviation of the background bias coordinate.
    pub background_bias: f64,
    /// Per-coordinate spread of seed words inside the topic subspace.
    pub seed_topic_spread: f64,
    /// Per-coordinate spread of background words inside the topic subspace.
    pub background_topic_spread: f64,
    /// Per-coordinate spread in the remaining coordinates.
    pub spread: f64,
    /// Bias-coordinate noise on seed words not explained by the topic.
    pub seed_noise: f64,
    /// Anchors sit at `±anchor_offset` along the bias direction.
    pub anchor_offset: f64,
    /// Number of analogy families and members per family.
    pub families: usize,
    pub family_size: usize,
    pub rng_seed: u64,
}

impl Default for PlantedBiasConfig {
    fn default() -> Self {
        Self {
            n_words: 2000,
            dim: 30,
            n_seeds: 100,
            topic_dim: 4,
            seed_bias: 0.3,
            background_bias: 0.05,
            seed_topic_spread: 0.3,
            background_topic_spread: 0.002,
            spread: 0.2,
            seed_noise: 0.01,
            anchor_offset: 0.5,
            families: 4,
            family_size: 10,
            rng_seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedBias {
    pub embedding: Embedding,
    /// Unit bias direction.
    pub direction: Vec<f64>,
    pub anchors: (String, String),
    pub seeds: Vec<String>,
    pub background: Vec<String>,
    /// `(family, x_i, y_i)` where `y_i = x_i + offset_family`.
    pub family_pairs: Vec<(usize, String, String)>,
}

fn gaussian(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z * sd
}

pub fn planted_bias(cfg: &PlantedBiasConfig) -> PlantedBias {
    let r = cfg.dim;
    let k = cfg.topic_dim;
    assert!(r > k + 1, "dimension must exceed topic_dim + 1");
    let family_words = cfg.families * cfg.family_size * 2;
    assert!(
        cfg.n_words >= cfg.n_seeds + 2 + family_words + 2,
        "not enough words for seeds, anchors and families"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let basis = DMatrix::from_fn(r, r, |_, _| gaussian(&mut rng, 1.0)).qr().q();
    let embed = |coords: &[f64]| -> Vec<f64> { (&basis * DVector::from_column_slice(coords)).as_slice().to_vec() };

    let mut g: Vec<f64> = (0..k).map(|_| gaussian(&mut rng, 1.0)).collect();
    let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.iter_mut().for_each(|v| *v /= gn);

    let background_coords = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut c = vec![0.0; r];
        c[0] = gaussian(rng, cfg.background_bias);
        for v in &mut c[1..=k] {
            *v = gaussian(rng, cfg.background_topic_spread);
        }
        for v in &mut c[k + 1..] {
            *v = gaussian(rng, cfg.spread);
        }
        c
    };

    let mut rows: Vec<(String, Vec<f64>)> = Vec::with_capacity(cfg.n_words);

    let mut base = vec![0.0; r];
    for v in &mut base[k + 1..] {
        *v = gaussian(&mut rng, cfg.spread);
    }
    let mut he = base.clone();
    he[0] = cfg.anchor_offset;
    let mut she = base;
    she[0] = -cfg.anchor_offset;
    rows.push(("he".into(), embed(&he)));
    rows.push(("she".into(), embed(&she)));

    let mut seeds = Vec::with_capacity(cfg.n_seeds);
    for i in 0..cfg.n_seeds {
        let z: Vec<f64> = (0..k).map(|_| gaussian(&mut rng, 1.0)).collect();
        let mut c = vec![0.0; r];
        c[0] = cfg.seed_bias * z.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
            + gaussian(&mut rng, cfg.seed_noise);
        for (j, zj) in z.iter().enumerate() {
            c[1 + j] = cfg.seed_topic_spread * zj;
        }
        for v in &mut c[k + 1..] {
            *v = gaussian(&mut rng, cfg.spread);
        }
        let name = format!("seed{i:03}");
        rows.push((name.clone(), embed(&c)));
        seeds.push(name);
    }

    let mut background = Vec::new();
    let mut family_pairs = Vec::new();
    for f in 0..cfg.families {
        // offsets live outside the bias and topic coordinates
        let mut offset = vec![0.0; r];
        for v in &mut offset[k + 1..] {
            *v = gaussian(&mut rng, 1.5 * cfg.spread);
        }
        for m in 0..cfg.family_size {
            let x = background_coords(&mut rng);
            let y: Vec<f64> = x.iter().zip(&offset).map(|(a, b)| a + b).collect();
            let (xn, yn) = (format!("fam{f}x{m}"), format!("fam{f}y{m}"));
            rows.push((xn.clone(), embed(&x)));
            rows.push((yn.clone(), embed(&y)));
            background.push(xn.clone());
            background.push(yn.clone());
            family_pairs.push((f, xn, yn));
        }
    }

    let remaining = cfg.n_words - rows.len();
    for i in 0..remaining {
        let name = format!("w{i:05}");
        rows.push((name.clone(), embed(&background_coords(&mut rng))));
        background.push(name);
    }

    PlantedBias {
        embedding: Embedding::from_rows(rows).expect("synthetic rows are valid"),
        direction: basis.column(0).iter().copied().collect(),
        anchors: ("he".into(), "she".into()),
        seeds,
        background,
        family_pairs,
    }
}

impl PlantedBias {
    /// `x_i : y_i :: x_j : y_j` for all ordered member pairs within a family.
    pub fn analogy_dataset(&self) -> AnalogyDataset {
        let mut questions = Vec::new();
        for (f, xi, yi) in &self.family_pairs {
            for (g, xj, yj) in &self.family_pairs {
                if f == g && xi != xj {
                    questions.push(AnalogyQuestion {
                        a: xi.clone(),
                        b: yi.clone(),
                        c: xj.clone(),
                        expected: yj.clone(),
                    });
                }
            }
        }
        AnalogyDataset {
            name: "planted-analogy".into(),
            questions,
        }
    }

    /// Random background pairs scored by their cosine plus rating noise.
    pub fn similarity_dataset(&self, n_pairs: usize, noise: f64, rng_seed: u64) -> SimilarityDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let jitter = Normal::new(0.0, noise).expect("noise must be finite and non-negative");
        let mut pairs = Vec::with_capacity(n_pairs);
        while pairs.len() < n_pairs {
            let a = &self.background[rng.random_range(0..self.background.len())];
            let b = &self.background[rng.random_range(0..self.background.len())];
            if a == b {
                continue;
            }
            let cos = crate::embedding::cosine(
                self.embedding.vector(a).unwrap(),
                self.embedding.vector(b).unwrap(),
            );
            pairs.push((a.clone(), b.clone(), cos + jitter.sample(&mut rng)));
        }
        SimilarityDataset {
            name: "planted-similarity".into(),
            pairs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::{bias_direction, project_words, projection_variance, OovPolicy};

    #[test]
    fn deterministic_and_well_formed() {
        let cfg = PlantedBiasConfig::default();
        let a = planted_bias(&cfg);
        let b = planted_bias(&cfg);
        assert_eq!(a.embedding, b.embedding);
        assert_eq!(a.embedding.len(), cfg.n_words);
        assert_eq!(a.seeds.len(), cfg.n_seeds);
        assert_eq!(a.background.len(), cfg.n_words - cfg.n_seeds - 2);
    }

    #[test]
    fn anchors_recover_the_planted_direction() {
        let p = planted_bias(&PlantedBiasConfig::default());
        let d = bias_direction(&p.embedding, "he", "she").unwrap();
        let dot: f64 = d.axis().iter().zip(&p.direction).map(|(a, b)| a * b).sum();
        assert!((dot - 1.0).abs() < 1e-12);
        let seeds = project_words(&p.embedding, &p.seeds, &d, OovPolicy::Error).unwrap();
        let bg = project_words(&p.embedding, &p.background, &d, OovPolicy::Error).unwrap();
        let (vs, vb) = (projection_variance(&seeds).unwrap(), projection_variance(&bg).unwrap());
        assert!(vs > 0.05 && vs < 0.15, "seed variance {vs}");
        assert!(vb > 0.0015 && vb < 0.0035, "background variance {vb}");
    }
}
