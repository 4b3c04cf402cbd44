use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::psd::{eigen, spectral_map};
use crate::embedding::Embedding;
use crate::error::{Error, Result};

const TRANSFORM_MAGIC: &str = "debias-transform v1";

/// Symmetric PSD square root `T = Q·sqrt(Λ)·Qᵀ`, so that `T Tᵀ = X`.
///
/// Eigenvalues in `[-1e-6·s, 0)` are clipped to zero, where
/// `s = max(1, max|λ|)`; anything more negative is rejected.
pub fn factor_transform(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !x.is_square() {
        return Err(Error::InvalidArgument("transform input must be square".into()));
    }
    let scale = x.amax().max(1.0);
    let asym = (x - x.transpose()).amax();
    if asym > 1e-8 * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (max asymmetry {asym:.3e})"
        )));
    }
    let eig = eigen(&((x + x.transpose()) * 0.5))?;
    let spectral = eig.eigenvalues.amax().max(1.0);
    let lowest = eig.eigenvalues.min();
    if lowest < -1e-6 * spectral {
        return Err(Error::NotPsd(format!("smallest eigenvalue {lowest:.3e}")));
    }
    Ok(spectral_map(&eig, |l| l.max(0.0).sqrt()))
}

/// Maps every word vector `v` to `v T`.
pub fn apply_transform(emb: &Embedding, t: &DMatrix<f64>) -> Result<Embedding> {
    let r = emb.dim();
    if t.nrows() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: t.nrows(),
        });
    }
    let out_dim = t.ncols();
    let mut data = Vec::with_capacity(emb.len() * out_dim);
    for row in emb.rows() {
        data.extend((0..out_dim).map(|j| {
            row.iter()
                .enumerate()
                .map(|(k, v)| v * t[(k, j)])
                .sum::<f64>()
        }));
    }
    emb.with_data(data, out_dim)
}

/// Text format: `debias-transform v1`, then `r`, then `r` rows of `r`
/// space-separated values (row-major).
pub fn encode_transform(t: &DMatrix<f64>) -> Result<String> {
    if !t.is_square() {
        return Err(Error::InvalidArgument("transform must be square".into()));
    }
    let mut s = format!("{TRANSFORM_MAGIC}\n{}\n", t.nrows());
    for i in 0..t.nrows() {
        let row: Vec<String> = t.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    Ok(s)
}

pub fn decode_transform(text: &str) -> Result<DMatrix<f64>> {
    let here = Path::new("<transform>");
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == TRANSFORM_MAGIC => {}
        _ => return Err(Error::parse(here, 1, format!("expected {TRANSFORM_MAGIC:?}"))),
    }
    let r: usize = lines
        .next()
        .and_then(|(_, l)| l.trim().parse().ok())
        .filter(|&r| r > 0)
        .ok_or_else(|| Error::parse(here, 2, "expected a positive dimension"))?;
    let mut data = Vec::with_capacity(r * r);
    let mut rows = 0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for f in line.split_whitespace() {
            data.push(
                f.parse::<f64>()
                    .map_err(|_| Error::parse(here, i + 1, format!("bad number {f:?}")))?,
            );
        }
        if data.len() - before != r {
            return Err(Error::parse(here, i + 1, format!("expected {r} values")));
        }
        rows += 1;
    }
    if rows != r {
        return Err(Error::parse(here, rows + 2, format!("expected {r} rows, found {rows}")));
    }
    Ok(DMatrix::from_row_slice(r, r, &data))
}

pub fn write_transform(t: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_transform(t)?).map_err(|e| Error::io(path, e))
}

pub fn read_transform(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_transform(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal_roots() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((factor_transform(&i).unwrap() - &i).amax() < 1e-14);
        let x = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let t = factor_transform(&x).unwrap();
        assert!((t - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).amax() < 1e-14);
    }

    #[test]
    fn random_psd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = DMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
            let x = &m * m.transpose();
            let t = factor_transform(&x).unwrap();
            assert!((&t - t.transpose()).amax() < 1e-14);
            assert!((&t * t.transpose() - &x).norm() / x.norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(factor_transform(&asym), Err(Error::InvalidArgument(_))));
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.1]);
        assert!(matches!(factor_transform(&neg), Err(Error::NotPsd(_))));
        let tiny = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-9]);
        let t = factor_transform(&tiny).unwrap();
        assert_eq!(t[(1, 1)], 0.0);
    }

    #[test]
    fn apply_identity_and_scaling() {
        let e = Embedding::from_rows([("a", vec![1.0, 2.0]), ("b", vec![-3.0, 0.5])]).unwrap();
        let same = apply_transform(&e, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(same, e);
        let doubled = apply_transform(&e, &(DMatrix::identity(2, 2) * 2.0)).unwrap();
        let dist = |m: &Embedding| {
            let (x, y) = (m.row(0), m.row(1));
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
        };
        assert!((dist(&doubled) - 2.0 * dist(&e)).abs() < 1e-12);
        assert!(apply_transform(&e, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn transform_file_round_trip() {
        let t = DMatrix::from_row_slice(2, 2, &[0.1 + 0.2, -1.0 / 3.0, 1e-300, 7.0]);
        let text = encode_transform(&t).unwrap();
        assert!(text.starts_with("debias-transform v1\n2\n"));
        assert_eq!(decode_transform(&text).unwrap(), t);
        assert!(decode_transform("debias-transform v1\n2\n1 2\n").is_err());
        assert!(decode_transform("nope\n1\n1\n").is_err());
    }
}
