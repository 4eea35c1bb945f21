//! Seeded test-matrix generators.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_matrix, Format};
use crate::matrix_core::orthonormal_basis;
use crate::rng::{derive_seed, SeededStream};
use crate::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    Gaussian,
    PlantedSpectrum,
    LowRankPlusNoise,
    FromFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub kind: MatrixKind,
    pub m: usize,
    pub d: usize,
    /// Singular values to plant; for `LowRankPlusNoise` its length is the
    /// planted rank.
    pub spectrum: Option<Vec<f64>>,
    pub noise_level: Option<f64>,
    pub path: Option<PathBuf>,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn gaussian(m: usize, d: usize, seed: u64) -> Self {
        MatrixSpec { kind: MatrixKind::Gaussian, m, d, spectrum: None, noise_level: None, path: None, seed }
    }

    pub fn planted(m: usize, d: usize, spectrum: Vec<f64>, seed: u64) -> Self {
        MatrixSpec { spectrum: Some(spectrum), kind: MatrixKind::PlantedSpectrum, ..Self::gaussian(m, d, seed) }
    }

    pub fn low_rank_plus_noise(m: usize, d: usize, spectrum: Vec<f64>, noise_level: f64, seed: u64) -> Self {
        MatrixSpec {
            kind: MatrixKind::LowRankPlusNoise,
            noise_level: Some(noise_level),
            ..Self::planted(m, d, spectrum, seed)
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Self {
        MatrixSpec { kind: MatrixKind::FromFile, path: Some(path.into()), ..Self::gaussian(0, 0, 0) }
    }
}

fn gaussian(m: usize, d: usize, seed: u64) -> Result<Matrix> {
    let mut s = SeededStream::new(seed);
    Matrix::new(m, d, s.normals(m * d))
}

/// `m×k` with orthonormal columns: thin QR of a Gaussian matrix.
pub fn random_orthonormal(m: usize, k: usize, seed: u64) -> Result<Matrix> {
    orthonormal_basis(&gaussian(m, k, seed)?)
}

/// `U diag(s) Vᵀ` with seeded random orthonormal `U` (m×k) and `V` (d×k).
fn planted(m: usize, d: usize, spectrum: &[f64], seed: u64) -> Result<Matrix> {
    let k = spectrum.len();
    let u = random_orthonormal(m, k, derive_seed(seed, 0))?;
    let v = random_orthonormal(d, k, derive_seed(seed, 1))?;
    u.scale_columns(spectrum)?.matmul(&v.transpose())
}

fn check_spectrum(spec: &MatrixSpec, max_len: usize) -> Result<&[f64]> {
    let s = spec.spectrum.as_deref().ok_or_else(|| Error::BadSpec("spectrum required".into()))?;
    if s.is_empty() || s.len() > max_len {
        return Err(Error::BadSpec(format!("spectrum length {} outside 1..={max_len}", s.len())));
    }
    if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::BadSpec("spectrum values must be finite and non-negative".into()));
    }
    Ok(s)
}

pub fn generate_matrix(spec: &MatrixSpec) -> Result<Matrix> {
    if spec.kind == MatrixKind::FromFile {
        let path = spec.path.as_ref().ok_or_else(|| Error::BadSpec("path required".into()))?;
        return read_matrix(path, Format::from_path(path));
    }
    if spec.d == 0 || spec.m < spec.d {
        return Err(Error::BadSpec(format!("need m ≥ d ≥ 1, got {}×{}", spec.m, spec.d)));
    }
    match spec.kind {
        MatrixKind::Gaussian => gaussian(spec.m, spec.d, spec.seed),
        MatrixKind::PlantedSpectrum => {
            let s = check_spectrum(spec, spec.d)?;
            if s.len() != spec.d {
                return Err(Error::BadSpec(format!("spectrum needs {} values, got {}", spec.d, s.len())));
            }
            planted(spec.m, spec.d, s, spec.seed)
        }
        MatrixKind::LowRankPlusNoise => {
            let s = check_spectrum(spec, spec.d)?;
            let noise = spec.noise_level.ok_or_else(|| Error::BadSpec("noise_level required".into()))?;
            if !noise.is_finite() || noise < 0.0 {
                return Err(Error::BadSpec(format!("noise_level {noise} must be finite and non-negative")));
            }
            let low = planted(spec.m, spec.d, s, spec.seed)?;
            low.add(&gaussian(spec.m, spec.d, derive_seed(spec.seed, 2))?.scale(noise))
        }
        MatrixKind::FromFile => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_matrix;
    use crate::matrix_core::{norms, singular_values};

    #[test]
    fn planted_norms() {
        let a = generate_matrix(&MatrixSpec::planted(10, 4, vec![8.0, 4.0, 2.0, 1.0], 11)).unwrap();
        let n = norms(&a).unwrap();
        assert!((n.spectral - 8.0).abs() < 1e-8);
        assert!((n.frobenius - 85f64.sqrt()).abs() < 1e-8);
        let s = singular_values(&a).unwrap();
        for (x, y) in s.iter().zip([8.0, 4.0, 2.0, 1.0]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn deterministic() {
        let spec = MatrixSpec::gaussian(100, 10, 5);
        assert_eq!(generate_matrix(&spec).unwrap(), generate_matrix(&spec).unwrap());
        let other = MatrixSpec::gaussian(100, 10, 6);
        assert_ne!(generate_matrix(&spec).unwrap(), generate_matrix(&other).unwrap());
    }

    #[test]
    fn low_rank_plus_noise_has_small_tail() {
        let a = generate_matrix(&MatrixSpec::low_rank_plus_noise(60, 6, vec![50.0, 40.0], 0.01, 2)).unwrap();
        let s = singular_values(&a).unwrap();
        assert!(s[1] > 39.0 && s[2] < 1.0);
        let exact = generate_matrix(&MatrixSpec::low_rank_plus_noise(60, 6, vec![50.0, 40.0], 0.0, 2)).unwrap();
        assert!(singular_values(&exact).unwrap()[2] < 1e-10);
    }

    #[test]
    fn bad_specs() {
        let bad = [
            MatrixSpec::gaussian(3, 4, 0),
            MatrixSpec::gaussian(3, 0, 0),
            MatrixSpec::planted(5, 2, vec![1.0], 0),
            MatrixSpec::planted(5, 2, vec![1.0, f64::NAN], 0),
            MatrixSpec { noise_level: None, ..MatrixSpec::low_rank_plus_noise(5, 2, vec![1.0], 0.1, 0) },
            MatrixSpec { path: None, ..MatrixSpec::from_file("x") },
        ];
        for spec in &bad {
            assert!(matches!(generate_matrix(spec), Err(Error::BadSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn from_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let a = generate_matrix(&MatrixSpec::gaussian(9, 3, 1)).unwrap();
        let p = dir.path().join("a.bin");
        write_matrix(&p, &a, Format::Bin).unwrap();
        let b = generate_matrix(&MatrixSpec::from_file(&p)).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
