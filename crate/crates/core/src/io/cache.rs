//! Little-endian binary containers for cached spectral data.
//!
//! Basis layout: `b"CEBASIS\0"`, version byte, `n: u64`, `k: u64`,
//! `k` eigenvalues, then the `n x k` eigenvector matrix column-major, all `f64`.
//! Dense matrices (`b"CEMATRX\0"`) and Laplacians (`b"CELAPLC\0"`) follow the
//! same header scheme.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::laplacian::{MassDiagonal, SparseSymmetric};
use crate::spectral::SpectralBasis;

pub const BASIS_MAGIC: &[u8; 8] = b"CEBASIS\0";
pub const MATRIX_MAGIC: &[u8; 8] = b"CEMATRX\0";
pub const LAPLACIAN_MAGIC: &[u8; 8] = b"CELAPLC\0";
pub const VERSION: u8 = 1;

pub fn encode_basis(basis: &SpectralBasis) -> Vec<u8> {
    let (n, k) = basis.phi.shape();
    let mut out = header(BASIS_MAGIC, n as u64, k as u64, 8 * (k + n * k));
    for &l in &basis.lambda {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for &v in basis.phi.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a basis; with `expected_n` the vertex count must match.
pub fn decode_basis(bytes: &[u8], expected_n: Option<usize>) -> Result<SpectralBasis> {
    let mut r = Reader::new(bytes, BASIS_MAGIC)?;
    let n = r.dim()?;
    let k = r.dim()?;
    if let Some(expected) = expected_n {
        if expected != n {
            return Err(Error::DimensionMismatch { expected, found: n });
        }
    }
    let lambda = r.f64s(k)?;
    let phi = DMatrix::from_vec(n, k, r.f64s(n * k)?);
    r.finish()?;
    Ok(SpectralBasis { phi, lambda })
}

pub fn encode_matrix(m: &DMatrix<f64>) -> Vec<u8> {
    let (r, c) = m.shape();
    let mut out = header(MATRIX_MAGIC, r as u64, c as u64, 8 * r * c);
    for &v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DMatrix<f64>> {
    let mut r = Reader::new(bytes, MATRIX_MAGIC)?;
    let rows = r.dim()?;
    let cols = r.dim()?;
    let m = DMatrix::from_vec(rows, cols, r.f64s(rows * cols)?);
    r.finish()?;
    Ok(m)
}

pub fn encode_laplacian(stiffness: &SparseSymmetric, mass: &MassDiagonal) -> Vec<u8> {
    let triplets = stiffness.triplets();
    let mut out = header(
        LAPLACIAN_MAGIC,
        stiffness.n() as u64,
        triplets.len() as u64,
        24 * triplets.len() + 8 * mass.len(),
    );
    for (i, j, v) in triplets {
        out.extend_from_slice(&(i as u64).to_le_bytes());
        out.extend_from_slice(&(j as u64).to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &a in mass.areas() {
        out.extend_from_slice(&a.to_le_bytes());
    }
    out
}

pub fn decode_laplacian(bytes: &[u8]) -> Result<(SparseSymmetric, MassDiagonal)> {
    let mut r = Reader::new(bytes, LAPLACIAN_MAGIC)?;
    let n = r.dim()?;
    let nnz = r.dim()?;
    let mut triplets = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let i = r.dim()?;
        let j = r.dim()?;
        let v = r.f64s(1)?[0];
        if i >= n || j >= n {
            return Err(Error::CacheHeader(format!("entry ({i}, {j}) outside {n}x{n}")));
        }
        triplets.push((i, j, v));
    }
    let areas = r.f64s(n)?;
    r.finish()?;
    Ok((SparseSymmetric::from_triplets(n, triplets), MassDiagonal::new(areas)?))
}

pub fn write_basis(basis: &SpectralBasis, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_basis(basis))
}

pub fn read_basis(path: impl AsRef<Path>, expected_n: Option<usize>) -> Result<SpectralBasis> {
    decode_basis(&read_bytes(path.as_ref())?, expected_n)
}

pub fn write_matrix(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_matrix(m))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    decode_matrix(&read_bytes(path.as_ref())?)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn header(magic: &[u8; 8], a: u64, b: u64, payload: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(25 + payload);
    out.extend_from_slice(magic);
    out.push(VERSION);
    out.extend_from_slice(&a.to_le_bytes());
    out.extend_from_slice(&b.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], magic: &[u8; 8]) -> Result<Self> {
        if bytes.len() < 9 || &bytes[..8] != magic {
            return Err(Error::CacheHeader(format!(
                "expected magic {:?}",
                String::from_utf8_lossy(&magic[..7])
            )));
        }
        if bytes[8] != VERSION {
            return Err(Error::CacheHeader(format!("unsupported version {}", bytes[8])));
        }
        Ok(Self { bytes, pos: 9 })
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::CacheHeader("truncated payload".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn dim(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::CacheHeader(format!("dimension {v} too large")))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| Error::CacheHeader("payload size overflow".into()))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::CacheHeader("trailing bytes after payload".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_basis(n: usize, k: usize) -> SpectralBasis {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        SpectralBasis {
            phi: DMatrix::from_fn(n, k, |_, _| rng.gen::<f64>() - 0.5),
            lambda: (0..k).map(|i| i as f64 * rng.gen::<f64>()).collect(),
        }
    }

    #[test]
    fn basis_roundtrip_is_bitwise() {
        let b = random_basis(100, 10);
        let back = decode_basis(&encode_basis(&b), Some(100)).unwrap();
        assert!(back.phi.iter().zip(b.phi.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(back.lambda.iter().zip(&b.lambda).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = encode_basis(&random_basis(5, 2));
        bytes[0] = b'X';
        assert!(matches!(decode_basis(&bytes, None), Err(Error::CacheHeader(_))));
        assert!(matches!(decode_matrix(&encode_basis(&random_basis(5, 2))), Err(Error::CacheHeader(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let bytes = encode_basis(&random_basis(100, 3));
        assert!(matches!(
            decode_basis(&bytes, Some(101)),
            Err(Error::DimensionMismatch { expected: 101, found: 100 })
        ));
    }

    #[test]
    fn truncated_payload() {
        let bytes = encode_basis(&random_basis(10, 3));
        assert!(decode_basis(&bytes[..bytes.len() - 1], None).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.bin");
        let b = random_basis(20, 4);
        write_basis(&b, &path).unwrap();
        assert_eq!(read_basis(&path, Some(20)).unwrap(), b);
    }
}
