//! Gaussian couplings `J_{i_1…i_p}` of one disorder realisation.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::mixtures::check_degree;

/// Default cap on the number of tensor entries.
pub const DEFAULT_ENTRY_BUDGET: u64 = 1 << 31;

const MAGIC: &[u8; 4] = b"PSPN";
const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;

/// ChaCha8 stream for `(seed, stream)`. Streams of one seed never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unsymmetrised i.i.d. standard normal couplings, stored row-major in
/// `(i_1, …, i_p)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderTensor {
    n: usize,
    p: u32,
    seed: u64,
    entries: Vec<f64>,
}

fn entry_count(n: usize, p: u32, budget: u64) -> Result<usize> {
    let entries = (n as u128).checked_pow(p).unwrap_or(u128::MAX);
    if entries > budget as u128 {
        return Err(Error::SizeExceeded { entries, bytes: entries.saturating_mul(8), budget });
    }
    Ok(entries as usize)
}

impl DisorderTensor {
    /// Samples a tensor from `seed` under the default entry budget.
    pub fn sample(n: usize, p: u32, seed: u64) -> Result<Self> {
        Self::sample_with_budget(n, p, seed, DEFAULT_ENTRY_BUDGET)
    }

    pub fn sample_with_budget(n: usize, p: u32, seed: u64, budget: u64) -> Result<Self> {
        Self::sample_stream(n, p, seed, 0, budget)
    }

    /// Samples from stream `stream` of `seed`; used for independent draws that
    /// share one base seed.
    pub fn sample_stream(n: usize, p: u32, seed: u64, stream: u64, budget: u64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("dimension {n} must be at least 2")));
        }
        check_degree(p)?;
        let len = entry_count(n, p, budget)?;
        let mut rng = stream_rng(seed, stream);
        let entries = StandardNormal.sample_iter(&mut rng).take(len).collect();
        Ok(Self { n, p, seed, entries })
    }

    pub fn from_entries(n: usize, p: u32, entries: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(invalid("n", "dimension must be positive"));
        }
        check_degree(p)?;
        let len = entry_count(n, p, u64::MAX)?;
        if entries.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: entries.len() });
        }
        Ok(Self { n, p, seed: 0, entries })
    }

    pub fn zeros(n: usize, p: u32) -> Result<Self> {
        let len = entry_count(n, p, DEFAULT_ENTRY_BUDGET)?;
        Self::from_entries(n, p, vec![0.0; len])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let at = self.offset(index);
        self.entries[at] = value;
    }

    /// Writes the binary format: `"PSPN"`, version `u16`, `N` as `u32`, `p`
    /// as `u16`, four reserved zero bytes, then `N^p` little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[..4].copy_from_slice(MAGIC);
        header[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        header[6..10].copy_from_slice(&(self.n as u32).to_le_bytes());
        header[10..12].copy_from_slice(&(self.p as u16).to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.entries.len() * 8);
        for v in &self.entries {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(io)?;
        if &header[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;
        let p = u16::from_le_bytes([header[10], header[11]]) as u32;
        let len = entry_count(n, p, DEFAULT_ENTRY_BUDGET)?;
        let mut bytes = vec![0u8; len * 8];
        r.read_exact(&mut bytes).map_err(io)?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing).map_err(io)? != 0 {
            return Err(Error::Format("trailing bytes after tensor data".into()));
        }
        let entries = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_entries(n, p, entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = DisorderTensor::sample(5, 3, 11).unwrap();
        let b = DisorderTensor::sample(5, 3, 11).unwrap();
        let c = DisorderTensor::sample(5, 3, 12).unwrap();
        assert_eq!(a.entries().len(), 125);
        assert_eq!(a, b);
        assert!(a.entries().iter().zip(c.entries()).any(|(x, y)| x != y));
    }

    #[test]
    fn moments_within_five_sigma() {
        let t = DisorderTensor::sample(16, 3, 2024).unwrap();
        let n = t.entries().len() as f64;
        let mean = t.entries().iter().sum::<f64>() / n;
        let var = t.entries().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 5.0 / n.sqrt());
        assert!((0.93..=1.07).contains(&var), "variance {var}");
    }

    #[test]
    fn budget_is_enforced() {
        match DisorderTensor::sample_with_budget(100, 3, 0, 1000) {
            Err(Error::SizeExceeded { entries, bytes, .. }) => {
                assert_eq!(entries, 1_000_000);
                assert_eq!(bytes, 8_000_000);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(DisorderTensor::sample(1, 3, 0).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let t = DisorderTensor::sample(4, 3, 5).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 64 * 8);
        assert_eq!(&buf[..4], b"PSPN");
        let back = DisorderTensor::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.entries(), t.entries());
        assert_eq!((back.n(), back.p()), (4, 3));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(DisorderTensor::read_from(bad.as_slice()).is_err());
        assert!(DisorderTensor::read_from(&buf[..buf.len() - 1]).is_err());
    }
}
