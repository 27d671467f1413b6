//! Binary sample-set files.
//!
//! Layout: the 8 magic bytes `COVEST01`, a little-endian `u64` header
//! length, a UTF-8 JSON header `{"n", "N", "seed", "model"}`, then `N·n`
//! little-endian `f64` values in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::covariance::SampleSet;
use crate::distributions::VectorModel;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"COVEST01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub seed: u64,
    pub model: VectorModel,
}

pub fn write_samples<W: Write>(mut w: W, s: &SampleSet) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        n: s.n,
        big_n: s.len(),
        seed: s.seed,
        model: s.model.clone(),
    })?;
    w.write_all(MAGIC)?;
    w.write_all(&(header.len() as u64).to_le_bytes())?;
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(s.data.len() * 8);
    for v in &s.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(mut r: R) -> Result<SampleSet> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidModel("not a sample-set file (bad magic)".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut header = vec![0u8; len];
    r.read_exact(&mut header)?;
    let h: Header = serde_json::from_slice(&header)?;
    if h.n == 0 || h.big_n == 0 {
        return Err(Error::InvalidModel("sample-set header declares an empty set".into()));
    }
    let count = h
        .n
        .checked_mul(h.big_n)
        .ok_or_else(|| Error::InvalidModel("sample-set size overflows".into()))?;
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::InvalidModel("trailing bytes after sample data".into()));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(SampleSet {
        n: h.n,
        data,
        model: h.model,
        seed: h.seed,
    })
}

pub fn save(path: impl AsRef<Path>, s: &SampleSet) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_samples(std::io::BufWriter::new(f), s)
}

pub fn load(path: impl AsRef<Path>) -> Result<SampleSet> {
    let f = std::fs::File::open(path)?;
    read_samples(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_in_memory() {
        let s = SampleSet::draw(&VectorModel::pareto(3, 6.0), 17, 4).unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(read_samples(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn truncated_file_is_an_error() {
        let s = SampleSet::draw(&VectorModel::gaussian(2), 3, 4).unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        buf.pop();
        assert!(read_samples(buf.as_slice()).is_err());
        assert!(read_samples(&b"NOTMAGIC"[..]).is_err());
    }
}
