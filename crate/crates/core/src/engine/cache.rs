//! Binary cache of joint Fourier tables.
//!
//! Layout (little endian): magic "DIJFT", u16 version, u64 N, u64 outcomes1,
//! u64 outcomes2, u64 probe hash, u64 noise hash, then the a1, b1, p2, q2
//! arrays as f64.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::fourier::Interferometer;
use super::joint::JointFourierTable;
use crate::error::{Error, Result};
use crate::noise::NoiseDistribution;
use crate::spin::SpinState;

const MAGIC: &[u8; 5] = b"DIJFT";
const VERSION: u16 = 1;

/// Identifies the inputs a table was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub n: usize,
    pub probe_hash: u64,
    pub noise_hash: u64,
}

fn digest_u64(h: Sha256) -> u64 {
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 has 32 bytes"))
}

impl CacheKey {
    pub fn new(
        probe1: &SpinState,
        probe2: &SpinState,
        interferometer: Interferometer,
        noise_total: &NoiseDistribution,
    ) -> Result<Self> {
        let n = probe1.n_particles();
        let mut h = Sha256::new();
        h.update(format!("{interferometer:?}").as_bytes());
        for probe in [probe1, probe2] {
            h.update((probe.n_particles() as u64).to_le_bytes());
            for a in probe.amplitudes() {
                h.update(a.re.to_le_bytes());
                h.update(a.im.to_le_bytes());
            }
        }
        let probe_hash = digest_u64(h);
        // Tables depend on the noise only through its moments up to 2N.
        let coeffs = noise_total.fourier_coefficients((2 * n).max(1))?;
        let mut h = Sha256::new();
        for x in coeffs.v().iter().chain(coeffs.w()) {
            h.update(x.to_le_bytes());
        }
        Ok(Self {
            n,
            probe_hash,
            noise_hash: digest_u64(h),
        })
    }
}

pub fn write_table(path: &Path, key: &CacheKey, table: &JointFourierTable) -> Result<()> {
    let mut out = Vec::with_capacity(64 + 8 * (table.a1.len() * 2 + table.p2.len() * 2));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for x in [
        table.n as u64,
        table.outcomes1 as u64,
        table.outcomes2 as u64,
        key.probe_hash,
        key.noise_hash,
    ] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for arr in [&table.a1, &table.b1, &table.p2, &table.q2] {
        for x in arr.iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    // Write-then-rename so a crash never leaves a truncated cache.
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&out)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a cached table; `Ok(None)` when the header does not match `key`.
pub fn read_table(path: &Path, key: &CacheKey) -> Result<Option<JointFourierTable>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let header = MAGIC.len() + 2 + 5 * 8;
    if bytes.len() < header || &bytes[..5] != MAGIC {
        return Err(Error::Parse(format!("{} is not a table cache", path.display())));
    }
    let version = u16::from_le_bytes([bytes[5], bytes[6]]);
    if version != VERSION {
        return Ok(None);
    }
    let word = |i: usize| {
        let o = 7 + 8 * i;
        u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"))
    };
    let (n, o1, o2) = (word(0) as usize, word(1) as usize, word(2) as usize);
    if n != key.n || word(3) != key.probe_hash || word(4) != key.noise_hash {
        return Ok(None);
    }
    let d = n + 1;
    let expected = header + 8 * 2 * d * (o1 + o2);
    if bytes.len() != expected {
        return Err(Error::Parse(format!("table cache has {} bytes, expected {expected}", bytes.len())));
    }
    let mut floats = bytes[header..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut take = |len: usize| -> Vec<f64> { floats.by_ref().take(len).collect() };
    let a1 = take(o1 * d);
    let b1 = take(o1 * d);
    let p2 = take(o2 * d);
    let q2 = take(o2 * d);
    Ok(Some(JointFourierTable {
        n,
        outcomes1: o1,
        outcomes2: o2,
        a1,
        b1,
        p2,
        q2,
    }))
}

/// Returns the cached table for `key`, rebuilding and storing it on a miss.
pub fn load_or_build<F>(path: &Path, key: &CacheKey, build: F) -> Result<JointFourierTable>
where
    F: FnOnce() -> Result<JointFourierTable>,
{
    if path.exists() {
        if let Some(t) = read_table(path, key)? {
            return Ok(t);
        }
    }
    let table = build()?;
    write_table(path, key, &table)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::build_table;
    use crate::states::{coherent_x_state, twin_fock_state};

    #[test]
    fn round_trip_and_key_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        let probe = twin_fock_state(6).unwrap();
        let noise = NoiseDistribution::von_mises(0.3).unwrap();
        let key = CacheKey::new(&probe, &probe, Interferometer::MachZehnderY, &noise).unwrap();
        let built = build_table(&probe, &probe, Interferometer::MachZehnderY, &noise).unwrap();
        write_table(&path, &key, &built).unwrap();
        assert_eq!(read_table(&path, &key).unwrap().unwrap(), built);

        let other = coherent_x_state(6).unwrap();
        let key2 = CacheKey::new(&other, &other, Interferometer::MachZehnderY, &noise).unwrap();
        assert_ne!(key, key2);
        assert!(read_table(&path, &key2).unwrap().is_none());

        let mut calls = 0;
        let t = load_or_build(&path, &key, || {
            calls += 1;
            Ok(built.clone())
        })
        .unwrap();
        assert_eq!(calls, 0);
        assert_eq!(t, built);
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        fs::write(&path, b"not a cache at all, clearly not one").unwrap();
        let probe = twin_fock_state(2).unwrap();
        let key = CacheKey::new(&probe, &probe, Interferometer::MachZehnderY, &NoiseDistribution::Flat).unwrap();
        assert!(read_table(&path, &key).is_err());
    }
}
