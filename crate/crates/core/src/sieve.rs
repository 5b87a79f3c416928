//! Least-prime-factor tables from a linear sieve, with an optional on-disk cache.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LPF1";

#[derive(Clone, PartialEq, Eq)]
pub struct LpfTable {
    // lpf[n] for n in 0..=horizon; entries 0 and 1 are 0
    lpf: Vec<u32>,
}

impl std::fmt::Debug for LpfTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LpfTable")
            .field("horizon", &self.horizon())
            .finish()
    }
}

impl LpfTable {
    pub fn horizon(&self) -> usize {
        self.lpf.len() - 1
    }

    /// Least prime factor of `n ≥ 2`.
    pub fn get(&self, n: usize) -> u32 {
        assert!(
            n >= 2 && n <= self.horizon(),
            "lpf({n}) outside [2, {}]",
            self.horizon()
        );
        self.lpf[n]
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.lpf[n] as usize == n
    }

    pub fn primes(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=self.horizon()).filter(|&n| self.is_prime(n))
    }
}

/// Linear sieve: every composite is crossed out exactly once, by its least prime factor.
pub fn lpf_sieve(horizon: usize) -> Result<LpfTable> {
    if horizon < 2 {
        return Err(Error::param(format!(
            "sieve horizon {horizon} must be at least 2"
        )));
    }
    if horizon > u32::MAX as usize {
        return Err(Error::param("sieve horizon exceeds u32 range"));
    }
    let mut lpf = vec![0u32; horizon + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=horizon {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u32);
        }
        let li = lpf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > li || m > horizon {
                break;
            }
            lpf[m] = p;
        }
    }
    Ok(LpfTable { lpf })
}

pub fn cache_path(dir: &Path, horizon: usize) -> PathBuf {
    dir.join(format!("lpf-{horizon}.bin"))
}

/// Loads the table for `horizon` from `dir` if present, otherwise sieves and
/// writes it there.
pub fn lpf_sieve_cached(horizon: usize, dir: Option<&Path>) -> Result<LpfTable> {
    let Some(dir) = dir else {
        return lpf_sieve(horizon);
    };
    let path = cache_path(dir, horizon);
    if path.exists() {
        return read_cache(&path, horizon);
    }
    let table = lpf_sieve(horizon)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_cache(&path, &table)?;
    Ok(table)
}

fn write_cache(path: &Path, table: &LpfTable) -> Result<()> {
    let mut bytes = Vec::with_capacity(12 + 4 * table.lpf.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(table.horizon() as u64).to_le_bytes());
    for v in &table.lpf {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    // write then rename so a concurrent reader never sees a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_cache(path: &Path, horizon: usize) -> Result<LpfTable> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let corrupt = || Error::CorruptCache {
        path: path.to_path_buf(),
    };
    if bytes.len() != 12 + 4 * (horizon + 1) || &bytes[..4] != MAGIC {
        return Err(corrupt());
    }
    let stored = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    if stored != horizon as u64 {
        return Err(corrupt());
    }
    let lpf = bytes[12..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(LpfTable { lpf })
}
