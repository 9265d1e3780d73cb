//! Binary trajectory cache keyed by a hash of the simulation config.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::{evolve_exact, SimConfig, Trajectory};
use crate::error::{FloquetError, Result};

const MAGIC: &[u8; 8] = b"FQTRAJ01";

#[derive(Clone, Debug)]
pub struct TrajectoryCache {
    dir: PathBuf,
}

impl TrajectoryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex SHA-256 of the config fingerprint.
    pub fn key(config: &SimConfig) -> String {
        let digest = Sha256::digest(config.fingerprint().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn path(&self, config: &SimConfig) -> PathBuf {
        self.dir.join(format!("{}.traj", Self::key(config)))
    }

    pub fn load(&self, config: &SimConfig) -> Result<Option<Trajectory>> {
        let path = self.path(config);
        if !path.exists() {
            return Ok(None);
        }
        let mut bytes = Vec::new();
        fs::File::open(&path)?.read_to_end(&mut bytes)?;
        decode(&bytes).map(Some)
    }

    /// Writes atomically through a temporary file in the cache directory.
    pub fn store(&self, config: &SimConfig, traj: &Trajectory) -> Result<PathBuf> {
        let path = self.path(config);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&encode(traj))?;
        tmp.persist(&path).map_err(|e| FloquetError::Io(e.error))?;
        Ok(path)
    }

    pub fn get_or_compute(&self, config: &SimConfig) -> Result<Trajectory> {
        if let Some(t) = self.load(config)? {
            return Ok(t);
        }
        let traj = evolve_exact(config)?;
        self.store(config, &traj)?;
        Ok(traj)
    }
}

fn encode(traj: &Trajectory) -> Vec<u8> {
    let dim = 1usize << traj.n_sites;
    let mut out = Vec::with_capacity(32 + traj.len() * (8 + 32 * dim));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(traj.n_sites as u32).to_le_bytes());
    out.extend_from_slice(&(traj.len() as u64).to_le_bytes());
    out.extend_from_slice(&traj.period.to_le_bytes());
    for i in 0..traj.len() {
        out.extend_from_slice(&traj.times[i].to_le_bytes());
        for v in [&traj.states[i], &traj.gauge_states[i]] {
            for z in v.iter() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| FloquetError::Parse("truncated trajectory cache file".into()))?;
        self.pos = end;
        Ok(slice)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("eight bytes"),
        ))
    }

    fn vector(&mut self, dim: usize) -> Result<DVector<Complex64>> {
        let mut v = DVector::zeros(dim);
        for z in v.iter_mut() {
            *z = Complex64::new(self.f64()?, self.f64()?);
        }
        Ok(v)
    }
}

fn decode(bytes: &[u8]) -> Result<Trajectory> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(FloquetError::Parse("not a trajectory cache file".into()));
    }
    let n_sites = u32::from_le_bytes(r.take(4)?.try_into().expect("four bytes")) as usize;
    if n_sites > super::MAX_SIM_SITES {
        return Err(FloquetError::Parse(
            "corrupt trajectory cache header".into(),
        ));
    }
    let len = u64::from_le_bytes(r.take(8)?.try_into().expect("eight bytes")) as usize;
    let period = r.f64()?;
    let dim = 1usize << n_sites;
    let mut traj = Trajectory {
        n_sites,
        period,
        times: Vec::new(),
        states: Vec::new(),
        gauge_states: Vec::new(),
    };
    for _ in 0..len {
        traj.times.push(r.f64()?);
        traj.states.push(r.vector(dim)?);
        traj.gauge_states.push(r.vector(dim)?);
    }
    Ok(traj)
}
