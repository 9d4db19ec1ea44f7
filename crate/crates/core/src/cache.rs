//! On-disk cache of interference responses.
//!
//! Files hold a SHA-256 key of everything the responses depend on; a file
//! whose key differs from the requested one is ignored and overwritten.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::beamforming::{BeamformerConfig, InterferenceSet};
use crate::channel::Scene;
use crate::exec::Exec;
use crate::geometry::CellAssignment;
use crate::{CVector, Complex64, Error, Result};

const MAGIC: &[u8; 8] = b"UAVSIFS1";

/// Hex digest of the scene, assignment and interference settings.
pub fn scene_key(
    scene: &Scene,
    assignment: &CellAssignment,
    cfg: &BeamformerConfig,
    full_duplex: bool,
) -> String {
    let mut h = Sha256::new();
    // Debug output of f64 is exact, so this is a faithful fingerprint
    h.update(format!("{:?}", scene.grid).as_bytes());
    h.update(format!("{:?}", scene.uavs).as_bytes());
    h.update(format!("{:?}", scene.array).as_bytes());
    h.update(format!("{:?}", scene.waveform).as_bytes());
    h.update(
        format!(
            "{:?}|{:?}|{:?}|{:?}",
            scene.ground_rcs, scene.pathloss_exponent, scene.carrier_hz, scene.light_speed
        )
        .as_bytes(),
    );
    h.update(format!("{:?}", assignment.owner).as_bytes());
    h.update(format!("{:?}|{:?}|{:?}|{full_duplex}", cfg.tx_power, cfg.mode, cfg.quadrature).as_bytes());
    hex::encode(h.finalize())
}

fn encode(key: &str, set: &InterferenceSet) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(key.as_bytes());
    for n in [set.uav_count as u64, set.cell_count as u64] {
        out.extend_from_slice(&n.to_le_bytes());
    }
    out.push(u8::from(set.full_duplex));
    out.push(match set.mode {
        crate::channel::InterferenceMode::Exact => 0,
        crate::channel::InterferenceMode::Simplified => 1,
    });
    for r in &set.responses {
        match r {
            None => out.push(0),
            Some(v) => {
                out.push(1);
                out.extend_from_slice(&(v.len() as u64).to_le_bytes());
                for z in v.iter() {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
    }
    out
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        if self.0.len() < n {
            return None;
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Some(head)
    }
    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }
    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }
    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}

fn decode(key: &str, bytes: &[u8]) -> Option<InterferenceSet> {
    let mut c = Cursor(bytes);
    if c.take(8)? != MAGIC || c.take(key.len())? != key.as_bytes() {
        return None;
    }
    let uav_count = c.u64()? as usize;
    let cell_count = c.u64()? as usize;
    let full_duplex = c.u8()? != 0;
    let mode = match c.u8()? {
        0 => crate::channel::InterferenceMode::Exact,
        1 => crate::channel::InterferenceMode::Simplified,
        _ => return None,
    };
    let mut responses = Vec::with_capacity(uav_count * cell_count);
    for _ in 0..uav_count * cell_count {
        responses.push(match c.u8()? {
            0 => None,
            _ => {
                let n = c.u64()? as usize;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(Complex64::new(c.f64()?, c.f64()?));
                }
                Some(CVector::from_vec(v))
            }
        });
    }
    c.0.is_empty().then_some(InterferenceSet {
        uav_count,
        cell_count,
        full_duplex,
        mode,
        responses,
    })
}

/// Loads the set for this key from `path` when present, otherwise computes
/// and stores it. Returns the set and whether it came from disk.
pub fn load_or_compute(
    path: &Path,
    scene: &Scene,
    assignment: &CellAssignment,
    cfg: &BeamformerConfig,
    full_duplex: bool,
    exec: Exec,
) -> Result<(InterferenceSet, bool)> {
    let key = scene_key(scene, assignment, cfg, full_duplex);
    if let Ok(mut f) = std::fs::File::open(path) {
        let mut bytes = Vec::new();
        if f.read_to_end(&mut bytes).is_ok() {
            if let Some(set) = decode(&key, &bytes) {
                return Ok((set, true));
            }
        }
    }
    let set = InterferenceSet::compute(scene, assignment, cfg, full_duplex, exec)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(&key, &set)).map_err(|e| Error::io(path, e))?;
    Ok((set, false))
}
