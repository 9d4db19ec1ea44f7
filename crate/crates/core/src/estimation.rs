//! Sufficient statistics, maximum-likelihood RCS estimates and the three
//! fusion schemes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beamforming::receivers;
use crate::channel::Scene;
use crate::geometry::{CellAssignment, GridSpec};
use crate::protocol::StatisticStore;
use crate::signal::SymbolBlock;
use crate::{Complex64, Error, Result, Vec3};

/// Phase compensation of one `(receiver, cell)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReference {
    /// `e^{-j 2 pi f_D T_o l}`, one entry per OFDM symbol.
    pub doppler: Vec<Complex64>,
    /// `e^{+j 2 pi tau df k}`, one entry per subcarrier.
    pub delay: Vec<Complex64>,
    pub d_tx: f64,
    pub d_rx: f64,
}

impl PhaseReference {
    /// Reference for the center of `cell` illuminated by `tx` and heard by `rx`.
    pub fn new(scene: &Scene, tx: usize, cell: usize, rx: usize) -> Result<Self> {
        let center = scene.grid.cell(cell)?.center;
        let f_d = scene.target.doppler;
        let path = scene.path(tx, &center, rx, f_d)?;
        let wave = &scene.waveform;
        Ok(Self {
            doppler: wave.doppler_phases(f_d).iter().map(|z| z.conj()).collect(),
            delay: wave.delay_phases(path.delay).iter().map(|z| z.conj()).collect(),
            d_tx: path.d_tx,
            d_rx: path.d_rx,
        })
    }
}

/// Phase references for every sensed `(receiver, cell)` pair.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    uav_count: usize,
    refs: Vec<Option<PhaseReference>>,
}

impl PhaseTable {
    pub fn build(scene: &Scene, assignment: &CellAssignment, full_duplex: bool) -> Result<Self> {
        let uav_count = scene.uavs.len();
        let mut refs = vec![None; uav_count * scene.grid.len()];
        for p in 0..scene.grid.len() {
            let tx = assignment.owner[p];
            for rx in receivers(uav_count, tx, full_duplex) {
                refs[p * uav_count + rx] = Some(PhaseReference::new(scene, tx, p, rx)?);
            }
        }
        Ok(Self { uav_count, refs })
    }

    pub fn get(&self, rx: usize, cell: usize) -> Option<&PhaseReference> {
        self.refs
            .get(cell * self.uav_count + rx)
            .and_then(|r| r.as_ref())
    }
}

/// `delta = sum_l sum_k c_bar[l][k] e^{-j 2 pi f_D T_o l} e^{j 2 pi tau df k}`.
pub fn local_statistic(block: &SymbolBlock, phase: &PhaseReference) -> Result<Complex64> {
    if block.symbols != phase.doppler.len() || block.subcarriers != phase.delay.len() {
        return Err(Error::ShapeMismatch(format!(
            "block is {}x{}, phase reference is {}x{}",
            block.symbols,
            block.subcarriers,
            phase.doppler.len(),
            phase.delay.len()
        )));
    }
    Ok(block
        .rows()
        .zip(&phase.doppler)
        .map(|(row, vf)| {
            let inner: Complex64 = row.iter().zip(&phase.delay).map(|(c, vt)| c * vt).sum();
            inner * vf
        })
        .sum())
}

/// Constants shared by the single-receiver and central estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcsScale {
    /// `(4 pi)^3 / (N P_T lambda^2 (M_s N_c)^2)`.
    base: f64,
    alpha: f64,
}

impl RcsScale {
    pub fn new(scene: &Scene, tx_power: f64) -> Result<Self> {
        if tx_power <= 0.0 || !tx_power.is_finite() {
            return Err(Error::InvalidParameter(format!("transmit power {tx_power} W")));
        }
        let lambda = scene.wavelength();
        let mn = scene.waveform.len() as f64;
        let n = scene.array.elements() as f64;
        Ok(Self {
            base: (4.0 * PI).powi(3) / (n * tx_power * lambda * lambda * mn * mn),
            alpha: scene.pathloss_exponent,
        })
    }

    /// Single receiver: `base d_tx^a d_rx^a |delta|^2`.
    pub fn local(&self, delta: Complex64, d_tx: f64, d_rx: f64) -> f64 {
        self.base * d_tx.powf(self.alpha) * d_rx.powf(self.alpha) * delta.norm_sqr()
    }

    /// Receivers combined: `base d_tx^a (sum d^-a)^-2 |sum d^{-a/2} delta|^2`.
    pub fn central(&self, stats: &[(Complex64, f64)], d_tx: f64) -> Result<f64> {
        if stats.is_empty() {
            return Err(Error::Estimation("no receiver statistics for the cell".into()));
        }
        let a = self.alpha;
        let norm: f64 = stats.iter().map(|(_, d)| d.powf(-a)).sum();
        let coherent: Complex64 = stats.iter().map(|(s, d)| s * d.powf(-0.5 * a)).sum();
        Ok(self.base * d_tx.powf(a) * coherent.norm_sqr() / (norm * norm))
    }
}

/// Central estimate from `(delta, d_rx)` pairs of every receiver of one cell.
pub fn central_mle_rcs(
    stats: &[(Complex64, f64)],
    d_tx: f64,
    scene: &Scene,
    tx_power: f64,
) -> Result<f64> {
    RcsScale::new(scene, tx_power)?.central(stats, d_tx)
}

/// Single-receiver estimate from a data-free, clutter-subtracted block.
pub fn local_mle_rcs(
    block: &SymbolBlock,
    phase: &PhaseReference,
    scene: &Scene,
    tx_power: f64,
) -> Result<f64> {
    let delta = local_statistic(block, phase)?;
    Ok(RcsScale::new(scene, tx_power)?.local(delta, phase.d_tx, phase.d_rx))
}

/// Central estimate computed directly from received (not data-free) blocks,
/// weighting each sample by the conjugate transmitted symbol and normalizing
/// by the frame energy. Matches [`central_mle_rcs`] for unit-modulus symbols.
pub fn central_mle_rcs_weighted(
    received: &[(&SymbolBlock, &PhaseReference)],
    frame: &SymbolBlock,
    scene: &Scene,
    tx_power: f64,
) -> Result<f64> {
    let (first, _) = received
        .first()
        .ok_or_else(|| Error::Estimation("no receiver blocks".into()))?;
    first.check_shape(frame)?;
    let energy: f64 = frame.values.iter().map(|c| c.norm_sqr()).sum();
    let mn = frame.values.len() as f64;
    let mut stats = Vec::with_capacity(received.len());
    let d_tx = received[0].1.d_tx;
    for (block, phase) in received {
        block.check_shape(frame)?;
        let weighted = SymbolBlock {
            values: block
                .values
                .iter()
                .zip(&frame.values)
                .map(|(r, c)| r * c.conj())
                .collect(),
            ..(*block).clone()
        };
        // rescale so the frame-energy normalizer replaces (M_s N_c)
        let delta = local_statistic(&weighted, phase)? * (mn / energy);
        stats.push((delta, phase.d_rx));
    }
    RcsScale::new(scene, tx_power)?.central(&stats, d_tx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "uav")]
pub enum Provenance {
    Local(usize),
    Mure,
    Mimore,
    Benchmark,
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::Local(u) => format!("local-{u}"),
            Provenance::Mure => "mure".into(),
            Provenance::Mimore => "mimore".into(),
            Provenance::Benchmark => "benchmark".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mure" => Some(Provenance::Mure),
            "mimore" => Some(Provenance::Mimore),
            "benchmark" => Some(Provenance::Benchmark),
            _ => s.strip_prefix("local-")?.parse().ok().map(Provenance::Local),
        }
    }
}

/// Nonnegative per-cell RCS estimates; unobserved cells hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RcsMap {
    pub values: Vec<f64>,
    pub observed: Vec<bool>,
    pub provenance: Provenance,
}

impl RcsMap {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }
}

/// Local map of receiver `rx`: every stored statistic through the
/// single-receiver estimator, zero on cells it never heard.
pub fn build_local_map(
    stats: &StatisticStore,
    rx: usize,
    phases: &PhaseTable,
    scale: &RcsScale,
) -> Result<RcsMap> {
    let mut values = vec![0.0; stats.cell_count];
    let mut observed = vec![false; stats.cell_count];
    for p in 0..stats.cell_count {
        if let Some(delta) = stats.get(rx, p) {
            let phase = phases
                .get(rx, p)
                .ok_or_else(|| Error::Estimation(format!("no phase reference for rx {rx}, cell {p}")))?;
            values[p] = scale.local(delta, phase.d_tx, phase.d_rx);
            observed[p] = true;
        }
    }
    Ok(RcsMap {
        values,
        observed,
        provenance: Provenance::Local(rx),
    })
}

/// Cellwise mean of the local maps.
pub fn fuse_mure(maps: &[RcsMap]) -> Result<RcsMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::Estimation("no local maps to fuse".into()))?;
    if maps.iter().any(|m| m.len() != first.len()) {
        return Err(Error::ShapeMismatch("local maps cover different grids".into()));
    }
    let u = maps.len() as f64;
    let values = (0..first.len())
        .map(|p| maps.iter().map(|m| m.values[p]).sum::<f64>() / u)
        .collect();
    let observed = (0..first.len())
        .map(|p| maps.iter().any(|m| m.observed[p]))
        .collect();
    Ok(RcsMap {
        values,
        observed,
        provenance: Provenance::Mure,
    })
}

/// Central estimate of every cell from all receivers that heard it.
pub fn fuse_mimore(
    stats: &StatisticStore,
    phases: &PhaseTable,
    scale: &RcsScale,
    assignment: &CellAssignment,
) -> Result<RcsMap> {
    if stats.uav_count < 2 {
        return Err(Error::Estimation(
            "central fusion needs at least two UAVs; use the benchmark".into(),
        ));
    }
    let mut values = vec![0.0; stats.cell_count];
    let mut buf = Vec::with_capacity(stats.uav_count);
    for (p, value) in values.iter_mut().enumerate() {
        buf.clear();
        let mut d_tx = None;
        for rx in 0..stats.uav_count {
            if rx == assignment.owner[p] {
                continue;
            }
            if let (Some(delta), Some(phase)) = (stats.get(rx, p), phases.get(rx, p)) {
                d_tx = Some(phase.d_tx);
                buf.push((delta, phase.d_rx));
            }
        }
        let d_tx = d_tx.ok_or_else(|| Error::Estimation(format!("cell {p} was never heard")))?;
        *value = scale.central(&buf, d_tx)?;
    }
    Ok(RcsMap {
        observed: vec![true; values.len()],
        values,
        provenance: Provenance::Mimore,
    })
}

/// Componentwise mean of local position estimates.
pub fn fuse_mupe(positions: &[Vec3]) -> Result<Vec3> {
    if positions.is_empty() {
        return Err(Error::Estimation("no local positions to fuse".into()));
    }
    let sum: Vec3 = positions.iter().sum();
    let mut mean = sum / positions.len() as f64;
    mean.z = 0.0;
    Ok(mean)
}

/// Monostatic map of a single full-duplex UAV.
pub fn benchmark_map(stats: &StatisticStore, phases: &PhaseTable, scale: &RcsScale) -> Result<RcsMap> {
    if stats.uav_count != 1 {
        return Err(Error::Estimation(format!(
            "benchmark expects one UAV, got {}",
            stats.uav_count
        )));
    }
    let mut map = build_local_map(stats, 0, phases, scale)?;
    if map.observed.iter().any(|o| !o) {
        return Err(Error::Estimation("benchmark map does not cover the grid".into()));
    }
    map.provenance = Provenance::Benchmark;
    Ok(map)
}

/// Value at the target cell over the largest value among cells whose
/// centers are at least two cell sizes away (Chebyshev). Infinite when all
/// distant cells are zero.
pub fn ridge_ratio(map: &RcsMap, grid: &GridSpec, target: &Vec3) -> f64 {
    let t = grid.nearest_cell(target);
    let tc = grid.cells[t].center;
    let reach = 2.0 * grid.cell_size - 1e-9;
    let far = grid
        .cells
        .iter()
        .filter(|c| (c.center.x - tc.x).abs().max((c.center.y - tc.y).abs()) >= reach)
        .map(|c| map.values[c.index])
        .fold(0.0_f64, f64::max);
    let at = map.values[t];
    if far > 0.0 {
        at / far
    } else if at > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
