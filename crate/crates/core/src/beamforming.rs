//! Transmit and receive beamformers for sensing one cell.
//!
//! The transmitter steers its full power at the cell center. The receiver
//! runs a diagonally loaded MVDR against the ground echo of the rest of the
//! area. That interference covariance is rank one (`a a^H` with
//! `a = H_pbar w_tx`), so `R^{-1} g` has a closed form and no matrix is ever
//! inverted.

use serde::{Deserialize, Serialize};

use crate::channel::{ClutterField, GroundNodes, InterferenceMode, Scene};
use crate::exec::{try_map_indexed, Exec};
use crate::geometry::{steering_vector, ArraySpec, CellAssignment, Direction};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Diagonal loading rule for the receive covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum DiagonalLoading {
    /// `kappa = scale * trace(a a^H) / N`, or [`LOADING_FLOOR`] when the trace vanishes.
    TraceRelative(f64),
    Fixed(f64),
}

impl Default for DiagonalLoading {
    fn default() -> Self {
        DiagonalLoading::TraceRelative(1e-6)
    }
}

/// Loading used when there is no interference at all.
pub const LOADING_FLOOR: f64 = 1e-12;

impl DiagonalLoading {
    pub fn kappa(&self, interference: &CVector) -> f64 {
        match *self {
            DiagonalLoading::Fixed(k) => k,
            DiagonalLoading::TraceRelative(scale) => {
                let k = scale * interference.norm_squared() / interference.len() as f64;
                if k.is_normal() {
                    k
                } else {
                    LOADING_FLOOR
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamformerConfig {
    /// Transmit power, watts.
    pub tx_power: f64,
    pub loading: DiagonalLoading,
    pub mode: InterferenceMode,
    /// Quadrature nodes per cell side for [`InterferenceMode::Exact`].
    pub quadrature: usize,
}

impl Default for BeamformerConfig {
    fn default() -> Self {
        Self {
            tx_power: 1.0,
            loading: DiagonalLoading::default(),
            mode: InterferenceMode::Simplified,
            quadrature: 4,
        }
    }
}

/// `sqrt(P_T / N) g_tx`: meets the power budget with equality and gives
/// `w^H g = sqrt(N P_T)` toward the cell.
pub fn tx_beamformer(array: &ArraySpec, dir: &Direction, tx_power: f64) -> CVector {
    let g = steering_vector(array, dir);
    g * Complex64::new((tx_power / array.elements() as f64).sqrt(), 0.0)
}

/// MVDR weights for `R = a a^H + kappa I` and look direction `g`.
pub fn mvdr_rank_one(interference: &CVector, steer: &CVector, kappa: f64) -> Result<CVector> {
    if !(kappa > 0.0) || interference.len() != steer.len() {
        return Err(Error::InvalidParameter(format!(
            "MVDR needs kappa > 0 and matching lengths (kappa = {kappa})"
        )));
    }
    // Sherman-Morrison: kappa R^{-1} g = g - a (a^H g) / (kappa + a^H a)
    let ag = interference.dotc(steer);
    let scale = ag / (kappa + interference.norm_squared());
    let y = steer - interference * scale;
    let denom = steer.dotc(&y);
    assert!(
        denom.norm() > 0.0 && denom.re.is_finite(),
        "singular MVDR system with kappa = {kappa}"
    );
    Ok(y / denom)
}

/// MVDR receive weights from an explicit interference matrix `H_pbar`.
pub fn rx_beamformer(
    interference: &CMatrix,
    w_tx: &CVector,
    steer: &CVector,
    loading: DiagonalLoading,
) -> Result<CVector> {
    let a = interference * w_tx;
    mvdr_rank_one(&a, steer, loading.kappa(&a))
}

/// Objective of problem P: residual interference power `|w_rx^H a|^2`.
pub fn interference_power(w_rx: &CVector, interference: &CVector) -> f64 {
    w_rx.dotc(interference).norm_sqr()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerPair {
    pub tx: usize,
    pub rx: usize,
    pub cell: usize,
    pub w_tx: CVector,
    pub w_rx: CVector,
    /// `w_tx^H g_tx`, equal to `sqrt(N P_T)`.
    pub chi_tx: Complex64,
    /// `w_rx^H g_rx`, equal to 1.
    pub chi_rx: Complex64,
}

/// Interference responses `a = H_pbar w_tx` for every sensed `(cell, receiver)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSet {
    pub uav_count: usize,
    pub cell_count: usize,
    pub full_duplex: bool,
    pub mode: InterferenceMode,
    /// Indexed `cell * uav_count + rx`; `None` where the pair is not sensed.
    pub responses: Vec<Option<CVector>>,
}

/// Receivers of a cell illuminated by `tx`.
pub fn receivers(uav_count: usize, tx: usize, full_duplex: bool) -> impl Iterator<Item = usize> {
    (0..uav_count).filter(move |&u| u != tx || full_duplex)
}

impl InterferenceSet {
    pub fn compute(
        scene: &Scene,
        assignment: &CellAssignment,
        cfg: &BeamformerConfig,
        full_duplex: bool,
        exec: Exec,
    ) -> Result<Self> {
        let grid = &scene.grid;
        let uav_count = scene.uavs.len();
        if assignment.owner.len() != grid.len() || assignment.uav_count() != uav_count {
            return Err(Error::ShapeMismatch(
                "assignment does not match scene grid/UAVs".into(),
            ));
        }
        let centers = ClutterField::new(scene, GroundNodes::centers(grid));
        let area = match cfg.mode {
            InterferenceMode::Exact => {
                Some(ClutterField::new(scene, GroundNodes::area(grid, cfg.quadrature)))
            }
            InterferenceMode::Simplified => None,
        };
        let per_cell = try_map_indexed(exec, grid.len(), |p| -> Result<Vec<Option<CVector>>> {
            let tx = assignment.owner[p];
            let w_tx = centers.steering(tx, p)
                * Complex64::new((cfg.tx_power / scene.array.elements() as f64).sqrt(), 0.0);
            let own = match &area {
                Some(_) => Some(ClutterField::new(
                    scene,
                    GroundNodes::cell(grid, p, cfg.quadrature)?,
                )),
                None => None,
            };
            let mut row = vec![None; uav_count];
            for rx in receivers(uav_count, tx, full_duplex) {
                let a = match (&area, &own) {
                    (Some(area), Some(own)) => {
                        area.apply(tx, rx, 0, &w_tx, None) - own.apply(tx, rx, 0, &w_tx, None)
                    }
                    _ => centers.apply(tx, rx, 0, &w_tx, Some(p)),
                };
                row[rx] = Some(a);
            }
            Ok(row)
        })?;
        Ok(Self {
            uav_count,
            cell_count: grid.len(),
            full_duplex,
            mode: cfg.mode,
            responses: per_cell.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, rx: usize, cell: usize) -> Option<&CVector> {
        self.responses
            .get(cell * self.uav_count + rx)
            .and_then(|a| a.as_ref())
    }
}

/// Beamformer pairs for every sensed `(tx, rx, cell)` triple of a deployment.
#[derive(Debug, Clone)]
pub struct BeamformerTable {
    uav_count: usize,
    cell_count: usize,
    full_duplex: bool,
    owner: Vec<usize>,
    pairs: Vec<Option<BeamformerPair>>,
}

impl BeamformerTable {
    pub fn build(
        scene: &Scene,
        assignment: &CellAssignment,
        cfg: &BeamformerConfig,
        full_duplex: bool,
        exec: Exec,
    ) -> Result<Self> {
        let set = InterferenceSet::compute(scene, assignment, cfg, full_duplex, exec)?;
        Self::from_interference(scene, assignment, &set, cfg)
    }

    pub fn from_interference(
        scene: &Scene,
        assignment: &CellAssignment,
        set: &InterferenceSet,
        cfg: &BeamformerConfig,
    ) -> Result<Self> {
        let uav_count = scene.uavs.len();
        if set.uav_count != uav_count || set.cell_count != scene.grid.len() {
            return Err(Error::ShapeMismatch("interference set does not match scene".into()));
        }
        let mut pairs = vec![None; set.responses.len()];
        for cell in &scene.grid.cells {
            let p = cell.index;
            let tx = assignment.owner[p];
            let tx_pose = scene.uav(tx)?;
            let w_tx = tx_beamformer(
                &scene.array,
                &Direction::towards(&tx_pose.position, &cell.center),
                cfg.tx_power,
            );
            let g_tx = scene.steering(tx, &cell.center)?;
            let chi_tx = w_tx.dotc(&g_tx);
            for rx in receivers(uav_count, tx, set.full_duplex) {
                let a = set.get(rx, p).ok_or(Error::MissingBeamformer { tx, rx, cell: p })?;
                let g_rx = scene.steering(rx, &cell.center)?;
                let w_rx = mvdr_rank_one(a, &g_rx, cfg.loading.kappa(a))?;
                let chi_rx = w_rx.dotc(&g_rx);
                pairs[p * uav_count + rx] = Some(BeamformerPair {
                    tx,
                    rx,
                    cell: p,
                    w_tx: w_tx.clone(),
                    w_rx,
                    chi_tx,
                    chi_rx,
                });
            }
        }
        Ok(Self {
            uav_count,
            cell_count: scene.grid.len(),
            full_duplex: set.full_duplex,
            owner: assignment.owner.clone(),
            pairs,
        })
    }

    pub fn get(&self, tx: usize, rx: usize, cell: usize) -> Result<&BeamformerPair> {
        let missing = Error::MissingBeamformer { tx, rx, cell };
        if cell >= self.cell_count || rx >= self.uav_count || self.owner[cell] != tx {
            return Err(missing);
        }
        self.pairs[cell * self.uav_count + rx].as_ref().ok_or(missing)
    }

    pub fn full_duplex(&self) -> bool {
        self.full_duplex
    }

    pub fn pairs(&self) -> impl Iterator<Item = &BeamformerPair> {
        self.pairs.iter().flatten()
    }
}
