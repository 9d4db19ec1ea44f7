//! Self-checks against closed-form oracles. Each check returns the measured
//! worst case; [`run_all`] compares them with fixed tolerances.

use rand::Rng;
use serde::Serialize;

use crate::beamforming::{interference_power, mvdr_rank_one, tx_beamformer, DiagonalLoading};
use crate::channel::{
    cell_clutter_matrix, interference_matrix, total_clutter_matrix, InterferenceMode,
    QuadratureConfig,
};
use crate::exec::Exec;
use crate::experiments::config::SimConfig;
use crate::experiments::trial::{build_scene, Deployment};
use crate::estimation::{benchmark_map, build_local_map, fuse_mimore};
use crate::geometry::{
    assign_cells, build_grid, place_uavs, place_uavs_in_row, Direction, GridKind,
};
use crate::localization::{on_grid, position_error};
use crate::overhead::{compute_overhead, Method, OverheadConfig};
use crate::rng::{domain, StreamKey};
use crate::signal::dbm_to_watts;
use crate::{CVector, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamformerCheck {
    pub draws: usize,
    /// `max |w_rx^H g_rx - 1|`.
    pub distortionless: f64,
    /// `max |‖w_tx‖² - P_T| / P_T`.
    pub tx_power: f64,
    /// `max |w_tx^H g_tx - sqrt(N P_T)| / sqrt(N P_T)`.
    pub tx_gain: f64,
    /// Draws where MVDR leaves more interference than the matched filter.
    pub mvdr_worse: usize,
}

/// Random scenes, cells and transmitter/receiver pairs.
pub fn beamformer_draws(draws: usize, seed: u64) -> Result<BeamformerCheck> {
    let mut out = BeamformerCheck {
        draws,
        distortionless: 0.0,
        tx_power: 0.0,
        tx_gain: 0.0,
        mvdr_worse: 0,
    };
    let quad = QuadratureConfig::new(2)?;
    for i in 0..draws {
        let mut rng = StreamKey::root(seed).child(domain::DRAW).child(i as u64).rng();
        let mut cfg = SimConfig::default();
        cfg.scene.divisions = rng.random_range(2..=6);
        cfg.scene.uavs = [4, 9][rng.random_range(0..2)];
        cfg.scene.elements = [4, 9, 16, 64][rng.random_range(0..4)];
        cfg.scene.altitude = rng.random_range(30.0..200.0);
        cfg.scene.ground_rcs = rng.random_range(1.0..100.0);
        cfg.radio.tx_power_dbm = rng.random_range(0.0..40.0);
        let kind = if rng.random::<bool>() { GridKind::Mixed } else { GridKind::Base };
        let mode = if rng.random::<bool>() {
            InterferenceMode::Exact
        } else {
            InterferenceMode::Simplified
        };
        let uavs = place_uavs(cfg.scene.uavs, cfg.scene.side_length, cfg.scene.altitude)?;
        let scene = build_scene(&cfg, kind, uavs)?;
        let asg = assign_cells(&scene.grid, &scene.uavs)?;
        let p = rng.random_range(0..scene.grid.len());
        let tx = asg.owner[p];
        let rx = (tx + rng.random_range(1..scene.uavs.len())) % scene.uavs.len();
        let center = scene.grid.cells[p].center;
        let p_t = dbm_to_watts(cfg.radio.tx_power_dbm);
        let n = scene.array.elements() as f64;

        let w_tx = tx_beamformer(
            &scene.array,
            &Direction::towards(&scene.uavs[tx].position, &center),
            p_t,
        );
        let g_tx = scene.steering(tx, &center)?;
        let g_rx = scene.steering(rx, &center)?;
        let h = interference_matrix(&scene, tx, rx, p, 0, mode, &quad)?.value;
        let a = &h * &w_tx;
        let w_rx = mvdr_rank_one(&a, &g_rx, DiagonalLoading::default().kappa(&a))?;
        let w_mf: CVector = &g_rx / Complex64::new(g_rx.norm_squared(), 0.0);

        let gain = (n * p_t).sqrt();
        out.distortionless = out
            .distortionless
            .max((w_rx.dotc(&g_rx) - Complex64::new(1.0, 0.0)).norm());
        out.tx_power = out.tx_power.max((w_tx.norm_squared() - p_t).abs() / p_t);
        out.tx_gain = out
            .tx_gain
            .max((w_tx.dotc(&g_tx) - Complex64::new(gain, 0.0)).norm() / gain);
        if interference_power(&w_rx, &a) > interference_power(&w_mf, &a) {
            out.mvdr_worse += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleCase {
    pub uavs: usize,
    pub map: String,
    pub estimate: f64,
    pub relative_error: f64,
    /// Planar on-grid position error, m.
    pub on_grid_error: f64,
}

/// Noiseless, clutter-free scenes with the target on a cell center:
/// every estimator must return the injected RCS at the target cell and
/// the on-grid localizer must land on it.
pub fn noiseless_mle(uav_counts: &[usize]) -> Result<Vec<MleCase>> {
    let mut cfg = SimConfig::preset(crate::experiments::config::Preset::Desk);
    cfg.scene.divisions = 6;
    cfg.scene.ground_rcs = 0.0;
    cfg.radio.noiseless = true;
    let sigma = cfg.scene.target_rcs;
    let kind = GridKind::Mixed;
    let grid = build_grid(cfg.scene.side_length, cfg.scene.divisions, kind)?;
    let mut cases = Vec::new();
    let rel = |x: f64| (x - sigma).abs() / sigma;
    // a few target cells spread over the grid, both layers
    let targets = [7usize, 14, 21, 28, grid.base_len() + 12];
    for &u in uav_counts {
        let uavs = place_uavs(u, cfg.scene.side_length, cfg.scene.altitude)
            .or_else(|_| place_uavs_in_row(u, cfg.scene.side_length, cfg.scene.altitude))?;
        let d = Deployment::new(build_scene(&cfg, kind, uavs)?, false, &cfg, Exec::Parallel)?;
        for &p in &targets {
            let center = grid.cells[p].center;
            let target = crate::channel::Target {
                position: center,
                rcs: sigma,
                doppler: 0.0,
            };
            let stats = d.statistics(target, StreamKey::root(0), Exec::Parallel)?;
            let mimore = fuse_mimore(&stats, &d.phases, &d.scale, &d.assignment)?;
            let pos = on_grid(&mimore, &grid)?.position;
            cases.push(MleCase {
                uavs: u,
                map: "mimore".into(),
                estimate: mimore.values[p],
                relative_error: rel(mimore.values[p]),
                on_grid_error: position_error(&pos, &center),
            });
            for rx in 0..u {
                if d.assignment.owner[p] == rx {
                    continue;
                }
                let local = build_local_map(&stats, rx, &d.phases, &d.scale)?;
                let pos = on_grid(&local, &grid)?.position;
                cases.push(MleCase {
                    uavs: u,
                    map: format!("local-{rx}"),
                    estimate: local.values[p],
                    relative_error: rel(local.values[p]),
                    on_grid_error: position_error(&pos, &center),
                });
            }
        }
    }
    let uavs = place_uavs(1, cfg.scene.side_length, cfg.scene.altitude)?;
    let b = Deployment::new(build_scene(&cfg, kind, uavs)?, true, &cfg, Exec::Parallel)?;
    for &p in &targets {
        let center = grid.cells[p].center;
        let target = crate::channel::Target {
            position: center,
            rcs: sigma,
            doppler: 0.0,
        };
        let stats = b.statistics(target, StreamKey::root(0), Exec::Parallel)?;
        let map = benchmark_map(&stats, &b.phases, &b.scale)?;
        let pos = on_grid(&map, &grid)?.position;
        cases.push(MleCase {
            uavs: 1,
            map: "benchmark".into(),
            estimate: map.values[p],
            relative_error: rel(map.values[p]),
            on_grid_error: position_error(&pos, &center),
        });
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationCheck {
    /// `max_Q ‖sum_p H_p - H‖_F / ‖H‖_F` over `Q` in {1, 4}.
    pub partition_error: f64,
    /// `‖H(16) - H(8)‖_F / ‖H(16)‖_F`.
    pub refinement_change: f64,
}

/// Per-cell ground matrices of an `L = 4` scene against the whole-area matrix.
pub fn clutter_conservation() -> Result<ConservationCheck> {
    let mut cfg = SimConfig::default();
    cfg.scene.divisions = 4;
    cfg.scene.uavs = 4;
    let uavs = place_uavs(4, cfg.scene.side_length, cfg.scene.altitude)?;
    let scene = build_scene(&cfg, GridKind::Base, uavs)?;
    let mut partition_error: f64 = 0.0;
    for (tx, rx, k) in [(0, 1, 0), (2, 3, 17), (1, 1, 63)] {
        for q in [1, 4] {
            let quad = QuadratureConfig::new(q)?;
            let total = total_clutter_matrix(&scene, tx, rx, k, &quad)?.value;
            let mut sum = total.clone() * Complex64::new(0.0, 0.0);
            for c in scene.grid.base_cells() {
                sum += cell_clutter_matrix(&scene, tx, rx, c.index, k, &quad)?.value;
            }
            partition_error = partition_error.max((&sum - &total).norm() / total.norm());
        }
    }
    let h8 = total_clutter_matrix(&scene, 0, 1, 0, &QuadratureConfig::new(8)?)?.value;
    let h16 = total_clutter_matrix(&scene, 0, 1, 0, &QuadratureConfig::new(16)?)?.value;
    Ok(ConservationCheck {
        partition_error,
        refinement_change: (&h16 - &h8).norm() / h16.norm(),
    })
}

/// Mismatches between the bit counts and their closed forms over random
/// configurations.
pub fn overhead_formulas(configs: usize, seed: u64) -> Result<usize> {
    let mut bad = 0;
    for i in 0..configs {
        let mut rng = StreamKey::root(seed).child(domain::DRAW).child(i as u64).rng();
        let c = OverheadConfig {
            cells: rng.random_range(1..2000),
            uavs: rng.random_range(1..65),
            symbols: rng.random_range(1..65),
            subcarriers: rng.random_range(1..1025),
            elements: rng.random_range(1..257),
        };
        let get = |m| compute_overhead(m, c);
        let mure = get(Method::Mure)?;
        let mimore = get(Method::Mimore)?;
        let mupe = get(Method::Mupe)?;
        let cs = get(Method::Cs)?;
        let ok = mure.tx_bits == 32 * c.cells
            && mimore.tx_bits == 64 * c.cells
            && mupe.tx_bits == 64
            && cs.tx_bits == 64 * c.symbols * c.subcarriers * c.elements * c.cells
            && [mure, mimore, mupe, cs].iter().all(|r| r.rx_bits == c.uavs * r.tx_bits)
            && cs.tx_bits == mimore.tx_bits * c.symbols * c.subcarriers * c.elements
            && mimore.tx_bits == 2 * mure.tx_bits;
        bad += usize::from(!ok);
    }
    Ok(bad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Fast oracle suite: beamformer constraints, noiseless estimation,
/// ground conservation and overhead formulas.
pub fn run_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let bf = beamformer_draws(1000, seed)?;
    out.push(CheckOutcome {
        name: "beamformer constraints".into(),
        passed: bf.distortionless < 1e-10
            && bf.tx_power < 1e-12
            && bf.tx_gain < 1e-12
            && bf.mvdr_worse == 0,
        detail: format!(
            "{} draws: |w_rx^H g - 1| <= {:.2e}, power err {:.2e}, gain err {:.2e}, MVDR worse than matched filter in {}",
            bf.draws, bf.distortionless, bf.tx_power, bf.tx_gain, bf.mvdr_worse
        ),
    });
    let mle = noiseless_mle(&[2, 4])?;
    let worst = mle.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    let grid_err = mle.iter().map(|c| c.on_grid_error).fold(0.0, f64::max);
    out.push(CheckOutcome {
        name: "noiseless estimation".into(),
        passed: worst < 1e-6 && grid_err == 0.0,
        detail: format!(
            "{} estimates: worst relative RCS error {worst:.2e}, worst on-grid error {grid_err} m",
            mle.len()
        ),
    });
    let cons = clutter_conservation()?;
    out.push(CheckOutcome {
        name: "ground conservation".into(),
        passed: cons.partition_error < 1e-10 && cons.refinement_change < 0.01,
        detail: format!(
            "partition error {:.2e}, Q 8->16 change {:.2e}",
            cons.partition_error, cons.refinement_change
        ),
    });
    let bad = overhead_formulas(20, seed)?;
    out.push(CheckOutcome {
        name: "overhead formulas".into(),
        passed: bad == 0,
        detail: format!("{bad} of 20 configurations mismatched"),
    });
    Ok(out)
}

/// Error if any check failed, naming the first.
pub fn require_all(outcomes: &[CheckOutcome]) -> Result<()> {
    match outcomes.iter().find(|c| !c.passed) {
        Some(c) => Err(Error::Estimation(format!("check '{}' failed: {}", c.name, c.detail))),
        None => Ok(()),
    }
}
