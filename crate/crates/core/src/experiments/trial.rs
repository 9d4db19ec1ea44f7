//! One Monte Carlo trial: place the target, run the campaigns, estimate and
//! localize with every requested method.

use rand::Rng;

use crate::beamforming::BeamformerTable;
use crate::channel::{Scene, Target};
use crate::estimation::{
    benchmark_map, build_local_map, fuse_mimore, fuse_mupe, fuse_mure, ridge_ratio, PhaseTable,
    RcsMap, RcsScale,
};
use crate::exec::{try_map_indexed, Exec};
use crate::geometry::{
    assign_cells, build_grid, place_uavs, ArraySpec, CellAssignment, GridKind, GridSpec, UavPose,
};
use crate::localization::{off_grid, on_grid, position_error, LocalizerConfig};
use crate::overhead::Method;
use crate::protocol::{build_schedule, collect_statistics, Campaign, Schedule, StatisticStore};
use crate::rng::{domain, StreamKey};
use crate::signal::{ClutterTable, NoiseSpec};
use crate::{Result, Vec3};

use super::config::SimConfig;

/// Scene of a configuration with the given UAVs and a placeholder target.
pub fn build_scene(cfg: &SimConfig, kind: GridKind, uavs: Vec<UavPose>) -> Result<Scene> {
    let s = &cfg.scene;
    let scene = Scene {
        grid: build_grid(s.side_length, s.divisions, kind)?,
        uavs,
        array: ArraySpec::new(s.elements)?,
        waveform: cfg.waveform_spec()?,
        target: Target {
            position: Vec3::new(0.5 * s.side_length, 0.5 * s.side_length, 0.0),
            rcs: s.target_rcs,
            doppler: s.doppler,
        },
        ground_rcs: s.ground_rcs,
        pathloss_exponent: s.pathloss_exponent,
        carrier_hz: s.carrier_hz,
        light_speed: s.light_speed,
    };
    scene.validate()?;
    Ok(scene)
}

/// Everything about a deployment that does not depend on the target.
#[derive(Debug, Clone)]
pub struct Deployment {
    pub scene: Scene,
    pub assignment: CellAssignment,
    pub schedule: Schedule,
    pub beamformers: BeamformerTable,
    pub clutter: ClutterTable,
    pub phases: PhaseTable,
    pub scale: RcsScale,
    pub noise: NoiseSpec,
}

impl Deployment {
    pub fn new(scene: Scene, full_duplex: bool, cfg: &SimConfig, exec: Exec) -> Result<Self> {
        let assignment = assign_cells(&scene.grid, &scene.uavs)?;
        let schedule = build_schedule(&assignment, &scene.grid, full_duplex)?;
        let beamformers = BeamformerTable::build(
            &scene,
            &assignment,
            &cfg.beamformer_config(),
            full_duplex,
            exec,
        )?;
        let clutter = ClutterTable::build(
            &scene,
            &beamformers,
            cfg.clutter.quadrature,
            cfg.clutter.fidelity,
            exec,
        )?;
        let phases = PhaseTable::build(&scene, &assignment, full_duplex)?;
        let scale = RcsScale::new(&scene, cfg.tx_power())?;
        Ok(Self {
            scene,
            assignment,
            schedule,
            beamformers,
            clutter,
            phases,
            scale,
            noise: cfg.noise(),
        })
    }

    /// Runs the campaign against `target` and returns the per-cell statistics.
    pub fn statistics(&self, target: Target, key: StreamKey, exec: Exec) -> Result<StatisticStore> {
        let scene = self.scene.with_target(target);
        let campaign = Campaign {
            scene: &scene,
            schedule: &self.schedule,
            beamformers: &self.beamformers,
            synthesis_clutter: &self.clutter,
            known_clutter: &self.clutter,
            noise: self.noise,
        };
        collect_statistics(&campaign, &self.phases, key, exec)
    }
}

/// Precomputed deployments of one configuration and grid kind.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub cfg: SimConfig,
    pub kind: GridKind,
    pub grid: GridSpec,
    /// Half-duplex network; absent for a single UAV, which hears nothing.
    pub distributed: Option<Deployment>,
    /// Full-duplex single UAV at the area center.
    pub benchmark: Option<Deployment>,
    pub localizers: Vec<LocalizerConfig>,
}

fn kind_index(kind: GridKind) -> u64 {
    match kind {
        GridKind::Base => 0,
        GridKind::Mixed => 1,
    }
}

impl TrialSetup {
    pub fn new(cfg: &SimConfig, kind: GridKind, exec: Exec) -> Result<Self> {
        cfg.validate()?;
        let s = &cfg.scene;
        let wants = |m| cfg.run.methods.contains(&m);
        let distributed = if s.uavs > 1
            && (wants(Method::Mimore) || wants(Method::Mure) || wants(Method::Mupe))
        {
            let uavs = place_uavs(s.uavs, s.side_length, s.altitude)?;
            Some(Deployment::new(build_scene(cfg, kind, uavs)?, false, cfg, exec)?)
        } else {
            None
        };
        let benchmark = if wants(Method::Benchmark) {
            let uavs = place_uavs(1, s.side_length, s.altitude)?;
            Some(Deployment::new(build_scene(cfg, kind, uavs)?, true, cfg, exec)?)
        } else {
            None
        };
        let localizers = cfg
            .localizer
            .thresholds
            .iter()
            .map(|&t| LocalizerConfig::new(t))
            .collect::<Result<_>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            kind,
            grid: build_grid(s.side_length, s.divisions, kind)?,
            distributed,
            benchmark,
            localizers,
        })
    }

    fn master(&self) -> StreamKey {
        StreamKey::root(self.cfg.run.seed)
    }

    /// Target position of `trial`: uniform over the area, identical for every
    /// grid kind and sweep point, snapped to a cell center when pinned.
    pub fn target_position(&self, trial: usize) -> Vec3 {
        let p = sample_target(&self.cfg, trial);
        if self.cfg.run.pin_target {
            self.grid.cells[self.grid.nearest_cell(&p)].center
        } else {
            p
        }
    }

    /// All RCS maps of one trial.
    pub fn maps(&self, trial: usize, exec: Exec) -> Result<TrialMaps> {
        let s = &self.cfg.scene;
        let position = self.target_position(trial);
        let target = Target {
            position,
            rcs: s.target_rcs,
            doppler: s.doppler,
        };
        let wants = |m| self.cfg.run.methods.contains(&m);
        let k = kind_index(self.kind);
        let mut out = TrialMaps {
            target: position,
            locals: Vec::new(),
            mure: None,
            mimore: None,
            benchmark: None,
        };
        if let Some(d) = &self.distributed {
            let key = self.master().child(domain::CAMPAIGN).child(k).child(trial as u64);
            let stats = d.statistics(target, key, exec)?;
            if wants(Method::Mure) || wants(Method::Mupe) {
                out.locals = (0..d.scene.uavs.len())
                    .map(|u| build_local_map(&stats, u, &d.phases, &d.scale))
                    .collect::<Result<_>>()?;
            }
            if wants(Method::Mure) {
                out.mure = Some(fuse_mure(&out.locals)?);
            }
            if wants(Method::Mimore) {
                out.mimore = Some(fuse_mimore(&stats, &d.phases, &d.scale, &d.assignment)?);
            }
        }
        if let Some(b) = &self.benchmark {
            let key = self.master().child(domain::BENCHMARK).child(k).child(trial as u64);
            let stats = b.statistics(target, key, exec)?;
            out.benchmark = Some(benchmark_map(&stats, &b.phases, &b.scale)?);
        }
        Ok(out)
    }

    pub fn run_trial(&self, trial: usize, exec: Exec) -> Result<TrialResult> {
        let maps = self.maps(trial, exec)?;
        let truth = maps.target;
        let mut outcomes = Vec::new();
        for method in &self.cfg.run.methods {
            match method {
                Method::Mimore => {
                    if let Some(m) = &maps.mimore {
                        outcomes.extend(self.map_outcomes(Method::Mimore, m, &truth)?);
                    }
                }
                Method::Mure => {
                    if let Some(m) = &maps.mure {
                        outcomes.extend(self.map_outcomes(Method::Mure, m, &truth)?);
                    }
                }
                Method::Benchmark => {
                    if let Some(m) = &maps.benchmark {
                        outcomes.extend(self.map_outcomes(Method::Benchmark, m, &truth)?);
                    }
                }
                Method::Mupe => {
                    if maps.locals.is_empty() {
                        continue;
                    }
                    for loc in &self.localizers {
                        let local: Vec<Vec3> = maps
                            .locals
                            .iter()
                            .map(|m| off_grid(m, &self.grid, loc).map(|e| e.position))
                            .collect::<Result<_>>()?;
                        let fused = fuse_mupe(&local)?;
                        outcomes.push(Outcome::new(Method::Mupe, loc.threshold, fused, &truth, None, &self.grid));
                    }
                }
                Method::Cs => {}
            }
        }
        let ridge = |m: &Option<RcsMap>| m.as_ref().map(|m| ridge_ratio(m, &self.grid, &truth));
        let best_local = maps
            .locals
            .iter()
            .map(|m| ridge_ratio(m, &self.grid, &truth))
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        Ok(TrialResult {
            trial,
            grid: self.kind,
            target: truth,
            no_target_energy: self.cfg.scene.target_rcs == 0.0,
            outcomes,
            ridge: RidgeRatios {
                mimore: ridge(&maps.mimore),
                mure: ridge(&maps.mure),
                best_local,
                benchmark: ridge(&maps.benchmark),
            },
        })
    }

    /// Off-grid estimates of one map at every threshold.
    fn map_outcomes(&self, method: Method, map: &RcsMap, truth: &Vec3) -> Result<Vec<Outcome>> {
        let argmax = on_grid(map, &self.grid)?.cell;
        self.localizers
            .iter()
            .map(|loc| {
                let est = off_grid(map, &self.grid, loc)?;
                Ok(Outcome::new(method, loc.threshold, est.position, truth, argmax, &self.grid))
            })
            .collect()
    }

    /// Trials `0..count`, parallel across trials and sequential inside each.
    pub fn run_trials(&self, count: usize, exec: Exec) -> Result<Vec<TrialResult>> {
        try_map_indexed(exec, count, |t| self.run_trial(t, Exec::Sequential))
    }
}

/// Uniform target position of `trial`, independent of the grid.
pub fn sample_target(cfg: &SimConfig, trial: usize) -> Vec3 {
    let mut rng = StreamKey::root(cfg.run.seed)
        .child(domain::TARGET)
        .child(trial as u64)
        .rng();
    let l = cfg.scene.side_length;
    Vec3::new(rng.random::<f64>() * l, rng.random::<f64>() * l, 0.0)
}

#[derive(Debug, Clone)]
pub struct TrialMaps {
    pub target: Vec3,
    /// One per UAV, indexed by id.
    pub locals: Vec<RcsMap>,
    pub mure: Option<RcsMap>,
    pub mimore: Option<RcsMap>,
    pub benchmark: Option<RcsMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub method: Method,
    pub theta: f64,
    pub position: Vec3,
    /// Planar Euclidean error, m.
    pub error: f64,
    /// Largest coordinate error, m.
    pub error_inf: f64,
    /// Argmax cell of the method's map.
    pub argmax: Option<usize>,
    /// Whether the argmax cell contains the target.
    pub hit: Option<bool>,
}

impl Outcome {
    fn new(
        method: Method,
        theta: f64,
        position: Vec3,
        truth: &Vec3,
        argmax: Option<usize>,
        grid: &GridSpec,
    ) -> Self {
        let diff = position - truth;
        Self {
            method,
            theta,
            position,
            error: position_error(&position, truth),
            error_inf: diff.x.abs().max(diff.y.abs()),
            argmax,
            hit: argmax.map(|p| grid.cell_contains(p, truth)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RidgeRatios {
    pub mimore: Option<f64>,
    pub mure: Option<f64>,
    /// Largest ratio among the local maps.
    pub best_local: Option<f64>,
    pub benchmark: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub grid: GridKind,
    pub target: Vec3,
    /// The target has zero RCS, so the errors carry no information.
    pub no_target_energy: bool,
    pub outcomes: Vec<Outcome>,
    pub ridge: RidgeRatios,
}

impl TrialResult {
    pub fn outcome(&self, method: Method, theta: f64) -> Option<&Outcome> {
        self.outcomes
            .iter()
            .find(|o| o.method == method && o.theta == theta)
    }
}
