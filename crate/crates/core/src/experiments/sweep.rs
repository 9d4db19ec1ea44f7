//! Parameter sweeps and their CSV summary.

use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::exec::{with_workers, Exec};
use crate::geometry::{integer_sqrt, GridKind};
use crate::overhead::Method;
use crate::rng::{domain, StreamKey};
use crate::{Error, Result};

use super::config::SimConfig;
use super::stats::summarize;
use super::trial::{TrialResult, TrialSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Number of UAVs, `U`.
    Uavs,
    /// Array elements, `N`.
    Elements,
    /// Altitude, `h`.
    Altitude,
    /// Cell size `d`, realized as `L = round(side / d)`.
    CellSize,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Uavs => "U",
            SweepParam::Elements => "N",
            SweepParam::Altitude => "h",
            SweepParam::CellSize => "d",
        }
    }

    /// Copy of `cfg` with the parameter set to `value`.
    pub fn apply(&self, cfg: &SimConfig, value: f64) -> Result<SimConfig> {
        let mut out = cfg.clone();
        let bad = || Error::Config(format!("invalid {} sweep value {value}", self.name()));
        let count = || -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 && integer_sqrt(value as usize).is_some() {
                Ok(value as usize)
            } else {
                Err(bad())
            }
        };
        match self {
            SweepParam::Uavs => out.scene.uavs = count()?,
            SweepParam::Elements => out.scene.elements = count()?,
            SweepParam::Altitude => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(bad());
                }
                out.scene.altitude = value;
            }
            SweepParam::CellSize => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(bad());
                }
                let l = (cfg.scene.side_length / value).round();
                if l < 2.0 {
                    return Err(bad());
                }
                out.scene.divisions = l as usize;
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "uavs" => Ok(SweepParam::Uavs),
            "N" | "elements" => Ok(SweepParam::Elements),
            "h" | "altitude" => Ok(SweepParam::Altitude),
            "d" | "cell_size" => Ok(SweepParam::CellSize),
            other => Err(Error::Config(format!(
                "unknown sweep parameter '{other}' (expected U, N, h or d)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// `U=1,4,9,16`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep '{s}' is not param=v1,v2,...")))?;
        let param = name.trim().parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad sweep value '{v}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Config("empty sweep".into()));
        }
        Ok(Self { param, values })
    }
}

/// All trials of one sweep point, grid kinds in configuration order.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub value: Option<f64>,
    pub cfg: SimConfig,
    pub trials: Vec<TrialResult>,
}

impl PointResult {
    /// Errors of `method` at `theta` on `grid`, in trial order.
    pub fn errors(&self, method: Method, grid: GridKind, theta: f64) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|t| t.grid == grid)
            .filter_map(|t| t.outcome(method, theta))
            .map(|o| o.error)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub parameter: String,
    pub value: Option<f64>,
    pub method: Method,
    pub grid: GridKind,
    pub theta: f64,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Share of trials whose argmax cell contains the target.
    pub hit_rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub param: Option<SweepParam>,
    pub points: Vec<PointResult>,
    pub rows: Vec<StatsRow>,
}

/// Runs every grid kind of `cfg` and returns the trials.
pub fn run_point(cfg: &SimConfig, exec: Exec) -> Result<Vec<TrialResult>> {
    let mut out = Vec::new();
    for &kind in &cfg.run.grids {
        let setup = TrialSetup::new(cfg, kind, exec)?;
        out.extend(setup.run_trials(cfg.run.trials, exec)?);
    }
    Ok(out)
}

/// Runs the sweep (or the single configuration when `sweep` is `None`) on
/// `cfg.run.workers` threads. `progress` is called after each point with
/// `(done, total)`.
pub fn run_sweep(
    cfg: &SimConfig,
    sweep: Option<&SweepSpec>,
    exec: Exec,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<SweepOutput> {
    cfg.validate()?;
    let points: Vec<(Option<f64>, SimConfig)> = match sweep {
        None => vec![(None, cfg.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((Some(v), s.param.apply(cfg, v)?)))
            .collect::<Result<_>>()?,
    };
    let total = points.len();
    let results = with_workers(cfg.run.workers, || -> Result<Vec<PointResult>> {
        let mut out = Vec::with_capacity(total);
        for (i, (value, pcfg)) in points.into_iter().enumerate() {
            let trials = run_point(&pcfg, exec)?;
            out.push(PointResult {
                value,
                cfg: pcfg,
                trials,
            });
            progress(i + 1, total);
        }
        Ok(out)
    })?;
    let param = sweep.map(|s| s.param);
    let rows = aggregate(cfg, param, &results);
    Ok(SweepOutput {
        param,
        points: results,
        rows,
    })
}

fn aggregate(cfg: &SimConfig, param: Option<SweepParam>, points: &[PointResult]) -> Vec<StatsRow> {
    let root = StreamKey::root(cfg.run.seed).child(domain::BOOTSTRAP);
    let mut rows = Vec::new();
    for (pi, point) in points.iter().enumerate() {
        for (gi, &grid) in cfg.run.grids.iter().enumerate() {
            for (mi, &method) in cfg.run.methods.iter().enumerate() {
                for (ti, &theta) in cfg.localizer.thresholds.iter().enumerate() {
                    let outcomes: Vec<_> = point
                        .trials
                        .iter()
                        .filter(|t| t.grid == grid)
                        .filter_map(|t| t.outcome(method, theta))
                        .collect();
                    if outcomes.is_empty() {
                        continue;
                    }
                    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
                    let key = root
                        .child(pi as u64)
                        .child(gi as u64)
                        .child(mi as u64)
                        .child(ti as u64);
                    let s = summarize(&errors, key);
                    let hits: Vec<bool> = outcomes.iter().filter_map(|o| o.hit).collect();
                    rows.push(StatsRow {
                        parameter: param.map_or("none", |p| p.name()).to_string(),
                        value: point.value,
                        method,
                        grid,
                        theta,
                        n: s.n,
                        mean: s.mean,
                        median: s.median,
                        std: s.std,
                        ci_low: s.ci.low,
                        ci_high: s.ci.high,
                        hit_rate: (!hits.is_empty()).then(|| {
                            hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64
                        }),
                    });
                }
            }
        }
    }
    rows
}

pub fn rows_to_csv(rows: &[StatsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn write_csv(path: &Path, rows: &[StatsRow]) -> Result<()> {
    std::fs::write(path, rows_to_csv(rows)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Preset;

    fn tiny() -> SimConfig {
        let mut c = SimConfig::preset(Preset::Desk);
        c.scene.divisions = 4;
        c.scene.uavs = 4;
        c.scene.elements = 4;
        c.waveform.symbols = 2;
        c.waveform.subcarriers = 8;
        c.run.trials = 6;
        c
    }

    #[test]
    fn parse_specs() {
        let s: SweepSpec = "U=1,4,9,16".parse().unwrap();
        assert_eq!(s.param, SweepParam::Uavs);
        assert_eq!(s.values, vec![1.0, 4.0, 9.0, 16.0]);
        assert!("Q=1".parse::<SweepSpec>().is_err());
        assert!("U=1,x".parse::<SweepSpec>().is_err());
        assert!("U".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn apply_values() {
        let c = SimConfig::default();
        assert!(SweepParam::Uavs.apply(&c, 5.0).is_err());
        assert_eq!(SweepParam::CellSize.apply(&c, 5.0).unwrap().scene.divisions, 10);
        assert_eq!(SweepParam::CellSize.apply(&c, 4.0).unwrap().scene.divisions, 13);
        assert!(SweepParam::CellSize.apply(&c, 40.0).is_err());
        assert_eq!(SweepParam::Altitude.apply(&c, 60.0).unwrap().scene.altitude, 60.0);
        assert!(SweepParam::Elements.apply(&c, 8.0).is_err());
    }

    #[test]
    fn single_value_single_method_single_row() {
        let mut c = tiny();
        c.run.methods = vec![Method::Mimore];
        c.localizer.thresholds = vec![0.9];
        let spec: SweepSpec = "U=4".parse().unwrap();
        let out = run_sweep(&c, Some(&spec), Exec::Sequential, &|_, _| {}).unwrap();
        assert_eq!(out.rows.len(), 1);
        let r = &out.rows[0];
        assert_eq!(r.n, 6);
        assert!(r.ci_low <= r.mean && r.mean <= r.ci_high);
        let csv = rows_to_csv(&out.rows).unwrap();
        assert!(csv.starts_with("parameter,value,method,grid,theta,n,mean,median,std,ci_low,ci_high,hit_rate"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn byte_identical_across_execution_modes() {
        let c = tiny();
        let spec: SweepSpec = "U=1,4".parse().unwrap();
        let a = run_sweep(&c, Some(&spec), Exec::Sequential, &|_, _| {}).unwrap();
        let b = run_sweep(&c, Some(&spec), Exec::Parallel, &|_, _| {}).unwrap();
        assert_eq!(rows_to_csv(&a.rows).unwrap(), rows_to_csv(&b.rows).unwrap());
        // U = 1 only yields benchmark rows
        assert!(a
            .rows
            .iter()
            .filter(|r| r.value == Some(1.0))
            .all(|r| r.method == Method::Benchmark));
    }
}
