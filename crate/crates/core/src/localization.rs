//! Position estimates from RCS maps.

use serde::{Deserialize, Serialize};

use crate::estimation::RcsMap;
use crate::geometry::GridSpec;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizerConfig {
    /// Normalized-value threshold in `(0, 1]`; 1 keeps only the maximum.
    pub threshold: f64,
}

impl LocalizerConfig {
    pub fn new(threshold: f64) -> Result<Self> {
        if threshold > 0.0 && threshold <= 1.0 {
            Ok(Self { threshold })
        } else {
            Err(Error::InvalidParameter(format!(
                "threshold {threshold} outside (0, 1]"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocatorKind {
    OnGrid,
    OffGrid,
    Fused,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub position: Vec3,
    pub kind: LocatorKind,
    /// Argmax cell, for on-grid estimates.
    pub cell: Option<usize>,
}

/// Min-max normalization over observed cells; a constant map becomes all ones.
pub fn normalize_map(map: &RcsMap) -> Result<RcsMap> {
    let observed = map.values.iter().zip(&map.observed).filter(|(_, &o)| o);
    let (lo, hi) = observed.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return Err(Error::Estimation("map has no observed cells".into()));
    }
    let span = hi - lo;
    let values = map
        .values
        .iter()
        .zip(&map.observed)
        .map(|(&v, &o)| match (o, span > 0.0) {
            (false, _) => 0.0,
            (true, true) => (v - lo) / span,
            (true, false) => 1.0,
        })
        .collect();
    Ok(RcsMap {
        values,
        observed: map.observed.clone(),
        provenance: map.provenance,
    })
}

/// Index of the largest observed value, ties to the lowest index.
pub fn argmax_cell(map: &RcsMap) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (p, (&v, &o)) in map.values.iter().zip(&map.observed).enumerate() {
        if o && best.is_none_or(|(_, b)| v > b) {
            best = Some((p, v));
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::Estimation("map has no observed cells".into()))
}

/// Center of the argmax cell.
pub fn on_grid(map: &RcsMap, grid: &GridSpec) -> Result<PositionEstimate> {
    check_len(map, grid)?;
    let p = argmax_cell(map)?;
    Ok(PositionEstimate {
        position: grid.cells[p].center,
        kind: LocatorKind::OnGrid,
        cell: Some(p),
    })
}

/// Weighted mean of the centers of observed cells at or above the threshold
/// of the normalized map.
pub fn off_grid(map: &RcsMap, grid: &GridSpec, cfg: &LocalizerConfig) -> Result<PositionEstimate> {
    check_len(map, grid)?;
    let norm = normalize_map(map)?;
    if cfg.threshold >= 1.0 {
        // only maxima survive; keep the on-grid tie-break
        let est = on_grid(&norm, grid)?;
        return Ok(PositionEstimate {
            kind: LocatorKind::OffGrid,
            ..est
        });
    }
    let mut weight = 0.0;
    let mut acc = Vec3::zeros();
    for (p, (&v, &o)) in norm.values.iter().zip(&norm.observed).enumerate() {
        if o && v >= cfg.threshold {
            weight += v;
            acc += grid.cells[p].center * v;
        }
    }
    if weight <= 0.0 {
        return Err(Error::Estimation("no cell reaches the threshold".into()));
    }
    let mut position = acc / weight;
    position.z = 0.0;
    Ok(PositionEstimate {
        position,
        kind: LocatorKind::OffGrid,
        cell: None,
    })
}

fn check_len(map: &RcsMap, grid: &GridSpec) -> Result<()> {
    if map.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "map has {} cells, grid has {}",
            map.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// Planar Euclidean error.
pub fn position_error(estimate: &Vec3, truth: &Vec3) -> f64 {
    (estimate - truth).xy().norm()
}
