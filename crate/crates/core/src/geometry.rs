//! Grids, UAV placement, steering vectors and bistatic path geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{CVector, Complex64, Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// `L x L` cells only.
    Base,
    /// Base cells plus the `(L-1) x (L-1)` overlay shifted by half a cell.
    Mixed,
}

impl GridKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridKind::Base => "base",
            GridKind::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(GridKind::Base),
            "mixed" => Ok(GridKind::Mixed),
            other => Err(Error::InvalidParameter(format!("unknown grid kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Base,
    Overlay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub center: Vec3,
    pub layer: Layer,
}

/// Square area of side `side_length` split into `divisions^2` base cells,
/// optionally augmented by the half-shifted overlay lattice.
///
/// Cells are ordered base row-major (x fastest), then overlay row-major.
/// Overlay cells that would straddle the area boundary are dropped, which
/// leaves `(L-1)^2` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub side_length: f64,
    pub divisions: usize,
    pub cell_size: f64,
    pub kind: GridKind,
    pub cells: Vec<Cell>,
}

/// Builds the base or mixed grid over `[0, side_length]^2`.
pub fn build_grid(side_length: f64, divisions: usize, kind: GridKind) -> Result<GridSpec> {
    if !(side_length.is_finite() && side_length > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "side length must be positive, got {side_length}"
        )));
    }
    if divisions < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 divisions per side, got {divisions}"
        )));
    }
    let d = side_length / divisions as f64;
    let mut cells = Vec::with_capacity(match kind {
        GridKind::Base => divisions * divisions,
        GridKind::Mixed => divisions * divisions + (divisions - 1) * (divisions - 1),
    });
    for j in 0..divisions {
        for i in 0..divisions {
            cells.push(Cell {
                index: cells.len(),
                center: Vec3::new((i as f64 + 0.5) * d, (j as f64 + 0.5) * d, 0.0),
                layer: Layer::Base,
            });
        }
    }
    if kind == GridKind::Mixed {
        for j in 0..divisions - 1 {
            for i in 0..divisions - 1 {
                cells.push(Cell {
                    index: cells.len(),
                    center: Vec3::new((i as f64 + 1.0) * d, (j as f64 + 1.0) * d, 0.0),
                    layer: Layer::Overlay,
                });
            }
        }
    }
    Ok(GridSpec {
        side_length,
        divisions,
        cell_size: d,
        kind,
        cells,
    })
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn base_len(&self) -> usize {
        self.divisions * self.divisions
    }

    pub fn cell(&self, index: usize) -> Result<&Cell> {
        self.cells.get(index).ok_or(Error::UnknownCell(index))
    }

    pub fn base_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.layer == Layer::Base)
    }

    /// Whether `point` lies in the closed `d x d` square of `cell`.
    pub fn cell_contains(&self, cell: usize, point: &Vec3) -> bool {
        let c = &self.cells[cell].center;
        let half = 0.5 * self.cell_size + 1e-12 * self.side_length;
        (point.x - c.x).abs() <= half && (point.y - c.y).abs() <= half
    }

    /// Cells whose square contains `point` (one or two on a mixed grid, more on edges).
    pub fn cells_containing(&self, point: &Vec3) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| self.cell_contains(p, point))
            .collect()
    }

    /// Index of the cell whose center is closest to `point`, ties to the lower index.
    pub fn nearest_cell(&self, point: &Vec3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in &self.cells {
            let d = (c.center - point).xy().norm_squared();
            if d < best_d {
                best_d = d;
                best = c.index;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavPose {
    pub id: usize,
    pub position: Vec3,
}

/// Places `count` UAVs at altitude `altitude` on a centered `sqrt(U) x sqrt(U)`
/// lattice over the area. `count == 1` yields the geometric center.
pub fn place_uavs(count: usize, side_length: f64, altitude: f64) -> Result<Vec<UavPose>> {
    if count == 0 {
        return Err(Error::InvalidDeployment("need at least one UAV".into()));
    }
    if !(altitude.is_finite() && altitude > 0.0) {
        return Err(Error::InvalidDeployment(format!(
            "altitude must be positive, got {altitude}"
        )));
    }
    if !(side_length.is_finite() && side_length > 0.0) {
        return Err(Error::InvalidDeployment(format!(
            "side length must be positive, got {side_length}"
        )));
    }
    let side = integer_sqrt(count).ok_or_else(|| {
        Error::InvalidDeployment(format!("UAV count {count} is not a perfect square"))
    })?;
    let pitch = side_length / side as f64;
    let mut out = Vec::with_capacity(count);
    for j in 0..side {
        for i in 0..side {
            out.push(UavPose {
                id: out.len(),
                position: Vec3::new((i as f64 + 0.5) * pitch, (j as f64 + 0.5) * pitch, altitude),
            });
        }
    }
    Ok(out)
}

/// Places `count` UAVs evenly along the line `y = side_length / 2`, for
/// deployments that are not perfect squares.
pub fn place_uavs_in_row(count: usize, side_length: f64, altitude: f64) -> Result<Vec<UavPose>> {
    if count == 0 {
        return Err(Error::InvalidDeployment("need at least one UAV".into()));
    }
    // validates side length and altitude
    let center = place_uavs(1, side_length, altitude)?[0].position;
    let pitch = side_length / count as f64;
    Ok((0..count)
        .map(|i| UavPose {
            id: i,
            position: Vec3::new((i as f64 + 0.5) * pitch, center.y, altitude),
        })
        .collect())
}

pub(crate) fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Downward-facing square uniform planar array with half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArraySpec {
    elements: usize,
    side: usize,
}

impl ArraySpec {
    pub fn new(elements: usize) -> Result<Self> {
        match integer_sqrt(elements) {
            Some(side) if side > 0 => Ok(Self { elements, side }),
            _ => Err(Error::InvalidArray(format!(
                "element count {elements} is not a positive perfect square"
            ))),
        }
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Elements per side, `sqrt(N)`.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn element_spacing(&self, wavelength: f64) -> f64 {
        0.5 * wavelength
    }
}

/// Look direction relative to the downward boresight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub azimuth: f64,
    /// Angle from straight down, in `[0, pi/2]` for ground points.
    pub elevation: f64,
}

impl Direction {
    pub const BORESIGHT: Direction = Direction {
        azimuth: 0.0,
        elevation: 0.0,
    };

    /// Direction from an array at `from` toward `to`.
    pub fn towards(from: &Vec3, to: &Vec3) -> Self {
        let v = to - from;
        let horizontal = v.x.hypot(v.y);
        Self {
            azimuth: v.y.atan2(v.x),
            elevation: horizontal.atan2(-v.z),
        }
    }
}

/// Half-wavelength UPA response; element `(m, n)` sits at row-major index `m * sqrt(N) + n`.
pub fn steering_vector(array: &ArraySpec, dir: &Direction) -> CVector {
    let s = array.side();
    let (sin_el, _) = dir.elevation.sin_cos();
    let (sin_az, cos_az) = dir.azimuth.sin_cos();
    let u = sin_el * cos_az;
    let v = sin_el * sin_az;
    CVector::from_fn(array.elements(), |idx, _| {
        let m = (idx / s) as f64;
        let n = (idx % s) as f64;
        Complex64::cis(PI * (m * u + n * v))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    /// Transmitter to reflection point, meters.
    pub d_tx: f64,
    /// Reflection point to receiver, meters.
    pub d_rx: f64,
    /// Bistatic propagation delay, seconds.
    pub delay: f64,
    /// Doppler shift, Hz.
    pub doppler: f64,
}

pub fn path_geometry(
    tx: &UavPose,
    point: &Vec3,
    rx: &UavPose,
    light_speed: f64,
    doppler: f64,
) -> Result<PathGeometry> {
    let d_tx = (tx.position - point).norm();
    let d_rx = (point - rx.position).norm();
    if d_tx <= 0.0 || d_rx <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "reflection point {point:?} coincides with UAV {} or {}",
            tx.id, rx.id
        )));
    }
    Ok(PathGeometry {
        d_tx,
        d_rx,
        delay: (d_tx + d_rx) / light_speed,
        doppler,
    })
}

/// Partition of the grid into per-UAV illumination sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellAssignment {
    /// `owner[p]` is the UAV that illuminates cell `p`.
    pub owner: Vec<usize>,
    /// `sets[u]` lists the cells of UAV `u` in increasing order.
    pub sets: Vec<Vec<usize>>,
}

impl CellAssignment {
    pub fn from_sets(sets: Vec<Vec<usize>>, cell_count: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; cell_count];
        for (u, set) in sets.iter().enumerate() {
            for &p in set {
                if p >= cell_count {
                    return Err(Error::InvalidSchedule(format!("cell {p} out of range")));
                }
                if owner[p] != usize::MAX {
                    return Err(Error::InvalidSchedule(format!(
                        "cell {p} assigned to both UAV {} and UAV {u}",
                        owner[p]
                    )));
                }
                owner[p] = u;
            }
        }
        if let Some(p) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidSchedule(format!("cell {p} is never illuminated")));
        }
        let mut sets = sets;
        sets.iter_mut().for_each(|s| s.sort_unstable());
        Ok(Self { owner, sets })
    }

    pub fn uav_count(&self) -> usize {
        self.sets.len()
    }
}

/// Assigns every cell to its horizontally nearest UAV, ties to the lowest id.
pub fn assign_cells(grid: &GridSpec, uavs: &[UavPose]) -> Result<CellAssignment> {
    if uavs.is_empty() {
        return Err(Error::InvalidDeployment("need at least one UAV".into()));
    }
    let tol = 1e-9 * grid.side_length * grid.side_length;
    let mut sets = vec![Vec::new(); uavs.len()];
    for cell in &grid.cells {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (u, pose) in uavs.iter().enumerate() {
            let d = (pose.position - cell.center).xy().norm_squared();
            if d < best_d - tol {
                best_d = d;
                best = u;
            }
        }
        sets[best].push(cell.index);
    }
    CellAssignment::from_sets(sets, grid.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn enumerate_count(l: usize, mixed: bool) -> usize {
        let mut n = 0;
        for _ in 0..l {
            for _ in 0..l {
                n += 1;
            }
        }
        if mixed {
            for _ in 0..l - 1 {
                for _ in 0..l - 1 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn grid_cardinalities() {
        let g = build_grid(50.0, 18, GridKind::Mixed).unwrap();
        assert_eq!(g.len(), enumerate_count(18, true));
        assert_eq!(g.len(), 613);
        let g = build_grid(50.0, 12, GridKind::Mixed).unwrap();
        assert_eq!(g.len(), enumerate_count(12, true));
        assert_eq!(g.len(), 265);
    }

    #[test]
    fn two_by_two_base_centers() {
        let g = build_grid(50.0, 2, GridKind::Base).unwrap();
        let centers: Vec<(f64, f64)> = g.cells.iter().map(|c| (c.center.x, c.center.y)).collect();
        assert_eq!(
            centers,
            vec![(12.5, 12.5), (37.5, 12.5), (12.5, 37.5), (37.5, 37.5)]
        );
    }

    #[test]
    fn overlay_is_shifted_and_inside() {
        let g = build_grid(50.0, 4, GridKind::Mixed).unwrap();
        let d = g.cell_size;
        for c in g.cells.iter().filter(|c| c.layer == Layer::Overlay) {
            assert!(c.center.x > 0.0 && c.center.x < 50.0);
            assert!(c.center.y > 0.0 && c.center.y < 50.0);
            let base = c.center - Vec3::new(d / 2.0, d / 2.0, 0.0);
            assert!(g.base_cells().any(|b| (b.center - base).norm() < 1e-12));
            assert_eq!(c.center.z, 0.0);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(build_grid(50.0, 1, GridKind::Mixed).is_err());
        assert!(build_grid(0.0, 4, GridKind::Base).is_err());
        assert!(build_grid(-3.0, 4, GridKind::Base).is_err());
    }

    #[test]
    fn uav_placement() {
        let one = place_uavs(1, 50.0, 100.0).unwrap();
        assert_eq!(one[0].position, Vec3::new(25.0, 25.0, 100.0));
        let four = place_uavs(4, 50.0, 100.0).unwrap();
        let xy: Vec<(f64, f64)> = four.iter().map(|u| (u.position.x, u.position.y)).collect();
        assert_eq!(xy, vec![(12.5, 12.5), (37.5, 12.5), (12.5, 37.5), (37.5, 37.5)]);
        let nine = place_uavs(9, 50.0, 100.0).unwrap();
        let pitch = 50.0 / 3.0;
        let mut k = 0;
        for j in 0..3 {
            for i in 0..3 {
                assert_relative_eq!(nine[k].position.x, (i as f64 + 0.5) * pitch);
                assert_relative_eq!(nine[k].position.y, (j as f64 + 0.5) * pitch);
                k += 1;
            }
        }
        assert!(place_uavs(5, 50.0, 100.0).is_err());
        assert!(place_uavs(4, 50.0, 0.0).is_err());
    }

    #[test]
    fn steering_examples() {
        let a16 = ArraySpec::new(16).unwrap();
        let g = steering_vector(&a16, &Direction::BORESIGHT);
        assert!(g.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let a4 = ArraySpec::new(4).unwrap();
        let g = steering_vector(
            &a4,
            &Direction {
                azimuth: 0.0,
                elevation: PI / 2.0,
            },
        );
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (z, e) in g.iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
        assert!(ArraySpec::new(5).is_err());
    }

    #[test]
    fn path_examples() {
        let c0 = 299_792_458.0;
        let u = UavPose {
            id: 0,
            position: Vec3::new(25.0, 25.0, 100.0),
        };
        let g = path_geometry(&u, &Vec3::new(25.0, 25.0, 0.0), &u, c0, 0.0).unwrap();
        assert_relative_eq!(g.d_tx, 100.0);
        assert_relative_eq!(g.delay, 200.0 / c0);
        let tx = UavPose {
            id: 0,
            position: Vec3::new(0.0, 0.0, 100.0),
        };
        let rx = UavPose {
            id: 1,
            position: Vec3::new(50.0, 0.0, 100.0),
        };
        let g = path_geometry(&tx, &Vec3::new(25.0, 0.0, 0.0), &rx, c0, 0.0).unwrap();
        let leg = (625.0f64 + 10000.0).sqrt();
        assert_relative_eq!(g.d_tx, leg, max_relative = 1e-14);
        assert_relative_eq!(g.d_rx, leg, max_relative = 1e-14);
        assert_relative_eq!(g.delay, 2.0 * 10625f64.sqrt() / c0, max_relative = 1e-14);
        assert_eq!(g.doppler, 0.0);
        assert!(path_geometry(&tx, &tx.position, &rx, c0, 0.0).is_err());
    }

    #[test]
    fn assignment_examples() {
        let g = build_grid(50.0, 6, GridKind::Mixed).unwrap();
        let one = place_uavs(1, 50.0, 100.0).unwrap();
        let a = assign_cells(&g, &one).unwrap();
        assert_eq!(a.sets[0].len(), g.len());

        let g2 = build_grid(50.0, 2, GridKind::Base).unwrap();
        let four = place_uavs(4, 50.0, 100.0).unwrap();
        let a = assign_cells(&g2, &four).unwrap();
        assert_eq!(a.sets, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn overlay_tie_goes_to_lowest_id() {
        // L=2 mixed: the single overlay cell sits at the center, equidistant to all four UAVs.
        let g = build_grid(50.0, 2, GridKind::Mixed).unwrap();
        let four = place_uavs(4, 50.0, 100.0).unwrap();
        let a = assign_cells(&g, &four).unwrap();
        assert_eq!(a.owner[4], 0);
    }

    #[test]
    fn row_placement() {
        let u = place_uavs_in_row(2, 40.0, 100.0).unwrap();
        assert_eq!(u[0].position, Vec3::new(10.0, 20.0, 100.0));
        assert_eq!(u[1].position, Vec3::new(30.0, 20.0, 100.0));
        assert!(place_uavs_in_row(0, 40.0, 100.0).is_err());
    }

    proptest! {
        #[test]
        fn mixed_cardinality(l in 2usize..40) {
            let g = build_grid(10.0, l, GridKind::Mixed).unwrap();
            prop_assert_eq!(g.len(), l * l + (l - 1) * (l - 1));
        }

        #[test]
        fn steering_norm(n_side in 1usize..9, az in -PI..PI, el in 0.0..(PI / 2.0)) {
            let a = ArraySpec::new(n_side * n_side).unwrap();
            let g = steering_vector(&a, &Direction { azimuth: az, elevation: el });
            prop_assert!((g.norm_squared() - (n_side * n_side) as f64).abs() < 1e-9);
            prop_assert!(g.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }

        #[test]
        fn delay_symmetric(x1 in 0.0..50.0, y1 in 0.0..50.0, x2 in 0.0..50.0, y2 in 0.0..50.0,
                           px in 0.0..50.0, py in 0.0..50.0, h in 10.0..200.0) {
            let a = UavPose { id: 0, position: Vec3::new(x1, y1, h) };
            let b = UavPose { id: 1, position: Vec3::new(x2, y2, h) };
            let p = Vec3::new(px, py, 0.0);
            let ab = path_geometry(&a, &p, &b, 3e8, 0.0).unwrap();
            let ba = path_geometry(&b, &p, &a, 3e8, 0.0).unwrap();
            prop_assert!((ab.delay - ba.delay).abs() <= 1e-15 * ab.delay);
        }

        #[test]
        fn assignment_partitions(l in 2usize..10, side in 1usize..5, mixed in any::<bool>()) {
            let kind = if mixed { GridKind::Mixed } else { GridKind::Base };
            let g = build_grid(50.0, l, kind).unwrap();
            let uavs = place_uavs(side * side, 50.0, 80.0).unwrap();
            let a = assign_cells(&g, &uavs).unwrap();
            let mut seen = vec![0usize; g.len()];
            for set in &a.sets {
                for &p in set {
                    seen[p] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
