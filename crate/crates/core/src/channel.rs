//! Reflection matrices of point scatterers and of the uniformly rough ground.
//!
//! Dense `N x N` matrices are produced for inspection and tests. The sensing
//! pipeline never needs them explicitly: every ground matrix is a weighted
//! sum of rank-1 terms `g_rx(n) g_tx(n)^H`, so [`ClutterField`] evaluates
//! `H w` and `v^H H w` straight from cached per-node steering vectors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    path_geometry, steering_vector, ArraySpec, Direction, GridSpec, PathGeometry, UavPose,
};
use crate::signal::WaveformSpec;
use crate::{CMatrix, CVector, Complex64, Error, Result, Vec3};

/// Point target illuminated by the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub position: Vec3,
    /// Radar cross-section, m^2.
    pub rcs: f64,
    /// Doppler shift, Hz.
    pub doppler: f64,
}

/// Everything the channel depends on: geometry, radio parameters and reflectors.
#[derive(Debug, Clone)]
pub struct Scene {
    pub grid: GridSpec,
    pub uavs: Vec<UavPose>,
    pub array: ArraySpec,
    pub waveform: WaveformSpec,
    pub target: Target,
    /// Total RCS of the ground, spread uniformly over the area, m^2.
    pub ground_rcs: f64,
    pub pathloss_exponent: f64,
    pub carrier_hz: f64,
    pub light_speed: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.uavs.is_empty() {
            return Err(Error::InvalidDeployment("scene has no UAVs".into()));
        }
        for (i, u) in self.uavs.iter().enumerate() {
            if u.id != i {
                return Err(Error::InvalidDeployment(format!(
                    "UAV at position {i} has id {}; ids must be 0..U in order",
                    u.id
                )));
            }
            if u.position.z <= 0.0 {
                return Err(Error::InvalidDeployment(format!("UAV {i} is not airborne")));
            }
        }
        if !(self.target.rcs >= 0.0) || !(self.ground_rcs >= 0.0) {
            return Err(Error::InvalidParameter("RCS values must be nonnegative".into()));
        }
        if !(self.carrier_hz > 0.0 && self.light_speed > 0.0) {
            return Err(Error::InvalidParameter(
                "carrier and light speed must be positive".into(),
            ));
        }
        if !(self.pathloss_exponent > 0.0) {
            return Err(Error::InvalidParameter("pathloss exponent must be positive".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.light_speed / self.carrier_hz
    }

    pub fn uav(&self, id: usize) -> Result<&UavPose> {
        self.uavs
            .get(id)
            .ok_or_else(|| Error::InvalidDeployment(format!("unknown UAV {id}")))
    }

    pub fn with_target(&self, target: Target) -> Scene {
        Scene {
            target,
            ..self.clone()
        }
    }

    /// `lambda sqrt(sigma_G) / ((4 pi)^{3/2} l^2)`, the areal amplitude density of the ground.
    pub fn ground_density(&self) -> f64 {
        self.wavelength() * self.ground_rcs.sqrt()
            / ((4.0 * PI).powf(1.5) * self.grid.side_length.powi(2))
    }

    pub fn path(&self, tx: usize, point: &Vec3, rx: usize, doppler: f64) -> Result<PathGeometry> {
        path_geometry(self.uav(tx)?, point, self.uav(rx)?, self.light_speed, doppler)
    }

    /// Transmit (or receive) steering vector of UAV `uav` toward `point`.
    pub fn steering(&self, uav: usize, point: &Vec3) -> Result<CVector> {
        let pose = self.uav(uav)?;
        Ok(steering_vector(
            &self.array,
            &Direction::towards(&pose.position, point),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceTag {
    Point,
    Target,
    Cell(usize),
    /// Everything except the given cell.
    Complement(usize),
    Total,
}

#[derive(Debug, Clone)]
pub struct ReflectionMatrix {
    pub tx: usize,
    pub rx: usize,
    pub source: SourceTag,
    pub subcarrier: usize,
    pub value: CMatrix,
}

/// Which subcarriers the ground delay phase is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClutterFidelity {
    /// One reference subcarrier (`k = 0`) for every symbol.
    #[default]
    CenterSubcarrier,
    /// The ground response is recomputed for every subcarrier.
    PerSubcarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceMode {
    /// `H - H_{p}` from the area integral.
    Exact,
    /// Cell-center sum over every other grid cell with weight `d^2`.
    #[default]
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Midpoint-rule nodes per cell side.
    pub subdivisions: usize,
    pub fidelity: ClutterFidelity,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            subdivisions: 4,
            fidelity: ClutterFidelity::CenterSubcarrier,
        }
    }
}

impl QuadratureConfig {
    pub fn new(subdivisions: usize) -> Result<Self> {
        if subdivisions == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
        }
        Ok(Self {
            subdivisions,
            ..Self::default()
        })
    }
}

fn delay_phase(delay: f64, spacing: f64, k: usize) -> Complex64 {
    Complex64::cis(-2.0 * PI * delay * spacing * k as f64)
}

/// Reflection matrix of a point scatterer of RCS `rcs` at `point`, evaluated
/// at subcarrier `k` and OFDM symbol `l`.
#[allow(clippy::too_many_arguments)]
pub fn point_matrix(
    scene: &Scene,
    tx: usize,
    rx: usize,
    point: &Vec3,
    rcs: f64,
    doppler: f64,
    k: usize,
    l: usize,
) -> Result<ReflectionMatrix> {
    let path = scene.path(tx, point, rx, doppler)?;
    let gain = point_gain(scene, &path, rcs, k, l);
    let g_tx = scene.steering(tx, point)?;
    let g_rx = scene.steering(rx, point)?;
    Ok(ReflectionMatrix {
        tx,
        rx,
        source: SourceTag::Point,
        subcarrier: k,
        value: (&g_rx * g_tx.adjoint()) * gain,
    })
}

/// Scalar factor of a point reflection, everything except `G`.
pub fn point_gain(scene: &Scene, path: &PathGeometry, rcs: f64, k: usize, l: usize) -> Complex64 {
    let lambda = scene.wavelength();
    let a = scene.pathloss_exponent;
    let amp = (rcs * lambda * lambda
        / ((4.0 * PI).powi(3) * path.d_tx.powf(a) * path.d_rx.powf(a)))
    .sqrt();
    let wave = &scene.waveform;
    let doppler = Complex64::cis(2.0 * PI * path.doppler * wave.symbol_duration() * l as f64);
    doppler * delay_phase(path.delay, wave.subcarrier_spacing(), k) * amp
}

/// Weighted ground points standing in for an area integral.
#[derive(Debug, Clone, Default)]
pub struct GroundNodes {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl GroundNodes {
    /// `q x q` midpoint nodes of one cell, each weighted `(d/q)^2`.
    pub fn cell(grid: &GridSpec, cell: usize, q: usize) -> Result<Self> {
        let c = grid.cell(cell)?.center;
        let d = grid.cell_size;
        let h = d / q as f64;
        let mut out = Self::default();
        for j in 0..q {
            for i in 0..q {
                out.points.push(Vec3::new(
                    c.x - 0.5 * d + (i as f64 + 0.5) * h,
                    c.y - 0.5 * d + (j as f64 + 0.5) * h,
                    0.0,
                ));
                out.weights.push(h * h);
            }
        }
        Ok(out)
    }

    /// Nodes of every base cell, which together tile the area exactly once.
    pub fn area(grid: &GridSpec, q: usize) -> Self {
        let mut out = Self::default();
        for c in grid.base_cells() {
            let n = Self::cell(grid, c.index, q).expect("base cell exists");
            out.points.extend(n.points);
            out.weights.extend(n.weights);
        }
        out
    }

    /// One node per grid cell center (both layers), weight `d^2`.
    pub fn centers(grid: &GridSpec) -> Self {
        let w = grid.cell_size * grid.cell_size;
        Self {
            points: grid.cells.iter().map(|c| c.center).collect(),
            weights: vec![w; grid.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Ground nodes with cached steering vectors and distances for every UAV.
#[derive(Debug, Clone)]
pub struct ClutterField {
    nodes: GroundNodes,
    /// `steer[u][n]`: steering vector of UAV `u` toward node `n`.
    steer: Vec<Vec<CVector>>,
    /// `dist[u][n]`: distance from UAV `u` to node `n`.
    dist: Vec<Vec<f64>>,
    density: f64,
    alpha: f64,
    spacing: f64,
    light_speed: f64,
}

impl ClutterField {
    pub fn new(scene: &Scene, nodes: GroundNodes) -> Self {
        let steer = scene
            .uavs
            .iter()
            .map(|u| {
                nodes
                    .points
                    .iter()
                    .map(|p| steering_vector(&scene.array, &Direction::towards(&u.position, p)))
                    .collect()
            })
            .collect();
        let dist = scene
            .uavs
            .iter()
            .map(|u| nodes.points.iter().map(|p| (u.position - p).norm()).collect())
            .collect();
        Self {
            nodes,
            steer,
            dist,
            density: scene.ground_density(),
            alpha: scene.pathloss_exponent,
            spacing: scene.waveform.subcarrier_spacing(),
            light_speed: scene.light_speed,
        }
    }

    pub fn nodes(&self) -> &GroundNodes {
        &self.nodes
    }

    pub fn steering(&self, uav: usize, node: usize) -> &CVector {
        &self.steer[uav][node]
    }

    /// Bistatic delay through node `n`.
    pub fn delay(&self, tx: usize, rx: usize, n: usize) -> f64 {
        (self.dist[tx][n] + self.dist[rx][n]) / self.light_speed
    }

    /// Scalar weight of node `n` at subcarrier `k`.
    pub fn coefficient(&self, tx: usize, rx: usize, n: usize, k: usize) -> Complex64 {
        let half = 0.5 * self.alpha;
        let amp = self.density * self.nodes.weights[n]
            / (self.dist[tx][n].powf(half) * self.dist[rx][n].powf(half));
        delay_phase(self.delay(tx, rx, n), self.spacing, k) * amp
    }

    /// Dense `sum_n c_n g_rx(n) g_tx(n)^H`.
    pub fn dense(&self, tx: usize, rx: usize, k: usize) -> CMatrix {
        let n_el = self.steer[tx].first().map_or(0, |g| g.len());
        let mut out = CMatrix::zeros(n_el, n_el);
        for n in 0..self.nodes.len() {
            let c = self.coefficient(tx, rx, n, k);
            out.gerc(c, &self.steer[rx][n], &self.steer[tx][n], Complex64::new(1.0, 0.0));
        }
        out
    }

    /// `H w` without materializing `H`; node `skip` is left out when given.
    pub fn apply(&self, tx: usize, rx: usize, k: usize, w: &CVector, skip: Option<usize>) -> CVector {
        let mut out = CVector::zeros(w.len());
        for n in 0..self.nodes.len() {
            if Some(n) == skip {
                continue;
            }
            let s = self.steer[tx][n].dotc(w) * self.coefficient(tx, rx, n, k);
            out.axpy(s, &self.steer[rx][n], Complex64::new(1.0, 0.0));
        }
        out
    }

    /// Per-node terms `c_n(0) (v^H g_rx(n)) (g_tx(n)^H w)` and the node delays,
    /// so `v^H H(k) w` for any `k` is a phase-weighted sum.
    pub fn bilinear_terms(
        &self,
        tx: usize,
        rx: usize,
        v: &CVector,
        w: &CVector,
    ) -> (Vec<Complex64>, Vec<f64>) {
        (0..self.nodes.len())
            .map(|n| {
                let t = self.coefficient(tx, rx, n, 0)
                    * v.dotc(&self.steer[rx][n])
                    * self.steer[tx][n].dotc(w);
                (t, self.delay(tx, rx, n))
            })
            .unzip()
    }

    /// `v^H H(k) w` for each requested subcarrier.
    pub fn bilinear(
        &self,
        tx: usize,
        rx: usize,
        v: &CVector,
        w: &CVector,
        subcarriers: impl IntoIterator<Item = usize>,
    ) -> Vec<Complex64> {
        let (terms, delays) = self.bilinear_terms(tx, rx, v, w);
        subcarriers
            .into_iter()
            .map(|k| {
                terms
                    .iter()
                    .zip(&delays)
                    .map(|(t, &tau)| t * delay_phase(tau, self.spacing, k))
                    .sum()
            })
            .collect()
    }
}

/// Ground reflections from inside one cell, by `q x q` midpoint quadrature.
pub fn cell_clutter_matrix(
    scene: &Scene,
    tx: usize,
    rx: usize,
    cell: usize,
    k: usize,
    quad: &QuadratureConfig,
) -> Result<ReflectionMatrix> {
    scene.uav(tx)?;
    scene.uav(rx)?;
    let field = ClutterField::new(scene, GroundNodes::cell(&scene.grid, cell, quad.subdivisions)?);
    Ok(ReflectionMatrix {
        tx,
        rx,
        source: SourceTag::Cell(cell),
        subcarrier: k,
        value: field.dense(tx, rx, k),
    })
}

/// Ground reflections from the whole area (sum over the base-layer tiling).
pub fn total_clutter_matrix(
    scene: &Scene,
    tx: usize,
    rx: usize,
    k: usize,
    quad: &QuadratureConfig,
) -> Result<ReflectionMatrix> {
    scene.uav(tx)?;
    scene.uav(rx)?;
    let field = ClutterField::new(scene, GroundNodes::area(&scene.grid, quad.subdivisions));
    Ok(ReflectionMatrix {
        tx,
        rx,
        source: SourceTag::Total,
        subcarrier: k,
        value: field.dense(tx, rx, k),
    })
}

/// Ground reflections from everywhere except `excluded`.
pub fn interference_matrix(
    scene: &Scene,
    tx: usize,
    rx: usize,
    excluded: usize,
    k: usize,
    mode: InterferenceMode,
    quad: &QuadratureConfig,
) -> Result<ReflectionMatrix> {
    scene.grid.cell(excluded)?;
    let value = match mode {
        InterferenceMode::Exact => {
            let total = total_clutter_matrix(scene, tx, rx, k, quad)?;
            let own = cell_clutter_matrix(scene, tx, rx, excluded, k, quad)?;
            total.value - own.value
        }
        InterferenceMode::Simplified => {
            scene.uav(tx)?;
            scene.uav(rx)?;
            let field = ClutterField::new(scene, GroundNodes::centers(&scene.grid));
            let own = (field.steering(rx, excluded) * field.steering(tx, excluded).adjoint())
                * field.coefficient(tx, rx, excluded, k);
            field.dense(tx, rx, k) - own
        }
    };
    Ok(ReflectionMatrix {
        tx,
        rx,
        source: SourceTag::Complement(excluded),
        subcarrier: k,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, place_uavs, GridKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scene(l: usize, u: usize, n: usize, ground: f64) -> Scene {
        Scene {
            grid: build_grid(50.0, l, GridKind::Mixed).unwrap(),
            uavs: place_uavs(u, 50.0, 100.0).unwrap(),
            array: ArraySpec::new(n).unwrap(),
            waveform: WaveformSpec::new(16, 64, 200e6).unwrap(),
            target: Target {
                position: Vec3::new(20.0, 30.0, 0.0),
                rcs: 10.0,
                doppler: 0.0,
            },
            ground_rcs: ground,
            pathloss_exponent: 2.0,
            carrier_hz: 24e9,
            light_speed: 299_792_458.0,
        }
    }

    fn rel_fro(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_rcs_zero_matrix() {
        let s = scene(4, 4, 16, 0.0);
        let p = Vec3::new(10.0, 10.0, 0.0);
        assert_eq!(point_matrix(&s, 0, 1, &p, 0.0, 0.0, 3, 2).unwrap().value.norm(), 0.0);
        let q = QuadratureConfig::default();
        assert_eq!(cell_clutter_matrix(&s, 0, 1, 5, 0, &q).unwrap().value.norm(), 0.0);
        assert_eq!(total_clutter_matrix(&s, 0, 1, 0, &q).unwrap().value.norm(), 0.0);
        for mode in [InterferenceMode::Exact, InterferenceMode::Simplified] {
            assert_eq!(interference_matrix(&s, 0, 1, 2, 0, mode, &q).unwrap().value.norm(), 0.0);
        }
    }

    #[test]
    fn nadir_monostatic_closed_form() {
        let mut s = scene(4, 1, 1, 0.0);
        s.uavs[0].position = Vec3::new(25.0, 25.0, 100.0);
        let h = point_matrix(&s, 0, 0, &Vec3::new(25.0, 25.0, 0.0), 10.0, 0.0, 0, 0).unwrap();
        let lambda = s.wavelength();
        let expect = (10.0 * lambda * lambda / ((4.0 * PI).powi(3) * 1e8)).sqrt();
        assert_relative_eq!(h.value[(0, 0)].re, expect, max_relative = 1e-14);
        assert!(h.value[(0, 0)].im.abs() < 1e-14 * expect);
    }

    #[test]
    fn inverse_square_per_leg() {
        let mut s = scene(4, 1, 4, 0.0);
        s.uavs[0].position = Vec3::new(25.0, 25.0, 100.0);
        let near = point_matrix(&s, 0, 0, &Vec3::new(25.0, 25.0, 0.0), 10.0, 0.0, 5, 0).unwrap();
        s.uavs[0].position = Vec3::new(25.0, 25.0, 200.0);
        let far = point_matrix(&s, 0, 0, &Vec3::new(25.0, 25.0, 0.0), 10.0, 0.0, 5, 0).unwrap();
        assert_relative_eq!(far.value.norm() * 4.0, near.value.norm(), max_relative = 1e-12);
    }

    #[test]
    fn point_matrix_is_rank_one() {
        let s = scene(4, 4, 16, 25.0);
        let h = point_matrix(&s, 0, 3, &Vec3::new(7.0, 41.0, 0.0), 10.0, 0.0, 11, 3).unwrap();
        let sv = h.value.singular_values();
        let mut v: Vec<f64> = sv.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(v[1] < 1e-10 * v[0]);
    }

    #[test]
    fn rcs_linearity() {
        let s = scene(4, 4, 16, 0.0);
        let p = Vec3::new(7.0, 41.0, 0.0);
        let a = point_matrix(&s, 1, 2, &p, 3.0, 0.0, 4, 0).unwrap();
        let b = point_matrix(&s, 1, 2, &p, 12.0, 0.0, 4, 0).unwrap();
        assert_relative_eq!(b.value.norm(), 2.0 * a.value.norm(), max_relative = 1e-13);
    }

    #[test]
    fn single_node_quadrature_is_center_term() {
        let s = scene(6, 4, 16, 25.0);
        let q1 = QuadratureConfig::new(1).unwrap();
        let cell = 9;
        let h = cell_clutter_matrix(&s, 0, 2, cell, 0, &q1).unwrap();
        let c = s.grid.cells[cell].center;
        let path = s.path(0, &c, 2, 0.0).unwrap();
        let d = s.grid.cell_size;
        let amp = s.ground_density() * d * d / (path.d_tx * path.d_rx);
        let expect = (s.steering(2, &c).unwrap() * s.steering(0, &c).unwrap().adjoint()) * Complex64::new(amp, 0.0);
        assert!(rel_fro(&h.value, &expect) < 1e-13);
    }

    #[test]
    fn quadrature_refinement_converges() {
        let s = scene(6, 4, 16, 25.0);
        let h8 = cell_clutter_matrix(&s, 1, 2, 17, 0, &QuadratureConfig::new(8).unwrap()).unwrap();
        let h16 = cell_clutter_matrix(&s, 1, 2, 17, 0, &QuadratureConfig::new(16).unwrap()).unwrap();
        assert!((&h8.value - &h16.value).norm() < 0.01 * h8.value.norm());
    }

    #[test]
    fn conservation_over_cells() {
        let s = scene(4, 4, 16, 25.0);
        for q in [1, 4] {
            let quad = QuadratureConfig::new(q).unwrap();
            for k in [0, 13] {
                let total = total_clutter_matrix(&s, 0, 3, k, &quad).unwrap().value;
                let mut sum = CMatrix::zeros(16, 16);
                for c in s.grid.base_cells() {
                    sum += cell_clutter_matrix(&s, 0, 3, c.index, k, &quad).unwrap().value;
                }
                assert!(rel_fro(&sum, &total) < 1e-10);
                let excl = interference_matrix(&s, 0, 3, 2, k, InterferenceMode::Exact, &quad).unwrap();
                let own = cell_clutter_matrix(&s, 0, 3, 2, k, &quad).unwrap();
                assert!(rel_fro(&(excl.value + own.value), &total) < 1e-12);
            }
        }
    }

    #[test]
    fn whole_area_quadrature_oracle() {
        let s = scene(2, 4, 4, 25.0);
        let q = 4;
        let quad = QuadratureConfig::new(q).unwrap();
        let total = total_clutter_matrix(&s, 0, 1, 7, &quad).unwrap().value;
        // direct midpoint rule with L*Q nodes per axis over [0, l]^2
        let m = 2 * q;
        let h = 50.0 / m as f64;
        let lambda = s.wavelength();
        let spacing = s.waveform.subcarrier_spacing();
        let coef = lambda * 25f64.sqrt() / ((4.0 * PI).powf(1.5) * 2500.0);
        let mut oracle = CMatrix::zeros(4, 4);
        for j in 0..m {
            for i in 0..m {
                let p = Vec3::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h, 0.0);
                let dt = (s.uavs[0].position - p).norm();
                let dr = (s.uavs[1].position - p).norm();
                let tau = (dt + dr) / s.light_speed;
                let phase = Complex64::cis(-2.0 * PI * tau * spacing * 7.0);
                let g = s.steering(1, &p).unwrap() * s.steering(0, &p).unwrap().adjoint();
                oracle += g * (phase * coef * h * h / (dt * dr));
            }
        }
        assert!(rel_fro(&total, &oracle) < 1e-12);
    }

    #[test]
    fn applied_form_matches_dense() {
        let s = scene(5, 4, 16, 25.0);
        let field = ClutterField::new(&s, GroundNodes::centers(&s.grid));
        let w = s.steering(0, &s.grid.cells[3].center).unwrap();
        let dense = field.dense(0, 2, 5);
        let applied = field.apply(0, 2, 5, &w, None);
        assert!((&dense * &w - &applied).norm() < 1e-12 * applied.norm());
        let v = s.steering(2, &s.grid.cells[3].center).unwrap();
        let bil = field.bilinear(0, 2, &v, &w, [5])[0];
        let direct = v.dotc(&(&dense * &w));
        assert!((bil - direct).norm() < 1e-12 * direct.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn swap_preserves_frobenius(px in 0.0..50.0, py in 0.0..50.0, tx in 0usize..4, rx in 0usize..4, k in 0usize..64) {
            let s = scene(4, 4, 16, 0.0);
            let p = Vec3::new(px, py, 0.0);
            let a = point_matrix(&s, tx, rx, &p, 10.0, 0.0, k, 0).unwrap();
            let b = point_matrix(&s, rx, tx, &p, 10.0, 0.0, k, 0).unwrap();
            prop_assert!((a.value.norm() - b.value.norm()).abs() <= 1e-12 * a.value.norm());
            // G swaps to its conjugate transpose; the scalar gain is symmetric
            let gain = point_gain(&s, &s.path(tx, &p, rx, 0.0).unwrap(), 10.0, k, 0);
            let expect = a.value.adjoint() * (gain / gain.conj());
            prop_assert!((&b.value - &expect).norm() <= 1e-12 * a.value.norm());
        }
    }
}
