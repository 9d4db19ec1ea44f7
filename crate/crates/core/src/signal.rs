//! OFDM frames and received-symbol synthesis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::beamforming::{BeamformerPair, BeamformerTable};
use crate::channel::{point_gain, ClutterFidelity, ClutterField, GroundNodes, Scene};
use crate::exec::{map_indexed, Exec};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    /// OFDM symbols per frame, `M_s`.
    pub symbols: usize,
    /// Subcarriers per symbol, `N_c`.
    pub subcarriers: usize,
    /// Occupied bandwidth, Hz.
    pub bandwidth: f64,
}

impl WaveformSpec {
    pub fn new(symbols: usize, subcarriers: usize, bandwidth: f64) -> Result<Self> {
        if symbols == 0 || subcarriers == 0 || !(bandwidth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waveform needs M_s >= 1, N_c >= 1 and positive bandwidth, got ({symbols}, {subcarriers}, {bandwidth})"
            )));
        }
        Ok(Self {
            symbols,
            subcarriers,
            bandwidth,
        })
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth / self.subcarriers as f64
    }

    /// `T_o = 1 / delta_f`; no cyclic prefix.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing()
    }

    pub fn len(&self) -> usize {
        self.symbols * self.subcarriers
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `e^{-j 2 pi tau delta_f k}` for every subcarrier.
    pub fn delay_phases(&self, delay: f64) -> Vec<Complex64> {
        let step = -2.0 * PI * delay * self.subcarrier_spacing();
        (0..self.subcarriers)
            .map(|k| Complex64::cis(step * k as f64))
            .collect()
    }

    /// `e^{j 2 pi f_D T_o l}` for every symbol.
    pub fn doppler_phases(&self, doppler: f64) -> Vec<Complex64> {
        let step = 2.0 * PI * doppler * self.symbol_duration();
        (0..self.symbols)
            .map(|l| Complex64::cis(step * l as f64))
            .collect()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Transmitted,
    Received,
    DataFree,
}

/// `M_s x N_c` complex symbols stored row-major as `[l][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub symbols: usize,
    pub subcarriers: usize,
    pub values: Vec<Complex64>,
    pub kind: BlockKind,
    /// Ground fidelity the block was synthesized with, when it carries clutter.
    pub clutter_fidelity: Option<ClutterFidelity>,
}

impl SymbolBlock {
    pub fn zeros(wave: &WaveformSpec, kind: BlockKind) -> Self {
        Self {
            symbols: wave.symbols,
            subcarriers: wave.subcarriers,
            values: vec![Complex64::new(0.0, 0.0); wave.len()],
            kind,
            clutter_fidelity: None,
        }
    }

    pub fn get(&self, l: usize, k: usize) -> Complex64 {
        self.values[l * self.subcarriers + k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks_exact(self.subcarriers)
    }

    pub fn check_shape(&self, other: &SymbolBlock) -> Result<()> {
        if self.symbols != other.symbols || self.subcarriers != other.subcarriers {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} block vs {}x{} block",
                self.symbols, self.subcarriers, other.symbols, other.subcarriers
            )));
        }
        Ok(())
    }

    /// Complex CSV, one OFDM symbol per line, entries as `re+imj`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|z| format!("{:e}{:+e}j", z.re, z.im)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Complex noise power per received sample after beamforming, watts.
    pub power: f64,
}

impl NoiseSpec {
    pub fn from_dbm(dbm: f64) -> Self {
        Self {
            power: dbm_to_watts(dbm),
        }
    }

    pub fn silent() -> Self {
        Self { power: 0.0 }
    }
}

const QPSK: [Complex64; 4] = [
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

/// Draws a frame of unit-modulus QPSK symbols.
pub fn generate_frame<R: Rng + ?Sized>(wave: &WaveformSpec, rng: &mut R) -> SymbolBlock {
    SymbolBlock {
        symbols: wave.symbols,
        subcarriers: wave.subcarriers,
        values: (0..wave.len())
            .map(|_| QPSK[rng.random_range(0..4)])
            .collect(),
        kind: BlockKind::Transmitted,
        clutter_fidelity: None,
    }
}

/// Known ground response `w_rx^H (H_{p} + H_{pbar}) w_tx` of one beamformer pair.
#[derive(Debug, Clone, PartialEq)]
pub enum ClutterTerm {
    Constant(Complex64),
    PerSubcarrier(Vec<Complex64>),
}

impl ClutterTerm {
    pub fn at(&self, k: usize) -> Complex64 {
        match self {
            ClutterTerm::Constant(c) => *c,
            ClutterTerm::PerSubcarrier(v) => v[k],
        }
    }

    pub fn fidelity(&self) -> ClutterFidelity {
        match self {
            ClutterTerm::Constant(_) => ClutterFidelity::CenterSubcarrier,
            ClutterTerm::PerSubcarrier(_) => ClutterFidelity::PerSubcarrier,
        }
    }

    pub fn zero() -> Self {
        ClutterTerm::Constant(Complex64::new(0.0, 0.0))
    }
}

/// Known ground responses for every pair of a [`BeamformerTable`].
#[derive(Debug, Clone)]
pub struct ClutterTable {
    uav_count: usize,
    fidelity: ClutterFidelity,
    terms: Vec<Option<ClutterTerm>>,
}

impl ClutterTable {
    /// Integrates the ground over the base tiling with `quadrature^2` nodes per cell.
    pub fn build(
        scene: &Scene,
        table: &BeamformerTable,
        quadrature: usize,
        fidelity: ClutterFidelity,
        exec: Exec,
    ) -> Result<Self> {
        if quadrature == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
        }
        let uav_count = scene.uavs.len();
        let field = ClutterField::new(scene, GroundNodes::area(&scene.grid, quadrature));
        let pairs: Vec<&BeamformerPair> = table.pairs().collect();
        let terms = map_indexed(exec, pairs.len(), |i| {
            let pair = pairs[i];
            if scene.ground_rcs == 0.0 {
                return ClutterTerm::zero();
            }
            match fidelity {
                ClutterFidelity::CenterSubcarrier => ClutterTerm::Constant(
                    field.bilinear(pair.tx, pair.rx, &pair.w_rx, &pair.w_tx, [0])[0],
                ),
                ClutterFidelity::PerSubcarrier => ClutterTerm::PerSubcarrier(field.bilinear(
                    pair.tx,
                    pair.rx,
                    &pair.w_rx,
                    &pair.w_tx,
                    0..scene.waveform.subcarriers,
                )),
            }
        });
        let mut slots = vec![None; scene.grid.len() * uav_count];
        for (pair, term) in pairs.iter().zip(terms) {
            slots[pair.cell * uav_count + pair.rx] = Some(term);
        }
        Ok(Self {
            uav_count,
            fidelity,
            terms: slots,
        })
    }

    pub fn get(&self, rx: usize, cell: usize) -> Option<&ClutterTerm> {
        self.terms
            .get(cell * self.uav_count + rx)
            .and_then(|t| t.as_ref())
    }

    pub fn fidelity(&self) -> ClutterFidelity {
        self.fidelity
    }
}

/// Target echo through a beamformer pair at `k = 0, l = 0`:
/// `w_rx^H H_{p*} w_tx`, plus the target's bistatic delay.
pub fn target_response(scene: &Scene, pair: &BeamformerPair) -> Result<(Complex64, f64)> {
    let t = &scene.target;
    let path = scene.path(pair.tx, &t.position, pair.rx, t.doppler)?;
    if t.rcs == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), path.delay));
    }
    let g_tx = scene.steering(pair.tx, &t.position)?;
    let g_rx = scene.steering(pair.rx, &t.position)?;
    let gain = point_gain(scene, &path, t.rcs, 0, 0);
    Ok((pair.w_rx.dotc(&g_rx) * g_tx.dotc(&pair.w_tx) * gain, path.delay))
}

/// Received symbols `c_hat` of one receiver for one illuminated cell:
/// ground echo, target echo with per-`(k, l)` phases, and circular gaussian
/// noise of variance `N0` per sample.
pub fn synthesize_received<R: Rng + ?Sized>(
    scene: &Scene,
    pair: &BeamformerPair,
    cell: usize,
    frame: &SymbolBlock,
    clutter: &ClutterTerm,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<SymbolBlock> {
    if pair.cell != cell {
        return Err(Error::ShapeMismatch(format!(
            "beamformer built for cell {} used on cell {cell}",
            pair.cell
        )));
    }
    let wave = &scene.waveform;
    if frame.symbols != wave.symbols || frame.subcarriers != wave.subcarriers {
        return Err(Error::ShapeMismatch("frame does not match waveform".into()));
    }
    let (amp, delay) = target_response(scene, pair)?;
    let delay_ph = wave.delay_phases(delay);
    let doppler_ph = wave.doppler_phases(scene.target.doppler);
    let sigma = (0.5 * noise.power).sqrt();
    let mut values = Vec::with_capacity(wave.len());
    for (l, row) in frame.rows().enumerate() {
        let a_l = amp * doppler_ph[l];
        for (k, c) in row.iter().enumerate() {
            let clean = (clutter.at(k) + a_l * delay_ph[k]) * c;
            let z = if sigma > 0.0 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * sigma, im * sigma)
            } else {
                Complex64::new(0.0, 0.0)
            };
            values.push(clean + z);
        }
    }
    Ok(SymbolBlock {
        symbols: wave.symbols,
        subcarriers: wave.subcarriers,
        values,
        kind: BlockKind::Received,
        clutter_fidelity: Some(clutter.fidelity()),
    })
}

/// `c_bar = c_hat / c`.
pub fn remove_data(received: &SymbolBlock, transmitted: &SymbolBlock) -> Result<SymbolBlock> {
    received.check_shape(transmitted)?;
    let values = received
        .values
        .iter()
        .zip(&transmitted.values)
        .map(|(r, c)| {
            let m = c.norm_sqr();
            assert!(m > 0.0, "zero transmitted symbol");
            r * c.conj() / m
        })
        .collect();
    Ok(SymbolBlock {
        values,
        kind: BlockKind::DataFree,
        ..received.clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subtraction {
    pub block: SymbolBlock,
    /// The block was synthesized with a different ground fidelity than the subtracted term.
    pub fidelity_mismatch: bool,
}

/// Removes the known ground response from a data-free block.
pub fn subtract_known_clutter(block: &SymbolBlock, clutter: &ClutterTerm) -> Subtraction {
    let mut out = block.clone();
    for row in out.values.chunks_exact_mut(block.subcarriers) {
        for (k, v) in row.iter_mut().enumerate() {
            *v -= clutter.at(k);
        }
    }
    out.clutter_fidelity = None;
    Subtraction {
        fidelity_mismatch: block
            .clutter_fidelity
            .is_some_and(|f| f != clutter.fidelity()),
        block: out,
    }
}
