//! Simulation configuration: TOML file, named presets and dotted overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::beamforming::{BeamformerConfig, DiagonalLoading};
use crate::channel::{ClutterFidelity, InterferenceMode};
use crate::geometry::{integer_sqrt, GridKind};
use crate::overhead::Method;
use crate::signal::{dbm_to_watts, NoiseSpec, WaveformSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Side of the square area, m.
    pub side_length: f64,
    /// Base cells per side, `L`.
    pub divisions: usize,
    pub uavs: usize,
    /// UAV altitude, m.
    pub altitude: f64,
    /// Array elements per UAV, a perfect square.
    pub elements: usize,
    pub carrier_hz: f64,
    pub pathloss_exponent: f64,
    /// Total ground RCS, m^2.
    pub ground_rcs: f64,
    /// Target RCS, m^2.
    pub target_rcs: f64,
    /// Target Doppler shift, Hz.
    pub doppler: f64,
    pub light_speed: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            side_length: 50.0,
            divisions: 18,
            uavs: 9,
            altitude: 100.0,
            elements: 16,
            carrier_hz: 24e9,
            pathloss_exponent: 2.0,
            ground_rcs: 25.0,
            target_rcs: 10.0,
            doppler: 0.0,
            light_speed: 299_792_458.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformConfig {
    pub symbols: usize,
    pub subcarriers: usize,
    pub bandwidth: f64,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            symbols: 16,
            subcarriers: 64,
            bandwidth: 200e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    /// Noise power per received sample, dBm. Use a very low value for noiseless runs.
    pub noise_dbm: f64,
    /// Disables noise entirely.
    pub noiseless: bool,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            noise_dbm: -109.0,
            noiseless: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadingMode {
    TraceRelative,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamformerSection {
    /// `fixed` adds `loading` to the covariance diagonal as is; `trace-relative`
    /// scales it by the interference power per element.
    pub loading_mode: LoadingMode,
    pub loading: f64,
    pub interference: InterferenceMode,
    /// Nodes per cell side when the interference is integrated exactly.
    pub quadrature: usize,
}

impl Default for BeamformerSection {
    fn default() -> Self {
        Self {
            loading_mode: LoadingMode::Fixed,
            loading: 1e-6,
            interference: InterferenceMode::Simplified,
            quadrature: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterSection {
    /// Nodes per cell side for the known ground response.
    pub quadrature: usize,
    pub fidelity: ClutterFidelity,
}

impl Default for ClutterSection {
    fn default() -> Self {
        Self {
            quadrature: 4,
            fidelity: ClutterFidelity::CenterSubcarrier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizerSection {
    pub thresholds: Vec<f64>,
}

impl Default for LocalizerSection {
    fn default() -> Self {
        Self {
            thresholds: vec![1.0, 0.9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub grids: Vec<GridKind>,
    /// Snap every sampled target to its nearest cell center.
    pub pin_target: bool,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 1,
            methods: vec![Method::Mimore, Method::Mure, Method::Mupe, Method::Benchmark],
            grids: vec![GridKind::Base, GridKind::Mixed],
            pin_target: false,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverheadSection {
    /// Exclude each UAV's own cells from its report.
    pub own_cells: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scene: SceneConfig,
    pub waveform: WaveformConfig,
    pub radio: RadioConfig,
    pub beamformer: BeamformerSection,
    pub clutter: ClutterSection,
    pub localizer: LocalizerSection,
    pub run: RunSection,
    pub overhead: OverheadSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Small grid for quick runs: `L = 12`, mixed grid only.
    Desk,
    /// Full-size defaults: `L = 18`, both grid kinds.
    Paper,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected desk or paper)"
            ))),
        }
    }
}

impl SimConfig {
    pub fn preset(p: Preset) -> Self {
        let mut cfg = Self::default();
        if p == Preset::Desk {
            cfg.scene.divisions = 12;
            cfg.run.grids = vec![GridKind::Mixed];
        }
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Applies `section.key=value`. Values are parsed as TOML, falling back
    /// to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = parse_value(raw);
        let mut doc = toml::Value::try_from(&*self).expect("config serializes");
        let mut node = &mut doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("unknown key '{key}'")))?;
            let last = i + 1 == parts.len();
            if !table.contains_key(*part) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
            if last {
                table.insert(part.to_string(), value.clone());
                break;
            }
            node = table.get_mut(*part).expect("checked above");
        }
        *self = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("bad value for '{key}': {e}")))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scene;
        let bad = |m: String| Err(Error::Config(m));
        if !(s.side_length > 0.0 && s.side_length.is_finite()) {
            return bad(format!("scene.side_length must be positive, got {}", s.side_length));
        }
        if s.divisions < 2 {
            return bad(format!("scene.divisions must be at least 2, got {}", s.divisions));
        }
        if s.uavs == 0 || integer_sqrt(s.uavs).is_none() {
            return bad(format!("scene.uavs must be a positive perfect square, got {}", s.uavs));
        }
        if !(s.altitude > 0.0) {
            return bad(format!("scene.altitude must be positive, got {}", s.altitude));
        }
        if s.elements == 0 || integer_sqrt(s.elements).is_none() {
            return bad(format!(
                "scene.elements must be a positive perfect square, got {}",
                s.elements
            ));
        }
        if !(s.ground_rcs >= 0.0 && s.target_rcs >= 0.0) {
            return bad("RCS values must be nonnegative".into());
        }
        if !(s.carrier_hz > 0.0 && s.light_speed > 0.0 && s.pathloss_exponent > 0.0) {
            return bad("carrier, light speed and pathloss exponent must be positive".into());
        }
        WaveformSpec::new(self.waveform.symbols, self.waveform.subcarriers, self.waveform.bandwidth)
            .map_err(|e| Error::Config(e.to_string()))?;
        if !self.radio.tx_power_dbm.is_finite() || !self.radio.noise_dbm.is_finite() {
            return bad("radio powers must be finite".into());
        }
        if !(self.beamformer.loading > 0.0) {
            return bad("beamformer.loading must be positive".into());
        }
        if self.beamformer.quadrature == 0 || self.clutter.quadrature == 0 {
            return bad("quadrature needs at least one node".into());
        }
        if self.localizer.thresholds.is_empty() {
            return bad("localizer.thresholds is empty".into());
        }
        if let Some(t) = self
            .localizer
            .thresholds
            .iter()
            .find(|t| !(**t > 0.0 && **t <= 1.0))
        {
            return bad(format!("threshold {t} outside (0, 1]"));
        }
        if self.run.trials == 0 {
            return bad("run.trials must be positive".into());
        }
        if self.run.methods.is_empty() || self.run.grids.is_empty() {
            return bad("run.methods and run.grids must be non-empty".into());
        }
        if self.run.methods.contains(&Method::Cs) {
            return bad("cs is an overhead-only method and cannot be simulated".into());
        }
        Ok(())
    }

    pub fn waveform_spec(&self) -> Result<WaveformSpec> {
        WaveformSpec::new(self.waveform.symbols, self.waveform.subcarriers, self.waveform.bandwidth)
    }

    pub fn tx_power(&self) -> f64 {
        dbm_to_watts(self.radio.tx_power_dbm)
    }

    pub fn noise(&self) -> NoiseSpec {
        if self.radio.noiseless {
            NoiseSpec::silent()
        } else {
            NoiseSpec::from_dbm(self.radio.noise_dbm)
        }
    }

    pub fn beamformer_config(&self) -> BeamformerConfig {
        let b = &self.beamformer;
        BeamformerConfig {
            tx_power: self.tx_power(),
            loading: match b.loading_mode {
                LoadingMode::TraceRelative => DiagonalLoading::TraceRelative(b.loading),
                LoadingMode::Fixed => DiagonalLoading::Fixed(b.loading),
            },
            mode: b.interference,
            quadrature: b.quadrature,
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    #[derive(Deserialize)]
    struct Holder {
        v: toml::Value,
    }
    toml::from_str::<Holder>(&format!("v = {raw}"))
        .map(|h| h.v)
        .unwrap_or_else(|_| toml::Value::String(raw.to_string()))
}
