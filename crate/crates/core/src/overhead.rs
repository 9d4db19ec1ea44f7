//! Uplink bit accounting per fusion method.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Raw samples forwarded for compressive sensing.
    Cs,
    Mimore,
    Mure,
    Mupe,
    /// Single full-duplex UAV; reports nothing.
    Benchmark,
}

impl Method {
    pub const REPORTING: [Method; 4] = [Method::Cs, Method::Mimore, Method::Mure, Method::Mupe];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cs => "cs",
            Method::Mimore => "mimore",
            Method::Mure => "mure",
            Method::Mupe => "mupe",
            Method::Benchmark => "benchmark",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Method::Cs => "CS",
            Method::Mimore => "MIMORE",
            Method::Mure => "MuRE",
            Method::Mupe => "MuPE",
            Method::Benchmark => "Benchmark",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Ok(Method::Cs),
            "mimore" => Ok(Method::Mimore),
            "mure" => Ok(Method::Mure),
            "mupe" => Ok(Method::Mupe),
            "benchmark" => Ok(Method::Benchmark),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverheadConfig {
    /// Cells reported per UAV.
    pub cells: u64,
    pub uavs: u64,
    pub symbols: u64,
    pub subcarriers: u64,
    pub elements: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub method: Method,
    pub tx_bits: u64,
    pub rx_bits: u64,
    pub config: OverheadConfig,
}

/// Bits sent by each UAV and received by the fusion center.
pub fn compute_overhead(method: Method, cfg: OverheadConfig) -> Result<OverheadReport> {
    let OverheadConfig {
        cells,
        uavs,
        symbols,
        subcarriers,
        elements,
    } = cfg;
    if [cells, uavs, symbols, subcarriers, elements].contains(&0) {
        return Err(Error::InvalidParameter("overhead counts must be positive".into()));
    }
    let overflow = || Error::InvalidParameter("bit count overflows 64 bits".into());
    let tx_bits = match method {
        Method::Mure => cells.checked_mul(32),
        Method::Mimore => cells.checked_mul(64),
        Method::Mupe => Some(64),
        Method::Cs => [symbols, subcarriers, elements, cells]
            .iter()
            .try_fold(64u64, |acc, &x| acc.checked_mul(x)),
        Method::Benchmark => {
            return Err(Error::InvalidParameter(
                "the benchmark has no reporting overhead".into(),
            ))
        }
    }
    .ok_or_else(overflow)?;
    Ok(OverheadReport {
        method,
        tx_bits,
        rx_bits: tx_bits.checked_mul(uavs).ok_or_else(overflow)?,
        config: cfg,
    })
}

/// Cells reported per UAV: the whole grid, or the grid minus the UAV's own
/// cells (largest set when sets differ in size).
pub fn reported_cells(total: u64, own_cells: Option<u64>) -> u64 {
    own_cells.map_or(total, |own| total.saturating_sub(own))
}

/// Plain-text table with one row per reporting method.
pub fn render_table(cfg: OverheadConfig) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "P={} U={} Ms={} Nc={} N={}",
        cfg.cells, cfg.uavs, cfg.symbols, cfg.subcarriers, cfg.elements
    );
    let _ = writeln!(
        out,
        "{:<8} {:>16} {:>14} {:>18} {:>16}",
        "method", "tx [bits]", "tx [Kbit]", "FC rx [bits]", "FC rx [Kbit]"
    );
    for m in Method::REPORTING {
        let r = compute_overhead(m, cfg)?;
        let _ = writeln!(
            out,
            "{:<8} {:>16} {:>14.3} {:>18} {:>16.3}",
            m.display_name(),
            r.tx_bits,
            r.tx_bits as f64 / 1000.0,
            r.rx_bits,
            r.rx_bits as f64 / 1000.0
        );
    }
    out.push_str("Kbit = 1000 bits\n");
    Ok(out)
}
