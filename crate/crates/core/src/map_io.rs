//! Plain-text RCS map files.
//!
//! ```text
//! # uavsense rcs map v1
//! # provenance: mimore
//! # grid: mixed
//! # side_length: 50
//! # divisions: 12
//! # cell_size: 4.166666666666667
//! # layer: base 12 12
//! 1.5e0 2e-3 ...        (one line per row, y ascending, x ascending)
//! # layer: overlay 11 11
//! ...
//! ```
//!
//! Unobserved cells are written as `nan`. Values use the shortest exact
//! decimal representation, so files round-trip bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::estimation::{Provenance, RcsMap};
use crate::geometry::{GridKind, GridSpec};
use crate::{Error, Result};

const MAGIC: &str = "# uavsense rcs map v1";

/// Grid metadata recovered from a map file.
#[derive(Debug, Clone, PartialEq)]
pub struct MapHeader {
    pub provenance: Provenance,
    pub kind: GridKind,
    pub side_length: f64,
    pub divisions: usize,
    pub cell_size: f64,
}

pub fn render_map(map: &RcsMap, grid: &GridSpec) -> Result<String> {
    if map.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "map has {} cells, grid has {}",
            map.len(),
            grid.len()
        )));
    }
    let l = grid.divisions;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "# provenance: {}", map.provenance.label());
    let _ = writeln!(out, "# grid: {}", grid.kind.as_str());
    let _ = writeln!(out, "# side_length: {}", grid.side_length);
    let _ = writeln!(out, "# divisions: {l}");
    let _ = writeln!(out, "# cell_size: {}", grid.cell_size);
    let mut layers = vec![("base", l, 0)];
    if grid.kind == GridKind::Mixed {
        layers.push(("overlay", l - 1, l * l));
    }
    for (name, n, offset) in layers {
        let _ = writeln!(out, "# layer: {name} {n} {n}");
        for j in 0..n {
            let row: Vec<String> = (0..n)
                .map(|i| {
                    let p = offset + j * n + i;
                    if map.observed[p] {
                        format!("{:e}", map.values[p])
                    } else {
                        "nan".to_string()
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    Ok(out)
}

pub fn parse_map(text: &str) -> std::result::Result<(MapHeader, RcsMap), String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err("missing map header".into());
    }
    let mut field = |name: &str| -> std::result::Result<String, String> {
        let line = lines.next().ok_or(format!("missing '{name}'"))?;
        line.strip_prefix(&format!("# {name}: "))
            .map(|s| s.trim().to_string())
            .ok_or(format!("expected '{name}', found '{line}'"))
    };
    let provenance = field("provenance")?;
    let provenance =
        Provenance::parse(&provenance).ok_or(format!("unknown provenance '{provenance}'"))?;
    let kind: GridKind = field("grid")?.parse().map_err(|e| format!("{e}"))?;
    let side_length: f64 = field("side_length")?.parse().map_err(|e| format!("{e}"))?;
    let divisions: usize = field("divisions")?.parse().map_err(|e| format!("{e}"))?;
    let cell_size: f64 = field("cell_size")?.parse().map_err(|e| format!("{e}"))?;
    let mut values = Vec::new();
    let mut observed = Vec::new();
    let mut layers = 0;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("# layer:") {
            layers += 1;
            continue;
        }
        for tok in line.split_whitespace() {
            if tok == "nan" {
                values.push(0.0);
                observed.push(false);
            } else {
                values.push(tok.parse::<f64>().map_err(|e| format!("bad value '{tok}': {e}"))?);
                observed.push(true);
            }
        }
    }
    let expected = match kind {
        GridKind::Base => divisions * divisions,
        GridKind::Mixed => divisions * divisions + (divisions - 1) * (divisions - 1),
    };
    let expected_layers = if kind == GridKind::Mixed { 2 } else { 1 };
    if values.len() != expected || layers != expected_layers {
        return Err(format!(
            "expected {expected} values in {expected_layers} layers, found {} in {layers}",
            values.len()
        ));
    }
    Ok((
        MapHeader {
            provenance,
            kind,
            side_length,
            divisions,
            cell_size,
        },
        RcsMap {
            values,
            observed,
            provenance,
        },
    ))
}

pub fn write_map(path: &Path, map: &RcsMap, grid: &GridSpec) -> Result<()> {
    std::fs::write(path, render_map(map, grid)?).map_err(|e| Error::io(path, e))
}

pub fn read_map(path: &Path) -> Result<(MapHeader, RcsMap)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text).map_err(|msg| Error::Parse {
        path: path.display().to_string(),
        msg,
    })
}
