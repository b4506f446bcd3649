//! Field snapshots: a `key: value` text header closed by `end_header`,
//! followed by the coefficients as little-endian `f64`, x index slowest.
//!
//! ```text
//! format: darcy-da-snapshot 1
//! t: 2
//! lengths: 4 1 1
//! modes: 96 1 49
//! parity: COS,COS,SIN
//! end_header
//! <96 * 1 * 49 * 8 bytes>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{Grid, Parity};

const MAGIC: &str = "darcy-da-snapshot 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

pub fn write_snapshot<W: Write>(mut w: W, t: f64, field: &SpectralField) -> std::io::Result<()> {
    let g = field.grid();
    writeln!(w, "format: {MAGIC}")?;
    writeln!(w, "t: {t:?}")?;
    writeln!(w, "lengths: {:?} {:?} {:?}", g.lengths[0], g.lengths[1], g.lengths[2])?;
    writeln!(w, "modes: {} {} {}", g.n[0], g.n[1], g.n[2])?;
    writeln!(w, "parity: {}", field.parity())?;
    writeln!(w, "end_header")?;
    let mut bytes = Vec::with_capacity(8 * field.coeffs().len());
    for c in field.coeffs() {
        bytes.extend_from_slice(&c.to_le_bytes());
    }
    w.write_all(&bytes)?;
    w.flush()
}

fn parse_triple<T: std::str::FromStr>(v: &str) -> Option<[T; 3]> {
    let mut it = v.split_whitespace().map(|s| s.parse::<T>().ok());
    let out = [it.next()??, it.next()??, it.next()??];
    it.next().is_none().then_some(out)
}

/// Reads a snapshot; `label` names the source in error messages.
pub fn read_snapshot<R: BufRead>(mut r: R, label: &Path) -> Result<Snapshot> {
    let bad = |message: String| Error::Snapshot { path: label.to_path_buf(), message };
    let (mut magic, mut t, mut lengths, mut modes, mut parity) = (None, None, None, None, None);
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("missing end_header".into()));
        }
        let line = line.trim_end_matches(['\n', '\r']);
        if line == "end_header" {
            break;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| bad(format!("malformed header line {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "format" => magic = Some(value.to_string()),
            "t" => t = Some(value.parse::<f64>().map_err(|_| bad(format!("bad t {value:?}")))?),
            "lengths" => lengths = Some(parse_triple::<f64>(value).ok_or_else(|| bad(format!("bad lengths {value:?}")))?),
            "modes" => modes = Some(parse_triple::<usize>(value).ok_or_else(|| bad(format!("bad modes {value:?}")))?),
            "parity" => parity = Some(Parity::parse(value).ok_or_else(|| bad(format!("bad parity {value:?}")))?),
            other => return Err(bad(format!("unknown header key {other:?}"))),
        }
    }
    if magic.as_deref() != Some(MAGIC) {
        return Err(bad(format!("expected format {MAGIC:?}")));
    }
    let missing = |k: &str| bad(format!("header lacks {k}"));
    let t = t.ok_or_else(|| missing("t"))?;
    let lengths = lengths.ok_or_else(|| missing("lengths"))?;
    let modes = modes.ok_or_else(|| missing("modes"))?;
    let parity = parity.ok_or_else(|| missing("parity"))?;
    if lengths[2] != 1.0 {
        return Err(bad(format!("vertical length must be 1, found {}", lengths[2])));
    }
    let grid = Grid::new(lengths[0], lengths[1], modes[0], modes[1], modes[2]).map_err(|e| bad(e.to_string()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(bad(format!("expected {} data bytes, found {}", 8 * grid.len(), bytes.len())));
    }
    let coeffs = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8"))).collect();
    let field = SpectralField::from_coeffs(grid, parity, coeffs)?;
    Ok(Snapshot { t, field })
}

pub fn save_snapshot(path: impl AsRef<Path>, t: f64, field: &SpectralField) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), t, field)?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    read_snapshot(BufReader::new(File::open(path)?), path)
}
