//! JSON Lines snapshot streams and CSV time series.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Configuration, Snapshot};

/// Formats every float with 17 significant digits so values round-trip.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundTripFormatter;

impl serde_json::ser::Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serializes `value` as one compact JSON line with round-trip floats.
pub fn to_line<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTripFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRecord {
    pub t: f64,
    pub x: Vec<Vec<f64>>,
    pub psi: f64,
    pub f_norm: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub phi: f64,
}

impl From<&Snapshot> for SnapshotRecord {
    fn from(s: &Snapshot) -> Self {
        Self {
            t: s.t,
            x: s.p.points(),
            psi: s.psi,
            f_norm: s.f_norm,
            d_minus: s.d_minus,
            d_plus: s.d_plus,
            phi: s.phi,
        }
    }
}

impl SnapshotRecord {
    pub fn into_snapshot(self) -> crate::error::Result<Snapshot> {
        Ok(Snapshot {
            t: self.t,
            p: Configuration::from_points(&self.x)?,
            psi: self.psi,
            f_norm: self.f_norm,
            d_minus: self.d_minus,
            d_plus: self.d_plus,
            phi: self.phi,
        })
    }
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Corrupt { line: usize, message: String },

    #[error("snapshot stream is empty")]
    Empty,
}

pub fn write_snapshots<W: Write>(mut out: W, snapshots: &[Snapshot]) -> io::Result<()> {
    for s in snapshots {
        let line = to_line(&SnapshotRecord::from(s)).map_err(io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Reads a snapshot stream; blank lines are skipped and errors name the
/// 1-based line number.
pub fn read_snapshots<R: BufRead>(input: R) -> Result<Vec<Snapshot>, SnapshotError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| SnapshotError::Corrupt { line: i + 1, message };
        let record: SnapshotRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        out.push(record.into_snapshot().map_err(|e| corrupt(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(SnapshotError::Empty);
    }
    Ok(out)
}

pub fn write_timeseries<W: Write>(mut out: W, snapshots: &[Snapshot]) -> io::Result<()> {
    writeln!(out, "t,psi,f_norm,d_minus,d_plus,phi")?;
    for s in snapshots {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.psi, s.f_norm, s.d_minus, s.d_plus, s.phi
        )?;
    }
    out.flush()
}
