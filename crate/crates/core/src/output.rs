//! Serialized artifacts: versioned JSON envelopes, headered CSV, and
//! atomic file writes.
//!
//! Every float is written with 17 significant digits so values round-trip
//! exactly. Run metadata (version, thread count, wall-clock time) lives in a
//! separate `metadata` field after the `payload`, so two runs of the same
//! configuration produce byte-identical payloads.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::{Error, Result};

/// Version of the JSON envelope layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Compact JSON with every `f64` written as `d.dddddddddddddddde<exp>`.
struct ScientificFormatter;

impl Formatter for ScientificFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// A float with 17 significant digits. Non-finite values print as Rust
/// spells them (`NaN`, `inf`); JSON output maps them to `null` instead.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Serialize `value` as compact JSON with the float convention above.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, ScientificFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub threads: usize,
    /// Seconds since the Unix epoch when the artifact was written.
    pub created_unix: u64,
}

impl Metadata {
    pub fn now() -> Self {
        Metadata {
            version: env!("CARGO_PKG_VERSION"),
            threads: rayon::current_num_threads(),
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    kind: &'a str,
    payload: &'a T,
    metadata: Metadata,
}

/// `{"schema":1,"kind":…,"payload":…,"metadata":…}` followed by a newline.
pub fn envelope<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    let mut s = to_json(&Envelope {
        schema: SCHEMA_VERSION,
        kind,
        payload,
        metadata: Metadata::now(),
    })?;
    s.push('\n');
    Ok(s)
}

/// Headered CSV built row by row.
#[derive(Clone, Debug)]
pub struct Csv {
    text: String,
}

/// One CSV cell.
pub enum Cell {
    Int(i128),
    Float(f64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i128)
            }
        }
    )*};
}
int_cell!(i8, i32, i64, u32, u64, usize);

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = Cell>) {
        let row: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(f) => fmt_f64(f),
            })
            .collect();
        self.text.push_str(&row.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Write through a temporary file in the same directory, then rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &v in &[0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = to_json(&v).unwrap();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(to_json(&[1.5, f64::NAN]).unwrap(), "[1.5000000000000000e0,null]");
        assert_eq!(to_json(&-3i64).unwrap(), "-3");
    }

    #[test]
    fn envelope_layout() {
        let s = envelope("test", &vec![2u32]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["kind"], "test");
        assert_eq!(v["payload"][0], 2);
        assert!(v["metadata"]["threads"].as_u64().unwrap() >= 1);
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn csv_header_only() {
        let csv = Csv::new(&["x", "re"]);
        assert_eq!(csv.finish(), "x,re\n");
        let mut csv = Csv::new(&["d", "v"]);
        csv.row([Cell::from(3u64), Cell::from(0.25)]);
        assert_eq!(csv.finish(), "d,v\n3,2.5000000000000000e-1\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        let missing = dir.path().join("no/such/dir/out.json");
        let err = write_atomic(&missing, "x").unwrap_err();
        assert!(err.to_string().contains("no/such/dir"), "{err}");
    }
}
