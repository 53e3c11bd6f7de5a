//! Result files: CSV tables written atomically plus a TOML sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use kitune::io::fmt_num;
use kitune::Trace;
use serde::Serialize;

use crate::failure::Failure;

/// One named result file held in memory until the scenario succeeds.
#[derive(Clone, Debug)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Output {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }

    pub fn trace(name: impl Into<String>, trace: &Trace) -> Result<Self, Failure> {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        Ok(Self::new(name, buf))
    }

    pub fn table(name: impl Into<String>, header: &[&str], rows: &[Vec<f64>]) -> Result<Self, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Failure::io(format!("csv: {e}"));
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r.iter().map(|&x| fmt_num(x))).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::io(format!("csv: {e}")))?;
        Ok(Self::new(name, bytes))
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self::new(name, text.into_bytes())
    }
}

/// Sidecar describing a scenario run.
#[derive(Serialize)]
pub struct Meta<'a> {
    pub scenario: &'a str,
    pub figure: &'a str,
    pub description: &'a str,
    pub seed: u64,
    pub files: Vec<String>,
    pub config: &'a crate::config::Config,
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    let io = |e: std::io::Error| Failure::io(format!("cannot write {}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

/// Writes every output and the `<id>.meta.toml` sidecar.
pub fn write_all(dir: &Path, outputs: &[Output], meta: &Meta) -> Result<Vec<PathBuf>, Failure> {
    let mut paths = Vec::new();
    for o in outputs {
        paths.push(write_atomic(dir, &o.name, &o.bytes)?);
    }
    let text = toml::to_string(meta).map_err(|e| Failure::io(format!("metadata: {e}")))?;
    paths.push(write_atomic(dir, &format!("{}.meta.toml", meta.scenario), text.as_bytes())?);
    Ok(paths)
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.csv", b"x\n").unwrap();
        write_atomic(dir.path(), "a.csv", b"y\n").unwrap();
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("a.csv")]);
        assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), b"y\n");
    }

    #[test]
    fn linspace_hits_both_ends() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
