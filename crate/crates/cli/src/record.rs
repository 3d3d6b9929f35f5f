//! Output files and the run record that lists them.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files and remembers their digests.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<OutputDigest>,
}

impl Outputs {
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(OutputDigest {
            path: path.display().to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        self.write(path, &to_json(value)?)
    }

    /// Writes a CSV with `header` and `rows`.
    pub fn write_csv<R, I>(&mut self, path: &Path, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
        self.write(path, &bytes)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// One per invocation. Timestamps aside, the record is a function of the
/// config and seed.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub exit_code: i32,
    pub result: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

impl RunRecord {
    pub fn new(command: String, config: serde_json::Value, started_unix_ms: u128) -> Self {
        RunRecord {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            started_unix_ms,
            finished_unix_ms: started_unix_ms,
            exit_code: 0,
            result: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    /// Writes the record to `path`, or to stderr when there is none.
    pub fn emit(mut self, path: Option<PathBuf>) -> Result<()> {
        self.finished_unix_ms = unix_ms();
        let bytes = to_json(&self)?;
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))
            }
            None => {
                eprint!("{}", String::from_utf8_lossy(&bytes));
                Ok(())
            }
        }
    }
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_written_bytes() {
        let dir = std::env::temp_dir().join(format!("doob-record-{}", std::process::id()));
        let path = dir.join("sub/x.txt");
        let mut out = Outputs::default();
        out.write(&path, b"abc").unwrap();
        assert_eq!(
            out.files[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(std::fs::read(&path).unwrap(), b"abc");
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn sibling_appends() {
        assert_eq!(sibling(Path::new("a/b.json"), ".run.json"), PathBuf::from("a/b.json.run.json"));
    }
}
