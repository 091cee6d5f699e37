use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub hfsem: &'static str,
    pub cli: &'static str,
}

/// JSON summary written next to every command's outputs. Everything except
/// `timestamp` is a function of the inputs and configuration.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub status: &'static str,
    pub error: Option<String>,
    pub versions: Versions,
    pub parallel: bool,
    pub threads: Option<usize>,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub counts: BTreeMap<String, Value>,
    pub details: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// Wall-clock time of the run, RFC 3339. Not reproducible.
    pub timestamp: String,
}

pub fn sha256_file(path: &Path) -> Result<FileDigest> {
    let mut f = File::open(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    let digest = hasher.finalize();
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        bytes,
    })
}

/// Mutable state of one command run.
pub struct Run {
    pub out: PathBuf,
    pub report: RunReport,
}

impl Run {
    pub fn new(command: &'static str, out: PathBuf, config: Value, threads: Option<usize>) -> Self {
        Self {
            out,
            report: RunReport {
                command,
                status: "running",
                error: None,
                versions: Versions {
                    hfsem: hfsem::VERSION,
                    cli: env!("CARGO_PKG_VERSION"),
                },
                parallel: hfsem::par::is_parallel(),
                threads,
                config,
                inputs: Vec::new(),
                outputs: Vec::new(),
                counts: BTreeMap::new(),
                details: BTreeMap::new(),
                warnings: Vec::new(),
                timestamp: chrono::Utc::now().to_rfc3339(),
            },
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let d = sha256_file(path)?;
        self.report.inputs.push(d);
        Ok(())
    }

    pub fn output_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Record a file already written under the output directory.
    pub fn output(&mut self, name: &str) -> Result<()> {
        let mut d = sha256_file(&self.output_path(name))?;
        d.path = name.to_string();
        self.report.outputs.push(d);
        Ok(())
    }

    pub fn count(&mut self, key: &str, value: impl Serialize) {
        self.report
            .counts
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.report
            .details
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let m = message.into();
        eprintln!("warning: {m}");
        self.report.warnings.push(m);
    }

    pub fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let p = self.output_path(name);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        Ok(BufWriter::new(
            File::create(&p).with_context(|| format!("creating {}", p.display()))?,
        ))
    }

    pub fn write_report(&self) -> Result<PathBuf> {
        let name = format!("{}_report.json", self.report.command);
        let p = self.output_path(&name);
        let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &self.report)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        std::fs::write(&p, b"abc").unwrap();
        let d = sha256_file(&p).unwrap();
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(d.bytes, 3);
    }
}
