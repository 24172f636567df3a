//! Output directory handling and the per-run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use survkit::{Error, Result};

#[derive(Serialize)]
struct InputFile {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    parallel: bool,
    inputs: &'a [InputFile],
    flags: &'a BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    outputs: Vec<&'a str>,
    notes: &'a [String],
}

/// One invocation's output directory. Only file names (never directory
/// paths or clocks) enter the manifest, so reruns produce identical bytes.
pub struct Run {
    dir: PathBuf,
    command: &'static str,
    figures: bool,
    inputs: Vec<InputFile>,
    flags: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    outputs: Vec<String>,
    notes: Vec<String>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    pub fn new(dir: &Path, command: &'static str, figures: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            figures,
            inputs: Vec::new(),
            flags: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn figures(&self) -> bool {
        self.figures
    }

    /// Read an input file and record its fingerprint.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputFile {
            file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            bytes: bytes.len(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn flag(&mut self, key: &str, value: impl Serialize) {
        self.flags.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// A warning that also lands in the manifest.
    pub fn note(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("note: {message}");
        self.notes.push(message);
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        self.write(name, &buf)
    }

    pub fn svg(&mut self, name: &str, render: impl FnOnce() -> String) -> Result<()> {
        if self.figures {
            self.write(name, render().as_bytes())?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let name = format!("manifest_{}.json", self.command);
        let mut outputs: Vec<&str> = self.outputs.iter().map(String::as_str).collect();
        outputs.sort_unstable();
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            parallel: cfg!(feature = "parallel"),
            inputs: &self.inputs,
            flags: &self.flags,
            seed: self.seed,
            outputs,
            notes: &self.notes,
        };
        let mut buf = serde_json::to_vec_pretty(&manifest)?;
        buf.push(b'\n');
        fs::write(self.dir.join(name), buf)?;
        Ok(())
    }
}
