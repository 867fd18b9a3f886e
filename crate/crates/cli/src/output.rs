//! Output files, the run manifest and config loading.

use std::fs;
use std::path::{Path, PathBuf};

use cascade_core::fmt::sig12;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

/// Writes outputs into a directory, or to stdout when there is none.
pub struct Sink {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|source| CliError::Io { path: d.clone(), source })?;
        }
        Ok(Self { dir, written: Vec::new() })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` into the directory; prints it instead when
    /// there is no directory and `stdout` is set.
    pub fn emit(&mut self, name: &str, content: &str, stdout: bool) -> Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, content).map_err(|source| CliError::Io { path, source })?;
                self.written.push(name.to_string());
            }
            None if stdout => print!("{content}"),
            None => {}
        }
        Ok(())
    }

    /// Writes the manifest when there is an output directory.
    pub fn finish<C: Serialize>(self, subcommand: &str, seed: u64, config: &C) -> Result<()> {
        let Some(dir) = self.dir else { return Ok(()) };
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: serde_json::to_value(config).expect("configs serialize"),
            outputs: self.written,
        };
        let path = dir.join(MANIFEST_FILE);
        // full precision, so that re-running the manifest is exact
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn render_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("outputs serialize");
    round_floats(&mut v);
    serde_json::to_string_pretty(&v).expect("values serialize") + "\n"
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            let rounded: f64 = sig12(x).parse().unwrap_or(x);
            if let Some(r) = serde_json::Number::from_f64(rounded) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input { path: path.to_path_buf(), message: e.to_string() })
}

/// Deserializes `value`, naming the path of the offending field on failure.
pub fn from_value<T: DeserializeOwned>(path: &Path, value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        let message = if field == "." { e.inner().to_string() } else { format!("{field}: {}", e.inner()) };
        CliError::Input { path: path.to_path_buf(), message }
    })
}

/// A config document, or the config and seed inside a manifest.
pub struct Loaded {
    pub config: Value,
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path, subcommand: &str) -> Result<Loaded> {
    let value = read_json(path)?;
    if value.get("subcommand").is_none() {
        return Ok(Loaded { config: value, seed: None });
    }
    let manifest: RunManifest = from_value(path, value)?;
    if manifest.subcommand != subcommand {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            message: format!("manifest is for {:?}, not {subcommand:?}", manifest.subcommand),
        });
    }
    Ok(Loaded { config: manifest.config, seed: Some(manifest.seed) })
}
