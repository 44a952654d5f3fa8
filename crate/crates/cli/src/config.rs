//! Config resolution and run manifests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Format, Global, UsageError};

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

pub struct Loaded<T> {
    pub config: T,
    /// Output format recorded in a manifest, if the file was one.
    pub format: Option<Format>,
}

/// Defaults overlaid with the `--config` file. A manifest contributes its
/// `config` object and must come from the same command.
pub fn load<T: Default + Serialize + DeserializeOwned>(path: Option<&Path>, command: &str) -> Result<Loaded<T>> {
    let mut value = serde_json::to_value(T::default())?;
    let mut format = None;
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", p.display())))?;
        let mut file: Value = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {} is not valid JSON: {e}", p.display())))?;
        if let Some(obj) = file.as_object_mut() {
            if let (Some(cmd), true) = (obj.get("command").and_then(Value::as_str), obj.contains_key("config")) {
                if cmd != command {
                    return Err(UsageError(format!("manifest {} is for '{cmd}', not '{command}'", p.display())).into());
                }
                format = obj.get("format").cloned().and_then(|f| serde_json::from_value(f).ok());
                file = obj.remove("config").unwrap();
            }
        }
        merge(&mut value, file);
    }
    let config = serde_json::from_value(value)
        .map_err(|e| UsageError(format!("invalid {command} config: {e}")))?;
    Ok(Loaded { config, format })
}

#[derive(Serialize, Deserialize, Debug)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub format: Format,
    pub config: Value,
    pub outputs: Vec<PathBuf>,
    pub inputs: Vec<InputFile>,
    pub duration_seconds: f64,
}

/// Collects outputs for one command run and writes them with a manifest.
pub struct Run {
    command: &'static str,
    out: PathBuf,
    pub format: Format,
    started: Instant,
    outputs: Vec<PathBuf>,
    pub inputs: Vec<InputFile>,
}

impl Run {
    pub fn start(command: &'static str, global: &Global, file_format: Option<Format>) -> Result<Self> {
        std::fs::create_dir_all(&global.out)
            .with_context(|| format!("cannot create output directory {}", global.out.display()))?;
        Ok(Self {
            command,
            out: global.out.clone(),
            format: global.format.or(file_format).unwrap_or(Format::Csv),
            started: Instant::now(),
            outputs: Vec::new(),
            inputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
        self.outputs.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish<C: Serialize>(self, config: &C, seed: Option<u64>) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            format: self.format,
            config: serde_json::to_value(config)?,
            outputs: self.outputs,
            inputs: self.inputs,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.out.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
        Ok(())
    }
}
