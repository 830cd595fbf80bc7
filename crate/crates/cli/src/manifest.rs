use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

/// Everything needed to rerun a command, written next to its output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub parameters: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub duration_secs: f64,
}

pub struct ManifestWriter {
    command: String,
    parameters: Value,
    inputs: Vec<PathBuf>,
    started: Instant,
}

impl ManifestWriter {
    pub fn start(command: &str, parameters: Value, inputs: Vec<PathBuf>) -> Self {
        ManifestWriter { command: command.to_string(), parameters, inputs, started: Instant::now() }
    }

    pub fn finish(
        self,
        path: &Path,
        outputs: Vec<PathBuf>,
        error: Option<String>,
    ) -> std::io::Result<()> {
        let manifest = RunManifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: self.parameters,
            inputs: self.inputs,
            outputs,
            status: if error.is_none() { "ok" } else { "failed" }.to_string(),
            error,
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(path, text + "\n")
    }
}

/// `<out>.manifest.json` for a file output.
pub fn manifest_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
