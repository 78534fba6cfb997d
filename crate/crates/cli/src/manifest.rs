use std::fs;
use std::path::{Path, PathBuf};

use heatagg_core::pipeline::RunConfig;
use heatagg_core::Result;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let digest = Sha256::digest(fs::read(path)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Files read and written by one command. Paths are recorded relative to the
/// output directory when they live inside it.
#[derive(Default)]
pub struct Manifest {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    fn entries(paths: &[PathBuf], out: &Path) -> Result<Vec<Value>> {
        paths
            .iter()
            .map(|p| {
                let shown = p.strip_prefix(out).unwrap_or(p);
                Ok(json!({ "path": shown.display().to_string(), "sha256": sha256_file(p)? }))
            })
            .collect()
    }

    /// Writes `manifest_<command>.json` into the output directory.
    pub fn write(&self, command: &str, config: &RunConfig) -> Result<PathBuf> {
        let doc = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": config.seed,
            "config": config.pairs(),
            "inputs": Self::entries(&self.inputs, &config.out)?,
            "outputs": Self::entries(&self.outputs, &config.out)?,
        });
        let path = config.out.join(format!("manifest_{command}.json"));
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(path)
    }
}
