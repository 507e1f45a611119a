//! Flat `key=value` run manifests written next to every output.

use std::path::{Path, PathBuf};

use crate::args::Command;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub master_seed: Option<u64>,
    pub version: String,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn for_command(cmd: &Command, duration_secs: f64) -> Self {
        RunManifest {
            subcommand: cmd.name().to_string(),
            params: cmd.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            master_seed: cmd.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs,
        }
    }

    /// The output path with extension `manifest`.
    pub fn path_for(out: &Path) -> PathBuf {
        out.with_extension("manifest")
    }

    pub fn render(&self) -> String {
        let mut s = format!("subcommand={}\n", self.subcommand);
        for (k, v) in &self.params {
            s.push_str(&format!("param.{k}={v}\n"));
        }
        match self.master_seed {
            Some(seed) => s.push_str(&format!("master_seed={seed}\n")),
            None => s.push_str("master_seed=none\n"),
        }
        s.push_str(&format!("version={}\n", self.version));
        s.push_str(&format!("duration_secs={:.3}\n", self.duration_secs));
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut subcommand = None;
        let mut params = Vec::new();
        let mut master_seed = None;
        let mut version = String::new();
        let mut duration_secs = 0.0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Data(format!("manifest line {}: expected key=value", i + 1)))?;
            match key {
                "subcommand" => subcommand = Some(value.to_string()),
                "master_seed" if value != "none" => {
                    master_seed = Some(value.parse().map_err(|e| {
                        CliError::Data(format!("manifest line {}: bad seed: {e}", i + 1))
                    })?)
                }
                "master_seed" => {}
                "version" => version = value.to_string(),
                "duration_secs" => duration_secs = value.parse().unwrap_or(0.0),
                k => match k.strip_prefix("param.") {
                    Some(p) => params.push((p.to_string(), value.to_string())),
                    None => return Err(CliError::Data(format!("manifest line {}: unknown key {k:?}", i + 1))),
                },
            }
        }
        let subcommand = subcommand.ok_or_else(|| CliError::Data("manifest has no subcommand".into()))?;
        Ok(RunManifest {
            subcommand,
            params,
            master_seed,
            version,
            duration_secs,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Command-line arguments reproducing the recorded run.
    pub fn argv(&self) -> Vec<String> {
        let mut argv = vec!["tbt".to_string(), self.subcommand.clone()];
        for (k, v) in &self.params {
            argv.push(format!("--{k}"));
            argv.push(v.clone());
        }
        argv
    }
}
