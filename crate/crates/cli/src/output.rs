//! Output files: CSV tables and the run manifest.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, Context};

/// Collects output files for one run under `<out>/<name>_*`.
pub struct Outputs {
    dir: PathBuf,
    name: String,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path, name: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), name: name.to_string(), files: Vec::new() })
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let file = format!("{}_{suffix}", self.name);
        let p = self.dir.join(&file);
        self.files.push(file);
        p
    }

    /// Writes `header` and `rows`, then optional `# key,value` footer lines.
    pub fn csv(
        &mut self,
        suffix: &str,
        header: &[&str],
        rows: &[Vec<String>],
        footer: &[(String, String)],
    ) -> Result<(), CliError> {
        let path = self.path(suffix);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let mut f = w.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?;
        for (k, v) in footer {
            writeln!(f, "# {k},{v}")?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn manifest(
        mut self,
        ctx: &Context,
        command: &str,
        passed: bool,
        summary: toml::Table,
    ) -> Result<(), CliError> {
        let path = self.path("manifest.toml");
        let manifest = Manifest {
            artifact: "mis",
            version: mis_core::VERSION,
            command,
            seed: ctx.seed,
            samples: ctx.samples,
            config_sha256: ctx.config.hash(),
            outcome: if passed { "pass" } else { "fail" },
            files: self.files.clone(),
            summary,
            config: &ctx.config,
        };
        let text = toml::to_string(&manifest).map_err(|e| CliError::Input(format!("manifest: {e}")))?;
        File::create(path)?.write_all(text.as_bytes())?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'a str,
    version: &'a str,
    command: &'a str,
    seed: u64,
    samples: Option<usize>,
    config_sha256: String,
    outcome: &'a str,
    files: Vec<String>,
    summary: toml::Table,
    config: &'a RunConfig,
}

/// Shortest round-trip decimal rendering.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
