use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// 17 significant digits.
pub fn f17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    params: &'a Value,
    version: &'a str,
    tolerances: &'a Tolerances,
    files: &'a [String],
    wall_time_s: f64,
    checks: &'a [CheckItem],
}

/// Collects the files of one run and writes its manifest last.
pub struct Run {
    pub dir: PathBuf,
    subcommand: String,
    params: Value,
    tolerances: Tolerances,
    files: Vec<String>,
    checks: Vec<CheckItem>,
    started: Instant,
}

impl Run {
    pub fn new(root: &Path, name: &str, subcommand: &str, params: Value, tolerances: Tolerances) -> Result<Self, CliError> {
        let dir = root.join(name);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            dir,
            subcommand: subcommand.to_string(),
            params,
            tolerances,
            files: Vec::new(),
            checks: Vec::new(),
            started: Instant::now(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::numerical(e.to_string()))?;
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e.into()))?;
        w.write_record(header).map_err(|e| CliError::io(&path, e.into()))?;
        for row in rows {
            w.write_record(&row).map_err(|e| CliError::io(&path, e.into()))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckItem { name: name.to_string(), passed, detail: detail.into() });
    }

    /// Writes the manifest; fails with the validation code if any check failed.
    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.files.push("manifest.json".to_string());
        let manifest = RunManifest {
            subcommand: &self.subcommand,
            params: &self.params,
            version: env!("CARGO_PKG_VERSION"),
            tolerances: &self.tolerances,
            files: &self.files,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            checks: &self.checks,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::numerical(e.to_string()))?;
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        for c in &self.checks {
            eprintln!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
        }
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            Ok(self.dir)
        } else {
            Err(CliError::validation(format!("checks failed: {}", failed.join(", "))))
        }
    }
}
