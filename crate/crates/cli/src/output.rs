use std::fs;
use std::path::PathBuf;

use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{io_error, CliError, CliResult};

pub const SCHEMA: &str = "v1";

pub use fsopt::signals::format_float as fmt;

/// Writes every output of one run into its directory with the resolved config embedded.
pub struct Output {
    dir: PathBuf,
    config: Value,
    hash: String,
}

impl Output {
    pub fn create<P>(cfg: &RunConfig<P>) -> CliResult<Self> {
        fs::create_dir_all(&cfg.out_dir).map_err(io_error(&cfg.out_dir))?;
        Ok(Self {
            dir: cfg.out_dir.clone(),
            config: cfg.resolved.clone(),
            hash: cfg.hash.clone(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// `# schema=v1`, `# config_sha256=…` and `# config=…` comment lines, then the header and rows.
    pub fn csv(&self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<PathBuf> {
        let mut body = format!(
            "# schema={SCHEMA}\n# config_sha256={}\n# config={}\n{}\n",
            self.hash,
            self.config,
            header.join(",")
        );
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.write(name, body)
    }

    /// Adds `schema`, `config` and `config_sha256` to a JSON object and writes it.
    pub fn json(&self, name: &str, mut value: Value) -> CliResult<PathBuf> {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("{name}: output is not an object")))?;
        obj.insert("schema".into(), Value::String(SCHEMA.into()));
        obj.insert("config_sha256".into(), Value::String(self.hash.clone()));
        obj.insert("config".into(), self.config.clone());
        let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Config(e.to_string()))?;
        self.write(name, text + "\n")
    }

    fn write(&self, name: &str, body: String) -> CliResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, body).map_err(io_error(&path))?;
        Ok(path)
    }
}

pub fn strings(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|&x| fmt(x)).collect()
}
