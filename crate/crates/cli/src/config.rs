use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{io_error, CliError, CliResult};

/// A parsed run config: the output directory plus the command's parameters.
#[derive(Debug)]
pub struct RunConfig<P> {
    pub out_dir: PathBuf,
    pub params: P,
    /// Canonical JSON of `params` with defaults filled in.
    pub resolved: Value,
    /// Hex SHA-256 of the canonical parameter JSON.
    pub hash: String,
}

pub fn load<P: DeserializeOwned + Serialize>(path: &Path) -> CliResult<RunConfig<P>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    parse(&text)
}

/// `out_dir` is split off before the parameters are parsed strictly, so it never enters the hash.
pub fn parse<P: DeserializeOwned + Serialize>(text: &str) -> CliResult<RunConfig<P>> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| CliError::Config("the config must be a JSON object".into()))?;
    let out_dir = match obj.remove("out_dir") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(CliError::Config("out_dir must be a string".into())),
        None => return Err(CliError::Config("missing field `out_dir`".into())),
    };
    let params: P = serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
    let resolved = serde_json::to_value(&params).map_err(|e| CliError::Config(e.to_string()))?;
    let hash = fsopt::signals::sha256_hex(resolved.to_string().as_bytes());
    Ok(RunConfig {
        out_dir,
        params,
        resolved,
        hash,
    })
}
