use std::fs;

use fsopt::signals::{write_dataset, SignalSource};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{io_error, CliError, CliResult};

fn default_name() -> String {
    "dataset".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetParams {
    pub len: usize,
    pub signal: SignalSource,
    /// File stem of the CSV and its JSON sidecar.
    #[serde(default = "default_name")]
    pub name: String,
}

pub fn run(cfg: &RunConfig<DatasetParams>) -> CliResult<()> {
    let p = &cfg.params;
    if p.name.is_empty() || p.name.contains(['/', '\\']) {
        return Err(CliError::Config(format!("invalid dataset name {:?}", p.name)));
    }
    let signals = p.signal.signals(p.len)?;
    let (model, seed) = match &p.signal {
        SignalSource::Cosine => ("cosine", None),
        SignalSource::LowSine { .. } => ("low_sine", None),
        SignalSource::Gaussian { .. } => ("gaussian", None),
        SignalSource::Rectangles { seed, .. } => ("rectangles", Some(*seed)),
        SignalSource::File { .. } => ("file", None),
    };
    fs::create_dir_all(&cfg.out_dir).map_err(io_error(&cfg.out_dir))?;
    let path = cfg.out_dir.join(format!("{}.csv", p.name));
    let meta = write_dataset(&path, &signals, model, seed)?;
    println!("wrote {} signals of length {} to {} (sha256 {})", meta.p, meta.n, path.display(), meta.sha256);
    Ok(())
}
