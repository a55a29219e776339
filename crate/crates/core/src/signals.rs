//! Signal families and dataset files.
//!
//! Random draws use ChaCha8 seeded with `seed` and switched to stream `index`,
//! so signal `index` of a dataset is a pure function of `(seed, index)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::fourier::{check_len, Signal};

/// `u[±N/4] = √N/2`, whose transform is `cos(πξ/2)`.
pub fn gen_cosine(len: usize) -> Result<Signal> {
    if len == 0 || len % 4 != 0 {
        return Err(invalid(format!("the cosine signal needs N divisible by 4 (got {len})")));
    }
    let q = (len / 4) as i64;
    let amp = (len as f64).sqrt() / 2.0;
    Signal::from_fn(len, |n| {
        if n == q || n == -q {
            Complex64::new(amp, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `u[f] = i/√2`, `u[-f] = -i/√2`: a unit-norm sine with transform `√(2/N) sin(2πfξ/N)`.
pub fn gen_low_sine(len: usize, freq: usize) -> Result<Signal> {
    check_len(len)?;
    let f = freq as i64;
    if freq == 0 || f >= (len / 2) as i64 {
        return Err(invalid(format!("sine frequency must lie in 1..N/2 (got {freq})")));
    }
    let amp = 1.0 / 2f64.sqrt();
    Signal::from_fn(len, |n| match n {
        n if n == f => Complex64::new(0.0, amp),
        n if n == -f => Complex64::new(0.0, -amp),
        _ => Complex64::new(0.0, 0.0),
    })
}

/// Unit-norm samples of `exp(-n²/(2 width²))`.
pub fn gen_gaussian(len: usize, width: f64) -> Result<Signal> {
    check_len(len)?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(invalid(format!("gaussian width must be positive (got {width})")));
    }
    let s = Signal::from_fn(len, |n| {
        let x = n as f64 / width;
        Complex64::new((-0.5 * x * x).exp(), 0.0)
    })?;
    Ok(s.normalized())
}

pub fn default_gaussian_width(len: usize) -> f64 {
    len as f64 / 8.0
}

/// `u[n] = |[n − ½, n + ½] ∩ [a, b]|`, optionally scaled to unit norm.
pub fn rectangle_from_bounds(len: usize, a: f64, b: f64, normalize: bool) -> Result<Signal> {
    check_len(len)?;
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(invalid(format!("rectangle bounds must satisfy a <= b (got {a}, {b})")));
    }
    let s = Signal::from_fn(len, |n| {
        let lo = (n as f64 - 0.5).max(a);
        let hi = (n as f64 + 0.5).min(b);
        Complex64::new((hi - lo).max(0.0), 0.0)
    })?;
    Ok(if normalize { s.normalized() } else { s })
}

/// Random indicator of an interval `[a, b]` with `a, b` uniform in `[-N/2 + 1, N/2 - 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleModel {
    pub len: usize,
    pub seed: u64,
}

impl RectangleModel {
    pub fn new(len: usize, seed: u64) -> Result<Self> {
        check_len(len)?;
        if len < 4 {
            return Err(invalid("the rectangle model needs N >= 4"));
        }
        Ok(Self { len, seed })
    }

    /// Support bounds of draw `index`, swapped into order and redrawn when equal.
    pub fn bounds(&self, index: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let half = self.len as f64 / 2.0;
        loop {
            let a = rng.random_range(-half + 1.0..=half - 1.0);
            let b = rng.random_range(-half + 1.0..=half - 1.0);
            if a != b {
                return if a < b { (a, b) } else { (b, a) };
            }
        }
    }

    pub fn signal(&self, index: u64) -> Signal {
        let (a, b) = self.bounds(index);
        rectangle_from_bounds(self.len, a, b, true).expect("validated model")
    }

    pub fn dataset(&self, count: usize) -> Vec<Signal> {
        (0..count as u64).map(|i| self.signal(i)).collect()
    }
}

/// Where the signals of an experiment come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SignalSource {
    Cosine,
    LowSine {
        #[serde(default = "one")]
        freq: usize,
    },
    Gaussian {
        #[serde(default)]
        width: Option<f64>,
    },
    /// `count` consecutive draws of the rectangle model starting at `start`.
    Rectangles {
        seed: u64,
        count: usize,
        #[serde(default)]
        start: u64,
    },
    /// A dataset file written by [`write_dataset`].
    File { path: PathBuf },
}

fn one() -> usize {
    1
}

impl SignalSource {
    pub fn signals(&self, len: usize) -> Result<Vec<Signal>> {
        match self {
            Self::Cosine => Ok(vec![gen_cosine(len)?]),
            Self::LowSine { freq } => Ok(vec![gen_low_sine(len, *freq)?]),
            Self::Gaussian { width } => Ok(vec![gen_gaussian(len, width.unwrap_or(default_gaussian_width(len)))?]),
            Self::Rectangles { seed, count, start } => {
                if *count == 0 {
                    return Err(invalid("rectangle dataset needs count >= 1"));
                }
                let model = RectangleModel::new(len, *seed)?;
                Ok((*start..*start + *count as u64).map(|i| model.signal(i)).collect())
            }
            Self::File { path } => {
                let signals = read_dataset(path)?;
                if signals[0].len() != len {
                    return Err(Error::LengthMismatch {
                        expected: len,
                        found: signals[0].len(),
                    });
                }
                Ok(signals)
            }
        }
    }
}

/// JSON sidecar describing a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub p: usize,
    pub model: String,
    pub seed: Option<u64>,
    /// Hex SHA-256 of the CSV bytes.
    pub sha256: String,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes one signal per row as `re_0,im_0,re_1,im_1,…` plus a JSON sidecar.
pub fn write_dataset(path: &Path, signals: &[Signal], model: &str, seed: Option<u64>) -> Result<DatasetMeta> {
    let first = signals.first().ok_or_else(|| invalid("cannot write an empty dataset"))?;
    let n = first.len();
    let mut body = String::new();
    body.push_str("# schema=v1\n");
    let header: Vec<String> = (0..n).flat_map(|k| [format!("re_{k}"), format!("im_{k}")]).collect();
    body.push_str(&header.join(","));
    body.push('\n');
    for s in signals {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: s.len(),
            });
        }
        let row: Vec<String> = s
            .values()
            .iter()
            .flat_map(|v| [format_float(v.re), format_float(v.im)])
            .collect();
        body.push_str(&row.join(","));
        body.push('\n');
    }
    fs::File::create(path)?.write_all(body.as_bytes())?;
    let meta = DatasetMeta {
        n,
        p: signals.len(),
        model: model.to_string(),
        seed,
        sha256: sha256_hex(body.as_bytes()),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(sidecar_path(path), json + "\n")?;
    Ok(meta)
}

/// Reads a dataset file, checking the sidecar hash when a sidecar exists.
pub fn read_dataset(path: &Path) -> Result<Vec<Signal>> {
    let bytes = fs::read(path)?;
    let side = sidecar_path(path);
    if side.exists() {
        let meta: DatasetMeta =
            serde_json::from_slice(&fs::read(&side)?).map_err(|e| Error::Parse(e.to_string()))?;
        let digest = sha256_hex(&bytes);
        if digest != meta.sha256 {
            return Err(Error::Parse(format!("dataset hash mismatch for {}", path.display())));
        }
    }
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let nums = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if nums.len() % 2 != 0 {
            return Err(Error::Parse(format!("row {row}: odd number of columns")));
        }
        let values = nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        out.push(Signal::new(values)?);
    }
    if out.is_empty() {
        return Err(Error::Parse("dataset has no rows".into()));
    }
    Ok(out)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
