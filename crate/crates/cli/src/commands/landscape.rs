use fsopt::analysis::DEFAULT_LANDSCAPE_RES;
use fsopt::signals::SignalSource;
use fsopt::{scan_landscape, ObjectiveSpec, ReconstructorKind, Term};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt, Output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermName {
    J1,
    J2,
    J3,
    G1,
    G2,
    #[serde(rename = "negF")]
    NegF,
    #[serde(rename = "absU")]
    AbsU,
}

impl TermName {
    pub fn file_stem(&self) -> &'static str {
        match self {
            TermName::J1 => "j1",
            TermName::J2 => "j2",
            TermName::J3 => "j3",
            TermName::G1 => "g1",
            TermName::G2 => "g2",
            TermName::NegF => "negf",
            TermName::AbsU => "absu",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TermName::J1 => "J1",
            TermName::J2 => "J2",
            TermName::J3 => "J3",
            TermName::G1 => "G1",
            TermName::G2 => "G2",
            TermName::NegF => "negF",
            TermName::AbsU => "absU",
        }
    }

    fn scan(&self, lambda: Option<f64>) -> CliResult<(ReconstructorKind, Term)> {
        Ok(match self {
            TermName::J1 => (ReconstructorKind::BackProjection, Term::J),
            TermName::J2 => (ReconstructorKind::PseudoInverse, Term::J),
            TermName::J3 => {
                let lambda = lambda.ok_or_else(|| CliError::Config("term J3 needs `lambda`".into()))?;
                (ReconstructorKind::tikhonov(lambda)?, Term::J)
            }
            TermName::G1 => (ReconstructorKind::BackProjection, Term::G1),
            TermName::G2 => (ReconstructorKind::PseudoInverse, Term::G2),
            TermName::NegF | TermName::AbsU => (ReconstructorKind::BackProjection, Term::NegF),
        })
    }
}

fn default_res() -> usize {
    DEFAULT_LANDSCAPE_RES
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeParams {
    pub len: usize,
    pub signal: SignalSource,
    pub terms: Vec<TermName>,
    #[serde(default = "default_res")]
    pub res: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
}

pub fn run(cfg: &RunConfig<LandscapeParams>) -> CliResult<()> {
    let p = &cfg.params;
    if p.terms.is_empty() {
        return Err(CliError::Config("`terms` must list at least one term".into()));
    }
    let signals = p.signal.signals(p.len)?;
    let plans = p
        .terms
        .iter()
        .map(|t| t.scan(p.lambda).map(|s| (*t, s)))
        .collect::<CliResult<Vec<_>>>()?;
    let out = Output::create(cfg)?;
    for (name, (kind, term)) in plans {
        if name == TermName::AbsU {
            let xs: Vec<f64> = (0..p.res)
                .map(|i| -(p.len as f64) / 2.0 + i as f64 * p.len as f64 / p.res as f64)
                .collect();
            let rows = xs.iter().map(|&x| {
                let v = signals.iter().map(|u| u.transform(x).norm()).sum::<f64>() / signals.len() as f64;
                vec![fmt(x), fmt(v)]
            });
            out.csv("landscape_absu.csv", &["xi".into(), "value".into()], rows)?;
            continue;
        }
        let spec = ObjectiveSpec::new(kind, p.sigma, signals.clone())?;
        let grid = scan_landscape(&spec, term, p.res)?;
        let rows = (0..grid.res).flat_map(|i| (0..grid.res).map(move |j| (i, j))).map(|(i, j)| {
            vec![fmt(grid.coord(i)), fmt(grid.coord(j)), fmt(grid.value(i, j))]
        });
        let stem = name.file_stem();
        out.csv(
            &format!("landscape_{stem}.csv"),
            &["xi1".into(), "xi2".into(), "value".into()],
            rows,
        )?;
        let minima = grid.minima_coords();
        out.json(
            &format!("minima_{stem}.json"),
            json!({"term": name.label(), "count": minima.len(), "minima": minima}),
        )?;
        println!("{}: {} local minima on a {}x{} grid", name.label(), minima.len(), p.res, p.res);
    }
    Ok(())
}
