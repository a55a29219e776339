use fsopt::experiments::{run_table1, Table1Config};
use serde_json::json;

use crate::commands::optimize::trajectory_rows;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{fmt, Output};

pub fn run(cfg: &RunConfig<Table1Config>) -> CliResult<()> {
    let rows = run_table1(&cfg.params)?;
    let out = Output::create(cfg)?;
    out.csv(
        "table1.csv",
        &["strategy".into(), "score".into()],
        rows.iter().map(|r| vec![r.strategy.label().to_string(), fmt(r.score)]),
    )?;
    for r in &rows {
        let (header, body) = trajectory_rows(&r.trajectory);
        out.csv(&format!("trajectory_{}.csv", r.strategy.label()), &header, body)?;
    }
    let summary: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "strategy": r.strategy.label(),
                "score": r.score,
                "scheme": r.scheme,
                "final_value": r.trajectory.final_value,
                "iterations": r.trajectory.iterations,
                "stalls": r.trajectory.stalls,
            })
        })
        .collect();
    out.json("table1.json", json!({"rows": summary}))?;
    for r in &rows {
        println!("{:<16} {:.3e}", r.strategy.label(), r.score);
    }
    Ok(())
}
