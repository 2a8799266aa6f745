//! Report emission: CSV (tabular statistics) or JSON (structured
//! artifacts), both with a config echo so every run is reproducible from
//! its own output.

use serde_json::{json, Value};
use std::io::Write;

pub struct ReportRow {
    pub experiment: String,
    pub n: usize,
    pub p: f64,
    pub statistic: String,
    pub value: String,
    pub stderr: Option<f64>,
    pub seed: u64,
    pub wall_ms: u128,
}

pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(text: &str) -> Result<Format, String> {
        match text {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

pub fn emit(
    out: &mut dyn Write,
    format: &Format,
    config_echo: &Value,
    rows: &[ReportRow],
) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# config: {config_echo}")?;
            writeln!(out, "experiment,n,p,statistic,value,stderr,seed,wall_ms")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.experiment,
                    r.n,
                    r.p,
                    r.statistic,
                    r.value,
                    r.stderr.map_or(String::new(), |s| s.to_string()),
                    r.seed,
                    r.wall_ms
                )?;
            }
        }
        Format::Json => {
            let rows_json: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "experiment": r.experiment,
                        "n": r.n,
                        "p": r.p,
                        "statistic": r.statistic,
                        "value": r.value,
                        "stderr": r.stderr,
                        "seed": r.seed,
                        "wall_ms": r.wall_ms,
                    })
                })
                .collect();
            let doc = json!({"config": config_echo, "rows": rows_json});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}
