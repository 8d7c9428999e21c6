//! Machine-readable run reports: a JSON object (default) or CSV rows
//! carrying the same numeric values.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "exitprob.report.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Payload of one subcommand run: a JSON outputs object plus its tabular
/// form. CSV numbers are rendered with the shortest round-trip formatting,
/// so both renderings parse back to identical values.
pub struct CommandOutput {
    pub outputs: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    schema: &'static str,
    version: &'static str,
    command: &'a str,
    inputs: &'a Value,
    outputs: &'a Value,
    runtime_ms: f64,
}

pub fn num(v: f64) -> String {
    format!("{}", v)
}

/// Render the report to stdout in the requested format.
pub fn emit(
    command: &str,
    inputs: &Value,
    output: &CommandOutput,
    runtime_ms: f64,
    format: Format,
) {
    match format {
        Format::Json => {
            let report = RunReport {
                schema: SCHEMA,
                version: env!("CARGO_PKG_VERSION"),
                command,
                inputs,
                outputs: &output.outputs,
                runtime_ms,
            };
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Csv => {
            println!("{}", output.csv_header.join(","));
            for row in &output.csv_rows {
                println!("{}", row.join(","));
            }
        }
    }
}
