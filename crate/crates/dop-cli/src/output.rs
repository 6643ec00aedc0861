//! Deterministic CSV and JSON rendering.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use dop_core::analysis::SweepTable;
use serde::Serialize;

/// Nine significant digits, so repeated runs are byte-identical.
pub fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

pub const CSV_HEADER: &str = "attacker_power,victim_power,attack,effectiveness,cost,cost_defined";

/// Rows in table order, LF line endings, an empty cost cell when the cost
/// is undefined.
pub fn render_csv(table: &SweepTable) -> String {
    let mut out = String::with_capacity(64 * (table.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sci(row.attacker_power),
            sci(row.victim_power),
            row.attack,
            sci(row.effectiveness),
            row.cost.map(sci).unwrap_or_default(),
            row.cost.is_some(),
        ));
    }
    out
}

/// Simulation or verification summary. Non-finite z-scores render as null.
#[derive(Debug, Serialize)]
pub struct Report {
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_scores: Vec<Option<f64>>,
    pub pass: bool,
}

impl Report {
    pub fn render(&self) -> String {
        let mut text = serde_json::to_string(self).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn finite_or_null(z_scores: &[f64]) -> Vec<Option<f64>> {
    z_scores.iter().map(|&z| z.is_finite().then_some(z)).collect()
}

/// Write to the path, or to stdout when no path is given.
pub fn write_text(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("cannot write {}", p.display()))?,
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .context("cannot write to stdout")?,
    }
    Ok(())
}
