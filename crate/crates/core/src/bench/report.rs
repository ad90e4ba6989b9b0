//! Human and machine renderings of a [`ResultsTable`].

use serde::{Deserialize, Serialize};

use super::runner::ResultsTable;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    /// Aligned plain-text table.
    pub text: String,
    /// The full table, records included.
    pub json: String,
    /// One row per (method, metric).
    pub csv: String,
}

/// Renders the table in three formats; output depends only on the table.
pub fn render_report(rt: &ResultsTable) -> Result<Report> {
    Ok(Report {
        text: render_text(rt),
        json: serde_json::to_string_pretty(rt)? + "\n",
        csv: render_csv(rt)?,
    })
}

fn fmt_cell(mean: f64, std: f64) -> String {
    format!("{mean:.4} ± {std:.4}")
}

fn render_text(rt: &ResultsTable) -> String {
    let metrics = rt.metrics();
    let mut out = String::new();
    out.push_str(&format!("experiment: {}\n", rt.name));
    out.push_str(&format!(
        "dataset: {}  projector: {}  perturbation: {}  k: {}  runs: {} x {}\n\n",
        rt.dataset,
        rt.projector,
        serde_json::to_value(rt.perturbation)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        rt.k,
        rt.repetitions,
        rt.samples_per_repetition
    ));

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["method".to_string()];
    header.extend(metrics.iter().map(|m| m.name().to_string()));
    header.push("best".to_string());
    rows.push(header);
    for s in &rt.summaries {
        let mut row = vec![s.method.name().to_string()];
        for metric in &metrics {
            row.push(
                s.metrics
                    .iter()
                    .find(|m| m.metric == *metric)
                    .map(|m| fmt_cell(m.mean, m.std))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        row.push(
            rt.ranking(s.method)
                .map(|r| format!("{}/{}", r.wins, r.compared))
                .unwrap_or_else(|| "-".into()),
        );
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                let pad = w - cell.chars().count();
                if c == 0 {
                    format!("{cell}{}", " ".repeat(pad))
                } else {
                    format!("{}{cell}", " ".repeat(pad))
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out.push_str(&format!("\nfailed requests: {}\n", rt.failures.len()));
    out
}

/// Shortest round-trip representation; `NaN` for missing values.
fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite number")
    } else {
        "NaN".into()
    }
}

fn render_csv(rt: &ResultsTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| std::io::Error::other(e.to_string());
    w.write_record(["method", "metric", "mean", "std", "runs"]).map_err(io)?;
    for s in &rt.summaries {
        for m in &s.metrics {
            w.write_record([
                s.method.name().to_string(),
                m.metric.name().to_string(),
                num(m.mean),
                num(m.std),
                m.runs.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
