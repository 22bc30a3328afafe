use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;

pub const DIMENSIONS: [&str; 4] = ["fluency", "coherence", "consistency", "relevance"];

/// System label of the reference anchor; it scores 0 by definition.
pub const LIKERT_BASELINE: &str = "element_aware";

/// One human score on the -3..=3 scale, relative to the baseline summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikertRow {
    pub doc_id: String,
    pub annotator: u32,
    pub system: String,
    pub dimension: String,
    pub score: i64,
}

/// Mean score per system and dimension. Systems and dimensions keep a stable
/// order (systems alphabetical, dimensions in [`DIMENSIONS`] order).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LikertTable {
    pub means: BTreeMap<String, BTreeMap<String, f64>>,
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
}

impl LikertTable {
    pub fn mean(&self, system: &str, dimension: &str) -> Option<f64> {
        self.means.get(system)?.get(dimension).copied()
    }

    /// Markdown table with two-decimal means and the implicit baseline row.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| System |");
        for d in DIMENSIONS {
            out.push_str(&format!(" {d} |"));
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(DIMENSIONS.len()));
        out.push('\n');
        out.push_str(&format!("| {LIKERT_BASELINE} (baseline) |"));
        out.push_str(&" 0.00 |".repeat(DIMENSIONS.len()));
        out.push('\n');
        for (system, dims) in &self.means {
            out.push_str(&format!("| {system} |"));
            for d in DIMENSIONS {
                match dims.get(d) {
                    Some(m) => out.push_str(&format!(" {m:.2} |")),
                    None => out.push_str(" n/a |"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Arithmetic mean over annotators and samples for each (system, dimension).
pub fn aggregate_likert(rows: &[LikertRow]) -> Result<LikertTable, MetricsError> {
    let mut sums: BTreeMap<String, BTreeMap<String, (i64, usize)>> = BTreeMap::new();
    for row in rows {
        if !(-3..=3).contains(&row.score) {
            return Err(MetricsError::OutOfRangeScore { doc_id: row.doc_id.clone(), score: row.score });
        }
        if !DIMENSIONS.contains(&row.dimension.as_str()) {
            return Err(MetricsError::UnknownDimension(row.dimension.clone()));
        }
        if row.system == LIKERT_BASELINE {
            return Err(MetricsError::BaselineRow(row.system.clone()));
        }
        let cell = sums.entry(row.system.clone()).or_default().entry(row.dimension.clone()).or_default();
        cell.0 += row.score;
        cell.1 += 1;
    }
    let mut table = LikertTable::default();
    for (system, dims) in sums {
        for (dim, (sum, n)) in dims {
            table.means.entry(system.clone()).or_default().insert(dim.clone(), sum as f64 / n as f64);
            table.counts.entry(system.clone()).or_default().insert(dim, n);
        }
    }
    Ok(table)
}
