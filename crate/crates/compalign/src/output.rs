//! Machine-readable descriptions of alignments and grammars.

use serde::Serialize;

use crate::alignment::{Alignment, RowSource};
use crate::engine::{derive_encoding, infer_unseen};
use crate::learner::GrammarCandidate;
use crate::store::Symbol;

#[derive(Debug, Serialize)]
pub struct RowReport {
    pub row: usize,
    /// `null` for the New row.
    pub pattern_id: Option<String>,
    pub appearance: Option<usize>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ColumnEntryReport {
    pub row: usize,
    pub position: usize,
    pub token: String,
}

#[derive(Debug, Serialize)]
pub struct InferredReport {
    pub token: String,
    pub pattern_id: String,
}

#[derive(Debug, Serialize)]
pub struct AlignmentReport {
    pub rows: Vec<RowReport>,
    pub columns: Vec<Vec<ColumnEntryReport>>,
    pub matched_new_bits: f64,
    pub encoding_bits: f64,
    pub compression_difference: f64,
    pub encoding: Vec<String>,
    pub inferred: Vec<InferredReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

impl AlignmentReport {
    pub fn from_alignment(alignment: &Alignment, probability: Option<f64>) -> Self {
        let rows = alignment
            .rows()
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let (pattern_id, appearance) = match &row.source {
                    RowSource::New => (None, None),
                    RowSource::Old {
                        pattern_id,
                        appearance,
                    } => (Some(pattern_id.clone()), Some(*appearance)),
                };
                RowReport {
                    row: i,
                    pattern_id,
                    appearance,
                    tokens: row.symbols().iter().map(|s| s.as_str().to_string()).collect(),
                }
            })
            .collect();
        let columns = alignment
            .columns()
            .iter()
            .map(|col| {
                col.entries
                    .iter()
                    .map(|&(r, p)| ColumnEntryReport {
                        row: r,
                        position: p,
                        token: alignment.rows()[r].token(p).to_string(),
                    })
                    .collect()
            })
            .collect();
        let scores = alignment.scores().copied().unwrap_or_default();
        AlignmentReport {
            rows,
            columns,
            matched_new_bits: scores.matched_new_bits,
            encoding_bits: scores.encoding_bits,
            compression_difference: scores.compression_difference,
            encoding: derive_encoding(alignment)
                .code
                .iter()
                .map(Symbol::as_str)
                .map(str::to_string)
                .collect(),
            inferred: infer_unseen(alignment)
                .into_iter()
                .map(|(s, id)| InferredReport {
                    token: s.as_str().to_string(),
                    pattern_id: id,
                })
                .collect(),
            probability,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GrammarReport {
    pub grammar_bits: f64,
    pub encoding_bits: f64,
    pub total_bits: f64,
    pub patterns: Vec<String>,
}

impl GrammarReport {
    pub fn from_candidate(candidate: &GrammarCandidate) -> Self {
        GrammarReport {
            grammar_bits: candidate.grammar_bits,
            encoding_bits: candidate.encoding_bits,
            total_bits: candidate.total_bits,
            patterns: candidate.patterns.iter().map(|p| p.to_store_line()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{column_structure, parse_rendering, render_alignment};
    use crate::store::PatternStore;

    #[test]
    fn json_and_text_describe_the_same_columns() {
        let store = PatternStore::load("B 1 : %B %2 t h a t %#B").unwrap();
        let p = store.get("B").unwrap().clone();
        let new: Vec<Symbol> = "t h a t"
            .split_whitespace()
            .map(|t| Symbol::new(t).unwrap())
            .collect();
        let a = Alignment::from_new(&new).unwrap();
        let merged = a.merge_pattern(&p, &[(0, 2), (1, 3), (2, 4), (3, 5)]).unwrap();

        let report = AlignmentReport::from_alignment(&merged, None);
        let from_json: Vec<(Vec<usize>, String)> = report
            .columns
            .iter()
            .map(|col| {
                let mut rows: Vec<usize> = col.iter().map(|e| e.row).collect();
                rows.sort_unstable();
                (rows, col[0].token.clone())
            })
            .collect();
        assert_eq!(from_json, column_structure(&merged));
        assert_eq!(
            parse_rendering(&render_alignment(&merged)),
            column_structure(&merged)
        );
    }
}
