//! Text rendering of alignments: one line per row with `|` connector lines
//! between, in the style of a row-per-pattern parse chart.
//!
//! A column occupies a fixed character offset. A row shows its token at
//! that offset when it has an entry there, a `|` when the column passes
//! through it (entries both above and below), and spaces otherwise.
//! Connector lines between adjacent rows carry `|` wherever a column has
//! entries on both sides. Re-parsing a rendering recovers the column
//! structure exactly.

use crate::alignment::Alignment;

/// Renders the alignment as text. Deterministic for a given alignment.
pub fn render_alignment(alignment: &Alignment) -> String {
    let ncols = alignment.columns().len();
    let nrows = alignment.rows().len();

    // Column start offsets: width of the widest token plus one space.
    let mut offsets = Vec::with_capacity(ncols);
    let mut x = 0usize;
    for c in 0..ncols {
        offsets.push(x);
        x += alignment.column_token(c).chars().count() + 1;
    }

    // Span of rows touched by each column.
    let spans: Vec<(usize, usize)> = alignment
        .columns()
        .iter()
        .map(|col| {
            let lo = col.entries.iter().map(|&(r, _)| r).min().unwrap();
            let hi = col.entries.iter().map(|&(r, _)| r).max().unwrap();
            (lo, hi)
        })
        .collect();

    let mut lines = Vec::new();
    for r in 0..nrows {
        let mut line = String::new();
        for c in 0..ncols {
            let has_entry = alignment.columns()[c].entries.iter().any(|&(rr, _)| rr == r);
            let (lo, hi) = spans[c];
            let text = if has_entry {
                alignment.column_token(c).to_string()
            } else if lo < r && r < hi {
                "|".to_string()
            } else {
                continue;
            };
            pad_to(&mut line, offsets[c]);
            line.push_str(&text);
        }
        lines.push(line);
        if r + 1 < nrows {
            let mut conn = String::new();
            for c in 0..ncols {
                let (lo, hi) = spans[c];
                if lo <= r && r + 1 <= hi {
                    pad_to(&mut conn, offsets[c]);
                    conn.push('|');
                }
            }
            lines.push(conn);
        }
    }
    lines.join("\n")
}

fn pad_to(line: &mut String, offset: usize) {
    let len = line.chars().count();
    for _ in len..offset {
        line.push(' ');
    }
}

/// Column structure recovered from a rendering: for each column in order,
/// the rows that hold its token, with the token itself.
pub type ParsedColumns = Vec<(Vec<usize>, String)>;

/// Re-parses a rendering produced by `render_alignment`, recovering which
/// rows share each column. Lines alternate row, connector, row, ...
pub fn parse_rendering(text: &str) -> ParsedColumns {
    let lines: Vec<&str> = text.lines().collect();
    let mut by_offset: std::collections::BTreeMap<usize, (Vec<usize>, String)> =
        std::collections::BTreeMap::new();
    for (li, line) in lines.iter().enumerate() {
        if li % 2 == 1 {
            continue; // connector line
        }
        let row = li / 2;
        let mut offset = 0usize;
        let mut token = String::new();
        let mut start = 0usize;
        for ch in line.chars().chain(std::iter::once(' ')) {
            if ch == ' ' {
                if !token.is_empty() {
                    if token != "|" {
                        let entry = by_offset
                            .entry(start)
                            .or_insert_with(|| (Vec::new(), token.clone()));
                        entry.0.push(row);
                    }
                    token.clear();
                }
            } else {
                if token.is_empty() {
                    start = offset;
                }
                token.push(ch);
            }
            offset += 1;
        }
    }
    by_offset.into_values().collect()
}

/// The alignment's own column structure in the same shape as
/// `parse_rendering`, for round-trip checks.
pub fn column_structure(alignment: &Alignment) -> ParsedColumns {
    alignment
        .columns()
        .iter()
        .enumerate()
        .map(|(c, col)| {
            let mut rows: Vec<usize> = col.entries.iter().map(|&(r, _)| r).collect();
            rows.sort_unstable();
            rows.dedup();
            (rows, alignment.column_token(c).to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{PatternStore, Symbol};

    fn syms(text: &str) -> Vec<Symbol> {
        text.split_whitespace().map(|t| Symbol::new(t).unwrap()).collect()
    }

    #[test]
    fn single_row_renders_one_line() {
        let a = Alignment::from_new(&syms("a b c")).unwrap();
        let text = render_alignment(&a);
        assert_eq!(text, "a b c");
    }

    #[test]
    fn two_row_full_match_renders_three_lines() {
        let store = PatternStore::load("P 1 : t h a t").unwrap();
        let p = store.get("P").unwrap().clone();
        let a = Alignment::from_new(&syms("t h a t")).unwrap();
        let merged = a.merge_pattern(&p, &[(0, 0), (1, 1), (2, 2), (3, 3)]).unwrap();
        let text = render_alignment(&merged);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t h a t");
        assert_eq!(lines[1], "| | | |");
        assert_eq!(lines[2], "t h a t");
    }

    #[test]
    fn rendering_round_trips_column_structure() {
        let store = PatternStore::load("B 1 : %B %2 t h a t %#B").unwrap();
        let p = store.get("B").unwrap().clone();
        let a = Alignment::from_new(&syms("t h a t")).unwrap();
        let merged = a.merge_pattern(&p, &[(0, 2), (1, 3), (2, 4), (3, 5)]).unwrap();
        let parsed = parse_rendering(&render_alignment(&merged));
        assert_eq!(parsed, column_structure(&merged));
    }
}
