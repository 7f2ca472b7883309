//! Multiple alignments: ordered columns of equal tokens over a New row and
//! any number of Old-pattern appearances.
//!
//! Column order is not stored positionally but derived: every row's symbols
//! must appear in increasing column order, and shared columns tie rows
//! together. The canonical order is the unique topological linearization
//! under a fixed tie-break, so structurally equal alignments always render,
//! encode, and compare identically. A merge that would force a cycle in the
//! column order is a crossing and is rejected.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::matcher::MatchResult;
use crate::store::{Pattern, Symbol};

/// What a row is an appearance of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowSource {
    /// Row 0: the New sequence.
    New,
    /// An appearance of a stored pattern. The same pattern may appear more
    /// than once in one alignment; `appearance` numbers them from 1.
    Old {
        pattern_id: String,
        appearance: usize,
    },
}

/// One row of an alignment, owning its symbol sequence.
#[derive(Debug, Clone)]
pub struct Row {
    pub source: RowSource,
    symbols: Vec<Symbol>,
    id_flags: Vec<bool>,
}

impl Row {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn token(&self, pos: usize) -> &str {
        self.symbols[pos].as_str()
    }

    pub fn is_id(&self, pos: usize) -> bool {
        self.id_flags[pos]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn pattern_id(&self) -> Option<&str> {
        match &self.source {
            RowSource::New => None,
            RowSource::Old { pattern_id, .. } => Some(pattern_id),
        }
    }
}

/// A column: the set of (row, source position) entries it contains. All
/// entries hold equal tokens; a column with two or more entries is matched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub entries: Vec<(usize, usize)>,
}

impl Column {
    pub fn is_matched(&self) -> bool {
        self.entries.len() >= 2
    }
}

/// Score fields attached to an alignment by `compression_difference`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scores {
    pub matched_new_bits: f64,
    pub encoding_bits: f64,
    pub compression_difference: f64,
}

/// An ordered arrangement of one New row and Old-pattern appearances into
/// columns of equal tokens.
#[derive(Debug, Clone)]
pub struct Alignment {
    rows: Vec<Row>,
    columns: Vec<Column>,
    /// Per row: position -> canonical column index.
    col_of: Vec<Vec<usize>>,
    scores: Option<Scores>,
}

impl Alignment {
    /// The trivial alignment: row 0 alone, one column per New symbol.
    pub fn from_new(new: &[Symbol]) -> Result<Self> {
        if new.is_empty() {
            return Err(Error::InvalidInput("New sequence is empty".into()));
        }
        let row = Row {
            source: RowSource::New,
            symbols: new.to_vec(),
            id_flags: vec![false; new.len()],
        };
        let columns = (0..new.len())
            .map(|pos| Column {
                entries: vec![(0, pos)],
            })
            .collect();
        let mut a = Alignment {
            rows: vec![row],
            columns,
            col_of: Vec::new(),
            scores: None,
        };
        a.canonicalize()?;
        Ok(a)
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn scores(&self) -> Option<&Scores> {
        self.scores.as_ref()
    }

    pub(crate) fn set_scores(&mut self, scores: Scores) {
        self.scores = Some(scores);
    }

    /// The compression difference, or 0 if the alignment is unscored.
    pub fn compression_difference(&self) -> f64 {
        self.scores.map_or(0.0, |s| s.compression_difference)
    }

    /// Canonical column index of a row position.
    pub fn column_of(&self, row: usize, pos: usize) -> usize {
        self.col_of[row][pos]
    }

    /// Token shared by all entries of a column.
    pub fn column_token(&self, col: usize) -> &str {
        let (r, p) = self.columns[col].entries[0];
        self.rows[r].token(p)
    }

    /// True when some entry of the column is an ID-symbol of an Old row.
    pub fn column_is_id(&self, col: usize) -> bool {
        self.columns[col]
            .entries
            .iter()
            .any(|&(r, p)| r > 0 && self.rows[r].is_id(p))
    }

    /// The column tokens in canonical order: the driving sequence used when
    /// matching further patterns against this alignment.
    pub fn driving_tokens(&self) -> Vec<&str> {
        (0..self.columns.len())
            .map(|c| self.column_token(c))
            .collect()
    }

    /// Number of appearances of one pattern among the rows.
    pub fn appearances_of(&self, pattern_id: &str) -> usize {
        self.rows
            .iter()
            .filter(|r| r.pattern_id() == Some(pattern_id))
            .count()
    }

    /// Merges one more appearance of `pattern` into the alignment. `hits`
    /// binds target positions to existing canonical column indices and must
    /// be strictly increasing in both coordinates of the induced column
    /// order; the pattern's remaining symbols become new single-entry
    /// columns. Crossings, token mismatches, and self-unification (two
    /// appearances of one pattern meeting at the same source position) are
    /// rejected.
    pub fn merge_pattern(&self, pattern: &Pattern, hits: &[(usize, usize)]) -> Result<Alignment> {
        if hits.is_empty() {
            return Err(Error::MergeRejected("no hits".into()));
        }
        let mut seen_cols = std::collections::BTreeSet::new();
        let mut last_pos: Option<usize> = None;
        for &(col, pos) in hits {
            if col >= self.columns.len() || pos >= pattern.len() {
                return Err(Error::MergeRejected("hit out of range".into()));
            }
            if let Some(lp) = last_pos {
                if pos <= lp {
                    return Err(Error::MergeRejected(
                        "hits not increasing in pattern positions".into(),
                    ));
                }
            }
            last_pos = Some(pos);
            if !seen_cols.insert(col) {
                return Err(Error::MergeRejected("two hits share a column".into()));
            }
            if self.column_token(col) != pattern.token(pos) {
                return Err(Error::MergeRejected(format!(
                    "token `{}` does not match column token `{}`",
                    pattern.token(pos),
                    self.column_token(col)
                )));
            }
            for &(r, p) in &self.columns[col].entries {
                if self.rows[r].pattern_id() == Some(pattern.pattern_id()) && p == pos {
                    return Err(Error::MergeRejected(
                        "a pattern position cannot be unified with itself".into(),
                    ));
                }
            }
        }

        let row_idx = self.rows.len();
        let appearance = self.appearances_of(pattern.pattern_id()) + 1;
        let mut rows = self.rows.clone();
        rows.push(Row {
            source: RowSource::Old {
                pattern_id: pattern.pattern_id().to_string(),
                appearance,
            },
            symbols: pattern.symbols().to_vec(),
            id_flags: pattern.id_flags().to_vec(),
        });

        let mut columns = self.columns.clone();
        let mut hit_iter = hits.iter().peekable();
        for pos in 0..pattern.len() {
            if hit_iter.peek().is_some_and(|&&(_, p)| p == pos) {
                let &(col, _) = hit_iter.next().unwrap();
                columns[col].entries.push((row_idx, pos));
            } else {
                columns.push(Column {
                    entries: vec![(row_idx, pos)],
                });
            }
        }

        let mut merged = Alignment {
            rows,
            columns,
            col_of: Vec::new(),
            scores: None,
        };
        merged.canonicalize().map_err(|_| {
            Error::MergeRejected("hits would cross the existing column order".into())
        })?;
        Ok(merged)
    }

    /// Merge driven by a `MatchResult` whose driving indices are canonical
    /// column indices of this alignment.
    pub fn merge(&self, pattern: &Pattern, m: &MatchResult) -> Result<Alignment> {
        let hits: Vec<(usize, usize)> = m
            .hits
            .iter()
            .map(|h| (h.driving_index, h.target_index))
            .collect();
        self.merge_pattern(pattern, &hits)
    }

    /// Recomputes the canonical column order. Fails if the column constraint
    /// graph is cyclic (crossing connections).
    fn canonicalize(&mut self) -> Result<()> {
        let n = self.columns.len();
        // Temporary index of each column by identity in the current vec.
        let mut col_index_of: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| vec![usize::MAX; r.len()])
            .collect();
        for (ci, col) in self.columns.iter().enumerate() {
            for &(r, p) in &col.entries {
                if col_index_of[r][p] != usize::MAX {
                    return Err(Error::MergeRejected(
                        "row position appears in two columns".into(),
                    ));
                }
                col_index_of[r][p] = ci;
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            for p in 0..row.len() {
                if col_index_of[r][p] == usize::MAX {
                    return Err(Error::MergeRejected(
                        "row position missing from every column".into(),
                    ));
                }
            }
        }

        // Edges: consecutive positions of each row.
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (r, row) in self.rows.iter().enumerate() {
            for p in 1..row.len() {
                let a = col_index_of[r][p - 1];
                let b = col_index_of[r][p];
                succs[a].push(b);
                indegree[b] += 1;
            }
        }

        // Ready order: a column represented by a New entry goes first (the
        // New sequence drives the layout), then the smallest pattern id,
        // position, and row. The representative is the least entry by
        // (is_old, pattern_id, position, row), so the order is intrinsic to
        // the structure, not to the merge order that produced it.
        type ReadyKey = (
            bool,
            std::cmp::Reverse<String>,
            std::cmp::Reverse<usize>,
            std::cmp::Reverse<usize>,
            usize,
        );
        let key = |col: &Column| -> (bool, String, usize, usize) {
            col.entries
                .iter()
                .map(|&(r, p)| match self.rows[r].pattern_id() {
                    None => (false, String::new(), p, r),
                    Some(id) => (true, id.to_string(), p, r),
                })
                .min()
                .unwrap()
        };
        let ready_key = |col: &Column, ci: usize| -> ReadyKey {
            let (is_old, pid, p, r) = key(col);
            (
                !is_old,
                std::cmp::Reverse(pid),
                std::cmp::Reverse(p),
                std::cmp::Reverse(r),
                ci,
            )
        };
        let mut heap: BinaryHeap<ReadyKey> = BinaryHeap::new();
        for (ci, col) in self.columns.iter().enumerate() {
            if indegree[ci] == 0 {
                heap.push(ready_key(col, ci));
            }
        }
        let mut order = Vec::with_capacity(n);
        while let Some(k) = heap.pop() {
            let ci = k.4;
            order.push(ci);
            for &s in &succs[ci] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    heap.push(ready_key(&self.columns[s], s));
                }
            }
        }
        if order.len() != n {
            return Err(Error::MergeRejected("column order has a cycle".into()));
        }

        let mut new_columns = Vec::with_capacity(n);
        let mut col_of: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| vec![usize::MAX; r.len()])
            .collect();
        for (new_idx, &old_idx) in order.iter().enumerate() {
            let mut col = self.columns[old_idx].clone();
            col.entries.sort_unstable();
            for &(r, p) in &col.entries {
                col_of[r][p] = new_idx;
            }
            new_columns.push(col);
        }
        self.columns = new_columns;
        self.col_of = col_of;
        Ok(())
    }

    /// Downward-closure bitsets over canonical columns: `down[c]` holds every
    /// column constrained to come at or before `c`.
    pub(crate) fn downsets(&self) -> Vec<Vec<u64>> {
        let n = self.columns.len();
        let words = n.div_ceil(64);
        let mut down = vec![vec![0u64; words]; n];
        // Direct predecessors under per-row adjacency.
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, row) in self.rows.iter().enumerate() {
            for p in 1..row.len() {
                let a = self.col_of[r][p - 1];
                let b = self.col_of[r][p];
                preds[b].push(a);
            }
        }
        for c in 0..n {
            // Canonical order is a linear extension, so predecessors of c
            // have smaller canonical indices and are already closed.
            let (head, tail) = down.split_at_mut(c);
            let dc = &mut tail[0];
            dc[c / 64] |= 1 << (c % 64);
            for &p in &preds[c] {
                for (w, bits) in head[p].iter().enumerate() {
                    dc[w] |= bits;
                }
            }
        }
        down
    }

    /// Checks every structural invariant; used by the property suites.
    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() || self.rows[0].source != RowSource::New {
            return Err(Error::InvalidInput("row 0 must be the New row".into()));
        }
        for col in &self.columns {
            if col.entries.is_empty() {
                return Err(Error::InvalidInput("empty column".into()));
            }
            let tok = {
                let (r, p) = col.entries[0];
                self.rows[r].token(p)
            };
            for &(r, p) in &col.entries {
                if self.rows[r].token(p) != tok {
                    return Err(Error::InvalidInput("column tokens differ".into()));
                }
            }
        }
        // Complete coverage and strictly increasing column order per row.
        for (r, row) in self.rows.iter().enumerate() {
            let mut prev = None;
            for p in 0..row.len() {
                let c = self.col_of[r][p];
                if c == usize::MAX {
                    return Err(Error::InvalidInput("uncovered row position".into()));
                }
                if let Some(pc) = prev {
                    if c <= pc {
                        return Err(Error::InvalidInput(
                            "row positions out of column order".into(),
                        ));
                    }
                }
                prev = Some(c);
            }
        }
        Ok(())
    }

    /// Structure-identifying string: rows are relabeled by pattern and by
    /// the order of their first canonical column, so the same arrangement
    /// reached through different merge orders fingerprints identically.
    pub fn fingerprint(&self) -> String {
        let mut first_col: Vec<(usize, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let fc = (0..row.len()).map(|p| self.col_of[r][p]).min().unwrap_or(0);
                (fc, r)
            })
            .collect();
        first_col.sort_unstable();
        let mut label = vec![0usize; self.rows.len()];
        let mut next = 0usize;
        for &(_, r) in &first_col {
            label[r] = next;
            next += 1;
        }
        let mut out = String::new();
        for col in &self.columns {
            let mut entries: Vec<(usize, &str, usize)> = col
                .entries
                .iter()
                .map(|&(r, p)| (label[r], self.rows[r].pattern_id().unwrap_or(""), p))
                .collect();
            entries.sort_unstable();
            out.push('[');
            for (l, id, p) in entries {
                out.push_str(&format!("{l}:{id}:{p},"));
            }
            out.push(']');
        }
        out
    }

    /// Ordered pattern ids of the Old rows; the deterministic tie-breaker.
    pub fn pattern_id_list(&self) -> Vec<&str> {
        self.rows.iter().filter_map(|r| r.pattern_id()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::PatternStore;

    fn syms(text: &str) -> Vec<Symbol> {
        text.split_whitespace().map(|t| Symbol::new(t).unwrap()).collect()
    }

    fn pattern(id: &str, body: &str) -> Pattern {
        let store = PatternStore::load(&format!("{id} 1 : {body}")).unwrap();
        store.get(id).unwrap().clone()
    }

    #[test]
    fn full_match_merge_builds_seven_columns() {
        let a = Alignment::from_new(&syms("t h a t")).unwrap();
        let p = pattern("B", "%B %2 t h a t %#B");
        // Hits bind pattern positions 2..=5 onto the four New columns.
        let merged = a
            .merge_pattern(&p, &[(0, 2), (1, 3), (2, 4), (3, 5)])
            .unwrap();
        assert_eq!(merged.columns().len(), 7);
        let unmatched: Vec<&str> = (0..7)
            .filter(|&c| !merged.columns()[c].is_matched())
            .map(|c| merged.column_token(c))
            .collect();
        assert_eq!(unmatched, ["B", "2", "#B"]);
        merged.validate().unwrap();
    }

    #[test]
    fn crossing_hits_are_rejected() {
        let a = Alignment::from_new(&syms("a b")).unwrap();
        let p = pattern("P", "b a");
        // b before a in the pattern but after it in the New row.
        let err = a.merge_pattern(&p, &[(1, 0), (0, 1)]);
        assert!(matches!(err, Err(Error::MergeRejected(_))));
    }

    #[test]
    fn token_mismatch_is_rejected() {
        let a = Alignment::from_new(&syms("a b")).unwrap();
        let p = pattern("P", "c");
        assert!(a.merge_pattern(&p, &[(0, 0)]).is_err());
    }

    #[test]
    fn self_unification_is_rejected() {
        let a = Alignment::from_new(&syms("a b c")).unwrap();
        let p = pattern("P", "a b");
        let one = a.merge_pattern(&p, &[(0, 0), (1, 1)]).unwrap();
        // A second appearance may not land position 0 on the column already
        // holding position 0 of the first appearance.
        let col_a = one.column_of(1, 0);
        assert!(one.merge_pattern(&p, &[(col_a, 0)]).is_err());
    }

    #[test]
    fn canonical_order_is_merge_order_independent() {
        let new = syms("x y");
        let p1 = pattern("P1", "%A x %#A");
        let p2 = pattern("P2", "%B y %#B");
        let a = Alignment::from_new(&new).unwrap();
        let ab = {
            let step = a.merge_pattern(&p1, &[(0, 1)]).unwrap();
            let col_y = step.column_of(0, 1);
            step.merge_pattern(&p2, &[(col_y, 1)]).unwrap()
        };
        let ba = {
            let step = a.merge_pattern(&p2, &[(1, 1)]).unwrap();
            let col_x = step.column_of(0, 0);
            step.merge_pattern(&p1, &[(col_x, 1)]).unwrap()
        };
        assert_eq!(ab.fingerprint(), ba.fingerprint());
    }

    #[test]
    fn face_schematic_head_merge_links_parts() {
        // Two ears and two eyes already placed, then the head pattern binds
        // their boundary symbols.
        let new = syms("e a r e y e n o s e e y e e a r");
        let ear = pattern("ear", "%E %1 e a r %#E");
        let eye = pattern("eye", "%Y %2 e y e %#Y");
        let nose = pattern("nose", "%N %3 n o s e %#N");
        let head = pattern("head", "%H %4 %E %#E %Y %#Y %N %#N %Y %#Y %E %#E %#H");

        let mut a = Alignment::from_new(&new).unwrap();
        let bind = |a: &Alignment, p: &Pattern, new_positions: &[usize], from: usize| {
            let hits: Vec<(usize, usize)> = new_positions
                .iter()
                .enumerate()
                .map(|(k, &np)| (a.column_of(0, np), from + k))
                .collect();
            a.merge_pattern(p, &hits).unwrap()
        };
        a = bind(&a, &ear, &[0, 1, 2], 2);
        a = bind(&a, &eye, &[3, 4, 5], 2);
        a = bind(&a, &nose, &[6, 7, 8, 9], 2);
        a = bind(&a, &eye, &[10, 11, 12], 2);
        a = bind(&a, &ear, &[13, 14, 15], 2);
        // Head hits: E/#E of ear 1, Y/#Y of eye 1, N/#N, Y/#Y of eye 2,
        // E/#E of ear 2, matched in order against rows 1..=5.
        let rows_and_positions = [
            (1usize, 0usize, 2usize),
            (1, 5, 3),
            (2, 0, 4),
            (2, 5, 5),
            (3, 0, 6),
            (3, 6, 7),
            (4, 0, 8),
            (4, 5, 9),
            (5, 0, 10),
            (5, 5, 11),
        ];
        let hits: Vec<(usize, usize)> = rows_and_positions
            .iter()
            .map(|&(r, p, tp)| (a.column_of(r, p), tp))
            .collect();
        let merged = a.merge_pattern(&head, &hits).unwrap();
        merged.validate().unwrap();
        assert_eq!(merged.rows().len(), 7);
        assert_eq!(merged.appearances_of("ear"), 2);
        assert_eq!(merged.appearances_of("eye"), 2);
        // Every boundary symbol of the placed parts is now matched.
        for (r, p, _) in rows_and_positions {
            assert!(merged.columns()[merged.column_of(r, p)].is_matched());
        }
    }
}
