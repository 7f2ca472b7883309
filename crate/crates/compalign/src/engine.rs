//! Staged construction of multiple alignments scored by compression, plus
//! the encoding, probability, and inference operations derived from them.
//!
//! Alignments are built in stages. Stage 1 matches Old patterns against the
//! New sequence; each later stage matches Old patterns against the column
//! projection of the partial alignments that survived the beam, so a new
//! appearance can bind unmatched symbols of already-placed rows (including
//! their ID-symbols) or join an existing matched column when tokens agree.
//! After every stage only the `beam_width` best partials are carried
//! forward.

use std::collections::BTreeSet;

use crate::alignment::{Alignment, Scores};
use crate::error::Result;
use crate::matcher::{k_best_masked, MatchParams, MatchResult};
use crate::store::{Pattern, PatternStore, Symbol};

/// Search parameters for `build_alignments`.
#[derive(Debug, Clone, Copy)]
pub struct BuildParams {
    /// Partial alignments retained per stage.
    pub beam_width: usize,
    /// Maximum number of merge stages.
    pub max_stages: usize,
    /// Alignments returned.
    pub top_k: usize,
    /// Cap on appearances of one pattern in one alignment.
    pub max_appearances_per_pattern: usize,
    /// Gap penalty handed to the pairwise matcher.
    pub gap_penalty: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            beam_width: 30,
            max_stages: 12,
            top_k: 5,
            max_appearances_per_pattern: 10,
            gap_penalty: 0.0,
        }
    }
}

/// The short code that stands in for the New sequence given the store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub code: Vec<Symbol>,
}

/// Derives the encoding: the ID-symbols of Old rows that sit in unmatched
/// columns, taken in column order. Where several appearances of one pattern
/// are chained together (sharing columns), the chain counts as a single
/// instance and only its leftmost appearance contributes, which is what
/// keeps the code of a recursive run-length alignment short.
pub fn derive_encoding(alignment: &Alignment) -> Encoding {
    let reps = chain_representatives(alignment);
    let mut code = Vec::new();
    for col in alignment.columns() {
        if col.is_matched() {
            continue;
        }
        let (r, p) = col.entries[0];
        if r == 0 || !alignment.rows()[r].is_id(p) {
            continue;
        }
        if reps[r] {
            code.push(alignment.rows()[r].symbols()[p].clone());
        }
    }
    Encoding { code }
}

/// Contents symbols of Old rows in unmatched columns, in column order: the
/// material the alignment asserts beyond the New input.
pub fn infer_unseen(alignment: &Alignment) -> Vec<(Symbol, String)> {
    let mut out = Vec::new();
    for col in alignment.columns() {
        if col.is_matched() {
            continue;
        }
        let (r, p) = col.entries[0];
        if r == 0 || alignment.rows()[r].is_id(p) {
            continue;
        }
        out.push((
            alignment.rows()[r].symbols()[p].clone(),
            alignment.rows()[r].pattern_id().unwrap_or("").to_string(),
        ));
    }
    out
}

/// Marks, for every row, whether it speaks for its same-pattern chain when
/// the encoding is derived. Rows of different patterns always speak for
/// themselves; rows of one pattern connected through shared columns form a
/// chain represented by the row whose first column is leftmost.
fn chain_representatives(alignment: &Alignment) -> Vec<bool> {
    let nrows = alignment.rows().len();
    let mut parent: Vec<usize> = (0..nrows).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for col in alignment.columns() {
        for i in 0..col.entries.len() {
            for j in i + 1..col.entries.len() {
                let (ri, _) = col.entries[i];
                let (rj, _) = col.entries[j];
                if ri > 0
                    && rj > 0
                    && alignment.rows()[ri].pattern_id() == alignment.rows()[rj].pattern_id()
                {
                    let a = find(&mut parent, ri);
                    let b = find(&mut parent, rj);
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let first_col: Vec<usize> = (0..nrows)
        .map(|r| {
            (0..alignment.rows()[r].len())
                .map(|p| alignment.column_of(r, p))
                .min()
                .unwrap_or(usize::MAX)
        })
        .collect();
    let mut rep_of_root: Vec<Option<usize>> = vec![None; nrows];
    let mut order: Vec<usize> = (1..nrows).collect();
    order.sort_by_key(|&r| first_col[r]);
    for r in order {
        let root = find(&mut parent, r);
        if rep_of_root[root].is_none() {
            rep_of_root[root] = Some(r);
        }
    }
    (0..nrows)
        .map(|r| {
            if r == 0 {
                return false;
            }
            let root = find(&mut parent, r);
            rep_of_root[root] == Some(r)
        })
        .collect()
}

/// Scores an alignment: `matched_new_bits - encoding_bits`, storing all
/// three fields on the alignment and returning the difference.
pub fn compression_difference(store: &PatternStore, alignment: &mut Alignment) -> f64 {
    let mut matched_new = 0.0;
    for c in 0..alignment.columns().len() {
        let col = &alignment.columns()[c];
        if col.is_matched() && col.entries.iter().any(|&(r, _)| r == 0) {
            matched_new += store.cost(alignment.column_token(c));
        }
    }
    let encoding = derive_encoding(alignment);
    let encoding_bits: f64 = encoding.code.iter().map(|s| store.cost(s.as_str())).sum();
    let cd = matched_new - encoding_bits;
    alignment.set_scores(Scores {
        matched_new_bits: matched_new,
        encoding_bits,
        compression_difference: cd,
    });
    cd
}

/// Relative probabilities across competing alignments:
/// `p_i = 2^CD_i / sum_j 2^CD_j`, in input order.
pub fn relative_probabilities(alignments: &[Alignment]) -> Vec<f64> {
    if alignments.is_empty() {
        return Vec::new();
    }
    let cds: Vec<f64> = alignments
        .iter()
        .map(|a| a.compression_difference())
        .collect();
    let max = cds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = cds.iter().map(|cd| (cd - max).exp2()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// All merge successors of `alignment` with one more appearance of
/// `pattern`: the K best matches against the column projection, each also
/// extended by a repair pass that recovers hits the linearized projection
/// hides (floating columns are only partially ordered).
pub(crate) fn merge_candidates(
    store: &PatternStore,
    alignment: &Alignment,
    pattern: &Pattern,
    max_alternatives: usize,
    gap_penalty: f64,
) -> Vec<Alignment> {
    let driving = alignment.driving_tokens();
    let target: Vec<&str> = pattern.symbols().iter().map(Symbol::as_str).collect();
    let allowed = |col: usize, pos: usize| -> bool {
        alignment.columns()[col]
            .entries
            .iter()
            .all(|&(r, p)| !(alignment.rows()[r].pattern_id() == Some(pattern.pattern_id()) && p == pos))
    };
    let params = MatchParams {
        max_alternatives,
        min_hits: 1,
        gap_penalty,
    };
    let base = k_best_masked(store, &driving, &target, &params, allowed);
    let mut seen_hits: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();
    for m in &base {
        for hits in [to_hits(m), repair(alignment, pattern, to_hits(m), &allowed)] {
            if !seen_hits.insert(hits.clone()) {
                continue;
            }
            if let Ok(merged) = alignment.merge_pattern(pattern, &hits) {
                out.push(merged);
            }
        }
    }
    out
}

fn to_hits(m: &MatchResult) -> Vec<(usize, usize)> {
    m.hits
        .iter()
        .map(|h| (h.driving_index, h.target_index))
        .collect()
}

/// Extends a hit list with further unmatched token-equal columns wherever
/// the column partial order admits them, even if the canonical
/// linearization placed those columns out of sequence. Deterministic:
/// target positions are visited in order and the first admissible column
/// wins.
fn repair(
    alignment: &Alignment,
    pattern: &Pattern,
    mut hits: Vec<(usize, usize)>,
    allowed: &impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let down = alignment.downsets();
    let ncols = alignment.columns().len();
    let bit = |set: &Vec<u64>, c: usize| set[c / 64] >> (c % 64) & 1 == 1;
    for pos in 0..pattern.len() {
        if hits.iter().any(|&(_, p)| p == pos) {
            continue;
        }
        'cols: for col in 0..ncols {
            if alignment.columns()[col].is_matched()
                || alignment.column_token(col) != pattern.token(pos)
                || !allowed(col, pos)
            {
                continue;
            }
            if hits.iter().any(|&(c, _)| c == col) {
                continue;
            }
            for &(c, p) in &hits {
                if p < pos {
                    // col must be placeable after c.
                    if bit(&down[c], col) {
                        continue 'cols;
                    }
                } else {
                    // col must be placeable before c.
                    if bit(&down[col], c) {
                        continue 'cols;
                    }
                }
            }
            let at = hits.partition_point(|&(_, p)| p < pos);
            hits.insert(at, (col, pos));
            break;
        }
    }
    hits
}

/// Builds up to `top_k` alignments of `new` against the store, best first
/// by compression difference (ties: fewer rows, then the lexicographically
/// smaller pattern-id list). The bare row-0 alignment is returned only when
/// nothing else can be built.
pub fn build_alignments(
    store: &PatternStore,
    new: &[Symbol],
    params: &BuildParams,
) -> Result<Vec<Alignment>> {
    let mut root = Alignment::from_new(new)?;
    compression_difference(store, &mut root);
    let mut beam: Vec<Alignment> = vec![root];

    for _stage in 0..params.max_stages {
        let mut pool: Vec<Alignment> = beam.clone();
        let mut seen: BTreeSet<String> = beam.iter().map(|a| a.fingerprint()).collect();
        let mut changed = false;
        for a in &beam {
            for pattern in store.patterns() {
                if a.appearances_of(pattern.pattern_id()) >= params.max_appearances_per_pattern {
                    continue;
                }
                for mut cand in merge_candidates(
                    store,
                    a,
                    pattern,
                    params.beam_width.max(1),
                    params.gap_penalty,
                ) {
                    let fp = cand.fingerprint();
                    if !seen.insert(fp) {
                        continue;
                    }
                    compression_difference(store, &mut cand);
                    pool.push(cand);
                    changed = true;
                }
            }
        }
        sort_alignments(&mut pool);
        pool.truncate(params.beam_width.max(1));
        if !changed {
            beam = pool;
            break;
        }
        beam = pool;
    }

    sort_alignments(&mut beam);
    if beam.iter().any(|a| a.rows().len() > 1) {
        beam.retain(|a| a.rows().len() > 1);
    }
    beam.truncate(params.top_k.max(1));
    Ok(beam)
}

pub(crate) fn sort_alignments(alignments: &mut [Alignment]) {
    alignments.sort_by(|a, b| {
        b.compression_difference()
            .partial_cmp(&a.compression_difference())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.rows().len().cmp(&b.rows().len()))
            // Equal scores and rows: prefer the finer column structure.
            .then_with(|| b.columns().len().cmp(&a.columns().len()))
            .then_with(|| a.pattern_id_list().cmp(&b.pattern_id_list()))
            .then_with(|| a.fingerprint().cmp(&b.fingerprint()))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::PatternStore;

    fn syms(text: &str) -> Vec<Symbol> {
        text.split_whitespace().map(|t| Symbol::new(t).unwrap()).collect()
    }

    #[test]
    fn empty_store_returns_the_bare_alignment() {
        let store = PatternStore::new();
        let out = build_alignments(&store, &syms("a b c"), &BuildParams::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rows().len(), 1);
        assert_eq!(out[0].compression_difference(), 0.0);
    }

    #[test]
    fn bare_alignment_scores_zero() {
        let store = PatternStore::load("P 1 : a b").unwrap();
        let mut a = Alignment::from_new(&syms("x y")).unwrap();
        let cd = compression_difference(&store, &mut a);
        assert_eq!(cd, 0.0);
        assert!(derive_encoding(&a).code.is_empty());
        assert!(infer_unseen(&a).is_empty());
    }

    #[test]
    fn full_word_match_encodes_to_its_id_symbols() {
        let store = PatternStore::load("B 1 : %B %2 t h a t %#B").unwrap();
        let out = build_alignments(&store, &syms("t h a t"), &BuildParams::default()).unwrap();
        let best = &out[0];
        let encoding = derive_encoding(best);
        let code: Vec<&str> = encoding.code.iter().map(Symbol::as_str).collect();
        assert_eq!(code, ["B", "2", "#B"]);
        assert!(infer_unseen(best).is_empty());
    }

    #[test]
    fn compression_difference_matches_hand_evaluation() {
        // Store: X 1 a b c #X with frequency 3; every token counts 3 of 18,
        // so each costs log2(6) bits. Matched New = a b c, code = X 1 #X.
        let store = PatternStore::load("P 3 : %X %1 a b c %#X").unwrap();
        let out = build_alignments(&store, &syms("a b c"), &BuildParams::default()).unwrap();
        let s = out[0].scores().unwrap();
        let unit = 6.0f64.log2();
        assert!((s.matched_new_bits - 3.0 * unit).abs() < 1e-9);
        assert!((s.encoding_bits - 3.0 * unit).abs() < 1e-9);
        assert!((s.compression_difference - 0.0).abs() < 1e-9);
    }

    #[test]
    fn probabilities_normalize_and_follow_cd() {
        let store = PatternStore::load("P 1 : a").unwrap();
        let mk = |cd: f64| {
            let mut a = Alignment::from_new(&syms("a")).unwrap();
            a.set_scores(Scores {
                matched_new_bits: 0.0,
                encoding_bits: 0.0,
                compression_difference: cd,
            });
            a
        };
        let _ = &store;
        assert_eq!(relative_probabilities(&[mk(3.0)]), vec![1.0]);
        let two = relative_probabilities(&[mk(2.0), mk(2.0)]);
        assert!((two[0] - 0.5).abs() < 1e-12 && (two[1] - 0.5).abs() < 1e-12);
        let bit = relative_probabilities(&[mk(3.0), mk(2.0)]);
        assert!((bit[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((bit[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ambiguity_keeps_both_equal_readings() {
        // Two disjoint patterns cover the New sequence equally well.
        let store = PatternStore::load("P1 1 : %X %1 a b %#X\nP2 1 : %Y %2 a b %#Y").unwrap();
        let out = build_alignments(&store, &syms("a b"), &BuildParams::default()).unwrap();
        assert!(out.len() >= 2);
        let cds: Vec<f64> = out.iter().map(|a| a.compression_difference()).collect();
        assert_eq!(cds[0], cds[1]);
        let ids: BTreeSet<&str> = out[..2]
            .iter()
            .map(|a| a.pattern_id_list()[0])
            .collect();
        assert_eq!(ids.len(), 2);
    }

    #[test]
    fn ranking_is_non_increasing_in_cd() {
        let store = PatternStore::load(
            "P1 1 : %X %1 a b %#X\nP2 1 : %Y %2 a %#Y\nP3 1 : %Z %3 b %#Z",
        )
        .unwrap();
        let out = build_alignments(&store, &syms("a b"), &BuildParams::default()).unwrap();
        for w in out.windows(2) {
            assert!(w[0].compression_difference() >= w[1].compression_difference());
        }
    }

    #[test]
    fn build_is_deterministic() {
        let store = PatternStore::load(
            "P1 1 : %X %1 a b %#X\nP2 1 : %Y %2 b c %#Y\nP3 1 : %Z %3 a c %#Z",
        )
        .unwrap();
        let p = BuildParams::default();
        let r1 = build_alignments(&store, &syms("a b c"), &p).unwrap();
        let r2 = build_alignments(&store, &syms("a b c"), &p).unwrap();
        let f1: Vec<String> = r1.iter().map(|a| a.fingerprint()).collect();
        let f2: Vec<String> = r2.iter().map(|a| a.fingerprint()).collect();
        assert_eq!(f1, f2);
    }
}
