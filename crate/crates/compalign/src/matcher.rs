//! Flexible full or partial matching between two symbol sequences.
//!
//! Unlike standard alignment routines that return one best result, the
//! matcher returns several scored alternatives. A match is an
//! order-preserving set of hits between equal tokens; its score is the
//! summed bit-cost of the matched tokens minus a configurable penalty per
//! gap opening, so rare symbols count for more than common service symbols.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::store::{PatternStore, Symbol};

/// A single correspondence between one driving position and one target
/// position holding equal tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Hit {
    pub driving_index: usize,
    pub target_index: usize,
}

/// An ordered, non-crossing set of hits with its score in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub hits: Vec<Hit>,
    pub score: f64,
}

/// Knobs for `find_matches`.
#[derive(Debug, Clone, Copy)]
pub struct MatchParams {
    /// Maximum number of alternatives returned.
    pub max_alternatives: usize,
    /// Results with fewer hits are suppressed.
    pub min_hits: usize,
    /// Bits charged per internal gap opening on either sequence.
    pub gap_penalty: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            max_alternatives: 4,
            min_hits: 1,
            gap_penalty: 0.0,
        }
    }
}

/// Cell budget for `exhaustive_matches`.
pub const EXHAUSTIVE_CELL_LIMIT: usize = 64;

fn tokens(seq: &[Symbol]) -> Vec<&str> {
    seq.iter().map(Symbol::as_str).collect()
}

/// Returns up to `params.max_alternatives` matches between `driving` and
/// `target`, best first. Ties are broken by fewer hits, then by the
/// lexicographically smaller hit list. No match yields an empty list.
pub fn find_matches(
    store: &PatternStore,
    driving: &[Symbol],
    target: &[Symbol],
    params: &MatchParams,
) -> Vec<MatchResult> {
    if driving.is_empty() || target.is_empty() || params.max_alternatives == 0 {
        return Vec::new();
    }
    k_best_masked(
        store,
        &tokens(driving),
        &tokens(target),
        params,
        |_, _| true,
    )
}

/// Complete enumeration of every order-preserving hit subset, under the
/// same sorting contract as `find_matches`. Tractable only for tiny inputs;
/// refuses anything beyond `EXHAUSTIVE_CELL_LIMIT` cells.
pub fn exhaustive_matches(
    store: &PatternStore,
    driving: &[Symbol],
    target: &[Symbol],
) -> Result<Vec<MatchResult>> {
    if driving.len() * target.len() > EXHAUSTIVE_CELL_LIMIT {
        return Err(Error::OracleBound {
            driving: driving.len(),
            target: target.len(),
            limit: EXHAUSTIVE_CELL_LIMIT,
        });
    }
    let mut results = enumerate_matchings(
        store,
        &tokens(driving),
        &tokens(target),
        0.0,
        |_, _| true,
    );
    sort_results(&mut results);
    results.retain(|r| !r.hits.is_empty());
    Ok(results)
}

/// Scores a hit list under the module's scoring rule: matched token costs
/// minus `gap_penalty` per internal gap opening on either sequence.
fn score_hits(store: &PatternStore, driving: &[&str], hits: &[Hit], gap_penalty: f64) -> f64 {
    let mut score = 0.0;
    for (k, h) in hits.iter().enumerate() {
        score += store.cost(driving[h.driving_index]);
        if k > 0 {
            let prev = hits[k - 1];
            if h.driving_index > prev.driving_index + 1 {
                score -= gap_penalty;
            }
            if h.target_index > prev.target_index + 1 {
                score -= gap_penalty;
            }
        }
    }
    score
}

fn sort_results(results: &mut [MatchResult]) {
    results.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.hits.len().cmp(&b.hits.len()))
            .then_with(|| a.hits.cmp(&b.hits))
    });
}

/// K-best order-preserving matching over the hit lattice, with a cell-level
/// admission predicate. Used directly by the alignment engine, which forbids
/// cells that would unify a pattern position with itself.
pub(crate) fn k_best_masked(
    store: &PatternStore,
    driving: &[&str],
    target: &[&str],
    params: &MatchParams,
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<MatchResult> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (i, d) in driving.iter().enumerate() {
        for (j, t) in target.iter().enumerate() {
            if d == t && allowed(i, j) {
                cells.push((i, j));
            }
        }
    }
    if cells.is_empty() {
        return Vec::new();
    }
    cells.sort_unstable();
    let k = params.max_alternatives;

    // best[c]: up to k best partial matches ending at cell c.
    let mut best: Vec<Vec<MatchResult>> = Vec::with_capacity(cells.len());
    for (ci, &(i, j)) in cells.iter().enumerate() {
        let w = store.cost(driving[i]);
        let mut here: Vec<MatchResult> = vec![MatchResult {
            hits: vec![Hit {
                driving_index: i,
                target_index: j,
            }],
            score: w,
        }];
        for (pi, &(ip, jp)) in cells.iter().enumerate().take(ci) {
            if ip >= i || jp >= j {
                continue;
            }
            let mut penalty = 0.0;
            if i > ip + 1 {
                penalty += params.gap_penalty;
            }
            if j > jp + 1 {
                penalty += params.gap_penalty;
            }
            for prev in &best[pi] {
                let mut hits = prev.hits.clone();
                hits.push(Hit {
                    driving_index: i,
                    target_index: j,
                });
                here.push(MatchResult {
                    hits,
                    score: prev.score + w - penalty,
                });
            }
        }
        sort_results(&mut here);
        here.truncate(k);
        best.push(here);
    }

    let mut pool: Vec<MatchResult> = best.into_iter().flatten().collect();
    sort_results(&mut pool);
    pool.retain(|r| r.hits.len() >= params.min_hits);
    pool.truncate(k);
    pool
}

/// Enumerates every order-preserving hit subset (including the empty one)
/// over admitted cells. Exponential; callers are responsible for bounding
/// the input.
pub(crate) fn enumerate_matchings(
    store: &PatternStore,
    driving: &[&str],
    target: &[&str],
    gap_penalty: f64,
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<MatchResult> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (i, d) in driving.iter().enumerate() {
        for (j, t) in target.iter().enumerate() {
            if d == t && allowed(i, j) {
                cells.push((i, j));
            }
        }
    }
    cells.sort_unstable();
    let mut out = Vec::new();
    let mut current: Vec<Hit> = Vec::new();
    fn rec(
        cells: &[(usize, usize)],
        from: usize,
        current: &mut Vec<Hit>,
        out: &mut Vec<Vec<Hit>>,
    ) {
        out.push(current.clone());
        for (idx, &(i, j)) in cells.iter().enumerate().skip(from) {
            if let Some(last) = current.last() {
                if i <= last.driving_index || j <= last.target_index {
                    continue;
                }
            }
            current.push(Hit {
                driving_index: i,
                target_index: j,
            });
            rec(cells, idx + 1, current, out);
            current.pop();
        }
    }
    let mut hit_lists = Vec::new();
    rec(&cells, 0, &mut current, &mut hit_lists);
    for hits in hit_lists {
        let score = score_hits(store, driving, &hits, gap_penalty);
        out.push(MatchResult { hits, score });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::PatternStore;

    fn syms(text: &str) -> Vec<Symbol> {
        text.split_whitespace().map(|t| Symbol::new(t).unwrap()).collect()
    }

    fn uniform_store(tokens: &str) -> PatternStore {
        PatternStore::load(&format!("u 1 : {tokens}")).unwrap()
    }

    fn hit(d: usize, t: usize) -> Hit {
        Hit {
            driving_index: d,
            target_index: t,
        }
    }

    #[test]
    fn identity_match() {
        let store = uniform_store("a b c");
        let res = find_matches(
            &store,
            &syms("a b c"),
            &syms("a b c"),
            &MatchParams::default(),
        );
        assert_eq!(res[0].hits, vec![hit(0, 0), hit(1, 1), hit(2, 2)]);
    }

    #[test]
    fn omission_is_skipped() {
        let store = uniform_store("t w o");
        let res = find_matches(&store, &syms("t o"), &syms("t w o"), &MatchParams::default());
        assert_eq!(res[0].hits, vec![hit(0, 0), hit(1, 2)]);
    }

    #[test]
    fn no_equal_tokens_gives_empty_list() {
        let store = uniform_store("x y");
        let res = find_matches(&store, &syms("x"), &syms("y"), &MatchParams::default());
        assert!(res.is_empty());
        let ex = exhaustive_matches(&store, &syms("x"), &syms("y")).unwrap();
        assert!(ex.is_empty());
    }

    #[test]
    fn repeated_token_best_is_two_hits() {
        // Oracle-derived: all order-preserving hit sets of "a b a" vs "a a".
        let store = uniform_store("a b a a");
        let ex = exhaustive_matches(&store, &syms("a b a"), &syms("a a")).unwrap();
        assert_eq!(ex[0].hits, vec![hit(0, 0), hit(2, 1)]);
        let res = find_matches(&store, &syms("a b a"), &syms("a a"), &MatchParams::default());
        assert_eq!(res[0].hits, ex[0].hits);
    }

    #[test]
    fn tie_break_prefers_lexicographically_smaller_hits() {
        let store = uniform_store("a a a");
        let res = find_matches(&store, &syms("a"), &syms("a a"), &MatchParams::default());
        assert_eq!(res.len(), 2);
        assert_eq!(res[0].hits, vec![hit(0, 0)]);
        assert_eq!(res[1].hits, vec![hit(0, 1)]);
    }

    #[test]
    fn exhaustive_refuses_large_inputs() {
        let store = uniform_store("a");
        let long = syms(&"a ".repeat(9));
        let err = exhaustive_matches(&store, &long, &long).unwrap_err();
        assert!(matches!(err, Error::OracleBound { .. }));
    }

    #[test]
    fn scores_are_non_increasing() {
        let store = uniform_store("a b c a b");
        let res = find_matches(
            &store,
            &syms("a b c a"),
            &syms("a c b a"),
            &MatchParams {
                max_alternatives: 8,
                ..MatchParams::default()
            },
        );
        for w in res.windows(2) {
            assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn gap_penalty_charges_openings_on_both_sides() {
        let store = uniform_store("t w o x");
        let params = MatchParams {
            gap_penalty: 0.5,
            ..MatchParams::default()
        };
        let res = find_matches(&store, &syms("t x o"), &syms("t w o"), &params);
        // hits (0,0),(2,2): one driving gap plus one target gap.
        let expected = store.cost("t") + store.cost("o") - 1.0;
        assert_eq!(res[0].hits, vec![hit(0, 0), hit(2, 2)]);
        assert!((res[0].score - expected).abs() < 1e-12);
    }

    #[test]
    fn find_matches_is_deterministic() {
        let store = uniform_store("a b c d");
        let d = syms("a b c d a b");
        let t = syms("b a d c b a");
        let p = MatchParams {
            max_alternatives: 6,
            ..MatchParams::default()
        };
        let r1 = find_matches(&store, &d, &t, &p);
        let r2 = find_matches(&store, &d, &t, &p);
        assert_eq!(r1, r2);
    }
}
