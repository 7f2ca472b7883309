//! Exhaustive enumeration oracles for verifying the beam search on small
//! instances. These intentionally share the merge machinery with the engine
//! so that the engine's scoring and the oracle's ground truth cannot drift
//! apart, while exploring every merge order instead of a beam.

use std::collections::BTreeSet;

use crate::alignment::Alignment;
use crate::engine::{compression_difference, merge_candidates, sort_alignments};
use crate::error::Result;
use crate::store::{PatternStore, Symbol};

/// Bounds for the exhaustive alignment enumeration.
#[derive(Debug, Clone, Copy)]
pub struct OracleBounds {
    pub max_patterns: usize,
    pub max_total_symbols: usize,
    pub max_new_len: usize,
    pub max_appearances_per_pattern: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            max_patterns: 4,
            max_total_symbols: 24,
            max_new_len: 8,
            max_appearances_per_pattern: 2,
        }
    }
}

/// Enumerates every alignment reachable by repeated merging, in any order,
/// and returns them sorted best-first. Intended for small instances only.
pub fn enumerate_alignments(
    store: &PatternStore,
    new: &[Symbol],
    bounds: &OracleBounds,
) -> Result<Vec<Alignment>> {
    let total_symbols: usize = store.patterns().map(|p| p.len()).sum();
    if store.len() > bounds.max_patterns
        || total_symbols > bounds.max_total_symbols
        || new.len() > bounds.max_new_len
    {
        return Err(crate::error::Error::InvalidInput(format!(
            "instance exceeds oracle bounds: {} patterns, {} symbols, New length {}",
            store.len(),
            total_symbols,
            new.len()
        )));
    }

    let mut root = Alignment::from_new(new)?;
    compression_difference(store, &mut root);
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(root.fingerprint());
    let mut all = vec![root.clone()];
    let mut frontier = vec![root];

    while let Some(current) = frontier.pop() {
        for pattern in store.patterns() {
            if current.appearances_of(pattern.pattern_id())
                >= bounds.max_appearances_per_pattern
            {
                continue;
            }
            // A merge per order-preserving matching; usize::MAX keeps the
            // k-best generator exhaustive at these sizes.
            for mut cand in merge_candidates(store, &current, pattern, usize::MAX, 0.0) {
                let fp = cand.fingerprint();
                if !seen.insert(fp) {
                    continue;
                }
                compression_difference(store, &mut cand);
                all.push(cand.clone());
                frontier.push(cand);
            }
        }
    }

    sort_alignments(&mut all);
    Ok(all)
}
