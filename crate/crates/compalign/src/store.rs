//! Symbols, patterns, the pattern store, and the frequency-based bit-cost
//! model that all scoring rests on.
//!
//! A store is loaded from a plain text file with one pattern per line:
//!
//! ```text
//! <pattern_id> <frequency> : <token> <token> ...
//! ```
//!
//! The frequency may be omitted (`<pattern_id> : <token> ...`), in which case
//! it defaults to 1. A token prefixed with `%` is an ID-symbol (service
//! symbol); the prefix is stripped on load. Lines starting with `#` are
//! comments and blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marker prefix for ID-symbols in store files. Stripped into the ID-flag.
pub const ID_MARKER: char = '%';

/// An atomic token, matched only in an all-or-nothing way.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    /// Builds a symbol, rejecting empty tokens, whitespace, and a leading
    /// ID marker (the marker belongs in the file format, not the token).
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() {
            return Err(Error::InvalidSymbol("empty token".into()));
        }
        if token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidSymbol(format!(
                "token `{token}` contains whitespace"
            )));
        }
        if token.starts_with(ID_MARKER) {
            return Err(Error::InvalidSymbol(format!(
                "token `{token}` begins with the reserved marker `{ID_MARKER}`"
            )));
        }
        Ok(Symbol(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Whether a pattern was supplied up front or minted by the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternOrigin {
    Given,
    Learned,
}

/// An ordered sequence of symbols with a per-position ID flag, a frequency,
/// and an origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pattern_id: String,
    symbols: Vec<Symbol>,
    id_flags: Vec<bool>,
    frequency: u32,
    origin: PatternOrigin,
}

impl Pattern {
    pub fn new(
        pattern_id: impl Into<String>,
        symbols: Vec<Symbol>,
        id_flags: Vec<bool>,
        frequency: u32,
        origin: PatternOrigin,
    ) -> Result<Self> {
        let pattern_id = pattern_id.into();
        if symbols.is_empty() {
            return Err(Error::InvalidPattern(format!(
                "pattern `{pattern_id}` has no symbols"
            )));
        }
        if id_flags.len() != symbols.len() {
            return Err(Error::InvalidPattern(format!(
                "pattern `{pattern_id}` has {} symbols but {} id flags",
                symbols.len(),
                id_flags.len()
            )));
        }
        if frequency == 0 {
            return Err(Error::InvalidPattern(format!(
                "pattern `{pattern_id}` has zero frequency"
            )));
        }
        Ok(Pattern {
            pattern_id,
            symbols,
            id_flags,
            frequency,
            origin,
        })
    }

    pub fn pattern_id(&self) -> &str {
        &self.pattern_id
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn id_flags(&self) -> &[bool] {
        &self.id_flags
    }

    pub fn frequency(&self) -> u32 {
        self.frequency
    }

    pub fn origin(&self) -> PatternOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // symbols is non-empty by construction
    }

    pub fn token(&self, pos: usize) -> &str {
        self.symbols[pos].as_str()
    }

    pub fn is_id(&self, pos: usize) -> bool {
        self.id_flags[pos]
    }

    pub fn with_frequency(&self, frequency: u32) -> Pattern {
        let mut p = self.clone();
        p.frequency = frequency.max(1);
        p
    }

    /// Formats the pattern as one store-file line.
    pub fn to_store_line(&self) -> String {
        let body = self
            .symbols
            .iter()
            .zip(&self.id_flags)
            .map(|(s, &id)| {
                if id {
                    format!("{ID_MARKER}{s}")
                } else {
                    s.as_str().to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        format!("{} {} : {}", self.pattern_id, self.frequency, body)
    }
}

/// The repertoire of Old patterns plus the symbol frequency table from which
/// bit-costs derive. Immutable after load; all queries are pure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternStore {
    patterns: BTreeMap<String, Pattern>,
    symbol_table: BTreeMap<String, u64>,
    total_count: u64,
}

impl PatternStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_patterns<I: IntoIterator<Item = Pattern>>(patterns: I) -> Result<Self> {
        let mut store = Self::new();
        for p in patterns {
            store.insert(p)?;
        }
        Ok(store)
    }

    /// Adds a pattern and folds its frequency-weighted token occurrences
    /// into the symbol table.
    pub fn insert(&mut self, pattern: Pattern) -> Result<()> {
        if self.patterns.contains_key(pattern.pattern_id()) {
            return Err(Error::DuplicateId(pattern.pattern_id().to_string()));
        }
        for sym in pattern.symbols() {
            *self.symbol_table.entry(sym.as_str().to_string()).or_insert(0) +=
                u64::from(pattern.frequency());
            self.total_count += u64::from(pattern.frequency());
        }
        self.patterns.insert(pattern.pattern_id().to_string(), pattern);
        Ok(())
    }

    /// Parses a store file. Errors name the offending 1-based line number.
    pub fn load(text: &str) -> Result<Self> {
        let mut store = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let colon = fields.iter().position(|f| *f == ":").ok_or(Error::Parse {
                line: line_no,
                message: "missing `:` separator".into(),
            })?;
            let (id, frequency) = match colon {
                1 => (fields[0], 1u32),
                2 => {
                    let freq: u32 = fields[1].parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("frequency `{}` is not a positive integer", fields[1]),
                    })?;
                    if freq == 0 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "frequency must be at least 1".into(),
                        });
                    }
                    (fields[0], freq)
                }
                0 => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "missing pattern id before `:`".into(),
                    })
                }
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "expected `<id> [frequency] : <tokens>`".into(),
                    })
                }
            };
            let body = &fields[colon + 1..];
            if body.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty pattern body".into(),
                });
            }
            let mut symbols = Vec::with_capacity(body.len());
            let mut id_flags = Vec::with_capacity(body.len());
            for tok in body {
                let (flag, text) = match tok.strip_prefix(ID_MARKER) {
                    Some(rest) => (true, rest),
                    None => (false, *tok),
                };
                let sym = Symbol::new(text).map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
                symbols.push(sym);
                id_flags.push(flag);
            }
            let pattern = Pattern::new(id, symbols, id_flags, frequency, PatternOrigin::Given)
                .map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            store.insert(pattern)?;
        }
        Ok(store)
    }

    /// Serializes back to the store file format (one line per pattern,
    /// ordered by pattern id).
    pub fn to_store_format(&self) -> String {
        let mut out = String::new();
        for p in self.patterns.values() {
            out.push_str(&p.to_store_line());
            out.push('\n');
        }
        out
    }

    pub fn patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.patterns.values()
    }

    pub fn get(&self, pattern_id: &str) -> Option<&Pattern> {
        self.patterns.get(pattern_id)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn symbol_table(&self) -> &BTreeMap<String, u64> {
        &self.symbol_table
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Folds extra occurrence counts into the symbol table without adding a
    /// pattern. The learner uses this to price raw corpus symbols.
    pub(crate) fn add_count(&mut self, token: &str, count: u64) {
        *self.symbol_table.entry(token.to_string()).or_insert(0) += count;
        self.total_count += count;
    }

    /// Shannon cost of one token in bits: `-log2(count / total)` over the
    /// frequency-weighted symbol table. Tokens absent from the table cost
    /// `-log2(1 / (total + 1))`. Undefined on an empty table.
    pub fn symbol_cost(&self, token: &str) -> Result<f64> {
        if self.total_count == 0 {
            return Err(Error::UndefinedCost);
        }
        Ok(self.cost(token))
    }

    /// Total variant used by the matcher and engine: an empty table makes
    /// every token cost zero bits instead of erroring.
    pub(crate) fn cost(&self, token: &str) -> f64 {
        let total = self.total_count as f64;
        match self.symbol_table.get(token) {
            Some(&count) if count > 0 => -(count as f64 / total).log2(),
            _ => {
                if self.total_count == 0 {
                    0.0
                } else {
                    -(1.0 / (total + 1.0)).log2()
                }
            }
        }
    }

    /// Sum of symbol costs over a pattern's symbols.
    pub fn pattern_cost(&self, pattern: &Pattern) -> Result<f64> {
        let mut bits = 0.0;
        for sym in pattern.symbols() {
            bits += self.symbol_cost(sym.as_str())?;
        }
        Ok(bits)
    }
}

/// Parses a New file: one whitespace-separated sequence per line, no flags.
/// Lines are returned separately; `#`-initial lines and blanks are skipped.
pub fn load_sequences(text: &str) -> Result<Vec<Vec<Symbol>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut seq = Vec::new();
        for tok in line.split_whitespace() {
            seq.push(Symbol::new(tok).map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?);
        }
        out.push(seq);
    }
    Ok(out)
}

/// Parses a New file and concatenates its lines, in file order, into one
/// sequence.
pub fn load_new_sequence(text: &str) -> Result<Vec<Symbol>> {
    Ok(load_sequences(text)?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(text: &str) -> Vec<Symbol> {
        text.split_whitespace().map(|t| Symbol::new(t).unwrap()).collect()
    }

    #[test]
    fn parses_run_length_pattern_line() {
        let store =
            PatternStore::load("P1 5 : %X %1 a b c %X %1 %#X %#X").unwrap();
        let p = store.get("P1").unwrap();
        let tokens: Vec<&str> = p.symbols().iter().map(Symbol::as_str).collect();
        assert_eq!(tokens, ["X", "1", "a", "b", "c", "X", "1", "#X", "#X"]);
        assert_eq!(
            p.id_flags(),
            [true, true, false, false, false, true, true, true, true]
        );
        assert_eq!(p.frequency(), 5);
    }

    #[test]
    fn empty_file_gives_empty_store() {
        let store = PatternStore::load("").unwrap();
        assert!(store.is_empty());
        assert!(store.symbol_table().is_empty());
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let err = PatternStore::load("P1 1 : a b\nP1 1 : c d").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(id) if id == "P1"));
    }

    #[test]
    fn malformed_lines_name_their_line_number() {
        let err = PatternStore::load("P1 1 : a\nP2 1 :").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = PatternStore::load("\n\nnot-a-line").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn omitted_frequency_defaults_to_one() {
        let store = PatternStore::load("P1 : a b").unwrap();
        assert_eq!(store.get("P1").unwrap().frequency(), 1);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let store = PatternStore::load("# header\n\nP1 2 : a %b\n").unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.total_count(), 4);
    }

    #[test]
    fn two_uniform_token_types_cost_one_bit_each() {
        let store = PatternStore::load("P1 1 : a b").unwrap();
        assert!((store.symbol_cost("a").unwrap() - 1.0).abs() < 1e-12);
        assert!((store.symbol_cost("b").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_token_type_costs_zero_bits() {
        let store = PatternStore::load("P1 1 : a a a").unwrap();
        assert_eq!(store.symbol_cost("a").unwrap(), 0.0);
    }

    #[test]
    fn unknown_token_uses_total_plus_one() {
        let store = PatternStore::load("P1 3 : a").unwrap();
        let expected = -(1.0f64 / 4.0).log2();
        assert!((store.symbol_cost("z").unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_table_cost_is_undefined() {
        let store = PatternStore::new();
        assert!(matches!(store.symbol_cost("a"), Err(Error::UndefinedCost)));
        let p = Pattern::new(
            "q",
            syms("a"),
            vec![false],
            1,
            PatternOrigin::Given,
        )
        .unwrap();
        assert!(matches!(store.pattern_cost(&p), Err(Error::UndefinedCost)));
    }

    #[test]
    fn single_symbol_pattern_over_uniform_store_costs_one_bit() {
        let store = PatternStore::load("P1 1 : a b").unwrap();
        let p = Pattern::new("q", syms("a"), vec![false], 1, PatternOrigin::Given).unwrap();
        assert!((store.pattern_cost(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn run_length_pattern_cost_matches_hand_summation() {
        // Counts per token over the single pattern (freq 1): X:2 1:2 #X:2,
        // a:1 b:1 c:1, total 9. Six positions cost log2(9/2), three cost
        // log2(9).
        let store = PatternStore::load("P1 1 : %X %1 a b c %X %1 %#X %#X").unwrap();
        let p = store.get("P1").unwrap().clone();
        let expected = 6.0 * (9.0f64 / 2.0).log2() + 3.0 * 9.0f64.log2();
        assert!((store.pattern_cost(&p).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn in_table_costs_form_a_distribution() {
        let store = PatternStore::load("P1 2 : a b %c\nP2 3 : a d").unwrap();
        let sum: f64 = store
            .symbol_table()
            .keys()
            .map(|t| (2.0f64).powf(-store.symbol_cost(t).unwrap()))
            .sum();
        assert!((sum - 1.0).abs() < 1e-9);
        for t in store.symbol_table().keys() {
            assert!(store.symbol_cost(t).unwrap() >= 0.0);
        }
    }

    #[test]
    fn table_rebuild_is_order_independent() {
        let a = PatternStore::load("P1 1 : a b\nP2 2 : b c").unwrap();
        let mut b = PatternStore::new();
        let p2 = a.get("P2").unwrap().clone();
        let p1 = a.get("P1").unwrap().clone();
        b.insert(p2).unwrap();
        b.insert(p1).unwrap();
        assert_eq!(a.symbol_table(), b.symbol_table());
        assert_eq!(a.total_count(), b.total_count());
    }

    #[test]
    fn store_round_trips_through_serialization() {
        let text = "P1 5 : %X %1 a b c %X %1 %#X %#X\nP2 1 : t w o\n";
        let store = PatternStore::load(text).unwrap();
        let reloaded = PatternStore::load(&store.to_store_format()).unwrap();
        assert_eq!(store, reloaded);
    }

    #[test]
    fn symbol_rejects_bad_tokens() {
        assert!(Symbol::new("").is_err());
        assert!(Symbol::new("a b").is_err());
        assert!(Symbol::new("%x").is_err());
        assert!(Symbol::new("#X").is_ok());
    }
}
