//! Unsupervised learning: derive candidate Old patterns from alignments,
//! score candidate grammars by a two-part description-length cost, and
//! search over candidate sets, weeding out the low scorers.
//!
//! A grammar candidate is a set of patterns with `G` (grammar size in
//! bits), `E` (corpus encoding size in bits), and `T = G + E`. Derivation
//! segments an alignment into maximal runs that are fully matched or fully
//! unmatched; matched runs become plain patterns, competing unmatched runs
//! in one slot share a freshly minted class, and an abstract pattern
//! records the run sequence.

use std::collections::BTreeSet;

use crate::alignment::Alignment;
use crate::engine::{build_alignments, BuildParams};
use crate::error::{Error, Result};
use crate::store::{Pattern, PatternOrigin, PatternStore, Symbol};

const ALPHABET: [char; 26] = [
    'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'O', 'P', 'Q', 'R',
    'S', 'T', 'U', 'V', 'W', 'X', 'Y', 'Z',
];

/// Deterministic generator of class tokens and numeric ID tokens that never
/// collide with reserved tokens (the corpus alphabet plus everything minted
/// before).
#[derive(Debug, Clone)]
pub struct FreshIds {
    reserved: BTreeSet<String>,
    next_letter: usize,
    next_number: u64,
}

impl FreshIds {
    pub fn new<I: IntoIterator<Item = String>>(reserved: I) -> Self {
        FreshIds {
            reserved: reserved.into_iter().collect(),
            next_letter: 0,
            next_number: 1,
        }
    }

    /// A fresh class pair: the class token and its `#`-prefixed closer.
    pub fn fresh_class(&mut self) -> (String, String) {
        loop {
            let i = self.next_letter;
            self.next_letter += 1;
            let letter = ALPHABET[i % 26];
            let name = if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            };
            let closer = format!("#{name}");
            if !self.reserved.contains(&name) && !self.reserved.contains(&closer) {
                self.reserved.insert(name.clone());
                self.reserved.insert(closer.clone());
                return (name, closer);
            }
        }
    }

    /// A fresh numeric ID token.
    pub fn fresh_number(&mut self) -> String {
        loop {
            let n = self.next_number;
            self.next_number += 1;
            let name = n.to_string();
            if !self.reserved.contains(&name) {
                self.reserved.insert(name.clone());
                return name;
            }
        }
    }
}

/// Classification of one maximal run of columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Matched,
    Unmatched,
}

/// One maximal run, with the pattern minted from it (if any).
#[derive(Debug, Clone)]
pub struct SegmentRun {
    pub kind: RunKind,
    /// Row owning an unmatched run; `None` for matched runs.
    pub row: Option<usize>,
    pub tokens: Vec<Symbol>,
    pub minted: Option<String>,
}

/// The runs an alignment was segmented into, in column order.
#[derive(Debug, Clone, Default)]
pub struct SegmentationTrace {
    pub runs: Vec<SegmentRun>,
}

/// A set of patterns under evaluation, with its two-part cost.
#[derive(Debug, Clone)]
pub struct GrammarCandidate {
    pub patterns: Vec<Pattern>,
    /// Grammar size in bits.
    pub grammar_bits: f64,
    /// Corpus encoding size in bits.
    pub encoding_bits: f64,
    /// `grammar_bits + encoding_bits`.
    pub total_bits: f64,
}

/// Search parameters for `learn`.
#[derive(Debug, Clone, Copy)]
pub struct LearnParams {
    /// Beam width for the alignments built while scoring and deriving.
    pub beam_width: usize,
    /// Candidates kept after each weeding step.
    pub candidate_pool_size: usize,
    /// Full sweeps over the corpus.
    pub max_passes: usize,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            beam_width: 10,
            candidate_pool_size: 10,
            max_passes: 3,
        }
    }
}

/// Per-pass pool scores, serializable as a plain text trace.
#[derive(Debug, Clone, Default)]
pub struct LearnTrace {
    pub passes: Vec<Vec<f64>>,
}

impl LearnTrace {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, pass) in self.passes.iter().enumerate() {
            let scores = pass
                .iter()
                .map(|t| format!("{t:.3}"))
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!("pass {}: {}\n", i + 1, scores));
        }
        out
    }
}

/// Grammar size: the summed symbol cost of every candidate pattern plus a
/// per-pattern overhead of `log2(N + 1)` bits.
pub fn grammar_size(store: &PatternStore, patterns: &[Pattern]) -> f64 {
    let n = patterns.len() as f64;
    let mut bits = 0.0;
    for p in patterns {
        for s in p.symbols() {
            bits += store.cost(s.as_str());
        }
    }
    bits + n * (n + 1.0).log2()
}

/// Corpus encoding size: for each sequence, the encoding bits of its best
/// alignment against the store plus the raw cost of New symbols left
/// unmatched.
pub fn corpus_encoding_size(
    store: &PatternStore,
    corpus: &[Vec<Symbol>],
    beam_width: usize,
) -> f64 {
    let params = BuildParams {
        beam_width: beam_width.max(1),
        max_stages: 8,
        top_k: 1,
        max_appearances_per_pattern: 4,
        gap_penalty: 0.0,
    };
    let mut total = 0.0;
    for seq in corpus {
        if seq.is_empty() {
            continue;
        }
        match build_alignments(store, seq, &params) {
            Ok(aligns) if !aligns.is_empty() => {
                let best = &aligns[0];
                let scores = best.scores().copied().unwrap_or_default();
                total += scores.encoding_bits;
                for c in 0..best.columns().len() {
                    let col = &best.columns()[c];
                    if !col.is_matched() && col.entries[0].0 == 0 {
                        total += store.cost(best.column_token(c));
                    }
                }
            }
            _ => {
                for s in seq {
                    total += store.cost(s.as_str());
                }
            }
        }
    }
    total
}

/// Derives candidate patterns from an alignment by segmenting it into
/// maximal fully-matched and fully-unmatched runs of contents columns
/// (ID-symbol columns act as separators).
///
/// Matched runs mint plain patterns; unmatched runs sitting in the same
/// slot share a fresh class pair; an abstract pattern records the run
/// sequence. When no slot is contested and something was unmatched, the
/// unified projection of all contents columns is minted as well, which is
/// how overlapping fragments grow into one sequence. A degenerate alignment
/// with no matched contents columns yields the source rows as whole-pattern
/// candidates.
pub fn derive_patterns(
    store: &PatternStore,
    alignment: &Alignment,
    fresh: &mut FreshIds,
) -> Result<(Vec<Pattern>, SegmentationTrace)> {
    let _ = store;
    if alignment.rows().len() < 2 {
        return Err(Error::InvalidInput(
            "pattern derivation needs an alignment with at least 2 rows".into(),
        ));
    }

    // Segment the contents columns into maximal runs.
    #[derive(Debug)]
    struct RawRun {
        kind: RunKind,
        row: Option<usize>,
        tokens: Vec<Symbol>,
    }
    let mut runs: Vec<RawRun> = Vec::new();
    for (c, col) in alignment.columns().iter().enumerate() {
        if alignment.column_is_id(c) {
            continue;
        }
        let (kind, row) = if col.is_matched() {
            (RunKind::Matched, None)
        } else {
            (RunKind::Unmatched, Some(col.entries[0].0))
        };
        let token = Symbol::new(alignment.column_token(c))?;
        match runs.last_mut() {
            Some(last) if last.kind == kind && last.row == row => last.tokens.push(token),
            _ => runs.push(RawRun {
                kind,
                row,
                tokens: vec![token],
            }),
        }
    }

    let mut minted: Vec<Pattern> = Vec::new();
    let mut trace = SegmentationTrace::default();
    let mint = |fresh: &mut FreshIds,
                minted: &mut Vec<Pattern>,
                class: (String, String),
                tokens: &[Symbol]|
     -> Result<(String, String, String)> {
        let (open, close) = class;
        let number = fresh.fresh_number();
        let id = format!("{open}{number}");
        let mut symbols = vec![Symbol::new(open.clone())?, Symbol::new(number)?];
        let mut flags = vec![true, true];
        symbols.extend(tokens.iter().cloned());
        flags.extend(std::iter::repeat(false).take(tokens.len()));
        symbols.push(Symbol::new(close.clone())?);
        flags.push(true);
        minted.push(Pattern::new(
            id.clone(),
            symbols,
            flags,
            1,
            PatternOrigin::Learned,
        )?);
        Ok((id, open, close))
    };

    if !runs.iter().any(|r| r.kind == RunKind::Matched) {
        // Degenerate: no matched contents columns at all.
        for (r, row) in alignment.rows().iter().enumerate() {
            let tokens: Vec<Symbol> = (0..row.len())
                .filter(|&p| !row.is_id(p))
                .map(|p| row.symbols()[p].clone())
                .collect();
            if tokens.is_empty() {
                continue;
            }
            let class = fresh.fresh_class();
            let (id, _, _) = mint(fresh, &mut minted, class, &tokens)?;
            trace.runs.push(SegmentRun {
                kind: RunKind::Unmatched,
                row: Some(r),
                tokens,
                minted: Some(id),
            });
        }
        return Ok((minted, trace));
    }

    // Group runs into elements: matched runs stand alone, consecutive
    // unmatched runs form one slot.
    enum Element {
        Matched(Vec<Symbol>),
        Slot(Vec<(usize, Vec<Symbol>)>),
    }
    let mut elements: Vec<Element> = Vec::new();
    for run in &runs {
        match run.kind {
            RunKind::Matched => elements.push(Element::Matched(run.tokens.clone())),
            RunKind::Unmatched => {
                let entry = (run.row.unwrap_or(0), run.tokens.clone());
                match elements.last_mut() {
                    Some(Element::Slot(slots)) => slots.push(entry),
                    _ => elements.push(Element::Slot(vec![entry])),
                }
            }
        }
    }

    let contested = elements.iter().any(|e| match e {
        Element::Slot(slots) => {
            let rows: BTreeSet<usize> = slots.iter().map(|&(r, _)| r).collect();
            rows.len() >= 2
        }
        Element::Matched(_) => false,
    });
    let has_unmatched = runs.iter().any(|r| r.kind == RunKind::Unmatched);

    // Mint per element, collecting the class sequence for the abstract
    // pattern.
    let mut sequence: Vec<(String, String)> = Vec::new();
    for element in &elements {
        match element {
            Element::Matched(tokens) => {
                let class = fresh.fresh_class();
                sequence.push(class.clone());
                let (id, _, _) = mint(fresh, &mut minted, class, tokens)?;
                trace.runs.push(SegmentRun {
                    kind: RunKind::Matched,
                    row: None,
                    tokens: tokens.clone(),
                    minted: Some(id),
                });
            }
            Element::Slot(slots) => {
                let class = fresh.fresh_class();
                sequence.push(class.clone());
                for (row, tokens) in slots {
                    let (id, _, _) = mint(fresh, &mut minted, class.clone(), tokens)?;
                    trace.runs.push(SegmentRun {
                        kind: RunKind::Unmatched,
                        row: Some(*row),
                        tokens: tokens.clone(),
                        minted: Some(id),
                    });
                }
            }
        }
    }

    if sequence.len() >= 2 {
        let (open, close) = fresh.fresh_class();
        let number = fresh.fresh_number();
        let id = format!("{open}{number}");
        let mut symbols = vec![Symbol::new(open)?, Symbol::new(number)?];
        for (o, c) in &sequence {
            symbols.push(Symbol::new(o.clone())?);
            symbols.push(Symbol::new(c.clone())?);
        }
        symbols.push(Symbol::new(close)?);
        let flags = vec![true; symbols.len()];
        minted.push(Pattern::new(id, symbols, flags, 1, PatternOrigin::Learned)?);
    }

    if !contested && has_unmatched {
        // Pure overlap or extension: also mint the unified projection.
        let tokens: Vec<Symbol> = runs.iter().flat_map(|r| r.tokens.clone()).collect();
        let class = fresh.fresh_class();
        mint(fresh, &mut minted, class, &tokens)?;
    }

    Ok((minted, trace))
}

/// Candidate-set key that ignores the particular fresh tokens minted, so
/// two derivations of the same structure deduplicate.
fn canonical_form(patterns: &[Pattern]) -> String {
    let mut sorted: Vec<&Pattern> = patterns.iter().collect();
    sorted.sort_by_key(|p| {
        let contents: Vec<&str> = p
            .symbols()
            .iter()
            .zip(p.id_flags())
            .filter(|&(_, &id)| !id)
            .map(|(s, _)| s.as_str())
            .collect();
        (
            contents.join(" "),
            p.len(),
            p.symbols()
                .iter()
                .map(|s| s.as_str().to_string())
                .collect::<Vec<_>>(),
        )
    });
    let mut names: std::collections::BTreeMap<&str, String> = std::collections::BTreeMap::new();
    let mut out = String::new();
    for p in sorted {
        out.push('{');
        out.push_str(&p.frequency().to_string());
        out.push(':');
        for (s, &id) in p.symbols().iter().zip(p.id_flags()) {
            if id {
                let next = names.len();
                let name = names
                    .entry(s.as_str())
                    .or_insert_with(|| format!("i{next}"));
                out.push_str(name);
            } else {
                out.push_str(s.as_str());
            }
            out.push(' ');
        }
        out.push('}');
    }
    out
}

/// Builds the scoring store for a candidate: its patterns, with the corpus
/// token counts folded into the symbol table so raw symbols always carry a
/// well-defined cost.
fn scoring_store(patterns: &[Pattern], corpus: &[Vec<Symbol>]) -> Result<PatternStore> {
    let mut store = PatternStore::from_patterns(patterns.iter().cloned())?;
    for seq in corpus {
        for s in seq {
            store.add_count(s.as_str(), 1);
        }
    }
    Ok(store)
}

fn score_candidate(
    patterns: Vec<Pattern>,
    corpus: &[Vec<Symbol>],
    beam_width: usize,
) -> Result<GrammarCandidate> {
    let store = scoring_store(&patterns, corpus)?;
    let g = grammar_size(&store, &patterns);
    let e = corpus_encoding_size(&store, corpus, beam_width);
    Ok(GrammarCandidate {
        patterns,
        grammar_bits: g,
        encoding_bits: e,
        total_bits: g + e,
    })
}

fn add_patterns(base: &[Pattern], extra: &[Pattern]) -> Vec<Pattern> {
    let mut out = base.to_vec();
    let mut bodies: BTreeSet<Vec<String>> = base
        .iter()
        .map(|p| p.symbols().iter().map(|s| s.as_str().to_string()).collect())
        .collect();
    let mut ids: BTreeSet<String> = base.iter().map(|p| p.pattern_id().to_string()).collect();
    for p in extra {
        let body: Vec<String> = p.symbols().iter().map(|s| s.as_str().to_string()).collect();
        if bodies.contains(&body) || ids.contains(p.pattern_id()) {
            continue;
        }
        bodies.insert(body);
        ids.insert(p.pattern_id().to_string());
        out.push(p.clone());
    }
    out
}

/// Unsupervised grammar search: sweeps the corpus, deriving patterns from
/// the best alignments of each sequence against every pooled candidate,
/// spawning successor candidate sets, and retaining the
/// `candidate_pool_size` best by `T`. Returns the pool sorted by `T`
/// ascending, plus the per-pass trace.
pub fn learn(
    corpus: &[Vec<Symbol>],
    params: &LearnParams,
) -> Result<(Vec<GrammarCandidate>, LearnTrace)> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("corpus is empty".into()));
    }
    let mut fresh = FreshIds::new(
        corpus
            .iter()
            .flatten()
            .map(|s| s.as_str().to_string()),
    );

    let mut pool = vec![score_candidate(Vec::new(), corpus, params.beam_width)?];
    let mut seen: BTreeSet<String> = pool.iter().map(|c| canonical_form(&c.patterns)).collect();
    let mut trace = LearnTrace::default();

    let align_params = BuildParams {
        beam_width: params.beam_width.max(1),
        max_stages: 8,
        top_k: 1,
        max_appearances_per_pattern: 4,
        gap_penalty: 0.0,
    };

    for _pass in 0..params.max_passes {
        let snapshot = pool.clone();
        for cand in &snapshot {
            for seq in corpus {
                if seq.is_empty() {
                    continue;
                }
                let store = scoring_store(&cand.patterns, corpus)?;
                let aligns = build_alignments(&store, seq, &align_params)?;
                let best = aligns.first();
                let mut successors: Vec<Vec<Pattern>> = Vec::new();
                match best {
                    Some(a) if a.rows().len() >= 2 => {
                        let (minted, _) = derive_patterns(&store, a, &mut fresh)?;
                        if !minted.is_empty() {
                            let union = add_patterns(&cand.patterns, &minted);
                            if union.len() > cand.patterns.len() {
                                successors.push(union);
                                let used: BTreeSet<&str> =
                                    a.rows().iter().filter_map(|r| r.pattern_id()).collect();
                                let kept: Vec<Pattern> = cand
                                    .patterns
                                    .iter()
                                    .filter(|p| !used.contains(p.pattern_id()))
                                    .cloned()
                                    .collect();
                                successors.push(add_patterns(&kept, &minted));
                            }
                        }
                        // Frequency update: fully matched rows bump their
                        // pattern, spawning a re-scored successor.
                        let mut bumped: BTreeSet<&str> = BTreeSet::new();
                        for (ri, row) in a.rows().iter().enumerate().skip(1) {
                            let full = (0..row.len())
                                .all(|p| a.columns()[a.column_of(ri, p)].is_matched());
                            if full {
                                if let Some(id) = row.pattern_id() {
                                    bumped.insert(id);
                                }
                            }
                        }
                        if !bumped.is_empty() {
                            let next: Vec<Pattern> = cand
                                .patterns
                                .iter()
                                .map(|p| {
                                    if bumped.contains(p.pattern_id()) {
                                        p.with_frequency(p.frequency() + 1)
                                    } else {
                                        p.clone()
                                    }
                                })
                                .collect();
                            successors.push(next);
                        }
                    }
                    _ => {
                        // Nothing aligned: store a straightforward copy.
                        let class = fresh.fresh_class();
                        let number = fresh.fresh_number();
                        let id = format!("{}{number}", class.0);
                        let mut symbols = vec![
                            Symbol::new(class.0.clone())?,
                            Symbol::new(number)?,
                        ];
                        let mut flags = vec![true, true];
                        symbols.extend(seq.iter().cloned());
                        flags.extend(std::iter::repeat(false).take(seq.len()));
                        symbols.push(Symbol::new(class.1.clone())?);
                        flags.push(true);
                        let copy =
                            Pattern::new(id, symbols, flags, 1, PatternOrigin::Learned)?;
                        successors.push(add_patterns(&cand.patterns, &[copy]));
                    }
                }
                for succ in successors {
                    let key = canonical_form(&succ);
                    if !seen.insert(key) {
                        continue;
                    }
                    pool.push(score_candidate(succ, corpus, params.beam_width)?);
                }
            }
        }
        pool.sort_by(|a, b| {
            a.total_bits
                .partial_cmp(&b.total_bits)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| canonical_form(&a.patterns).cmp(&canonical_form(&b.patterns)))
        });
        pool.truncate(params.candidate_pool_size.max(1));
        trace.passes.push(pool.iter().map(|c| c.total_bits).collect());
    }

    Ok((pool, trace))
}
