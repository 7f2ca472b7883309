//! Compression-scored multiple alignment of one-dimensional symbol
//! patterns.
//!
//! New information is expressed as a sequence of atomic symbols and encoded
//! economically in terms of stored Old patterns by building multiple
//! alignments: arrangements of the New row and any number of Old-pattern
//! appearances into ordered columns of equal tokens. Alignments are scored
//! by the compression they achieve (matched New information minus the cost
//! of the derived code), which also yields relative probabilities and the
//! inference of symbols that were never observed. On top of the alignment
//! machinery sits an unsupervised learner that derives candidate patterns
//! from alignments and selects grammars by a two-part description-length
//! criterion.
//!
//! The crate exposes four layers:
//!
//! - [`store`]: symbols, patterns, the pattern store, and the bit-cost
//!   model derived from frequency-weighted symbol counts.
//! - [`matcher`]: flexible pairwise matching that returns several scored
//!   alternatives instead of one best result.
//! - [`alignment`] and [`engine`]: staged construction of multiple
//!   alignments under a beam, encoding/probability/inference derivation.
//! - [`learner`]: pattern derivation from alignments and grammar search by
//!   minimum description length.

pub mod alignment;
pub mod engine;
pub mod error;
pub mod learner;
pub mod matcher;
pub mod oracle;
pub mod output;
pub mod render;
pub mod store;

pub use alignment::{Alignment, Column, Row, RowSource, Scores};
pub use engine::{
    build_alignments, compression_difference, derive_encoding, infer_unseen,
    relative_probabilities, BuildParams, Encoding,
};
pub use error::{Error, Result};
pub use learner::{
    corpus_encoding_size, derive_patterns, grammar_size, learn, FreshIds, GrammarCandidate,
    LearnParams, LearnTrace, RunKind, SegmentRun, SegmentationTrace,
};
pub use matcher::{exhaustive_matches, find_matches, Hit, MatchParams, MatchResult};
pub use render::{column_structure, parse_rendering, render_alignment};
pub use store::{
    load_new_sequence, load_sequences, Pattern, PatternOrigin, PatternStore, Symbol, ID_MARKER,
};
