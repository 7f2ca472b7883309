//! Library half of the command-line tool: bundled corpora and the runner
//! the binary delegates to. Keeping it a library lets the test suite drive
//! the exact code paths the executable uses.

pub mod corpora {
    //! Corpora bundled with the tool, as plain store / sequence files.

    /// Word grammar with plural agreement plus distractor words.
    pub const KITTENS_STORE: &str = include_str!("../corpora/kittens.store");
    /// The sentence parsed by the word grammar.
    pub const KITTENS_NEW: &str = include_str!("../corpora/kittens.new");
    /// The same sentence with an omission, a substitution, and an addition.
    pub const KITTENS_NOISY_NEW: &str = include_str!("../corpora/kittens_noisy.new");
    /// Self-referential run-length pattern.
    pub const RUNLENGTH_STORE: &str = include_str!("../corpora/runlength.store");
    pub const RUNLENGTH_NEW: &str = include_str!("../corpora/runlength.new");
    /// Face schematic: parts and the whole.
    pub const FACE_STORE: &str = include_str!("../corpora/face.store");
    pub const FACE_NEW: &str = include_str!("../corpora/face.new");
    /// Plant classification from species up to phylum.
    pub const PLANT_STORE: &str = include_str!("../corpora/plant.store");
    pub const PLANT_NEW: &str = include_str!("../corpora/plant.new");
    /// One-dimensional analogue of a random-dot stereogram.
    pub const STEREO_STORE: &str = include_str!("../corpora/stereo.store");
    pub const STEREO_NEW: &str = include_str!("../corpora/stereo.new");
    /// Flight legs for route planning.
    pub const FLIGHTS_STORE: &str = include_str!("../corpora/flights.store");
    pub const FLIGHTS_NEW: &str = include_str!("../corpora/flights.new");
    /// Two-sentence corpus for the learner.
    pub const LEARNING_PAIR_NEW: &str = include_str!("../corpora/learning_pair.new");
}

use std::fmt::Write as _;

use compalign::output::{AlignmentReport, GrammarReport};
use compalign::{
    build_alignments, derive_encoding, find_matches, infer_unseen, learn,
    load_new_sequence, load_sequences, relative_probabilities, render_alignment, BuildParams,
    LearnParams, MatchParams, PatternStore, Symbol,
};

/// Which subcommand to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Match,
    Align,
    Encode,
    Infer,
    Probs,
    Learn,
    Route,
    Stereo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

/// A fully resolved run: command, input text (already read), and knobs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub store_text: String,
    pub new_text: String,
    pub beam_width: usize,
    pub max_stages: usize,
    pub top_k: usize,
    pub max_alternatives: usize,
    pub gap_penalty: f64,
    pub pool_size: usize,
    pub passes: usize,
    pub format: OutputFormat,
    pub trace_path: Option<String>,
}

impl RunConfig {
    pub fn new(command: CommandKind, store_text: String, new_text: String) -> Self {
        RunConfig {
            command,
            store_text,
            new_text,
            beam_width: 30,
            max_stages: 12,
            top_k: 5,
            max_alternatives: 4,
            gap_penalty: 0.0,
            pool_size: 10,
            passes: 3,
            format: OutputFormat::Text,
            trace_path: None,
        }
    }

    fn build_params(&self) -> BuildParams {
        BuildParams {
            beam_width: self.beam_width,
            max_stages: self.max_stages,
            top_k: self.top_k,
            max_appearances_per_pattern: 10,
            gap_penalty: self.gap_penalty,
        }
    }
}

/// Runs a resolved configuration, returning the emitted output. Errors are
/// returned for the binary to map onto exit status 2.
pub fn run(config: &RunConfig) -> compalign::Result<String> {
    let store = PatternStore::load(&config.store_text)?;
    let mut out = String::new();
    match config.command {
        CommandKind::Match => {
            let new = load_new_sequence(&config.new_text)?;
            let params = MatchParams {
                max_alternatives: config.max_alternatives,
                min_hits: 1,
                gap_penalty: config.gap_penalty,
            };
            let mut reports = Vec::new();
            for pattern in store.patterns() {
                let results = find_matches(&store, &new, pattern.symbols(), &params);
                for (rank, m) in results.iter().enumerate() {
                    match config.format {
                        OutputFormat::Text => {
                            let hits: Vec<String> = m
                                .hits
                                .iter()
                                .map(|h| format!("({},{})", h.driving_index, h.target_index))
                                .collect();
                            let _ = writeln!(
                                out,
                                "{} #{} score {:.3} hits {}",
                                pattern.pattern_id(),
                                rank + 1,
                                m.score,
                                hits.join(" ")
                            );
                        }
                        OutputFormat::Json => {
                            reports.push(serde_json::json!({
                                "pattern_id": pattern.pattern_id(),
                                "rank": rank + 1,
                                "score": m.score,
                                "hits": m.hits,
                            }));
                        }
                    }
                }
            }
            if config.format == OutputFormat::Json {
                out = serde_json::to_string_pretty(&reports).unwrap_or_default();
            }
        }
        CommandKind::Align | CommandKind::Route | CommandKind::Stereo => {
            let new = load_new_sequence(&config.new_text)?;
            let alignments = build_alignments(&store, &new, &config.build_params())?;
            let probs = relative_probabilities(&alignments);
            match config.format {
                OutputFormat::Text => {
                    for (i, a) in alignments.iter().enumerate() {
                        let s = a.scores().copied().unwrap_or_default();
                        let _ = writeln!(
                            out,
                            "# alignment {} CD {:.3} (matched {:.3}, code {:.3}) p {:.4}",
                            i + 1,
                            s.compression_difference,
                            s.matched_new_bits,
                            s.encoding_bits,
                            probs[i]
                        );
                        let _ = writeln!(out, "{}", render_alignment(a));
                        let enc = derive_encoding(a);
                        let code: Vec<&str> = enc.code.iter().map(Symbol::as_str).collect();
                        let _ = writeln!(out, "# encoding: {}", code.join(" "));
                        let inferred: Vec<String> = infer_unseen(a)
                            .iter()
                            .map(|(s, id)| format!("{s}({id})"))
                            .collect();
                        let _ = writeln!(out, "# inferred: {}", inferred.join(" "));
                    }
                }
                OutputFormat::Json => {
                    let reports: Vec<AlignmentReport> = alignments
                        .iter()
                        .zip(&probs)
                        .map(|(a, &p)| AlignmentReport::from_alignment(a, Some(p)))
                        .collect();
                    out = serde_json::to_string_pretty(&reports).unwrap_or_default();
                }
            }
        }
        CommandKind::Encode => {
            let new = load_new_sequence(&config.new_text)?;
            let alignments = build_alignments(&store, &new, &config.build_params())?;
            let code: Vec<String> = alignments
                .first()
                .map(|a| {
                    derive_encoding(a)
                        .code
                        .iter()
                        .map(|s| s.as_str().to_string())
                        .collect()
                })
                .unwrap_or_default();
            match config.format {
                OutputFormat::Text => {
                    let _ = writeln!(out, "{}", code.join(" "));
                }
                OutputFormat::Json => {
                    out = serde_json::to_string_pretty(&code).unwrap_or_default();
                }
            }
        }
        CommandKind::Infer => {
            let new = load_new_sequence(&config.new_text)?;
            let alignments = build_alignments(&store, &new, &config.build_params())?;
            let inferred: Vec<(String, String)> = alignments
                .first()
                .map(|a| {
                    infer_unseen(a)
                        .into_iter()
                        .map(|(s, id)| (s.as_str().to_string(), id))
                        .collect()
                })
                .unwrap_or_default();
            match config.format {
                OutputFormat::Text => {
                    for (token, id) in &inferred {
                        let _ = writeln!(out, "{token} {id}");
                    }
                }
                OutputFormat::Json => {
                    out = serde_json::to_string_pretty(&inferred).unwrap_or_default();
                }
            }
        }
        CommandKind::Probs => {
            let new = load_new_sequence(&config.new_text)?;
            let alignments = build_alignments(&store, &new, &config.build_params())?;
            let probs = relative_probabilities(&alignments);
            match config.format {
                OutputFormat::Text => {
                    for (i, p) in probs.iter().enumerate() {
                        let s = alignments[i].scores().copied().unwrap_or_default();
                        let _ =
                            writeln!(out, "{} CD {:.3} p {:.6}", i + 1, s.compression_difference, p);
                    }
                }
                OutputFormat::Json => {
                    out = serde_json::to_string_pretty(&probs).unwrap_or_default();
                }
            }
        }
        CommandKind::Learn => {
            let corpus = load_sequences(&config.new_text)?;
            let params = LearnParams {
                beam_width: config.beam_width.min(10),
                candidate_pool_size: config.pool_size,
                max_passes: config.passes,
            };
            let (pool, trace) = learn(&corpus, &params)?;
            if let Some(path) = &config.trace_path {
                std::fs::write(path, trace.to_text())?;
            }
            match config.format {
                OutputFormat::Text => {
                    if let Some(best) = pool.first() {
                        let _ = writeln!(
                            out,
                            "# best grammar T {:.3} (G {:.3}, E {:.3})",
                            best.total_bits, best.grammar_bits, best.encoding_bits
                        );
                        for p in &best.patterns {
                            let _ = writeln!(out, "{}", p.to_store_line());
                        }
                    }
                }
                OutputFormat::Json => {
                    let reports: Vec<GrammarReport> =
                        pool.iter().map(GrammarReport::from_candidate).collect();
                    out = serde_json::to_string_pretty(&reports).unwrap_or_default();
                }
            }
        }
    }
    Ok(out)
}
