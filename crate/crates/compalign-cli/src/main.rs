use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use compalign_cli::{corpora, run, CommandKind, OutputFormat, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "compalign",
    about = "Compression-scored multiple alignment over symbol patterns",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Store file: one pattern per line, `<id> [freq] : tokens` with `%` on
    /// ID-symbols.
    #[arg(long, global = true)]
    store: Option<PathBuf>,

    /// New file: whitespace-separated tokens. `align` concatenates lines;
    /// `learn` treats each line as one sequence.
    #[arg(long, global = true)]
    new: Option<PathBuf>,

    /// Beam width for alignment construction.
    #[arg(long, global = true)]
    beam: Option<usize>,

    /// Maximum merge stages.
    #[arg(long = "max-stages", global = true)]
    max_stages: Option<usize>,

    /// Alignments to report.
    #[arg(long = "top", global = true)]
    top: Option<usize>,

    /// Match alternatives per pattern (match command).
    #[arg(long = "alts", global = true)]
    alts: Option<usize>,

    /// Bits charged per gap opening in pairwise matching.
    #[arg(long = "gap-penalty", global = true)]
    gap_penalty: Option<f64>,

    /// Candidate pool size (learn command).
    #[arg(long = "pool", global = true)]
    pool: Option<usize>,

    /// Corpus sweeps (learn command).
    #[arg(long = "passes", global = true)]
    passes: Option<usize>,

    /// Output format.
    #[arg(long = "format", global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write the learner's per-pass pool scores to this file.
    #[arg(long = "trace", global = true)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise matches of the New sequence against each store pattern.
    Match,
    /// Build and report multiple alignments.
    Align,
    /// Emit only the encoding of the best alignment.
    Encode,
    /// Emit only the symbols inferred by the best alignment.
    Infer,
    /// Emit relative probabilities of the reported alignments.
    Probs,
    /// Learn a grammar from the corpus and emit it in store format.
    Learn,
    /// `align` preconfigured with the bundled flight-leg corpus.
    Route,
    /// `align` preconfigured with the bundled stereo corpus.
    Stereo,
}

fn read_input(path: Option<&PathBuf>, what: &str) -> Result<String, String> {
    match path {
        None => Err(format!("missing --{what} PATH")),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| format!("cannot read {}: {e}", p.display())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let (kind, default_store, default_new): (CommandKind, Option<&str>, Option<&str>) =
        match cli.command {
            Command::Match => (CommandKind::Match, None, None),
            Command::Align => (CommandKind::Align, None, None),
            Command::Encode => (CommandKind::Encode, None, None),
            Command::Infer => (CommandKind::Infer, None, None),
            Command::Probs => (CommandKind::Probs, None, None),
            Command::Learn => (CommandKind::Learn, None, None),
            Command::Route => (
                CommandKind::Route,
                Some(corpora::FLIGHTS_STORE),
                Some(corpora::FLIGHTS_NEW),
            ),
            Command::Stereo => (
                CommandKind::Stereo,
                Some(corpora::STEREO_STORE),
                Some(corpora::STEREO_NEW),
            ),
        };

    let store_text = match (&cli.store, default_store) {
        (Some(_), _) | (None, None) => match read_input(cli.store.as_ref(), "store") {
            Ok(t) => t,
            Err(e) => {
                return if cli.store.is_none() {
                    eprintln!("usage error: {e}");
                    ExitCode::from(1)
                } else {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        },
        (None, Some(bundled)) => bundled.to_string(),
    };
    let new_text = match (&cli.new, default_new) {
        (Some(_), _) | (None, None) => match read_input(cli.new.as_ref(), "new") {
            Ok(t) => t,
            Err(e) => {
                return if cli.new.is_none() {
                    eprintln!("usage error: {e}");
                    ExitCode::from(1)
                } else {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        },
        (None, Some(bundled)) => bundled.to_string(),
    };

    let mut config = RunConfig::new(kind, store_text, new_text);
    if matches!(kind, CommandKind::Route | CommandKind::Stereo) {
        // Bundled-corpus defaults report a deeper list so that complete
        // chains appear alongside the short partial alignments.
        config.top_k = 10;
    }
    if let Some(v) = cli.beam {
        config.beam_width = v;
    }
    if let Some(v) = cli.max_stages {
        config.max_stages = v;
    }
    if let Some(v) = cli.top {
        config.top_k = v;
    }
    if let Some(v) = cli.alts {
        config.max_alternatives = v;
    }
    if let Some(v) = cli.gap_penalty {
        config.gap_penalty = v;
    }
    if let Some(v) = cli.pool {
        config.pool_size = v;
    }
    if let Some(v) = cli.passes {
        config.passes = v;
    }
    if let Some(v) = cli.format {
        config.format = match v {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    config.trace_path = cli.trace.map(|p| p.display().to_string());

    if config.beam_width == 0
        || config.max_stages == 0
        || config.top_k == 0
        || config.max_alternatives == 0
        || config.pool_size == 0
        || config.passes == 0
    {
        eprintln!("usage error: numeric parameters must be positive");
        return ExitCode::from(1);
    }

    match run(&config) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
