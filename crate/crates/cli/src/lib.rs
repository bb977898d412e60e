//! `movidx` command line: validate storyboards, build and query indexes,
//! benchmark, partition frames and run detectors.
//!
//! Payload goes to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 usage error, 2 data or validation error, 3 internal invariant violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use movidx::catalog::load_storyboard;
use movidx::detectors::{tuples_from_tree, DetectorGrammar, DetectorRegistry, MediaKind, SyntheticFrame};
use movidx::storyboard::{storyboard_warnings, validate_storyboard};
use movidx::textindex::{run_benchmark, BenchConfig, BenchError};
use movidx::{
    ast_partition, ingest_pipeline, layout_stats, load_catalog, load_index, parse_query, query_index, save_index,
    verify_layout,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Usage,
    Data,
    Invariant,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Usage => 1,
            ExitStatus::Data => 2,
            ExitStatus::Invariant => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "movidx", version, about = "Storyboard-driven video metadata index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a storyboard file; silent when valid.
    Validate {
        storyboard: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Ingest a catalog and write its index.
    Index {
        catalog: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Run image detectors per AST tile with this many tiles.
        #[arg(long, value_name = "N")]
        ast: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a boolean query; prints `doc_id<TAB>score` per hit.
    Query {
        index: PathBuf,
        query: String,
        #[arg(long, value_name = "K")]
        limit: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare indexed queries against a linear scan on a synthetic corpus.
    Bench {
        #[arg(long, default_value_t = BenchConfig::default().doc_count)]
        docs: usize,
        #[arg(long, default_value_t = BenchConfig::default().vocab_size)]
        vocab: usize,
        #[arg(long, default_value_t = BenchConfig::default().queries)]
        queries: usize,
        #[arg(long, default_value_t = BenchConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = BenchConfig::default().threshold)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Split a frame into near-square tiles.
    Partition {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a detector grammar on a PGM frame; prints feature tuples.
    Detect {
        frame: PathBuf,
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        object_id: String,
        /// Only run rules of this media kind.
        #[arg(long)]
        kind: Option<MediaKind>,
        /// Voice/text detector input, repeatable.
        #[arg(long = "meta", value_name = "KEY=VALUE", value_parser = parse_meta)]
        meta: Vec<(String, String)>,
        #[arg(long, value_name = "N", conflicts_with = "kind")]
        ast: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn parse_meta(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

enum Failure {
    Data(anyhow::Error),
    Invariant(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> CmdResult {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = !e.use_stderr();
            let rendered = e.render().to_string();
            let _ = if informational {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return if informational { ExitStatus::Success } else { ExitStatus::Usage };
        }
    };
    let result = match cli.command {
        Command::Validate { storyboard, format } => cmd_validate(&storyboard, format, out, err),
        Command::Index {
            catalog,
            output,
            ast,
            format,
        } => cmd_index(&catalog, &output, ast, format, out, err),
        Command::Query {
            index,
            query,
            limit,
            format,
        } => cmd_query(&index, &query, limit, format, out),
        Command::Bench {
            docs,
            vocab,
            queries,
            seed,
            threshold,
            format,
        } => cmd_bench(
            BenchConfig {
                doc_count: docs,
                vocab_size: vocab,
                queries,
                seed,
                threshold,
            },
            format,
            out,
        ),
        Command::Partition {
            n,
            width,
            height,
            format,
        } => cmd_partition(n, width, height, format, out),
        Command::Detect {
            frame,
            grammar,
            object_id,
            kind,
            meta,
            ast,
            format,
        } => cmd_detect(&frame, &grammar, &object_id, kind, meta, ast, format, out),
    };
    match result {
        Ok(()) => ExitStatus::Success,
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            ExitStatus::Data
        }
        Err(Failure::Invariant(e)) => {
            let _ = writeln!(err, "internal error: {e:#}");
            ExitStatus::Invariant
        }
    }
}

fn cmd_validate(path: &PathBuf, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let board = load_storyboard(path)?;
    let violations: Vec<String> = validate_storyboard(&board).iter().map(ToString::to_string).collect();
    let warnings: Vec<String> = storyboard_warnings(&board)
        .iter()
        .map(|a| format!("{a}: unit is nested deeper than 16 stages"))
        .collect();
    for w in &warnings {
        writeln!(err, "warning: {w}")?;
    }
    if format == Format::Json {
        #[derive(Serialize)]
        struct Report<'a> {
            valid: bool,
            violations: &'a [String],
            warnings: &'a [String],
        }
        json_line(
            out,
            &Report {
                valid: violations.is_empty(),
                violations: &violations,
                warnings: &warnings,
            },
        )?;
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(anyhow!("{}", violations.join("\n"))))
    }
}

fn cmd_index(
    catalog: &PathBuf,
    output: &PathBuf,
    ast: Option<u32>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let catalog = load_catalog(catalog)?;
    for w in catalog.overlap_warnings() {
        writeln!(
            err,
            "warning: fragments {:?} and {:?} of {:?} overlap",
            w.first, w.second, w.source
        )?;
    }
    let index = ingest_pipeline(&catalog, ast)?;
    save_index(&index, output)?;
    if format == Format::Json {
        json_line(
            out,
            &serde_json::json!({
                "output": output,
                "documents": index.doc_count(),
                "terms": index.term_count(),
                "total_terms": index.total_terms(),
            }),
        )?;
    }
    Ok(())
}

fn cmd_query(path: &PathBuf, text: &str, limit: Option<usize>, format: Format, out: &mut dyn Write) -> CmdResult {
    let index = load_index(path)?;
    let q = parse_query(text).with_context(|| format!("query {text:?}"))?;
    let mut result = query_index(&index, &q);
    if let Some(k) = limit {
        result.hits.truncate(k);
    }
    match format {
        Format::Text => {
            for hit in &result.hits {
                writeln!(out, "{}\t{}", hit.doc_id, hit.score)?;
            }
        }
        Format::Json => json_line(out, &result.hits)?,
    }
    Ok(())
}

fn cmd_bench(config: BenchConfig, format: Format, out: &mut dyn Write) -> CmdResult {
    let report = run_benchmark(&config).map_err(|e| match e {
        BenchError::Mismatch { .. } => Failure::Invariant(e.into()),
        other => Failure::Data(other.into()),
    })?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        Format::Text => {
            let value = serde_json::to_value(&report)?;
            for (k, v) in value.as_object().into_iter().flatten() {
                writeln!(out, "{k}\t{v}")?;
            }
        }
    }
    Ok(())
}

fn cmd_partition(n: u32, width: u32, height: u32, format: Format, out: &mut dyn Write) -> CmdResult {
    let layout = ast_partition(n, width, height)?;
    let report = verify_layout(&layout);
    if !report.covered {
        return Err(Failure::Invariant(anyhow!("layout does not cover the frame: {report:?}")));
    }
    match format {
        Format::Json => json_line(out, &layout)?,
        Format::Text => {
            let mut text = String::new();
            for t in &layout.tiles {
                let _ = writeln!(text, "{} {} {} {} {}", t.class, t.x, t.y, t.width, t.height);
            }
            let s = layout_stats(&layout);
            let classes: Vec<String> = s.class_counts.iter().map(|(c, k)| format!("{c}:{k}")).collect();
            let _ = writeln!(
                text,
                "# cols={} rows={} irr_cols={} min_area={} max_area={} mean_area={:.2} imbalance={:.4} worst_aspect={:.4} classes={}",
                layout.cols,
                layout.rows,
                layout.irr_cols,
                s.min_area,
                s.max_area,
                s.mean_area,
                s.imbalance,
                s.worst_aspect,
                classes.join(",")
            );
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_detect(
    frame: &PathBuf,
    grammar: &PathBuf,
    object_id: &str,
    kind: Option<MediaKind>,
    meta: Vec<(String, String)>,
    ast: Option<u32>,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let frame = SyntheticFrame::read_pgm(
        std::fs::File::open(frame).with_context(|| format!("{}", frame.display()))?,
    )
    .with_context(|| format!("{}", frame.display()))?;
    let text = std::fs::read_to_string(grammar).with_context(|| format!("{}", grammar.display()))?;
    let grammar = DetectorGrammar::from_json(&text).with_context(|| format!("{}", grammar.display()))?;
    let registry = DetectorRegistry::builtin();
    registry.check(&grammar)?;
    let metadata: BTreeMap<String, String> = meta.into_iter().collect();
    let tree = match kind {
        Some(kind) => registry.run_grammar(&grammar, object_id, kind, Some(&frame), &metadata)?,
        None => registry.detect_object(&grammar, object_id, Some(&frame), &metadata, ast)?,
    };
    let tuples = tuples_from_tree(&tree).map_err(|e| Failure::Invariant(e.into()))?;
    match format {
        Format::Text => {
            for t in &tuples {
                writeln!(out, "{}\t{}\t{}\t{}", t.object_id, t.path, t.attribute, t.value)?;
            }
        }
        Format::Json => json_line(out, &tuples)?,
    }
    Ok(())
}
