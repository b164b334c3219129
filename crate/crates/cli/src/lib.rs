//! Command-line front end: `validate`, `rank` and `stats`.
//!
//! Standard output carries data only; diagnostics go to standard error.
//! Exit codes are 0 on success, 1 for domain errors (bad query, empty
//! corpus) and 2 for I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use entrank::{
    build_index, oracle_rank, parse_corpus, parse_entity_catalog, rank, Corpus, Granularity,
    IngestReport, QueryRequest, RankedResult,
};
use thiserror::Error;

mod output;

pub use output::{write_ranking, OutputFormat};

#[derive(Debug, Parser)]
#[command(name = "entrank", version, about = "Rank entity-annotated archive documents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a corpus (and optional catalog) and report record tallies.
    Validate {
        corpus: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Run an entity-centric query and print the ranked documents.
    Rank(Box<RankArgs>),
    /// Print corpus size, date span and per-period document counts.
    Stats {
        corpus: PathBuf,
        #[arg(long, default_value = "month")]
        granularity: String,
    },
}

#[derive(Debug, Args)]
pub struct RankArgs {
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Entity of interest; repeatable.
    #[arg(long = "entity")]
    pub entities: Vec<String>,
    /// Category whose entities become entities of interest; repeatable.
    #[arg(long = "category")]
    pub categories: Vec<String>,
    /// `all` or `any` [default: all]
    #[arg(long)]
    pub semantics: Option<String>,
    #[arg(long)]
    pub from: Option<String>,
    #[arg(long)]
    pub to: Option<String>,
    /// `day`, `week`, `month` or `year` [default: month]
    #[arg(long)]
    pub granularity: Option<String>,
    /// Weight of the relatedness component [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub top: Option<i64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    pub format: OutputFormat,
    /// Include every score component.
    #[arg(long)]
    pub explain: bool,
    /// Score with the brute-force reference implementation.
    #[arg(long, hide = true)]
    pub oracle: bool,
    /// JSON query object; flags override its scalar fields and extend its lists.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Domain(_) => 1,
        }
    }

    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_corpus(path: &Path, catalog: Option<&Path>, err: &mut dyn Write) -> Result<(Corpus, IngestReport), CliError> {
    let (mut corpus, report) = parse_corpus(open(path)?).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if report.skipped > 0 {
        let _ = writeln!(
            err,
            "warning: skipped {} of {} records ({} malformed, {} duplicate, {} dateless)",
            report.skipped,
            report.total(),
            report.malformed,
            report.duplicate,
            report.dateless
        );
    }
    if let Some(catalog_path) = catalog {
        let (catalog, catalog_report) =
            parse_entity_catalog(open(catalog_path)?).map_err(|source| CliError::Io {
                path: catalog_path.to_path_buf(),
                source,
            })?;
        if catalog_report.malformed > 0 {
            let _ = writeln!(err, "warning: skipped {} malformed catalog records", catalog_report.malformed);
        }
        corpus.set_catalog(catalog);
    }
    Ok((corpus, report))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn cmd_validate(corpus: &Path, catalog: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, report) = parse_corpus(open(corpus)?).map_err(|source| CliError::Io {
        path: corpus.to_path_buf(),
        source,
    })?;
    let mut text = format!(
        "accepted: {}\nskipped: {}\nmalformed: {}\nduplicate: {}\ndateless: {}\n",
        report.accepted, report.skipped, report.malformed, report.duplicate, report.dateless
    );
    if let Some(path) = catalog {
        let (catalog, catalog_report) = parse_entity_catalog(open(path)?).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.push_str(&format!(
            "catalog_entities: {}\ncatalog_accepted: {}\ncatalog_malformed: {}\n",
            catalog.len(),
            catalog_report.accepted,
            catalog_report.malformed
        ));
    }
    write_out(out, &text)?;
    if report.accepted == 0 {
        return Err(CliError::Domain("no documents accepted".into()));
    }
    Ok(())
}

fn cmd_stats(corpus_path: &Path, granularity: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let g: Granularity = granularity.parse().map_err(CliError::domain)?;
    let (corpus, _) = load_corpus(corpus_path, None, err)?;
    let Some((first, last)) = corpus.date_span() else {
        return Err(CliError::Domain("corpus has no documents".into()));
    };
    let idx = build_index(&corpus, g);
    let mut text = format!(
        "documents: {}\nentities: {}\nfirst_date: {first}\nlast_date: {last}\ngranularity: {g}\nperiod\tdocuments\n",
        corpus.len(),
        corpus.entity_universe().len(),
    );
    for (period, docs) in idx.periods() {
        text.push_str(&format!("{period}\t{}\n", docs.len()));
    }
    write_out(out, &text)
}

fn cmd_rank(args: &RankArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let base = match &args.query_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            QueryRequest::from_json(&text)
                .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?
        }
        None => QueryRequest::default(),
    };
    let request = base.merged_with(QueryRequest {
        entities: args.entities.clone(),
        categories: args.categories.clone(),
        semantics: args.semantics.clone(),
        from: args.from.clone(),
        to: args.to.clone(),
        granularity: args.granularity.clone(),
        beta: args.beta,
        top_k: args.top,
    });

    let (corpus, _) = load_corpus(&args.corpus, args.catalog.as_deref(), err)?;
    let query = request.resolve(corpus.catalog()).map_err(CliError::domain)?;
    let ranked: RankedResult = if args.oracle {
        oracle_rank(&corpus, &query)
    } else {
        let idx = build_index(&corpus, query.granularity());
        rank(&idx, &query).map_err(CliError::domain)?
    };
    let mut text = Vec::new();
    write_ranking(&mut text, &ranked, args.format, args.explain).expect("writing to memory");
    out.write_all(&text)
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

/// Parses `args` and runs the chosen command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = e.render().to_string();
            if help {
                let _ = out.write_all(rendered.as_bytes());
                return 0;
            }
            let _ = err.write_all(rendered.as_bytes());
            return 1;
        }
    };
    let result = match &cli.command {
        Command::Validate { corpus, catalog } => cmd_validate(corpus, catalog.as_deref(), out),
        Command::Rank(args) => cmd_rank(args, out, err),
        Command::Stats { corpus, granularity } => cmd_stats(corpus, granularity, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

impl ValueEnum for OutputFormat {
    fn value_variants<'a>() -> &'a [Self] {
        &[OutputFormat::Tsv, OutputFormat::Records]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            OutputFormat::Tsv => "tsv",
            OutputFormat::Records => "records",
        }))
    }
}
