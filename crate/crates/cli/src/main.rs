//! `qed`: validate, score, analyse and serve QED explanation corpora.
//!
//! Exit status: 0 success, 1 invalid data, 2 usage error, 3 I/O error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qed_core::analysis::corpus_stats;
use qed_core::baseline::{predict_corpus, BaselineConfig};
use qed_core::corpus::{
    import_released, read_corpus, read_predictions, write_examples, write_predictions,
    CorpusDocument, ParseError,
};
use qed_core::eval::{evaluate_task1, evaluate_task2, Averaging, MatchPolicy};
use qed_core::rater::{aggregate_judgments_with, read_log, Weighting};
use qed_core::validate::{Severity, Validator};
use qed_core::{extract_pattern, ExplanationLabel};

#[derive(Parser)]
#[command(name = "qed", version, about = "Tools for QED question-answering explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Subcommand)]
enum Command {
    /// Check every example; violations go to stderr, one per line.
    Validate { corpus: PathBuf },
    /// Score predictions against gold explanations.
    Eval {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Average per-example scores instead of pooling counts.
        #[arg(long = "macro")]
        macro_avg: bool,
        /// Do not accept title links for implicit gold mentions.
        #[arg(long)]
        no_title_equiv: bool,
        #[arg(long)]
        json: bool,
    },
    /// Label counts, link histogram, exact-match rate and expression types.
    Stats {
        corpus: PathBuf,
        #[arg(long, default_value_t = 100)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print entailment patterns.
    Pattern {
        corpus: PathBuf,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run the lexical-overlap baseline and write predictions.
    Baseline {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = BaselineConfig::default().max_len)]
        max_len: usize,
    },
    /// Summarize a judgment log per condition.
    RaterReport {
        #[arg(long)]
        log: PathBuf,
        /// Give each rater equal weight instead of each judgment.
        #[arg(long)]
        rater_weighted: bool,
        #[arg(long)]
        json: bool,
    },
    /// Convert a file in the released distribution format to the canonical one.
    ImportNq {
        file: PathBuf,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the annotation and judging service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, env = qed_server::STATE_DIR_ENV)]
        state: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<qed_core::Error> for Failure {
    fn from(e: qed_core::Error) -> Self {
        match e {
            qed_core::Error::Io(_) | qed_core::Error::Encoding { .. } => Failure::Io(e.to_string()),
            qed_core::Error::Usage(m) => Failure::Usage(m),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) | Failure::Usage(m) | Failure::Io(m) if !m.is_empty() => {
                    eprintln!("qed: {m}")
                }
                _ => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    let stdout = io::stdout().lock();
    let mut out = BufWriter::new(stdout);
    match command {
        Command::Validate { corpus } => validate(&corpus),
        Command::Eval { task, gold, pred, macro_avg, no_title_equiv, json } => {
            let gold = load(&gold)?;
            let preds = read_predictions(&pred).map_err(|e| with_path(e, &pred))?;
            report_parse_errors(&preds.provenance, &preds.parse_errors)?;
            let policy = MatchPolicy {
                title_equivalence: !no_title_equiv,
                averaging: if macro_avg { Averaging::Macro } else { Averaging::Micro },
                ..MatchPolicy::default()
            };
            let report = match task {
                Task::One => evaluate_task1(&gold, &preds.records, &policy)?,
                Task::Two => evaluate_task2(&gold, &preds.records, &policy)?,
            };
            if json {
                print_json(&mut out, &report)?;
            } else {
                let system = pred.file_stem().map_or("system".into(), |s| s.to_string_lossy());
                write!(out, "{}", report.to_table(&system))?;
            }
            Ok(out.flush()?)
        }
        Command::Stats { corpus, sample, seed, json } => {
            let doc = load(&corpus)?;
            let stats = corpus_stats(&doc, sample, seed);
            if json {
                print_json(&mut out, &stats)?;
            } else {
                write!(out, "{}", stats.to_text())?;
            }
            Ok(out.flush()?)
        }
        Command::Pattern { corpus, id, json } => {
            let doc = load(&corpus)?;
            let selected: Vec<_> = match &id {
                Some(id) => vec![doc
                    .get(id)
                    .ok_or_else(|| Failure::Invalid(format!("no example {id:?}")))?],
                None => doc
                    .examples
                    .iter()
                    .filter(|e| e.label == ExplanationLabel::ValidExplanation)
                    .collect(),
            };
            for ex in selected {
                let pattern = extract_pattern(ex)?;
                if json {
                    serde_json::to_writer(&mut out, &serde_json::json!({ "id": ex.id, "pattern": pattern }))
                        .map_err(io::Error::from)?;
                    writeln!(out)?;
                } else {
                    writeln!(out, "{}\n  Q: {}\n  S: {}", ex.id, pattern.question_template, pattern.sentence_template)?;
                }
            }
            Ok(out.flush()?)
        }
        Command::Baseline { corpus, out: path, max_len } => {
            if max_len == 0 {
                return Err(Failure::Usage("--max-len must be at least 1".into()));
            }
            let doc = load(&corpus)?;
            let preds = predict_corpus(&doc.examples, &BaselineConfig::default().with_max_len(max_len));
            let file = File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            write_predictions(BufWriter::new(file), &preds)?;
            eprintln!("{} predictions for {} examples written to {}", preds.len(), doc.examples.len(), path.display());
            Ok(())
        }
        Command::RaterReport { log, rater_weighted, json } => {
            let file = open(&log)?;
            let records = read_log(BufReader::new(file))?;
            let weighting = if rater_weighted { Weighting::Rater } else { Weighting::Judgment };
            let report = aggregate_judgments_with(&records, weighting)?;
            if json {
                print_json(&mut out, &report)?;
            } else {
                write!(out, "{}", report.to_table())?;
            }
            Ok(out.flush()?)
        }
        Command::ImportNq { file, out: path } => {
            let doc = import_released(BufReader::new(open(&file)?), &file.display().to_string())
                .map_err(|e| with_path(e, &file))?;
            match path {
                Some(p) => {
                    let f = File::create(&p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                    write_examples(BufWriter::new(f), &doc.examples)?;
                }
                None => write_examples(&mut out, &doc.examples)?,
            }
            report_parse_errors(&doc.provenance, &doc.parse_errors)
        }
        Command::Serve { port, corpus, state, host } => {
            let doc = load(&corpus)?;
            let app = qed_server::AppState::open(doc, state, None)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(qed_server::serve(SocketAddr::new(host, port), app))?;
            Ok(())
        }
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn with_path(e: qed_core::Error, path: &Path) -> Failure {
    match Failure::from(e) {
        Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn report_parse_errors(source: &str, errors: &[ParseError]) -> Outcome {
    for e in errors {
        eprintln!("{source}:{}: {}", e.line, e.message);
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{} unparsable line(s) in {source}", errors.len())))
    }
}

/// Reads a corpus, refusing files with unparsable lines.
fn load(path: &Path) -> Result<CorpusDocument, Failure> {
    let doc = read_corpus(path).map_err(|e| with_path(e, path))?;
    report_parse_errors(&doc.provenance, &doc.parse_errors)?;
    Ok(doc)
}

fn print_json<W: Write, T: serde::Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn validate(path: &Path) -> Outcome {
    let doc = read_corpus(path).map_err(|e| with_path(e, path))?;
    let mut bad = 0usize;
    for e in &doc.parse_errors {
        eprintln!("{}:{}\tPARSE_ERROR\t{}", doc.provenance, e.line, e.message);
    }
    for (i, report) in Validator::default().validate_corpus(&doc.examples) {
        for v in &report.violations {
            let level = match v.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            eprintln!("{}\t{}\t{}\t{}\t{}", doc.examples[i].id, level, v.code, v.field, v.message);
        }
        bad += usize::from(!report.is_valid());
    }
    if bad + doc.parse_errors.len() > 0 {
        return Err(Failure::Invalid(format!(
            "{bad} invalid example(s), {} unparsable line(s)",
            doc.parse_errors.len()
        )));
    }
    Ok(())
}
