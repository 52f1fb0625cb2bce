use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dialogaug_core::corpus::{self, Corpus, Ontology, SourceFormat};
use dialogaug_core::evalf1::{self, KbValues};
use dialogaug_core::{assemble, Error};

mod augment;

/// Slot-preserving augmentation and Success F1 evaluation for
/// task-oriented dialogue corpora.
#[derive(Parser)]
#[command(name = "dialogaug", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a dataset file to the normalized corpus format.
    Ingest(IngestArgs),
    /// Build an augmented corpus.
    Augment(Box<augment::AugmentArgs>),
    /// Score generated responses with Success F1.
    Eval(EvalArgs),
    /// Summarize a (possibly augmented) normalized corpus.
    Stats(StatsArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// camrest676, kvret or normalized
    #[arg(long, default_value = "normalized")]
    format: SourceFormat,
    #[arg(long)]
    output: PathBuf,
    /// Ontology file overriding the one found in or next to the dataset.
    #[arg(long)]
    ontology: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON lines: {"dialogue_id", "turn", "response"}
    #[arg(long)]
    hyp: PathBuf,
    /// Reference corpus in the normalized format.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Defaults to the reference corpus ontology.
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// JSON object mapping requestable slots to known values.
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Print JSON instead of the text summary.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Augment(a) => augment::run(*a),
        Command::Eval(a) => eval(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for bad data or arguments, 2 for I/O and environment failures.
fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        2
    } else {
        1
    }
}

fn ingest(a: IngestArgs) -> Result<(), Error> {
    let c = corpus::ingest_with_ontology(&a.input, a.format, a.ontology.as_deref())?;
    corpus::emit(&c, &a.output)?;
    println!(
        "{} dialogues, {} turns -> {}",
        c.dialogues.len(),
        c.dialogues.iter().map(|d| d.turns.len()).sum::<usize>(),
        a.output.display()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), Error> {
    let reference: Corpus = corpus::ingest(&a.reference, SourceFormat::Normalized)?;
    let ontology = match &a.ontology {
        Some(p) => Ontology::read(p)?,
        None => reference.ontology.clone(),
    };
    let kb = match &a.kb {
        Some(p) => evalf1::read_kb(p)?,
        None => KbValues::new(),
    };
    let hyps = evalf1::read_hypotheses(&a.hyp)?;
    let result = evalf1::score_corpus(&hyps, &reference, &ontology, &kb)?;

    print!("{}", result.table("success"));
    println!("f1 {:.3}", result.f1);
    if let Some(path) = &a.report {
        let mut json = serde_json::to_string_pretty(&result).expect("report serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<(), Error> {
    let c = corpus::ingest(&a.input, SourceFormat::Normalized)?;
    let report = assemble::stats(&c);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}
