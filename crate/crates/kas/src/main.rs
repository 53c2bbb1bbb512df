use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kas::config::{EntitySource, GeneratorKind, PipelineConfig, ProviderKind};
use kas::pipeline::{Pipeline, SweepTable};
use kas::{Error, Result};
use kas_core::evaluation::EvalReport;
use kas_core::transcript::TokenizerKind;

#[derive(Parser)]
#[command(name = "kas", version, about = "Knowledge-aware segment selection for query-focused meeting summarization")]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true, env = "KAS_CONFIG")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Work directory for all interchange files
    #[arg(long, short = 'o', global = true)]
    output_dir: Option<PathBuf>,
    /// Segment budget in tokens
    #[arg(long, global = true)]
    max_segment_tokens: Option<usize>,
    /// Segments selected per query
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[arg(long, global = true, value_parser = ["whitespace", "word-punct"])]
    tokenizer: Option<String>,
    /// Stem words when matching triples against the query
    #[arg(long, global = true)]
    stem_query_overlap: Option<bool>,
    /// Stem ROUGE tokens
    #[arg(long, global = true)]
    stem_rouge: Option<bool>,
    /// Stop word list, one per line
    #[arg(long, global = true)]
    stop_words: Option<PathBuf>,
    /// Weight of the knowledge score in the ranking sum (0 disables it)
    #[arg(long, global = true)]
    ka_weight: Option<f64>,
    #[arg(long, global = true, value_enum)]
    entity_source: Option<EntitySource>,
    #[arg(long, global = true, value_enum)]
    provider: Option<ProviderKind>,
    #[arg(long, global = true)]
    provider_dim: Option<usize>,
    /// kas-vec store for the store provider
    #[arg(long, global = true)]
    provider_store: Option<PathBuf>,
    /// Base URL of the embedding service
    #[arg(long, global = true)]
    provider_endpoint: Option<String>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true, value_enum)]
    generator: Option<GeneratorKind>,
    /// Sentence budget of the extractive generator
    #[arg(long, global = true)]
    sentences: Option<usize>,
    /// Base URL of the generation service
    #[arg(long, global = true)]
    generator_endpoint: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Load QMSum data and split transcripts into segments
    Segment { input: PathBuf },
    /// Extract (or import) triples and build per-query knowledge
    Knowledge {
        /// Triples JSONL from another extractor
        #[arg(long)]
        triples: Option<PathBuf>,
    },
    /// Score segments and select the top k per query
    Rank,
    /// Build generator inputs
    Assemble,
    /// Produce summaries
    Generate,
    /// Score summaries against references
    Evaluate {
        /// Entity sets JSONL overriding the built-in extractor
        #[arg(long)]
        entities: Option<PathBuf>,
    },
    /// Rank, assemble, generate and evaluate for several k
    SweepK {
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        ks: Vec<usize>,
        #[arg(long)]
        entities: Option<PathBuf>,
    },
    /// All stages from QMSum data to the report
    Run {
        input: PathBuf,
        #[arg(long)]
        triples: Option<PathBuf>,
        #[arg(long)]
        entities: Option<PathBuf>,
    },
}

impl Overrides {
    fn apply(self, c: &mut PipelineConfig) {
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(c.output_dir, self.output_dir);
        set!(c.max_segment_tokens, self.max_segment_tokens);
        set!(c.top_k, self.top_k);
        set!(
            c.tokenizer,
            self.tokenizer.map(|t| if t == "word-punct" { TokenizerKind::WordPunct } else { TokenizerKind::Whitespace })
        );
        set!(c.stem_query_overlap, self.stem_query_overlap);
        set!(c.stem_rouge, self.stem_rouge);
        set!(c.ka_weight, self.ka_weight);
        set!(c.entity_source, self.entity_source);
        set!(c.provider.kind, self.provider);
        set!(c.provider.dim, self.provider_dim);
        set!(c.provider.batch_size, self.batch_size);
        set!(c.generator.kind, self.generator);
        set!(c.generator.sentences, self.sentences);
        if self.stop_words.is_some() {
            c.stop_words = self.stop_words;
        }
        if self.provider_store.is_some() {
            c.provider.store = self.provider_store;
        }
        if self.provider_endpoint.is_some() {
            c.provider.endpoint = self.provider_endpoint;
        }
        if self.generator_endpoint.is_some() {
            c.generator.endpoint = self.generator_endpoint;
        }
    }
}

fn print_report(report: &EvalReport) {
    let c = &report.corpus;
    println!(
        "{} samples  R1 {:.4}  R2 {:.4}  RL {:.4}  Entity F1 {:.4}",
        report.count, c.r1.f1, c.r2.f1, c.rl.f1, c.entity_f1
    );
}

fn print_sweep(table: &SweepTable) {
    println!("{:>4}  {:>7}  {:>7}  {:>7}  {:>9}  {:>7}", "k", "R1", "R2", "RL", "Entity F1", "samples");
    for r in &table.rows {
        println!("{:>4}  {:>7.4}  {:>7.4}  {:>7.4}  {:>9.4}  {:>7}", r.k, r.r1, r.r2, r.rl, r.entity_f1, r.count);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    config.apply_env(|k| std::env::var(k).ok())?;
    cli.overrides.apply(&mut config);
    let pipeline = Pipeline::new(config)?;
    match cli.command {
        Command::Segment { input } => {
            let s = pipeline.segment(&input)?;
            println!("{} meetings, {} queries, {} segments", s.meetings, s.queries, s.segments);
        }
        Command::Knowledge { triples } => {
            let n = pipeline.knowledge(triples.as_deref())?;
            println!("{n} triples");
        }
        Command::Rank => {
            let n = pipeline.rank()?.len();
            println!("{n} selections");
        }
        Command::Assemble => println!("{} generator inputs", pipeline.assemble()?),
        Command::Generate => println!("{} summaries", pipeline.generate()?),
        Command::Evaluate { entities } => print_report(&pipeline.evaluate(entities.as_deref())?),
        Command::SweepK { ks, entities } => {
            if ks.contains(&0) {
                return Err(Error::validation("k must be at least 1"));
            }
            print_sweep(&pipeline.sweep_k(&ks, entities.as_deref())?);
        }
        Command::Run { input, triples, entities } => {
            print_report(&pipeline.run(&input, triples.as_deref(), entities.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(kas::error::EXIT_VALIDATION as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
