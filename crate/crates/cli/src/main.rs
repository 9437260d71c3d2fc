//! `semlens`: semantic decomposition and interpretability scoring for dense
//! word embeddings, from the command line.

mod commands;
mod output;

use clap::{Parser, Subcommand};

use commands::{data, decompose, evaluate};

#[derive(Debug, Parser)]
#[command(
    name = "semlens",
    version,
    about = "Decompose word-embedding dimensions into semantic categories and score interpretability",
    max_term_width = 100
)]
struct Cli {
    /// Rayon thread count for inner computations (0 = all cores). Results
    /// are value-identical at any setting; use 1 for bit-exact runs.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize a raw text corpus (lowercase alphabetic tokens).
    Preprocess(data::PreprocessArgs),
    /// Test every embedding dimension for normality (KS, Bonferroni).
    Normality(decompose::NormalityArgs),
    /// Compute the category weight matrix for an embedding and dataset.
    Decompose(decompose::DecomposeArgs),
    /// Project an embedding into a category-labeled semantic space.
    Project(decompose::ProjectArgs),
    /// Rank categories by total representation strength, with a random
    /// baseline.
    Strengths(decompose::StrengthsArgs),
    /// Decompose one dimension (or one category) into its strongest weights.
    Report(decompose::ReportArgs),
    /// Held-out category word retrieval across sparsification levels.
    Retrieval(evaluate::RetrievalArgs),
    /// Interpretability scores over a lambda sweep.
    Interpretability(evaluate::InterpretabilityArgs),
    /// Coverage / category-count sensitivity study.
    Study(evaluate::StudyArgs),
    /// Synthesize a seeded standard-normal embedding.
    RandomEmbedding(data::RandomEmbeddingArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    std::process::exit(0);
                }
                _ => {
                    let first_line = err.to_string();
                    let first_line = first_line.lines().next().unwrap_or("invalid arguments");
                    eprintln!("{first_line} (see `semlens --help`)");
                    std::process::exit(2);
                }
            }
        }
    };

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot set thread pool size: {e}");
            std::process::exit(1);
        }
    }

    let result = match &cli.command {
        Command::Preprocess(args) => data::preprocess(args),
        Command::Normality(args) => decompose::normality(args),
        Command::Decompose(args) => decompose::decompose(args),
        Command::Project(args) => decompose::project_cmd(args),
        Command::Strengths(args) => decompose::strengths(args),
        Command::Report(args) => decompose::report_cmd(args),
        Command::Retrieval(args) => evaluate::retrieval(args),
        Command::Interpretability(args) => evaluate::interpretability(args),
        Command::Study(args) => evaluate::study(args),
        Command::RandomEmbedding(args) => data::random_embedding(args),
    };

    if let Err(err) = result {
        eprintln!("error: {err:#}");
        let code = if err.downcast_ref::<commands::UsageError>().is_some() {
            2
        } else {
            1
        };
        std::process::exit(code);
    }
}
