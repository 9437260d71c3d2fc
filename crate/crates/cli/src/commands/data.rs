use std::io::{BufReader, BufWriter, Read, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use semlens_core::data::{generate_random_embedding, preprocess_corpus};

use crate::output::{atomic_write, Manifest};

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Input text file, or `-` for stdin.
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Output file, or `-` for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}

pub fn preprocess(args: &PreprocessArgs) -> Result<()> {
    let stdin = std::io::stdin();
    let input: Box<dyn Read> = if args.input == "-" {
        Box::new(stdin.lock())
    } else {
        Box::new(
            std::fs::File::open(&args.input)
                .with_context(|| format!("opening {}", args.input))?,
        )
    };

    let stats = if args.output == "-" {
        let stdout = std::io::stdout();
        let mut out = BufWriter::new(stdout.lock());
        preprocess_corpus(BufReader::new(input), &mut out)?
    } else {
        let out_path = PathBuf::from(&args.output);
        let mut buf = Vec::new();
        let stats = preprocess_corpus(BufReader::new(input), &mut buf)?;
        atomic_write(&out_path, &buf)?;

        let mut manifest = Manifest::new(
            "preprocess",
            serde_json::json!({ "input": args.input, "output": args.output }),
            None,
        );
        if args.input != "-" {
            manifest.add_input(std::path::Path::new(&args.input))?;
        }
        manifest.add_output(&args.output);
        let manifest_path = format!("{}.manifest.json", args.output);
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        atomic_write(std::path::Path::new(&manifest_path), &bytes)?;
        stats
    };
    writeln!(
        std::io::stderr(),
        "preprocessed {} lines, {} tokens",
        stats.lines,
        stats.tokens
    )?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct RandomEmbeddingArgs {
    /// Vocabulary size of the synthetic embedding.
    #[arg(long)]
    pub rows: usize,

    /// Vector length of the synthetic embedding.
    #[arg(long)]
    pub dim: usize,

    #[arg(long)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn random_embedding(args: &RandomEmbeddingArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "random-embedding",
        serde_json::json!({ "rows": args.rows, "dim": args.dim }),
        Some(args.seed),
    );
    let embedding = generate_random_embedding(args.rows, args.dim, args.seed, None)?;
    let mut buf = Vec::new();
    embedding.write_text(&mut buf)?;
    atomic_write(&args.out.join("embedding.txt"), &buf)?;
    manifest.add_output("embedding.txt");
    manifest.write(&args.out)?;
    println!(
        "wrote {} x {} standard-normal embedding to {}",
        args.rows,
        args.dim,
        args.out.join("embedding.txt").display()
    );
    Ok(())
}
