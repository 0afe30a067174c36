use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use cmsbwt_core::bwtbuild::{
    buffer_capacity_for_bytes, run_pipeline, CmsStats, DEFAULT_BUFFER_BYTES,
};
use cmsbwt_core::oracle::naive_bwt;
use cmsbwt_core::refindex::DEFAULT_LCP_BLOCK_SIZE;
use cmsbwt_core::rle::RunLengthBwt;
use cmsbwt_core::textmodel::{parse_fasta, reference_body};
use cmsbwt_core::{Bwt, CmsConfig, Collection, HeadSortMethod};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HeadSort {
    Comparator,
    Metastring,
}

/// Builds the BWT of a FASTA collection against a reference sequence.
#[derive(Parser, Debug)]
#[command(name = "cms-bwt", version, about)]
struct Args {
    /// Reference FASTA; only the first record is used.
    #[arg(short = 'r', long)]
    reference: PathBuf,
    /// Collection FASTA, one document per record.
    #[arg(short = 'i', long)]
    input: PathBuf,
    /// Output file.
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Write the run-length encoded form instead of raw bytes.
    #[arg(long)]
    rle: bool,
    /// Spill intermediate structures to disk between phases.
    #[arg(long)]
    memory_saving: bool,
    /// Directory for spill files.
    #[arg(long, value_name = "DIR")]
    tmp_dir: Option<PathBuf>,
    /// Size of the suffix buffer used while counting.
    #[arg(long, value_name = "BYTES", default_value_t = DEFAULT_BUFFER_BYTES)]
    buffer_size: usize,
    /// LCP block size for the leaf-branch test.
    #[arg(long, value_name = "ENTRIES", default_value_t = DEFAULT_LCP_BLOCK_SIZE,
          value_parser = parse_positive)]
    lcp_block_size: usize,
    #[arg(long, value_enum, default_value_t = HeadSort::Comparator)]
    head_sort: HeadSort,
    /// Compare against a brute-force BWT (small inputs only).
    #[arg(long)]
    validate: bool,
    /// Print statistics to standard error.
    #[arg(long)]
    stats: bool,
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug)]
enum Failure {
    Io(anyhow::Error),
    Mismatch(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn read_fasta(path: &Path) -> Result<Vec<cmsbwt_core::textmodel::FastaRecord>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_fasta(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(path: &Path, bwt: &Bwt, rle: bool) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    if rle {
        RunLengthBwt::encode(&bwt.bytes).write_to(&mut out)?;
    } else {
        out.write_all(&bwt.bytes)?;
    }
    out.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}

fn check_against_oracle(bwt: &Bwt, collection: &Collection) -> std::result::Result<(), Failure> {
    let expected = Bwt::from_symbols(&naive_bwt(collection).context("validation")?);
    if expected == *bwt {
        return Ok(());
    }
    let first = bwt
        .bytes
        .iter()
        .zip(&expected.bytes)
        .position(|(a, b)| a != b)
        .unwrap_or(bwt.len().min(expected.len()));
    Err(Failure::Mismatch(format!(
        "output differs from the brute-force BWT (first difference at row {first})"
    )))
}

fn print_stats(stats: &CmsStats, seconds: f64) {
    eprintln!("n={}", stats.collection_length);
    eprintln!("documents={}", stats.documents);
    eprintln!("reference_length={}", stats.reference_length);
    eprintln!("augmented_symbols={}", stats.augmented_symbols);
    eprintln!("insert_heads={}", stats.insert_heads);
    eprintln!("unique_insert_heads={}", stats.unique_insert_heads);
    eprintln!("occupied_buckets={}", stats.occupied_buckets);
    eprintln!("runs={}", stats.runs);
    eprintln!("metastring_fallback={}", stats.metastring_fallback);
    eprintln!("seconds={seconds:.3}");
}

fn run(args: &Args) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let reference_records = read_fasta(&args.reference)?;
    let reference = reference_body(&reference_records).context("reference")?;
    let collection = Collection::from_records(&read_fasta(&args.input)?).context("collection")?;
    log::info!(
        "{} documents, {} symbols; reference of {} symbols",
        collection.num_documents(),
        collection.len(),
        reference.len()
    );

    let config = CmsConfig {
        lcp_block_size: args.lcp_block_size,
        head_sort: match args.head_sort {
            HeadSort::Comparator => HeadSortMethod::Comparator,
            HeadSort::Metastring => HeadSortMethod::Metastring,
        },
        buffer_capacity: buffer_capacity_for_bytes(args.buffer_size),
        memory_saving: args.memory_saving,
        spill_dir: args.tmp_dir.clone(),
        ..CmsConfig::default()
    };
    let out = run_pipeline(reference, &collection, &config).context("construction failed")?;
    drop(reference_records);
    write_output(&args.output, &out.bwt, args.rle)?;

    if args.stats || args.validate {
        print_stats(&out.stats, started.elapsed().as_secs_f64());
    }
    if args.validate {
        check_against_oracle(&out.bwt, &collection)?;
        eprintln!("validation=ok");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("validation=failed");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}
