//! Writes a synthetic labeled corpus for trying the command-line tool.
//!
//! Usage: `cargo run -p stagewise --example synth_corpus -- <dir> [docs_per_cell] [seed]`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use stagewise::corpus::write_labels;
use stagewise::synth::planted_tweets;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let per_cell: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    std::fs::create_dir_all(&dir)?;
    let data = planted_tweets(per_cell, 5, 6, 12, seed);
    data.corpus.write_jsonl(BufWriter::new(File::create(dir.join("corpus.jsonl"))?))?;
    write_labels(&data.labels, BufWriter::new(File::create(dir.join("labels.csv"))?))?;
    println!("{} tweets written to {}", data.corpus.len(), dir.display());
    Ok(())
}
