use std::path::PathBuf;

use clap::Args;
use refined::ingest::write_csv;
use refined::synth::{generate, SynthSpec};
use refined::Result;

use crate::io::write_file;

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Correlation decay between neighboring features, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Fraction of features with zero weight, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    spurious: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(a: SynthArgs) -> Result<()> {
    let spec = SynthSpec { n: a.n, p: a.p, gamma: a.gamma, spurious_fraction: a.spurious, seed: a.seed };
    let data = generate(&spec)?;
    write_file(&a.out, |w| write_csv(&data.table, w, false))
}
