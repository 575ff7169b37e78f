use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use refined::imagegen::{render, render_automorphs, save_tensor, smooth, write_pgm};
use refined::ingest::{knn_impute, minmax_normalize};
use refined::pipeline::DEFAULT_IMPUTE_K;
use refined::refine::read_map;
use refined::{Error, Result};

use crate::io::{load_table, write_id_values};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pgm,
    Tensor,
    Both,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    /// Input CSV holding every mapped feature.
    #[arg(long)]
    input: PathBuf,
    /// REFINED-MAP file written by `fit`.
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Emit all 8 rotations and reflections of every image.
    #[arg(long)]
    augment_automorphs: bool,
    /// Target column (default: `y` if present); copied to targets.csv.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = DEFAULT_IMPUTE_K)]
    impute_k: usize,
}

pub const TENSOR_FILE: &str = "images.tensor";
pub const TARGET_FILE: &str = "targets.csv";

pub fn run(a: TransformArgs) -> Result<()> {
    let file = File::open(&a.map).map_err(|e| Error::io(&a.map, e))?;
    let map = read_map(BufReader::new(file))?;
    let table = load_table(&a.input, a.target.as_deref())?;
    let selected = table.select_features(map.labels())?;
    let complete = if selected.missing_count() > 0 {
        knn_impute(&selected, a.impute_k)?
    } else {
        selected
    };
    let normalized = minmax_normalize(&complete);
    let stack = if a.augment_automorphs {
        render_automorphs(&normalized, &map)?
    } else {
        render(&normalized, &map)?
    };
    let stack = smooth(stack);
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    if matches!(a.format, Format::Pgm | Format::Both) {
        write_pgm(&stack, &a.out_dir)?;
    }
    if matches!(a.format, Format::Tensor | Format::Both) {
        save_tensor(&stack, &a.out_dir.join(TENSOR_FILE))?;
    }
    if let Some(y) = normalized.target() {
        let per = stack.count() / normalized.n_samples().max(1);
        let values: Vec<f64> = y.iter().flat_map(|&v| std::iter::repeat_n(v, per)).collect();
        write_id_values(&a.out_dir.join(TARGET_FILE), stack.sample_ids(), &values)?;
    }
    log::info!("wrote {} images of {}x{}", stack.count(), stack.grid_size(), stack.grid_size());
    Ok(())
}
