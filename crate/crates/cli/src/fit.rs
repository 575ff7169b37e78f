use std::path::{Path, PathBuf};

use clap::Args;
use refined::bmds::BmdsConfig;
use refined::embed::Initializer;
use refined::pipeline::{fit, FitOptions, FitOutcome, Preprocess, DEFAULT_IMPUTE_K};
use refined::refine::{distance_correlation, write_map, ClimbOptions, DEFAULT_MAX_PASSES};
use refined::{Error, Result};

use crate::io::{load_table, write_file};

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input CSV (header row; optional leading `id` column).
    #[arg(long)]
    input: PathBuf,
    /// Output map file.
    #[arg(long)]
    out: PathBuf,
    /// Initial embedding: mds, isomap, lle, le, random or pca.
    #[arg(long, default_value = "mds")]
    init: Initializer,
    /// Skip BMDS and optimize against the observed distances.
    #[arg(long)]
    skip_bmds: bool,
    #[arg(long, default_value_t = 5000)]
    bmds_iters: usize,
    #[arg(long, default_value_t = 2000)]
    burnin: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Maximum hill-climbing passes.
    #[arg(long, default_value_t = DEFAULT_MAX_PASSES)]
    hc_passes: usize,
    /// Only swap features; never move into a vacant pixel.
    #[arg(long)]
    strict_swaps: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target column to exclude from the features (default: `y` if present).
    #[arg(long)]
    target: Option<String>,
    /// Drop features whose share of zero or missing cells exceeds this.
    #[arg(long, default_value_t = 0.10)]
    max_bad_fraction: f64,
    /// Neighbors for imputing missing cells.
    #[arg(long, default_value_t = DEFAULT_IMPUTE_K)]
    impute_k: usize,
    /// Directory for distance matrices, embeddings, MCMC trace and cost history.
    #[arg(long)]
    trace: Option<PathBuf>,
}

pub fn run(a: FitArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.max_bad_fraction) {
        return Err(Error::Config(format!("--max-bad-fraction must lie in [0, 1], got {}", a.max_bad_fraction)));
    }
    if a.impute_k == 0 {
        return Err(Error::Config("--impute-k must be at least 1".into()));
    }
    let bmds = (!a.skip_bmds).then(|| BmdsConfig {
        iterations: a.bmds_iters,
        burn_in: a.burnin,
        thin: a.thin,
        ..BmdsConfig::default()
    });
    if let Some(cfg) = &bmds {
        cfg.validate()?;
    }
    let opts = FitOptions {
        preprocess: Preprocess { max_bad_fraction: a.max_bad_fraction, impute_k: a.impute_k },
        init: a.init,
        bmds,
        climb: ClimbOptions { max_passes: a.hc_passes, strict_swaps: a.strict_swaps },
        seed: a.seed,
    };
    let table = load_table(&a.input, a.target.as_deref())?;
    let out = fit(&table, &opts)?;
    write_file(&a.out, |w| write_map(out.map(), w))?;
    if let Some(dir) = &a.trace {
        write_trace(dir, &out)?;
    }
    let final_cost = out.climb.cost_history.last().copied().unwrap_or(out.climb.initial_cost);
    log::info!(
        "map {}x{} for {} features, cost {final_cost:.6}, distance correlation {:.4}",
        out.map().grid_size(),
        out.map().grid_size(),
        out.map().len(),
        distance_correlation(out.map(), &out.delta_hat)?
    );
    Ok(())
}

fn write_trace(dir: &Path, out: &FitOutcome) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("observed_distances.csv"), |w| out.observed.write_csv(w))?;
    write_file(&dir.join("delta_hat.csv"), |w| out.delta_hat.write_csv(w))?;
    write_file(&dir.join("initial_embedding.csv"), |w| out.initial.write_csv(w))?;
    write_file(&dir.join("locations.csv"), |w| out.locations.write_csv(w))?;
    write_file(&dir.join("cost_history.csv"), |w| {
        use std::io::Write;
        let io = |e| Error::io(dir.join("cost_history.csv"), e);
        writeln!(w, "pass,cost").map_err(io)?;
        writeln!(w, "0,{}", out.climb.initial_cost).map_err(io)?;
        for (i, c) in out.climb.cost_history.iter().enumerate() {
            writeln!(w, "{},{c}", i + 1).map_err(io)?;
        }
        Ok(())
    })?;
    if let Some(res) = &out.bmds {
        write_file(&dir.join("bmds_trace.csv"), |w| res.trace.write_csv(w))?;
        res.trace.write_location_samples(&dir.join("bmds_samples"))?;
    }
    if let Some(diag) = &out.diagnostics {
        write_file(&dir.join("bmds_diagnostics.csv"), |w| {
            let mut wtr = csv::Writer::from_writer(w);
            let err = |e: csv::Error| Error::Format(e.to_string());
            wtr.write_record(["quantity", "ess", "split_rhat", "constant"]).map_err(err)?;
            for c in &diag.chains {
                wtr.write_record([c.name.clone(), c.ess.to_string(), c.psr.to_string(), c.degenerate.to_string()])
                    .map_err(err)?;
            }
            wtr.write_record(["acceptance_rate".to_string(), diag.accept_rate.to_string(), String::new(), String::new()])
                .map_err(err)?;
            wtr.flush().map_err(|e| Error::io(dir, e))
        })?;
    }
    Ok(())
}
