//! End-to-end fitting of a feature map from a raw table.

use crate::bmds::{diagnostics, run_mcmc, BmdsConfig, BmdsResult, DiagnosticsReport};
use crate::distances::{feature_distances, normalize_max, DistanceMatrix};
use crate::embed::{initial_embedding, Embedding2D, Initializer};
use crate::error::Result;
use crate::ingest::{filter_features, knn_impute, minmax_normalize, FeatureTable, DEFAULT_MAX_BAD_FRACTION};
use crate::refine::{discretize, grid_size_for, hill_climb, ClimbOptions, ClimbResult, FeatureGridMap};

pub const DEFAULT_IMPUTE_K: usize = 5;

/// BMDS starts inside this box so early proposals are not pinned to a wall.
pub const BMDS_INIT_BOX: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone, PartialEq)]
pub struct Preprocess {
    /// Features with a larger share of zero or missing cells are dropped.
    /// `1.0` keeps everything.
    pub max_bad_fraction: f64,
    pub impute_k: usize,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess { max_bad_fraction: DEFAULT_MAX_BAD_FRACTION, impute_k: DEFAULT_IMPUTE_K }
    }
}

/// Filter, impute (only when cells are missing), then min-max normalize.
pub fn preprocess(t: &FeatureTable, opts: &Preprocess) -> Result<FeatureTable> {
    let filtered = filter_features(t, opts.max_bad_fraction)?;
    let complete = if filtered.missing_count() > 0 {
        knn_impute(&filtered, opts.impute_k)?
    } else {
        filtered
    };
    Ok(minmax_normalize(&complete))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub preprocess: Preprocess,
    pub init: Initializer,
    /// `None` skips BMDS; the observed distances then serve as `delta_hat`.
    pub bmds: Option<BmdsConfig>,
    pub climb: ClimbOptions,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            preprocess: Preprocess::default(),
            init: Initializer::Mds,
            bmds: Some(BmdsConfig::default()),
            climb: ClimbOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    /// Normalized table the map was fitted on.
    pub table: FeatureTable,
    /// Max-normalized observed feature distances.
    pub observed: DistanceMatrix,
    pub initial: Embedding2D,
    pub bmds: Option<BmdsResult>,
    pub diagnostics: Option<DiagnosticsReport>,
    /// Distances the map was optimized against.
    pub delta_hat: DistanceMatrix,
    /// Locations fed to the discretizer, spread over the unit square.
    pub locations: Embedding2D,
    pub discretized: FeatureGridMap,
    pub climb: ClimbResult,
}

impl FitOutcome {
    pub fn map(&self) -> &FeatureGridMap {
        &self.climb.map
    }
}

pub fn fit(raw: &FeatureTable, opts: &FitOptions) -> Result<FitOutcome> {
    let table = preprocess(raw, &opts.preprocess)?;
    log::info!("fitting {} features over {} samples", table.n_features(), table.n_samples());
    let observed = normalize_max(&feature_distances(&table)?);
    let initial = initial_embedding(opts.init, &table, &observed, opts.seed)?;

    let (bmds, diag, delta_hat, locations) = match &opts.bmds {
        Some(cfg) => {
            let start = initial.rescaled(BMDS_INIT_BOX.0, BMDS_INIT_BOX.1)?;
            let cfg = BmdsConfig { seed: opts.seed, ..cfg.clone() };
            let res = run_mcmc(&observed, &start, &cfg)?;
            log::info!(
                "BMDS: sigma^2 {:.4e}, acceptance {:.3}",
                res.sigma2_estimate,
                res.trace.accept_rate
            );
            let diag = match diagnostics(&res.trace) {
                Ok(d) => {
                    for w in d.warnings() {
                        log::warn!("BMDS convergence: {w}");
                    }
                    Some(d)
                }
                Err(e) => {
                    log::warn!("BMDS diagnostics unavailable: {e}");
                    None
                }
            };
            let delta_hat = normalize_max(&res.delta_hat);
            let locations = res.mode_locations.rescaled(0.0, 1.0)?;
            (Some(res), diag, delta_hat, locations)
        }
        None => (None, None, observed.clone(), initial.clone()),
    };

    let g = grid_size_for(table.n_features());
    let discretized = discretize(&locations, g)?;
    let climb = hill_climb(&discretized, &delta_hat, opts.climb)?;
    log::info!(
        "hill climbing: cost {:.6} -> {:.6} in {} passes",
        climb.initial_cost,
        climb.cost_history.last().copied().unwrap_or(climb.initial_cost),
        climb.cost_history.len()
    );
    Ok(FitOutcome { table, observed, initial, bmds, diagnostics: diag, delta_hat, locations, discretized, climb })
}
