//! Fixtures shared by the criterion benchmarks under `benches/`.

use refined::distances::DistanceMatrix;
use refined::embed::random_embed;
use refined::ingest::FeatureTable;
use refined::refine::{grid_size_for, random_map, FeatureGridMap};
use refined::synth::{generate, SynthSpec};

pub fn labels(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j}")).collect()
}

/// Correlated synthetic table with `n` samples and `p` features.
pub fn table(n: usize, p: usize) -> FeatureTable {
    generate(&SynthSpec { n, p, gamma: 0.7, spurious_fraction: 0.0, seed: 1 })
        .expect("valid spec")
        .table
}

/// Distances between `p` uniform points, max-normalized.
pub fn planar_distances(p: usize, seed: u64) -> DistanceMatrix {
    let e = random_embed(labels(p), seed);
    let d = DistanceMatrix::from_points(e.coords(), labels(p)).expect("finite points");
    refined::distances::normalize_max(&d)
}

/// Random injective map on the smallest grid that fits `p`.
pub fn start_map(p: usize, seed: u64) -> FeatureGridMap {
    random_map(labels(p), grid_size_for(p), seed).expect("grid fits")
}
