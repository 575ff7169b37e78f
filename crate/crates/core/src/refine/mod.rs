//! Placement of features on a square pixel grid.
//!
//! Continuous locations are snapped to a `g x g` grid with at most one feature
//! per pixel, then a hill climber swaps and moves features between adjacent
//! pixels to reduce the mismatch between image distances and the estimated
//! feature distances.

mod climb;
mod cost;
mod mapfile;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distances::DistanceMatrix;
use crate::embed::Embedding2D;
use crate::error::{Error, Result};

pub use climb::{hill_climb, ClimbOptions, ClimbResult, DEFAULT_MAX_PASSES, NEIGHBOR_OFFSETS};
pub use cost::{cost_delta, CostState};
pub use mapfile::{read_map, write_map, MAP_MAGIC};

/// Pixel coordinate `(row, col)`, 0-indexed.
pub type Pixel = (usize, usize);

/// Injective assignment of features to grid pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGridMap {
    grid_size: usize,
    assignment: Vec<Pixel>,
    labels: Vec<String>,
}

impl FeatureGridMap {
    pub fn new(grid_size: usize, assignment: Vec<Pixel>, labels: Vec<String>) -> Result<Self> {
        if assignment.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} pixels for {} labels",
                assignment.len(),
                labels.len()
            )));
        }
        if grid_size * grid_size < assignment.len() {
            return Err(Error::Capacity { grid: grid_size, features: assignment.len() });
        }
        let mut seen = vec![false; grid_size * grid_size];
        for (j, &(r, c)) in assignment.iter().enumerate() {
            if r >= grid_size || c >= grid_size {
                return Err(Error::Format(format!(
                    "feature {j} at ({r}, {c}) lies outside a {grid_size}x{grid_size} grid"
                )));
            }
            let cell = &mut seen[r * grid_size + c];
            if *cell {
                return Err(Error::Format(format!("pixel ({r}, {c}) assigned twice")));
            }
            *cell = true;
        }
        Ok(FeatureGridMap { grid_size, assignment, labels })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn assignment(&self) -> &[Pixel] {
        &self.assignment
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Occupant of every pixel, row-major.
    pub fn occupancy(&self) -> Vec<Option<usize>> {
        let g = self.grid_size;
        let mut occ = vec![None; g * g];
        for (j, &(r, c)) in self.assignment.iter().enumerate() {
            occ[r * g + c] = Some(j);
        }
        occ
    }

    /// The same map with feature `j` at `target`; a feature already there
    /// takes `j`'s old pixel.
    pub fn with_exchange(&self, j: usize, target: Pixel) -> FeatureGridMap {
        let mut out = self.clone();
        let from = out.assignment[j];
        if let Some(k) = out.assignment.iter().position(|&px| px == target) {
            out.assignment[k] = from;
        }
        out.assignment[j] = target;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCost {
    pub value: f64,
    pub pair_count: usize,
}

/// `ceil(sqrt(p))`, the smallest square grid holding `p` features.
pub fn grid_size_for(p: usize) -> usize {
    let mut g = (p as f64).sqrt() as usize;
    while g * g < p {
        g += 1;
    }
    while g > 0 && (g - 1) * (g - 1) >= p {
        g -= 1;
    }
    g
}

fn chebyshev(a: Pixel, b: Pixel) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}

/// Snaps locations to pixels `(floor(y g), floor(x g))`. Features are placed
/// in index order; a taken pixel sends the feature to the nearest vacant one
/// by Chebyshev distance, ties broken row-major.
pub fn discretize(e: &Embedding2D, g: usize) -> Result<FeatureGridMap> {
    let p = e.len();
    if g * g < p {
        return Err(Error::Capacity { grid: g, features: p });
    }
    let cell = |v: f64| ((v * g as f64).floor() as usize).min(g - 1);
    let mut taken = vec![false; g * g];
    let mut assignment = Vec::with_capacity(p);
    for c in e.coords() {
        let nominal = (cell(c[1]), cell(c[0]));
        let px = if !taken[nominal.0 * g + nominal.1] {
            nominal
        } else {
            (0..g * g)
                .filter(|&i| !taken[i])
                .map(|i| (i / g, i % g))
                .min_by_key(|&px| (chebyshev(px, nominal), px))
                .expect("capacity checked")
        };
        taken[px.0 * g + px.1] = true;
        assignment.push(px);
    }
    FeatureGridMap::new(g, assignment, e.labels().to_vec())
}

pub(crate) fn check_labels(m: &FeatureGridMap, d: &DistanceMatrix) -> Result<()> {
    if m.labels() != d.labels() {
        return Err(Error::Alignment("map and distance matrix list different features".into()));
    }
    Ok(())
}

/// Euclidean distance between pixel centers.
fn pixel_distance(a: Pixel, b: Pixel, g: usize) -> f64 {
    let dr = a.0 as f64 - b.0 as f64;
    let dc = a.1 as f64 - b.1 as f64;
    (dr * dr + dc * dc).sqrt() / g as f64
}

/// Pixel-center distances divided by their maximum over all pairs.
pub fn image_distances(m: &FeatureGridMap) -> Vec<f64> {
    let a = m.assignment();
    let p = a.len();
    let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for j in 0..p {
        for k in j + 1..p {
            out.push(pixel_distance(a[j], a[k], m.grid_size()));
        }
    }
    let max = out.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    out
}

/// `sum_{j<k} |D_img(j,k) - delta_hat(j,k)|` with `D_img` max-normalized.
pub fn map_cost(m: &FeatureGridMap, delta_hat: &DistanceMatrix) -> Result<MapCost> {
    check_labels(m, delta_hat)?;
    let img = image_distances(m);
    let dh = delta_hat.upper_triangle();
    let value = img.iter().zip(&dh).map(|(a, b)| (a - b).abs()).sum();
    Ok(MapCost { value, pair_count: img.len() })
}

/// Pearson correlation between image distances and `delta_hat`. Reported as a
/// diagnostic next to the cost; 0 when either side is constant.
pub fn distance_correlation(m: &FeatureGridMap, delta_hat: &DistanceMatrix) -> Result<f64> {
    check_labels(m, delta_hat)?;
    Ok(pearson(&image_distances(m), &delta_hat.upper_triangle()))
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Image of `px` under grid symmetry `index` in `0..8`: indices 0-3 rotate
/// clockwise by `index * 90` degrees, 4-7 apply the same rotation followed by
/// a left-right mirror.
pub fn symmetry_pixel(index: usize, px: Pixel, g: usize) -> Pixel {
    let (mut r, mut c) = px;
    for _ in 0..index % 4 {
        (r, c) = (c, g - 1 - r);
    }
    if index >= 4 {
        c = g - 1 - c;
    }
    (r, c)
}

/// Suffix naming symmetry `index`: `_r0` .. `_r3`, `_r0m` .. `_r3m`.
pub fn symmetry_suffix(index: usize) -> String {
    format!("_r{}{}", index % 4, if index >= 4 { "m" } else { "" })
}

/// The 4 rotations and 4 mirrored rotations, identity first.
pub fn automorphs(m: &FeatureGridMap) -> Vec<FeatureGridMap> {
    let g = m.grid_size;
    (0..8)
        .map(|s| FeatureGridMap {
            grid_size: g,
            assignment: m.assignment.iter().map(|&px| symmetry_pixel(s, px, g)).collect(),
            labels: m.labels.clone(),
        })
        .collect()
}

/// Uniformly random injective placement, the baseline the optimizer must beat.
pub fn random_map(labels: Vec<String>, g: usize, seed: u64) -> Result<FeatureGridMap> {
    let p = labels.len();
    if g * g < p {
        return Err(Error::Capacity { grid: g, features: p });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (0..g * g).collect();
    cells.shuffle(&mut rng);
    let assignment = cells[..p].iter().map(|&i| (i / g, i % g)).collect();
    FeatureGridMap::new(g, assignment, labels)
}
