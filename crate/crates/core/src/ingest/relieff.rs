use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::FeatureTable;
use crate::error::{Error, Result};

/// Above this many samples RELIEFf visits a seeded subsample of this size.
pub const RELIEFF_MAX_INSTANCES: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWeight {
    pub name: String,
    pub weight: f64,
}

/// RELIEFf weights for every feature, in table order.
///
/// The target is read as class labels (distinct values are distinct classes).
/// For each visited instance the `k_neighbors` nearest hits pull a feature's
/// weight down by their range-scaled difference and the nearest misses of
/// every other class push it up, weighted by that class's prior.
pub fn relieff_weights(t: &FeatureTable, k_neighbors: usize, seed: u64) -> Result<Vec<f64>> {
    let y = t
        .target()
        .ok_or_else(|| Error::Selection("RELIEFf needs a target".into()))?;
    if k_neighbors == 0 {
        return Err(Error::Config("RELIEFf needs k_neighbors >= 1".into()));
    }
    if t.missing_count() > 0 {
        return Err(Error::Selection(
            "RELIEFf needs a complete table; impute first".into(),
        ));
    }
    let (n, p) = t.values().dim();

    // Class index per sample, classes ordered by value.
    let mut classes: BTreeMap<u64, usize> = BTreeMap::new();
    let key = |v: f64| if v == 0.0 { 0u64 } else { v.to_bits() };
    for &v in y {
        let next = classes.len();
        classes.entry(key(v)).or_insert(next);
    }
    if classes.len() < 2 {
        return Err(Error::Selection("target has a single class".into()));
    }
    let mut sorted_keys: Vec<u64> = classes.keys().copied().collect();
    sorted_keys.sort_by(|a, b| f64::from_bits(*a).total_cmp(&f64::from_bits(*b)));
    let class_of: Vec<usize> = y
        .iter()
        .map(|&v| sorted_keys.iter().position(|&k| k == key(v)).unwrap())
        .collect();
    let n_classes = sorted_keys.len();
    let mut prior = vec![0.0; n_classes];
    for &c in &class_of {
        prior[c] += 1.0 / n as f64;
    }

    let range: Vec<f64> = (0..p)
        .map(|j| {
            let col = t.column(j);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .collect();
    let diff = |j: usize, a: usize, b: usize| -> f64 {
        if range[j] > 0.0 {
            (t.value(a, j) - t.value(b, j)).abs() / range[j]
        } else {
            0.0
        }
    };

    let instances: Vec<usize> = if n <= RELIEFF_MAX_INSTANCES {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, n, RELIEFF_MAX_INSTANCES).into_vec();
        idx.sort_unstable();
        idx
    };
    let m = instances.len() as f64;

    let contributions: Vec<Vec<f64>> = instances
        .par_iter()
        .map(|&r| {
            let mut dist: Vec<(f64, usize)> = (0..n)
                .filter(|&o| o != r)
                .map(|o| ((0..p).map(|j| diff(j, r, o)).sum::<f64>(), o))
                .collect();
            dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let own = class_of[r];
            let mut delta = vec![0.0; p];
            for c in 0..n_classes {
                let nearest: Vec<usize> = dist
                    .iter()
                    .filter(|&&(_, o)| class_of[o] == c)
                    .take(k_neighbors)
                    .map(|&(_, o)| o)
                    .collect();
                if nearest.is_empty() {
                    continue;
                }
                let scale = if c == own {
                    -1.0 / (m * nearest.len() as f64)
                } else {
                    prior[c] / (1.0 - prior[own]) / (m * nearest.len() as f64)
                };
                for (j, d) in delta.iter_mut().enumerate() {
                    let s: f64 = nearest.iter().map(|&o| diff(j, r, o)).sum();
                    *d += scale * s;
                }
            }
            delta
        })
        .collect();

    let mut weights = vec![0.0; p];
    for delta in &contributions {
        for (w, d) in weights.iter_mut().zip(delta) {
            *w += d;
        }
    }
    Ok(weights)
}

/// The `top_m` features by RELIEFf weight, heaviest first (ties by column order).
pub fn relieff_select(
    t: &FeatureTable,
    k_neighbors: usize,
    top_m: usize,
    seed: u64,
) -> Result<Vec<FeatureWeight>> {
    if top_m > t.n_features() {
        return Err(Error::Config(format!(
            "top_m = {top_m} exceeds {} features",
            t.n_features()
        )));
    }
    let weights = relieff_weights(t, k_neighbors, seed)?;
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(top_m)
        .map(|j| FeatureWeight {
            name: t.feature_names()[j].clone(),
            weight: weights[j],
        })
        .collect())
}
