//! Synthetic benchmark: AR(1)-correlated Gaussian features and a linear
//! target on a subset of them.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::FeatureTable;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    /// Correlation decay: `corr(x_i, x_j) = gamma^|i-j|`.
    pub gamma: f64,
    /// Fraction of features with zero weight.
    pub spurious_fraction: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Config("n and p must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.spurious_fraction) {
            return Err(Error::Config(format!(
                "spurious fraction must lie in [0, 1], got {}",
                self.spurious_fraction
            )));
        }
        Ok(())
    }

    pub fn spurious_count(&self) -> usize {
        (self.spurious_fraction * self.p as f64 + 1e-9).floor() as usize
    }
}

/// Generated table plus the weights that produced its target.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub table: FeatureTable,
    pub weights: Vec<f64>,
}

/// Weights on stream 0; spurious positions get exactly 0, the rest
/// `U(0.5, 1.5)` with a random sign.
fn draw_weights(spec: &SynthSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let spurious = sample(&mut rng, spec.p, spec.spurious_count());
    let mut w: Vec<f64> = (0..spec.p)
        .map(|_| {
            let m: f64 = rng.random_range(0.5..1.5);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    for j in spurious {
        w[j] = 0.0;
    }
    w
}

/// One sample on its own stream so the output does not depend on threading.
fn draw_row(spec: &SynthSpec, i: usize, row: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(i as u64 + 1);
    let innovation = (1.0 - spec.gamma * spec.gamma).sqrt();
    let mut prev: f64 = rng.sample(StandardNormal);
    row[0] = prev;
    for x in row.iter_mut().skip(1) {
        let e: f64 = rng.sample(StandardNormal);
        prev = spec.gamma * prev + innovation * e;
        *x = prev;
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut values = Array2::zeros((n, p));
    values
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(p)
        .enumerate()
        .for_each(|(i, row)| draw_row(spec, i, row));
    let weights = draw_weights(spec);
    let raw: Vec<f64> = values.rows().into_iter().map(|r| r.iter().zip(&weights).map(|(x, w)| x * w).sum()).collect();
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let y = raw.iter().map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }).collect();
    let names = (1..=p).map(|j| format!("f{j}")).collect();
    let ids = (0..n).map(|i| i.to_string()).collect();
    Ok(SynthData { table: FeatureTable::new(values, names, ids, Some(y))?, weights })
}
