use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FeatureTable;
use crate::error::{Error, Result};

/// Train/validation/test fractions and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, valid: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train_fraction: train,
            valid_fraction: valid,
            test_fraction: test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.valid_fraction, self.test_fraction];
        if f.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Config(format!("split fractions must be positive: {f:?}")));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1: {f:?}")));
        }
        Ok(())
    }

    /// Part sizes by largest remainder; ties favor train, then valid.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let f = [self.train_fraction, self.valid_fraction, self.test_fraction];
        let exact: Vec<f64> = f.iter().map(|&x| x * n as f64).collect();
        let mut sizes = [0usize; 3];
        for (s, &e) in sizes.iter_mut().zip(&exact) {
            *s = (e + 1e-9).floor() as usize;
        }
        let mut left = n - sizes.iter().sum::<usize>();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = exact[a] - sizes[a] as f64;
            let rb = exact[b] - sizes[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            sizes[i] += 1;
            left -= 1;
        }
        sizes
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            valid_fraction: 0.1,
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Seeded random partition into train, validation and test tables. Rows keep
/// their shuffled order inside each part.
pub fn split(t: &FeatureTable, spec: &SplitSpec) -> Result<(FeatureTable, FeatureTable, FeatureTable)> {
    spec.validate()?;
    let n = t.n_samples();
    if n < 3 {
        return Err(Error::Dimension(format!("cannot split {n} samples three ways")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let [tr, va, _] = spec.sizes(n);
    Ok((
        t.select_rows(&idx[..tr]),
        t.select_rows(&idx[tr..tr + va]),
        t.select_rows(&idx[tr + va..]),
    ))
}
