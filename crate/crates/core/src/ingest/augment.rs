use ndarray::{concatenate, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FeatureTable;
use crate::error::{Error, Result};

/// Which rows count as the region to oversample, by target value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetRegion {
    AtLeast(f64),
    AtMost(f64),
}

impl TargetRegion {
    pub fn contains(&self, y: f64) -> bool {
        match *self {
            TargetRegion::AtLeast(t) => y >= t,
            TargetRegion::AtMost(t) => y <= t,
        }
    }
}

/// Appends with-replacement resamples of the rows in `region` until their
/// count is about `factor` times the original. Appended rows get ids
/// `<id>_boot<k>`.
pub fn bootstrap_oversample(
    t: &FeatureTable,
    region: TargetRegion,
    factor: f64,
    seed: u64,
) -> Result<FeatureTable> {
    if !(factor >= 1.0) {
        return Err(Error::Config(format!("oversampling factor must be >= 1, got {factor}")));
    }
    let y = t
        .target()
        .ok_or_else(|| Error::Augmentation("table has no target".into()))?;
    let pool: Vec<usize> = (0..y.len()).filter(|&i| region.contains(y[i])).collect();
    if pool.is_empty() {
        return Err(Error::Augmentation(format!("no samples in region {region:?}")));
    }
    let extra = ((factor - 1.0) * pool.len() as f64).round() as usize;
    if extra == 0 {
        return Ok(t.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = (0..extra).map(|_| pool[rng.random_range(0..pool.len())]).collect();
    let added = t.select_rows(&picks);

    let values = concatenate(Axis(0), &[t.values().view(), added.values().view()]).expect("same width");
    let missing = concatenate(Axis(0), &[t.missing_mask().view(), added.missing_mask().view()])
        .expect("same width");
    let mut ids = t.sample_ids().to_vec();
    ids.extend(
        picks
            .iter()
            .enumerate()
            .map(|(k, &i)| format!("{}_boot{k}", t.sample_ids()[i])),
    );
    let mut target = y.to_vec();
    target.extend(picks.iter().map(|&i| y[i]));
    FeatureTable::with_missing(values, t.feature_names().to_vec(), ids, Some(target), missing)
}
