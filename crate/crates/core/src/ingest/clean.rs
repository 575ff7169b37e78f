use ndarray::Array2;
use rayon::prelude::*;

use super::FeatureTable;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_BAD_FRACTION: f64 = 0.10;

/// Drops every feature whose fraction of exact zeros or missing cells exceeds
/// `max_bad_fraction`.
pub fn filter_features(t: &FeatureTable, max_bad_fraction: f64) -> Result<FeatureTable> {
    if !(0.0..=1.0).contains(&max_bad_fraction) {
        return Err(Error::Config(format!(
            "max_bad_fraction must lie in [0, 1], got {max_bad_fraction}"
        )));
    }
    let n = t.n_samples();
    let keep: Vec<usize> = (0..t.n_features())
        .filter(|&j| {
            if n == 0 {
                return true;
            }
            let bad = (0..n)
                .filter(|&i| t.is_missing(i, j) || t.value(i, j) == 0.0)
                .count();
            (bad as f64 / n as f64) <= max_bad_fraction
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyTable(format!(
            "all {} features exceed the zero/missing threshold {max_bad_fraction}",
            t.n_features()
        )));
    }
    Ok(t.select_columns(&keep))
}

/// Replaces each missing cell with the mean of its column over the `k`
/// nearest samples that observe that column.
///
/// Distance between two samples is Euclidean over the columns both observe;
/// samples sharing no observed column are never neighbors. Ties go to the
/// lower sample index.
pub fn knn_impute(t: &FeatureTable, k: usize) -> Result<FeatureTable> {
    if k == 0 {
        return Err(Error::Config("knn_impute needs k >= 1".into()));
    }
    if t.missing_count() == 0 {
        return Ok(t.clone());
    }
    let (n, p) = t.values().dim();
    for j in 0..p {
        if (0..n).all(|i| t.is_missing(i, j)) {
            return Err(Error::Impute {
                feature: t.feature_names()[j].clone(),
                reason: "missing in every sample".into(),
            });
        }
    }

    let rows_with_missing: Vec<usize> = (0..n)
        .filter(|&i| (0..p).any(|j| t.is_missing(i, j)))
        .collect();

    let fills: Vec<Vec<(usize, f64)>> = rows_with_missing
        .par_iter()
        .map(|&i| impute_row(t, i, k))
        .collect::<Result<_>>()?;

    let mut values: Array2<f64> = t.values().clone();
    for (&i, row_fills) in rows_with_missing.iter().zip(&fills) {
        for &(j, v) in row_fills {
            values[[i, j]] = v;
        }
    }
    FeatureTable::new(
        values,
        t.feature_names().to_vec(),
        t.sample_ids().to_vec(),
        t.target().map(<[f64]>::to_vec),
    )
}

fn impute_row(t: &FeatureTable, i: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    let (n, p) = t.values().dim();
    let dist: Vec<Option<f64>> = (0..n)
        .map(|r| {
            if r == i {
                return None;
            }
            let mut acc = 0.0;
            let mut shared = 0usize;
            for j in 0..p {
                if !t.is_missing(i, j) && !t.is_missing(r, j) {
                    let d = t.value(i, j) - t.value(r, j);
                    acc += d * d;
                    shared += 1;
                }
            }
            (shared > 0).then(|| acc.sqrt())
        })
        .collect();

    let mut out = Vec::new();
    for j in (0..p).filter(|&j| t.is_missing(i, j)) {
        let mut donors: Vec<(f64, usize)> = (0..n)
            .filter(|&r| !t.is_missing(r, j))
            .filter_map(|r| dist[r].map(|d| (d, r)))
            .collect();
        if donors.is_empty() {
            return Err(Error::Impute {
                feature: t.feature_names()[j].clone(),
                reason: format!(
                    "sample '{}' shares no observed column with any donor",
                    t.sample_ids()[i]
                ),
            });
        }
        donors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let take = k.min(donors.len());
        let mean = donors[..take].iter().map(|&(_, r)| t.value(r, j)).sum::<f64>() / take as f64;
        out.push((j, mean));
    }
    Ok(out)
}

/// Maps each column onto `[0, 1]` by `(x - min) / (max - min)`. Constant
/// columns become all zeros. Missing cells stay missing.
pub fn minmax_normalize(t: &FeatureTable) -> FeatureTable {
    let (n, p) = t.values().dim();
    let mut values = t.values().clone();
    for j in 0..p {
        let observed = (0..n).filter(|&i| !t.is_missing(i, j)).map(|i| t.value(i, j));
        let (lo, hi) = observed.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let range = hi - lo;
        for i in 0..n {
            if t.is_missing(i, j) {
                continue;
            }
            values[[i, j]] = if range > 0.0 {
                ((t.value(i, j) - lo) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    FeatureTable::with_missing(
        values,
        t.feature_names().to_vec(),
        t.sample_ids().to_vec(),
        t.target().map(<[f64]>::to_vec),
        t.missing_mask().clone(),
    )
    .expect("shape unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn table(values: Array2<f64>) -> FeatureTable {
        let (n, p) = values.dim();
        let missing = values.mapv(f64::is_nan);
        FeatureTable::with_missing(
            values,
            (0..p).map(|j| format!("f{j}")).collect(),
            (0..n).map(|i| i.to_string()).collect(),
            None,
            missing,
        )
        .unwrap()
    }

    /// Exhaustive oracle: rank every donor by full distance, no shortcuts.
    fn oracle_impute(values: &Array2<f64>, k: usize) -> Array2<f64> {
        let (n, p) = values.dim();
        let mut out = values.clone();
        for i in 0..n {
            for j in 0..p {
                if !values[[i, j]].is_nan() {
                    continue;
                }
                let mut cands = Vec::new();
                for r in 0..n {
                    if r == i || values[[r, j]].is_nan() {
                        continue;
                    }
                    let mut s = 0.0;
                    let mut any = false;
                    for c in 0..p {
                        let (a, b) = (values[[i, c]], values[[r, c]]);
                        if !a.is_nan() && !b.is_nan() {
                            s += (a - b) * (a - b);
                            any = true;
                        }
                    }
                    if any {
                        cands.push((s.sqrt(), r));
                    }
                }
                cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let m = k.min(cands.len());
                out[[i, j]] = cands[..m].iter().map(|&(_, r)| values[[r, j]]).sum::<f64>() / m as f64;
            }
        }
        out
    }

    #[test]
    fn filter_drops_feature_with_15_percent_zeros() {
        let mut v = Array2::from_elem((20, 2), 1.0);
        for i in 0..3 {
            v[[i, 0]] = 0.0;
        }
        let t = table(v);
        let f = filter_features(&t, DEFAULT_MAX_BAD_FRACTION).unwrap();
        assert_eq!(f.feature_names(), ["f1"]);
        assert_eq!(filter_features(&t, 1.0).unwrap(), t);
    }

    #[test]
    fn filter_counts_missing_and_errors_when_empty() {
        let t = table(array![[f64::NAN], [0.0], [1.0]]);
        assert!(matches!(filter_features(&t, 0.5), Err(Error::EmptyTable(_))));
    }

    #[test]
    fn identical_neighbor_supplies_value() {
        let t = table(array![[f64::NAN, 1.0, 2.0], [7.0, 1.0, 2.0], [3.0, 9.0, 9.0]]);
        let out = knn_impute(&t, 1).unwrap();
        assert_eq!(out.value(0, 0), 7.0);
        assert_eq!(out.missing_count(), 0);
    }

    #[test]
    fn impute_without_missing_is_identity() {
        let t = table(array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(knn_impute(&t, 2).unwrap(), t);
    }

    #[test]
    fn impute_matches_exhaustive_oracle() {
        let v = array![
            [0.1, 0.9, f64::NAN],
            [0.2, 0.8, 0.3],
            [0.9, f64::NAN, 0.7],
            [0.4, 0.5, 0.6],
            [0.15, 0.85, 0.35]
        ];
        let expected = oracle_impute(&v, 2);
        // Frozen from the oracle: row 0 takes rows 4 and 1, row 2 takes rows 3 and 0.
        assert!((expected[[0, 2]] - 0.325).abs() < 1e-15);
        assert!((expected[[2, 1]] - 0.7).abs() < 1e-15);
        let out = knn_impute(&table(v), 2).unwrap();
        assert_eq!(out.values(), &expected);
    }

    #[test]
    fn column_missing_everywhere_is_an_error() {
        let t = table(array![[1.0, f64::NAN], [2.0, f64::NAN]]);
        match knn_impute(&t, 1) {
            Err(Error::Impute { feature, .. }) => assert_eq!(feature, "f1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn normalize_examples() {
        let t = table(array![[2.0, 7.0, 0.0], [4.0, 7.0, 0.5], [6.0, 7.0, 1.0]]);
        let out = minmax_normalize(&t);
        assert_eq!(out.column(0).to_vec(), vec![0.0, 0.5, 1.0]);
        assert_eq!(out.column(1).to_vec(), vec![0.0, 0.0, 0.0]);
        assert_eq!(out.column(2).to_vec(), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_normalize(&out), out);
    }

    proptest::proptest! {
        #[test]
        fn k1_impute_matches_oracle(cells in proptest::collection::vec(
            proptest::option::weighted(0.85, -5.0f64..5.0), 12 * 4)) {
            let v = Array2::from_shape_vec((12, 4), cells.iter().map(|c| c.unwrap_or(f64::NAN)).collect()).unwrap();
            let t = table(v.clone());
            let expected = oracle_impute(&v, 1);
            match knn_impute(&t, 1) {
                Ok(out) => {
                    for (a, b) in out.values().iter().zip(expected.iter()) {
                        proptest::prop_assert_eq!(a.to_bits(), b.to_bits());
                    }
                }
                Err(Error::Impute { .. }) => {}
                Err(e) => proptest::prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn normalize_is_idempotent_and_bounded(cells in proptest::collection::vec(-1e3f64..1e3, 8 * 3)) {
            let t = table(Array2::from_shape_vec((8, 3), cells).unwrap());
            let once = minmax_normalize(&t);
            proptest::prop_assert!(once.values().iter().all(|v| (0.0..=1.0).contains(v)));
            let twice = minmax_normalize(&once);
            for (a, b) in once.values().iter().zip(twice.values()) {
                proptest::prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
