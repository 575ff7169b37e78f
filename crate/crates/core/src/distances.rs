//! Feature-by-feature dissimilarities.

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::FeatureTable;

/// Symmetric `p x p` matrix of nonnegative dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Array2<f64>,
    labels: Vec<String>,
}

impl DistanceMatrix {
    /// Validates symmetry (within `1e-12` relative), zero diagonal and
    /// nonnegativity. The lower triangle is overwritten from the upper one.
    pub fn new(mut values: Array2<f64>, labels: Vec<String>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::Dimension(format!("distance matrix is {r}x{c}")));
        }
        if labels.len() != r {
            return Err(Error::Dimension(format!("{} labels for {r} rows", labels.len())));
        }
        for j in 0..r {
            if values[[j, j]] != 0.0 {
                return Err(Error::Numeric(format!("nonzero diagonal at {j}")));
            }
            for k in j + 1..r {
                let (a, b) = (values[[j, k]], values[[k, j]]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Numeric(format!("invalid distance {a} at ({j},{k})")));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::Numeric(format!("asymmetric at ({j},{k}): {a} vs {b}")));
                }
                values[[k, j]] = a;
            }
        }
        Ok(DistanceMatrix { values, labels })
    }

    /// Pairwise Euclidean distances of planar points.
    pub fn from_points(points: &[[f64; 2]], labels: Vec<String>) -> Result<Self> {
        let p = points.len();
        let mut values = Array2::zeros((p, p));
        for j in 0..p {
            for k in j + 1..p {
                let d = euclid(points[j], points[k]);
                values[[j, k]] = d;
                values[[k, j]] = d;
            }
        }
        DistanceMatrix::new(values, labels)
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[[j, k]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Upper-triangle entries in row-major order: (0,1), (0,2), ..., (p-2,p-1).
    pub fn upper_triangle(&self) -> Vec<f64> {
        let p = self.size();
        let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
        for j in 0..p {
            for k in j + 1..p {
                out.push(self.values[[j, k]]);
            }
        }
        out
    }

    /// Writes `p + 1` rows: a header of labels, then one labelled row per feature.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header).map_err(io)?;
        for (j, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend(self.values.row(j).iter().map(f64::to_string));
            wtr.write_record(&row).map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::io("<distance csv>", e))
    }
}

pub(crate) fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Euclidean distance between every pair of feature columns over all samples.
pub fn feature_distances(t: &FeatureTable) -> Result<DistanceMatrix> {
    let p = t.n_features();
    if p < 2 {
        return Err(Error::Dimension(format!("need at least 2 features, got {p}")));
    }
    if t.missing_count() > 0 {
        return Err(Error::Numeric(
            "feature distances need a complete table; impute first".into(),
        ));
    }
    // Column-major copy so each pair walks contiguous memory.
    let cols: Vec<Vec<f64>> = (0..p).map(|j| t.column(j).to_vec()).collect();
    let rows: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|j| {
            (0..p)
                .map(|k| {
                    if k <= j {
                        return 0.0;
                    }
                    cols[j]
                        .iter()
                        .zip(&cols[k])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    let mut values = Array2::zeros((p, p));
    for j in 0..p {
        for k in j + 1..p {
            values[[j, k]] = rows[j][k];
            values[[k, j]] = rows[j][k];
        }
    }
    DistanceMatrix::new(values, t.feature_names().to_vec())
}

/// Divides every entry by the largest one; an all-zero matrix is returned as is.
pub fn normalize_max(d: &DistanceMatrix) -> DistanceMatrix {
    let m = d.max();
    if m == 0.0 {
        return d.clone();
    }
    DistanceMatrix {
        values: d.values.mapv(|v| v / m),
        labels: d.labels.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(values: Array2<f64>) -> FeatureTable {
        let (n, p) = values.dim();
        FeatureTable::new(
            values,
            (0..p).map(|j| format!("f{j}")).collect(),
            (0..n).map(|i| i.to_string()).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn small_cases() {
        let d = feature_distances(&table(array![[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])).unwrap();
        assert!((d.get(0, 1) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(d.get(0, 2), 0.0);
        assert!(matches!(
            feature_distances(&table(array![[1.0], [2.0]])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = Array2::from_shape_fn((10, 6), |_| rng.random::<f64>());
        let d = feature_distances(&table(v.clone())).unwrap();
        for j in 0..6 {
            for k in 0..6 {
                let mut s = 0.0;
                for i in 0..10 {
                    s += (v[[i, j]] - v[[i, k]]).powi(2);
                }
                assert!((d.get(j, k) - s.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let d = DistanceMatrix::new(array![[0.0, 5.0, 2.0], [5.0, 0.0, 1.0], [2.0, 1.0, 0.0]], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let n = normalize_max(&d);
        assert_eq!(n.get(0, 1), 1.0);
        assert_eq!(normalize_max(&n), n);
        let z = DistanceMatrix::new(Array2::zeros((2, 2)), vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(normalize_max(&z), z);
    }

    #[test]
    fn csv_dump_shape() {
        let d = DistanceMatrix::from_points(&[[0.0, 0.0], [3.0, 4.0]], vec!["a".into(), "b".into()]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), ",a,b\na,0,5\nb,5,0\n");
    }

    proptest::proptest! {
        #[test]
        fn triangle_inequality_and_row_order_invariance(
            cells in proptest::collection::vec(-10.0f64..10.0, 7 * 5), shift in 1usize..7
        ) {
            let v = Array2::from_shape_vec((7, 5), cells).unwrap();
            let d = feature_distances(&table(v.clone())).unwrap();
            for a in 0..5 { for b in 0..5 { for c in 0..5 {
                proptest::prop_assert!(d.get(a, c) <= d.get(a, b) + d.get(b, c) + 1e-9);
            }}}
            let order: Vec<usize> = (0..7).map(|i| (i + shift) % 7).collect();
            let shuffled = v.select(ndarray::Axis(0), &order);
            let d2 = feature_distances(&table(shuffled)).unwrap();
            for (a, b) in d.values().iter().zip(d2.values()) {
                proptest::prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
