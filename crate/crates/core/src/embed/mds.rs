use ndarray::Array2;

use super::Embedding2D;
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::ingest::FeatureTable;
use crate::linalg::symmetric_eigen;

/// Classical (Torgerson) MDS into two dimensions, before any rescaling.
///
/// Double-centers `-D^2 / 2` and scales the two leading eigenvectors by the
/// square roots of their eigenvalues. Negative eigenvalues count as zero.
pub fn classical_mds(dist: &Array2<f64>) -> Result<Vec<[f64; 2]>> {
    let p = dist.nrows();
    let sq = dist.mapv(|v| v * v);
    let row_mean: Vec<f64> = (0..p).map(|i| sq.row(i).sum() / p as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / p as f64;
    let b = Array2::from_shape_fn((p, p), |(i, j)| {
        -0.5 * (sq[[i, j]] - row_mean[i] - row_mean[j] + grand)
    });
    top_two_scaled(&b)
}

fn top_two_scaled(b: &Array2<f64>) -> Result<Vec<[f64; 2]>> {
    let p = b.nrows();
    let eig = symmetric_eigen(b)?;
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lead = eig.values.first().copied().unwrap_or(0.0);
    if !(lead > 1e-12 * scale.max(1e-300)) || lead <= 0.0 {
        return Err(Error::DegenerateEmbedding(
            "centered matrix has no positive eigenvalue".into(),
        ));
    }
    let second = eig.values.get(1).copied().unwrap_or(0.0).max(0.0);
    let (s1, s2) = (lead.sqrt(), second.sqrt());
    Ok((0..p)
        .map(|i| {
            [
                eig.vectors[[i, 0]] * s1,
                if p > 1 { eig.vectors[[i, 1]] * s2 } else { 0.0 },
            ]
        })
        .collect())
}

/// Classical MDS of `d`, rescaled into the unit square.
pub fn mds_embed(d: &DistanceMatrix) -> Result<Embedding2D> {
    if d.size() < 3 {
        return Err(Error::Dimension(format!("MDS needs at least 3 features, got {}", d.size())));
    }
    let raw = classical_mds(d.values())?;
    Embedding2D::from_raw(&raw, d.labels().to_vec())
}

/// Raw projections of the features (as points in sample space) onto their
/// first two principal axes.
pub(crate) fn pca_raw(t: &FeatureTable) -> Result<Vec<[f64; 2]>> {
    let (n, p) = t.values().dim();
    if t.missing_count() > 0 {
        return Err(Error::Numeric("PCA needs a complete table".into()));
    }
    // Center the p feature vectors at their mean vector.
    let mean: Vec<f64> = (0..n).map(|i| t.values().row(i).sum() / p as f64).collect();
    let mut centered = t.values().t().to_owned();
    for j in 0..p {
        for i in 0..n {
            centered[[j, i]] -= mean[i];
        }
    }
    let gram = centered.dot(&centered.t());
    top_two_scaled(&gram)
}

/// Feature coordinates from the first two principal components of the
/// transposed data, rescaled into the unit square.
pub fn pca_coords(t: &FeatureTable) -> Result<Embedding2D> {
    if t.n_features() < 3 {
        return Err(Error::Dimension(format!(
            "PCA coordinates need at least 3 features, got {}",
            t.n_features()
        )));
    }
    let raw = pca_raw(t)?;
    Embedding2D::from_raw(&raw, t.feature_names().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::default_labels;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairwise(points: &[[f64; 2]]) -> Array2<f64> {
        let p = points.len();
        Array2::from_shape_fn((p, p), |(i, j)| {
            ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt()
        })
    }

    fn random_points(p: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..p).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    /// Orthogonal Procrustes with translation (no scaling): residual after
    /// best rotation/reflection of `a` onto `b`.
    fn procrustes_residual(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        let n = a.len() as f64;
        let ca = [a.iter().map(|p| p[0]).sum::<f64>() / n, a.iter().map(|p| p[1]).sum::<f64>() / n];
        let cb = [b.iter().map(|p| p[0]).sum::<f64>() / n, b.iter().map(|p| p[1]).sum::<f64>() / n];
        let am = nalgebra::DMatrix::from_fn(a.len(), 2, |i, k| a[i][k] - ca[k]);
        let bm = nalgebra::DMatrix::from_fn(b.len(), 2, |i, k| b[i][k] - cb[k]);
        let svd = (am.transpose() * &bm).svd(true, true);
        let r = svd.u.unwrap() * svd.v_t.unwrap();
        (am * r - bm).norm()
    }

    #[test]
    fn equilateral_triangle() {
        let d = DistanceMatrix::new(
            array![[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]],
            default_labels(3),
        )
        .unwrap();
        let e = mds_embed(&d).unwrap();
        let c = e.coords();
        let dist = |i: usize, j: usize| ((c[i][0] - c[j][0]).powi(2) + (c[i][1] - c[j][1]).powi(2)).sqrt();
        assert!((dist(0, 1) - dist(1, 2)).abs() < 1e-6);
        assert!((dist(0, 2) - dist(1, 2)).abs() < 1e-6);
    }

    #[test]
    fn collinear_order_preserved() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [6.0, 0.0]];
        let d = DistanceMatrix::new(pairwise(&pts), default_labels(4)).unwrap();
        let e = mds_embed(&d).unwrap();
        let xs: Vec<f64> = e.coords().iter().map(|c| c[0]).collect();
        let increasing = xs.windows(2).all(|w| w[0] < w[1]);
        let decreasing = xs.windows(2).all(|w| w[0] > w[1]);
        assert!(increasing || decreasing, "{xs:?}");
    }

    #[test]
    fn planar_configuration_round_trips() {
        for seed in 0..5 {
            let pts = random_points(8, seed);
            let raw = classical_mds(&pairwise(&pts)).unwrap();
            let back = pairwise(&raw);
            let truth = pairwise(&pts);
            for (a, b) in back.iter().zip(truth.iter()) {
                if *b > 0.0 {
                    assert!(((a - b) / b).abs() < 1e-6);
                }
            }
            assert!(procrustes_residual(&raw, &pts) < 1e-6);
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let d = DistanceMatrix::new(Array2::zeros((4, 4)), default_labels(4)).unwrap();
        assert!(matches!(mds_embed(&d), Err(Error::DegenerateEmbedding(_))));
    }

    fn table(values: Array2<f64>) -> FeatureTable {
        let (n, p) = values.dim();
        FeatureTable::new(values, default_labels(p), (0..n).map(|i| i.to_string()).collect(), None).unwrap()
    }

    #[test]
    fn pca_on_planar_features_preserves_distances() {
        // Six features spanning a 2-D affine subspace of 5-D sample space.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let v: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let ab: Vec<[f64; 2]> = (0..6).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let t = table(Array2::from_shape_fn((5, 6), |(i, j)| 0.3 + ab[j][0] * u[i] + ab[j][1] * v[i]));
        let raw = pca_raw(&t).unwrap();
        let want = crate::distances::feature_distances(&t).unwrap();
        let got = pairwise(&raw);
        for (a, b) in got.iter().zip(want.values().iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn duplicated_columns_share_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut v = Array2::from_shape_fn((20, 5), |_| rng.random::<f64>());
        for i in 0..20 {
            v[[i, 4]] = v[[i, 1]];
        }
        let e = pca_coords(&table(v)).unwrap();
        assert!((e.coords()[1][0] - e.coords()[4][0]).abs() < 1e-12);
        assert!((e.coords()[1][1] - e.coords()[4][1]).abs() < 1e-12);
    }

    #[test]
    fn pca_matches_covariance_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v = Array2::from_shape_fn((50, 6), |_| rng.random::<f64>());
        let raw = pca_raw(&table(v.clone())).unwrap();

        // Oracle: eigen-decompose the 50x50 covariance of the six feature points.
        let pts = nalgebra::DMatrix::from_fn(6, 50, |j, i| v[[i, j]]);
        let mean = pts.row_mean();
        let centered = nalgebra::DMatrix::from_fn(6, 50, |j, i| pts[(j, i)] - mean[i]);
        let cov = centered.transpose() * &centered;
        let eig = cov.symmetric_eigen();
        let mut order: Vec<usize> = (0..50).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for axis in 0..2 {
            let u = eig.eigenvectors.column(order[axis]);
            let proj = &centered * u;
            let sign = if (proj[0] * raw[0][axis]) < 0.0 { -1.0 } else { 1.0 };
            for j in 0..6 {
                assert!((sign * proj[j] - raw[j][axis]).abs() < 1e-6);
            }
        }
    }
}
