use ndarray::Array2;

use super::graph::{component_count, geodesic_distances, knn_graph, nearest};
use super::mds::classical_mds;
use super::Embedding2D;
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::ingest::FeatureTable;
use crate::linalg::{solve, symmetric_eigen};

fn check_k(k: usize, p: usize) -> Result<()> {
    if k == 0 || k >= p {
        return Err(Error::Config(format!("neighbor count k = {k} must lie in [1, {p})")));
    }
    Ok(())
}

/// Isomap: classical MDS on shortest-path distances through the symmetric
/// k-NN graph of `d`.
pub fn isomap_embed(d: &DistanceMatrix, k: usize) -> Result<Embedding2D> {
    check_k(k, d.size())?;
    let adj = knn_graph(d.values(), k);
    let components = component_count(&adj);
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let geo = geodesic_distances(&adj);
    let raw = classical_mds(&geo)?;
    Embedding2D::from_raw(&raw, d.labels().to_vec())
}

/// Barycentric reconstruction weights of every feature from its `k` nearest
/// features, as a dense `p x p` matrix with rows summing to one.
fn lle_weights(t: &FeatureTable, k: usize, regularization: f64) -> Result<Array2<f64>> {
    let (n, p) = t.values().dim();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| t.column(j).to_vec()).collect();
    let dist = Array2::from_shape_fn((p, p), |(a, b)| {
        cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    });
    let mut w = Array2::zeros((p, p));
    for i in 0..p {
        let nb = nearest(&dist, i, k);
        let mut gram = Array2::from_shape_fn((k, k), |(a, b)| {
            (0..n)
                .map(|s| (cols[nb[a]][s] - cols[i][s]) * (cols[nb[b]][s] - cols[i][s]))
                .sum::<f64>()
        });
        let trace: f64 = (0..k).map(|a| gram[[a, a]]).sum();
        let ridge = if trace > 0.0 { regularization * trace } else { regularization };
        for a in 0..k {
            gram[[a, a]] += ridge;
        }
        let x = solve(&gram, &vec![1.0; k]).ok_or_else(|| {
            Error::Numeric(format!(
                "local Gram matrix of feature '{}' is singular; use a regularization > 0",
                t.feature_names()[i]
            ))
        })?;
        let total: f64 = x.iter().sum();
        if total.abs() < 1e-300 {
            return Err(Error::Numeric("LLE weights do not normalize".into()));
        }
        for (a, &j) in nb.iter().enumerate() {
            w[[i, j]] = x[a] / total;
        }
    }
    Ok(w)
}

fn lle_cost_matrix(w: &Array2<f64>) -> Array2<f64> {
    let p = w.nrows();
    let i_minus_w = Array2::from_shape_fn((p, p), |(a, b)| if a == b { 1.0 } else { 0.0 }) - w;
    i_minus_w.t().dot(&i_minus_w)
}

/// Locally linear embedding of the feature columns.
pub fn lle_embed(t: &FeatureTable, k: usize, regularization: f64) -> Result<Embedding2D> {
    let p = t.n_features();
    if p < 4 {
        return Err(Error::Dimension(format!("LLE needs at least 4 features, got {p}")));
    }
    check_k(k, p)?;
    if t.missing_count() > 0 {
        return Err(Error::Numeric("LLE needs a complete table".into()));
    }
    let w = lle_weights(t, k, regularization)?;
    let eig = symmetric_eigen(&lle_cost_matrix(&w))?;
    // Skip the bottom (constant) eigenvector.
    let raw: Vec<[f64; 2]> = (0..p)
        .map(|i| [eig.vectors[[i, p - 2]], eig.vectors[[i, p - 3]]])
        .collect();
    Embedding2D::from_raw(&raw, t.feature_names().to_vec())
}

fn laplacian(d: &DistanceMatrix, k: usize, heat_scale: Option<f64>) -> Result<Array2<f64>> {
    let p = d.size();
    let adj = knn_graph(d.values(), k);
    let components = component_count(&adj);
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let h = match heat_scale {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Config(format!("heat scale must be positive, got {h}"))),
        None => median_knn_distance(d, k),
    };
    let mut lap = Array2::zeros((p, p));
    for (i, list) in adj.iter().enumerate() {
        for &(j, dist) in list {
            let w = if h > 0.0 { (-(dist / h).powi(2)).exp() } else { 1.0 };
            lap[[i, j]] = -w;
            lap[[i, i]] += w;
        }
    }
    Ok(lap)
}

fn median_knn_distance(d: &DistanceMatrix, k: usize) -> f64 {
    let mut all: Vec<f64> = (0..d.size())
        .flat_map(|i| nearest(d.values(), i, k).into_iter().map(move |j| (i, j)))
        .map(|(i, j)| d.get(i, j))
        .collect();
    all.sort_by(f64::total_cmp);
    let m = all.len();
    if m == 0 {
        0.0
    } else if m % 2 == 1 {
        all[m / 2]
    } else {
        0.5 * (all[m / 2 - 1] + all[m / 2])
    }
}

/// Laplacian eigenmaps: heat-kernel weighted k-NN graph, unnormalized
/// Laplacian, coordinates from the eigenvectors of the two smallest nonzero
/// eigenvalues. `heat_scale` defaults to the median k-NN distance.
pub fn le_embed(d: &DistanceMatrix, k: usize, heat_scale: Option<f64>) -> Result<Embedding2D> {
    let p = d.size();
    if p < 3 {
        return Err(Error::Dimension(format!("Laplacian eigenmaps need at least 3 features, got {p}")));
    }
    check_k(k, p)?;
    let lap = laplacian(d, k, heat_scale)?;
    let eig = symmetric_eigen(&lap)?;
    let raw: Vec<[f64; 2]> = (0..p)
        .map(|i| [eig.vectors[[i, p - 2]], eig.vectors[[i, p - 3]]])
        .collect();
    Embedding2D::from_raw(&raw, d.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{default_labels, mds_embed};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points_matrix(points: &[[f64; 2]]) -> DistanceMatrix {
        DistanceMatrix::from_points(points, default_labels(points.len())).unwrap()
    }

    #[test]
    fn isomap_with_full_graph_equals_mds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<[f64; 2]> = (0..9).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let d = points_matrix(&pts);
        let a = isomap_embed(&d, 8).unwrap();
        let b = mds_embed(&d).unwrap();
        for (x, y) in a.coords().iter().zip(b.coords()) {
            assert!((x[0] - y[0]).abs() < 1e-9 && (x[1] - y[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn isomap_unrolls_a_spiral() {
        // Archimedean spiral: arc length grows monotonically with the angle.
        let pts: Vec<[f64; 2]> = (0..20)
            .map(|i| {
                let th = 1.0 + 0.3 * i as f64;
                [th * th.cos(), th * th.sin()]
            })
            .collect();
        let d = points_matrix(&pts);
        let geo = geodesic_distances(&knn_graph(d.values(), 2));
        assert!((1..20).all(|i| geo[[0, i]] > geo[[0, i - 1]]));
        let e = isomap_embed(&d, 2).unwrap();
        let xs: Vec<f64> = e.coords().iter().map(|c| c[0]).collect();
        let inc = xs.windows(2).all(|w| w[0] < w[1]);
        let dec = xs.windows(2).all(|w| w[0] > w[1]);
        assert!(inc || dec, "{xs:?}");
    }

    #[test]
    fn isomap_reports_disconnection() {
        let pts = [
            [0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1], [0.05, 0.2],
            [5.0, 5.0], [5.1, 5.0], [5.0, 5.1], [5.1, 5.1], [5.05, 5.2],
        ];
        match isomap_embed(&points_matrix(&pts), 1) {
            Err(Error::Disconnected { components }) => assert!(components >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn column_table(cols: &[Vec<f64>]) -> FeatureTable {
        let n = cols[0].len();
        let p = cols.len();
        FeatureTable::new(
            Array2::from_shape_fn((n, p), |(i, j)| cols[j][i]),
            default_labels(p),
            (0..n).map(|i| i.to_string()).collect(),
            None,
        )
        .unwrap()
    }

    fn curve_table(p: usize) -> FeatureTable {
        // Features sampled along a smooth curve in 3-D sample space.
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let s = j as f64 / (p - 1) as f64;
                vec![s, (2.0 * s).sin() * 0.3, s * s * 0.5]
            })
            .collect();
        column_table(&cols)
    }

    #[test]
    fn lle_weights_sum_to_one_and_null_space_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cols: Vec<Vec<f64>> = (0..12).map(|_| (0..6).map(|_| rng.random::<f64>()).collect()).collect();
        let t = column_table(&cols);
        let w = lle_weights(&t, 4, 1e-3).unwrap();
        for i in 0..12 {
            assert!((w.row(i).sum() - 1.0).abs() < 1e-9);
        }
        let eig = symmetric_eigen(&lle_cost_matrix(&w)).unwrap();
        let last = eig.values[11];
        assert!(last.abs() < 1e-9, "{last}");
        let v = eig.vector(11);
        for x in &v {
            assert!((x - v[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn lle_orders_points_on_a_curve() {
        let t = curve_table(12);
        let e = lle_embed(&t, 2, 1e-3).unwrap();
        let xs: Vec<f64> = e.coords().iter().map(|c| c[0]).collect();
        // Adjacent features along the curve stay adjacent in the embedding rank.
        let mut order: Vec<usize> = (0..12).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let forward: Vec<usize> = (0..12).collect();
        let backward: Vec<usize> = (0..12).rev().collect();
        assert!(order == forward || order == backward, "{order:?}");
    }

    #[test]
    fn lle_without_regularization_fails_on_rank_deficient_gram() {
        // k exceeds the sample dimension, so the local Gram is singular.
        let t = curve_table(8);
        assert!(matches!(lle_embed(&t, 5, 0.0), Err(Error::Numeric(_))));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..15).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let lap = laplacian(&points_matrix(&pts), 4, None).unwrap();
        for i in 0..15 {
            assert!(lap.row(i).sum().abs() < 1e-9);
        }
        let eig = symmetric_eigen(&lap).unwrap();
        assert!(eig.values[14].abs() < 1e-9);
        let v = eig.vector(14);
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-6));
    }

    #[test]
    fn fiedler_vector_is_monotone_on_a_path() {
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 0.0]).collect();
        let d = points_matrix(&pts);
        let lap = laplacian(&d, 1, None).unwrap();
        let eig = symmetric_eigen(&lap).unwrap();
        let f = eig.vector(8);
        let inc = f.windows(2).all(|w| w[0] < w[1]);
        let dec = f.windows(2).all(|w| w[0] > w[1]);
        assert!(inc || dec, "{f:?}");
        let e = le_embed(&d, 1, None).unwrap();
        assert_eq!(e.len(), 10);
    }

    #[test]
    fn le_reports_disconnection() {
        let pts = [[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [9.0, 0.0], [9.1, 0.0], [9.2, 0.0]];
        assert!(matches!(le_embed(&points_matrix(&pts), 1, None), Err(Error::Disconnected { .. })));
    }
}
