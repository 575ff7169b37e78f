//! Initial 2-D feature coordinates on the unit square.
//!
//! Classical MDS is the default initializer; Isomap, LLE, Laplacian
//! eigenmaps, PCA and uniform random placement are available for comparison.

mod graph;
mod manifold;
mod mds;

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::ingest::FeatureTable;

pub use manifold::{isomap_embed, le_embed, lle_embed};
pub use mds::{classical_mds, mds_embed, pca_coords};

pub const DEFAULT_NEIGHBORS: usize = 10;
pub const DEFAULT_LLE_REGULARIZATION: f64 = 1e-3;

/// One `(x, y)` location per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding2D {
    coords: Vec<[f64; 2]>,
    labels: Vec<String>,
}

impl Embedding2D {
    /// Checks that every coordinate lies in `[0, 1]`.
    pub fn new(coords: Vec<[f64; 2]>, labels: Vec<String>) -> Result<Self> {
        if coords.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} coordinates for {} labels",
                coords.len(),
                labels.len()
            )));
        }
        if let Some((j, c)) = coords
            .iter()
            .enumerate()
            .find(|(_, c)| !c.iter().all(|v| (0.0..=1.0).contains(v)))
        {
            return Err(Error::Numeric(format!(
                "coordinate {j} = ({}, {}) outside the unit square",
                c[0], c[1]
            )));
        }
        Ok(Embedding2D { coords, labels })
    }

    /// Fits raw planar coordinates into the unit square. See [`rescale_into`].
    pub fn from_raw(raw: &[[f64; 2]], labels: Vec<String>) -> Result<Self> {
        Embedding2D::new(rescale_into(raw, 0.0, 1.0)?, labels)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The same configuration squeezed into `[lo, hi]^2`.
    pub fn rescaled(&self, lo: f64, hi: f64) -> Result<Self> {
        Embedding2D::new(rescale_into(&self.coords, lo, hi)?, self.labels.clone())
    }

    /// CSV with header `feature_name,x,y`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(["feature_name", "x", "y"]).map_err(err)?;
        for (label, c) in self.labels.iter().zip(&self.coords) {
            wtr.write_record([label.clone(), c[0].to_string(), c[1].to_string()])
                .map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::io("<embedding csv>", e))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut coords = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: "expected feature_name,x,y".into(),
                });
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("'{s}' is not a number"),
                })
            };
            labels.push(rec[0].to_string());
            coords.push([num(&rec[1])?, num(&rec[2])?]);
        }
        Embedding2D::new(coords, labels)
    }
}

/// Uniformly scales and translates points into `[lo, hi]^2`, preserving the
/// aspect ratio. The longer extent spans the full interval and the shorter one
/// is centered.
pub fn rescale_into(raw: &[[f64; 2]], lo: f64, hi: f64) -> Result<Vec<[f64; 2]>> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    if raw.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite coordinate".into()));
    }
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for c in raw {
        for a in 0..2 {
            min[a] = min[a].min(c[a]);
            max[a] = max[a].max(c[a]);
        }
    }
    let extent = (max[0] - min[0]).max(max[1] - min[1]);
    let width = hi - lo;
    if raw.len() == 1 || extent == 0.0 {
        if raw.len() > 1 {
            return Err(Error::DegenerateEmbedding("all points coincide".into()));
        }
        let mid = lo + 0.5 * width;
        return Ok(vec![[mid, mid]]);
    }
    let scale = width / extent;
    let offset = [
        lo + 0.5 * (width - (max[0] - min[0]) * scale),
        lo + 0.5 * (width - (max[1] - min[1]) * scale),
    ];
    Ok(raw
        .iter()
        .map(|c| {
            [
                (offset[0] + (c[0] - min[0]) * scale).clamp(lo, hi),
                (offset[1] + (c[1] - min[1]) * scale).clamp(lo, hi),
            ]
        })
        .collect())
}

/// I.i.d. uniform locations on the unit square.
pub fn random_embed(labels: Vec<String>, seed: u64) -> Embedding2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..labels.len())
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    Embedding2D { coords, labels }
}

/// Initializer choice for the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    Mds,
    Isomap,
    Lle,
    Le,
    Random,
    Pca,
}

impl std::str::FromStr for Initializer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "mds" => Initializer::Mds,
            "isomap" => Initializer::Isomap,
            "lle" => Initializer::Lle,
            "le" => Initializer::Le,
            "random" => Initializer::Random,
            "pca" => Initializer::Pca,
            other => return Err(Error::Config(format!("unknown initializer '{other}'"))),
        })
    }
}

/// Runs `init` with the default ablation parameters.
pub fn initial_embedding(
    init: Initializer,
    table: &FeatureTable,
    d: &DistanceMatrix,
    seed: u64,
) -> Result<Embedding2D> {
    let k = DEFAULT_NEIGHBORS.min(d.size().saturating_sub(1)).max(1);
    match init {
        Initializer::Mds => mds_embed(d),
        Initializer::Isomap => isomap_embed(d, k),
        Initializer::Lle => lle_embed(table, k.min(table.n_features().saturating_sub(1)), DEFAULT_LLE_REGULARIZATION),
        Initializer::Le => le_embed(d, k, None),
        Initializer::Random => Ok(random_embed(d.labels().to_vec(), seed)),
        Initializer::Pca => pca_coords(table),
    }
}

#[cfg(test)]
pub(crate) fn default_labels(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_keeps_aspect_ratio() {
        let out = rescale_into(&[[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]], 0.0, 1.0).unwrap();
        assert_eq!(out[0], [0.0, 0.25]);
        assert_eq!(out[1], [1.0, 0.25]);
        assert_eq!(out[2], [0.5, 0.75]);
        assert!(matches!(
            rescale_into(&[[1.0, 1.0], [1.0, 1.0]], 0.0, 1.0),
            Err(Error::DegenerateEmbedding(_))
        ));
    }

    #[test]
    fn random_embed_is_seeded_and_in_square() {
        let a = random_embed(default_labels(1000), 4);
        assert_eq!(a, random_embed(default_labels(1000), 4));
        assert!(a.coords().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        // Mean of 1000 U(0,1) has sd 0.0091; 0.05 is over 5 sd.
        let mean = a.coords().iter().map(|c| c[0]).sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn csv_round_trip() {
        let e = random_embed(default_labels(5), 1);
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"feature_name,x,y\n"));
        assert_eq!(Embedding2D::read_csv(buf.as_slice()).unwrap(), e);
    }

    #[test]
    fn outside_square_rejected() {
        assert!(Embedding2D::new(vec![[1.5, 0.0]], default_labels(1)).is_err());
    }

    #[test]
    fn initializer_names() {
        assert_eq!("LLE".parse::<Initializer>().unwrap(), Initializer::Lle);
        assert!("tsne".parse::<Initializer>().is_err());
    }
}
