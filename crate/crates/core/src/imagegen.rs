//! Per-sample images and their on-disk formats.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::FeatureTable;
use crate::refine::{automorphs, symmetry_pixel, symmetry_suffix, FeatureGridMap};

pub const TENSOR_MAGIC: &str = "REFINED-TENSOR v1";

/// `count` square images of side `grid_size`, row-major, one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStack {
    count: usize,
    grid_size: usize,
    pixels: Vec<f64>,
    sample_ids: Vec<String>,
}

impl ImageStack {
    pub fn new(grid_size: usize, pixels: Vec<f64>, sample_ids: Vec<String>) -> Result<Self> {
        let count = sample_ids.len();
        if pixels.len() != count * grid_size * grid_size {
            return Err(Error::Dimension(format!(
                "{} pixels for {count} images of {grid_size}x{grid_size}",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Numeric(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(ImageStack { count, grid_size, pixels, sample_ids })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn image(&self, i: usize) -> &[f64] {
        let n = self.grid_size * self.grid_size;
        &self.pixels[i * n..(i + 1) * n]
    }

    pub fn pixel(&self, i: usize, row: usize, col: usize) -> f64 {
        self.image(i)[row * self.grid_size + col]
    }
}

/// Table column index for each map feature.
fn column_lookup(t: &FeatureTable, m: &FeatureGridMap) -> Result<Vec<usize>> {
    if t.n_features() != m.len() {
        return Err(Error::Alignment(format!(
            "table has {} features, map has {}",
            t.n_features(),
            m.len()
        )));
    }
    m.labels()
        .iter()
        .map(|name| {
            t.feature_index(name)
                .ok_or_else(|| Error::Alignment(format!("map feature '{name}' is not in the table")))
        })
        .collect()
}

fn check_normalized(t: &FeatureTable) -> Result<()> {
    if t.missing_count() > 0 {
        return Err(Error::Schema("table has missing values; impute before rendering".into()));
    }
    if let Some(v) = t.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Schema(format!("value {v} outside [0, 1]; normalize before rendering")));
    }
    Ok(())
}

/// Places each sample's feature values on its mapped pixels; every other
/// pixel is 0.
pub fn render(t: &FeatureTable, m: &FeatureGridMap) -> Result<ImageStack> {
    render_with(t, std::slice::from_ref(m))
}

/// Renders every sample under all 8 grid symmetries, sample-major, ids
/// suffixed `_r0` .. `_r3m`.
pub fn render_automorphs(t: &FeatureTable, m: &FeatureGridMap) -> Result<ImageStack> {
    render_with(t, &automorphs(m))
}

/// One image per map per sample; more than one map suffixes the ids.
fn render_with(t: &FeatureTable, maps: &[FeatureGridMap]) -> Result<ImageStack> {
    check_normalized(t)?;
    let cols = column_lookup(t, &maps[0])?;
    let g = maps[0].grid_size();
    let area = g * g;
    let per_sample = maps.len() * area;
    let mut pixels = vec![0.0; t.n_samples() * per_sample];
    pixels.par_chunks_mut(per_sample.max(1)).enumerate().for_each(|(i, chunk)| {
        for (s, m) in maps.iter().enumerate() {
            let img = &mut chunk[s * area..(s + 1) * area];
            for (&(r, c), &col) in m.assignment().iter().zip(&cols) {
                img[r * g + c] = t.value(i, col);
            }
        }
    });
    let ids = if maps.len() == 1 {
        t.sample_ids().to_vec()
    } else {
        t.sample_ids()
            .iter()
            .flat_map(|id| (0..maps.len()).map(move |s| format!("{id}{}", symmetry_suffix(s))))
            .collect()
    };
    ImageStack::new(g, pixels, ids)
}

/// Optional post-render smoothing. Deliberately the identity.
pub fn smooth(stack: ImageStack) -> ImageStack {
    stack
}

/// An image transformed by grid symmetry `index`, as used for augmentation.
pub fn transform_image(img: &[f64], g: usize, index: usize) -> Vec<f64> {
    let mut out = vec![0.0; g * g];
    for r in 0..g {
        for c in 0..g {
            let (tr, tc) = symmetry_pixel(index, (r, c), g);
            out[tr * g + tc] = img[r * g + c];
        }
    }
    out
}

/// `round(v * 255)` with halves away from zero, clamped to a byte.
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Replaces characters unsafe in file names with `_`.
pub fn sanitize_id(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    if s.is_empty() || s.chars().all(|c| c == '.') {
        format!("_{s}")
    } else {
        s
    }
}

fn pgm_bytes(img: &[f64], g: usize) -> Vec<u8> {
    let mut out = format!("P5\n{g} {g}\n255\n").into_bytes();
    out.extend(img.iter().map(|&v| quantize(v)));
    out
}

/// One binary PGM per image, `<dir>/<sanitized id>.pgm`. Returns the paths in
/// sample order.
pub fn write_pgm(stack: &ImageStack, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let names: Vec<String> = stack.sample_ids.iter().map(|id| sanitize_id(id)).collect();
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(Error::Format(format!("two samples share the file name '{dup}.pgm'")));
    }
    let paths: Vec<PathBuf> = names.iter().map(|n| dir.join(format!("{n}.pgm"))).collect();
    paths
        .par_iter()
        .enumerate()
        .try_for_each(|(i, path)| {
            std::fs::write(path, pgm_bytes(stack.image(i), stack.grid_size)).map_err(|e| Error::io(path, e))
        })?;
    Ok(paths)
}

/// Raw 8-bit gray image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

fn pgm_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte).map_err(|e| Error::io("<pgm>", e))? == 0 {
            break;
        }
        match byte[0] {
            b'#' if tok.is_empty() => {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip).map_err(|e| Error::io("<pgm>", e))?;
            }
            b if b.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    break;
                }
            }
            b => tok.push(b),
        }
    }
    String::from_utf8(tok).map_err(|_| Error::Format("non-ASCII PGM header".into()))
}

/// Reads a binary (P5) PGM with maxval 255.
pub fn read_pgm<R: Read>(reader: R) -> Result<PgmImage> {
    let mut r = BufReader::new(reader);
    if pgm_token(&mut r)? != "P5" {
        return Err(Error::Format("not a binary PGM (P5)".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        let t = pgm_token(&mut r)?;
        t.parse().map_err(|_| Error::Format(format!("bad PGM {what} '{t}'")))
    };
    let (width, height, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if maxval != 255 {
        return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
    }
    let mut data = vec![0u8; width * height];
    r.read_exact(&mut data).map_err(|e| Error::Format(format!("truncated PGM raster: {e}")))?;
    Ok(PgmImage { width, height, data })
}

pub fn load_pgm(path: &Path) -> Result<PgmImage> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_pgm(f)
}

/// Header line `REFINED-TENSOR v1 n g g`, then `n g^2` little-endian binary32
/// values. Pixels are rounded to binary32.
pub fn write_tensor<W: Write>(stack: &ImageStack, w: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(w);
    let io = |e| Error::io("<tensor>", e);
    let g = stack.grid_size;
    writeln!(w, "{TENSOR_MAGIC} {} {g} {g}", stack.count).map_err(io)?;
    for &v in &stack.pixels {
        w.write_all(&(v as f32).to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn save_tensor(stack: &ImageStack, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_tensor(stack, f)
}

/// Tensor contents: image count, grid size and the binary32 pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub count: usize,
    pub grid_size: usize,
    pub values: Vec<f32>,
}

pub fn read_tensor<R: Read>(reader: R) -> Result<Tensor> {
    let mut r = BufReader::new(reader);
    let mut header = Vec::new();
    r.read_until(b'\n', &mut header).map_err(|e| Error::io("<tensor>", e))?;
    let header = String::from_utf8(header).map_err(|_| Error::Format("non-UTF-8 tensor header".into()))?;
    let fields: Vec<&str> = header.trim_end_matches('\n').split(' ').collect();
    let [m1, m2, n, g1, g2] = fields.as_slice() else {
        return Err(Error::Format(format!("bad tensor header '{}'", header.trim_end())));
    };
    if format!("{m1} {m2}") != TENSOR_MAGIC {
        return Err(Error::Format(format!("bad tensor magic '{m1} {m2}'")));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad tensor dimension '{s}'")));
    let (count, g, g2) = (parse(n)?, parse(g1)?, parse(g2)?);
    if g != g2 {
        return Err(Error::Format("tensor images must be square".into()));
    }
    let mut raw = Vec::new();
    r.read_to_end(&mut raw).map_err(|e| Error::io("<tensor>", e))?;
    if raw.len() != 4 * count * g * g {
        return Err(Error::Format(format!(
            "tensor body has {} bytes, expected {}",
            raw.len(),
            4 * count * g * g
        )));
    }
    let values = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
    Ok(Tensor { count, grid_size: g, values })
}

pub fn load_tensor(path: &Path) -> Result<Tensor> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tensor(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::random_map;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    fn random_table(n: usize, p: usize, seed: u64) -> FeatureTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
        FeatureTable::new(v, names(p), (0..n).map(|i| format!("s{i}")).collect(), None).unwrap()
    }

    #[test]
    fn single_pixel_and_zero_sample() {
        let v = Array2::from_shape_vec((2, 2), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let t = FeatureTable::new(v, names(2), vec!["a".into(), "b".into()], None).unwrap();
        let m = FeatureGridMap::new(4, vec![(2, 3), (0, 0)], names(2)).unwrap();
        let s = render(&t, &m).unwrap();
        assert_eq!(s.pixel(0, 2, 3), 1.0);
        assert_eq!(s.image(0).iter().filter(|&&v| v != 0.0).count(), 1);
        assert!(s.image(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mass_is_conserved() {
        let t = random_table(5, 7, 1);
        let m = random_map(names(7), 3, 2).unwrap();
        let s = render(&t, &m).unwrap();
        for i in 0..5 {
            let row: f64 = t.values().row(i).sum();
            assert!((s.image(i).iter().sum::<f64>() - row).abs() < 1e-9);
            assert!(s.image(i).iter().filter(|&&v| v == 0.0).count() >= 9 - 7);
        }
    }

    #[test]
    fn column_order_does_not_matter() {
        let t = random_table(3, 4, 2);
        let m = random_map(names(4), 2, 3).unwrap();
        let shuffled = t.select_features(&["f2", "f0", "f3", "f1"]).unwrap();
        assert_eq!(render(&t, &m).unwrap(), render(&shuffled, &m).unwrap());
    }

    #[test]
    fn alignment_and_range_checks() {
        let t = random_table(2, 3, 3);
        let m = FeatureGridMap::new(2, vec![(0, 0), (0, 1), (1, 0)], vec!["f0".into(), "f1".into(), "zz".into()]).unwrap();
        assert!(matches!(render(&t, &m), Err(Error::Alignment(_))));
        let v = Array2::from_elem((1, 1), 2.0);
        let t = FeatureTable::new(v, names(1), vec!["a".into()], None).unwrap();
        let m = FeatureGridMap::new(1, vec![(0, 0)], names(1)).unwrap();
        assert!(matches!(render(&t, &m), Err(Error::Schema(_))));
    }

    #[test]
    fn automorph_rendering_matches_image_transform() {
        let t = random_table(2, 6, 4);
        let m = random_map(names(6), 3, 5).unwrap();
        let base = render(&t, &m).unwrap();
        let aug = render_automorphs(&t, &m).unwrap();
        assert_eq!(aug.count(), 16);
        assert_eq!(aug.sample_ids()[9], "s1_r1");
        assert_eq!(aug.sample_ids()[15], "s1_r3m");
        for i in 0..2 {
            for s in 0..8 {
                assert_eq!(aug.image(i * 8 + s), transform_image(base.image(i), 3, s).as_slice());
            }
        }
    }

    #[test]
    fn quantization_rule() {
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0 / 255.0 * 0.5), 1);
    }

    #[test]
    fn pgm_round_trip() {
        let t = random_table(3, 5, 6);
        let m = random_map(names(5), 3, 7).unwrap();
        let s = render(&t, &m).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_pgm(&s, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        for (i, path) in paths.iter().enumerate() {
            let raw = std::fs::read(path).unwrap();
            assert!(raw.starts_with(b"P5\n3 3\n255\n"));
            let img = load_pgm(path).unwrap();
            assert_eq!((img.width, img.height), (3, 3));
            let expect: Vec<u8> = s.image(i).iter().map(|&v| quantize(v)).collect();
            assert_eq!(img.data, expect);
        }
        assert!(read_pgm(&b"P5\n# comment\n1 1\n255\n\x07"[..]).unwrap().data == vec![7]);
        assert!(read_pgm(&b"P2\n1 1\n255\n7"[..]).is_err());
    }

    #[test]
    fn tensor_layout() {
        let s = ImageStack::new(2, vec![0.0, 1.0, 0.5, 0.25], vec!["a".into()]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&s, &mut buf).unwrap();
        let header = b"REFINED-TENSOR v1 1 2 2\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 16);
        let mut expect = header.to_vec();
        for v in [0.0f32, 1.0, 0.5, 0.25] {
            expect.extend(v.to_le_bytes());
        }
        assert_eq!(buf, expect);
        let back = read_tensor(buf.as_slice()).unwrap();
        assert_eq!(back.values, vec![0.0, 1.0, 0.5, 0.25]);
        assert!(read_tensor(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn sanitized_names() {
        assert_eq!(sanitize_id("a/b c"), "a_b_c");
        assert_eq!(sanitize_id(".."), "_..");
        let s = ImageStack::new(1, vec![0.0, 0.0], vec!["a b".into(), "a/b".into()]).unwrap();
        assert!(write_pgm(&s, tempfile::tempdir().unwrap().path()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn render_is_linear(seed in 0u64..200, alpha in 0.0f64..1.0) {
            let t = random_table(3, 6, seed);
            let scaled = FeatureTable::new(t.values().mapv(|v| v * alpha), names(6), t.sample_ids().to_vec(), None).unwrap();
            let m = random_map(names(6), 3, seed).unwrap();
            let a = render(&t, &m).unwrap();
            let b = render(&scaled, &m).unwrap();
            for (x, y) in a.pixels().iter().zip(b.pixels()) {
                proptest::prop_assert!((x * alpha - y).abs() < 1e-15);
            }
            for i in 0..3 {
                proptest::prop_assert!(a.image(i).len() - 6 <= a.image(i).iter().filter(|&&v| v == 0.0).count());
            }
        }

        #[test]
        fn tensor_round_trip_bitwise(seed in 0u64..200, n in 1usize..4, g in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let px: Vec<f64> = (0..n * g * g).map(|_| rng.random()).collect();
            let s = ImageStack::new(g, px, (0..n).map(|i| i.to_string()).collect()).unwrap();
            let mut buf = Vec::new();
            write_tensor(&s, &mut buf).unwrap();
            let back = read_tensor(buf.as_slice()).unwrap();
            let again = ImageStack::new(g, back.values.iter().map(|&v| v as f64).collect(), s.sample_ids().to_vec()).unwrap();
            let mut buf2 = Vec::new();
            write_tensor(&again, &mut buf2).unwrap();
            proptest::prop_assert_eq!(buf, buf2);
            for (a, b) in s.pixels().iter().zip(&back.values) {
                proptest::prop_assert_eq!((*a as f32).to_bits(), b.to_bits());
            }
        }
    }
}
