use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use refined::ingest::{load_csv, FeatureTable};
use refined::{Error, Result};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes through `f`, then flushes, attributing IO failures to `path`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn header(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { line: 1, message: format!("{other:?}") },
    })?;
    let h = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    Ok(h.iter().map(str::to_string).collect())
}

/// Loads a table. The target is `target` if given, else a column named `y`
/// when one exists.
pub fn load_table(path: &Path, target: Option<&str>) -> Result<FeatureTable> {
    let target = match target {
        Some(t) => Some(t.to_string()),
        None => header(path)?.into_iter().find(|h| h == "y"),
    };
    load_csv(path, target.as_deref())
}

/// Two-column `id,value` file.
pub fn read_id_values(path: &Path) -> Result<Vec<(String, f64)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: format!("{}: {e}", path.display()),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(Error::Parse { line, message: format!("{}: expected id,value", path.display()) });
        }
        let v = rec[1].trim().parse::<f64>().map_err(|_| Error::Parse {
            line,
            message: format!("{}: '{}' is not a number", path.display(), &rec[1]),
        })?;
        out.push((rec[0].to_string(), v));
    }
    Ok(out)
}

pub fn write_id_values(path: &Path, ids: &[String], values: &[f64]) -> Result<()> {
    write_file(path, |w| {
        let mut wtr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(["id", "y"]).map_err(err)?;
        for (id, v) in ids.iter().zip(values) {
            wtr.write_record([id.clone(), v.to_string()]).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    })
}
