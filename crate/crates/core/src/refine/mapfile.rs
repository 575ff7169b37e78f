use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::FeatureGridMap;

pub const MAP_MAGIC: &str = "REFINED-MAP v1";

/// Writes the versioned text format: magic line, `grid g g`, then
/// `name row col` per feature.
pub fn write_map<W: Write>(m: &FeatureGridMap, mut w: W) -> Result<()> {
    if let Some(bad) = m.labels().iter().find(|l| l.is_empty() || l.chars().any(char::is_whitespace)) {
        return Err(Error::Format(format!("feature name '{bad}' is empty or contains whitespace")));
    }
    let io = |e| Error::io("<map file>", e);
    let g = m.grid_size();
    writeln!(w, "{MAP_MAGIC}").map_err(io)?;
    writeln!(w, "grid {g} {g}").map_err(io)?;
    for (name, (r, c)) in m.labels().iter().zip(m.assignment()) {
        writeln!(w, "{name} {r} {c}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_map<R: BufRead>(r: R) -> Result<FeatureGridMap> {
    let mut lines = r.lines().enumerate();
    let mut next = || -> Result<Option<(u64, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((i, line)) => Ok(Some((i as u64 + 1, line.map_err(|e| Error::io("<map file>", e))?))),
        }
    };
    let bad = |line: u64, message: String| Error::Parse { line, message };
    match next()? {
        Some((_, l)) if l.trim_end() == MAP_MAGIC => {}
        Some((n, l)) => return Err(bad(n, format!("expected '{MAP_MAGIC}', found '{l}'"))),
        None => return Err(bad(1, "empty map file".into())),
    }
    let (n, header) = next()?.ok_or_else(|| bad(2, "missing grid line".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let g = match fields.as_slice() {
        ["grid", a, b] if a == b => a.parse::<usize>().map_err(|_| bad(n, format!("bad grid size '{a}'")))?,
        ["grid", _, _] => return Err(bad(n, "only square grids are supported".into())),
        _ => return Err(bad(n, format!("expected 'grid <g> <g>', found '{header}'"))),
    };
    let mut labels = Vec::new();
    let mut assignment = Vec::new();
    let mut seen_names = std::collections::HashSet::new();
    let mut seen_pixels = std::collections::HashSet::new();
    while let Some((n, line)) = next()? {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, r, c] = fields.as_slice() else {
            return Err(bad(n, format!("expected '<name> <row> <col>', found '{line}'")));
        };
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(n, format!("bad index '{s}'")));
        let px = (idx(r)?, idx(c)?);
        if px.0 >= g || px.1 >= g {
            return Err(bad(n, format!("pixel ({}, {}) outside the {g}x{g} grid", px.0, px.1)));
        }
        if !seen_pixels.insert(px) {
            return Err(bad(n, format!("duplicate pixel ({}, {})", px.0, px.1)));
        }
        if !seen_names.insert(name.to_string()) {
            return Err(bad(n, format!("duplicate feature '{name}'")));
        }
        labels.push(name.to_string());
        assignment.push(px);
    }
    FeatureGridMap::new(g, assignment, labels)
}
