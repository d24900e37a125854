use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Reads a numeric CSV with one row per feature and one column per point.
///
/// Lines starting with `#` are skipped. A first row in which no cell parses
/// as a number is taken as a header. Ragged rows, non-numeric or non-finite
/// cells and empty inputs are rejected with the offending line number.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(file, path)
}

fn parse_matrix(reader: impl std::io::Read, path: &Path) -> Result<Array2<f64>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut last_line = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        last_line = line;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rows.is_empty()
            && width.is_none()
            && rec.iter().all(|c| c.parse::<f64>().is_err())
        {
            // header row
            width = Some(rec.len());
            continue;
        }
        if let Some(w) = width {
            if rec.len() != w {
                return Err(parse_err(
                    line,
                    format!("expected {w} columns, found {}", rec.len()),
                ));
            }
        } else {
            width = Some(rec.len());
        }
        let mut row = Vec::with_capacity(rec.len());
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(line, format!("column {}: {cell:?} is not a number", col + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column {}: non-finite value {cell:?}", col + 1),
                ));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(last_line.max(1), "no numeric rows".into()));
    }
    let ncols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat)
        .map_err(|e| parse_err(1, e.to_string()))
}

/// Writes `a` in the layout read by [`load_matrix`].
pub fn write_matrix(path: impl AsRef<Path>, a: ArrayView2<'_, f64>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
