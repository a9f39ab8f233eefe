//! File formats: Matrix Market for matrices, JSON or CSV for vectors.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};

/// Reads a square matrix in Matrix Market coordinate format. Supports the
/// `real`, `integer` and `complex` fields with `general`, `symmetric` or
/// `hermitian` symmetry.
pub fn read_matrix_market(path: &Path) -> Result<ComplexMatrix> {
    let file = std::fs::File::open(path)?;
    read_matrix_market_from(std::io::BufReader::new(file))
}

pub fn read_matrix_market_from(reader: impl BufRead) -> Result<ComplexMatrix> {
    let mut lines = reader.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))
        .and_then(|(_, line)| line.map_err(Error::from))?;
    let head: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if head.len() < 5 || head[0] != "%%matrixmarket" || head[1] != "matrix" {
        return Err(Error::Parse(format!("bad MatrixMarket header: {header}")));
    }
    if head[2] != "coordinate" {
        return Err(Error::Parse(format!(
            "only coordinate format supported, got {}",
            head[2]
        )));
    }
    let field = head[3].as_str();
    if !matches!(field, "real" | "integer" | "complex") {
        return Err(Error::Parse(format!("unsupported field type {field}")));
    }
    let symmetry = head[4].as_str();
    if !matches!(symmetry, "general" | "symmetric" | "hermitian") {
        return Err(Error::Parse(format!("unsupported symmetry {symmetry}")));
    }

    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx + 1, trimmed.to_string()));
        break;
    }
    let (size_no, size_line) =
        size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("line {size_no}: bad size line '{size_line}': {e}")))?;
    if sizes.len() != 3 {
        return Err(Error::Parse(format!(
            "line {size_no}: bad size line '{size_line}'"
        )));
    }
    let (rows, cols, nnz) = (sizes[0], sizes[1], sizes[2]);
    if rows != cols {
        return Err(Error::Dimension(format!(
            "matrix must be square, got {rows}x{cols}"
        )));
    }

    let mut m = ComplexMatrix::zeros(rows);
    let mut seen = 0usize;
    for (idx, line) in lines {
        let no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let want = if field == "complex" { 4 } else { 3 };
        if toks.len() != want {
            return Err(Error::Parse(format!("line {no}: bad entry line '{trimmed}'")));
        }
        let r: usize = toks[0]
            .parse()
            .map_err(|e| Error::Parse(format!("line {no}: bad row index '{}': {e}", toks[0])))?;
        let c: usize = toks[1]
            .parse()
            .map_err(|e| Error::Parse(format!("line {no}: bad col index '{}': {e}", toks[1])))?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(Error::Parse(format!(
                "line {no}: entry ({r}, {c}) outside {rows}x{cols} matrix"
            )));
        }
        let re: f64 = toks[2]
            .parse()
            .map_err(|e| Error::Parse(format!("line {no}: bad value '{}': {e}", toks[2])))?;
        let im: f64 = if field == "complex" {
            toks[3]
                .parse()
                .map_err(|e| Error::Parse(format!("line {no}: bad value '{}': {e}", toks[3])))?
        } else {
            0.0
        };
        let value = C64::new(re, im);
        m.set(r - 1, c - 1, value);
        match symmetry {
            "symmetric" if r != c => m.set(c - 1, r - 1, value),
            "hermitian" if r != c => m.set(c - 1, r - 1, value.conj()),
            _ => {}
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse(format!(
            "size line promised {nnz} entries, found {seen}"
        )));
    }
    Ok(m)
}

/// Writes a matrix in Matrix Market `coordinate complex general` format.
pub fn write_matrix_market(m: &ComplexMatrix, mut w: impl Write) -> Result<()> {
    let n = m.dim();
    let entries: Vec<(usize, usize, C64)> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter_map(|(r, c)| {
            let v = m.get(r, c);
            (v.norm() > 0.0).then_some((r, c, v))
        })
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
    writeln!(w, "{} {} {}", n, n, entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{} {} {} {}", r + 1, c + 1, v.re, v.im)?;
    }
    Ok(())
}

/// Reads a vector from JSON (`[1.0, 2.0]` or `[[re, im], ...]`) or CSV (one
/// entry per line, `re` or `re,im`). The format is picked by file extension,
/// defaulting to JSON.
pub fn read_vector(path: &Path) -> Result<Vec<C64>> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_vector_csv(&text),
        _ => parse_vector_json(&text),
    }
}

pub fn parse_vector_json(text: &str) -> Result<Vec<C64>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("vector JSON: {e}")))?;
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Parse("vector JSON must be an array".into()))?;
    arr.iter().map(json_entry_to_complex).collect()
}

fn json_entry_to_complex(v: &serde_json::Value) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    if let Some(pair) = v.as_array() {
        if pair.len() == 2 {
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| Error::Parse("complex entry must hold numbers".into()))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| Error::Parse("complex entry must hold numbers".into()))?;
            return Ok(C64::new(re, im));
        }
    }
    Err(Error::Parse(format!(
        "vector entries must be numbers or [re, im] pairs, got {v}"
    )))
}

pub fn parse_vector_csv(text: &str) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: bad number '{t}': {e}", idx + 1)))
        };
        let entry = match parts.len() {
            1 => C64::new(parse(parts[0])?, 0.0),
            2 => C64::new(parse(parts[0])?, parse(parts[1])?),
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: expected 're' or 're,im'",
                    idx + 1
                )))
            }
        };
        out.push(entry);
    }
    if out.is_empty() {
        return Err(Error::Parse("vector file holds no entries".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_roundtrip() {
        let m = ComplexMatrix::from_fn(3, |r, c| {
            if (r + c) % 2 == 0 {
                C64::new(r as f64 + 0.5, c as f64 - 1.25)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let back = read_matrix_market_from(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.max_abs_diff(&m), 0.0);
    }

    #[test]
    fn reads_real_symmetric_entries() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n\
                    % heat operator sample\n\
                    2 2 2\n\
                    1 1 2.5\n\
                    2 1 -0.25\n";
        let m = read_matrix_market_from(std::io::Cursor::new(text)).unwrap();
        assert_eq!(m.get(0, 0), C64::new(2.5, 0.0));
        assert_eq!(m.get(0, 1), C64::new(-0.25, 0.0));
        assert_eq!(m.get(1, 0), C64::new(-0.25, 0.0));
        assert_eq!(m.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_symmetry_conjugates() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n\
                    2 2 2\n\
                    1 1 1.0 0.0\n\
                    2 1 0.5 0.75\n";
        let m = read_matrix_market_from(std::io::Cursor::new(text)).unwrap();
        assert_eq!(m.get(1, 0), C64::new(0.5, 0.75));
        assert_eq!(m.get(0, 1), C64::new(0.5, -0.75));
    }

    #[test]
    fn rejects_rectangular_and_bad_counts() {
        let rect = "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n";
        assert!(read_matrix_market_from(std::io::Cursor::new(rect)).is_err());
        let wrong = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read_matrix_market_from(std::io::Cursor::new(wrong)).is_err());
    }

    #[test]
    fn vector_json_forms() {
        assert_eq!(
            parse_vector_json("[1.0, -2.5]").unwrap(),
            vec![C64::new(1.0, 0.0), C64::new(-2.5, 0.0)]
        );
        assert_eq!(
            parse_vector_json("[[1.0, 2.0], [0.0, -1.0]]").unwrap(),
            vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)]
        );
        assert!(parse_vector_json("{\"x\": 1}").is_err());
    }

    #[test]
    fn vector_csv_forms() {
        let v = parse_vector_csv("1.0\n2.0,0.5\n\n# trailing comment\n").unwrap();
        assert_eq!(v, vec![C64::new(1.0, 0.0), C64::new(2.0, 0.5)]);
        assert!(parse_vector_csv("1.0,2.0,3.0\n").is_err());
    }
}
