//! Dataset ingestion and CSV rendering.
//!
//! Points come in as CSV (one row per point, '.' decimals) or as raw
//! little-endian f64, row-major, described by a JSON sidecar
//! `{"n_points": N, "n_dims": n}`. Labels are a single-column CSV of
//! integers. All emitted tables use ',' separators and LF line
//! endings; rendering goes through strings so writing to a file or
//! stdout is the caller's choice and repeated runs are byte-identical.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::Deserialize;

use crate::error::IoError;
use crate::graph::AffinityGraph;
use crate::shapes::CurvePoint;

fn malformed(path: &Path, line: usize, detail: impl Into<String>) -> IoError {
    IoError::Malformed {
        path: path.display().to_string(),
        line,
        detail: detail.into(),
    }
}

/// Lines of `text` with trailing blank lines dropped; interior blanks
/// stay and surface as parse errors with the right line number.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    let mut lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    while matches!(lines.last(), Some((_, l)) if l.trim().is_empty()) {
        lines.pop();
    }
    lines
}

/// Read a numeric matrix from CSV, one row per point.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>, IoError> {
    let text = fs::read_to_string(path)?;
    let lines = content_lines(&text);
    if lines.is_empty() {
        return Err(malformed(path, 1, "empty input"));
    }
    let mut values = Vec::new();
    let mut n_cols = 0usize;
    for &(line_no, line) in &lines {
        let mut row = 0usize;
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok
                .parse()
                .map_err(|_| malformed(path, line_no, format!("bad number {tok:?}")))?;
            values.push(v);
            row += 1;
        }
        if n_cols == 0 {
            n_cols = row;
        } else if row != n_cols {
            return Err(malformed(
                path,
                line_no,
                format!("expected {n_cols} columns, found {row}"),
            ));
        }
    }
    let n_rows = lines.len();
    Ok(Array2::from_shape_vec((n_rows, n_cols), values).expect("counted shape"))
}

/// Read integer labels, one per line.
pub fn read_labels_csv(path: &Path) -> Result<Vec<i64>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (line_no, line) in content_lines(&text) {
        let tok = line.trim();
        let v: i64 = tok
            .parse()
            .map_err(|_| malformed(path, line_no, format!("bad label {tok:?}")))?;
        labels.push(v);
    }
    if labels.is_empty() {
        return Err(malformed(path, 1, "empty input"));
    }
    Ok(labels)
}

#[derive(Deserialize)]
struct Sidecar {
    n_points: usize,
    n_dims: usize,
}

/// Read a raw little-endian f64 matrix described by a JSON sidecar.
pub fn read_matrix_raw(data_path: &Path, sidecar_path: &Path) -> Result<Array2<f64>, IoError> {
    let sidecar: Sidecar =
        serde_json::from_str(&fs::read_to_string(sidecar_path)?).map_err(|e| IoError::Sidecar {
            path: sidecar_path.display().to_string(),
            detail: e.to_string(),
        })?;
    let bytes = fs::read(data_path)?;
    let expect = sidecar.n_points * sidecar.n_dims * 8;
    if bytes.len() != expect {
        return Err(IoError::Sidecar {
            path: data_path.display().to_string(),
            detail: format!(
                "{} x {} needs {expect} bytes, file has {}",
                sidecar.n_points,
                sidecar.n_dims,
                bytes.len()
            ),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(Array2::from_shape_vec((sidecar.n_points, sidecar.n_dims), values).expect("sized above"))
}

/// Render a matrix as CSV. `header` adds a first line of column names.
pub fn matrix_to_csv(m: &Array2<f64>, header: Option<&[String]>) -> String {
    let mut out = String::new();
    if let Some(names) = header {
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Render labels as single-column CSV.
pub fn labels_to_csv(labels: &[i64]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

/// Render graph edges as `i,j,p`.
pub fn graph_to_csv(g: &AffinityGraph) -> String {
    let mut out = String::from("i,j,p\n");
    for &(i, j, p) in &g.edges {
        out.push_str(&format!("{i},{j},{p}\n"));
    }
    out
}

/// Render a sampled shape curve as `zeta,f,clamped` (clamped as 0/1).
pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("zeta,f,clamped\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.zeta,
            p.f,
            if p.clamped { 1 } else { 0 }
        ));
    }
    out
}

/// Short stable hex fingerprint of arbitrary bytes (FNV-1a), for
/// naming and manifest fields.
pub fn fingerprint(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Write `contents` through a temp file in the same directory, then
/// rename into place, so readers never observe a half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".into(),
    });
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let m = array![[1.0, -2.5], [0.125, 3e10], [0.0, -0.0]];
        let p = dir.path().join("m.csv");
        fs::write(&p, matrix_to_csv(&m, None)).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), m);
    }

    #[test]
    fn csv_header_and_trailing_newline() {
        let m = array![[1.0, 2.0]];
        let names = vec!["y0".to_string(), "y1".to_string()];
        let s = matrix_to_csv(&m, Some(&names));
        assert_eq!(s, "y0,y1\n1,2\n");
        assert_eq!(matrix_to_csv(&m, None), "1,2\n");
    }

    #[test]
    fn malformed_csv_reports_one_based_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_temp(&dir, "bad.csv", "1,2\n3,4\n5,oops\n");
        match read_matrix_csv(&p).unwrap_err() {
            IoError::Malformed { line, detail, .. } => {
                assert_eq!(line, 3);
                assert!(detail.contains("oops"));
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn ragged_csv_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_temp(&dir, "ragged.csv", "1,2\n3\n");
        match read_matrix_csv(&p).unwrap_err() {
            IoError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn labels_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_temp(&dir, "l.csv", &labels_to_csv(&[0, 3, -7]));
        assert_eq!(read_labels_csv(&p).unwrap(), vec![0, 3, -7]);
        let p = write_temp(&dir, "bad.csv", "0\n1.5\n");
        match read_labels_csv(&p).unwrap_err() {
            IoError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn raw_roundtrip_and_size_check() {
        let dir = tempfile::tempdir().unwrap();
        let m = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let data = dir.path().join("m.f64");
        let bytes: Vec<u8> = m.iter().flat_map(|v: &f64| v.to_le_bytes()).collect();
        fs::write(&data, &bytes).unwrap();
        let sidecar = write_temp(&dir, "m.f64.json", r#"{"n_points": 2, "n_dims": 3}"#);
        assert_eq!(read_matrix_raw(&data, &sidecar).unwrap(), m);

        let wrong = write_temp(&dir, "wrong.json", r#"{"n_points": 3, "n_dims": 3}"#);
        assert!(matches!(
            read_matrix_raw(&data, &wrong),
            Err(IoError::Sidecar { .. })
        ));
    }

    #[test]
    fn curve_csv_format() {
        let pts = vec![
            CurvePoint {
                zeta: 0.0,
                f: -1.5,
                clamped: true,
            },
            CurvePoint {
                zeta: 0.5,
                f: -1.0,
                clamped: false,
            },
        ];
        let s = curve_to_csv(&pts);
        assert!(s.starts_with("zeta,f,clamped\n"));
        assert!(s.contains("0,-1.5,1\n"));
        assert!(s.contains("0.5,-1,0\n"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"second");
        assert!(!p.with_extension("csv.tmp").exists());
    }
}
