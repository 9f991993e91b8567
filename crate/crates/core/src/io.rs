//! Text formats: data as CSV, symmetric matrices as sparse triplets.
//!
//! Data CSV has one row per sample and one column per variable, with an
//! optional header row. A first record that does not parse entirely as
//! numbers is taken as the header.
//!
//! The triplet format starts with the line `p=<p> format=sym-triplet` and
//! lists `i j value` for every nonzero entry with `i ≤ j`, indices 0-based.
//!
//! Floats are written in Rust's shortest round-trip form, so reading back
//! reproduces every value exactly.

use std::io::{BufRead, Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Role, SymMatrix, ZeroTolerance};

pub fn read_data_csv(reader: impl Read) -> Result<DataMatrix> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut names = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, record) in csv.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => Error::Parse {
                line: pos.as_ref().map_or(k + 1, |p| p.line() as usize),
                reason: format!("expected {expected_len} fields, found {len}"),
            },
            _ => Error::Csv(e),
        })?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => rows.push(values),
            Err(_) if k == 0 => names = Some(record.iter().map(str::to_owned).collect::<Vec<_>>()),
            Err(e) => {
                let field = record.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or_default();
                return Err(Error::Parse { line, reason: format!("cannot parse {field:?} as a number ({e})") });
            }
        }
    }
    let p = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    let data = DataMatrix::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))?;
    match names {
        Some(names) => data.with_names(names),
        None => Ok(data),
    }
}

pub fn write_data_csv(data: &DataMatrix, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    if let Some(names) = data.column_names() {
        csv.write_record(names)?;
    }
    let values = data.values();
    let mut record = Vec::with_capacity(data.p());
    for i in 0..data.n() {
        record.clear();
        record.extend(values.row(i).iter().map(|v| v.to_string()));
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes the entries of `m` that are nonzero under `tol`.
pub fn write_triplets(m: &SymMatrix, tol: ZeroTolerance, mut writer: impl Write) -> Result<()> {
    let p = m.dim();
    let max_abs = m.max_abs();
    writeln!(writer, "p={p} format=sym-triplet")?;
    for i in 0..p {
        for j in i..p {
            let v = m.get(i, j);
            if !tol.is_zero(v, max_abs) {
                writeln!(writer, "{i} {j} {v}")?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn read_triplets(reader: impl BufRead, role: Role) -> Result<SymMatrix> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::Parse { line: 1, reason: "empty triplet file".into() }),
    };
    let p = parse_header(header.trim()).ok_or_else(|| Error::Parse {
        line: 1,
        reason: format!("expected header `p=<p> format=sym-triplet`, found {header:?}"),
    })?;
    let mut m = DMatrix::zeros(p, p);
    for (k, line) in lines {
        let line = line?;
        let line_no = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Parse { line: line_no, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected `i j value`, found {line:?}")));
        }
        let i: usize = fields[0].parse().map_err(|_| bad(format!("bad row index {:?}", fields[0])))?;
        let j: usize = fields[1].parse().map_err(|_| bad(format!("bad column index {:?}", fields[1])))?;
        let v: f64 = fields[2].parse().map_err(|_| bad(format!("bad value {:?}", fields[2])))?;
        if i >= p || j >= p {
            return Err(bad(format!("index ({i}, {j}) out of range for p = {p}")));
        }
        if !v.is_finite() {
            return Err(bad(format!("non-finite value {v}")));
        }
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    SymMatrix::new(m, role)
}

fn parse_header(header: &str) -> Option<usize> {
    let mut fields = header.split_whitespace();
    let p = fields.next()?.strip_prefix("p=")?.parse().ok()?;
    (fields.next()? == "format=sym-triplet" && fields.next().is_none()).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let data = read_data_csv("a,b\n1,2.5\n-3,4e-3\n".as_bytes()).unwrap();
        assert_eq!(data.column_names().unwrap(), ["a", "b"]);
        assert_eq!(data.values()[(1, 1)], 4e-3);
        let data = read_data_csv("1,2\n3,4\n5,6\n".as_bytes()).unwrap();
        assert_eq!((data.n(), data.p()), (3, 2));
        assert!(data.column_names().is_none());
    }

    #[test]
    fn csv_rejects_ragged_and_garbage() {
        assert!(matches!(read_data_csv("1,2\n3\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_data_csv("1,2\n3,x\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_data_csv("1,2\n".as_bytes()), Err(Error::TooFewSamples(1))));
    }

    #[test]
    fn csv_output_reads_back_exactly() {
        let x = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -2e-300, 1e300, 7.0, std::f64::consts::PI]);
        let data = DataMatrix::new(x).unwrap().with_names(vec!["u".into(), "v".into(), "w".into()]).unwrap();
        let mut buf = Vec::new();
        write_data_csv(&data, &mut buf).unwrap();
        assert_eq!(read_data_csv(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn triplet_layout() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -0.5, 0.0, -0.5, 2.0, 0.25, 0.0, 0.25, 2.0]);
        let m = SymMatrix::new(m, Role::Precision).unwrap();
        let mut buf = Vec::new();
        write_triplets(&m, ZeroTolerance::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "p=3 format=sym-triplet\n0 0 2\n0 1 -0.5\n1 1 2\n1 2 0.25\n2 2 2\n");
        assert_eq!(read_triplets(text.as_bytes(), Role::Precision).unwrap(), m);
    }

    #[test]
    fn triplet_errors() {
        assert!(matches!(read_triplets("p=2\n".as_bytes(), Role::Precision), Err(Error::Parse { line: 1, .. })));
        let e = read_triplets("p=2 format=sym-triplet\n0 5 1.0\n".as_bytes(), Role::Precision);
        assert!(matches!(e, Err(Error::Parse { line: 2, .. })));
    }
}
