//! Dense MatrixMarket reader and writer for `real` matrices in `coordinate`
//! or `array` layout with `general` or `symmetric` symmetry.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
    path: std::path::PathBuf,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next_raw(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(Ok(l)) => {
                self.line += 1;
                Ok(Some(l))
            }
            Some(Err(source)) => Err(Error::Io {
                path: self.path.clone(),
                source,
            }),
        }
    }

    /// Next line that is neither blank nor a `%` comment.
    fn next_data(&mut self) -> Result<Option<String>> {
        while let Some(l) = self.next_raw()? {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Ok(Some(t.to_string()));
            }
        }
        Ok(None)
    }

    fn expect_data(&mut self, what: &str) -> Result<String> {
        self.next_data()?
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))
    }
}

fn parse_fields<T: std::str::FromStr, R: BufRead>(
    lines: &Lines<R>,
    text: &str,
    count: usize,
    what: &str,
) -> Result<Vec<T>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(lines.err(format!("expected {count} fields for {what}, found {}", fields.len())));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<T>()
                .map_err(|_| lines.err(format!("cannot parse {f:?} in {what}")))
        })
        .collect()
}

pub fn load_matrixmarket(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrixmarket(BufReader::new(file), path)
}

/// Parses MatrixMarket text; `path` is used only in error messages.
pub fn read_matrixmarket<R: BufRead>(reader: R, path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
        path: path.as_ref().to_path_buf(),
    };
    let header = lines
        .next_raw()?
        .ok_or_else(|| lines.err("empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(lines.err("header must read '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(lines.err(format!("unsupported format {other:?}"))),
    };
    if tokens[3] != "real" {
        return Err(lines.err(format!("unsupported field {:?}; only real is read", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(lines.err(format!("unsupported symmetry {other:?}"))),
    };

    let size = lines.expect_data("size line")?;
    match format {
        MmFormat::Coordinate => {
            let s: Vec<usize> = parse_fields(&lines, &size, 3, "size line")?;
            let (m, n, nnz) = (s[0], s[1], s[2]);
            if symmetry == Symmetry::Symmetric && m != n {
                return Err(lines.err("symmetric matrix must be square"));
            }
            let mut a = DenseMatrix::zeros(m, n);
            for _ in 0..nnz {
                let entry = lines.expect_data("coordinate entry")?;
                let fields: Vec<&str> = entry.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(lines.err(format!("expected 'row col value', found {} fields", fields.len())));
                }
                let idx: Vec<usize> = parse_fields(&lines, &fields[..2].join(" "), 2, "entry index")?;
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| lines.err(format!("cannot parse value {:?}", fields[2])))?;
                let (i, j) = (idx[0], idx[1]);
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(lines.err(format!("index ({i}, {j}) outside {m}x{n} (1-based)")));
                }
                if symmetry == Symmetry::Symmetric && i < j {
                    return Err(lines.err("symmetric storage lists the lower triangle only"));
                }
                a[(i - 1, j - 1)] += v;
                if symmetry == Symmetry::Symmetric && i != j {
                    a[(j - 1, i - 1)] += v;
                }
            }
            if lines.next_data()?.is_some() {
                return Err(lines.err(format!("more than the declared {nnz} entries")));
            }
            Ok(a)
        }
        MmFormat::Array => {
            let s: Vec<usize> = parse_fields(&lines, &size, 2, "size line")?;
            let (m, n) = (s[0], s[1]);
            if symmetry == Symmetry::Symmetric && m != n {
                return Err(lines.err("symmetric matrix must be square"));
            }
            let mut a = DenseMatrix::zeros(m, n);
            for j in 0..n {
                let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
                for i in start..m {
                    let t = lines.expect_data("array value")?;
                    let v: Vec<f64> = parse_fields(&lines, &t, 1, "array value")?;
                    a[(i, j)] = v[0];
                    if symmetry == Symmetry::Symmetric {
                        a[(j, i)] = v[0];
                    }
                }
            }
            if lines.next_data()?.is_some() {
                return Err(lines.err("more values than the declared size"));
            }
            Ok(a)
        }
    }
}

pub fn write_matrixmarket(path: impl AsRef<Path>, a: &DenseMatrix, format: MmFormat) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_matrixmarket_to(&mut w, a, format).map_err(io)?;
    w.flush().map_err(io)
}

/// Writes `general` storage. Values use Rust's shortest round-trip float
/// formatting, so load(write(A)) == A bit for bit.
pub fn write_matrixmarket_to<W: Write>(w: &mut W, a: &DenseMatrix, format: MmFormat) -> std::io::Result<()> {
    let (m, n) = a.shape();
    match format {
        MmFormat::Coordinate => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            let nnz = a.iter().filter(|&&v| v != 0.0).count();
            writeln!(w, "{m} {n} {nnz}")?;
            for j in 0..n {
                for i in 0..m {
                    let v = a[(i, j)];
                    if v != 0.0 {
                        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
                    }
                }
            }
        }
        MmFormat::Array => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{m} {n}")?;
            for v in a.iter() {
                writeln!(w, "{v:e}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn parse(text: &str) -> Result<DenseMatrix> {
        read_matrixmarket(text.as_bytes(), "inline.mtx")
    }

    #[test]
    fn coordinate_identity() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 1.0\n").unwrap();
        assert_eq!(a, DenseMatrix::identity(2, 2));
    }

    #[test]
    fn array_is_column_major() {
        let a = parse("%%MatrixMarket matrix array real general\n3 2\n1\n2\n3\n4\n5\n6\n").unwrap();
        assert_eq!(a, dmatrix![1.0, 4.0; 2.0, 5.0; 3.0, 6.0]);
    }

    #[test]
    fn symmetric_storage_is_expanded() {
        let a = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 -1\n").unwrap();
        assert_eq!(a, dmatrix![4.0, -1.0; -1.0, 0.0]);
        let a = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(a, dmatrix![1.0, 2.0; 2.0, 3.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        match parse("%%MatrixMarket matrix array real general\n2 2\n1\nx\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("{e}"),
        }
        assert!(parse("%%MatrixMarket matrix coordinate complex general\n1 1 0\n").is_err());
        assert!(parse("not a header\n").is_err());
        assert!(parse("%%MatrixMarket matrix array real general\n2 1\n1\n").is_err());
    }

    #[test]
    fn writer_round_trips_bits() {
        let a = dmatrix![0.1, -3.0e-300; 0.0, std::f64::consts::PI; 1e300, -0.0];
        for format in [MmFormat::Coordinate, MmFormat::Array] {
            let mut buf = Vec::new();
            write_matrixmarket_to(&mut buf, &a, format).unwrap();
            let b = read_matrixmarket(buf.as_slice(), "mem").unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                if *x == 0.0 {
                    assert_eq!(*y, 0.0);
                } else {
                    assert_eq!(x.to_bits(), y.to_bits(), "{x} vs {y}");
                }
            }
        }
    }
}
