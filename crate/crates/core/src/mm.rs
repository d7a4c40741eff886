//! Matrix Market reader/writer for dense matrices and vectors.
//!
//! Array files carry the `%%MatrixMarket matrix array real general` header
//! with values in column-major order; coordinate files carry 1-based
//! `i j value` triplets. Values are written with 17 significant digits so a
//! round trip is bit exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Vector};

const ARRAY_HEADER: &str = "%%MatrixMarket matrix array real general";
const COORDINATE_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Writes a dense matrix in array format (column-major values).
pub fn write_matrix_array<W: Write>(w: &mut W, a: &DenseMatrix) -> Result<()> {
    writeln!(w, "{ARRAY_HEADER}")?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            writeln!(w, "{:.16e}", a[(i, j)])?;
        }
    }
    Ok(())
}

/// Writes a dense matrix in coordinate format (column-major triplet order,
/// exact zeros omitted).
pub fn write_matrix_coordinate<W: Write>(w: &mut W, a: &DenseMatrix) -> Result<()> {
    let mut nnz = 0usize;
    for &v in a.data() {
        if v != 0.0 {
            nnz += 1;
        }
    }
    writeln!(w, "{COORDINATE_HEADER}")?;
    writeln!(w, "{} {} {}", a.rows(), a.cols(), nnz)?;
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let v = a[(i, j)];
            if v != 0.0 {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

/// Writes a vector as an n x 1 array-format matrix.
pub fn write_vector<W: Write>(w: &mut W, v: &Vector) -> Result<()> {
    writeln!(w, "{ARRAY_HEADER}")?;
    writeln!(w, "{} 1", v.len())?;
    for &x in v.iter() {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

pub fn write_matrix_file<P: AsRef<Path>>(path: P, a: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_array(&mut w, a)
}

pub fn write_matrix_coordinate_file<P: AsRef<Path>>(path: P, a: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_coordinate(&mut w, a)
}

pub fn write_vector_file<P: AsRef<Path>>(path: P, v: &Vector) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(&mut w, v)
}

enum Format {
    Array,
    Coordinate,
}

struct Parser<R> {
    lines: std::io::Lines<BufReader<R>>,
    line_no: usize,
}

impl<R: Read> Parser<R> {
    fn new(r: R) -> Self {
        Parser {
            lines: BufReader::new(r).lines(),
            line_no: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line_no,
            msg: msg.into(),
        }
    }

    /// Next non-empty, non-comment line. The header line is handled separately.
    fn next_content_line(&mut self) -> Result<Option<String>> {
        loop {
            match self.lines.next() {
                None => return Ok(None),
                Some(line) => {
                    self.line_no += 1;
                    let line = line?;
                    let trimmed = line.trim();
                    if trimmed.is_empty() || trimmed.starts_with('%') {
                        continue;
                    }
                    return Ok(Some(trimmed.to_string()));
                }
            }
        }
    }

    fn parse_header(&mut self) -> Result<Format> {
        let line = match self.lines.next() {
            None => return Err(self.err("empty file")),
            Some(line) => {
                self.line_no += 1;
                line?
            }
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
            return Err(self.err("expected a '%%MatrixMarket matrix ...' header"));
        }
        let format = match fields[2] {
            "array" => Format::Array,
            "coordinate" => Format::Coordinate,
            other => return Err(self.err(format!("unsupported format '{other}'"))),
        };
        match fields[3] {
            "real" | "integer" => {}
            other => return Err(self.err(format!("unsupported field '{other}'"))),
        }
        if fields[4] != "general" {
            return Err(self.err(format!("unsupported symmetry '{}'", fields[4])));
        }
        Ok(format)
    }

    fn parse_f64(&self, tok: &str) -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|_| self.err(format!("invalid number '{tok}'")))
    }

    fn parse_usize(&self, tok: &str) -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| self.err(format!("invalid integer '{tok}'")))
    }
}

/// Reads a dense matrix from either array or coordinate format.
pub fn read_matrix<R: Read>(r: R) -> Result<DenseMatrix> {
    let mut p = Parser::new(r);
    let format = p.parse_header()?;
    let size_line = p
        .next_content_line()?
        .ok_or_else(|| p.err("missing size line"))?;
    let fields: Vec<&str> = size_line.split_whitespace().collect();
    match format {
        Format::Array => {
            if fields.len() != 2 {
                return Err(p.err("array size line must be 'rows cols'"));
            }
            let rows = p.parse_usize(fields[0])?;
            let cols = p.parse_usize(fields[1])?;
            let mut values = Vec::with_capacity(rows * cols);
            while values.len() < rows * cols {
                let line = p
                    .next_content_line()?
                    .ok_or_else(|| p.err("unexpected end of file"))?;
                for tok in line.split_whitespace() {
                    values.push(p.parse_f64(tok)?);
                }
            }
            if values.len() != rows * cols {
                return Err(p.err(format!(
                    "expected {} values, found {}",
                    rows * cols,
                    values.len()
                )));
            }
            // values arrive column-major
            let mut data = vec![0.0; rows * cols];
            for (idx, v) in values.into_iter().enumerate() {
                let j = idx / rows;
                let i = idx % rows;
                data[i * cols + j] = v;
            }
            DenseMatrix::checked_from_vec(rows, cols, data, "matrix market array")
        }
        Format::Coordinate => {
            if fields.len() != 3 {
                return Err(p.err("coordinate size line must be 'rows cols nnz'"));
            }
            let rows = p.parse_usize(fields[0])?;
            let cols = p.parse_usize(fields[1])?;
            let nnz = p.parse_usize(fields[2])?;
            let mut data = vec![0.0; rows * cols];
            for _ in 0..nnz {
                let line = p
                    .next_content_line()?
                    .ok_or_else(|| p.err("unexpected end of file"))?;
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(p.err("coordinate entry must be 'i j value'"));
                }
                let i = p.parse_usize(toks[0])?;
                let j = p.parse_usize(toks[1])?;
                let v = p.parse_f64(toks[2])?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(p.err(format!("index ({i}, {j}) out of bounds")));
                }
                // duplicates assemble additively
                data[(i - 1) * cols + (j - 1)] += v;
            }
            DenseMatrix::checked_from_vec(rows, cols, data, "matrix market coordinate")
        }
    }
}

/// Reads a vector: any single-column (or single-row) Matrix Market file.
pub fn read_vector<R: Read>(r: R) -> Result<Vector> {
    let m = read_matrix(r)?;
    if m.cols() == 1 {
        Ok(Vector::from_vec((0..m.rows()).map(|i| m[(i, 0)]).collect()))
    } else if m.rows() == 1 {
        Ok(Vector::from_vec(m.row(0).to_vec()))
    } else {
        Err(Error::ShapeMismatch {
            expected: "a single-column or single-row matrix".to_string(),
            got: format!("{}x{}", m.rows(), m.cols()),
        })
    }
}

pub fn read_matrix_file<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    read_matrix(File::open(path)?)
}

pub fn read_vector_file<P: AsRef<Path>>(path: P) -> Result<Vector> {
    read_vector(File::open(path)?)
}
