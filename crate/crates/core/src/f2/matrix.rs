//! Bit matrices over GF(2) and generating-matrix sets for digital nets.
//!
//! A matrix has `s` rows and `n` columns, `n <= 64`; each row is stored as a
//! u64 whose bit `c` is the entry in column `c`. Column `c` multiplies digit
//! `ν_c` of the index digit vector (least-significant digit first), and row
//! `a` (0-based) produces the output digit of weight 2^-(a+1).

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::util::fnv1a64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<u64>,
    cols: u32,
}

impl BitMatrix {
    /// `rows[a]` holds row `a` as a bitmask over `cols` columns. Zero columns
    /// are allowed (the n = 0 degenerate net); zero rows are not.
    pub fn from_rows(rows: Vec<u64>, cols: u32) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("matrix needs at least one row"));
        }
        if cols > 64 {
            return Err(Error::capacity(format!("{cols} columns exceed the 64-bit row storage")));
        }
        if cols < 64 {
            let mask = if cols == 0 { 0 } else { !0u64 >> (64 - cols) };
            if let Some(a) = rows.iter().position(|&r| r & !mask != 0) {
                return Err(Error::domain(format!("row {a} has bits beyond column {cols}")));
            }
        }
        Ok(BitMatrix { rows, cols })
    }

    pub fn identity(n: u32) -> Self {
        BitMatrix {
            rows: (0..n).map(|a| 1u64 << a).collect(),
            cols: n,
        }
    }

    /// Ones on the anti-diagonal: row a selects digit n-1-a.
    pub fn anti_diagonal(n: u32) -> Self {
        BitMatrix {
            rows: (0..n).map(|a| 1u64 << (n - 1 - a)).collect(),
            cols: n,
        }
    }

    pub fn rows(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    /// Row `a`, 0-based.
    pub fn row(&self, a: u32) -> u64 {
        self.rows[a as usize]
    }

    /// All rows as packed words, top to bottom.
    pub fn row_words(&self) -> &[u64] {
        &self.rows
    }

    /// Upper-left s×n block.
    pub fn truncate(&self, s: u32, n: u32) -> Result<Self> {
        if s == 0 || s > self.rows() || n > self.cols {
            return Err(Error::domain(format!(
                "cannot truncate {}x{} matrix to {}x{}",
                self.rows(),
                self.cols,
                s,
                n
            )));
        }
        let mask = if n == 0 { 0 } else { !0u64 >> (64 - n) };
        Ok(BitMatrix {
            rows: self.rows[..s as usize].iter().map(|r| r & mask).collect(),
            cols: n,
        })
    }
}

/// The d matrices defining one digital net; all share the same shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingMatrixSet {
    mats: Vec<BitMatrix>,
}

impl GeneratingMatrixSet {
    pub fn new(mats: Vec<BitMatrix>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::domain("matrix set needs at least one matrix"))?;
        let (s, n) = (first.rows(), first.cols());
        if mats.iter().any(|m| m.rows() != s || m.cols() != n) {
            return Err(Error::domain("matrices in a set must share one shape"));
        }
        if s < n {
            return Err(Error::domain(format!(
                "need at least as many rows as columns (s={s}, n={n})"
            )));
        }
        Ok(GeneratingMatrixSet { mats })
    }

    pub fn dimension(&self) -> usize {
        self.mats.len()
    }

    pub fn rows(&self) -> u32 {
        self.mats[0].rows()
    }

    pub fn cols(&self) -> u32 {
        self.mats[0].cols()
    }

    pub fn matrix(&self, i: usize) -> &BitMatrix {
        &self.mats[i]
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.mats
    }

    /// First `d` matrices, each truncated to its upper-left s×n block.
    pub fn truncate(&self, d: usize, s: u32, n: u32) -> Result<Self> {
        if d == 0 || d > self.dimension() {
            return Err(Error::domain(format!(
                "cannot take {d} of {} matrices",
                self.dimension()
            )));
        }
        let mats = self.mats[..d]
            .iter()
            .map(|m| m.truncate(s, n))
            .collect::<Result<_>>()?;
        GeneratingMatrixSet::new(mats)
    }

    /// Row-interleaves groups of `sigma` matrices: output row a·σ + r is row a
    /// of the r-th matrix in the group. Produces the generating matrices of
    /// the digit-interlaced net.
    pub fn interlace(&self, sigma: u32) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::domain("interlacing order must be at least 1"));
        }
        let sigma_us = sigma as usize;
        if self.dimension() % sigma_us != 0 {
            return Err(Error::domain(format!(
                "dimension {} not divisible by interlacing order {sigma}",
                self.dimension()
            )));
        }
        let s = self.rows();
        let mut out = Vec::with_capacity(self.dimension() / sigma_us);
        for group in self.mats.chunks(sigma_us) {
            let mut rows = Vec::with_capacity((s as usize) * sigma_us);
            for a in 0..s {
                for m in group {
                    rows.push(m.row(a));
                }
            }
            out.push(BitMatrix::from_rows(rows, self.cols())?);
        }
        GeneratingMatrixSet::new(out)
    }

    /// Canonical text form; also the checksum input, so two sets with equal
    /// entries hash identically regardless of file formatting.
    pub fn to_text(&self) -> String {
        let (d, s, n) = (self.dimension(), self.rows(), self.cols());
        let mut out = format!("{d} {s} {n}\n");
        for m in &self.mats {
            for a in 0..s {
                let row = m.row(a);
                for c in 0..n {
                    out.push(if row >> c & 1 == 1 { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn checksum(&self) -> u64 {
        fnv1a64(self.to_text().as_bytes())
    }

    /// Parses the matrix file format: a header line "d s n", then d blocks of
    /// s rows, each exactly n characters of '0'/'1'. Blank lines and lines
    /// starting with '#' are ignored. Errors carry 1-based line numbers.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let fail = |line: usize, msg: String| Error::Format {
            path: PathBuf::from(origin),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or_else(|| fail(1, "empty file, expected header \"d s n\"".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(fail(hline, format!("expected header \"d s n\", got \"{header}\"")));
        }
        let parse_num = |what: &str, v: &str| {
            v.parse::<u32>()
                .map_err(|_| fail(hline, format!("{what} is not a number: \"{v}\"")))
        };
        let d = parse_num("dimension d", fields[0])?;
        let s = parse_num("row count s", fields[1])?;
        let n = parse_num("column count n", fields[2])?;
        if d == 0 || s == 0 {
            return Err(fail(hline, format!("need d >= 1 and s >= 1, got d={d} s={s}")));
        }
        if n > 64 {
            return Err(fail(hline, format!("n={n} exceeds the 64-column limit")));
        }

        let mut mats = Vec::with_capacity(d as usize);
        let mut last_line = hline;
        for i in 0..d {
            let mut rows = Vec::with_capacity(s as usize);
            for a in 0..s {
                let (lno, row_text) = lines.next().ok_or_else(|| {
                    fail(
                        last_line,
                        format!("file ends inside matrix {} (row {} of {s} missing)", i + 1, a + 1),
                    )
                })?;
                last_line = lno;
                if row_text.len() != n as usize {
                    return Err(fail(
                        lno,
                        format!("row has {} characters, expected n={n}", row_text.len()),
                    ));
                }
                let mut bits = 0u64;
                for (c, ch) in row_text.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => bits |= 1u64 << c,
                        other => {
                            return Err(fail(lno, format!("invalid character '{other}' in row")))
                        }
                    }
                }
                rows.push(bits);
            }
            mats.push(BitMatrix::from_rows(rows, n).map_err(|e| fail(last_line, e.to_string()))?);
        }
        if let Some((lno, extra)) = lines.next() {
            return Err(fail(lno, format!("unexpected content after last matrix: \"{extra}\"")));
        }
        GeneratingMatrixSet::new(mats).map_err(|e| fail(hline, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
            path: PathBuf::from(path),
            line: 0,
            msg: format!("cannot read file: {e}"),
        })?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rows_are_unit_vectors() {
        let m = BitMatrix::identity(3);
        assert_eq!((m.rows(), m.cols()), (3, 3));
        assert_eq!([m.row(0), m.row(1), m.row(2)], [1, 2, 4]);
    }

    #[test]
    fn rejects_out_of_range_bits() {
        assert!(BitMatrix::from_rows(vec![0b100], 2).is_err());
        assert!(BitMatrix::from_rows(vec![], 2).is_err());
    }

    #[test]
    fn set_enforces_shared_shape_and_s_ge_n() {
        let a = BitMatrix::identity(2);
        let b = BitMatrix::identity(3);
        assert!(GeneratingMatrixSet::new(vec![a.clone(), b]).is_err());
        let wide = BitMatrix::from_rows(vec![0b11], 2).unwrap();
        assert!(GeneratingMatrixSet::new(vec![wide]).is_err());
        assert!(GeneratingMatrixSet::new(vec![a]).is_ok());
    }

    #[test]
    fn parse_round_trips_text() {
        let set = GeneratingMatrixSet::new(vec![
            BitMatrix::identity(3),
            BitMatrix::anti_diagonal(3),
        ])
        .unwrap();
        let text = set.to_text();
        let back = GeneratingMatrixSet::parse(&text, Path::new("mem")).unwrap();
        assert_eq!(set, back);
        assert_eq!(set.checksum(), back.checksum());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let bad = "2 2 2\n10\n01\n10\n0x\n";
        let err = GeneratingMatrixSet::parse(bad, Path::new("f.txt")).unwrap_err();
        assert!(err.to_string().contains("f.txt:5"), "{err}");

        let short = "1 2 2\n10\n";
        let err = GeneratingMatrixSet::parse(short, Path::new("f.txt")).unwrap_err();
        assert!(err.to_string().contains("row 2 of 2 missing"), "{err}");

        let wide = "1 1 2\n101\n";
        let err = GeneratingMatrixSet::parse(wide, Path::new("f.txt")).unwrap_err();
        assert!(err.to_string().contains("f.txt:2"), "{err}");
    }

    #[test]
    fn parse_allows_comments_and_blanks() {
        let text = "# generated\n\n1 2 2\n# block 1\n10\n01\n";
        let set = GeneratingMatrixSet::parse(text, Path::new("mem")).unwrap();
        assert_eq!(set.dimension(), 1);
        assert_eq!(set.matrix(0), &BitMatrix::identity(2));
    }

    #[test]
    fn interlace_interleaves_rows() {
        let set = GeneratingMatrixSet::new(vec![
            BitMatrix::identity(2),
            BitMatrix::anti_diagonal(2),
        ])
        .unwrap();
        let inter = set.interlace(2).unwrap();
        assert_eq!(inter.dimension(), 1);
        assert_eq!((inter.rows(), inter.cols()), (4, 2));
        let m = inter.matrix(0);
        // rows alternate: id row 0, anti row 0, id row 1, anti row 1
        assert_eq!([m.row(0), m.row(1), m.row(2), m.row(3)], [1, 2, 2, 1]);
    }
}
