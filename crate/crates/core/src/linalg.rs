//! Dense matrices over GF(2^m) and Gaussian elimination.

use schemars::gen::SchemaGenerator;
use schemars::schema::Schema;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("decode failure: system of rank {rank} in {unknowns} unknowns has no unique solution")]
    DecodeFailure { rank: usize, unknowns: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-major matrix. Serialized as a list of rows of hex elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<FieldElement>>", try_from = "Vec<Vec<FieldElement>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl JsonSchema for Matrix {
    fn schema_name() -> String {
        "Matrix".to_string()
    }

    fn json_schema(gen: &mut SchemaGenerator) -> Schema {
        <Vec<Vec<FieldElement>>>::json_schema(gen)
    }
}

impl From<Matrix> for Vec<Vec<FieldElement>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<FieldElement>>> for Matrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<FieldElement>>) -> Result<Self, String> {
        Matrix::from_rows(rows).map_err(|e| e.to_string())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix::diag(&vec![FieldElement::ONE; n])
    }

    pub fn diag(values: &[FieldElement]) -> Matrix {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (k, &v) in values.iter().enumerate() {
            m.set(k, k, v);
        }
        m
    }

    /// Builds a matrix from rows; a matrix with zero rows has zero columns.
    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Matrix, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Matrix {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElement>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] += f.mul(a, other.get(k, c));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, f: &Field, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| f.mul(a, b)).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// `[self | other]`
    pub fn hcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hcat needs equal row counts");
        Matrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                other.get(r, c - self.cols)
            }
        })
    }

    pub fn columns(&self, range: std::ops::Range<usize>) -> Matrix {
        Matrix::from_fn(self.rows, range.len(), |r, c| self.get(r, range.start + c))
    }

    pub fn rank(&self, f: &Field) -> usize {
        rank_and_solve(f, self, None).map_or(0, |(rank, _)| rank)
    }

    pub fn inverse(&self, f: &Field) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Dimension(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut aug = self.hcat(&Matrix::identity(n));
        let rank = eliminate(f, &mut aug, n);
        if rank < n {
            return Err(LinalgError::DecodeFailure { rank, unknowns: n });
        }
        Ok(aug.columns(n..2 * n))
    }
}

/// Reduced row echelon form on the first `pivot_cols` columns, in place.
/// Returns the rank of that left block.
fn eliminate(f: &Field, m: &mut Matrix, pivot_cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..pivot_cols {
        let Some(p) = (rank..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
            continue;
        };
        if p != rank {
            for k in 0..m.cols {
                m.data.swap(p * m.cols + k, rank * m.cols + k);
            }
        }
        let inv = f.inv(m.get(rank, c)).expect("pivot is nonzero");
        for k in 0..m.cols {
            let v = m.get(rank, k);
            m.set(rank, k, f.mul(v, inv));
        }
        for r in 0..m.rows {
            let factor = m.get(r, c);
            if r == rank || factor.is_zero() {
                continue;
            }
            for k in 0..m.cols {
                let v = m.get(r, k) + f.mul(factor, m.get(rank, k));
                m.set(r, k, v);
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of `m`, and when `b` is given the unique solution of `m x = b`.
pub fn rank_and_solve(
    f: &Field,
    m: &Matrix,
    b: Option<&[FieldElement]>,
) -> Result<(usize, Option<Vec<FieldElement>>), LinalgError> {
    let Some(b) = b else {
        let mut work = m.clone();
        return Ok((eliminate(f, &mut work, m.cols), None));
    };
    if b.len() != m.rows {
        return Err(LinalgError::Dimension(format!(
            "right-hand side has length {} for {} rows",
            b.len(),
            m.rows
        )));
    }
    let rhs = Matrix::from_fn(m.rows, 1, |r, _| b[r]);
    let mut aug = m.hcat(&rhs);
    let rank = eliminate(f, &mut aug, m.cols);
    let consistent = (rank..m.rows).all(|r| aug.get(r, m.cols).is_zero());
    if rank < m.cols || !consistent {
        return Err(LinalgError::DecodeFailure {
            rank,
            unknowns: m.cols,
        });
    }
    // Pivots sit on the diagonal when the column rank is full.
    Ok((
        rank,
        Some((0..m.cols).map(|r| aug.get(r, m.cols)).collect()),
    ))
}
