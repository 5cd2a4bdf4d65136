//! The alignment solution `(V1, A, B, C)`.
//!
//! `V1` must satisfy `T V1 C = V1 B A` where `T` is diagonal with entries
//! `eta(x^k)`. Row `k` of any such `V1` is `r(eta(x^k))` for a polynomial row
//! vector `r(z)` in the left kernel of `zC - BA`, found here with Cramer's
//! rule on an invertible `n x n` minor. In characteristic 2 every sign in
//! that construction is `+`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrecodeError {
    #[error("{which} has rank {rank}, expected {expected}")]
    RankDeficient {
        which: &'static str,
        rank: usize,
        expected: usize,
    },
    #[error("{which} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape {
        which: &'static str,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("zC - BA has no invertible {0}x{0} minor")]
    NoInvertibleMinor(usize),
    #[error("internal error: kernel vector fails r(z)(zC - BA) = 0")]
    VerificationFailed,
    #[error("expected {expected} eta values, got {got}")]
    EtaCount { expected: usize, got: usize },
}

/// Univariate polynomial in `z` over GF(2^m); `coeffs[k]` multiplies `z^k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZPoly {
    field: Field,
    coeffs: Vec<FieldElement>,
}

impl ZPoly {
    pub fn new(field: Field, mut coeffs: Vec<FieldElement>) -> ZPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { field, coeffs }
    }

    pub fn zero(field: Field) -> ZPoly {
        ZPoly::new(field, Vec::new())
    }

    pub fn constant(field: Field, c: FieldElement) -> ZPoly {
        ZPoly::new(field, vec![c])
    }

    /// `a z + b`
    pub fn linear(field: Field, a: FieldElement, b: FieldElement) -> ZPoly {
        ZPoly::new(field, vec![b, a])
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let at = |p: &ZPoly, k: usize| p.coeffs.get(k).copied().unwrap_or(FieldElement::ZERO);
        ZPoly::new(
            self.field,
            (0..len).map(|k| at(self, k) + at(other, k)).collect(),
        )
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() || other.is_zero() {
            return ZPoly::zero(self.field);
        }
        let f = self.field;
        let mut out = vec![FieldElement::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += f.mul(a, b);
            }
        }
        ZPoly::new(f, out)
    }

    pub fn eval(&self, z: FieldElement) -> FieldElement {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| self.field.mul(acc, z) + c)
    }
}

impl fmt::Debug for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => c.to_string(),
                1 => format!("{c}*z"),
                _ => format!("{c}*z^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn poly_det(field: Field, m: &[Vec<ZPoly>]) -> ZPoly {
    let n = m.len();
    match n {
        0 => ZPoly::constant(field, FieldElement::ONE),
        1 => m[0][0].clone(),
        _ => {
            let mut det = ZPoly::zero(field);
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<ZPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != col)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                det = det.add(&m[0][col].mul(&poly_det(field, &minor)));
            }
            det
        }
    }
}

/// `A = I_n`, `B` = right `n` columns of `I_{n+1}`, `C` = left `n` columns.
pub fn canonical_abc(n: usize) -> (Matrix, Matrix, Matrix) {
    let id = Matrix::identity(n + 1);
    (Matrix::identity(n), id.columns(1..n + 1), id.columns(0..n))
}

fn check_shape(
    which: &'static str,
    m: &Matrix,
    rows: usize,
    cols: usize,
) -> Result<(), PrecodeError> {
    if (m.rows(), m.cols()) != (rows, cols) {
        return Err(PrecodeError::Shape {
            which,
            rows: m.rows(),
            cols: m.cols(),
            expected_rows: rows,
            expected_cols: cols,
        });
    }
    Ok(())
}

fn check_rank(
    field: &Field,
    which: &'static str,
    m: &Matrix,
    expected: usize,
) -> Result<(), PrecodeError> {
    let rank = m.rank(field);
    if rank != expected {
        return Err(PrecodeError::RankDeficient {
            which,
            rank,
            expected,
        });
    }
    Ok(())
}

/// The `(n+1) x n` polynomial matrix `zC - BA`.
pub fn pencil(field: Field, a: &Matrix, b: &Matrix, c: &Matrix) -> Vec<Vec<ZPoly>> {
    let ba = b.mul(&field, a);
    (0..c.rows())
        .map(|r| {
            (0..c.cols())
                .map(|k| ZPoly::linear(field, c.get(r, k), ba.get(r, k)))
                .collect()
        })
        .collect()
}

/// A nonzero `r(z)` with `r(z)(zC - BA) = 0`, verified before it is returned.
pub fn solve_alignment_kernel(
    field: Field,
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    n: usize,
) -> Result<Vec<ZPoly>, PrecodeError> {
    check_shape("A", a, n, n)?;
    check_shape("B", b, n + 1, n)?;
    check_shape("C", c, n + 1, n)?;
    check_rank(&field, "A", a, n)?;
    check_rank(&field, "B", b, n)?;
    check_rank(&field, "C", c, n)?;

    let m = pencil(field, a, b, c);
    // Lexicographic order of n-row subsets omits the last row first.
    for omitted in (0..=n).rev() {
        let rows: Vec<usize> = (0..=n).filter(|&r| r != omitted).collect();
        let e: Vec<Vec<ZPoly>> = rows.iter().map(|&r| m[r].clone()).collect();
        let det_e = poly_det(field, &e);
        if det_e.is_zero() {
            continue;
        }
        let mut r = vec![ZPoly::zero(field); n + 1];
        r[omitted] = det_e;
        for (k, &row) in rows.iter().enumerate() {
            let mut ek = e.clone();
            ek[k] = m[omitted].clone();
            r[row] = poly_det(field, &ek);
        }
        if !kernel_holds(field, &r, &m) {
            return Err(PrecodeError::VerificationFailed);
        }
        return Ok(r);
    }
    Err(PrecodeError::NoInvertibleMinor(n))
}

/// Whether `r(z) M(z) = 0` identically.
pub fn kernel_holds(field: Field, r: &[ZPoly], m: &[Vec<ZPoly>]) -> bool {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).all(|k| {
        r.iter()
            .zip(m)
            .fold(ZPoly::zero(field), |acc, (ri, row)| {
                acc.add(&ri.mul(&row[k]))
            })
            .is_zero()
    })
}

/// Exact cross-product test for proportionality of two polynomial vectors.
pub fn proportional(u: &[ZPoly], v: &[ZPoly]) -> bool {
    u.len() == v.len()
        && u.iter().any(|p| !p.is_zero())
        && v.iter().any(|p| !p.is_zero())
        && (0..u.len()).all(|i| (0..u.len()).all(|j| u[i].mul(&v[j]) == u[j].mul(&v[i])))
}

/// Row `k` is `(1, e_k, e_k^2, ..., e_k^n)`.
pub fn build_v1_star(
    field: &Field,
    eta_values: &[FieldElement],
    n: usize,
) -> Result<Matrix, PrecodeError> {
    if eta_values.len() != 2 * n + 1 {
        return Err(PrecodeError::EtaCount {
            expected: 2 * n + 1,
            got: eta_values.len(),
        });
    }
    Ok(Matrix::from_fn(eta_values.len(), n + 1, |k, j| {
        field.pow(eta_values[k], j as u64)
    }))
}

/// Row `k` is `r(e_k)`.
pub fn build_v1_from_kernel(
    r: &[ZPoly],
    eta_values: &[FieldElement],
) -> Result<Matrix, PrecodeError> {
    let n = r.len().saturating_sub(1);
    if eta_values.len() != 2 * n + 1 {
        return Err(PrecodeError::EtaCount {
            expected: 2 * n + 1,
            got: eta_values.len(),
        });
    }
    Ok(Matrix::from_fn(eta_values.len(), r.len(), |k, j| {
        r[j].eval(eta_values[k])
    }))
}

/// A complete alignment solution together with the `eta` values it was built for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct PrecodingSet {
    pub n: usize,
    pub v1: Matrix,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub eta_values: Vec<FieldElement>,
}

impl PrecodingSet {
    /// `V1*` with the canonical `A`, `B`, `C`.
    pub fn canonical(
        field: &Field,
        eta_values: &[FieldElement],
        n: usize,
    ) -> Result<PrecodingSet, PrecodeError> {
        let v1 = build_v1_star(field, eta_values, n)?;
        let (a, b, c) = canonical_abc(n);
        Ok(PrecodingSet {
            n,
            v1,
            a,
            b,
            c,
            eta_values: eta_values.to_vec(),
        })
    }

    /// `diag(eta) V1 C = V1 B A`, exactly.
    pub fn alignment_holds(&self, field: &Field) -> bool {
        let lhs = Matrix::diag(&self.eta_values)
            .mul(field, &self.v1)
            .mul(field, &self.c);
        let rhs = self.v1.mul(field, &self.b).mul(field, &self.a);
        lhs == rhs
    }
}
