//! Square matrices over GF(q).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{Field, Fq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrices are over different fields")]
    FieldMismatch,
}

/// A square matrix, stored row-major.
#[derive(Clone)]
pub struct Matrix {
    field: Arc<Field>,
    dim: usize,
    data: Vec<Fq>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.data == other.data
            && (Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field)
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix over GF({}) [", self.field.q())?;
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zero(field: &Arc<Field>, dim: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            dim,
            data: vec![Fq::ZERO; dim * dim],
        }
    }

    pub fn identity(field: &Arc<Field>, dim: usize) -> Matrix {
        let mut m = Matrix::zero(field, dim);
        for i in 0..dim {
            m.data[i * dim + i] = Fq::ONE;
        }
        m
    }

    pub fn diagonal(field: &Arc<Field>, diag: &[Fq]) -> Matrix {
        let mut m = Matrix::zero(field, diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn from_rows(field: &Arc<Field>, rows: Vec<Vec<Fq>>) -> Result<Matrix, MatrixError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MatrixError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Matrix {
            field: field.clone(),
            dim,
            data,
        })
    }

    /// Builds a matrix from canonical integer encodings.
    pub fn from_ints(field: &Arc<Field>, rows: &[&[u32]]) -> Matrix {
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| field.elem(v as u64).expect("entry out of range"))
                    .collect()
            })
            .collect();
        Matrix::from_rows(field, rows).expect("square input")
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fq) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn set_row(&mut self, i: usize, row: &[Fq]) {
        assert_eq!(row.len(), self.dim);
        self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(row);
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| self.get(i, j) == if i == j { Fq::ONE } else { Fq::ZERO })
        })
    }

    fn check_compatible(&self, other: &Matrix) -> Result<(), MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if !Arc::ptr_eq(&self.field, &other.field) && *self.field != *other.field {
            return Err(MatrixError::FieldMismatch);
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_compatible(other)?;
        let d = self.dim;
        let f = &*self.field;
        let mut data = vec![Fq::ZERO; d * d];
        if f.k() == 1 {
            let p = f.p() as u64;
            for i in 0..d {
                let a = &self.data[i * d..(i + 1) * d];
                for j in 0..d {
                    let mut acc = 0u64;
                    for (l, x) in a.iter().enumerate() {
                        acc += x.value() as u64 * other.data[l * d + j].value() as u64;
                    }
                    data[i * d + j] = f.from_int((acc % p) as i64);
                }
            }
        } else {
            for i in 0..d {
                for l in 0..d {
                    let a = self.data[i * d + l];
                    if a.is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        let cell = &mut data[i * d + j];
                        *cell = f.add(*cell, f.mul(a, other.data[l * d + j]));
                    }
                }
            }
        }
        Ok(Matrix {
            field: self.field.clone(),
            dim: d,
            data,
        })
    }

    /// Product `self · other`. Panics on incompatible operands.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        self.try_mul(other).expect("incompatible matrices")
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zero(&self.field, d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, c: Fq) -> Matrix {
        let f = &self.field;
        Matrix {
            field: f.clone(),
            dim: self.dim,
            data: self.data.iter().map(|&x| f.mul(c, x)).collect(),
        }
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let d = self.dim;
        let f = &*self.field;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(&self.field, d).data;
        for c in 0..d {
            let pivot = (c..d).find(|&r| !a[r * d + c].is_zero()).ok_or(MatrixError::Singular)?;
            if pivot != c {
                for j in 0..d {
                    a.swap(pivot * d + j, c * d + j);
                    inv.swap(pivot * d + j, c * d + j);
                }
            }
            let scale = f.inv(a[c * d + c]).expect("pivot is nonzero");
            for j in 0..d {
                a[c * d + j] = f.mul(a[c * d + j], scale);
                inv[c * d + j] = f.mul(inv[c * d + j], scale);
            }
            for r in 0..d {
                let factor = a[r * d + c];
                if r == c || factor.is_zero() {
                    continue;
                }
                for j in 0..d {
                    a[r * d + j] = f.sub(a[r * d + j], f.mul(factor, a[c * d + j]));
                    inv[r * d + j] = f.sub(inv[r * d + j], f.mul(factor, inv[c * d + j]));
                }
            }
        }
        Ok(Matrix {
            field: self.field.clone(),
            dim: d,
            data: inv,
        })
    }

    pub fn det(&self) -> Fq {
        let d = self.dim;
        let f = &*self.field;
        let mut a = self.data.clone();
        let mut det = Fq::ONE;
        for c in 0..d {
            let Some(pivot) = (c..d).find(|&r| !a[r * d + c].is_zero()) else {
                return Fq::ZERO;
            };
            if pivot != c {
                for j in 0..d {
                    a.swap(pivot * d + j, c * d + j);
                }
                det = f.neg(det);
            }
            let pv = a[c * d + c];
            det = f.mul(det, pv);
            let pinv = f.inv(pv).expect("pivot is nonzero");
            for r in c + 1..d {
                let factor = f.mul(a[r * d + c], pinv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..d {
                    a[r * d + j] = f.sub(a[r * d + j], f.mul(factor, a[c * d + j]));
                }
            }
        }
        det
    }

    /// The square block with rows and columns `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> Matrix {
        let mut out = Matrix::zero(&self.field, len);
        for i in 0..len {
            for j in 0..len {
                out.set(i, j, self.get(start + i, start + j));
            }
        }
        out
    }

    /// Identity of dimension `dim` with `inner` written at `(start, start)`.
    pub fn embed(inner: &Matrix, dim: usize, start: usize) -> Matrix {
        let mut out = Matrix::identity(&inner.field, dim);
        for i in 0..inner.dim {
            for j in 0..inner.dim {
                out.set(start + i, start + j, inner.get(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det_over_extension_field() {
        let f = Field::new(3, 2, None).unwrap();
        let m = Matrix::from_ints(&f, &[&[1, 4, 0], &[2, 7, 5], &[0, 3, 8]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert!(inv.mul(&m).is_identity());
        assert!(!m.det().is_zero());
        let singular = Matrix::from_ints(&f, &[&[1, 2], &[1, 2]]);
        assert_eq!(singular.inverse(), Err(MatrixError::Singular));
        assert_eq!(singular.det(), Fq::ZERO);
    }

    #[test]
    fn mixed_dims_are_rejected() {
        let f = Field::prime(5).unwrap();
        let a = Matrix::identity(&f, 2);
        let b = Matrix::identity(&f, 4);
        assert!(matches!(a.try_mul(&b), Err(MatrixError::DimensionMismatch { .. })));
        let g = Field::prime(7).unwrap();
        assert_eq!(a.try_mul(&Matrix::identity(&g, 2)), Err(MatrixError::FieldMismatch));
    }
}
