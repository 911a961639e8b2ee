//! Dense matrices and vectors over a [`Field`].

use std::fmt;

use thiserror::Error;

use crate::gf::{Field, FieldError};

/// Largest dimension accepted by [`all_submatrices_invertible`].
pub const SUBMATRIX_CHECK_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: String, right: String },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid Cauchy sequences: {0}")]
    InvalidSequence(String),
    #[error("submatrix check supports at most {SUBMATRIX_CHECK_CAP} rows/cols, got {rows}x{cols}")]
    TooLarge { rows: usize, cols: usize },
    #[error("eigen search supports at most 3x3 matrices, got {0}x{0}")]
    EigenTooLarge(usize),
    #[error("blocks are ragged: {0}")]
    Ragged(String),
    #[error("invalid matrix literal {literal:?}: {reason}")]
    Literal { literal: String, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn check_field(a: &Field, b: &Field) -> Result<(), LinalgError> {
    if a != b {
        return Err(LinalgError::FieldMismatch {
            left: a.descriptor(),
            right: b.descriptor(),
        });
    }
    Ok(())
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Column vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vector {
    field: Field,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}]({})", self.field, self.to_literal())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector[{}]({:?})", self.field, self.data)
    }
}

impl Vector {
    pub fn new(field: &Field, data: Vec<u32>) -> Result<Self, LinalgError> {
        for &v in &data {
            if !field.contains(v) {
                return Err(FieldError::OutOfRange {
                    value: v,
                    order: field.order(),
                }
                .into());
            }
        }
        Ok(Vector {
            field: field.clone(),
            data,
        })
    }

    pub fn zeros(field: &Field, len: usize) -> Self {
        Vector {
            field: field.clone(),
            data: vec![0; len],
        }
    }

    /// Unit vector `e_index`.
    pub fn unit(field: &Field, len: usize, index: usize) -> Self {
        let mut v = Self::zeros(field, len);
        v.data[index] = 1;
        v
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.data
    }

    pub fn get(&self, i: usize) -> u32 {
        self.data[i]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn dot(&self, other: &Vector) -> Result<u32, LinalgError> {
        check_field(&self.field, &other.field)?;
        if self.len() != other.len() {
            return Err(LinalgError::Dimension(format!(
                "dot of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let f = &self.field;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector, LinalgError> {
        check_field(&self.field, &other.field)?;
        if self.len() != other.len() {
            return Err(LinalgError::Dimension("vector add".into()));
        }
        let f = &self.field;
        Ok(Vector {
            field: f.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: u32) -> Vector {
        let f = &self.field;
        Vector {
            field: f.clone(),
            data: self.data.iter().map(|&a| f.mul(s, a)).collect(),
        }
    }

    /// Scales so the first nonzero entry is 1. Zero vectors are returned as is.
    pub fn normalized(&self) -> Vector {
        match self.data.iter().find(|&&x| x != 0) {
            Some(&lead) => self.scale(self.field.inv(lead).expect("nonzero")),
            None => self.clone(),
        }
    }

    /// Column matrix `len x 1`.
    pub fn as_column(&self) -> Matrix {
        Matrix {
            field: self.field.clone(),
            rows: self.len(),
            cols: 1,
            data: self.data.clone(),
        }
    }

    /// Comma-separated entries, e.g. `1,0,0`.
    pub fn to_literal(&self) -> String {
        self.data
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_literal(field: &Field, s: &str) -> Result<Vector, LinalgError> {
        let m = Matrix::parse_literal(field, s)?;
        if m.rows != 1 {
            return Err(LinalgError::Literal {
                literal: s.into(),
                reason: "expected a single row".into(),
            });
        }
        Vector::new(field, m.data)
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// `s * I`.
    pub fn scalar(field: &Field, n: usize, s: u32) -> Self {
        Self::identity(field, n).scale(s)
    }

    pub fn diag(field: &Field, entries: &[u32]) -> Result<Self, LinalgError> {
        let n = entries.len();
        let mut m = Self::zeros(field, n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e)?;
        }
        Ok(m)
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Ragged("rows of unequal length".into()));
        }
        Self::from_vec(field, r, c, rows.concat())
    }

    pub fn from_vec(
        field: &Field,
        rows: usize,
        cols: usize,
        data: Vec<u32>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&v) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(FieldError::OutOfRange {
                value: v,
                order: field.order(),
            }
            .into());
        }
        Ok(Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: &Field, cols: &[Vector]) -> Result<Self, LinalgError> {
        let rows = cols.first().map_or(0, Vector::len);
        let mut m = Self::zeros(field, rows, cols.len());
        for (c, v) in cols.iter().enumerate() {
            check_field(field, v.field())?;
            if v.len() != rows {
                return Err(LinalgError::Ragged("columns of unequal length".into()));
            }
            for r in 0..rows {
                m.data[r * m.cols + c] = v.get(r);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u32) -> Result<(), LinalgError> {
        if r >= self.rows || c >= self.cols {
            return Err(LinalgError::Dimension(format!(
                "index ({r},{c}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.field.contains(value) {
            return Err(FieldError::OutOfRange {
                value,
                order: self.field.order(),
            }
            .into());
        }
        self.data[r * self.cols + c] = value;
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> Vector {
        Vector {
            field: self.field.clone(),
            data: self.row(r).to_vec(),
        }
    }

    pub fn column(&self, c: usize) -> Vector {
        Vector {
            field: self.field.clone(),
            data: (0..self.rows).map(|r| self.get(r, c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        check_field(&self.field, &other.field)?;
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, c)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector, LinalgError> {
        let col = self.mul(&v.as_column())?;
        Ok(col.column(0))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        check_field(&self.field, &other.field)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::Dimension("matrix add".into()));
        }
        let f = &self.field;
        Ok(Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.add(&other.scale(self.field.neg(1)))
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = &self.field;
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f.mul(s, a)).collect(),
        }
    }

    /// Outer product `u v^t`.
    pub fn outer(u: &Vector, v: &Vector) -> Result<Matrix, LinalgError> {
        u.as_column().mul(&v.as_column().transpose())
    }

    /// Leading `rows x cols` corner.
    pub fn crop(&self, rows: usize, cols: usize) -> Result<Matrix, LinalgError> {
        self.submatrix(0, 0, rows, cols)
    }

    pub fn submatrix(
        &self,
        row0: usize,
        col0: usize,
        rows: usize,
        cols: usize,
    ) -> Result<Matrix, LinalgError> {
        if row0 + rows > self.rows || col0 + cols > self.cols {
            return Err(LinalgError::Dimension(format!(
                "window {rows}x{cols} at ({row0},{col0}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        let mut out = Matrix::zeros(&self.field, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.data[r * cols + c] = self.get(row0 + r, col0 + c);
            }
        }
        Ok(out)
    }

    /// Submatrix on arbitrary row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.field, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.data[i * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        block_compose(&[vec![self.clone(), other.clone()]])
    }

    /// Reduced row-echelon form in place; returns the pivot columns.
    /// Pivot choice: first nonzero entry at or below the current row.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("nonzero pivot");
            for c in 0..self.cols {
                let idx = row * self.cols + c;
                self.data[idx] = f.mul(self.data[idx], inv);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let sub = f.mul(factor, self.get(row, c));
                    let idx = r * self.cols + c;
                    self.data[idx] = f.sub(self.data[idx], sub);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let p = m.rref_in_place();
        (m, p)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = self.hstack(&Matrix::identity(&self.field, n))?;
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinalgError::Singular);
        }
        aug.submatrix(0, n, n, n)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn determinant(&self) -> Result<u32, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let f = self.field.clone();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| m.get(r, col) != 0) else {
                return Ok(0);
            };
            if p != col {
                for c in 0..n {
                    m.data.swap(p * n + c, col * n + c);
                }
                det = f.neg(det);
            }
            let pivot = m.get(col, col);
            det = f.mul(det, pivot);
            let inv = f.inv(pivot).expect("nonzero pivot");
            for r in col + 1..n {
                let factor = f.mul(m.get(r, col), inv);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    let sub = f.mul(factor, m.get(col, c));
                    m.data[r * n + c] = f.sub(m.get(r, c), sub);
                }
            }
        }
        Ok(det)
    }

    /// Solves `self * x = y` for square invertible `self`.
    pub fn solve(&self, y: &Vector) -> Result<Vector, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if y.len() != self.rows {
            return Err(LinalgError::Dimension("right-hand side length".into()));
        }
        let x = self
            .solve_system(&y.as_column())?
            .ok_or(LinalgError::Singular)?;
        if !self.is_invertible() {
            return Err(LinalgError::Singular);
        }
        Ok(x.column(0))
    }

    /// Finds some `X` with `self * X = rhs`, or `None` when the system is
    /// inconsistent. Free variables are set to zero.
    pub fn solve_system(&self, rhs: &Matrix) -> Result<Option<Matrix>, LinalgError> {
        check_field(&self.field, &rhs.field)?;
        if rhs.rows != self.rows {
            return Err(LinalgError::Dimension(format!(
                "system with {} equations but right-hand side of {} rows",
                self.rows, rhs.rows
            )));
        }
        let n = self.cols;
        let mut aug = self.hstack(rhs)?;
        let pivots = aug.rref_in_place();
        if pivots.iter().any(|&p| p >= n) {
            return Ok(None);
        }
        let mut x = Matrix::zeros(&self.field, n, rhs.cols);
        for (row, &p) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x.data[p * rhs.cols + c] = aug.get(row, n + c);
            }
        }
        Ok(Some(x))
    }

    /// Basis of the right null space, one normalized vector per free column.
    pub fn null_space(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let f = &self.field;
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u32; self.cols];
                v[fc] = 1;
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = f.neg(r.get(row, fc));
                }
                Vector {
                    field: f.clone(),
                    data: v,
                }
                .normalized()
            })
            .collect()
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn to_literal(&self) -> String {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(u32::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_literal(field: &Field, s: &str) -> Result<Matrix, LinalgError> {
        let err = |reason: &str| LinalgError::Literal {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(err("empty literal"));
        }
        let mut rows = Vec::new();
        for row in trimmed.split(';') {
            let entries: Result<Vec<u32>, _> =
                row.split(',').map(|e| e.trim().parse::<u32>()).collect();
            rows.push(entries.map_err(|_| err("entries must be decimal integers"))?);
        }
        match Matrix::from_rows(field, &rows) {
            Ok(m) => Ok(m),
            Err(LinalgError::Ragged(_)) => Err(err("rows of unequal length")),
            Err(LinalgError::Field(FieldError::OutOfRange { value, .. })) => {
                Err(err(&format!("{value} is not a field element")))
            }
            Err(e) => Err(e),
        }
    }
}

/// `(V^t)^{-1}`: its columns `v'_i` satisfy `v'_i^t v_j = δ(i-j)`.
pub fn dual_basis(v: &Matrix) -> Result<Matrix, LinalgError> {
    v.transpose().inverse()
}

/// `m_ij = 1 / (x_i - y_j)`.
pub fn cauchy(field: &Field, x: &[u32], y: &[u32]) -> Result<Matrix, LinalgError> {
    for (name, seq) in [("x", x), ("y", y)] {
        for (i, &a) in seq.iter().enumerate() {
            if !field.contains(a) {
                return Err(LinalgError::InvalidSequence(format!(
                    "{name}[{i}] = {a} is not a field element"
                )));
            }
            if seq[..i].contains(&a) {
                return Err(LinalgError::InvalidSequence(format!("{name} repeats {a}")));
            }
        }
    }
    if let Some(a) = x.iter().find(|a| y.contains(a)) {
        return Err(LinalgError::InvalidSequence(format!(
            "{a} appears in both x and y"
        )));
    }
    let mut m = Matrix::zeros(field, x.len(), y.len());
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            m.data[i * y.len() + j] = field.inv(field.sub(xi, yj)).expect("distinct points");
        }
    }
    Ok(m)
}

/// Cauchy matrix with `x = (0, .., rows-1)` and `y = (rows, .., rows+cols-1)`.
pub fn default_cauchy(field: &Field, rows: usize, cols: usize) -> Result<Matrix, LinalgError> {
    let need = rows + cols;
    if (field.order() as usize) < need {
        return Err(LinalgError::InvalidSequence(format!(
            "{field} has fewer than {need} elements"
        )));
    }
    let x: Vec<u32> = (0..rows as u32).collect();
    let y: Vec<u32> = (rows as u32..need as u32).collect();
    cauchy(field, &x, &y)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    combinations(n, k)
}

/// Exhaustively checks that every square submatrix is invertible.
pub fn all_submatrices_invertible(m: &Matrix) -> Result<bool, LinalgError> {
    if m.rows > SUBMATRIX_CHECK_CAP || m.cols > SUBMATRIX_CHECK_CAP {
        return Err(LinalgError::TooLarge {
            rows: m.rows,
            cols: m.cols,
        });
    }
    for size in 1..=m.rows.min(m.cols) {
        let col_sets = combinations(m.cols, size);
        for rows in combinations(m.rows, size) {
            for cols in &col_sets {
                if m.select(&rows, cols).determinant()? == 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Tries to recover sequences `x`, `y` with `m_ij = 1/(x_i - y_j)`.
///
/// Any Cauchy matrix fixes `x_0 - y_j` for all `j` and `x_i - y_0` for all
/// `i`, so normalizing `y_0 = 0` determines a unique candidate, which is then
/// checked entry by entry.
pub fn cauchy_certificate(m: &Matrix) -> Option<(Vec<u32>, Vec<u32>)> {
    let f = &m.field;
    if m.rows == 0 || m.cols == 0 || m.data.contains(&0) {
        return None;
    }
    let diff = |r: usize, c: usize| f.inv(m.get(r, c)).expect("nonzero");
    let x: Vec<u32> = (0..m.rows).map(|r| diff(r, 0)).collect();
    let y: Vec<u32> = (0..m.cols).map(|c| f.sub(x[0], diff(0, c))).collect();
    let rebuilt = cauchy(f, &x, &y).ok()?;
    (rebuilt == *m).then_some((x, y))
}

/// Eigenpairs of a small square matrix by scanning every field element.
pub fn eigen_small(a: &Matrix) -> Result<Vec<(u32, Vector)>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if a.rows > 3 {
        return Err(LinalgError::EigenTooLarge(a.rows));
    }
    let f = &a.field;
    let mut out = Vec::new();
    for lambda in f.elements() {
        let shifted = a.sub(&Matrix::scalar(f, a.rows, lambda))?;
        if shifted.determinant()? == 0 {
            if let Some(v) = shifted.null_space().into_iter().next() {
                out.push((lambda, v));
            }
        }
    }
    Ok(out)
}

/// Flattens a table of blocks, row-block-major.
pub fn block_compose(blocks: &[Vec<Matrix>]) -> Result<Matrix, LinalgError> {
    let first = blocks
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| LinalgError::Ragged("empty block table".into()))?;
    let field = first.field.clone();
    let ncols = blocks[0].len();
    let col_widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
    let mut row_heights = Vec::new();
    for (i, row) in blocks.iter().enumerate() {
        if row.len() != ncols {
            return Err(LinalgError::Ragged(format!(
                "block row {i} has {} blocks",
                row.len()
            )));
        }
        let h = row[0].rows;
        for (j, b) in row.iter().enumerate() {
            check_field(&field, &b.field)?;
            if b.rows != h || b.cols != col_widths[j] {
                return Err(LinalgError::Ragged(format!(
                    "block ({i},{j}) is {}x{}, expected {h}x{}",
                    b.rows, b.cols, col_widths[j]
                )));
            }
        }
        row_heights.push(h);
    }
    let total_rows: usize = row_heights.iter().sum();
    let total_cols: usize = col_widths.iter().sum();
    let mut out = Matrix::zeros(&field, total_rows, total_cols);
    let mut r0 = 0;
    for (i, row) in blocks.iter().enumerate() {
        let mut c0 = 0;
        for (j, b) in row.iter().enumerate() {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out.data[(r0 + r) * total_cols + c0 + c] = b.get(r, c);
                }
            }
            c0 += col_widths[j];
        }
        r0 += row_heights[i];
    }
    Ok(out)
}

/// Splits a matrix into a table of `block_rows x block_cols` blocks.
pub fn block_split(
    m: &Matrix,
    block_rows: usize,
    block_cols: usize,
) -> Result<Vec<Vec<Matrix>>, LinalgError> {
    if block_rows == 0
        || block_cols == 0
        || !m.rows.is_multiple_of(block_rows)
        || !m.cols.is_multiple_of(block_cols)
    {
        return Err(LinalgError::Dimension(format!(
            "{}x{} does not split into {block_rows}x{block_cols} blocks",
            m.rows, m.cols
        )));
    }
    (0..m.rows / block_rows)
        .map(|i| {
            (0..m.cols / block_cols)
                .map(|j| m.submatrix(i * block_rows, j * block_cols, block_rows, block_cols))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf4() -> Field {
        Field::binary(2, 0b111).unwrap()
    }

    fn m(f: &Field, rows: &[&[u32]]) -> Matrix {
        Matrix::from_rows(f, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_products() {
        let f = gf4();
        let a = m(&f, &[&[1, 2], &[3, 0]]);
        assert_eq!(Matrix::identity(&f, 2).mul(&a).unwrap(), a);
        assert_eq!(a.mul(&Matrix::identity(&f, 2)).unwrap(), a);
        assert!(a.mul(&Matrix::identity(&f, 3)).is_err());
    }

    #[test]
    fn outer_product() {
        let f = gf4();
        let u = Vector::new(&f, vec![2, 2, 2]).unwrap();
        let e1 = Vector::unit(&f, 3, 0);
        let o = Matrix::outer(&u, &e1).unwrap();
        assert_eq!(o, m(&f, &[&[2, 0, 0], &[2, 0, 0], &[2, 0, 0]]));
    }

    #[test]
    fn inverse_examples() {
        let f2 = Field::prime(2).unwrap();
        let a = m(&f2, &[&[1, 1], &[0, 1]]);
        assert_eq!(a.inverse().unwrap(), a);
        let f = gf4();
        assert_eq!(
            Matrix::identity(&f, 3).inverse().unwrap(),
            Matrix::identity(&f, 3)
        );
        assert_eq!(
            m(&f, &[&[1, 1], &[1, 1]]).inverse(),
            Err(LinalgError::Singular)
        );
        // A_1 block of the orthogonal (6,3,5) example
        let a1 = m(&f, &[&[3, 0, 0], &[2, 1, 0], &[2, 0, 1]]);
        let i = a1.mul(&a1.inverse().unwrap()).unwrap();
        assert_eq!(i, Matrix::identity(&f, 3));
    }

    #[test]
    fn rank_examples() {
        let f = gf4();
        assert_eq!(Matrix::zeros(&f, 3, 4).rank(), 0);
        assert_eq!(m(&f, &[&[1, 2], &[2, 3]]).rank(), 1);
        assert_eq!(Matrix::identity(&f, 4).rank(), 4);
    }

    #[test]
    fn solve_examples() {
        let f = Field::prime(7).unwrap();
        let y = Vector::new(&f, vec![3, 4]).unwrap();
        assert_eq!(Matrix::identity(&f, 2).solve(&y).unwrap(), y);
        let a = m(&f, &[&[2, 5], &[1, 3]]);
        let x = Vector::new(&f, vec![4, 1]).unwrap();
        assert_eq!(a.solve(&a.mul_vec(&x).unwrap()).unwrap(), x);
        let s = m(&f, &[&[1, 2], &[2, 4]]);
        assert_eq!(s.solve(&y), Err(LinalgError::Singular));
    }

    #[test]
    fn solve_system_reports_inconsistency() {
        let f = Field::prime(5).unwrap();
        let a = m(&f, &[&[1, 0], &[0, 0]]);
        let rhs = m(&f, &[&[1], &[1]]);
        assert_eq!(a.solve_system(&rhs).unwrap(), None);
        let rhs = m(&f, &[&[3], &[0]]);
        assert_eq!(a.solve_system(&rhs).unwrap(), Some(m(&f, &[&[3], &[0]])));
    }

    #[test]
    fn dual_basis_examples() {
        let f = gf4();
        assert_eq!(
            dual_basis(&Matrix::identity(&f, 3)).unwrap(),
            Matrix::identity(&f, 3)
        );
        let coeff = m(&f, &[&[1, 1, 1], &[1, 2, 3], &[1, 3, 2]]);
        let v = coeff.transpose().scale(2);
        let vp = dual_basis(&v).unwrap();
        assert_eq!(vp.transpose().mul(&v).unwrap(), Matrix::identity(&f, 3));
        assert_eq!(vp, m(&f, &[&[3, 3, 3], &[3, 2, 1], &[3, 1, 2]]));
    }

    #[test]
    fn cauchy_examples() {
        let f = gf4();
        assert_eq!(
            cauchy(&f, &[0, 1], &[2, 3]).unwrap(),
            m(&f, &[&[3, 2], &[2, 3]])
        );
        assert!(matches!(
            cauchy(&f, &[0, 1], &[1, 3]),
            Err(LinalgError::InvalidSequence(_))
        ));
        assert!(cauchy(&f, &[0, 0], &[2, 3]).is_err());
        let f5 = Field::prime(5).unwrap();
        assert_eq!(cauchy(&f5, &[0], &[1]).unwrap(), m(&f5, &[&[4]]));
    }

    #[test]
    fn submatrix_examples() {
        let f = gf4();
        let coeff = m(&f, &[&[1, 1, 1], &[1, 2, 3], &[1, 3, 2]]);
        assert!(all_submatrices_invertible(&coeff).unwrap());
        let with_zero = m(&f, &[&[1, 0], &[1, 1]]);
        assert!(!all_submatrices_invertible(&with_zero).unwrap());
        let big = Matrix::identity(&Field::prime(31).unwrap(), 9);
        assert!(matches!(
            all_submatrices_invertible(&big),
            Err(LinalgError::TooLarge { .. })
        ));
    }

    #[test]
    fn cauchy_certificate_recovers_sequences() {
        let f = Field::binary_default(4).unwrap();
        let c = default_cauchy(&f, 5, 5).unwrap();
        assert!(cauchy_certificate(&c).is_some());
        let f4 = gf4();
        // all-ones row and column: not of Cauchy shape over GF(4)
        let coeff = m(&f4, &[&[1, 1, 1], &[1, 2, 3], &[1, 3, 2]]);
        assert!(cauchy_certificate(&coeff).is_none());
    }

    #[test]
    fn eigen_examples() {
        let f3 = Field::prime(3).unwrap();
        let d = Matrix::diag(&f3, &[1, 2]).unwrap();
        let pairs = eigen_small(&d).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0], (1, Vector::new(&f3, vec![1, 0]).unwrap()));
        assert_eq!(pairs[1], (2, Vector::new(&f3, vec![0, 1]).unwrap()));
        let i = eigen_small(&Matrix::identity(&f3, 2)).unwrap();
        assert_eq!(i.len(), 1);
        assert_eq!(i[0].0, 1);
        // rotation-like matrix with no eigenvalue in GF(3): x^2 + 1 is irreducible
        let r = m(&f3, &[&[0, 2], &[1, 0]]);
        assert!(eigen_small(&r).unwrap().is_empty());
    }

    #[test]
    fn block_compose_examples() {
        let f = gf4();
        let i = Matrix::identity(&f, 2);
        let z = Matrix::zeros(&f, 2, 2);
        assert_eq!(block_compose(&[vec![i.clone()]]).unwrap(), i);
        assert_eq!(
            block_compose(&[vec![i.clone(), z.clone()], vec![z.clone(), i.clone()]]).unwrap(),
            Matrix::identity(&f, 4)
        );
        let tall = Matrix::zeros(&f, 3, 2);
        assert!(block_compose(&[vec![i.clone(), tall]]).is_err());
        let g = block_compose(&[vec![i.clone(), z.clone()], vec![z, i]]).unwrap();
        let parts = block_split(&g, 2, 2).unwrap();
        assert_eq!(block_compose(&parts).unwrap(), g);
    }

    #[test]
    fn literal_round_trip() {
        let f = gf4();
        let a = Matrix::parse_literal(&f, "3,0,0;2,1,0;2,0,1").unwrap();
        assert_eq!(a.to_literal(), "3,0,0;2,1,0;2,0,1");
        assert!(Matrix::parse_literal(&f, "1,2;3").is_err());
        assert!(Matrix::parse_literal(&f, "1,4").is_err());
        assert!(Matrix::parse_literal(&f, "").is_err());
        assert!(Matrix::parse_literal(&f, "a,b").is_err());
    }

    #[test]
    fn null_space_and_determinant() {
        let f = Field::prime(5).unwrap();
        let a = m(&f, &[&[1, 2], &[2, 4]]);
        let ns = a.null_space();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).unwrap().is_zero());
        assert_eq!(a.determinant().unwrap(), 0);
        assert_eq!(m(&f, &[&[0, 1], &[1, 0]]).determinant().unwrap(), 4);
    }
}
