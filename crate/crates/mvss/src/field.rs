//! Arithmetic over prime fields and dense matrices with exact elimination.
//!
//! Every matrix carries its characteristic so that products and solves never
//! mix fields by accident. Entries are stored row by row as residues in
//! `0..p`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{MvssError, Result};

/// The prime characteristic used for all chain-level arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u32,
}

impl FieldSpec {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(MvssError::input(format!("field characteristic {p} is not prime")));
        }
        Ok(Self { p })
    }

    pub fn f2() -> Self {
        Self { p: 2 }
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse of a nonzero residue.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(!a.is_multiple_of(self.p), "inverse of zero");
        let mut result = 1u64;
        let mut base = (a % self.p) as u64;
        let mut e = self.p - 2;
        let m = self.p as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        result as u32
    }

    /// Reduce a signed integer into `0..p`.
    pub fn from_i64(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    /// The residue of `(-1)^k`.
    pub fn sign(self, k: usize) -> u32 {
        if k.is_multiple_of(2) {
            1
        } else {
            self.neg(1)
        }
    }

    /// Signed representative in `(-p/2, p/2]`, used for readable output.
    pub fn to_signed(self, a: u32) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self::f2()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A dense matrix over `F_p`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from column vectors of equal length `rows`.
    pub fn from_columns(field: FieldSpec, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v % field.p();
            }
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: &[Vec<u32>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(field, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row length mismatch");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * cols + j] = v % field.p();
            }
        }
        m
    }

    /// Build from sparse columns given as `(row, value)` pairs.
    pub fn from_sparse_columns(field: FieldSpec, rows: usize, columns: &[Vec<(usize, u32)>]) -> Self {
        let mut m = Self::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for &(i, v) in col {
                m.add_at(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.field.p();
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: u32) {
        let k = i * self.cols + j;
        self.data[k] = self.field.add(self.data[k], v % self.field.p());
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    /// Nonzero entries of column `j` as `(row, value)` pairs.
    pub fn sparse_column(&self, j: usize) -> Vec<(usize, u32)> {
        (0..self.rows).filter_map(|i| {
            let v = self.get(i, j);
            (v != 0).then_some((i, v))
        })
        .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        assert_eq!(self.field, other.field, "field mismatch in product");
        let p = self.field.p() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (slot, &b) in acc.iter_mut().zip(orow) {
                    *slot += a * b as u64;
                    if *slot >= (1 << 62) {
                        *slot %= p;
                    }
                }
            }
            for (j, a) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = (a % p) as u32;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        let p = self.field.p() as u64;
        (0..self.rows)
            .map(|i| {
                let s: u64 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64 % p).sum();
                (s % p) as u32
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sum");
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in difference");
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let f = self.field;
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        Matrix { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field, idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            m.data[r * self.cols..(r + 1) * self.cols].copy_from_slice(self.row(i));
        }
        m
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.rows, idx.len());
        for i in 0..self.rows {
            for (c, &j) in idx.iter().enumerate() {
                m.data[i * idx.len() + c] = self.data[i * self.cols + j];
            }
        }
        m
    }

    /// Horizontal concatenation; all blocks need the same row count.
    pub fn hstack(field: FieldSpec, rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(field, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "row mismatch in hstack");
            for i in 0..rows {
                m.data[i * cols + off..i * cols + off + b.cols].copy_from_slice(b.row(i));
            }
            off += b.cols;
        }
        m
    }

    pub fn vstack(field: FieldSpec, cols: usize, blocks: &[&Matrix]) -> Matrix {
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols, "column mismatch in vstack");
            data.extend_from_slice(&b.data);
        }
        Matrix { field, rows, cols, data }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// In-place elimination to reduced row echelon form. Returns pivot columns.
    fn eliminate(&mut self, col_limit: usize) -> Vec<usize> {
        let f = self.field;
        let p = f.p() as u64;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..col_limit {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            self.swap_rows(r, piv);
            let inv = f.inv(self.data[r * cols + c]);
            if inv != 1 {
                for j in c..cols {
                    let k = r * cols + j;
                    self.data[k] = f.mul(self.data[k], inv);
                }
            }
            let (head, tail) = self.data.split_at_mut(r * cols);
            let (prow, rest) = tail.split_at_mut(cols);
            let eliminate_row = |row: &mut [u32]| {
                let factor = row[c];
                if factor == 0 {
                    return;
                }
                let neg = p - factor as u64;
                for j in c..cols {
                    if prow[j] != 0 {
                        row[j] = ((row[j] as u64 + neg * prow[j] as u64) % p) as u32;
                    }
                }
            };
            for row in head.chunks_mut(cols) {
                eliminate_row(row);
            }
            for row in rest.chunks_mut(cols) {
                eliminate_row(row);
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.eliminate(self.cols);
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // Eliminate along the smaller side.
        if self.rows < self.cols {
            self.transpose().rank()
        } else {
            let mut m = self.clone();
            m.eliminate(self.cols).len()
        }
    }

    /// Indices of columns forming a basis of the column space (first-found order).
    pub fn independent_columns(&self) -> Vec<usize> {
        if self.cols == 0 {
            return Vec::new();
        }
        self.rref().pivots
    }

    /// A basis of the null space, one basis vector per column.
    pub fn kernel(&self) -> Matrix {
        let Rref { matrix, pivots } = self.rref();
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Matrix::zeros(f, self.cols, free.len());
        for (fi, &fc) in free.iter().enumerate() {
            k.data[fc * free.len() + fi] = 1;
            for (pr, &pc) in pivots.iter().enumerate() {
                let v = matrix.get(pr, fc);
                if v != 0 {
                    k.data[pc * free.len() + fi] = f.neg(v);
                }
            }
        }
        k
    }

    /// Solve `self * X = rhs`; returns `None` when some column is not in the image.
    pub fn solve(&self, rhs: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows, "row mismatch in solve");
        let aug = Matrix::hstack(self.field, self.rows, &[self, rhs]);
        let mut m = aug;
        let pivots = m.eliminate(self.cols);
        let rank = pivots.len();
        for i in rank..m.rows {
            if (self.cols..m.cols).any(|j| m.get(i, j) != 0) {
                return None;
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, rhs.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.data[pc * rhs.cols + j] = m.get(r, self.cols + j);
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve(&Matrix::identity(self.field, self.rows))?;
        (self.rank() == self.rows).then_some(x)
    }
}

/// A linear subspace of `F_p^n`, stored as a matrix whose columns are a basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    pub fn zero(field: FieldSpec, ambient: usize) -> Self {
        Self { basis: Matrix::zeros(field, ambient, 0) }
    }

    /// The span of the columns of `gens`.
    pub fn span(gens: &Matrix) -> Self {
        let idx = gens.independent_columns();
        Self { basis: gens.select_cols(&idx) }
    }

    /// Wrap columns already known to be independent.
    pub fn from_independent(basis: Matrix) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let m = Matrix::hstack(self.basis.field(), self.ambient(), &[&self.basis, &other.basis]);
        Subspace::span(&m)
    }

    /// Columns of `self` that extend a basis of `sub` to a basis of `sub + self`.
    pub fn complement_of(&self, sub: &Subspace) -> Matrix {
        let m = Matrix::hstack(self.basis.field(), self.ambient(), &[&sub.basis, &self.basis]);
        let idx: Vec<usize> = m
            .independent_columns()
            .into_iter()
            .filter(|&c| c >= sub.dim())
            .collect();
        m.select_cols(&idx)
    }

    pub fn contains(&self, v: &Matrix) -> bool {
        self.basis.solve(v).is_some()
    }
}

/// A quotient `num / den` with a chosen complement basis, able to express
/// vectors of `num` in complement coordinates.
#[derive(Debug, Clone)]
pub struct Quotient {
    den: Subspace,
    reps: Matrix,
    joined: Matrix,
}

impl Quotient {
    /// `den` must be contained in `num`.
    pub fn new(num: &Subspace, den: Subspace) -> Self {
        let reps = num.complement_of(&den);
        let joined = Matrix::hstack(den.basis.field(), den.ambient(), &[&den.basis, &reps]);
        Self { den, reps, joined }
    }

    pub fn dim(&self) -> usize {
        self.reps.cols()
    }

    pub fn den(&self) -> &Subspace {
        &self.den
    }

    /// Representative vectors of the quotient basis (columns).
    pub fn reps(&self) -> &Matrix {
        &self.reps
    }

    /// Coordinates of the columns of `v` in the quotient basis, or `None` if
    /// some column does not lie in `num`.
    pub fn coords(&self, v: &Matrix) -> Option<Matrix> {
        if self.reps.cols() == 0 {
            // Still need membership in den for a faithful answer.
            return self
                .den
                .basis
                .solve(v)
                .map(|_| Matrix::zeros(v.field(), 0, v.cols()));
        }
        let x = self.joined.solve(v)?;
        let d = self.den.dim();
        let idx: Vec<usize> = (d..d + self.reps.cols()).collect();
        Some(x.select_rows(&idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_mod_p() {
        let f = FieldSpec::new(7).unwrap();
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert!(FieldSpec::new(9).is_err());
        assert!(FieldSpec::new(1).is_err());
    }

    #[test]
    fn kernel_is_annihilated() {
        let f = FieldSpec::new(3).unwrap();
        let m = Matrix::from_rows(f, &[vec![1, 2, 0, 1], vec![0, 1, 1, 2], vec![1, 0, 1, 0]]);
        let k = m.kernel();
        assert_eq!(k.cols() + m.rank(), 4);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn solve_and_inverse() {
        let f = FieldSpec::new(5).unwrap();
        let m = Matrix::from_rows(f, &[vec![2, 1], vec![1, 4]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        let singular = Matrix::from_rows(f, &[vec![1, 2], vec![2, 4]]);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn quotient_coordinates() {
        let f = FieldSpec::f2();
        let num = Subspace::span(&Matrix::identity(f, 3));
        let den = Subspace::span(&Matrix::from_columns(f, 3, &[vec![1, 1, 0]]));
        let q = Quotient::new(&num, den);
        assert_eq!(q.dim(), 2);
        let v = Matrix::from_columns(f, 3, &[vec![1, 1, 0]]);
        assert!(q.coords(&v).unwrap().is_zero());
    }
}
