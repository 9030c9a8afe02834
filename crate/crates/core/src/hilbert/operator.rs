//! Compressed-sparse-row complex operators.
//!
//! Every Hamiltonian, projector and jump operator in the crate is an
//! [`OperatorMatrix`]. Rows are stored sorted by column with duplicates summed
//! and exact zeros dropped, so structural comparisons are meaningful.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tolerance on `max |H - H^dagger|` below which builders set the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Assemble from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(dim, rows))
    }

    fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals, hermitian: false }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new(), hermitian: true }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim]).with_hermitian_flag()
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let dim = diag.len();
        let trip = diag.iter().enumerate().map(|(i, &v)| (i, i, v));
        Self::from_triplets(dim, trip).expect("diagonal indices are in range")
    }

    /// Real dense matrix given row-major.
    pub fn from_dense_real(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut trip = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            check_dim(dim, row.len())?;
            for (c, &v) in row.iter().enumerate() {
                trip.push((r, c, C64::new(v, 0.0)));
            }
        }
        Self::from_triplets(dim, trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// The stored Hermiticity flag.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the Hermitian flag iff `max |H - H^dagger| < HERMITIAN_TOL`.
    pub fn with_hermitian_flag(mut self) -> Self {
        self.hermitian = self.hermiticity_defect() < HERMITIAN_TOL;
        self
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal_entries().into_iter().sum()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.dim, x.len())?;
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without allocation. Panics on length mismatch.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v.conj()));
        let mut out = Self::from_triplets(self.dim, trip).expect("same dimension");
        out.hermitian = self.hermitian;
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out.hermitian = self.hermitian && s.im == 0.0;
        out.drop_zeros()
    }

    fn drop_zeros(self) -> Self {
        if self.vals.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return self;
        }
        let hermitian = self.hermitian;
        let mut out = Self::from_triplets(self.dim, self.triplets().collect::<Vec<_>>())
            .expect("same dimension");
        out.hermitian = hermitian;
        out
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let trip = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * sign)))
            .collect::<Vec<_>>();
        Self::from_triplets(self.dim, trip)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.combine(other, 1.0)?;
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.combine(other, -1.0)?;
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    /// Sparse product `self * other` (row-wise Gustavson accumulation).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut mark = vec![usize::MAX; n];
        let mut rows = Vec::with_capacity(n);
        let mut touched = Vec::new();
        for r in 0..n {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            rows.push(touched.iter().map(|&c| (c, acc[c])).collect::<Vec<_>>());
        }
        Ok(Self::from_rows(n, rows))
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - self.get(c, r).conj()).norm());
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<x| A |y>`.
    pub fn sandwich(&self, x: &[C64], y: &[C64]) -> Result<C64> {
        check_dim(self.dim, x.len())?;
        let ay = self.apply(y)?;
        Ok(x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum())
    }

    /// Spectral norm of a Hermitian operator by power iteration on `A^2`.
    ///
    /// Returns the estimate and whether the relative change fell below `tol`
    /// within `max_iter` iterations.
    pub fn spectral_norm_hermitian(&self, tol: f64, max_iter: usize) -> (f64, bool) {
        if self.nnz() == 0 {
            return (0.0, true);
        }
        let n = self.dim;
        // Deterministic start vector with support on every basis state.
        let mut v: Vec<C64> =
            (0..n).map(|i| C64::new(1.0 + 0.1 * ((i * 7919) % 97) as f64 / 97.0, 0.0)).collect();
        normalize(&mut v);
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        let mut w = vec![C64::new(0.0, 0.0); n];
        let mut lambda = 0.0;
        for _ in 0..max_iter {
            self.apply_into(&v, &mut tmp);
            self.apply_into(&tmp, &mut w);
            let next = norm(&w);
            if next == 0.0 {
                return (0.0, true);
            }
            w.iter_mut().for_each(|x| *x /= next);
            std::mem::swap(&mut v, &mut w);
            if (next - lambda).abs() <= tol * next {
                return (next.sqrt(), true);
            }
            lambda = next;
        }
        (lambda.sqrt(), false)
    }

    /// Dense copy for small operators.
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// `A D` where `D` is dense.
    pub fn mul_dense(&self, d: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
        let mut out = nalgebra::DMatrix::zeros(self.dim, d.ncols());
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for c in 0..d.ncols() {
                    out[(r, c)] += a * d[(k, c)];
                }
            }
        }
        out
    }

    /// `D A` where `D` is dense.
    pub fn dense_mul(&self, d: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
        let mut out = nalgebra::DMatrix::zeros(d.nrows(), self.dim);
        for k in 0..self.dim {
            for (c, a) in self.row(k) {
                for r in 0..d.nrows() {
                    out[(r, c)] += d[(r, k)] * a;
                }
            }
        }
        out
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn normalize(v: &mut [C64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Wire form: `{"schema", "dim", "hermitian", "triplets": [[row, col, re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct OperatorWire {
    schema: String,
    dim: usize,
    hermitian: bool,
    triplets: Vec<(usize, usize, f64, f64)>,
}

pub const OPERATOR_SCHEMA: &str = "supertransfer.operator/1";

impl Serialize for OperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorWire {
            schema: OPERATOR_SCHEMA.to_string(),
            dim: self.dim,
            hermitian: self.hermitian,
            triplets: self.triplets().map(|(r, c, v)| (r, c, v.re, v.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = OperatorWire::deserialize(d)?;
        if wire.schema != OPERATOR_SCHEMA {
            return Err(D::Error::custom(format!("unsupported operator schema {:?}", wire.schema)));
        }
        let trip = wire.triplets.into_iter().map(|(r, c, re, im)| (r, c, C64::new(re, im)));
        let op = OperatorMatrix::from_triplets(wire.dim, trip).map_err(D::Error::custom)?;
        Ok(if wire.hermitian { op.with_hermitian_flag() } else { op })
    }
}
