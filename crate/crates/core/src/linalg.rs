//! Small dense real-matrix kernel.
//!
//! Everything here is `O(n^3)` or worse and meant for the handful of states
//! the synthesis layer deals with. The exact routines ([`det`], [`solve`],
//! [`char_poly`], [`companion_pair`], [`controllability_matrix`],
//! [`hurwitz_test`]) only need a [`Field`], so they run unchanged on
//! rationals; the tolerance-based ones ([`rank`], [`null_vector`],
//! [`lyapunov_solve`], [`symmetric_eigen_bounds`]) need a [`Real`].

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::num::{count, lit, Field, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial degree too low: {0}")]
    DegreeTooLow(usize),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("equilibrium direction not unique (rank {rank} < {expected})")]
    RankTooLow { rank: usize, expected: usize },
    #[error("matrix is nonsingular at the given tolerance")]
    Nonsingular,
    #[error("null vector residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("Lyapunov solution is not positive definite (matrix not Hurwitz)")]
    NotPositiveDefinite,
    #[error("non-finite entry")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Dimension("empty matrix".into()));
        }
        if rows * cols != data.len() {
            return Err(LinalgError::Dimension(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(LinalgError::Dimension("ragged columns".into()));
        }
        if r == 0 || c == 0 {
            return Err(LinalgError::Dimension("empty matrix".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| columns[j][i]))
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)] * rhs[(k, j)])
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(LinalgError::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(LinalgError::Dimension(format!(
                "row vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        Ok((0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |acc, i| acc + v[i] * self[(i, j)]))
            .collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self + s * u v^T`, the rank-one update behind `F + g H gamma`.
    pub fn rank_one_update(&self, s: T, u: &[T], v: &[T]) -> Result<Self> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(LinalgError::Dimension("rank-one update vectors".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)] + s * u[i] * v[j]
        }))
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::Dimension("shape mismatch".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl<T: Real> Matrix<T> {
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        list.finish()
    }
}

// Matrices travel as nested row arrays: [[a, b], [c, d]].
impl<T: Serialize> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[T]> = self.data.chunks(self.cols).collect();
        rows.serialize(serializer)
    }
}

impl<'de, T: Field + Deserialize<'de>> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Real polynomial with ascending coefficients `c0 + c1 s + ... + cd s^d`.
///
/// Trailing zero coefficients are trimmed on construction, so the stored
/// leading coefficient is nonzero unless the polynomial is identically zero.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    /// Monic polynomial `s^d + lower[d-1] s^{d-1} + ... + lower[0]`.
    pub fn monic(lower: &[T]) -> Self {
        let mut coeffs = lower.to_vec();
        coeffs.push(T::one());
        Self { coeffs }
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[T]) -> Self {
        roots.iter().fold(Self::new(vec![T::one()]), |acc, &r| {
            acc.mul(&Self::new(vec![-r, T::one()]))
        })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).copied().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> T {
        *self.coeffs.last().expect("nonempty")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == T::one()
    }

    pub fn eval(&self, s: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self::new(out)
    }
}

impl<T: fmt::Debug> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

/// `[g, Fg, ..., F^{n-1} g]`.
pub fn controllability_matrix<T: Field>(f: &Matrix<T>, g: &[T]) -> Result<Matrix<T>> {
    if !f.is_square() {
        return Err(LinalgError::Dimension("F must be square".into()));
    }
    if g.len() != f.rows() {
        return Err(LinalgError::Dimension(format!(
            "g has length {}, expected {}",
            g.len(),
            f.rows()
        )));
    }
    let n = f.rows();
    let mut columns = Vec::with_capacity(n);
    let mut v = g.to_vec();
    for _ in 0..n {
        let next = f.mul_vec(&v)?;
        columns.push(std::mem::replace(&mut v, next));
    }
    Matrix::from_columns(&columns)
}

/// Characteristic polynomial `det(sI - F)` by Faddeev-LeVerrier.
///
/// Only divides by the integers `1..=n`, so it is exact over rationals.
pub fn char_poly<T: Field>(f: &Matrix<T>) -> Result<Poly<T>> {
    if !f.is_square() {
        return Err(LinalgError::Dimension("F must be square".into()));
    }
    let n = f.rows();
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let identity = Matrix::identity(n);
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        m = f.matmul(&m)?.add(&identity.scale(c[n - k + 1]))?;
        let fm = f.matmul(&m)?;
        c[n - k] = -fm.trace() / count::<T>(k);
    }
    Ok(Poly::new(c))
}

/// Controllability canonical pair: ones on the superdiagonal, last row
/// `-a0 ... -a_{n-1}`, input `e_n`.
pub fn companion_pair<T: Field>(p: &Poly<T>) -> Result<(Matrix<T>, Vec<T>)> {
    if p.is_zero() {
        return Err(LinalgError::ZeroPolynomial);
    }
    if !p.is_monic() {
        return Err(LinalgError::NotMonic);
    }
    let n = p.degree();
    if n == 0 {
        return Err(LinalgError::DegreeTooLow(0));
    }
    let fc = Matrix::from_fn(n, n, |i, j| {
        if i + 1 == n {
            -p.coeff(j)
        } else if j == i + 1 {
            T::one()
        } else {
            T::zero()
        }
    });
    let mut gc = vec![T::zero(); n];
    gc[n - 1] = T::one();
    Ok((fc, gc))
}

/// Strict Hurwitz test through the Routh array.
///
/// Any zero or negative entry in the first column (including a zero pivot)
/// means "not Hurwitz"; marginal polynomials fail. A nonzero constant has no
/// roots and passes.
pub fn hurwitz_test<T: Field>(p: &Poly<T>) -> Result<bool> {
    if p.is_zero() {
        return Err(LinalgError::ZeroPolynomial);
    }
    let d = p.degree();
    if d == 0 {
        return Ok(true);
    }
    let sign = if p.leading() < T::zero() { -T::one() } else { T::one() };
    // Descending coefficients a_d, a_{d-1}, ..., a_0 with positive leading term.
    let a: Vec<T> = (0..=d).rev().map(|i| p.coeff(i) * sign).collect();
    if a.iter().any(|&x| x <= T::zero()) {
        return Ok(false);
    }
    let width = d / 2 + 2;
    let mut upper: Vec<T> = (0..width)
        .map(|j| a.get(2 * j).copied().unwrap_or_else(T::zero))
        .collect();
    let mut lower: Vec<T> = (0..width)
        .map(|j| a.get(2 * j + 1).copied().unwrap_or_else(T::zero))
        .collect();
    for _ in 2..=d {
        let pivot = lower[0];
        if pivot <= T::zero() {
            return Ok(false);
        }
        let mut next = vec![T::zero(); width];
        for j in 0..width - 1 {
            next[j] = (pivot * upper[j + 1] - upper[0] * lower[j + 1]) / pivot;
        }
        upper = lower;
        lower = next;
    }
    Ok(lower[0] > T::zero())
}

/// LU factorization with partial pivoting, in place. Returns the row
/// permutation parity, or `None` when an exactly zero pivot shows up.
fn lu_in_place<T: Field>(a: &mut Matrix<T>, perm: &mut [usize]) -> Option<bool> {
    let n = a.rows();
    let mut odd = false;
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].magnitude();
        for i in k + 1..n {
            let m = a[(i, k)].magnitude();
            if m > best {
                best = m;
                p = i;
            }
        }
        if best.is_zero() {
            return None;
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            perm.swap(k, p);
            odd = !odd;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            a[(i, k)] = factor;
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] = a[(i, j)] - factor * v;
            }
        }
    }
    Some(odd)
}

pub fn det<T: Field>(m: &Matrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(LinalgError::Dimension("determinant of non-square matrix".into()));
    }
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..m.rows()).collect();
    match lu_in_place(&mut a, &mut perm) {
        None => Ok(T::zero()),
        Some(odd) => {
            let d = (0..m.rows()).fold(T::one(), |acc, i| acc * a[(i, i)]);
            Ok(if odd { -d } else { d })
        }
    }
}

/// Solves `A x = b`.
pub fn solve<T: Field>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    if !a.is_square() || b.len() != a.rows() {
        return Err(LinalgError::Dimension("solve needs square A and matching b".into()));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    lu_in_place(&mut lu, &mut perm).ok_or(LinalgError::Singular)?;
    let mut y: Vec<T> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            y[i] = y[i] - lu[(i, j)] * y[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            y[i] = y[i] - lu[(i, j)] * y[j];
        }
        y[i] = y[i] / lu[(i, i)];
    }
    Ok(y)
}

pub fn inverse<T: Field>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        columns.push(solve(a, &e)?);
    }
    Matrix::from_columns(&columns)
}

/// Reduced row echelon form with partial pivoting; columns whose best
/// remaining pivot is at most `tol * max|m_ij|` are treated as free.
fn rref<T: Real>(m: &Matrix<T>, tol: T) -> (Matrix<T>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let threshold = tol * m.max_abs();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= threshold || best.is_zero() {
            for i in r..rows {
                a[(i, c)] = T::zero();
            }
            continue;
        }
        for j in 0..cols {
            let tmp = a[(r, j)];
            a[(r, j)] = a[(p, j)];
            a[(p, j)] = tmp;
        }
        let pivot = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] = a[(r, j)] / pivot;
        }
        for i in 0..rows {
            if i != r {
                let factor = a[(i, c)];
                if !factor.is_zero() {
                    for j in 0..cols {
                        let v = a[(r, j)];
                        a[(i, j)] = a[(i, j)] - factor * v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Numerical rank at relative tolerance `tol`.
pub fn rank<T: Real>(m: &Matrix<T>, tol: T) -> usize {
    rref(m, tol).1.len()
}

/// Unit vector spanning the kernel of a rank-`n-1` square matrix.
///
/// The sign is fixed so the largest-magnitude component is positive.
pub fn null_vector<T: Real>(m: &Matrix<T>, tol: T) -> Result<Vec<T>> {
    if !m.is_square() {
        return Err(LinalgError::Dimension("null_vector needs a square matrix".into()));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows();
    let (r, pivots) = rref(m, tol);
    if pivots.len() == n {
        return Err(LinalgError::Nonsingular);
    }
    if pivots.len() + 1 < n {
        return Err(LinalgError::RankTooLow { rank: pivots.len(), expected: n - 1 });
    }
    let free = (0..n).find(|c| !pivots.contains(c)).expect("one free column");
    let mut v = vec![T::zero(); n];
    v[free] = T::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -r[(row, free)];
    }
    let norm = norm2(&v);
    v.iter_mut().for_each(|x| *x = *x / norm);
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, -T::one()), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    if v[imax] < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let residual = norm2(&m.mul_vec(&v)?);
    if residual > tol * m.frobenius_norm() {
        return Err(LinalgError::Residual(crate::num::to_f64(residual)));
    }
    Ok(v)
}

/// Solves `F^T P + P F = -I` for symmetric `P` by stacking the
/// `n(n+1)/2` independent entries of `P` into one linear system.
pub fn lyapunov_solve<T: Real>(f: &Matrix<T>) -> Result<Matrix<T>> {
    if !f.is_square() {
        return Err(LinalgError::Dimension("F must be square".into()));
    }
    let n = f.rows();
    let idx = |i: usize, j: usize| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * n - a * (a + 1) / 2 + b
    };
    let m = n * (n + 1) / 2;
    let mut a = Matrix::zeros(m, m);
    let mut rhs = vec![T::zero(); m];
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            // (F^T P)_{ij} = sum_l F_{li} P_{lj};  (P F)_{ij} = sum_l P_{il} F_{lj}
            for l in 0..n {
                a[(row, idx(l, j))] = a[(row, idx(l, j))] + f[(l, i)];
                a[(row, idx(i, l))] = a[(row, idx(i, l))] + f[(l, j)];
            }
            if i == j {
                rhs[row] = -T::one();
            }
        }
    }
    let p = solve(&a, &rhs)?;
    let sol = Matrix::from_fn(n, n, |i, j| p[idx(i, j)]);
    if !sol.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if !is_positive_definite(&sol) {
        return Err(LinalgError::NotPositiveDefinite);
    }
    Ok(sol)
}

fn is_positive_definite<T: Real>(p: &Matrix<T>) -> bool {
    ldl_pivots(p, T::zero()).iter().all(|&d| d > T::zero())
}

/// Diagonal of the `LDL^T` factorization of `P - shift I` (no pivoting).
fn ldl_pivots<T: Real>(p: &Matrix<T>, shift: T) -> Vec<T> {
    let n = p.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| if i == j { p[(i, j)] - shift } else { p[(i, j)] });
    let tiny = T::epsilon() * (p.max_abs() + shift.abs() + T::min_positive_value());
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let mut pivot = a[(k, k)];
        if pivot.abs() <= tiny {
            pivot = -tiny;
        }
        d.push(pivot);
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] = a[(i, j)] - factor * v;
            }
        }
    }
    d
}

/// Number of eigenvalues of symmetric `P` below `x` (Sylvester inertia).
fn negative_count<T: Real>(p: &Matrix<T>, x: T) -> usize {
    ldl_pivots(p, x).iter().filter(|&&d| d < T::zero()).count()
}

/// Smallest and largest eigenvalues of a symmetric matrix, by bisection on
/// the inertia count of `P - xI` inside the Gershgorin bounds.
pub fn symmetric_eigen_bounds<T: Real>(p: &Matrix<T>) -> Result<(T, T)> {
    if !p.is_square() {
        return Err(LinalgError::Dimension("symmetric matrix must be square".into()));
    }
    let n = p.rows();
    let radius = (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, j| acc + p[(i, j)].abs()))
        .fold(T::zero(), T::max);
    let kth = |k: usize| {
        // Smallest x with at least k+1 eigenvalues <= x.
        let (mut lo, mut hi) = (-radius - T::one(), radius + T::one());
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if negative_count(p, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / lit(2.0)
    };
    Ok((kth(0), kth(n - 1)))
}

/// Convenience: is the matrix Hurwitz (all eigenvalues in the open left half plane)?
pub fn is_hurwitz_matrix<T: Field>(f: &Matrix<T>) -> Result<bool> {
    hurwitz_test(&char_poly(f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn controllability_of_lower_triangular_pair() {
        let f = m(&[&[-0.2, 0.0], &[0.2, -0.2]]);
        let r = controllability_matrix(&f, &[1.0, 0.0]).unwrap();
        assert_eq!(r, m(&[&[1.0, -0.2], &[0.0, 0.2]]));
    }

    #[test]
    fn controllability_of_nilpotent_zero() {
        let f = Matrix::<f64>::zeros(3, 3);
        let r = controllability_matrix(&f, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.column(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(r.column(1), vec![0.0; 3]);
        assert_eq!(r.column(2), vec![0.0; 3]);
    }

    #[test]
    fn controllability_rejects_bad_dimensions() {
        let f = Matrix::<f64>::identity(2);
        assert!(matches!(
            controllability_matrix(&f, &[1.0]),
            Err(LinalgError::Dimension(_))
        ));
    }

    #[test]
    fn char_poly_examples() {
        let p = char_poly(&m(&[&[-0.2, 0.0], &[0.2, -0.2]])).unwrap();
        assert!((p.coeff(0) - 0.04).abs() < 1e-15);
        assert!((p.coeff(1) - 0.4).abs() < 1e-15);
        assert_eq!(p.coeff(2), 1.0);

        let p = char_poly(&Matrix::<f64>::identity(2)).unwrap();
        assert_eq!(p.coeffs(), &[1.0, -2.0, 1.0]);

        let (a0, a1) = (3.0, 0.7);
        let p = char_poly(&m(&[&[0.0, 1.0], &[-a0, -a1]])).unwrap();
        assert_eq!(p.coeffs(), &[a0, a1, 1.0]);
    }

    #[test]
    fn char_poly_is_exact_over_rationals() {
        let q = |a: i64, b: i64| Ratio::new(a, b);
        let f = Matrix::from_rows(&[
            vec![q(-1, 5), q(0, 1), q(0, 1)],
            vec![q(1, 5), q(-3, 10), q(0, 1)],
            vec![q(0, 1), q(1, 10), q(-1, 20)],
        ])
        .unwrap();
        let p = char_poly(&f).unwrap();
        // (s + 1/5)(s + 3/10)(s + 1/20)
        let expected = Poly::from_roots(&[q(-1, 5), q(-3, 10), q(-1, 20)]);
        assert_eq!(p, expected);
        assert!(hurwitz_test(&p).unwrap());
    }

    #[test]
    fn companion_examples() {
        let (fc, gc) = companion_pair(&Poly::new(vec![0.04, 0.4, 1.0])).unwrap();
        assert_eq!(fc, m(&[&[0.0, 1.0], &[-0.04, -0.4]]));
        assert_eq!(gc, vec![0.0, 1.0]);

        let (fc, gc) = companion_pair(&Poly::new(vec![2.5, 1.0])).unwrap();
        assert_eq!(fc, m(&[&[-2.5]]));
        assert_eq!(gc, vec![1.0]);

        let (fc, gc) = companion_pair(&Poly::new(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(fc, m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]));
        assert_eq!(gc, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn companion_rejects_non_monic() {
        assert_eq!(
            companion_pair(&Poly::new(vec![1.0, 2.0])),
            Err(LinalgError::NotMonic)
        );
    }

    #[test]
    fn hurwitz_examples() {
        assert!(hurwitz_test(&Poly::new(vec![1.0, 1.0])).unwrap());
        assert!(!hurwitz_test(&Poly::new(vec![1.0, -1.0, 1.0])).unwrap());
        assert!(hurwitz_test(&Poly::new(vec![0.3, 2.0, 1.0])).unwrap());
        // marginal: s^2 + 1 and s(s+1)
        assert!(!hurwitz_test(&Poly::new(vec![1.0, 0.0, 1.0])).unwrap());
        assert!(!hurwitz_test(&Poly::new(vec![0.0, 1.0, 1.0])).unwrap());
        // zero Routh pivot with positive coefficients: s^3 + s^2 + s + 1
        assert!(!hurwitz_test(&Poly::new(vec![1.0, 1.0, 1.0, 1.0])).unwrap());
        // negative leading coefficient is normalized
        assert!(hurwitz_test(&Poly::new(vec![-2.0, -3.0, -1.0])).unwrap());
        assert_eq!(
            hurwitz_test(&Poly::<f64>::new(vec![0.0])),
            Err(LinalgError::ZeroPolynomial)
        );
    }

    #[test]
    fn null_vector_examples() {
        let v = null_vector(&m(&[&[0.0, 0.0], &[0.0, 1.0]]), 1e-9).unwrap();
        assert_eq!(v, vec![1.0, 0.0]);

        let (d, e) = (0.05, 0.2);
        let v = null_vector(&m(&[&[-e, d], &[e, -d]]), 1e-9).unwrap();
        let norm = ((d / e).powi(2) + 1.0).sqrt();
        assert!((v[0] - d / e / norm).abs() < 1e-14);
        assert!((v[1] - 1.0 / norm).abs() < 1e-14);
    }

    #[test]
    fn null_vector_errors() {
        assert_eq!(
            null_vector(&Matrix::<f64>::identity(2), 1e-9),
            Err(LinalgError::Nonsingular)
        );
        assert!(matches!(
            null_vector(&Matrix::<f64>::zeros(3, 3), 1e-9),
            Err(LinalgError::RankTooLow { rank: 0, expected: 2 })
        ));
    }

    #[test]
    fn lyapunov_examples() {
        let p = lyapunov_solve(&Matrix::<f64>::identity(2).scale(-1.0)).unwrap();
        assert_eq!(p, m(&[&[0.5, 0.0], &[0.0, 0.5]]));

        let p = lyapunov_solve(&m(&[&[-1.0, 0.0], &[0.0, -2.0]])).unwrap();
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((p[(1, 1)] - 0.25).abs() < 1e-15);
        assert!(p[(0, 1)].abs() < 1e-15);

        let f = m(&[&[0.0, 1.0], &[-1.0, -1.0]]);
        let p = lyapunov_solve(&f).unwrap();
        let res = f.transpose().matmul(&p).unwrap().add(&p.matmul(&f).unwrap()).unwrap();
        let res = res.add(&Matrix::identity(2)).unwrap();
        assert!(res.max_abs() <= 1e-10 * p.frobenius_norm());
        assert_eq!(p[(0, 1)], p[(1, 0)]);
    }

    #[test]
    fn lyapunov_rejects_unstable() {
        let f = m(&[&[1.0, 0.0], &[0.0, -2.0]]);
        assert_eq!(lyapunov_solve(&f), Err(LinalgError::NotPositiveDefinite));
        // eigenvalues 1 and -1 sum to zero: the Lyapunov operator is singular
        let f = m(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(lyapunov_solve(&f), Err(LinalgError::Singular));
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&Matrix::<f64>::identity(3)).unwrap(), 1.0);
        assert_eq!(det(&m(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap(), 0.0);
        assert_eq!(det(&m(&[&[3.0, 1.0], &[2.0, 5.0]])).unwrap(), 13.0);
        assert_eq!(det(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap(), -1.0);
    }

    #[test]
    fn eigen_bounds_handle_repeated_eigenvalues() {
        let (lo, hi) = symmetric_eigen_bounds(&Matrix::<f64>::identity(2).scale(0.5)).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
        let (lo, hi) = symmetric_eigen_bounds(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let f = Matrix::<f32>::from_rows(&[vec![-0.2, 0.0], vec![0.2, -0.2]]).unwrap();
        let p = char_poly(&f).unwrap();
        assert!((p.coeff(0) - 0.04).abs() < 1e-6);
        assert!(hurwitz_test(&p).unwrap());
        let p = lyapunov_solve(&f).unwrap();
        assert!(p[(0, 0)] > 0.0);
    }

    #[test]
    fn matrix_json_uses_nested_rows() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: Matrix<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<Matrix<f64>>("[[1.0],[2.0,3.0]]").is_err());
    }
}
