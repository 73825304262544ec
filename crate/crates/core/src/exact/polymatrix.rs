use num_traits::{One, Zero};
use serde::Serialize;

use super::gaussian::GaussianRational as Q;
use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};

/// Dense matrix of Gaussian rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Q>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Q>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Q::one();
        }
        m
    }

    /// Square integer matrix from row-major entries.
    pub fn from_integers(n: usize, entries: &[i64]) -> Result<Self> {
        Self::new(n, n, entries.iter().map(|&x| Q::from_integer(x)).collect())
    }

    /// Exact binary values of a floating-point matrix.
    pub fn from_complex(m: &ComplexMatrix) -> Result<Self> {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(Q::from_f64(m[(i, j)].re, m[(i, j)].im)?);
            }
        }
        Self::new(m.nrows(), m.ncols(), entries)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let (re, im) = self.get(i, j).to_f64_pair();
            c(re, im)
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Q] {
        &self.entries
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch { expected: self.rows, got: o.rows });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: o.rows });
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * o.cols + j] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        self.entries.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }
}

/// Matrix of polynomials sharing one ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn constant(m: &ExactMatrix, nvars: usize) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            nvars,
            entries: m.entries.iter().map(|x| Polynomial::constant(nvars, x.clone())).collect(),
        }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::constant(&ExactMatrix::identity(n), nvars)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols, self.nvars) != (o.rows, o.cols, o.nvars) {
            return Err(Error::DimensionMismatch { expected: self.rows, got: o.rows });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn scale_by(&self, p: &Polynomial) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            entries: self.entries.iter().map(|e| e.mul(p)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows || self.nvars != o.nvars {
            return Err(Error::DimensionMismatch { expected: self.cols, got: o.rows });
        }
        let mut entries = Vec::with_capacity(self.rows * o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Polynomial::zero(self.nvars);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                entries.push(acc);
            }
        }
        Ok(Self { rows: self.rows, cols: o.cols, nvars: self.nvars, entries })
    }

    /// `self · x` for an exact vector `x`.
    pub fn mul_vector(&self, x: &[Q]) -> Result<Vec<Polynomial>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Polynomial::zero(self.nvars), |acc, k| {
                    if x[k].is_zero() {
                        acc
                    } else {
                        acc.add(&self.get(i, k).scale(&x[k]))
                    }
                })
            })
            .collect())
    }

    /// Exact value at `point`.
    pub fn evaluate(&self, point: &[Q]) -> Result<ExactMatrix> {
        let entries = self.entries.iter().map(|p| p.evaluate(point)).collect::<Result<_>>()?;
        ExactMatrix::new(self.rows, self.cols, entries)
    }

    /// Laplace expansion along the first row; meant for `d ≤ 4`.
    pub fn determinant(&self) -> Result<Polynomial> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.minor_det(&idx, &idx))
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> Polynomial {
        if rows.is_empty() {
            return Polynomial::constant(self.nvars, Q::one());
        }
        let mut acc = Polynomial::zero(self.nvars);
        let r = rows[0];
        for (k, &cidx) in cols.iter().enumerate() {
            let e = self.get(r, cidx);
            if e.is_zero() {
                continue;
            }
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != cidx).collect();
            let term = e.mul(&self.minor_det(&rows[1..], &sub_cols));
            acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }
}

/// `Σ_i z_{offset+i} v_i`
pub fn linear_pencil(kraus: &[ExactMatrix], offset: usize, nvars: usize) -> Result<PolyMatrix> {
    let first = kraus.first().ok_or(Error::Empty("Kraus list"))?;
    let d = first.rows();
    let mut acc = PolyMatrix::constant(&ExactMatrix::zeros(d, d), nvars);
    for (i, v) in kraus.iter().enumerate() {
        if v.rows() != d || v.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.rows().max(v.cols()) });
        }
        acc = acc.add(&PolyMatrix::constant(v, nvars).scale_by(&Polynomial::var(nvars, offset + i)))?;
    }
    Ok(acc)
}

/// `B_p(z) = Π_{l=0}^{p−1} (Σ_{i<k} z_{kl+i} v_i)` in the ring of `kp`
/// variables, multiplied left to right.
pub fn build_bp(kraus: &[ExactMatrix], p: usize) -> Result<PolyMatrix> {
    if p == 0 {
        return Err(Error::Parse("p must be at least 1".into()));
    }
    let k = kraus.len();
    let d = kraus.first().ok_or(Error::Empty("Kraus list"))?.rows();
    let nvars = k * p;
    let mut acc = PolyMatrix::identity(d, nvars);
    for l in 0..p {
        acc = acc.mul(&linear_pencil(kraus, k * l, nvars)?)?;
    }
    Ok(acc)
}

/// Jacobian `∂ polys_i / ∂ z_j` evaluated exactly at `point` (rows follow
/// `polys`, columns follow variables).
pub fn jacobian_at(polys: &[Polynomial], point: &[Q]) -> Result<ExactMatrix> {
    let nvars = polys.first().map(|p| p.nvars()).unwrap_or(point.len());
    if point.len() != nvars {
        return Err(Error::DimensionMismatch { expected: nvars, got: point.len() });
    }
    let mut out = ExactMatrix::zeros(polys.len(), nvars);
    for (i, p) in polys.iter().enumerate() {
        for j in 0..nvars {
            out.set(i, j, p.derivative(j).evaluate(point)?);
        }
    }
    Ok(out)
}

/// Outcome of fraction-free elimination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Elimination {
    pub rank: usize,
    /// `(original row, column)` of each pivot, in elimination order.
    pub pivots: Vec<(usize, usize)>,
}

/// Bareiss elimination: every update is
/// `a_ij ← (a_kc a_ij − a_ic a_kj) / prev`, with `prev` the previous pivot.
/// Columns without a pivot are skipped, which yields the rank of a
/// rectangular matrix. Returns the reduced matrix and the row-swap count.
fn bareiss(m: &ExactMatrix) -> (Elimination, Vec<Vec<Q>>, usize) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.to_rows();
    let mut order: Vec<usize> = (0..rows).collect();
    let mut prev = Q::one();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut k = 0;
    for col in 0..cols {
        if k == rows {
            break;
        }
        let Some(r) = (k..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        if r != k {
            a.swap(r, k);
            order.swap(r, k);
            swaps += 1;
        }
        for i in (k + 1)..rows {
            for j in (col + 1)..cols {
                let num = &(&a[k][col] * &a[i][j]) - &(&a[i][col] * &a[k][j]);
                a[i][j] = &num / &prev;
            }
            a[i][col] = Q::zero();
        }
        pivots.push((order[k], col));
        prev = a[k][col].clone();
        k += 1;
    }
    (Elimination { rank: k, pivots }, a, swaps)
}

/// Exact rank with the pivot sequence.
pub fn exact_rank(m: &ExactMatrix) -> Elimination {
    bareiss(m).0
}

/// Exact determinant of a square matrix.
pub fn exact_determinant(m: &ExactMatrix) -> Result<Q> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch { expected: m.rows(), got: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Q::one());
    }
    let (elim, a, swaps) = bareiss(m);
    if elim.rank < n {
        return Ok(Q::zero());
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if swaps % 2 == 1 { -det } else { det })
}

/// Rank of the Jacobian of `polys` at `point`, with pivots.
pub fn jacobian_rank_at(polys: &[Polynomial], point: &[Q]) -> Result<Elimination> {
    Ok(exact_rank(&jacobian_at(polys, point)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    /// Cofactor determinant, independent of the elimination code.
    fn leibniz(m: &ExactMatrix) -> Q {
        let n = m.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = Q::zero();
        fn rec(k: usize, perm: &mut Vec<usize>, m: &ExactMatrix, total: &mut Q) {
            let n = perm.len();
            if k == n {
                let inversions =
                    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
                let mut t = Q::one();
                for (i, &p) in perm.iter().enumerate() {
                    t = &t * m.get(i, p);
                }
                if inversions % 2 == 1 {
                    t = -t;
                }
                *total += &t;
                return;
            }
            for i in k..n {
                perm.swap(k, i);
                rec(k + 1, perm, m, total);
                perm.swap(k, i);
            }
        }
        rec(0, &mut perm, m, &mut total);
        total
    }

    #[test]
    fn bareiss_rank_and_pivots() {
        let m = ExactMatrix::new(3, 4, [0, 1, 2, 3, 0, 2, 4, 6, 1, 0, 0, 1].iter().map(|&x| q(x)).collect()).unwrap();
        let e = exact_rank(&m);
        assert_eq!(e.rank, 2);
        assert_eq!(e.pivots, vec![(2, 0), (1, 1)]);
        assert_eq!(exact_rank(&ExactMatrix::zeros(3, 3)).rank, 0);
        assert_eq!(exact_determinant(&ExactMatrix::identity(4)).unwrap(), q(1));
    }

    #[test]
    fn pencil_and_bp_small_cases() {
        let v1 = ExactMatrix::from_integers(2, &[1, 2, 3, 4]).unwrap();
        let v2 = ExactMatrix::from_integers(2, &[0, 1, 1, 0]).unwrap();
        let b1 = build_bp(&[v1.clone(), v2.clone()], 1).unwrap();
        assert_eq!(b1, linear_pencil(&[v1, v2], 0, 2).unwrap());
        assert_eq!(b1.get(0, 1).coefficient(&[1, 0]), q(2));
        assert_eq!(b1.get(0, 1).coefficient(&[0, 1]), q(1));

        let b2 = build_bp(&[ExactMatrix::identity(2)], 2).unwrap();
        assert_eq!(b2.get(0, 0).coefficient(&[1, 1]), q(1));
        assert_eq!(b2.get(0, 0).num_terms(), 1);
        assert!(b2.get(0, 1).is_zero());
        assert!(build_bp(&[ExactMatrix::identity(2)], 0).is_err());
    }

    #[test]
    fn polynomial_determinant() {
        // det [[x, y], [y, x]] = x² − y²
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let m = linear_pencil(&[ExactMatrix::identity(2), ExactMatrix::from_integers(2, &[0, 1, 1, 0]).unwrap()], 0, 2)
            .unwrap();
        assert_eq!(m.determinant().unwrap(), x.mul(&x).sub(&y.mul(&y)));
    }

    proptest! {
        #[test]
        fn bareiss_determinant_matches_leibniz(entries in prop::collection::vec(-6i64..6, 16)) {
            let m = ExactMatrix::from_integers(4, &entries).unwrap();
            prop_assert_eq!(exact_determinant(&m).unwrap(), leibniz(&m));
        }

        #[test]
        fn rank_bounded_by_shape(entries in prop::collection::vec(-2i64..2, 15)) {
            let m = ExactMatrix::new(3, 5, entries.iter().map(|&x| q(x)).collect()).unwrap();
            let e = exact_rank(&m);
            prop_assert!(e.rank <= 3);
            prop_assert_eq!(e.pivots.len(), e.rank);
        }
    }
}
