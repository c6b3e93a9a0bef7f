use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{format_rational, int, is_integral, lcm_of_denominators, Rational};
use crate::error::{Error, Result};

/// Dense row-major rational matrix. Zero-row matrices are allowed (e.g. the
/// orthogonal complement of a full-rank lattice).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(RatMatrix {
            rows: nrows,
            cols,
            data,
        })
    }

    /// Convenience constructor from small integer literals.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect();
        Self::from_rows(rows, cols).expect("ragged integer literal")
    }

    pub fn from_bigint_rows(rows: &[Vec<BigInt>], cols: usize) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().cloned().map(Rational::from_integer).collect())
            .collect();
        Self::from_rows(rows, cols)
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

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rational]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.row_iter().map(|r| r.to_vec()).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(is_integral)
    }

    /// Integer rows; fails if any entry is fractional.
    pub fn to_bigint_rows(&self) -> Result<Vec<Vec<BigInt>>> {
        if !self.is_integral() {
            return Err(Error::invalid("matrix has non-integer entries"));
        }
        Ok(self
            .row_iter()
            .map(|r| r.iter().map(|x| x.numer().clone()).collect())
            .collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = &out.data[idx] + a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `x^T M` for a row vector `x` of length `rows`.
    pub fn left_mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += xi * m;
            }
        }
        out
    }

    /// `M v` for a column vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        self.row_iter().map(|r| super::dot(r, v)).collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Gram matrix `M M^T`.
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = super::dot(self.row(i), self.row(j));
                g.data[j * self.rows + i] = v.clone();
                g.data[i * self.rows + j] = v;
            }
        }
        g
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let rows = self
            .row_iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect();
        Self::from_rows(rows, cols.len()).expect("column selection keeps widths")
    }

    /// Smallest positive integer `D` with `D * M` integral.
    pub fn common_denominator(&self) -> BigInt {
        lcm_of_denominators(self.data.iter())
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix{}x{}[", self.rows, self.cols)?;
        for (i, r) in self.row_iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let cells: Vec<String> = r.iter().map(format_rational).collect();
            write!(f, "{}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Reduced row echelon form. Returns the reduced rows (zero rows dropped) and the
/// pivot column of each remaining row.
pub fn rref(rows: &[Vec<Rational>], cols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(&m.to_rows(), m.cols).1.len()
}

/// Exact determinant of a square matrix; `SingularMatrix` when it vanishes.
pub fn determinant(m: &RatMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "determinant of non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let mut a = m.to_rows();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Err(Error::SingularMatrix);
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let pivot = a[c][c].clone();
        det *= &pivot;
        let pivot_row = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pivot;
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x -= &f * y;
            }
        }
    }
    Ok(det)
}

pub fn inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::invalid("inverse of non-square matrix"));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(RatMatrix::zeros(0, 0));
    }
    let aug: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    let (red, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(Error::SingularMatrix);
    }
    let rows = red.into_iter().map(|r| r[n..].to_vec()).collect();
    RatMatrix::from_rows(rows, n)
}

/// Solves `x^T B = t`. Returns `None` when `t` is outside the row span of `B`;
/// free variables (dependent rows) are set to zero.
pub fn solve(b: &RatMatrix, t: &[Rational]) -> Result<Option<Vec<Rational>>> {
    if t.len() != b.cols {
        return Err(Error::invalid(format!(
            "vector of length {} against matrix with {} columns",
            t.len(),
            b.cols
        )));
    }
    let k = b.rows;
    // B^T x = t, augmented
    let aug: Vec<Vec<Rational>> = (0..b.cols)
        .map(|j| {
            let mut row: Vec<Rational> = (0..k).map(|i| b.get(i, j).clone()).collect();
            row.push(t[j].clone());
            row
        })
        .collect();
    let (red, pivots) = rref(&aug, k + 1);
    if pivots.last() == Some(&k) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); k];
    for (row, &p) in red.iter().zip(&pivots) {
        x[p] = row[k].clone();
    }
    Ok(Some(x))
}

/// Rows generating the dual of the lattice spanned by the rows of `b`, inside
/// `span(b)`: `D = (B B^T)^{-1} B`, which is `B^{-T}` for square `B`.
pub fn dual_basis(b: &RatMatrix) -> Result<RatMatrix> {
    if b.rows > b.cols {
        return Err(Error::SingularMatrix);
    }
    let g_inv = inverse(&b.gram())?;
    g_inv.mul(b)
}

/// Basis of `{x : B x = 0}`, each row scaled to a primitive integer vector.
pub fn orthogonal_complement_basis(b: &RatMatrix) -> Result<RatMatrix> {
    let (red, pivots) = rref(&b.to_rows(), b.cols);
    if pivots.len() != b.rows {
        return Err(Error::invalid("basis rows are linearly dependent"));
    }
    let n = b.cols;
    let mut out = Vec::new();
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Rational::zero(); n];
        x[f] = Rational::one();
        for (row, &p) in red.iter().zip(&pivots) {
            x[p] = -row[f].clone();
        }
        out.push(primitive_integer(&x));
    }
    RatMatrix::from_rows(out, n)
}

fn primitive_integer(x: &[Rational]) -> Vec<Rational> {
    let den = lcm_of_denominators(x.iter());
    let ints: Vec<BigInt> = x.iter().map(|v| (v * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let g = if g.is_zero() { BigInt::one() } else { g };
    // first nonzero entry positive
    let sign = match ints.iter().find(|v| !v.is_zero()) {
        Some(v) if v.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|v| Rational::from_integer(v / &g * &sign))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{dot, ratio};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64_rows(rows)
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&m(&[&[1, 1], &[0, 2]])).unwrap(), int(2));
        assert_eq!(determinant(&RatMatrix::identity(5)).unwrap(), int(1));
        // cofactor expansion by hand: 2*1 - 0*1 = 2
        assert_eq!(determinant(&m(&[&[2, 0], &[1, 1]])).unwrap(), int(2));
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        assert!(matches!(
            determinant(&m(&[&[1, 2], &[2, 4]])),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn solve_examples() {
        let b = m(&[&[1, 0, 2], &[0, 1, 3]]);
        assert_eq!(
            solve(&b, &[int(1), int(1), int(5)]).unwrap(),
            Some(vec![int(1), int(1)])
        );
        // (0,0,1) has a nonzero component along (2,3,-1)
        assert_eq!(solve(&b, &[int(0), int(0), int(1)]).unwrap(), None);
        assert_eq!(
            solve(&RatMatrix::identity(2), &[ratio(1, 2), int(3)]).unwrap(),
            Some(vec![ratio(1, 2), int(3)])
        );
        assert!(solve(&b, &[int(1)]).is_err());
    }

    #[test]
    fn dual_examples() {
        let two = m(&[&[2, 0], &[0, 2]]);
        assert_eq!(
            dual_basis(&two).unwrap().to_rows(),
            vec![vec![ratio(1, 2), int(0)], vec![int(0), ratio(1, 2)]]
        );
        assert_eq!(
            dual_basis(&RatMatrix::identity(3)).unwrap(),
            RatMatrix::identity(3)
        );
        let b = m(&[&[1, 1], &[0, 2]]);
        let d = dual_basis(&b).unwrap();
        assert_eq!(
            d.to_rows(),
            vec![vec![int(1), int(0)], vec![ratio(-1, 2), ratio(1, 2)]]
        );
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { int(1) } else { int(0) };
                assert_eq!(dot(d.row(i), b.row(j)), expect);
            }
        }
        assert!(matches!(
            dual_basis(&m(&[&[1, 1], &[2, 2]])),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn complement_examples() {
        let knap = m(&[&[1, 0, 2], &[0, 1, 3]]);
        let c = orthogonal_complement_basis(&knap).unwrap();
        assert_eq!(c.rows(), 1);
        for r in knap.row_iter() {
            assert_eq!(dot(r, c.row(0)), int(0));
        }
        // proportional to (2,3,-1)
        assert_eq!(c.row(0), &[int(2), int(3), int(-1)]);

        assert_eq!(
            orthogonal_complement_basis(&RatMatrix::identity(4))
                .unwrap()
                .rows(),
            0
        );

        let e1 = m(&[&[1, 0, 0]]);
        let c = orthogonal_complement_basis(&e1).unwrap();
        assert_eq!(
            c.to_rows(),
            vec![vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]]
        );

        assert!(orthogonal_complement_basis(&m(&[&[1, 2, 3], &[2, 4, 6]])).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let b = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = inverse(&b).unwrap();
        assert_eq!(b.mul(&inv).unwrap(), RatMatrix::identity(3));
    }
}
