//! Small direct solvers: tridiagonal (Thomas) and banded LU with partial
//! pivoting, plus a bordered solve used by the continuation corrector.

use crate::error::{Error, Result};
use faer::Mat;

/// Tridiagonal matrix; `lower[0]` and `upper[m-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), diag.len());
        assert_eq!(upper.len(), diag.len());
        Tridiagonal { lower, diag, upper }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < m {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> Tridiagonal {
        let m = self.len();
        let mut lower = vec![0.0; m];
        let mut upper = vec![0.0; m];
        if m > 1 {
            // entry (i, i+1) becomes (i+1, i)
            lower[1..].copy_from_slice(&self.upper[..m - 1]);
            upper[..m - 1].copy_from_slice(&self.lower[1..]);
        }
        Tridiagonal::new(lower, self.diag.clone(), upper)
    }

    pub fn shifted(&self, shift: f64) -> Tridiagonal {
        let mut t = self.clone();
        t.diag.iter_mut().for_each(|d| *d += shift);
        t
    }

    pub fn add_diagonal(&mut self, values: &[f64]) {
        for (d, v) in self.diag.iter_mut().zip(values) {
            *d += v;
        }
    }

    /// `min_i (d_i - |l_i| - |u_i|)`; a positive value certifies strict
    /// diagonal dominance by rows.
    pub fn dominance_margin(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|i| {
                let l = if i > 0 { self.lower[i].abs() } else { 0.0 };
                let u = if i + 1 < m { self.upper[i].abs() } else { 0.0 };
                self.diag[i] - l - u
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Off-diagonal entries are all non-positive.
    pub fn is_z_matrix(&self) -> bool {
        let m = self.len();
        (1..m).all(|i| self.lower[i] <= 0.0) && (0..m.saturating_sub(1)).all(|i| self.upper[i] <= 0.0)
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|i| {
                let l = if i > 0 { self.lower[i].abs() } else { 0.0 };
                let u = if i + 1 < m { self.upper[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + u
            })
            .fold(0.0, f64::max)
    }

    /// Thomas algorithm, no pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.len();
        assert_eq!(rhs.len(), m);
        let mut c = vec![0.0; m];
        let mut g = vec![0.0; m];
        let mut piv = self.diag[0];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Singular(0));
        }
        c[0] = if m > 1 { self.upper[0] / piv } else { 0.0 };
        g[0] = rhs[0] / piv;
        for i in 1..m {
            piv = self.diag[i] - self.lower[i] * c[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return Err(Error::Singular(i));
            }
            c[i] = if i + 1 < m { self.upper[i] / piv } else { 0.0 };
            g[i] = (rhs[i] - self.lower[i] * g[i - 1]) / piv;
        }
        for i in (0..m - 1).rev() {
            g[i] -= c[i] * g[i + 1];
        }
        Ok(g)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let m = self.len();
        let mut a = Mat::zeros(m, m);
        for i in 0..m {
            a[(i, i)] = self.diag[i];
            if i > 0 {
                a[(i, i - 1)] = self.lower[i];
            }
            if i + 1 < m {
                a[(i, i + 1)] = self.upper[i];
            }
        }
        a
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Row `i` keeps
/// columns `i-kl ..= i+ku+kl` so that pivoting fill-in fits in place.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` is outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                a[(i, j)] = self.data[self.idx(i, j)];
            }
        }
        a
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut lu = self.clone();
        let mut perm = vec![0usize; n];
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.data[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            perm[k] = p;
            if best <= scale * 1e-300 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = lu.idx(k, j);
                    let b = lu.idx(p, j);
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let factor = lu.data[ik] / pivot;
                lu.data[ik] = factor;
                if factor != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = lu.data[lu.idx(k, j)];
                        let ij = lu.idx(i, j);
                        lu.data[ij] -= factor * kj;
                    }
                }
            }
        }
        Ok(BandLu { lu, perm })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    perm: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        let kl = self.lu.kl;
        let ku = self.lu.ku;
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.perm[k];
            if p != k {
                x.swap(k, p);
            }
            let last_row = (k + kl).min(n - 1);
            for i in k + 1..=last_row {
                x[i] -= self.lu.data[self.lu.idx(i, k)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=last_col {
                s -= self.lu.data[self.lu.idx(k, j)] * x[j];
            }
            x[k] = s / self.lu.data[self.lu.idx(k, k)];
        }
        x
    }
}

/// Solves `[A b; c^T d] [x; y] = [f; g]` by block elimination with one
/// step of iterative refinement on the full bordered system.
pub fn solve_bordered(
    a: &BandMatrix,
    lu: &BandLu,
    b: &[f64],
    c: &[f64],
    d: f64,
    f: &[f64],
    g: f64,
) -> Result<(Vec<f64>, f64)> {
    let x2 = lu.solve(b);
    let denom = d - dot(c, &x2);
    let eliminate = |f: &[f64], g: f64| -> Result<(Vec<f64>, f64)> {
        let x1 = lu.solve(f);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let y = (g - dot(c, &x1)) / denom;
        let x: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| p - y * q).collect();
        Ok((x, y))
    };
    let (mut x, mut y) = eliminate(f, g)?;
    let ax = a.matvec(&x);
    let rf: Vec<f64> = (0..f.len()).map(|i| f[i] - ax[i] - b[i] * y).collect();
    let rg = g - dot(c, &x) - d * y;
    let (dx, dy) = eliminate(&rf, rg)?;
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += di;
    }
    y += dy;
    if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularJacobian);
    }
    Ok((x, y))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thomas_matches_dense() {
        let t = Tridiagonal::new(
            vec![0.0, -1.0, -2.0, 0.5],
            vec![4.0, 5.0, 6.0, 3.0],
            vec![1.0, -1.0, 0.3, 0.0],
        );
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = t.solve(&rhs).unwrap();
        let back = t.matvec(&x);
        for (a, b) in back.iter().zip(&rhs) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        let b = Mat::from_fn(4, 1, |i, _| rhs[i]);
        let dense = faer::linalg::solvers::Solve::solve(&t.to_dense().partial_piv_lu(), &b);
        for i in 0..4 {
            assert_abs_diff_eq!(x[i], dense[(i, 0)], epsilon = 1e-13);
        }
    }

    #[test]
    fn transpose_identity() {
        let t = Tridiagonal::new(vec![0.0, 2.0, 3.0], vec![1.0, 1.0, 1.0], vec![7.0, 5.0, 0.0]);
        assert_eq!(t.transpose().to_dense(), t.to_dense().transpose());
    }

    #[test]
    fn band_lu_needs_pivoting() {
        // zero leading diagonal entry forces a row swap
        let mut a = BandMatrix::zeros(4, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        a.add(1, 2, -1.0);
        a.add(2, 1, 3.0);
        a.add(2, 2, 1.0);
        a.add(2, 3, 2.0);
        a.add(3, 2, 1.0);
        a.add(3, 3, 4.0);
        let lu = a.factor().unwrap();
        let rhs = [1.0, -2.0, 0.5, 3.0];
        let x = lu.solve(&rhs);
        let back = a.matvec(&x);
        for (p, q) in back.iter().zip(&rhs) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn bordered_solve_with_singular_block() {
        // A singular, bordered system regular: A = diag(1, 0), b = e2, c = e2, d = 0
        let mut a = BandMatrix::zeros(2, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1e-14);
        let lu = a.factor().unwrap();
        let (x, y) = solve_bordered(&a, &lu, &[0.0, 1.0], &[1.0, 1.0], 0.0, &[2.0, 3.0], 5.0).unwrap();
        // x0 = 2, x0 + x1 = 5 -> x1 = 3, then 1e-14*3 + y = 3
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(y, 3.0, epsilon = 1e-8);
    }

    #[test]
    fn singular_tridiagonal_is_reported() {
        let t = Tridiagonal::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]);
        assert!(matches!(t.solve(&[1.0, 1.0]), Err(Error::Singular(1))));
    }
}
