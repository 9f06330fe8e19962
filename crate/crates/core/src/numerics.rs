//! Grid, differencing, quadrature and small linear-algebra kernels shared by
//! the solvers.

use crate::error::{Result, WaveError};

/// Uniform grid `x_i = x0 + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || n < 3 {
            return Err(WaveError::Argument(format!("invalid grid: dx = {dx}, n = {n}")));
        }
        Ok(Self { x0, dx, n })
    }

    /// Symmetric grid on `[-half_length, half_length]` with spacing close to
    /// `dx` and a node at zero.
    pub fn symmetric(half_length: f64, dx: f64) -> Result<Self> {
        let half = (half_length / dx).round().max(1.0) as usize;
        Self::new(-(half as f64) * dx, dx, 2 * half + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }
}

/// Centered first derivative; second-order one-sided stencils at the ends.
pub fn d1(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    out
}

/// Centered second derivative; second-order one-sided stencils at the ends.
pub fn d2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 4 {
        return out;
    }
    let h2 = dx * dx;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    out
}

/// Fourth-order centered first derivative, falling back to second order
/// near the ends.
pub fn d1_fourth(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = d1(f, dx);
    for i in 2..n.saturating_sub(2) {
        out[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * dx);
    }
    out
}

/// Fourth-order centered second derivative, falling back to second order
/// near the ends.
pub fn d2_fourth(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = d2(f, dx);
    let h2 = dx * dx;
    for i in 2..n.saturating_sub(2) {
        out[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / (12.0 * h2);
    }
    out
}

/// Composite trapezoid rule on a uniform grid. Sums left to right.
pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..n - 1].iter().sum();
    dx * (inner + 0.5 * (f[0] + f[n - 1]))
}

/// Composite Simpson rule; falls back to a trapezoid on the last interval
/// when the number of intervals is odd.
pub fn simpson(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    if n < 3 {
        return trapezoid(f, dx);
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = f[0] + f[even];
    for (i, fi) in f.iter().enumerate().take(even).skip(1) {
        s += if i % 2 == 1 { 4.0 * fi } else { 2.0 * fi };
    }
    let mut total = s * dx / 3.0;
    if even < intervals {
        total += 0.5 * dx * (f[n - 2] + f[n - 1]);
    }
    total
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solves a tridiagonal system without pivoting (Thomas algorithm).
/// `lower[0]` and `upper[n-1]` are ignored. Suitable for diagonally dominant
/// or symmetric positive definite matrices.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(WaveError::Argument("zero pivot in tridiagonal solve".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(WaveError::Argument("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, stored with
/// room for the fill-in produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        // column offset relative to row, shifted so that the band starts at 0
        row * self.width + (col + self.kl - row)
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(col + self.kl >= row && col <= row + self.ku, "entry ({row}, {col}) outside band");
        let k = self.idx(row, col);
        self.data[k] = value;
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        assert!(col + self.kl >= row && col <= row + self.ku, "entry ({row}, {col}) outside band");
        let k = self.idx(row, col);
        self.data[k] += value;
    }

    /// Gaussian elimination with partial pivoting; consumes the matrix.
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let kl = self.kl;
        let max_upper = kl + self.ku;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut pivot_row = k;
            let mut pivot_val = self.data[self.idx(k, k)].abs();
            for r in k + 1..=last_row {
                let val = self.data[self.idx(r, k)].abs();
                if val > pivot_val {
                    pivot_val = val;
                    pivot_row = r;
                }
            }
            if pivot_val == 0.0 || !pivot_val.is_finite() {
                return Err(WaveError::Argument(format!("singular banded matrix at column {k}")));
            }
            let last_col = (k + max_upper).min(n - 1);
            if pivot_row != k {
                for c in k..=last_col {
                    let a = self.idx(k, c);
                    let p = self.idx(pivot_row, c);
                    self.data.swap(a, p);
                }
                b.swap(k, pivot_row);
            }
            let pivot = self.data[self.idx(k, k)];
            for r in k + 1..=last_row {
                let factor = self.data[self.idx(r, k)] / pivot;
                if factor == 0.0 {
                    continue;
                }
                let ir = self.idx(r, k);
                self.data[ir] = 0.0;
                for c in k + 1..=last_col {
                    let src = self.data[self.idx(k, c)];
                    let dst = self.idx(r, c);
                    self.data[dst] -= factor * src;
                }
                b[r] -= factor * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let last_col = (k + max_upper).min(n - 1);
            let mut s = b[k];
            for c in k + 1..=last_col {
                s -= self.data[self.idx(k, c)] * x[c];
            }
            x[k] = s / self.data[self.idx(k, k)];
        }
        Ok(x)
    }
}

/// Least-squares line `y = intercept + slope·x` with coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_orders() {
        let errs: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let g = UniformGrid::new(0.0, h, (2.0 / h) as usize + 1).unwrap();
                let f: Vec<f64> = g.points().iter().map(|x| x.sin()).collect();
                let e1 = d1(&f, h).iter().zip(g.points()).map(|(d, x)| (d - x.cos()).abs()).fold(0.0, f64::max);
                let e2 = d2(&f, h).iter().zip(g.points()).map(|(d, x)| (d + x.sin()).abs()).fold(0.0, f64::max);
                (e1, e2)
            })
            .collect();
        for w in errs.windows(2) {
            assert!(((w[0].0 / w[1].0).log2() - 2.0).abs() < 0.3);
            assert!((w[0].1 / w[1].1).log2() > 1.7);
        }
    }

    #[test]
    fn quadrature() {
        let g = UniformGrid::new(0.0, 0.01, 101).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| x * x).collect();
        assert!((simpson(&f, 0.01) - 1.0 / 3.0).abs() < 1e-12);
        assert!((trapezoid(&f, 0.01) - 1.0 / 3.0).abs() < 2e-5);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 6;
        let lower = vec![0.0, -1.0, -1.0, -1.0, -1.0, -1.0];
        let diag = vec![4.0; n];
        let upper = vec![-1.0, -1.0, -1.0, -1.0, -1.0, 0.0];
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = diag[i] * x_true[i];
                if i > 0 {
                    s += lower[i] * x_true[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x_true[i + 1];
                }
                s
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn banded_solver_with_pivoting() {
        // zero diagonal entry forces a row swap
        let n = 7;
        let (kl, ku) = (2, 2);
        let mut m = BandedMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let val = if i == j && i == 0 { 0.0 } else { 1.0 / (1.0 + (i as f64 - 2.0 * j as f64).abs()) };
                m.set(i, j, val);
                dense[i][j] = val;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum()).collect();
        let x = m.solve(&rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14 && (fit.intercept - 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }
}
