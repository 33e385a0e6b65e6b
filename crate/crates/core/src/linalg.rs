//! Small numerical kernels: Gauss-Legendre rules, banded SPD factorization,
//! and a dense Jacobi eigensolver for Rayleigh-Ritz projections.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        // roots computed in f64 then narrowed
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for k in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    /// Integrates `g` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut g: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * g(mid + half * *x);
        }
        acc * half
    }

    /// Integrates two functions sharing one evaluation.
    pub fn integrate_pair<F: FnMut(T) -> (T, T)>(&self, a: T, b: T, mut g: F) -> (T, T) {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let (mut p, mut q) = (T::zero(), T::zero());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let (u, v) = g(mid + half * *x);
            p = p + *w * u;
            q = q + *w * v;
        }
        (p * half, q * half)
    }

    /// Composite rule over consecutive breakpoints, each interval split into `panels` pieces.
    pub fn integrate_pieces<F: FnMut(T) -> T>(&self, breaks: &[T], panels: usize, mut g: F) -> T {
        let mut acc = T::zero();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let step = (b - a) / T::from_usize_lossy(panels);
            for k in 0..panels {
                let lo = a + step * T::from_usize_lossy(k);
                let hi = if k + 1 == panels { b } else { lo + step };
                acc = acc + self.integrate(lo, hi, &mut g);
            }
        }
        acc
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Symmetric banded matrix, lower band stored row by row.
#[derive(Debug, Clone)]
pub struct BandedSym<T> {
    n: usize,
    bw: usize,
    // row i holds columns i-bw ..= i at offsets 0 ..= bw
    data: Vec<T>,
    factored: bool,
}

impl<T: Real> BandedSym<T> {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![T::zero(); n * (bw + 1)],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw + j - i)
    }

    /// Adds `v` to entry `(i, j)` (and its mirror).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        assert!(r - c <= self.bw, "entry outside band");
        let k = self.slot(r, c);
        self.data[k] = self.data[k] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bw {
            return T::zero();
        }
        self.data[self.slot(r, c)]
    }

    /// `y = A x` using the unfactored matrix.
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        assert!(!self.factored);
        for v in y.iter_mut() {
            *v = T::zero();
        }
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                y[i] = y[i] + a * x[j];
                y[j] = y[j] + a * x[i];
            }
            y[i] = y[i] + self.data[self.slot(i, i)] * x[i];
        }
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn row_sum_norm(&self) -> T {
        let mut sums = vec![T::zero(); self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)].abs();
                sums[i] = sums[i] + a;
                sums[j] = sums[j] + a;
            }
            sums[i] = sums[i] + self.data[self.slot(i, i)].abs();
        }
        sums.into_iter().fold(T::zero(), T::max)
    }

    /// In-place Cholesky factorization `A = L L^T`.
    pub fn cholesky(mut self) -> Result<Self> {
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = self.data[self.slot(i, j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    sum = sum - self.data[self.slot(i, k)] * self.data[self.slot(j, k)];
                }
                if i == j {
                    if !(sum > T::zero()) {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    let k = self.slot(i, i);
                    self.data[k] = sum.sqrt();
                } else {
                    let k = self.slot(i, j);
                    self.data[k] = sum / self.data[self.slot(j, j)];
                }
            }
        }
        self.factored = true;
        Ok(self)
    }

    /// Solves `A x = b` in place with a factored matrix.
    pub fn solve(&self, b: &mut [T]) {
        assert!(self.factored, "solve requires cholesky()");
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s = s - self.data[self.slot(i, k)] * b[k];
            }
            b[i] = s / self.data[self.slot(i, i)];
        }
        for i in (0..self.n).rev() {
            let s = b[i] / self.data[self.slot(i, i)];
            b[i] = s;
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                b[k] = b[k] - self.data[self.slot(i, k)] * s;
            }
        }
    }
}

/// Eigen-decomposition of a small dense symmetric matrix (row-major `n x n`)
/// by cyclic Jacobi rotations. Returns ascending eigenvalues and the
/// eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), n * n);
    let mut a = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + a[i * n + j] * a[i * n + j];
            }
        }
        let diag: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= T::epsilon() * T::epsilon() * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].partial_cmp(&a[y * n + y]).unwrap());
    let vals = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new] = v[r * n + old];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        let gl = GaussLegendre::<f64>::new(6);
        // degree 11 exact
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(11) - 3.0 * x.powi(4));
        let want = (2f64.powi(12) - 1.0) / 12.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - want).abs() < 1e-10, "{v} vs {want}");
        let sum: f64 = gl.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn banded_cholesky_solves_tridiagonal() {
        let n = 50;
        let mut a = BandedSym::<f64>::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.5);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&x, &mut b);
        let f = a.cholesky().unwrap();
        f.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = BandedSym::<f64>::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(matches!(a.cholesky(), Err(Error::NotPositiveDefinite { pivot: 1 })));
    }

    #[test]
    fn jacobi_eigen_of_known_matrix() {
        // eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2 - sqrt2, 2, 2 + sqrt2
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        let r2 = 2f64.sqrt();
        assert!((vals[0] - (2.0 - r2)).abs() < 1e-13);
        assert!((vals[1] - 2.0).abs() < 1e-13);
        assert!((vals[2] - (2.0 + r2)).abs() < 1e-13);
        // A v = lambda v for the first column
        for r in 0..3 {
            let av: f64 = (0..3).map(|c| a[r * 3 + c] * vecs[c * 3]).sum();
            assert!((av - vals[0] * vecs[r * 3]).abs() < 1e-12);
        }
    }
}
