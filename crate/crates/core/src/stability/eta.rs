//! Radial cutoffs `eta(rho)` and the one-dimensional functional
//! `\int rho^(2m-2) { eta'^2 - (m-1) eta^2 / rho^2 }`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::GaussLegendre;
use crate::scalar::Real;

/// A Lipschitz function of `rho >= 0` with compact support in `(0, inf)`,
/// smooth between consecutive breakpoints.
pub trait Eta<T: Real> {
    fn value(&self, rho: T) -> T;
    fn derivative(&self, rho: T) -> T;
    /// Increasing breakpoints; the first and last bound the support.
    fn breakpoints(&self) -> Vec<T>;
}

/// The four-branch family: linear ramp on `[rho1, 2 rho1]`, plateau up to 1,
/// then `rho^-alpha - rho2^-alpha` down to zero at `rho2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaFamily<T> {
    pub rho1: T,
    pub rho2: T,
    pub alpha: T,
}

impl<T: Real> EtaFamily<T> {
    pub fn new(rho1: T, rho2: T, alpha: T) -> Result<Self> {
        let two = T::lit(2.0);
        if !(rho1 > T::zero() && two * rho1 < T::one() && rho2 > T::one()) || !rho2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta family needs 0 < 2 rho1 < 1 < rho2, got rho1 = {rho1}, rho2 = {rho2}"
            )));
        }
        if !(alpha > T::lit(0.5) && alpha < T::one()) {
            return Err(Error::InvalidParameter(format!("eta family needs 1/2 < alpha < 1, got {alpha}")));
        }
        Ok(Self { rho1, rho2, alpha })
    }

    fn plateau(&self) -> T {
        T::one() - self.rho2.powf(-self.alpha)
    }

    /// Closed-form value of [`asymptotic_functional`] from antiderivatives of
    /// the power functions making up each branch.
    pub fn asymptotic_functional_exact(&self, m: usize) -> T {
        let k = T::from_usize_lossy(2 * m - 2);
        let c = T::from_usize_lossy(m - 1);
        let (r1, r2, al) = (self.rho1, self.rho2, self.alpha);
        let a = self.plateau();
        let two = T::lit(2.0);
        let p = |lo: T, hi: T, e: T| power_integral(lo, hi, e);
        // ramp: eta = a (rho - r1) / r1
        let ramp_grad = a * a / (r1 * r1) * p(r1, two * r1, k);
        let ramp_pot = if m == 1 {
            T::zero()
        } else {
            c * a * a / (r1 * r1)
                * (p(r1, two * r1, k) - two * r1 * p(r1, two * r1, k - T::one())
                    + r1 * r1 * p(r1, two * r1, k - two))
        };
        let plateau_pot = if m == 1 { T::zero() } else { c * a * a * p(two * r1, T::one(), k - two) };
        // tail: eta = rho^-al - r2^-al
        let tail_grad = al * al * p(T::one(), r2, k - two * al - two);
        let q = r2.powf(-al);
        let tail_pot = if m == 1 {
            T::zero()
        } else {
            c * (p(T::one(), r2, k - two - two * al) - two * q * p(T::one(), r2, k - two - al)
                + q * q * p(T::one(), r2, k - two))
        };
        ramp_grad - ramp_pot - plateau_pot + tail_grad - tail_pot
    }
}

impl<T: Real> Eta<T> for EtaFamily<T> {
    fn value(&self, rho: T) -> T {
        let two = T::lit(2.0);
        if rho <= self.rho1 || rho >= self.rho2 {
            T::zero()
        } else if rho <= two * self.rho1 {
            self.plateau() * (rho - self.rho1) / self.rho1
        } else if rho <= T::one() {
            self.plateau()
        } else {
            rho.powf(-self.alpha) - self.rho2.powf(-self.alpha)
        }
    }

    fn derivative(&self, rho: T) -> T {
        let two = T::lit(2.0);
        if rho <= self.rho1 || rho >= self.rho2 {
            T::zero()
        } else if rho <= two * self.rho1 {
            self.plateau() / self.rho1
        } else if rho <= T::one() {
            T::zero()
        } else {
            -self.alpha * rho.powf(-self.alpha - T::one())
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![self.rho1, T::lit(2.0) * self.rho1, T::one(), self.rho2]
    }
}

/// Piecewise linear `eta` through `(knots[k], values[k])`, zero outside
/// `[knots[0], knots[last]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearEta<T> {
    knots: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> PiecewiseLinearEta<T> {
    /// The end values are forced to zero so that `eta` is Lipschitz.
    pub fn new(knots: Vec<T>, mut values: Vec<T>) -> Result<Self> {
        if knots.len() < 3 || knots.len() != values.len() {
            return Err(Error::InvalidParameter("piecewise linear eta needs at least 3 matching knots".into()));
        }
        if !(knots[0] > T::zero()) || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("eta knots must be positive and increasing".into()));
        }
        let last = values.len() - 1;
        values[0] = T::zero();
        values[last] = T::zero();
        Ok(Self { knots, values })
    }

    fn segment(&self, rho: T) -> Option<usize> {
        let n = self.knots.len();
        if rho < self.knots[0] || rho >= self.knots[n - 1] {
            return None;
        }
        Some(self.knots.partition_point(|k| *k <= rho) - 1)
    }
}

impl<T: Real> Eta<T> for PiecewiseLinearEta<T> {
    fn value(&self, rho: T) -> T {
        match self.segment(rho) {
            None => T::zero(),
            Some(k) => {
                let w = (rho - self.knots[k]) / (self.knots[k + 1] - self.knots[k]);
                self.values[k] + w * (self.values[k + 1] - self.values[k])
            }
        }
    }

    fn derivative(&self, rho: T) -> T {
        match self.segment(rho) {
            None => T::zero(),
            Some(k) => (self.values[k + 1] - self.values[k]) / (self.knots[k + 1] - self.knots[k]),
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        self.knots.clone()
    }
}

/// `rho -> eta(lambda rho)`.
#[derive(Debug, Clone)]
pub struct Dilated<E, T> {
    pub inner: E,
    pub lambda: T,
}

impl<T: Real, E: Eta<T>> Eta<T> for Dilated<E, T> {
    fn value(&self, rho: T) -> T {
        self.inner.value(self.lambda * rho)
    }

    fn derivative(&self, rho: T) -> T {
        self.lambda * self.inner.derivative(self.lambda * rho)
    }

    fn breakpoints(&self) -> Vec<T> {
        self.inner.breakpoints().into_iter().map(|b| b / self.lambda).collect()
    }
}

/// `\int_0^inf rho^(2m-2) { eta'^2 - (m-1) eta^2 / rho^2 } d rho` by
/// Gauss-Legendre on geometrically graded panels between breakpoints.
pub fn asymptotic_functional<T: Real, E: Eta<T> + ?Sized>(eta: &E, m: usize) -> T {
    let gl = GaussLegendre::<T>::new(12);
    let k = (2 * m - 2) as i32;
    let c = T::from_usize_lossy(m - 1);
    let integrand = |rho: T| {
        let e = eta.value(rho);
        let d = eta.derivative(rho);
        rho.powi(k) * d * d - c * rho.powi(k - 2) * e * e
    };
    let breaks = eta.breakpoints();
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // panels with ratio at most 1.25 resolve the power-law branches
        let ratio = (hi / lo).ln() / T::lit(1.25f64.ln());
        let n = ratio.ceil().to_usize().unwrap_or(1).clamp(4, 4000);
        let q = (hi / lo).powf(T::one() / T::from_usize_lossy(n));
        let mut a = lo;
        for j in 0..n {
            let b = if j + 1 == n { hi } else { a * q };
            total = total + gl.integrate(a, b, integrand);
            a = b;
        }
    }
    total
}

/// `(2m-3)^2 / 4 - (m-1)`: the Hardy constant of the weight `rho^(2m-2)`
/// minus the coefficient of the negative term. Negative means instability of
/// the separable ansatz.
pub fn hardy_margin<T: Real>(m: usize) -> Result<T> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("hardy margin needs m >= 2, got {m}")));
    }
    let d = T::from_usize_lossy(2 * m) - T::lit(3.0);
    Ok(d * d / T::lit(4.0) - T::from_usize_lossy(m - 1))
}

// \int_lo^hi rho^e d rho for real e
fn power_integral<T: Real>(lo: T, hi: T, e: T) -> T {
    let e1 = e + T::one();
    if e1.abs() < T::lit(1e-12) {
        (hi / lo).ln()
    } else {
        (hi.powf(e1) - lo.powf(e1)) / e1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam() -> EtaFamily<f64> {
        EtaFamily::new(0.05, 100.0, 0.75).unwrap()
    }

    #[test]
    fn branches() {
        let f = fam();
        assert_eq!(f.value(0.05), 0.0);
        assert_eq!(f.value(100.0), 0.0);
        assert!((f.value(1.0) - 0.9683772).abs() < 1e-7);
        for r in [0.1, 0.3, 0.77, 1.0] {
            assert!((f.value(r) - (1.0 - 100f64.powf(-0.75))).abs() < 1e-15);
        }
        assert!(EtaFamily::new(0.5, 100.0, 0.75).is_err());
        assert!(EtaFamily::new(0.05, 1.0, 0.75).is_err());
        assert!(EtaFamily::new(0.05, 100.0, 0.5).is_err());
    }

    #[test]
    fn exact_and_quadrature_agree() {
        for m in 1..=4 {
            let f = fam();
            let q = asymptotic_functional(&f, m);
            let e = f.asymptotic_functional_exact(m);
            assert!((q - e).abs() < 1e-9 * e.abs().max(1.0), "m = {m}: {q} vs {e}");
        }
    }

    #[test]
    fn hardy_margins() {
        assert_eq!(hardy_margin::<f64>(2).unwrap(), -0.75);
        assert_eq!(hardy_margin::<f64>(3).unwrap(), 0.25);
        assert_eq!(hardy_margin::<f64>(4).unwrap(), 3.25);
        assert!(hardy_margin::<f64>(1).is_err());
    }

    #[test]
    fn piecewise_linear_basics() {
        let e = PiecewiseLinearEta::new(vec![1.0, 2.0, 4.0], vec![5.0, 1.0, 7.0]).unwrap();
        assert_eq!(e.value(1.0), 0.0);
        assert_eq!(e.value(1.5), 0.5);
        assert_eq!(e.value(3.0), 0.5);
        assert_eq!(e.value(4.0), 0.0);
        assert_eq!(e.derivative(3.0), -0.5);
        assert!(PiecewiseLinearEta::new(vec![1.0, 1.0, 2.0], vec![0.0; 3]).is_err());
        let zero = PiecewiseLinearEta::new(vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        assert_eq!(asymptotic_functional(&zero, 2), 0.0);
    }
}
