//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sin(pi x)`, exact zero at every integer.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let r = x - two * (x / two).round();
    // r in [-1, 1]
    let a = r.abs();
    let v = if a <= T::lit(0.5) {
        (T::PI() * a).sin()
    } else {
        (T::PI() * (T::one() - a)).sin()
    };
    if r < T::zero() {
        -v
    } else {
        v
    }
}

/// `cos(pi x)`, exact zero at every half-integer.
pub fn cos_pi<T: Real>(x: T) -> T {
    sin_pi(T::lit(0.5) - x)
}

/// Surface area of the unit sphere `S^{m-1}` in `R^m`.
pub fn sphere_area<T: Real>(m: usize) -> T {
    assert!(m >= 1, "sphere dimension");
    // 2 pi^{m/2} / Gamma(m/2)
    let pi = T::PI();
    let gamma_half_m = if m % 2 == 0 {
        let k = m / 2;
        (1..k).fold(T::one(), |acc, j| acc * T::from_usize_lossy(j))
    } else {
        // Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
        let k = (m - 1) / 2;
        let mut g = pi.sqrt();
        for j in 0..k {
            g = g * (T::from_usize_lossy(j) + T::lit(0.5));
        }
        g
    };
    let half_m = T::from_usize_lossy(m) / T::lit(2.0);
    T::lit(2.0) * pi.powf(half_m) / gamma_half_m
}

/// `a_m = |S^{m-1}|^2`: volume element of `R^{2m}` in block-radial
/// coordinates is `a_m s^{m-1} t^{m-1} ds dt`.
pub fn block_radial_constant<T: Real>(m: usize) -> T {
    let a = sphere_area::<T>(m);
    a * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_vanishes_at_integers() {
        for k in -6..=6 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5f64) - 1.0).abs() < 1e-15);
        assert!((sin_pi(0.25f64) - (std::f64::consts::PI / 4.0).sin()).abs() < 1e-15);
        assert!((sin_pi(-1.3f64) - (-1.3 * std::f64::consts::PI).sin()).abs() < 1e-14);
    }

    #[test]
    fn cos_pi_matches_cos() {
        for &x in &[0.0, 0.1, 0.5, 0.9, 1.0, 1.7, -0.4] {
            let want = (std::f64::consts::PI * x).cos();
            assert!((cos_pi(x) - want).abs() < 1e-15, "{x}");
        }
        assert_eq!(cos_pi(0.5f64), 0.0);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area::<f64>(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area::<f64>(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area::<f64>(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area::<f64>(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((block_radial_constant::<f64>(2) - 4.0 * PI * PI).abs() < 1e-12);
    }
}
