//! The increasing heteroclinic profile `u0` of `-u'' = f(u)` joining `-M` to
//! `M`, normalized by `u0(0) = 0`, tabulated on a uniform symmetric grid.
//!
//! The table is built from the first integral: `phi(sigma) = \int_0^sigma dw / sqrt(2 G(w))`
//! is inverted node by node with Newton's method on Gauss-Legendre panels.
//! Above `M/2` the march is carried out in the distance-to-well variable
//! `eps = M - u0`, which keeps the exponential tails at full relative precision.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::GaussLegendre;
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

pub const DEFAULT_TAU_MAX: f64 = 20.0;
pub const DEFAULT_NODES: usize = 4001;

/// Tabulated heteroclinic profile.
#[derive(Debug, Clone)]
pub struct Profile1D<T> {
    tau: Vec<T>,
    u0: Vec<T>,
    /// `M - u0` for `tau >= 0` (mirrored `M + u0` for `tau < 0`).
    gap: Vec<T>,
    u0dot: Vec<T>,
    u0ddot: Vec<T>,
    u0dddot: Vec<T>,
    step: T,
    tau_max: T,
    well: T,
    decay_rate: T,
    decay_amplitude: T,
}

/// Value and first two derivatives of the profile at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint<T> {
    pub u: T,
    pub du: T,
    pub ddu: T,
}

/// Summary emitted next to the profile table.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub tau_max: f64,
    pub n_nodes: usize,
    pub decay_c: f64,
    #[serde(rename = "decay_C")]
    pub decay_amplitude: f64,
    pub line_energy: f64,
    pub kinetic_integral: f64,
    pub max_hamiltonian_residual: f64,
    pub max_zero_mode_residual: f64,
}

impl<T: Real> Profile1D<T> {
    /// Builds the profile with the default grid (`tau_max = 20`, 4001 nodes).
    pub fn build_default(nl: &Nonlinearity<T>) -> Result<Self> {
        Self::build(nl, T::lit(DEFAULT_TAU_MAX), DEFAULT_NODES)
    }

    pub fn build(nl: &Nonlinearity<T>, tau_max: T, n_nodes: usize) -> Result<Self> {
        if !(tau_max >= T::lit(5.0)) || !tau_max.is_finite() {
            return Err(Error::InvalidParameter(format!("tau_max = {tau_max} must be at least 5")));
        }
        if n_nodes < 65 || n_nodes % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "n_nodes = {n_nodes} must be odd and at least 65"
            )));
        }
        let report = nl.check_hypotheses(400)?;
        if !report.h1.pass {
            return Err(Error::HypothesisViolated { hypothesis: "H1", witness: report.h1.witness });
        }
        if !report.h2.pass {
            return Err(Error::QuadratureSingularity { at: report.h2.witness });
        }
        let g2 = -nl.fprime(nl.well());
        if !(g2 > T::zero()) {
            return Err(Error::DegenerateWell { second_derivative: g2.as_f64() });
        }

        let well = nl.well();
        let half = (n_nodes - 1) / 2;
        let step = tau_max / T::from_usize_lossy(half);
        let gl = GaussLegendre::<T>::new(10);

        // positive half: (u0, gap)
        let mut pos_u = Vec::with_capacity(half + 1);
        let mut pos_gap = Vec::with_capacity(half + 1);
        pos_u.push(T::zero());
        pos_gap.push(well);
        let mid = well * T::lit(0.5);
        let mut sigma = T::zero();
        let mut eps = well;
        let mut in_tail = false;
        for k in 1..=half {
            let tau_k = step * T::from_usize_lossy(k);
            if !in_tail {
                let next = march_center(nl, &gl, sigma, step).ok_or(Error::InversionFailure { tau: tau_k.as_f64() })?;
                if next > mid {
                    // redo this step from the far side in the gap variable
                    in_tail = true;
                    eps = well - sigma;
                } else {
                    sigma = next;
                    pos_u.push(sigma);
                    pos_gap.push(well - sigma);
                    continue;
                }
            }
            let next = march_tail(nl, &gl, eps, step).ok_or(Error::InversionFailure { tau: tau_k.as_f64() })?;
            if !(next < eps) {
                return Err(Error::InversionFailure { tau: tau_k.as_f64() });
            }
            eps = next;
            pos_u.push(well - eps);
            pos_gap.push(eps);
        }

        let n = n_nodes;
        let mut tau = vec![T::zero(); n];
        let mut u0 = vec![T::zero(); n];
        let mut gap = vec![T::zero(); n];
        let mut u0dot = vec![T::zero(); n];
        let mut u0ddot = vec![T::zero(); n];
        let mut u0dddot = vec![T::zero(); n];
        for k in 0..=half {
            let g = pos_gap[k];
            let u = pos_u[k];
            let kinetic = if k == 0 { nl.potential(u) } else { nl.potential_below_well(g) };
            let du = (T::lit(2.0) * kinetic).sqrt();
            let ddu = if k == 0 { -nl.f(u) } else { -nl.f_below_well(g) };
            let dddu = -nl.fprime(u) * du;
            let tk = step * T::from_usize_lossy(k);
            for (idx, sign) in [(half + k, T::one()), (half - k, -T::one())] {
                tau[idx] = sign * tk;
                u0[idx] = sign * u;
                gap[idx] = g;
                u0dot[idx] = du;
                u0ddot[idx] = sign * ddu;
                u0dddot[idx] = dddu;
            }
        }
        if u0dot.iter().any(|d| !(*d > T::zero())) {
            return Err(Error::InversionFailure { tau: tau_max.as_f64() });
        }

        let (decay_rate, decay_amplitude) = fit_decay(&tau, &u0dot, tau_max);
        Ok(Self {
            tau,
            u0,
            gap,
            u0dot,
            u0ddot,
            u0dddot,
            step,
            tau_max,
            well,
            decay_rate,
            decay_amplitude,
        })
    }

    pub fn tau(&self) -> &[T] {
        &self.tau
    }

    pub fn u0(&self) -> &[T] {
        &self.u0
    }

    pub fn u0dot(&self) -> &[T] {
        &self.u0dot
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn tau_max(&self) -> T {
        self.tau_max
    }

    pub fn well(&self) -> T {
        self.well
    }

    /// Fitted exponential rate `c` in `u0dot <= C exp(-c |tau|)`.
    pub fn decay_rate(&self) -> T {
        self.decay_rate
    }

    /// Envelope constant `C` in `u0dot <= C exp(-c |tau|)`.
    pub fn decay_amplitude(&self) -> T {
        self.decay_amplitude
    }

    /// Profile value and derivatives at arbitrary `tau`; quintic Hermite inside
    /// the table, fitted exponential tails outside.
    pub fn eval(&self, tau: T) -> ProfilePoint<T> {
        if tau < T::zero() {
            let p = self.eval(-tau);
            return ProfilePoint { u: -p.u, du: p.du, ddu: -p.ddu };
        }
        let last = self.tau.len() - 1;
        if tau >= self.tau_max {
            let decay = (-self.decay_rate * (tau - self.tau_max)).exp();
            let du = self.u0dot[last] * decay;
            return ProfilePoint {
                u: self.well - self.gap[last] * decay,
                du,
                ddu: -self.decay_rate * du,
            };
        }
        let x = (tau + self.tau_max) / self.step;
        let k = x.floor().to_usize().unwrap_or(0).min(last - 1);
        let r = x - T::from_usize_lossy(k);
        let h = self.step;
        let (u, _, _) = quintic_hermite(
            r,
            h,
            [self.u0[k], self.u0dot[k], self.u0ddot[k]],
            [self.u0[k + 1], self.u0dot[k + 1], self.u0ddot[k + 1]],
        );
        let (du, ddu, _) = quintic_hermite(
            r,
            h,
            [self.u0dot[k], self.u0ddot[k], self.u0dddot[k]],
            [self.u0dot[k + 1], self.u0ddot[k + 1], self.u0dddot[k + 1]],
        );
        ProfilePoint { u, du, ddu }
    }

    pub fn value(&self, tau: T) -> T {
        self.eval(tau).u
    }

    pub fn derivative(&self, tau: T) -> T {
        self.eval(tau).du
    }

    /// `u0(b . x + c)` for a unit direction `b`.
    ///
    /// # Panics
    /// If `b` and `x` differ in length or `b` is not a unit vector.
    pub fn one_d_solution(&self, b: &[T], c: T, x: &[T]) -> T {
        assert_eq!(b.len(), x.len(), "direction and point dimensions differ");
        let norm2: T = b.iter().map(|v| *v * *v).sum();
        assert!((norm2 - T::one()).abs() <= T::lit(1e-6), "direction must be a unit vector");
        let arg = b.iter().zip(x).map(|(bi, xi)| *bi * *xi).sum::<T>() + c;
        self.value(arg)
    }

    /// `\int u0dot^2` over the real line (table by Simpson, tails analytically).
    pub fn kinetic_integral(&self) -> T {
        let body = simpson(&self.u0dot.iter().map(|d| *d * *d).collect::<Vec<_>>(), self.step);
        let last = self.u0dot.len() - 1;
        let tail = self.u0dot[last] * self.u0dot[last] / (T::lit(2.0) * self.decay_rate);
        body + T::lit(2.0) * tail
    }

    /// `\int { u0dot^2 / 2 + G(u0) }` over the real line.
    pub fn line_energy(&self, nl: &Nonlinearity<T>) -> T {
        let vals: Vec<T> = self
            .u0dot
            .iter()
            .zip(&self.gap)
            .map(|(d, g)| T::lit(0.5) * *d * *d + nl.potential_below_well(*g))
            .collect();
        let body = simpson(&vals, self.step);
        let last = self.u0dot.len() - 1;
        let tail = vals[last] / (T::lit(2.0) * self.decay_rate);
        body + T::lit(2.0) * tail
    }

    /// `max |u0dot^2 / 2 - G(u0)|` over the nodes.
    pub fn hamiltonian_residual(&self, nl: &Nonlinearity<T>) -> T {
        self.u0dot
            .iter()
            .zip(&self.u0)
            .map(|(d, u)| (T::lit(0.5) * *d * *d - nl.potential(*u)).abs())
            .fold(T::zero(), T::max)
    }

    /// Sup-norm of `u0'' + f(u0)` with fourth-order second differences.
    pub fn ode_residual(&self, nl: &Nonlinearity<T>) -> T {
        let d2 = second_difference(&self.u0, self.step);
        d2.iter()
            .map(|(k, v)| (*v + nl.f(self.u0[*k])).abs())
            .fold(T::zero(), T::max)
    }

    /// Sup-norm of `-psi'' - f'(u0) psi` at `psi = u0dot` (the translation mode).
    pub fn zero_mode_residual(&self, nl: &Nonlinearity<T>) -> T {
        let d2 = second_difference(&self.u0dot, self.step);
        d2.iter()
            .map(|(k, v)| (-*v - nl.fprime(self.u0[*k]) * self.u0dot[*k]).abs())
            .fold(T::zero(), T::max)
    }

    pub fn summary(&self, nl: &Nonlinearity<T>) -> ProfileSummary {
        ProfileSummary {
            tau_max: self.tau_max.as_f64(),
            n_nodes: self.len(),
            decay_c: self.decay_rate.as_f64(),
            decay_amplitude: self.decay_amplitude.as_f64(),
            line_energy: self.line_energy(nl).as_f64(),
            kinetic_integral: self.kinetic_integral().as_f64(),
            max_hamiltonian_residual: self.hamiltonian_residual(nl).as_f64(),
            max_zero_mode_residual: self.zero_mode_residual(nl).as_f64(),
        }
    }
}

/// `phi(sigma) = \int_{anchor}^{sigma} dw / sqrt(2 G(w))` by Gauss-Legendre on
/// panels refined dyadically toward the wells.
pub fn first_integral_coordinate<T: Real>(nl: &Nonlinearity<T>, anchor: T, sigma: T) -> T {
    if sigma < anchor {
        return -first_integral_coordinate(nl, sigma, anchor);
    }
    // odd symmetry of f makes phi odd around 0
    if anchor < T::zero() && sigma <= T::zero() {
        return first_integral_coordinate(nl, -sigma, -anchor);
    }
    if anchor < T::zero() {
        return first_integral_coordinate(nl, T::zero(), -anchor) + first_integral_coordinate(nl, T::zero(), sigma);
    }
    let gl = GaussLegendre::<T>::new(16);
    let well = nl.well();
    let mid = well * T::lit(0.5);
    let center = |w: T| T::one() / (T::lit(2.0) * nl.potential(w)).sqrt();
    let near = |e: T| T::one() / (T::lit(2.0) * nl.potential_below_well(e)).sqrt();
    let mut total = T::zero();
    let lo = anchor.min(mid);
    let hi = sigma.min(mid);
    if hi > lo {
        total = total + gl.integrate_pieces(&[lo, hi], 8, center);
    }
    if sigma > mid {
        // distance-to-well variable; dyadic panels [e, 2e]
        let e_lo = well - sigma;
        let e_hi = well - anchor.max(mid);
        let mut a = e_lo;
        while a < e_hi {
            let b = (a * T::lit(2.0)).min(e_hi);
            total = total + gl.integrate(a, b, near);
            a = b;
        }
    }
    total
}

// Advances sigma by one tau step in the central region.
fn march_center<T: Real>(nl: &Nonlinearity<T>, gl: &GaussLegendre<T>, from: T, dtau: T) -> Option<T> {
    let integrand = |w: T| T::one() / (T::lit(2.0) * nl.potential(w)).sqrt();
    let speed = |w: T| (T::lit(2.0) * nl.potential(w)).sqrt();
    let mut sigma = from + dtau * speed(from);
    for _ in 0..60 {
        let resid = gl.integrate(from, sigma, integrand) - dtau;
        let next = sigma - resid * speed(sigma);
        let next = if next <= from { (sigma + from) * T::lit(0.5) } else { next };
        let done = (next - sigma).abs() <= T::epsilon() * sigma.abs().max(T::lit(1e-300));
        sigma = next;
        if done || resid.abs() <= T::epsilon() * dtau {
            return Some(sigma);
        }
    }
    sigma.is_finite().then_some(sigma)
}

// Advances the gap eps = M - u0 by one tau step near the upper well.
fn march_tail<T: Real>(nl: &Nonlinearity<T>, gl: &GaussLegendre<T>, from: T, dtau: T) -> Option<T> {
    let integrand = |e: T| T::one() / (T::lit(2.0) * nl.potential_below_well(e)).sqrt();
    let speed = |e: T| (T::lit(2.0) * nl.potential_below_well(e)).sqrt();
    let mut eps = from - dtau * speed(from);
    if !(eps > T::zero()) {
        eps = from * T::lit(0.5);
    }
    for _ in 0..80 {
        let resid = gl.integrate(eps, from, integrand) - dtau;
        // d/d eps of the integral is -integrand(eps)
        let mut next = eps + resid * speed(eps);
        if !(next > T::zero()) {
            next = eps * T::lit(0.5);
        }
        if next >= from {
            next = (eps + from) * T::lit(0.5);
        }
        let done = (next - eps).abs() <= T::epsilon() * eps;
        eps = next;
        if done || resid.abs() <= T::epsilon() * dtau {
            return Some(eps);
        }
    }
    (eps.is_finite() && eps > T::zero()).then_some(eps)
}

fn fit_decay<T: Real>(tau: &[T], u0dot: &[T], tau_max: T) -> (T, T) {
    // least squares on log u0dot = log C - c |tau| over |tau| >= tau_max / 2
    let cut = tau_max * T::lit(0.5);
    let pts: Vec<(T, T)> = tau
        .iter()
        .zip(u0dot)
        .filter(|(t, _)| t.abs() >= cut)
        .map(|(t, d)| (t.abs(), d.ln()))
        .collect();
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let rate = -sxy / sxx;
    let intercept = my + rate * mx;
    let envelope = tau
        .iter()
        .zip(u0dot)
        .map(|(t, d)| *d * (rate * t.abs()).exp())
        .fold(T::zero(), T::max);
    (rate, intercept.exp().max(envelope))
}

fn simpson<T: Real>(vals: &[T], h: T) -> T {
    let n = vals.len();
    debug_assert!(n % 2 == 1);
    let mut acc = vals[0] + vals[n - 1];
    for (k, v) in vals.iter().enumerate().take(n - 1).skip(1) {
        acc = acc + *v * if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
    }
    acc * h / T::lit(3.0)
}

// fourth-order central second differences at nodes 2..n-3
fn second_difference<T: Real>(v: &[T], h: T) -> Vec<(usize, T)> {
    let h2 = h * h * T::lit(12.0);
    (2..v.len() - 2)
        .map(|k| {
            let d = -v[k - 2] + T::lit(16.0) * v[k - 1] - T::lit(30.0) * v[k] + T::lit(16.0) * v[k + 1] - v[k + 2];
            (k, d / h2)
        })
        .collect()
}

/// Quintic Hermite interpolation on `[0, h]` at fraction `r`: returns value,
/// first and second derivative.
fn quintic_hermite<T: Real>(r: T, h: T, left: [T; 3], right: [T; 3]) -> (T, T, T) {
    let [y0, d0, s0] = left;
    let [y1, d1, s1] = right;
    let (d0, d1) = (d0 * h, d1 * h);
    let (s0, s1) = (s0 * h * h, s1 * h * h);
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r3 * r;
    let r5 = r4 * r;
    let c = T::lit;
    let h00 = c(1.0) - c(10.0) * r3 + c(15.0) * r4 - c(6.0) * r5;
    let h10 = r - c(6.0) * r3 + c(8.0) * r4 - c(3.0) * r5;
    let h20 = c(0.5) * r2 - c(1.5) * r3 + c(1.5) * r4 - c(0.5) * r5;
    let h01 = c(10.0) * r3 - c(15.0) * r4 + c(6.0) * r5;
    let h11 = -c(4.0) * r3 + c(7.0) * r4 - c(3.0) * r5;
    let h21 = c(0.5) * r3 - r4 + c(0.5) * r5;

    let dh00 = -c(30.0) * r2 + c(60.0) * r3 - c(30.0) * r4;
    let dh10 = c(1.0) - c(18.0) * r2 + c(32.0) * r3 - c(15.0) * r4;
    let dh20 = r - c(4.5) * r2 + c(6.0) * r3 - c(2.5) * r4;
    let dh01 = c(30.0) * r2 - c(60.0) * r3 + c(30.0) * r4;
    let dh11 = -c(12.0) * r2 + c(28.0) * r3 - c(15.0) * r4;
    let dh21 = c(1.5) * r2 - c(4.0) * r3 + c(2.5) * r4;

    let ddh00 = -c(60.0) * r + c(180.0) * r2 - c(120.0) * r3;
    let ddh10 = -c(36.0) * r + c(96.0) * r2 - c(60.0) * r3;
    let ddh20 = c(1.0) - c(9.0) * r + c(18.0) * r2 - c(10.0) * r3;
    let ddh01 = c(60.0) * r - c(180.0) * r2 + c(120.0) * r3;
    let ddh11 = -c(24.0) * r + c(84.0) * r2 - c(60.0) * r3;
    let ddh21 = c(3.0) * r - c(12.0) * r2 + c(10.0) * r3;

    let v = h00 * y0 + h10 * d0 + h20 * s0 + h01 * y1 + h11 * d1 + h21 * s1;
    let dv = (dh00 * y0 + dh10 * d0 + dh20 * s0 + dh01 * y1 + dh11 * d1 + dh21 * s1) / h;
    let ddv = (ddh00 * y0 + ddh10 * d0 + ddh20 * s0 + ddh01 * y1 + ddh11 * d1 + ddh21 * s1) / (h * h);
    (v, dv, ddv)
}
