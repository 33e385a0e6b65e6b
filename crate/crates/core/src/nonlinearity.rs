//! Balanced bistable nonlinearities `f` and their double-well potentials
//! `G(u) = \int_u^M f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cos_pi, sin_pi, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    AllenCahn,
    Sine,
    Custom,
}

impl std::str::FromStr for NonlinearityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "allen_cahn" | "allen-cahn" => Ok(Self::AllenCahn),
            "sine" => Ok(Self::Sine),
            "custom" => Ok(Self::Custom),
            other => Err(Error::InvalidParameter(format!("unknown nonlinearity kind `{other}`"))),
        }
    }
}

/// A nonlinearity together with its potential and well location `M`.
///
/// Custom nonlinearities are odd polynomials `f(u) = sum_k c_k u^{2k+1}`;
/// their potential is obtained by exact antidifferentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity<T> {
    kind: NonlinearityKind,
    well: T,
    odd_coeffs: Vec<T>,
}

impl<T: Real> Nonlinearity<T> {
    pub fn allen_cahn() -> Self {
        Self {
            kind: NonlinearityKind::AllenCahn,
            well: T::one(),
            odd_coeffs: vec![T::one(), -T::one()],
        }
    }

    pub fn sine() -> Self {
        Self {
            kind: NonlinearityKind::Sine,
            well: T::one(),
            odd_coeffs: Vec::new(),
        }
    }

    pub fn builtin(kind: NonlinearityKind) -> Result<Self> {
        match kind {
            NonlinearityKind::AllenCahn => Ok(Self::allen_cahn()),
            NonlinearityKind::Sine => Ok(Self::sine()),
            NonlinearityKind::Custom => Err(Error::InvalidParameter(
                "custom nonlinearity needs coefficients; use Nonlinearity::odd_polynomial".into(),
            )),
        }
    }

    /// `f(u) = coeffs[0] u + coeffs[1] u^3 + coeffs[2] u^5 + ...`
    pub fn odd_polynomial(coeffs: Vec<T>, well: T) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(|c| *c == T::zero()) {
            return Err(Error::InvalidParameter("custom nonlinearity has no nonzero coefficient".into()));
        }
        if !(well > T::zero()) || !well.is_finite() {
            return Err(Error::InvalidParameter(format!("well location M = {well} must be positive")));
        }
        Ok(Self {
            kind: NonlinearityKind::Custom,
            well,
            odd_coeffs: coeffs,
        })
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    /// Well location `M`.
    pub fn well(&self) -> T {
        self.well
    }

    pub fn coeffs(&self) -> &[T] {
        &self.odd_coeffs
    }

    pub fn f(&self, u: T) -> T {
        match self.kind {
            NonlinearityKind::Sine => sin_pi(u),
            _ => {
                let u2 = u * u;
                let mut acc = T::zero();
                for c in self.odd_coeffs.iter().rev() {
                    acc = acc * u2 + *c;
                }
                acc * u
            }
        }
    }

    pub fn fprime(&self, u: T) -> T {
        match self.kind {
            NonlinearityKind::Sine => T::PI() * cos_pi(u),
            _ => {
                let u2 = u * u;
                let mut acc = T::zero();
                for (k, c) in self.odd_coeffs.iter().enumerate().rev() {
                    acc = acc * u2 + *c * T::from_usize_lossy(2 * k + 1);
                }
                acc
            }
        }
    }

    /// Potential `G(u) = \int_u^M f`, so `G' = -f` and `G(M) = 0`.
    pub fn potential(&self, u: T) -> T {
        match self.kind {
            NonlinearityKind::AllenCahn => {
                // (1/4)(1-u)^2 (1+u)^2, factored to keep relative accuracy near the wells
                let p = (T::one() - u) * (T::one() + u);
                T::lit(0.25) * p * p
            }
            NonlinearityKind::Sine => {
                // (1/pi)(1 + cos(pi u)) = (2/pi) cos^2(pi u / 2)
                let c = cos_pi(u * T::lit(0.5));
                T::lit(2.0) / T::PI() * c * c
            }
            NonlinearityKind::Custom => self.antiderivative(self.well) - self.antiderivative(u),
        }
    }

    /// `f(M - eps)` evaluated without cancellation for small `eps >= 0`.
    pub fn f_below_well(&self, eps: T) -> T {
        match self.kind {
            NonlinearityKind::AllenCahn => {
                // u(1-u)(1+u) with u = 1 - eps
                (T::one() - eps) * eps * (T::lit(2.0) - eps)
            }
            NonlinearityKind::Sine => (T::PI() * eps).sin(),
            NonlinearityKind::Custom => {
                let q = self.shifted_coeffs();
                q.iter().rev().fold(T::zero(), |acc, c| acc * eps + *c)
            }
        }
    }

    /// `G(M - eps) = \int_0^eps f(M - e) de`, accurate for small `eps >= 0`.
    pub fn potential_below_well(&self, eps: T) -> T {
        match self.kind {
            NonlinearityKind::AllenCahn => {
                let p = eps * (T::lit(2.0) - eps);
                T::lit(0.25) * p * p
            }
            NonlinearityKind::Sine => {
                let sn = (T::PI() * eps * T::lit(0.5)).sin();
                T::lit(2.0) / T::PI() * sn * sn
            }
            NonlinearityKind::Custom => {
                let q = self.shifted_coeffs();
                let mut acc = T::zero();
                for (k, c) in q.iter().enumerate().rev() {
                    acc = acc * eps + *c / T::from_usize_lossy(k + 1);
                }
                acc * eps
            }
        }
    }

    /// Coefficients of `e -> f(M - e)` in powers of `e`.
    fn shifted_coeffs(&self) -> Vec<T> {
        // dense coefficients of f in powers of u
        let deg = 2 * self.odd_coeffs.len() - 1;
        let mut p = vec![T::zero(); deg + 1];
        for (k, c) in self.odd_coeffs.iter().enumerate() {
            p[2 * k + 1] = *c;
        }
        // Taylor shift to the point M (synthetic division), then flip sign of odd powers
        let m = self.well;
        for i in 0..deg {
            for j in (i..deg).rev() {
                p[j] = p[j] + m * p[j + 1];
            }
        }
        for (k, c) in p.iter_mut().enumerate() {
            if k % 2 == 1 {
                *c = -*c;
            }
        }
        p
    }

    fn antiderivative(&self, u: T) -> T {
        let u2 = u * u;
        let mut acc = T::zero();
        for (k, c) in self.odd_coeffs.iter().enumerate().rev() {
            acc = acc * u2 + *c / T::from_usize_lossy(2 * k + 2);
        }
        acc * u2
    }

    /// Default checker for the three structural hypotheses.
    pub fn check_hypotheses(&self, samples: usize) -> Result<HypothesisReport> {
        HypothesisChecker::default().check(self, samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    pub pass: bool,
    /// Sample point where the hypothesis failed (or the worst sample when it passed).
    pub witness: f64,
    /// Magnitude of the worst deviation found.
    pub worst: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// `f` odd.
    pub h1: HypothesisOutcome,
    /// `G >= 0 = G(+-M)` on the line, `G > 0` on `(-M, M)`.
    pub h2: HypothesisOutcome,
    /// `f` concave on `(0, M)`.
    pub h3: HypothesisOutcome,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass
    }
}

/// Sampled verification of the hypotheses with configurable tolerances.
#[derive(Debug, Clone, Copy)]
pub struct HypothesisChecker {
    pub exact_tol: f64,
    pub sampled_tol: f64,
}

impl Default for HypothesisChecker {
    fn default() -> Self {
        Self {
            exact_tol: 1e-10,
            sampled_tol: 1e-8,
        }
    }
}

impl HypothesisChecker {
    pub fn check<T: Real>(&self, nl: &Nonlinearity<T>, samples: usize) -> Result<HypothesisReport> {
        if samples < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 samples, got {samples}")));
        }
        let well = nl.well().as_f64();
        let f = |u: f64| nl.f(T::lit(u)).as_f64();
        let g = |u: f64| nl.potential(T::lit(u)).as_f64();

        // H1: |f(-u) + f(u)| on [0, 2M]
        let mut h1 = HypothesisOutcome { pass: true, witness: 0.0, worst: 0.0 };
        for k in 0..=samples {
            let u = 2.0 * well * k as f64 / samples as f64;
            let dev = (f(-u) + f(u)).abs();
            if dev > h1.worst {
                h1.worst = dev;
                h1.witness = u;
            }
        }
        h1.pass = h1.worst <= self.exact_tol;

        // H2: zeros at the wells, strict positivity inside, nonnegativity on [-2M, 2M]
        let mut h2 = HypothesisOutcome { pass: true, witness: well, worst: 0.0 };
        for &u in &[well, -well] {
            let dev = g(u).abs().max(f(u).abs());
            if dev > h2.worst {
                h2.worst = dev;
                h2.witness = u;
            }
        }
        if h2.worst > self.exact_tol {
            h2.pass = false;
        }
        let near_well = |u: f64| (u.abs() - well).abs() <= self.sampled_tol.sqrt() * well;
        for k in 0..=4 * samples {
            let u = -2.0 * well + 4.0 * well * k as f64 / (4 * samples) as f64;
            let gu = g(u);
            let violated = if u.abs() < well && !near_well(u) {
                !(gu > 0.0)
            } else {
                gu < -self.sampled_tol
            };
            if violated && h2.pass {
                h2.pass = false;
                h2.witness = u;
                h2.worst = -gu;
            }
        }

        // H3: second differences of f on (0, M)
        let mut h3 = HypothesisOutcome { pass: true, witness: 0.0, worst: f64::NEG_INFINITY };
        let step = well / samples as f64;
        let fd = step.min(1e-3 * well);
        for k in 1..samples {
            let u = k as f64 * step;
            let second = (f(u + fd) - 2.0 * f(u) + f(u - fd)) / (fd * fd);
            if second > h3.worst {
                h3.worst = second;
                h3.witness = u;
            }
        }
        // finite-difference noise scales like eps |f| / fd^2
        let fd_noise = 1e-15 * (1.0 + f(0.5 * well).abs()) / (fd * fd);
        h3.pass = h3.worst <= self.sampled_tol.max(10.0 * fd_noise);

        Ok(HypothesisReport { h1, h2, h3 })
    }
}
