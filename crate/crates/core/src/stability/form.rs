//! Second variation on the wedge `{|z| < y}`:
//! `W(xi) = \int (y^2 - z^2)^(m-1) { xi_y^2 + xi_z^2 - f'(v) xi^2 } dy dz`.
//!
//! The full-space form is `Q = c_m W` with `c_m` from [`wedge_constant`],
//! since `s t = (y^2 - z^2) / 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::st_from_yz;
use crate::linalg::GaussLegendre;
use crate::nonlinearity::Nonlinearity;
use crate::profile1d::Profile1D;
use crate::scalar::{block_radial_constant, Real};
use crate::solver::Field;

use super::eta::{asymptotic_functional, Eta, EtaFamily};

/// `c_m = a_m / 2^(m-1)`: a function of `(y, z)` has
/// `\int_{R^2m} g = c_m \int_{|z| < y} (y^2 - z^2)^(m-1) g dy dz`.
pub fn wedge_constant<T: Real>(m: usize) -> T {
    block_radial_constant::<T>(m) / T::lit(2.0).powi(m as i32 - 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadraticFormReport {
    pub value: f64,
    pub gradient_term: f64,
    pub potential_term: f64,
    /// `\int 2 y phi^2 u0dot(y)^2 dy`, present for the separable ansatz with `m = 2`.
    pub boundary_term: f64,
    /// The divisor `a^(2m-3)` applied to every term.
    pub a_scaling: f64,
    /// Upper bound for the part of the integrand cut off beyond `|z| = z_max`.
    pub truncation_bound: f64,
}

/// The background `v` whose linearization is probed.
#[derive(Debug, Clone, Copy)]
pub enum Background<'a, T> {
    /// `v = u0(z)`.
    Profile(&'a Profile1D<T>),
    /// A sector field, extended oddly across the cone.
    Field(&'a Field<T>),
}

/// A perturbation `xi(y, z)` on the wedge.
pub trait Perturbation<T: Real> {
    /// `(xi, xi_y, xi_z)`.
    fn eval(&self, y: T, z: T) -> (T, T, T);
    /// Increasing `y` breakpoints; the first and last bound the support.
    fn y_breaks(&self) -> Vec<T>;
}

/// `xi = eta(y / a) u0dot(z)`.
pub struct Separable<'a, T, E> {
    pub eta: &'a E,
    pub a: T,
    pub profile: &'a Profile1D<T>,
}

impl<T: Real, E: Eta<T>> Perturbation<T> for Separable<'_, T, E> {
    fn eval(&self, y: T, z: T) -> (T, T, T) {
        let p = self.profile.eval(z);
        let rho = y / self.a;
        let e = self.eta.value(rho);
        (e * p.du, self.eta.derivative(rho) / self.a * p.du, e * p.ddu)
    }

    fn y_breaks(&self) -> Vec<T> {
        self.eta.breakpoints().into_iter().map(|b| b * self.a).collect()
    }
}

/// Quadrature controls.
#[derive(Debug, Clone, Copy)]
pub struct FormOptions<T> {
    /// `|z|` cutoff; defaults to the profile half-width when `None`.
    pub z_max: Option<T>,
    pub gl_order: usize,
    /// Width of the z panels.
    pub z_panel: T,
    /// Largest ratio between the ends of a y panel.
    pub y_ratio: T,
}

impl<T: Real> Default for FormOptions<T> {
    fn default() -> Self {
        Self { z_max: None, gl_order: 10, z_panel: T::lit(0.5), y_ratio: T::lit(1.1) }
    }
}

struct Sampler<'a, T> {
    background: Background<'a, T>,
    nl: &'a Nonlinearity<T>,
}

impl<T: Real> Sampler<'_, T> {
    fn fprime(&self, y: T, z: T) -> Option<T> {
        let v = match self.background {
            Background::Profile(p) => p.value(z),
            Background::Field(f) => {
                let (s, t) = st_from_yz(y, z).ok()?;
                // odd extension: f' is even, so only |v| matters
                let (s, t) = if t > s { (t, s) } else { (s, t) };
                f.grid().interpolate(f.values(), s, t)?
            }
        };
        Some(self.nl.fprime(v))
    }
}

fn z_cut<T: Real>(background: &Background<'_, T>, opts: &FormOptions<T>) -> T {
    opts.z_max.unwrap_or_else(|| match background {
        Background::Profile(p) => p.tau_max(),
        Background::Field(_) => T::lit(20.0),
    })
}

// geometric panels on each y piece
fn y_panels<T: Real>(breaks: &[T], ratio: T) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if !(hi > lo) {
            continue;
        }
        let n = if lo > T::zero() {
            ((hi / lo).ln() / ratio.ln()).ceil().to_usize().unwrap_or(1).max(2)
        } else {
            8
        };
        let n = n.max(((hi - lo) / T::lit(0.5)).ceil().to_usize().unwrap_or(1).min(64));
        if lo > T::zero() && (hi / lo) > ratio {
            let q = (hi / lo).powf(T::one() / T::from_usize_lossy(n));
            let mut a = lo;
            for j in 0..n {
                let b = if j + 1 == n { hi } else { a * q };
                out.push((a, b));
                a = b;
            }
        } else {
            let d = (hi - lo) / T::from_usize_lossy(n);
            for j in 0..n {
                let a = lo + d * T::from_usize_lossy(j);
                let b = if j + 1 == n { hi } else { a + d };
                out.push((a, b));
            }
        }
    }
    out
}

/// Direct evaluation of `W(xi)`: `gradient_term = \int w |grad xi|^2`,
/// `potential_term = -\int w f'(v) xi^2`, no boundary term.
pub fn quadratic_form_yz<T: Real, P: Perturbation<T> + ?Sized>(
    background: Background<'_, T>,
    xi: &P,
    nl: &Nonlinearity<T>,
    m: usize,
    opts: &FormOptions<T>,
) -> Result<QuadraticFormReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let breaks = xi.y_breaks();
    let zc = z_cut(&background, opts);
    if let (Background::Field(f), Some(y_max)) = (background, breaks.last().copied()) {
        let limit = f.grid().radius() - T::lit(2.0) * f.grid().h();
        let reach = (y_max * y_max + y_max.min(zc) * y_max.min(zc)).sqrt();
        if reach > limit {
            return Err(Error::UnsupportedDomain { y_support: y_max.as_f64(), y_limit: limit.as_f64() });
        }
    }
    let sampler = Sampler { background, nl };
    let gl = GaussLegendre::<T>::new(opts.gl_order);
    let k = (m - 1) as i32;
    let mut grad = T::zero();
    let mut pot = T::zero();
    let mut missing = false;
    for (ya, yb) in y_panels(&breaks, opts.y_ratio) {
        let (gy, py) = gl.integrate_pair(ya, yb, |y| {
            let zm = y.min(zc);
            let panels = (T::lit(2.0) * zm / opts.z_panel).ceil().to_usize().unwrap_or(1).max(1);
            let dz = T::lit(2.0) * zm / T::from_usize_lossy(panels);
            let mut g = T::zero();
            let mut p = T::zero();
            for j in 0..panels {
                let za = -zm + dz * T::from_usize_lossy(j);
                let (gj, pj) = gl.integrate_pair(za, za + dz, |z| {
                    let w = (y * y - z * z).powi(k);
                    let (v, vy, vz) = xi.eval(y, z);
                    let fp = sampler.fprime(y, z).unwrap_or_else(|| {
                        missing = true;
                        T::zero()
                    });
                    (w * (vy * vy + vz * vz), -w * fp * v * v)
                });
                g = g + gj;
                p = p + pj;
            }
            (g, p)
        });
        grad = grad + gy;
        pot = pot + py;
    }
    if missing {
        return Err(Error::UnsupportedDomain {
            y_support: breaks.last().copied().unwrap_or(T::zero()).as_f64(),
            y_limit: match background {
                Background::Field(f) => f.grid().radius().as_f64(),
                Background::Profile(_) => f64::INFINITY,
            },
        });
    }
    let bound = truncation_bound(&background, &breaks, m, zc, xi);
    Ok(QuadraticFormReport {
        value: (grad + pot).as_f64(),
        gradient_term: grad.as_f64(),
        potential_term: pot.as_f64(),
        boundary_term: 0.0,
        a_scaling: 1.0,
        truncation_bound: bound,
    })
}

fn truncation_bound<T: Real, P: Perturbation<T> + ?Sized>(
    background: &Background<'_, T>,
    breaks: &[T],
    m: usize,
    zc: T,
    _xi: &P,
) -> f64 {
    let Background::Profile(p) = background else {
        return 0.0;
    };
    let (Some(lo), Some(hi)) = (breaks.first(), breaks.last()) else {
        return 0.0;
    };
    if *hi <= zc {
        return 0.0;
    }
    // |xi|, |grad xi| are bounded by multiples of u0dot, itself below C e^{-c z}
    let c = p.decay_rate();
    let amp = p.decay_amplitude();
    let w = hi.powi(2 * (m as i32 - 1));
    let tail = amp * amp * (-T::lit(2.0) * c * zc).exp() / c;
    (T::lit(4.0) * w * tail * (*hi - *lo)).as_f64()
}

/// The separable form `W(eta(y/a) u0dot(z))` about `v = u0(z)` split after an
/// integration by parts in `z`:
/// gradient `\int w phi'^2 u0dot^2`, potential `\int phi^2 \int (w_zz / 2) u0dot^2`,
/// boundary `-\int phi^2 [w_z u0dot^2 / 2]_{-y}^{y}`; every term divided by `a^(2m-3)`.
pub fn separable_form<T: Real, E: Eta<T>>(
    p: &Profile1D<T>,
    m: usize,
    eta: &E,
    a: T,
    opts: &FormOptions<T>,
) -> Result<QuadraticFormReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if !(a > T::zero()) {
        return Err(Error::InvalidParameter(format!("scale a = {a} must be positive")));
    }
    let zc = opts.z_max.unwrap_or(p.tau_max());
    let gl = GaussLegendre::<T>::new(opts.gl_order);
    let k = m as i32 - 1;
    let mf = T::from_usize_lossy(m - 1);
    let two = T::lit(2.0);
    let breaks: Vec<T> = eta.breakpoints().into_iter().map(|b| b * a).collect();
    let mut grad = T::zero();
    let mut pot = T::zero();
    let mut bdry = T::zero();
    for (ya, yb) in y_panels(&breaks, opts.y_ratio) {
        let (g, q) = gl.integrate_pair(ya, yb, |y| {
            let rho = y / a;
            let phi = eta.value(rho);
            let dphi = eta.derivative(rho) / a;
            let zm = y.min(zc);
            let panels = (two * zm / opts.z_panel).ceil().to_usize().unwrap_or(1).max(1);
            let dz = two * zm / T::from_usize_lossy(panels);
            let mut mass = T::zero();
            let mut curv = T::zero();
            for j in 0..panels {
                let za = -zm + dz * T::from_usize_lossy(j);
                let (a1, a2) = gl.integrate_pair(za, za + dz, |z| {
                    let d = p.derivative(z);
                    let r = y * y - z * z;
                    let w = r.powi(k);
                    // w_zz / 2 for w = (y^2 - z^2)^(m-1)
                    let wzz = if m == 1 {
                        T::zero()
                    } else if m == 2 {
                        -T::one()
                    } else {
                        -mf * r.powi(k - 1) + two * mf * (mf - T::one()) * z * z * r.powi(k - 2)
                    };
                    (w * d * d, wzz * d * d)
                });
                mass = mass + a1;
                curv = curv + a2;
            }
            (dphi * dphi * mass, phi * phi * curv)
        });
        grad = grad + g;
        pot = pot + q;
        if m <= 2 {
            // z = +-y endpoint terms: [w u0dot u0ddot] for m = 1, -[w_z u0dot^2 / 2] for m = 2
            bdry = bdry
                + gl.integrate(ya, yb, |y| {
                    if y > zc {
                        return T::zero();
                    }
                    let phi = eta.value(y / a);
                    let pt = p.eval(y);
                    let jump = if m == 1 { pt.du * pt.ddu } else { y * pt.du * pt.du };
                    two * phi * phi * jump
                });
        }
    }
    let scale = a.powi(2 * m as i32 - 3);
    Ok(QuadraticFormReport {
        value: ((grad + pot + bdry) / scale).as_f64(),
        gradient_term: (grad / scale).as_f64(),
        potential_term: (pot / scale).as_f64(),
        boundary_term: (bdry / scale).as_f64(),
        a_scaling: scale.as_f64(),
        truncation_bound: 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub a: f64,
    /// `W(xi_a) / a^(2m-3)`.
    pub value: f64,
    pub report: QuadraticFormReport,
    /// `a u0dot(a rho1)^2`, the decaying correction from the inner ramp.
    pub inner_correction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilitySweep {
    pub m: usize,
    pub family: EtaFamily<f64>,
    pub points: Vec<SweepPoint>,
    /// `(\int u0dot^2) * asymptotic_functional`, the large-`a` limit.
    pub limit: f64,
}

/// Evaluates the scaled separable form for each `a`.
pub fn instability_sweep<T: Real>(
    p: &Profile1D<T>,
    _nl: &Nonlinearity<T>,
    m: usize,
    fam: &EtaFamily<T>,
    a_values: &[T],
) -> Result<InstabilitySweep> {
    if a_values.is_empty() || a_values.iter().any(|a| !(*a >= T::one())) {
        return Err(Error::InvalidParameter("sweep scales must be at least 1".into()));
    }
    if a_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("sweep scales must be increasing".into()));
    }
    let opts = FormOptions::default();
    let mut points = Vec::with_capacity(a_values.len());
    for a in a_values {
        let report = separable_form(p, m, fam, *a, &opts)?;
        let d = p.derivative(*a * fam.rho1);
        points.push(SweepPoint { a: a.as_f64(), value: report.value, report, inner_correction: (*a * d * d).as_f64() });
    }
    let limit = p.kinetic_integral() * fam.asymptotic_functional_exact(m);
    Ok(InstabilitySweep {
        m,
        family: EtaFamily { rho1: fam.rho1.as_f64(), rho2: fam.rho2.as_f64(), alpha: fam.alpha.as_f64() },
        points,
        limit: limit.as_f64(),
    })
}

/// Large-`a` limit of the sweep for an arbitrary `eta`.
pub fn sweep_limit<T: Real, E: Eta<T>>(p: &Profile1D<T>, eta: &E, m: usize) -> T {
    p.kinetic_integral() * asymptotic_functional(eta, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::eta::PiecewiseLinearEta;

    struct Zero;
    impl Perturbation<f64> for Zero {
        fn eval(&self, _: f64, _: f64) -> (f64, f64, f64) {
            (0.0, 0.0, 0.0)
        }
        fn y_breaks(&self) -> Vec<f64> {
            vec![1.0, 3.0]
        }
    }

    #[test]
    fn zero_perturbation() {
        let nl = Nonlinearity::allen_cahn();
        let p = Profile1D::build_default(&nl).unwrap();
        let r = quadratic_form_yz(Background::Profile(&p), &Zero, &nl, 2, &FormOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn separable_split_matches_direct() {
        let nl = Nonlinearity::allen_cahn();
        let p = Profile1D::build_default(&nl).unwrap();
        let eta = PiecewiseLinearEta::new(vec![0.5, 2.0, 4.0, 9.0], vec![0.0, 1.0, 0.7, 0.0]).unwrap();
        for m in 1..=3 {
            let sep = separable_form(&p, m, &eta, 1.0, &FormOptions::default()).unwrap();
            let xi = Separable { eta: &eta, a: 1.0, profile: &p };
            let direct = quadratic_form_yz(Background::Profile(&p), &xi, &nl, m, &FormOptions::default()).unwrap();
            assert!((sep.value - direct.value).abs() < 1e-8 * direct.value.abs().max(1.0), "m = {m}");
            let sum = sep.gradient_term + sep.potential_term + sep.boundary_term;
            assert!((sum - sep.value).abs() < 1e-12 * sep.value.abs().max(1.0));
        }
    }
}
