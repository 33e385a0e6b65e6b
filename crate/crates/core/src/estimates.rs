//! A posteriori checks of computed saddle fields: the bound by the profile of
//! the distance to the cone, the gradient bound `|grad u|^2 / 2 <= G(u)`, and
//! the supersolution property of `u0((s - t)/sqrt 2)`.

use serde::Serialize;

use crate::geometry::{NodeClass, TriangleGrid};
use crate::nonlinearity::Nonlinearity;
use crate::profile1d::Profile1D;
use crate::scalar::Real;
use crate::solver::SaddleField;

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub name: String,
    /// Largest violation found; positive means the inequality failed there.
    pub worst_violation: f64,
    pub worst_node: (f64, f64),
    pub tolerance_used: f64,
    pub pass: bool,
    pub checked: usize,
}

impl EstimateReport {
    fn from_samples<T: Real>(name: &str, samples: impl Iterator<Item = (T, T, T)>, tolerance: T) -> Self {
        let mut worst = T::neg_infinity();
        let mut node = (T::zero(), T::zero());
        let mut checked = 0;
        for (s, t, v) in samples {
            checked += 1;
            if v > worst {
                worst = v;
                node = (s, t);
            }
        }
        let pass = checked > 0 && worst <= tolerance;
        Self {
            name: name.to_string(),
            worst_violation: worst.as_f64(),
            worst_node: (node.0.as_f64(), node.1.as_f64()),
            tolerance_used: tolerance.as_f64(),
            pass,
            checked,
        }
    }
}

/// Default discretization slack `10 h^2`.
pub fn default_slack<T: Real>(h: T) -> T {
    T::lit(10.0) * h * h
}

/// `max (|grad_h u|^2 / 2 - G(u))` with central differences on the reflected
/// field, at sector interior nodes whose four neighbours are free nodes.
pub fn modica_check<T: Real>(fld: &SaddleField<T>, nl: &Nonlinearity<T>, tolerance: T) -> EstimateReport {
    let grid = fld.grid();
    let h = grid.h();
    let two_h = T::lit(2.0) * h;
    let half = T::lit(0.5);
    let samples = grid.nodes().iter().filter_map(|n| {
        if n.class != NodeClass::Interior || !stencil_is_free(grid, n.i, n.j) {
            return None;
        }
        let u = fld.at(n.i, n.j)?;
        let us = (fld.at(n.i + 1, n.j)? - fld.at(n.i - 1, n.j)?) / two_h;
        let ut = (fld.at(n.i, n.j + 1)? - fld.at(n.i, n.j - 1)?) / two_h;
        Some((n.s, n.t, half * (us * us + ut * ut) - nl.potential(u)))
    });
    EstimateReport::from_samples("modica", samples, tolerance)
}

// the four lattice neighbours exist and none is an arc node
fn stencil_is_free<T: Real>(grid: &TriangleGrid<T>, i: usize, j: usize) -> bool {
    [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)].iter().all(|(a, b)| {
        if b > a {
            // across the cone: mirror of (b, a)
            return grid.index(*b, *a).is_some_and(|k| grid.nodes()[k].class != NodeClass::Arc);
        }
        grid.index(*a, *b).is_some_and(|k| grid.nodes()[k].class != NodeClass::Arc)
    })
}

/// Modica check for the one-dimensional field `u0((s - t)/sqrt 2)` with its
/// exact gradient, whose norm is `u0dot(z)`.
pub fn modica_check_profile<T: Real>(
    p: &Profile1D<T>,
    nl: &Nonlinearity<T>,
    grid: &TriangleGrid<T>,
    tolerance: T,
) -> EstimateReport {
    let half = T::lit(0.5);
    let samples = grid.nodes().iter().map(|n| {
        let pt = p.eval((n.s - n.t) / T::SQRT_2());
        (n.s, n.t, half * pt.du * pt.du - nl.potential(pt.u))
    });
    EstimateReport::from_samples("modica_profile", samples, tolerance)
}

/// `max (|u(s,t)| - |u0((s - t)/sqrt 2)|)` over all sector nodes.
pub fn pointwise_bound_check<T: Real>(fld: &SaddleField<T>, p: &Profile1D<T>, tolerance: T) -> EstimateReport {
    let grid = fld.grid();
    let samples = grid.nodes().iter().filter_map(|n| {
        let u = fld.at(n.i, n.j)?;
        Some((n.s, n.t, u.abs() - p.value((n.s - n.t) / T::SQRT_2()).abs()))
    });
    EstimateReport::from_samples("pointwise_bound", samples, tolerance)
}

/// `-Delta v - f(v)` for `v = u0((s - t)/sqrt 2)`, from the reduced operator
/// `-(v_ss + v_tt) - (m-1)(v_s/s + v_t/t)` and the profile derivatives.
pub fn supersolution_residual<T: Real>(p: &Profile1D<T>, nl: &Nonlinearity<T>, m: usize, s: T, t: T) -> T {
    let pt = p.eval((s - t) / T::SQRT_2());
    let r2 = T::SQRT_2();
    let vs = pt.du / r2;
    let vt = -pt.du / r2;
    let vss = pt.ddu / T::lit(2.0);
    let vtt = pt.ddu / T::lit(2.0);
    let m1 = T::from_usize_lossy(m - 1);
    -(vss + vtt) - m1 * (vs / s + vt / t) - nl.f(pt.u)
}

/// Closed form `(m-1) (u0dot(z)/sqrt 2) (1/t - 1/s)` of the same residual.
pub fn supersolution_closed_form<T: Real>(p: &Profile1D<T>, m: usize, s: T, t: T) -> T {
    let du = p.derivative((s - t) / T::SQRT_2());
    T::from_usize_lossy(m - 1) * du / T::SQRT_2() * (T::one() / t - T::one() / s)
}

/// Checks that the residual is nonnegative at every grid node with `s > t > 0`.
pub fn supersolution_check<T: Real>(
    p: &Profile1D<T>,
    nl: &Nonlinearity<T>,
    grid: &TriangleGrid<T>,
    tolerance: T,
) -> EstimateReport {
    let m = grid.m();
    let samples = grid
        .nodes()
        .iter()
        .filter(|n| n.t > T::zero() && n.s > n.t)
        .map(|n| (n.s, n.t, -supersolution_residual(p, nl, m, n.s, n.t)));
    EstimateReport::from_samples("supersolution", samples, tolerance)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::solver::{reflect_odd, Field};

    fn setup() -> (Nonlinearity<f64>, Profile1D<f64>, Arc<TriangleGrid<f64>>) {
        let nl = Nonlinearity::allen_cahn();
        let p = Profile1D::build_default(&nl).unwrap();
        let g = Arc::new(TriangleGrid::build(2, 8.0, 0.125).unwrap());
        (nl, p, g)
    }

    #[test]
    fn constant_zero_field() {
        let (nl, _, g) = setup();
        let f = reflect_odd(&Field::zeros(g));
        let r = modica_check(&f, &nl, 1e-9);
        assert!((r.worst_violation + 0.25).abs() < 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn profile_field_equality_cases() {
        let (nl, p, g) = setup();
        let f = reflect_odd(&Field::from_fn(Arc::clone(&g), |s, t| p.value((s - t) / 2f64.sqrt())));
        let r = pointwise_bound_check(&f, &p, 0.0);
        assert_eq!(r.worst_violation, 0.0);
        assert!(r.pass);
        let exact = modica_check_profile(&p, &nl, &g, 1e-9);
        assert!(exact.pass && exact.worst_violation.abs() < 1e-9, "{}", exact.worst_violation);
        let fd = modica_check(&f, &nl, default_slack(g.h()));
        assert!(fd.pass && fd.worst_violation.abs() < 1e-2);
    }

    #[test]
    fn scaled_profile_fails_bound() {
        let (_, p, g) = setup();
        let f = reflect_odd(&Field::from_fn(g, |s, t| 1.2 * p.value((s - t) / 2f64.sqrt())));
        let r = pointwise_bound_check(&f, &p, 1e-3);
        assert!(!r.pass);
        assert!((r.worst_violation - 0.2 * p.value(8.0 / 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn supersolution_example() {
        let (nl, p, _) = setup();
        let r = supersolution_residual(&p, &nl, 2, 2.0, 1.0);
        let z = 0.5f64.sqrt();
        let du = 1.0 / (2f64.sqrt() * (z / 2f64.sqrt()).cosh().powi(2));
        assert!((du - 0.5562).abs() < 1e-4);
        assert!((r - du * 0.5 / 2f64.sqrt()).abs() < 1e-10);
        assert!((r - 0.1967).abs() < 1e-4);
        assert!(supersolution_residual(&p, &nl, 1, 2.0, 1.0).abs() < 1e-10);
    }
}
