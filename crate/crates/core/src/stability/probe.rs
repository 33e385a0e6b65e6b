//! Randomized check that the second variation is nonnegative on
//! perturbations vanishing on the cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::default_slack;
use crate::geometry::NodeClass;
use crate::nonlinearity::Nonlinearity;
use crate::scalar::{block_radial_constant, Real};
use crate::solver::SaddleField;

/// `Q(xi) = \int |grad xi|^2 - f'(u) xi^2` over the ball for the function
/// of `(s, t)` whose sector values are `xi`, reflected across the cone (even
/// and odd reflections give the same value). `xi` must vanish on arc nodes.
pub fn nodal_quadratic_form<T: Real>(fld: &SaddleField<T>, nl: &Nonlinearity<T>, xi: &[T]) -> Result<T> {
    let grid = fld.grid();
    if xi.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: xi.len() });
    }
    let u = fld.sector().values();
    let two = T::lit(2.0);
    let mut q = T::zero();
    for e in grid.edges() {
        let d = xi[e.p] - xi[e.q];
        q = q + two * e.coupling * d * d;
    }
    for (k, x) in xi.iter().enumerate() {
        q = q - grid.mass()[k] * nl.fprime(u[k]) * *x * *x;
    }
    // two sectors, each carrying the angular factor a_m
    Ok(two * block_radial_constant::<T>(grid.m()) * q)
}

/// `\int xi^2` over the ball for the same extension.
pub fn nodal_l2_squared<T: Real>(fld: &SaddleField<T>, xi: &[T]) -> T {
    let grid = fld.grid();
    let s: T = xi.iter().zip(grid.mass()).map(|(x, w)| *x * *x * *w).sum();
    T::lit(2.0) * block_radial_constant::<T>(grid.m()) * s
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub seed: u64,
    /// Smallest `Q(xi) / \int xi^2` over the trials.
    pub min_q: f64,
    pub worst_trial: usize,
    pub slack: f64,
    pub pass: bool,
}

/// Draws `trials` perturbations `(s - t) P(s, t) chi(r)` with `P` a random
/// cubic and `chi` a radial bump vanishing at the arc, and reports the
/// smallest normalized second variation.
pub fn cone_vanishing_stability_probe<T: Real>(
    fld: &SaddleField<T>,
    nl: &Nonlinearity<T>,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let hyp = nl.check_hypotheses(2001)?;
    if !hyp.h3.pass {
        return Err(Error::HypothesisViolated { hypothesis: "H3", witness: hyp.h3.witness });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let grid = fld.grid();
    let r = grid.radius();
    let rc = r - T::lit(2.0) * grid.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xi = vec![T::zero(); grid.len()];
    let mut min_q = T::infinity();
    let mut worst = 0;
    for trial in 0..trials {
        let c: Vec<T> = (0..10).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        for (k, n) in grid.nodes().iter().enumerate() {
            let (x, y) = (n.s / r, n.t / r);
            let rr = (n.s * n.s + n.t * n.t) / (rc * rc);
            xi[k] = if n.class == NodeClass::Arc || rr >= T::one() {
                T::zero()
            } else {
                let p = c[0]
                    + c[1] * x
                    + c[2] * y
                    + c[3] * x * x
                    + c[4] * x * y
                    + c[5] * y * y
                    + c[6] * x * x * x
                    + c[7] * x * x * y
                    + c[8] * x * y * y
                    + c[9] * y * y * y;
                let bump = (T::one() - rr) * (T::one() - rr);
                (x - y) * p * bump
            };
        }
        let norm = nodal_l2_squared(fld, &xi);
        if !(norm > T::zero()) {
            continue;
        }
        let q = nodal_quadratic_form(fld, nl, &xi)? / norm;
        if q < min_q {
            min_q = q;
            worst = trial;
        }
    }
    let slack = default_slack(grid.h());
    Ok(ProbeReport {
        trials,
        seed,
        min_q: min_q.as_f64(),
        worst_trial: worst,
        slack: slack.as_f64(),
        pass: min_q >= -slack,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::TriangleGrid;
    use crate::solver::{reflect_odd, Field};

    #[test]
    fn rejects_convex_nonlinearity() {
        // f = u + u^3 - 2u^5 is not concave on (0, 1)
        let nl = Nonlinearity::odd_polynomial(vec![1.0, 1.0, -2.0], 1.0).unwrap();
        let g = Arc::new(TriangleGrid::build(2, 8.0, 0.25).unwrap());
        let f = reflect_odd(&Field::zeros(g));
        let err = cone_vanishing_stability_probe(&f, &nl, 3, 1).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated { hypothesis: "H3", .. }));
    }

    #[test]
    fn constant_well_background_is_stable() {
        // around u = 1 the operator is -Delta + 2
        let nl = Nonlinearity::allen_cahn();
        let g = Arc::new(TriangleGrid::build(1, 8.0, 0.25).unwrap());
        let f = reflect_odd(&Field::from_fn(g, |_, _| 1.0));
        let rep = cone_vanishing_stability_probe(&f, &nl, 20, 7).unwrap();
        assert!(rep.pass && rep.min_q > 2.0, "{rep:?}");
    }
}
