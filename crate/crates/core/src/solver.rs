//! Minimization of the reduced energy
//! `a_m \int s^(m-1) t^(m-1) { |grad u|^2 / 2 + G(u) }` over the sector, with
//! `u = 0` on the cone, truncation to `[0, M]`, and odd reflection across the
//! cone to the full quarter plane.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{NodeClass, TriangleGrid};
use crate::linalg::BandedSym;
use crate::nonlinearity::Nonlinearity;
use crate::profile1d::Profile1D;
use crate::scalar::{block_radial_constant, Real};

/// Nodal values on a sector grid.
#[derive(Debug, Clone)]
pub struct Field<T> {
    grid: Arc<TriangleGrid<T>>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: Arc<TriangleGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<TriangleGrid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    /// Samples `g(s, t)` at every node.
    pub fn from_fn(grid: Arc<TriangleGrid<T>>, mut g: impl FnMut(T, T) -> T) -> Self {
        let values = grid.nodes().iter().map(|n| g(n.s, n.t)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TriangleGrid<T> {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<TriangleGrid<T>> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Value at lattice point `(i, j)` of the sector.
    pub fn at(&self, i: usize, j: usize) -> Option<T> {
        self.grid.index(i, j).map(|k| self.values[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Dirichlet,
    Profile,
}

impl FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Self::Dirichlet),
            "profile" => Ok(Self::Profile),
            _ => Err(Error::InvalidParameter(format!("unknown boundary mode `{s}`"))),
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Profile => "profile",
        })
    }
}

/// Data on the outer arc: zero, or the profile `u0((s - t)/sqrt 2)`.
#[derive(Debug, Clone, Copy)]
pub enum Boundary<'a, T> {
    Dirichlet,
    Profile(&'a Profile1D<T>),
}

impl<T: Real> Boundary<'_, T> {
    pub fn mode(&self) -> BoundaryMode {
        match self {
            Boundary::Dirichlet => BoundaryMode::Dirichlet,
            Boundary::Profile(_) => BoundaryMode::Profile,
        }
    }

    fn arc_value(&self, s: T, t: T, well: T) -> T {
        match self {
            Boundary::Dirichlet => T::zero(),
            Boundary::Profile(p) => p.value((s - t) / T::SQRT_2()).max(T::zero()).min(well),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Projected Newton with a Levenberg shift and Armijo backtracking.
    Newton,
    /// Nonlinear Gauss-Seidel sweeps with a safeguarded one-node Newton step.
    GaussSeidel,
    /// Projected gradient descent with a Jacobi-scaled step.
    Gradient,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(Self::Newton),
            "gauss-seidel" | "gs" => Ok(Self::GaussSeidel),
            "gradient" => Ok(Self::Gradient),
            _ => Err(Error::InvalidParameter(format!("unknown solver method `{s}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Newton => "newton",
            Self::GaussSeidel => "gauss-seidel",
            Self::Gradient => "gradient",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stop once the sup-norm of an accepted update falls below this.
    pub tol: f64,
    pub method: Method,
    /// Initial step for the gradient method, in units of `h^2 / 4`.
    pub step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-10, method: Method::Newton, step: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_step_norm: f64,
    /// Sup of the discrete Euler-Lagrange residual at interior nodes with `s, t >= 2h`.
    pub el_residual_sup: f64,
    /// `max(1, max |u_ss|, |u_tt|)` over the same nodes.
    pub curvature_scale: f64,
    /// Sup of the one-sided `u_t` on the axis.
    pub axis_flux_sup: f64,
    pub positivity_min: f64,
    pub interior_max: f64,
    pub method: Method,
    pub boundary: BoundaryMode,
    pub energy_history: Vec<f64>,
}

/// `a_m` times the discrete energy of the sector field.
pub fn discrete_energy<T: Real>(fld: &Field<T>, nl: &Nonlinearity<T>) -> T {
    let a = block_radial_constant::<T>(fld.grid.m());
    a * raw_energy(&fld.grid, &fld.values, nl)
}

fn raw_energy<T: Real>(grid: &TriangleGrid<T>, u: &[T], nl: &Nonlinearity<T>) -> T {
    let mut grad = T::zero();
    for e in grid.edges() {
        let d = u[e.p] - u[e.q];
        grad = grad + e.coupling * d * d;
    }
    let pot: T = grid.mass().iter().zip(u).map(|(w, v)| *w * nl.potential(*v)).sum();
    grad + pot
}

// gradient of the raw energy at every node
fn raw_gradient<T: Real>(grid: &TriangleGrid<T>, u: &[T], nl: &Nonlinearity<T>, out: &mut [T]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = -grid.mass()[k] * nl.f(u[k]);
    }
    let two = T::lit(2.0);
    for e in grid.edges() {
        let d = two * e.coupling * (u[e.p] - u[e.q]);
        out[e.p] = out[e.p] + d;
        out[e.q] = out[e.q] - d;
    }
}

fn is_free(class: NodeClass) -> bool {
    matches!(class, NodeClass::Interior | NodeClass::Axis)
}

/// `min{M, (s - t)/sqrt 2}` at free nodes, boundary data elsewhere.
pub fn initial_guess<T: Real>(grid: Arc<TriangleGrid<T>>, nl: &Nonlinearity<T>, boundary: &Boundary<'_, T>) -> Field<T> {
    let well = nl.well();
    let values = grid
        .nodes()
        .iter()
        .map(|n| match n.class {
            NodeClass::Cone => T::zero(),
            NodeClass::Arc => boundary.arc_value(n.s, n.t, well),
            _ => ((n.s - n.t) / T::SQRT_2()).min(well),
        })
        .collect();
    Field { grid, values }
}

/// Minimizes the discrete energy starting from `fld`.
pub fn minimize<T: Real>(
    fld: Field<T>,
    nl: &Nonlinearity<T>,
    boundary: &Boundary<'_, T>,
    opts: &SolveOptions,
) -> Result<(Field<T>, SolveReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("solver.tol = {} must be positive", opts.tol)));
    }
    let mut fld = fld;
    let grid = fld.shared_grid();
    let well = nl.well();
    for (n, v) in grid.nodes().iter().zip(fld.values.iter_mut()) {
        *v = match n.class {
            NodeClass::Cone => T::zero(),
            NodeClass::Arc => boundary.arc_value(n.s, n.t, well),
            _ => v.max(T::zero()).min(well),
        };
    }
    let mut state = Descent::new(&grid, nl);
    let mut history = vec![state.energy(&fld.values)];
    let mut step_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let tol = T::lit(opts.tol);
    while iterations < opts.max_iter {
        iterations += 1;
        let before = *history.last().unwrap_or(&T::zero());
        let change = match opts.method {
            Method::Newton => state.newton_step(&mut fld.values),
            Method::GaussSeidel => state.gauss_seidel_sweep(&mut fld.values),
            Method::Gradient => state.gradient_step(&mut fld.values, T::lit(opts.step)),
        };
        let after = state.energy(&fld.values);
        let slack = T::lit(1e-12) * before.abs().max(T::one());
        if after > before + slack {
            return Err(Error::NonDecreaseFailure {
                iteration: iterations,
                before: before.as_f64(),
                after: after.as_f64(),
            });
        }
        history.push(after);
        step_norm = change.as_f64();
        if change < tol {
            converged = true;
            break;
        }
    }
    let a = block_radial_constant::<T>(grid.m());
    let diag = el_diagnostics(&fld, nl);
    let report = SolveReport {
        energy: (a * *history.last().unwrap_or(&T::zero())).as_f64(),
        iterations,
        converged,
        final_step_norm: step_norm,
        el_residual_sup: diag.residual_sup,
        curvature_scale: diag.curvature_scale,
        axis_flux_sup: diag.axis_flux_sup,
        positivity_min: diag.positivity_min,
        interior_max: diag.interior_max,
        method: opts.method,
        boundary: boundary.mode(),
        energy_history: history.iter().map(|e| (a * *e).as_f64()).collect(),
    };
    Ok((fld, report))
}

/// Builds the grid, the initial guess and runs [`minimize`].
pub fn solve<T: Real>(
    nl: &Nonlinearity<T>,
    m: usize,
    radius: T,
    h: T,
    boundary: &Boundary<'_, T>,
    opts: &SolveOptions,
) -> Result<(Field<T>, SolveReport)> {
    let grid = Arc::new(TriangleGrid::build(m, radius, h)?);
    let guess = initial_guess(grid, nl, boundary);
    minimize(guess, nl, boundary, opts)
}

struct Descent<'a, T> {
    grid: &'a TriangleGrid<T>,
    nl: &'a Nonlinearity<T>,
    free: Vec<usize>,
    // position of each node among the free nodes
    slot: Vec<Option<usize>>,
    shift: T,
    grad: Vec<T>,
}

impl<'a, T: Real> Descent<'a, T> {
    fn new(grid: &'a TriangleGrid<T>, nl: &'a Nonlinearity<T>) -> Self {
        let free: Vec<usize> = (0..grid.len()).filter(|k| is_free(grid.nodes()[*k].class)).collect();
        let mut slot = vec![None; grid.len()];
        for (r, k) in free.iter().enumerate() {
            slot[*k] = Some(r);
        }
        Self { grid, nl, free, slot, shift: T::zero(), grad: vec![T::zero(); grid.len()] }
    }

    fn energy(&self, u: &[T]) -> T {
        raw_energy(self.grid, u, self.nl)
    }

    fn stiffness_diag(&self, k: usize) -> T {
        let two = T::lit(2.0);
        self.grid.neighbors(k).iter().map(|(_, c)| two * *c).sum()
    }

    // a free node at a bound whose gradient pushes outward stays put
    fn held(&self, u: T, g: T) -> bool {
        (u <= T::zero() && g > T::zero()) || (u >= self.nl.well() && g < T::zero())
    }

    // Armijo backtracking along the projected path u + alpha d; returns the
    // sup-norm of the accepted change.
    fn line_search(&mut self, u: &mut [T], dir: &[T], slope: T) -> T {
        let well = self.nl.well();
        let e0 = self.energy(u);
        let mut trial = u.to_vec();
        let mut alpha = T::one();
        for _ in 0..50 {
            for (r, k) in self.free.iter().enumerate() {
                trial[*k] = (u[*k] + alpha * dir[r]).max(T::zero()).min(well);
            }
            let e1 = self.energy(&trial);
            if e1 <= e0 + T::lit(1e-4) * alpha * slope {
                let change = self.free.iter().map(|k| (trial[*k] - u[*k]).abs()).fold(T::zero(), T::max);
                u.copy_from_slice(&trial);
                return change;
            }
            alpha = alpha * T::lit(0.5);
        }
        T::zero()
    }

    fn newton_step(&mut self, u: &mut [T]) -> T {
        let mut grad = std::mem::take(&mut self.grad);
        raw_gradient(self.grid, u, self.nl, &mut grad);
        let n = self.free.len();
        let active: Vec<bool> = self.free.iter().map(|k| !self.held(u[*k], grad[*k])).collect();
        let bw = self
            .grid
            .edges()
            .iter()
            .filter_map(|e| Some(self.slot[e.p]?.abs_diff(self.slot[e.q]?)))
            .max()
            .unwrap_or(0);
        let mut base = BandedSym::zeros(n, bw);
        let two = T::lit(2.0);
        for e in self.grid.edges() {
            let c = two * e.coupling;
            let (p, q) = (self.slot[e.p], self.slot[e.q]);
            if let Some(p) = p.filter(|r| active[*r]) {
                base.add(p, p, c);
                if let Some(q) = q.filter(|r| active[*r]) {
                    base.add(p, q, -c);
                }
            }
            if let Some(q) = q.filter(|r| active[*r]) {
                base.add(q, q, c);
            }
        }
        let mut stiff_diag = vec![T::zero(); n];
        for (r, k) in self.free.iter().enumerate() {
            stiff_diag[r] = base.get(r, r).max(T::lit(1e-300));
            if active[r] {
                base.add(r, r, -self.grid.mass()[*k] * self.nl.fprime(u[*k]));
            } else {
                base.add(r, r, T::one());
            }
        }
        let rhs: Vec<T> = self
            .free
            .iter()
            .enumerate()
            .map(|(r, k)| if active[r] { -grad[*k] } else { T::zero() })
            .collect();
        let mut dir = None;
        let mut shift = self.shift;
        for _ in 0..40 {
            let mut h = base.clone();
            if shift > T::zero() {
                for (r, d) in stiff_diag.iter().enumerate() {
                    h.add(r, r, shift * *d);
                }
            }
            if let Ok(f) = h.cholesky() {
                let mut d = rhs.clone();
                f.solve(&mut d);
                let slope: T = d.iter().zip(&rhs).map(|(a, b)| -*a * *b).sum();
                if slope < T::zero() {
                    dir = Some((d, slope));
                    break;
                }
            }
            shift = (shift * T::lit(10.0)).max(T::lit(1e-4));
        }
        self.shift = shift * T::lit(0.1);
        if self.shift < T::lit(1e-8) {
            self.shift = T::zero();
        }
        let (d, slope) = dir.unwrap_or_else(|| {
            let d: Vec<T> = rhs.iter().zip(&stiff_diag).map(|(g, s)| *g / *s).collect();
            let slope = d.iter().zip(&rhs).map(|(a, b)| -*a * *b).sum();
            (d, slope)
        });
        self.grad = grad;
        if !(slope < T::zero()) {
            return T::zero();
        }
        self.line_search(u, &d, slope)
    }

    fn gradient_step(&mut self, u: &mut [T], step: T) -> T {
        let mut grad = std::mem::take(&mut self.grad);
        raw_gradient(self.grid, u, self.nl, &mut grad);
        let dir: Vec<T> = self
            .free
            .iter()
            .map(|k| {
                if self.held(u[*k], grad[*k]) {
                    T::zero()
                } else {
                    -step * grad[*k] / self.stiffness_diag(*k)
                }
            })
            .collect();
        let slope: T = self.free.iter().zip(&dir).map(|(k, d)| grad[*k] * *d).sum();
        self.grad = grad;
        if !(slope < T::zero()) {
            return T::zero();
        }
        self.line_search(u, &dir, slope)
    }

    fn gauss_seidel_sweep(&mut self, u: &mut [T]) -> T {
        let well = self.nl.well();
        let two = T::lit(2.0);
        let mut change = T::zero();
        for r in 0..self.free.len() {
            let k = self.free[r];
            let mass = self.grid.mass()[k];
            let nbrs = self.grid.neighbors(k);
            let diag: T = nbrs.iter().map(|(_, c)| two * *c).sum();
            let local = |v: T| -> T {
                nbrs.iter().map(|(q, c)| *c * (v - u[*q]) * (v - u[*q])).sum::<T>() + mass * self.nl.potential(v)
            };
            let old = u[k];
            let g = nbrs.iter().map(|(q, c)| two * *c * (old - u[*q])).sum::<T>() - mass * self.nl.f(old);
            let curv = diag - mass * self.nl.fprime(old);
            let mut delta = -g / if curv > T::zero() { curv } else { diag };
            let e0 = local(old);
            let mut accepted = old;
            for _ in 0..30 {
                let v = (old + delta).max(T::zero()).min(well);
                if local(v) <= e0 {
                    accepted = v;
                    break;
                }
                delta = delta * T::lit(0.5);
            }
            change = change.max((accepted - old).abs());
            u[k] = accepted;
        }
        change
    }
}

struct ElDiagnostics {
    residual_sup: f64,
    curvature_scale: f64,
    axis_flux_sup: f64,
    positivity_min: f64,
    interior_max: f64,
}

/// Central-difference residual `-(u_ss + u_tt) - (m-1)(u_s/s + u_t/t) - f(u)`
/// at interior nodes with `s, t >= 2h`, as `(node, residual, max(|u_ss|, |u_tt|))`.
pub fn el_residuals<T: Real>(fld: &Field<T>, nl: &Nonlinearity<T>) -> Vec<(usize, T, T)> {
    let grid = fld.grid();
    let h = grid.h();
    let m1 = T::from_usize_lossy(grid.m() - 1);
    let two = T::lit(2.0);
    let mut out = Vec::new();
    for (k, n) in grid.nodes().iter().enumerate() {
        if n.class != NodeClass::Interior || n.i < 2 || n.j < 2 {
            continue;
        }
        let (Some(e), Some(w), Some(no), Some(so)) =
            (fld.at(n.i + 1, n.j), fld.at(n.i - 1, n.j), fld.at(n.i, n.j + 1), fld.at(n.i, n.j - 1))
        else {
            continue;
        };
        let u = fld.values[k];
        let uss = (e - two * u + w) / (h * h);
        let utt = (no - two * u + so) / (h * h);
        let us = (e - w) / (two * h);
        let ut = (no - so) / (two * h);
        let r = -(uss + utt) - m1 * (us / n.s + ut / n.t) - nl.f(u);
        out.push((k, r, uss.abs().max(utt.abs())));
    }
    out
}

fn el_diagnostics<T: Real>(fld: &Field<T>, nl: &Nonlinearity<T>) -> ElDiagnostics {
    let res = el_residuals(fld, nl);
    let residual_sup = res.iter().map(|r| r.1.abs()).fold(T::zero(), T::max).as_f64();
    let curvature_scale = res.iter().map(|r| r.2).fold(T::one(), T::max).as_f64();
    let grid = fld.grid();
    let h = grid.h();
    let mut axis_flux_sup = T::zero();
    let mut positivity_min = T::infinity();
    let mut interior_max = T::neg_infinity();
    for (k, n) in grid.nodes().iter().enumerate() {
        match n.class {
            NodeClass::Axis => {
                if let (Some(u1), Some(u2)) = (fld.at(n.i, 1), fld.at(n.i, 2)) {
                    let d = (-T::lit(3.0) * fld.values[k] + T::lit(4.0) * u1 - u2) / (T::lit(2.0) * h);
                    axis_flux_sup = axis_flux_sup.max(d.abs());
                }
            }
            NodeClass::Interior => {
                positivity_min = positivity_min.min(fld.values[k]);
                interior_max = interior_max.max(fld.values[k]);
            }
            _ => {}
        }
    }
    ElDiagnostics {
        residual_sup,
        curvature_scale,
        axis_flux_sup: axis_flux_sup.as_f64(),
        positivity_min: positivity_min.as_f64(),
        interior_max: interior_max.as_f64(),
    }
}

/// The odd extension of a sector field to the square `[0, R]^2` of the
/// `(s, t)` quarter plane, `u(t, s) = -u(s, t)`.
#[derive(Debug, Clone)]
pub struct SaddleField<T> {
    sector: Field<T>,
    side: usize,
    values: Vec<Option<T>>,
}

pub fn reflect_odd<T: Real>(fld: &Field<T>) -> SaddleField<T> {
    let grid = fld.grid();
    let side = grid.nodes().iter().map(|n| n.i).max().unwrap_or(0) + 1;
    let mut values = vec![None; side * side];
    for (n, v) in grid.nodes().iter().zip(fld.values()) {
        if n.i == n.j {
            values[n.i * side + n.j] = Some(T::zero());
        } else {
            values[n.i * side + n.j] = Some(*v);
            values[n.j * side + n.i] = Some(-*v);
        }
    }
    SaddleField { sector: fld.clone(), side, values }
}

impl<T: Real> SaddleField<T> {
    /// Value at `(s, t) = (i h, j h)`, `None` outside the disk.
    pub fn at(&self, i: usize, j: usize) -> Option<T> {
        if i >= self.side || j >= self.side {
            return None;
        }
        self.values[i * self.side + j]
    }

    pub fn sector(&self) -> &Field<T> {
        &self.sector
    }

    pub fn grid(&self) -> &TriangleGrid<T> {
        self.sector.grid()
    }

    /// Number of lattice points per side of the square.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().flatten().map(|v| v.abs()).fold(T::zero(), T::max)
    }
}

/// Energy of the odd reflection of `fld` in `B_r`: twice the sector energy
/// restricted to edges and nodes inside the ball.
pub fn ball_energy<T: Real>(fld: &Field<T>, nl: &Nonlinearity<T>, r: T) -> T {
    let grid = fld.grid();
    let r2 = r * r * (T::one() + T::lit(1e-12));
    let u = fld.values();
    let mut total = T::zero();
    for e in grid.edges() {
        if e.mid.0 * e.mid.0 + e.mid.1 * e.mid.1 <= r2 {
            let d = u[e.p] - u[e.q];
            total = total + e.coupling * d * d;
        }
    }
    for (k, n) in grid.nodes().iter().enumerate() {
        if n.s * n.s + n.t * n.t <= r2 {
            total = total + grid.mass()[k] * nl.potential(u[k]);
        }
    }
    T::lit(2.0) * block_radial_constant::<T>(grid.m()) * total
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyGrowth {
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    /// Least-squares slope of `log E` against `log R`.
    pub slope: f64,
    pub solve: Option<SolveReport>,
}

/// Ball energies of a fixed field at each radius, with the fitted slope.
pub fn ball_energy_growth<T: Real>(fld: &Field<T>, nl: &Nonlinearity<T>, radii: &[T]) -> Result<EnergyGrowth> {
    check_radii(radii)?;
    let energies: Vec<f64> = radii.iter().map(|r| ball_energy(fld, nl, *r).as_f64()).collect();
    let radii: Vec<f64> = radii.iter().map(|r| r.as_f64()).collect();
    let slope = loglog_slope(&radii, &energies);
    Ok(EnergyGrowth { radii, energies, slope, solve: None })
}

/// Solves once at the largest radius and measures the energy growth of the
/// reflected solution over the given balls.
pub fn energy_growth_study<T: Real>(
    nl: &Nonlinearity<T>,
    m: usize,
    radii: &[T],
    h: T,
    boundary: &Boundary<'_, T>,
    opts: &SolveOptions,
) -> Result<EnergyGrowth> {
    check_radii(radii)?;
    let largest = radii[radii.len() - 1];
    let (fld, report) = solve(nl, m, largest, h, boundary, opts)?;
    let mut growth = ball_energy_growth(&fld, nl, radii)?;
    growth.solve = Some(report);
    Ok(growth)
}

fn check_radii<T: Real>(radii: &[T]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::InvalidParameter("energy growth needs at least 3 radii".into()));
    }
    if radii.iter().any(|r| !(*r >= T::lit(4.0))) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("radii must be increasing and at least 4".into()));
    }
    Ok(())
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
