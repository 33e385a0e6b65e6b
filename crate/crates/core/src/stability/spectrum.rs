//! Lowest eigenvalues of the linearized operator `-Delta - f'(u)` restricted
//! to functions of `(s, t)`, assembled on the sector grid.
//!
//! Functions on the quarter plane split into parts even and odd under
//! `(s, t) -> (t, s)`. Odd parts vanish on the cone (Dirichlet there); even
//! parts satisfy a zero-flux condition on it, so the cone nodes stay free.
//! The generalized problem `A x = lambda B x` with the lumped mass `B` is
//! reduced to `B^-1/2 A B^-1/2` and solved by shifted subspace iteration.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::NodeClass;
use crate::linalg::{symmetric_eigen, BandedSym};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;
use crate::solver::{Field, SaddleField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryClass {
    /// Even under the swap: free on the cone.
    Even,
    /// Odd under the swap: zero on the cone.
    Odd,
}

impl FromStr for SymmetryClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Self::Even),
            "odd" => Ok(Self::Odd),
            _ => Err(Error::InvalidParameter(format!("unknown symmetry class `{s}`"))),
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Even => "even",
            Self::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub k: usize,
    pub class: SymmetryClass,
    /// Keep only nodes with `inner < r < outer`.
    pub annulus: Option<(f64, f64)>,
    pub max_iter: usize,
    /// Negative means below `-rel_tol * ||B^-1/2 A B^-1/2||`.
    pub rel_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { k: 4, class: SymmetryClass::Even, annulus: None, max_iter: 5000, rel_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub morse_count: usize,
    pub tol: f64,
    pub operator_norm: f64,
    pub annulus: Option<(f64, f64)>,
    pub class: SymmetryClass,
    pub dof: usize,
    pub iterations: usize,
    pub max_residual: f64,
    /// Radial extent `(r_min, r_max)` of the nonzero set of each eigenvector.
    pub supports: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub report: SpectrumReport,
    /// Eigenvectors as nodal values on the sector grid, `B`-orthonormal.
    pub vectors: Vec<Vec<T>>,
}

struct Assembly<T> {
    nodes: Vec<usize>,
    scale: Vec<T>,
    matrix: BandedSym<T>,
    shift: T,
}

fn assemble<T: Real>(fld: &Field<T>, nl: &Nonlinearity<T>, opts: &SpectrumOptions) -> Result<Assembly<T>> {
    let grid = fld.grid();
    let u = fld.values();
    let in_band = |s: T, t: T| match opts.annulus {
        None => true,
        Some((a, b)) => {
            let r = (s * s + t * t).sqrt().as_f64();
            r > a && r < b
        }
    };
    let mut slot = vec![None; grid.len()];
    let mut nodes = Vec::new();
    for (k, n) in grid.nodes().iter().enumerate() {
        let allowed = match n.class {
            NodeClass::Arc => false,
            NodeClass::Cone => opts.class == SymmetryClass::Even,
            _ => true,
        };
        if allowed && grid.mass()[k] > T::zero() && in_band(n.s, n.t) {
            slot[k] = Some(nodes.len());
            nodes.push(k);
        }
    }
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("no degrees of freedom in the requested region".into()));
    }
    // massless nodes (the axis when m >= 2) copy their neighbour and drop out;
    // every other excluded node carries a zero value
    let slaved = |k: usize| grid.mass()[k] == T::zero() && grid.nodes()[k].class != NodeClass::Cone;
    let bw = grid
        .edges()
        .iter()
        .filter_map(|e| Some(slot[e.p]?.abs_diff(slot[e.q]?)))
        .max()
        .unwrap_or(0);
    let n = nodes.len();
    let mut a = BandedSym::zeros(n, bw);
    let two = T::lit(2.0);
    for e in grid.edges() {
        let c = two * e.coupling;
        match (slot[e.p], slot[e.q]) {
            (Some(p), Some(q)) => {
                a.add(p, p, c);
                a.add(q, q, c);
                a.add(p, q, -c);
            }
            (Some(p), None) if !slaved(e.q) => a.add(p, p, c),
            (None, Some(q)) if !slaved(e.p) => a.add(q, q, c),
            _ => {}
        }
    }
    let mut fmax = T::neg_infinity();
    for (r, k) in nodes.iter().enumerate() {
        let fp = nl.fprime(u[*k]);
        fmax = fmax.max(fp);
        a.add(r, r, -grid.mass()[*k] * fp);
    }
    let scale: Vec<T> = nodes.iter().map(|k| T::one() / grid.mass()[*k].sqrt()).collect();
    let mut c = BandedSym::zeros(n, bw);
    for i in 0..n {
        for j in i.saturating_sub(bw)..=i {
            let v = a.get(i, j);
            if v != T::zero() {
                c.add(i, j, v * scale[i] * scale[j]);
            }
        }
    }
    Ok(Assembly { nodes, scale, matrix: c, shift: -fmax - T::one() })
}

/// The `k` smallest eigenvalues of the linearization about the sector part
/// of `fld`.
pub fn linearized_spectrum<T: Real>(
    fld: &SaddleField<T>,
    nl: &Nonlinearity<T>,
    opts: &SpectrumOptions,
) -> Result<Spectrum<T>> {
    if opts.k == 0 || opts.k > 20 {
        return Err(Error::InvalidParameter(format!("k = {} must lie in 1..=20", opts.k)));
    }
    if let Some((a, b)) = opts.annulus {
        if !(a >= 0.0 && b > a) {
            return Err(Error::InvalidParameter(format!("annulus {a}:{b} must satisfy 0 <= inner < outer")));
        }
    }
    let sector = fld.sector();
    let asm = assemble(sector, nl, opts)?;
    let n = asm.nodes.len();
    let k = opts.k.min(n);
    let p = (k + 4 + k / 2).min(n);
    let norm = asm.matrix.row_sum_norm();
    let tol = T::lit(opts.rel_tol) * norm;

    let mut shifted = asm.matrix.clone();
    for i in 0..n {
        shifted.add(i, i, -asm.shift);
    }
    let factor = shifted.cholesky()?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<T>> = (0..p)
        .map(|_| (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect())
        .collect();
    orthonormalize(&mut x);
    let mut values = vec![T::zero(); p];
    let mut residual = T::infinity();
    let mut iterations = 0;
    let conv = T::lit(1e-9) * norm.max(T::one());
    let mut cx = vec![T::zero(); n];
    while iterations < opts.max_iter {
        iterations += 1;
        for v in x.iter_mut() {
            factor.solve(v);
        }
        orthonormalize(&mut x);
        // Rayleigh-Ritz on span(x)
        let cols: Vec<Vec<T>> = x
            .iter()
            .map(|v| {
                let mut out = vec![T::zero(); n];
                asm.matrix.mul_vec(v, &mut out);
                out
            })
            .collect();
        let mut h = vec![T::zero(); p * p];
        for i in 0..p {
            for j in 0..=i {
                let v = dot(&x[i], &cols[j]);
                h[i * p + j] = v;
                h[j * p + i] = v;
            }
        }
        let (theta, s) = symmetric_eigen(&h, p);
        let mut next = vec![vec![T::zero(); n]; p];
        let mut next_c = vec![vec![T::zero(); n]; p];
        for (col, (nv, nc)) in next.iter_mut().zip(next_c.iter_mut()).enumerate() {
            for i in 0..p {
                let w = s[i * p + col];
                if w != T::zero() {
                    axpy(w, &x[i], nv);
                    axpy(w, &cols[i], nc);
                }
            }
        }
        x = next;
        values = theta;
        residual = T::zero();
        for i in 0..k {
            for (r, (a, b)) in cx.iter_mut().zip(next_c[i].iter().zip(&x[i])) {
                *r = *a - values[i] * *b;
            }
            residual = residual.max(dot(&cx, &cx).sqrt());
        }
        if residual <= conv {
            break;
        }
    }
    if !(residual <= conv) {
        return Err(Error::EigenConvergenceFailure { iterations, residual: residual.as_f64() });
    }

    let grid = sector.grid();
    let mut vectors = Vec::with_capacity(k);
    let mut supports = Vec::with_capacity(k);
    for v in x.iter().take(k) {
        let mut nodal = vec![T::zero(); grid.len()];
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (r, node) in asm.nodes.iter().enumerate() {
            nodal[*node] = v[r] * asm.scale[r];
            if nodal[*node] != T::zero() {
                let nd = grid.nodes()[*node];
                let rad = (nd.s * nd.s + nd.t * nd.t).sqrt().as_f64();
                lo = lo.min(rad);
                hi = hi.max(rad);
            }
        }
        vectors.push(nodal);
        supports.push((lo, hi));
    }
    let eigenvalues: Vec<f64> = values.iter().take(k).map(|v| v.as_f64()).collect();
    let morse_count = values.iter().take(k).filter(|v| **v < -tol).count();
    Ok(Spectrum {
        report: SpectrumReport {
            eigenvalues,
            morse_count,
            tol: tol.as_f64(),
            operator_norm: norm.as_f64(),
            annulus: opts.annulus,
            class: opts.class,
            dof: n,
            iterations,
            max_residual: residual.as_f64(),
            supports,
        },
        vectors,
    })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn axpy<T: Real>(w: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + w * *xi;
    }
}

// modified Gram-Schmidt, applied twice
fn orthonormalize<T: Real>(x: &mut [Vec<T>]) {
    for _ in 0..2 {
        for i in 0..x.len() {
            let (done, rest) = x.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = dot(u, v);
                axpy(-c, u, v);
            }
            let nrm = dot(v, v).sqrt();
            if nrm > T::zero() {
                for e in v.iter_mut() {
                    *e = *e / nrm;
                }
            }
        }
    }
}
