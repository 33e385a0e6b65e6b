//! Coordinates adapted to the cone `{s = t}` and the lattice discretization of
//! the sector `{0 <= t <= s, s^2 + t^2 <= R^2}`.
//!
//! Nodes sit on the lattice `(i h, j h)` with `0 <= j <= i`. The sector is
//! split into right isosceles triangles: the lower one `(i,j) (i+1,j) (i+1,j+1)`
//! and, when `j < i`, the upper one `(i,j) (i,j+1) (i+1,j+1)`. A triangle is
//! kept when all three vertices are nodes. Only the two legs of each triangle
//! carry a gradient coupling, so the stiffness is a weighted five-point stencil.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Node classification. At corners the priority is cone, then arc, then axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeClass {
    Interior,
    Cone,
    Axis,
    Arc,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Interior => "interior",
            NodeClass::Cone => "cone",
            NodeClass::Axis => "axis",
            NodeClass::Arc => "arc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub i: usize,
    pub j: usize,
    pub s: T,
    pub t: T,
    pub class: NodeClass,
}

/// A gradient coupling between two lattice neighbours: the discrete energy
/// holds `coupling * (u[p] - u[q])^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub p: usize,
    pub q: usize,
    pub coupling: T,
    /// Edge midpoint.
    pub mid: (T, T),
}

#[derive(Debug, Clone)]
pub struct TriangleGrid<T> {
    m: usize,
    radius: T,
    h: T,
    nodes: Vec<Node<T>>,
    weights: Vec<T>,
    mass: Vec<T>,
    edges: Vec<Edge<T>>,
    adj_start: Vec<usize>,
    adj: Vec<(usize, T)>,
    row_start: Vec<usize>,
    row_len: Vec<usize>,
}

/// Block norms `(s, t) = (|x1|, |x2|)` of a point of `R^{2m} = R^m x R^m`.
pub fn st_coords<T: Real>(x: &[T], m: usize) -> Result<(T, T)> {
    if x.len() != 2 * m {
        return Err(Error::DimensionMismatch { expected: 2 * m, got: x.len() });
    }
    let norm = |v: &[T]| v.iter().map(|c| *c * *c).sum::<T>().sqrt();
    Ok((norm(&x[..m]), norm(&x[m..])))
}

/// Euclidean distance from a point with block norms `(s, t)` to the cone.
pub fn dist_to_cone<T: Real>(s: T, t: T) -> T {
    (s - t).abs() / T::SQRT_2()
}

/// Rotated coordinates: `y` along the cone, `z` the signed distance to it.
pub fn yz_coords<T: Real>(s: T, t: T) -> (T, T) {
    ((s + t) / T::SQRT_2(), (s - t) / T::SQRT_2())
}

/// Inverse of [`yz_coords`] on the wedge `|z| <= y`.
pub fn st_from_yz<T: Real>(y: T, z: T) -> Result<(T, T)> {
    if !(z.abs() <= y) {
        return Err(Error::DomainViolation { y: y.as_f64(), z: z.as_f64() });
    }
    let s = ((y + z) / T::SQRT_2()).max(T::zero());
    let t = ((y - z) / T::SQRT_2()).max(T::zero());
    Ok((s, t))
}

/// The radial weight `s^(m-1) t^(m-1)` of the reduced energy.
pub fn radial_weight<T: Real>(m: usize, s: T, t: T) -> T {
    let k = (m - 1) as i32;
    s.powi(k) * t.powi(k)
}

impl<T: Real> TriangleGrid<T> {
    pub fn build(m: usize, radius: T, h: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("grid.m must be at least 1".into()));
        }
        if !(radius >= T::lit(4.0)) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("grid.R = {radius} must be at least 4")));
        }
        if !(h > T::zero()) || h > radius / T::lit(16.0) {
            return Err(Error::InvalidParameter(format!("grid.h = {h} must lie in (0, R/16]")));
        }
        // membership uses integer radii so that halving h keeps every old node
        let q = (radius / h).as_f64();
        let q2 = q * q * (1.0 + 1e-12);
        let inside = |i: usize, j: usize| ((i * i + j * j) as f64) <= q2;
        let imax = q.floor() as usize;

        let mut row_start = Vec::with_capacity(imax + 1);
        let mut row_len = Vec::with_capacity(imax + 1);
        let mut nodes = Vec::new();
        for i in 0..=imax {
            row_start.push(nodes.len());
            let mut len = 0;
            for j in 0..=i {
                if !inside(i, j) {
                    break;
                }
                let class = if i == j {
                    NodeClass::Cone
                } else if !inside(i + 1, j + 1) {
                    NodeClass::Arc
                } else if j == 0 {
                    NodeClass::Axis
                } else {
                    NodeClass::Interior
                };
                nodes.push(Node {
                    i,
                    j,
                    s: h * T::from_usize_lossy(i),
                    t: h * T::from_usize_lossy(j),
                    class,
                });
                len += 1;
            }
            row_len.push(len);
        }

        let mut grid = Self {
            m,
            radius,
            h,
            weights: Vec::with_capacity(nodes.len()),
            mass: vec![T::zero(); nodes.len()],
            nodes,
            edges: Vec::new(),
            adj_start: Vec::new(),
            adj: Vec::new(),
            row_start,
            row_len,
        };
        let interior = grid.count(NodeClass::Interior);
        if interior < 100 {
            return Err(Error::GridTooCoarse { interior });
        }
        let h2 = h * h;
        grid.weights = grid.nodes.iter().map(|n| radial_weight(m, n.s, n.t) * h2).collect();

        // lumped mass: a third of each triangle's area per vertex
        let sixth = T::one() / T::lit(6.0);
        for k in 0..grid.nodes.len() {
            let Node { i, j, .. } = grid.nodes[k];
            for tri in [grid.lower(i, j), grid.upper(i, j)].into_iter().flatten() {
                for v in tri {
                    grid.mass[v] = grid.mass[v] + grid.weights[v] * sixth;
                }
            }
        }

        // legs: horizontal (i,j)-(i+1,j) and vertical (i,j)-(i,j+1)
        let quarter = T::lit(0.25);
        let half = T::lit(0.5);
        for k in 0..grid.nodes.len() {
            let Node { i, j, s, t, .. } = grid.nodes[k];
            if let Some(q) = grid.index(i + 1, j) {
                let mut n = usize::from(grid.lower(i, j).is_some());
                if j > 0 {
                    n += usize::from(grid.upper(i, j - 1).is_some());
                }
                if n > 0 {
                    let mid = (s + half * h, t);
                    let c = radial_weight(m, mid.0, mid.1) * quarter * T::from_usize_lossy(n);
                    grid.edges.push(Edge { p: k, q, coupling: c, mid });
                }
            }
            if let Some(q) = grid.index(i, j + 1) {
                let mut n = usize::from(grid.upper(i, j).is_some());
                if i > 0 {
                    n += usize::from(grid.lower(i - 1, j).is_some());
                }
                if n > 0 {
                    let mid = (s, t + half * h);
                    let c = radial_weight(m, mid.0, mid.1) * quarter * T::from_usize_lossy(n);
                    grid.edges.push(Edge { p: k, q, coupling: c, mid });
                }
            }
        }

        let n = grid.nodes.len();
        let mut degree = vec![0usize; n + 1];
        for e in &grid.edges {
            degree[e.p + 1] += 1;
            degree[e.q + 1] += 1;
        }
        for k in 0..n {
            degree[k + 1] += degree[k];
        }
        let mut fill = degree.clone();
        let mut adj = vec![(0, T::zero()); degree[n]];
        for e in &grid.edges {
            adj[fill[e.p]] = (e.q, e.coupling);
            fill[e.p] += 1;
            adj[fill[e.q]] = (e.p, e.coupling);
            fill[e.q] += 1;
        }
        grid.adj_start = degree;
        grid.adj = adj;
        Ok(grid)
    }

    fn lower(&self, i: usize, j: usize) -> Option<[usize; 3]> {
        Some([self.index(i, j)?, self.index(i + 1, j)?, self.index(i + 1, j + 1)?])
    }

    fn upper(&self, i: usize, j: usize) -> Option<[usize; 3]> {
        if j >= i {
            return None;
        }
        Some([self.index(i, j)?, self.index(i, j + 1)?, self.index(i + 1, j + 1)?])
    }

    /// Node index of lattice point `(i, j)`, if it belongs to the grid.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.row_len.len() || j >= self.row_len[i] {
            return None;
        }
        Some(self.row_start[i] + j)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Per-node `s^(m-1) t^(m-1) h^2`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Lumped mass: the weight times the node's share of the kept triangles.
    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Coupled neighbours of node `p` with their edge couplings.
    pub fn neighbors(&self, p: usize) -> &[(usize, T)] {
        &self.adj[self.adj_start[p]..self.adj_start[p + 1]]
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.nodes.iter().filter(|n| n.class == class).count()
    }

    /// Largest index distance between coupled nodes.
    pub fn bandwidth(&self) -> usize {
        self.edges.iter().map(|e| e.q.abs_diff(e.p)).max().unwrap_or(0)
    }

    /// Sum of the lumped masses: the discrete measure of the sector.
    pub fn volume(&self) -> T {
        self.mass.iter().copied().sum()
    }

    /// Piecewise linear interpolation of nodal `values` at `(s, t)`; `None`
    /// outside the triangulated region.
    pub fn interpolate(&self, values: &[T], s: T, t: T) -> Option<T> {
        if s < T::zero() || t < T::zero() || t > s {
            return None;
        }
        let x = s / self.h;
        let y = t / self.h;
        let i = x.floor().to_usize()?;
        let j = y.floor().to_usize()?;
        let a = x - T::from_usize_lossy(i);
        let b = y - T::from_usize_lossy(j);
        if b <= a {
            let [p0, p1, p2] = self.lower(i, j)?;
            Some(values[p0] * (T::one() - a) + values[p1] * (a - b) + values[p2] * b)
        } else {
            let [p0, p1, p2] = self.upper(i, j)?;
            Some(values[p0] * (T::one() - b) + values[p1] * (b - a) + values[p2] * a)
        }
    }
}
