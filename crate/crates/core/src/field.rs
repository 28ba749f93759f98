//! Node-sampled scalar and vector fields plus the finite-difference calculus
//! used everywhere else: gradients, Hessians, and region statistics.
//!
//! Derivative stencils are second order. The gradient uses central
//! differences where both axis neighbours are interior and switches to
//! one-sided second-order differences into the domain where the central
//! stencil leaves the mask; if no one-sided stencil fits either, it falls
//! back to a central difference over the boundary collar, whose nodes carry
//! extended boundary data. The Hessian always reads the collar directly.
//! All stencils reproduce polynomials of degree <= 2 exactly.

use crate::error::{Error, Result};
use crate::grid::{BallRegion, Grid, MAX_DIM};

/// Scalar samples at every grid node. Values at non-interior nodes are the
/// extended boundary data (or whatever the constructor supplied); statistics
/// only ever read interior nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Sample `f` at every node, collar included.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<ScalarField> {
        let mut x = [0.0; MAX_DIM];
        let mut values = Vec::with_capacity(grid.node_count());
        for node in 0..grid.node_count() {
            grid.coords(node, &mut x);
            values.push(f(&x[..grid.dim()]));
        }
        ScalarField::from_values(grid.clone(), values)
    }

    /// Wrap raw samples. Values must be finite at every interior node.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        for &node in grid.interior_nodes() {
            if !values[node].is_finite() {
                return Err(Error::InvalidField(format!(
                    "non-finite value at interior node {node}"
                )));
            }
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<ScalarField> {
        ScalarField::from_values(grid.clone(), vec![c; grid.node_count()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Vector samples at every node, `dim` components per node, component-major
/// within a node: entry `node * dim + k` is component k.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    values: Vec<f64>,
}

impl VectorField {
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64], &mut [f64])) -> Result<VectorField> {
        let dim = grid.dim();
        let mut x = [0.0; MAX_DIM];
        let mut v = [0.0; MAX_DIM];
        let mut values = Vec::with_capacity(grid.node_count() * dim);
        for node in 0..grid.node_count() {
            grid.coords(node, &mut x);
            v[..dim].fill(0.0);
            f(&x[..dim], &mut v[..dim]);
            values.extend_from_slice(&v[..dim]);
        }
        VectorField::from_values(grid.clone(), values)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<VectorField> {
        if values.len() != grid.node_count() * grid.dim() {
            return Err(Error::InvalidField(format!(
                "expected {} components, got {}",
                grid.node_count() * grid.dim(),
                values.len()
            )));
        }
        for &node in grid.interior_nodes() {
            for k in 0..grid.dim() {
                if !values[node * grid.dim() + k].is_finite() {
                    return Err(Error::InvalidField(format!(
                        "non-finite component {k} at interior node {node}"
                    )));
                }
            }
        }
        Ok(VectorField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, node: usize, k: usize) -> f64 {
        self.values[node * self.grid.dim() + k]
    }

    /// Copy the vector at `node` into `out[0..dim]`.
    pub fn vector(&self, node: usize, out: &mut [f64]) {
        let d = self.grid.dim();
        out[..d].copy_from_slice(&self.values[node * d..node * d + d]);
    }

    pub fn norm_at(&self, node: usize) -> f64 {
        let d = self.grid.dim();
        self.values[node * d..node * d + d]
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Which first-derivative stencil applies at (node, axis).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GradStencil {
    /// Both axis neighbours interior.
    Central,
    /// Left neighbour leaves the mask; use node, +1, +2.
    Forward,
    /// Right neighbour leaves the mask; use node, -1, -2.
    Backward,
    /// No one-sided stencil fits either; central difference over collar data.
    CollarCentral,
}

pub(crate) fn grad_stencil(grid: &Grid, node: usize, axis: usize) -> GradStencil {
    let s = grid.stride(axis);
    let i = grid.axis_index(node, axis);
    let n = grid.points_per_axis();
    let left = grid.is_interior(node - s);
    let right = grid.is_interior(node + s);
    if left && right {
        GradStencil::Central
    } else if right && i + 2 < n && grid.is_interior(node + 2 * s) {
        GradStencil::Forward
    } else if left && i >= 2 && grid.is_interior(node - 2 * s) {
        GradStencil::Backward
    } else {
        GradStencil::CollarCentral
    }
}

/// First derivative along `axis` at an interior node. Caller guarantees
/// interiority; the kernel is shared by the field ops and the solver.
pub(crate) fn gradient_at(grid: &Grid, values: &[f64], node: usize, axis: usize) -> f64 {
    let s = grid.stride(axis);
    let h = grid.spacing();
    match grad_stencil(grid, node, axis) {
        GradStencil::Central | GradStencil::CollarCentral => {
            (values[node + s] - values[node - s]) / (2.0 * h)
        }
        GradStencil::Forward => {
            (-3.0 * values[node] + 4.0 * values[node + s] - values[node + 2 * s]) / (2.0 * h)
        }
        GradStencil::Backward => {
            (3.0 * values[node] - 4.0 * values[node - s] + values[node - 2 * s]) / (2.0 * h)
        }
    }
}

/// Full gradient at an interior node into `out[0..dim]`.
pub(crate) fn gradient_at_node(grid: &Grid, values: &[f64], node: usize, out: &mut [f64]) {
    for axis in 0..grid.dim() {
        out[axis] = gradient_at(grid, values, node, axis);
    }
}

/// Hessian at an interior node into row-major `out[0..dim*dim]`. Pure second
/// differences on the axes, the symmetrized four-point cross for mixed terms;
/// collar values enter directly as extended boundary data.
pub(crate) fn hessian_at_node(grid: &Grid, values: &[f64], node: usize, out: &mut [f64]) {
    let d = grid.dim();
    let h = grid.spacing();
    let h2 = h * h;
    for k in 0..d {
        let s = grid.stride(k);
        out[k * d + k] = (values[node + s] - 2.0 * values[node] + values[node - s]) / h2;
        for l in 0..k {
            let t = grid.stride(l);
            let m = (values[node + s + t] - values[node + s - t] - values[node - s + t]
                + values[node - s - t])
                / (4.0 * h2);
            out[k * d + l] = m;
            out[l * d + k] = m;
        }
    }
}

/// Gradient of a scalar field. Interior nodes carry the stencil value;
/// collar nodes carry zeros (statistics never read them).
pub fn gradient(u: &ScalarField) -> Result<VectorField> {
    let grid = u.grid();
    let d = grid.dim();
    let mut values = vec![0.0; grid.node_count() * d];
    for &node in grid.interior_nodes() {
        gradient_at_node(grid, u.values(), node, &mut values[node * d..node * d + d]);
    }
    VectorField::from_values(grid.clone(), values)
}

/// Hessian matrix at one interior node, row-major dim x dim.
pub fn hessian(u: &ScalarField, node: usize) -> Result<Vec<f64>> {
    let grid = u.grid();
    if node >= grid.node_count() || !grid.is_interior(node) {
        return Err(Error::OutsideMask { node });
    }
    let d = grid.dim();
    let mut out = vec![0.0; d * d];
    hessian_at_node(grid, u.values(), node, &mut out);
    Ok(out)
}

fn region_nodes_nonempty(u_grid: &Grid, region: &BallRegion) -> Result<Vec<usize>> {
    let nodes = region.nodes(u_grid)?;
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(nodes)
}

/// Supremum of the field over the interior nodes of the region.
pub fn supremum(u: &ScalarField, region: &BallRegion) -> Result<f64> {
    let nodes = region_nodes_nonempty(u.grid(), region)?;
    Ok(nodes.iter().map(|&n| u.value(n)).fold(f64::MIN, f64::max))
}

/// Infimum of the field over the interior nodes of the region.
pub fn infimum(u: &ScalarField, region: &BallRegion) -> Result<f64> {
    let nodes = region_nodes_nonempty(u.grid(), region)?;
    Ok(nodes.iter().map(|&n| u.value(n)).fold(f64::MAX, f64::min))
}

/// Oscillation over the region: supremum - infimum, by construction exactly
/// the difference of the other two statistics.
pub fn oscillation(u: &ScalarField, region: &BallRegion) -> Result<f64> {
    Ok(supremum(u, region)? - infimum(u, region)?)
}

/// Discrete L^q statistic (sum_{nodes in region} |u|^q h^N)^(1/q), q > 0.
pub fn lq_integral_mean(u: &ScalarField, region: &BallRegion, q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent must be positive and finite, got {q}"
        )));
    }
    let nodes = region_nodes_nonempty(u.grid(), region)?;
    let cell = u.grid().spacing().powi(u.grid().dim() as i32);
    let sum: f64 = nodes.iter().map(|&n| u.value(n).abs().powf(q) * cell).sum();
    Ok(sum.powf(1.0 / q))
}

/// Supremum of the Euclidean norm of a vector field over the region.
pub fn supremum_norm(v: &VectorField, region: &BallRegion) -> Result<f64> {
    let nodes = region_nodes_nonempty(v.grid(), region)?;
    Ok(nodes.iter().map(|&n| v.norm_at(n)).fold(0.0, f64::max))
}

/// Max-norm of the difference over interior nodes. Errors when the grids
/// differ.
pub fn max_abs_diff(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(a.grid()
        .interior_nodes()
        .iter()
        .map(|&n| (a.value(n) - b.value(n)).abs())
        .fold(0.0, f64::max))
}
