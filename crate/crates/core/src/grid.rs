//! Uniform tensor grid on the square [-1,1]^N with the unit-ball interior mask.
//!
//! The disc is realized as a mask inside the square: a node is *interior* when
//! it lies strictly inside the unit ball. Every interior node has its full
//! axis-aligned cube of array neighbours (a node on an array face has some
//! coordinate equal to +-1, hence norm >= 1), so stencils never index out of
//! bounds. Nodes outside the mask form the boundary collar; they carry
//! extended boundary data so near-boundary stencils stay well posed.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard cap on the spatial dimension; keeps per-node scratch on the stack.
pub const MAX_DIM: usize = 6;

/// Hard cap on total node count (memory guard, ~0.5 GiB of f64 at the cap).
const MAX_NODES: usize = 1 << 26;

/// Uniform grid on [-1,1]^N. Node k has multi-index i with
/// k = i_0 + n*i_1 + n^2*i_2 + ... and coordinates x_j = (2*i_j - (n-1))/(n-1),
/// so coordinates are exactly antisymmetric about the origin and the origin
/// itself is a node (n is odd).
#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    n: usize,
    h: f64,
    mask: Arc<[bool]>,
    interior: Arc<[usize]>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}
impl Eq for Grid {}

impl Grid {
    /// `dim >= 1`, `n` odd and `>= 9`. Spacing is h = 2/(n-1).
    pub fn new(dim: usize, n: usize) -> Result<Grid> {
        if dim < 1 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if n < 9 || n % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be odd and >= 9, got {n}"
            )));
        }
        let mut count = 1usize;
        for _ in 0..dim {
            count = count
                .checked_mul(n)
                .filter(|&c| c <= MAX_NODES)
                .ok_or_else(|| {
                    Error::InvalidGrid(format!("{n}^{dim} nodes exceed the supported size"))
                })?;
        }
        let h = 2.0 / (n as f64 - 1.0);
        let mut mask = vec![false; count];
        let mut interior = Vec::new();
        let mut idx = [0usize; MAX_DIM];
        for (node, m) in mask.iter_mut().enumerate() {
            let mut s = 0.0;
            let mut rem = node;
            for slot in idx.iter_mut().take(dim) {
                *slot = rem % n;
                rem /= n;
            }
            for &i in idx.iter().take(dim) {
                let x = coord_of(i, n);
                s += x * x;
            }
            if s < 1.0 {
                *m = true;
                interior.push(node);
            }
        }
        Ok(Grid {
            dim,
            n,
            h,
            mask: mask.into(),
            interior: interior.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.mask.len()
    }

    /// Stride of `axis` in the flat node index.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.stride(axis)) % self.n
    }

    pub fn coord(&self, node: usize, axis: usize) -> f64 {
        coord_of(self.axis_index(node, axis), self.n)
    }

    /// Fill `out[0..dim]` with the coordinates of `node`.
    pub fn coords(&self, node: usize, out: &mut [f64]) {
        let mut rem = node;
        for slot in out.iter_mut().take(self.dim) {
            *slot = coord_of(rem % self.n, self.n);
            rem /= self.n;
        }
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.mask[node]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Interior nodes in ascending flat order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Squared Euclidean norm of the node's coordinates.
    pub fn norm_sq(&self, node: usize) -> f64 {
        let mut s = 0.0;
        let mut rem = node;
        for _ in 0..self.dim {
            let x = coord_of(rem % self.n, self.n);
            rem /= self.n;
            s += x * x;
        }
        s
    }
}

/// Coordinate of axis index `i` on an `n`-point axis: (2i - (n-1))/(n-1).
/// Integer numerator and denominator, so the result is correctly rounded,
/// exactly zero at the centre and exactly +-1 at the faces.
fn coord_of(i: usize, n: usize) -> f64 {
    (2.0 * i as f64 - (n as f64 - 1.0)) / (n as f64 - 1.0)
}

/// Closed ball B_radius(center), used to select grid nodes for statistics.
/// Must fit inside the padded domain: |center| + radius <= 1 + h.
#[derive(Clone, Debug, PartialEq)]
pub struct BallRegion {
    center: Vec<f64>,
    radius: f64,
}

/// Absolute slack on region membership; absorbs rounding in node coordinates
/// so that nodes lying exactly on the sphere of a grid-aligned radius count.
const REGION_SLACK: f64 = 1e-12;

impl BallRegion {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<BallRegion> {
        if center.is_empty() || center.len() > MAX_DIM {
            return Err(Error::InvalidRegion(format!(
                "center dimension must be in 1..={MAX_DIM}"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) || !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidRegion(
                "center must be finite and radius positive".into(),
            ));
        }
        Ok(BallRegion { center, radius })
    }

    /// Ball centred at the origin.
    pub fn centred(dim: usize, radius: f64) -> Result<BallRegion> {
        BallRegion::new(vec![0.0; dim], radius)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = self.radius + REGION_SLACK;
        let mut s = 0.0;
        for (xi, ci) in x.iter().zip(&self.center) {
            s += (xi - ci) * (xi - ci);
        }
        s <= r * r
    }

    /// Interior nodes whose centre lies in the ball, ascending flat order.
    /// Errors when the ball does not fit in the padded domain
    /// (|center| + radius <= 1 + h) or dimensions mismatch.
    pub fn nodes(&self, grid: &Grid) -> Result<Vec<usize>> {
        if self.center.len() != grid.dim() {
            return Err(Error::InvalidRegion(format!(
                "region dimension {} does not match grid dimension {}",
                self.center.len(),
                grid.dim()
            )));
        }
        let c = crate::util::norm(&self.center);
        if c + self.radius > 1.0 + grid.spacing() + REGION_SLACK {
            return Err(Error::InvalidRegion(format!(
                "ball does not fit the padded domain: |center| + radius = {:.6} > 1 + h = {:.6}",
                c + self.radius,
                1.0 + grid.spacing()
            )));
        }
        let mut x = [0.0; MAX_DIM];
        let mut out = Vec::new();
        for &node in grid.interior_nodes() {
            grid.coords(node, &mut x);
            if self.contains(&x[..grid.dim()]) {
                out.push(node);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(0, 33).is_err());
        assert!(Grid::new(2, 8).is_err());
        assert!(Grid::new(2, 32).is_err());
        assert!(Grid::new(2, 7).is_err());
        assert!(Grid::new(7, 9).is_err());
    }

    #[test]
    fn coordinates_are_exact_at_center_and_faces() {
        let g = Grid::new(2, 33).unwrap();
        let mid = 16 + 33 * 16;
        assert_eq!(g.coord(mid, 0), 0.0);
        assert_eq!(g.coord(mid, 1), 0.0);
        assert_eq!(g.coord(0, 0), -1.0);
        assert_eq!(g.coord(32, 0), 1.0);
        // antisymmetry about the origin, exactly
        for i in 0..33 {
            assert_eq!(g.coord(i, 0), -g.coord(32 - i, 0));
        }
    }

    #[test]
    fn interior_means_strictly_inside_unit_ball() {
        let g = Grid::new(2, 33).unwrap();
        let mut x = [0.0; MAX_DIM];
        for node in 0..g.node_count() {
            g.coords(node, &mut x);
            let r2 = x[0] * x[0] + x[1] * x[1];
            assert_eq!(g.is_interior(node), r2 < 1.0);
        }
        // face nodes are never interior
        assert!(!g.is_interior(0));
        assert!(!g.is_interior(16)); // (0, -1)
    }

    #[test]
    fn interior_nodes_have_full_array_stencils() {
        for (dim, n) in [(1, 17), (2, 17), (3, 9)] {
            let g = Grid::new(dim, n).unwrap();
            for &node in g.interior_nodes() {
                for axis in 0..dim {
                    let i = g.axis_index(node, axis);
                    assert!(i >= 1 && i + 1 < n, "axis {axis} index {i} at node {node}");
                }
            }
        }
    }

    #[test]
    fn region_selects_expected_nodes() {
        let g = Grid::new(2, 33).unwrap();
        let h = g.spacing();
        // single node: a tight ball around the origin
        let r = BallRegion::centred(2, h / 2.0).unwrap();
        let nodes = r.nodes(&g).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(g.coord(nodes[0], 0), 0.0);

        // a radius-h ball holds the origin plus its 4 axis neighbours
        let r = BallRegion::centred(2, h).unwrap();
        assert_eq!(r.nodes(&g).unwrap().len(), 5);

        // full ball = all interior nodes
        let r = BallRegion::centred(2, 1.0).unwrap();
        assert_eq!(r.nodes(&g).unwrap().len(), g.interior_nodes().len());
    }

    #[test]
    fn region_can_be_empty_or_invalid() {
        let g = Grid::new(2, 33).unwrap();
        let h = g.spacing();
        // valid but empty: tucked between nodes
        let r = BallRegion::new(vec![h / 3.0, h / 3.0], h / 4.0).unwrap();
        assert!(r.nodes(&g).unwrap().is_empty());
        // violates |center| + radius <= 1 + h
        let r = BallRegion::new(vec![0.9, 0.9], 0.5).unwrap();
        assert!(r.nodes(&g).is_err());
        // dimension mismatch
        let r = BallRegion::centred(3, 0.5).unwrap();
        assert!(r.nodes(&g).is_err());
        // bad parameters at construction
        assert!(BallRegion::new(vec![0.0, 0.0], 0.0).is_err());
        assert!(BallRegion::new(vec![f64::NAN, 0.0], 0.1).is_err());
    }
}
