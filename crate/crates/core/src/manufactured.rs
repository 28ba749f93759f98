//! Manufactured problems with known closed-form solutions.
//!
//! Pick a target function u*, push it through the continuous operator to get
//! the matching source term, and hand back a Dirichlet problem whose exact
//! answer is u*. Solving it then measures pure discretization error.

use crate::error::{Error, Result};
use crate::field::{self, ScalarField};
use crate::grid::{Grid, MAX_DIM};
use crate::operator::{EquationSpec, ExponentField, RegularizationParams};
use crate::solver::DirichletProblem;

/// Target functions with hand-written derivatives.
#[derive(Clone, Debug)]
pub enum ManufacturedFamily {
    /// a + b.x: zero Hessian, so the source vanishes for every epsilon.
    Affine { a: f64, b: Vec<f64> },
    /// a + b.x + x^T Q x / 2 with symmetric row-major Q; exactly representable
    /// by the second-order stencils, so the discrete error is solver-level.
    Quadratic { a: f64, b: Vec<f64>, q: Vec<f64> },
    /// |x - center|^beta with beta > 1 and the center strictly outside the
    /// closed unit cube, keeping every node away from the singular point.
    RadialPower { beta: f64, center: Vec<f64> },
    /// amplitude * exp(-|x - center|^2 / width^2), smooth and non-polynomial;
    /// the workhorse for convergence-order studies.
    SmoothBump {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
}

impl ManufacturedFamily {
    pub fn dim(&self) -> usize {
        match self {
            ManufacturedFamily::Affine { b, .. } => b.len(),
            ManufacturedFamily::Quadratic { b, .. } => b.len(),
            ManufacturedFamily::RadialPower { center, .. } => center.len(),
            ManufacturedFamily::SmoothBump { center, .. } => center.len(),
        }
    }

    /// Defaults used throughout the test suite, by family name.
    pub fn default_affine(dim: usize) -> Self {
        let b = (0..dim).map(|k| 0.7 - 0.3 * k as f64).collect();
        ManufacturedFamily::Affine { a: 0.3, b }
    }

    pub fn default_quadratic(dim: usize) -> Self {
        let b = (0..dim).map(|k| 0.1 * (k as f64 + 1.0)).collect();
        let mut q = vec![0.0; dim * dim];
        for i in 0..dim {
            q[i * dim + i] = 1.2 - 0.4 * i as f64;
            for j in 0..i {
                q[i * dim + j] = -0.3 / (1.0 + (i + j) as f64);
                q[j * dim + i] = q[i * dim + j];
            }
        }
        ManufacturedFamily::Quadratic { a: -0.2, b, q }
    }

    pub fn default_radial_power(dim: usize, beta: f64) -> Self {
        let mut center = vec![0.5; dim];
        center[0] = 1.5;
        ManufacturedFamily::RadialPower { beta, center }
    }

    pub fn default_smooth_bump(dim: usize) -> Self {
        let mut center = vec![0.0; dim];
        center[0] = 0.3;
        if dim > 1 {
            center[1] = 0.2;
        }
        ManufacturedFamily::SmoothBump {
            amplitude: 1.0,
            width: std::f64::consts::FRAC_1_SQRT_2,
            center,
        }
    }

    fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim < 1 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "family dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        match self {
            ManufacturedFamily::Affine { a, b } => {
                if !a.is_finite() || !b.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidParameter("affine coefficients must be finite".into()));
                }
            }
            ManufacturedFamily::Quadratic { a, b, q } => {
                if q.len() != dim * dim {
                    return Err(Error::InvalidParameter(format!(
                        "quadratic matrix must be {dim}x{dim} row-major"
                    )));
                }
                if !a.is_finite()
                    || !b.iter().all(|v| v.is_finite())
                    || !q.iter().all(|v| v.is_finite())
                {
                    return Err(Error::InvalidParameter("quadratic coefficients must be finite".into()));
                }
                for i in 0..dim {
                    for j in 0..i {
                        if (q[i * dim + j] - q[j * dim + i]).abs() > 1e-12 {
                            return Err(Error::InvalidParameter(
                                "quadratic matrix must be symmetric".into(),
                            ));
                        }
                    }
                }
            }
            ManufacturedFamily::RadialPower { beta, center } => {
                if !(beta.is_finite() && *beta > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "radial power exponent must be > 1, got {beta}"
                    )));
                }
                // nodes fill the cube [-1,1]^d, so the singular point must
                // sit strictly outside it
                let inf_norm = center.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                if !center.iter().all(|c| c.is_finite()) || inf_norm <= 1.0 + 1e-9 {
                    return Err(Error::InvalidParameter(
                        "radial power center must lie strictly outside the node cube".into(),
                    ));
                }
            }
            ManufacturedFamily::SmoothBump {
                amplitude,
                width,
                center,
            } => {
                if !amplitude.is_finite()
                    || !(width.is_finite() && *width > 0.0)
                    || !center.iter().all(|c| c.is_finite())
                {
                    return Err(Error::InvalidParameter(
                        "bump needs finite amplitude, positive width, finite center".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ManufacturedFamily::Affine { a, b } => {
                a + b.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>()
            }
            ManufacturedFamily::Quadratic { a, b, q } => {
                let d = b.len();
                let mut v = *a;
                for i in 0..d {
                    v += b[i] * x[i];
                    for j in 0..d {
                        v += 0.5 * q[i * d + j] * x[i] * x[j];
                    }
                }
                v
            }
            ManufacturedFamily::RadialPower { beta, center } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                r2.powf(beta / 2.0)
            }
            ManufacturedFamily::SmoothBump {
                amplitude,
                width,
                center,
            } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                amplitude * (-r2 / (width * width)).exp()
            }
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        match self {
            ManufacturedFamily::Affine { b, .. } => out[..d].copy_from_slice(b),
            ManufacturedFamily::Quadratic { b, q, .. } => {
                for i in 0..d {
                    out[i] = b[i] + (0..d).map(|j| q[i * d + j] * x[j]).sum::<f64>();
                }
            }
            ManufacturedFamily::RadialPower { beta, center } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                let w = beta * r2.powf(beta / 2.0 - 1.0);
                for i in 0..d {
                    out[i] = w * (x[i] - center[i]);
                }
            }
            ManufacturedFamily::SmoothBump {
                amplitude,
                width,
                center,
            } => {
                let w2 = width * width;
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                let e = amplitude * (-r2 / w2).exp();
                for i in 0..d {
                    out[i] = -2.0 * e * (x[i] - center[i]) / w2;
                }
            }
        }
    }

    pub fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        match self {
            ManufacturedFamily::Affine { .. } => out[..d * d].fill(0.0),
            ManufacturedFamily::Quadratic { q, .. } => out[..d * d].copy_from_slice(q),
            ManufacturedFamily::RadialPower { beta, center } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                let w1 = beta * r2.powf(beta / 2.0 - 1.0);
                let w2 = beta * (beta - 2.0) * r2.powf(beta / 2.0 - 2.0);
                for i in 0..d {
                    for j in 0..d {
                        let y = (x[i] - center[i]) * (x[j] - center[j]);
                        out[i * d + j] = w2 * y + if i == j { w1 } else { 0.0 };
                    }
                }
            }
            ManufacturedFamily::SmoothBump {
                amplitude,
                width,
                center,
            } => {
                let w2 = width * width;
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                let e = amplitude * (-r2 / w2).exp();
                for i in 0..d {
                    for j in 0..d {
                        let y = (x[i] - center[i]) * (x[j] - center[j]);
                        out[i * d + j] =
                            e * (4.0 * y / (w2 * w2) - if i == j { 2.0 / w2 } else { 0.0 });
                    }
                }
            }
        }
    }

    /// Sample u* on every node of the grid.
    pub fn field(&self, grid: &Grid) -> Result<ScalarField> {
        self.validate()?;
        if self.dim() != grid.dim() {
            return Err(Error::GridMismatch);
        }
        ScalarField::from_fn(grid, |x| self.value(x))
    }
}

/// Apply the continuous operator to the family at a point, with the exponent
/// value supplied by the caller.
fn continuous_apply(
    family: &ManufacturedFamily,
    x: &[f64],
    p: f64,
    epsilon: f64,
    shift: &[f64],
) -> f64 {
    let d = family.dim();
    let mut du = [0.0; MAX_DIM];
    let mut hess = [0.0; MAX_DIM * MAX_DIM];
    family.gradient(x, &mut du);
    family.hessian(x, &mut hess);
    for k in 0..d {
        du[k] += shift[k];
    }
    let s: f64 = du[..d].iter().map(|v| v * v).sum::<f64>() + epsilon * epsilon;
    let mut trace = 0.0;
    let mut quad = 0.0;
    for i in 0..d {
        trace += hess[i * d + i];
        for j in 0..d {
            quad += hess[i * d + j] * du[i] * du[j];
        }
    }
    trace + (p - 2.0) * quad / s
}

/// Build the Dirichlet problem whose exact solution is the family: the source
/// is minus the continuous operator at u*, boundary data samples u*, and when
/// `zeroth_order` is set the anchor is u* itself so the zeroth-order term
/// vanishes at the exact solution.
pub fn manufactured_problem(
    family: &ManufacturedFamily,
    grid: &Grid,
    exponent: ExponentField,
    reg: RegularizationParams,
    zeroth_order: bool,
) -> Result<(DirichletProblem, ScalarField)> {
    family.validate()?;
    if family.dim() != grid.dim() || exponent.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if reg.shift.len() != grid.dim() {
        return Err(Error::GridMismatch);
    }
    if reg.epsilon == 0.0 {
        // a vanishing gradient+shift would make the continuous quotient
        // undefined somewhere; demand the regularized denominator
        return Err(Error::InvalidParameter(
            "manufactured sources need epsilon > 0".into(),
        ));
    }
    let exact = family.field(grid)?;
    let n = grid.node_count();
    let mut f = vec![0.0; n];
    let mut x = [0.0; MAX_DIM];
    let p = exponent.samples().values();
    for node in 0..n {
        grid.coords(node, &mut x[..grid.dim()]);
        f[node] = -continuous_apply(family, &x[..grid.dim()], p[node], reg.epsilon, &reg.shift);
    }
    let source = ScalarField::from_values(grid.clone(), f)?;
    let anchor = zeroth_order.then(|| exact.clone());
    let eq = EquationSpec::new(exponent, reg, source, zeroth_order, anchor)?;
    let problem = DirichletProblem::new(eq, exact.clone())?;
    Ok((problem, exact))
}

/// Max-norm error of a computed solution against the family over the interior.
pub fn linf_error(solution: &ScalarField, exact: &ScalarField) -> Result<f64> {
    field::max_abs_diff(solution, exact)
}
