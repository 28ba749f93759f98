//! TOML run configuration: problem families by name, grid shape, and
//! command-specific options. Unknown keys are rejected everywhere; family
//! parameter mismatches are reported with the offending key.

use std::path::PathBuf;

use normpx_core::field::ScalarField;
use normpx_core::grid::Grid;
use normpx_core::manufactured::{manufactured_problem, ManufacturedFamily};
use normpx_core::operator::{EquationSpec, ExponentField, RegularizationParams};
use normpx_core::solver::{DirichletProblem, JacobianMode, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis; odd, >= 9.
    pub n: usize,
    /// Spatial dimension, default 2.
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub epsilon: f64,
    /// Constant gradient shift q; defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    /// Include the proper zeroth-order term (+u, anchored at zero).
    #[serde(default)]
    pub zeroth_order: bool,
    pub exponent: FamilyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<FamilyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<FamilyConfig>,
    /// Exact-solution mode: source and boundary are derived from the family
    /// instead of being configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<FamilyConfig>,
}

/// One named family with optional parameters. Which parameters apply depends
/// on the family; the builders below reject extras by name.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl FamilyConfig {
    /// Reject any parameter that the named family does not consume.
    fn allow_only(&self, context: &str, allowed: &[&str]) -> Result<(), CliError> {
        let set: &[(&str, bool)] = &[
            ("value", self.value.is_some()),
            ("base", self.base.is_some()),
            ("slope", self.slope.is_some()),
            ("amplitude", self.amplitude.is_some()),
            ("width", self.width.is_some()),
            ("scale", self.scale.is_some()),
            ("beta", self.beta.is_some()),
            ("coeffs", self.coeffs.is_some()),
            ("center", self.center.is_some()),
        ];
        for (name, present) in set {
            if *present && !allowed.contains(name) {
                return Err(CliError::config(format!(
                    "{context}: `{name}` is not a parameter of the `{}` family",
                    self.family
                )));
            }
        }
        Ok(())
    }

    fn require(&self, context: &str, v: Option<f64>, name: &str) -> Result<f64, CliError> {
        v.ok_or_else(|| {
            CliError::config(format!(
                "{context}: the `{}` family needs `{name}`",
                self.family
            ))
        })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_newton: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_picard: Option<usize>,
    /// "fd" (default) or "analytic".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly decreasing, strictly positive.
    pub epsilons: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Read the solution from this CSV instead of solving.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_solution: Option<PathBuf>,
    #[serde(default = "default_holder_radius")]
    pub holder_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder_alphas: Option<Vec<f64>>,
    #[serde(default = "default_decay_tau")]
    pub decay_tau: f64,
    #[serde(default = "default_decay_depth")]
    pub decay_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_center: Option<Vec<f64>>,
    #[serde(default = "default_harnack_tau")]
    pub harnack_tau: f64,
    #[serde(default = "default_harnack_q")]
    pub harnack_q: f64,
    #[serde(default = "default_morrey_eps0")]
    pub morrey_eps0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morrey_direction: Option<Vec<f64>>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            from_solution: None,
            holder_radius: default_holder_radius(),
            holder_alphas: None,
            decay_tau: default_decay_tau(),
            decay_depth: default_decay_depth(),
            decay_center: None,
            harnack_tau: default_harnack_tau(),
            harnack_q: default_harnack_q(),
            morrey_eps0: default_morrey_eps0(),
            morrey_direction: None,
        }
    }
}

fn default_holder_radius() -> f64 {
    0.5
}
fn default_decay_tau() -> f64 {
    0.5
}
fn default_decay_depth() -> usize {
    5
}
fn default_harnack_tau() -> f64 {
    0.1
}
fn default_harnack_q() -> f64 {
    1.0
}
fn default_morrey_eps0() -> f64 {
    0.5
}

/// Default candidate exponents for the Hölder fit: 0.05, 0.10, ..., 1.00.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    }

    pub fn build_grid(&self, grid_n_override: Option<usize>) -> Result<Grid, CliError> {
        let n = grid_n_override.unwrap_or(self.grid.n);
        Grid::new(self.grid.dim, n).map_err(CliError::config_from)
    }

    pub fn solve_options(&self) -> Result<SolveOptions, CliError> {
        let mut opts = SolveOptions::default();
        if let Some(s) = &self.solver {
            if let Some(tol) = s.tol {
                opts.tol = tol;
            }
            if let Some(m) = s.max_newton {
                opts.max_newton = m;
            }
            if let Some(m) = s.max_picard {
                opts.max_picard = m;
            }
            if let Some(j) = &s.jacobian {
                opts.jacobian = match j.as_str() {
                    "fd" => JacobianMode::FiniteDifference,
                    "analytic" => JacobianMode::Analytic,
                    other => {
                        return Err(CliError::config(format!(
                            "solver.jacobian must be \"fd\" or \"analytic\", got \"{other}\""
                        )))
                    }
                };
            }
        }
        Ok(opts)
    }

    /// Assemble the Dirichlet problem (and the exact solution in
    /// manufactured mode).
    pub fn build_problem(
        &self,
        grid: &Grid,
    ) -> Result<(DirichletProblem, Option<ScalarField>), CliError> {
        let p = &self.problem;
        let exponent = exponent_field(&p.exponent, grid)?;
        let shift = match &p.shift {
            Some(s) => {
                if s.len() != grid.dim() {
                    return Err(CliError::config(format!(
                        "problem.shift has {} components on a {}-dimensional grid",
                        s.len(),
                        grid.dim()
                    )));
                }
                s.clone()
            }
            None => vec![0.0; grid.dim()],
        };
        let reg = RegularizationParams::new(p.epsilon, shift).map_err(CliError::config_from)?;

        if let Some(m) = &p.manufactured {
            if p.source.is_some() || p.boundary.is_some() {
                return Err(CliError::config(
                    "problem.manufactured replaces source and boundary; remove them".into(),
                ));
            }
            let family = manufactured_family(m, grid.dim())?;
            let (problem, exact) =
                manufactured_problem(&family, grid, exponent, reg, p.zeroth_order)
                    .map_err(CliError::config_from)?;
            return Ok((problem, Some(exact)));
        }

        let source = match &p.source {
            Some(s) => source_field(s, grid)?,
            None => {
                return Err(CliError::config(
                    "problem.source is required (or use problem.manufactured)".into(),
                ))
            }
        };
        let boundary = match &p.boundary {
            Some(b) => boundary_field(b, grid)?,
            None => {
                return Err(CliError::config(
                    "problem.boundary is required (or use problem.manufactured)".into(),
                ))
            }
        };
        let anchor = if p.zeroth_order {
            Some(ScalarField::constant(grid, 0.0).map_err(CliError::config_from)?)
        } else {
            None
        };
        let eq = EquationSpec::new(exponent, reg, source, p.zeroth_order, anchor)
            .map_err(CliError::config_from)?;
        let problem = DirichletProblem::new(eq, boundary).map_err(CliError::config_from)?;
        Ok((problem, None))
    }
}

fn exponent_field(cfg: &FamilyConfig, grid: &Grid) -> Result<ExponentField, CliError> {
    let ctx = "problem.exponent";
    match cfg.family.as_str() {
        "constant" => {
            cfg.allow_only(ctx, &["value"])?;
            let v = cfg.require(ctx, cfg.value, "value")?;
            ExponentField::constant(grid, v).map_err(CliError::config_from)
        }
        "linear" => {
            cfg.allow_only(ctx, &["base", "slope"])?;
            let base = cfg.require(ctx, cfg.base, "base")?;
            let slope = cfg.require(ctx, cfg.slope, "slope")?;
            ExponentField::from_fn(
                grid,
                move |x| base + slope * x[0],
                base - slope.abs(),
                base + slope.abs(),
                slope.abs(),
            )
            .map_err(CliError::config_from)
        }
        "sinusoidal" => {
            cfg.allow_only(ctx, &["base", "slope"])?;
            let base = cfg.require(ctx, cfg.base, "base")?;
            let slope = cfg.require(ctx, cfg.slope, "slope")?;
            ExponentField::from_fn(
                grid,
                move |x| base + slope * (std::f64::consts::PI * x[0]).sin(),
                base - slope.abs(),
                base + slope.abs(),
                slope.abs() * std::f64::consts::PI,
            )
            .map_err(CliError::config_from)
        }
        other => Err(CliError::config(format!(
            "{ctx}: unknown family \"{other}\" (constant | linear | sinusoidal)"
        ))),
    }
}

fn source_field(cfg: &FamilyConfig, grid: &Grid) -> Result<ScalarField, CliError> {
    let ctx = "problem.source";
    let field = match cfg.family.as_str() {
        "zero" => {
            cfg.allow_only(ctx, &[])?;
            ScalarField::constant(grid, 0.0)
        }
        "constant" => {
            cfg.allow_only(ctx, &["value"])?;
            let v = cfg.require(ctx, cfg.value, "value")?;
            ScalarField::constant(grid, v)
        }
        "sign_bump" => {
            cfg.allow_only(ctx, &["amplitude"])?;
            let a = cfg.amplitude.unwrap_or(1.0);
            ScalarField::from_fn(grid, move |x| {
                a * x[0].signum() * 1f64.min(2.0 * x[0].abs())
            })
        }
        "sine" => {
            cfg.allow_only(ctx, &["amplitude"])?;
            let a = cfg.amplitude.unwrap_or(1.0);
            ScalarField::from_fn(grid, move |x| a * (std::f64::consts::PI * x[0]).sin())
        }
        other => {
            return Err(CliError::config(format!(
                "{ctx}: unknown family \"{other}\" (zero | constant | sign_bump | sine)"
            )))
        }
    };
    field.map_err(CliError::config_from)
}

fn boundary_field(cfg: &FamilyConfig, grid: &Grid) -> Result<ScalarField, CliError> {
    let ctx = "problem.boundary";
    let field = match cfg.family.as_str() {
        "constant" => {
            cfg.allow_only(ctx, &["value"])?;
            let v = cfg.require(ctx, cfg.value, "value")?;
            ScalarField::constant(grid, v)
        }
        "affine" => {
            cfg.allow_only(ctx, &["value", "coeffs"])?;
            let a = cfg.value.unwrap_or(0.0);
            let b = cfg.coeffs.clone().ok_or_else(|| {
                CliError::config(format!("{ctx}: the `affine` family needs `coeffs`"))
            })?;
            if b.len() != grid.dim() {
                return Err(CliError::config(format!(
                    "{ctx}: coeffs has {} components on a {}-dimensional grid",
                    b.len(),
                    grid.dim()
                )));
            }
            ScalarField::from_fn(grid, move |x| {
                a + b.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>()
            })
        }
        "saddle" => {
            cfg.allow_only(ctx, &["scale"])?;
            if grid.dim() < 2 {
                return Err(CliError::config(format!(
                    "{ctx}: the saddle needs at least two dimensions"
                )));
            }
            let s = cfg.scale.unwrap_or(1.0);
            ScalarField::from_fn(grid, move |x| s * (x[0] * x[0] - x[1] * x[1]))
        }
        "bump" => {
            cfg.allow_only(ctx, &["amplitude", "width", "center"])?;
            let a = cfg.amplitude.unwrap_or(1.0);
            let w = cfg.width.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
            if !(w.is_finite() && w > 0.0) {
                return Err(CliError::config(format!(
                    "{ctx}: bump width must be positive, got {w}"
                )));
            }
            let c = match cfg.center.clone() {
                Some(c) if c.len() == grid.dim() => c,
                Some(c) => {
                    return Err(CliError::config(format!(
                        "{ctx}: center has {} components on a {}-dimensional grid",
                        c.len(),
                        grid.dim()
                    )))
                }
                None => vec![0.0; grid.dim()],
            };
            ScalarField::from_fn(grid, move |x| {
                let r2: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
                a * (-r2 / (w * w)).exp()
            })
        }
        other => {
            return Err(CliError::config(format!(
                "{ctx}: unknown family \"{other}\" (constant | affine | saddle | bump)"
            )))
        }
    };
    field.map_err(CliError::config_from)
}

fn manufactured_family(cfg: &FamilyConfig, dim: usize) -> Result<ManufacturedFamily, CliError> {
    let ctx = "problem.manufactured";
    match cfg.family.as_str() {
        "affine" => {
            cfg.allow_only(ctx, &[])?;
            Ok(ManufacturedFamily::default_affine(dim))
        }
        "quadratic" => {
            cfg.allow_only(ctx, &[])?;
            Ok(ManufacturedFamily::default_quadratic(dim))
        }
        "smooth_bump" => {
            cfg.allow_only(ctx, &[])?;
            Ok(ManufacturedFamily::default_smooth_bump(dim))
        }
        "radial_power" => {
            cfg.allow_only(ctx, &["beta"])?;
            Ok(ManufacturedFamily::default_radial_power(
                dim,
                cfg.beta.unwrap_or(1.5),
            ))
        }
        other => Err(CliError::config(format!(
            "{ctx}: unknown family \"{other}\" (affine | quadratic | smooth_bump | radial_power)"
        ))),
    }
}
