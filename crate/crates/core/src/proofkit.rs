//! Executable forms of the standalone lemmas: the normalized-difference
//! vector inequality with its proof-internal steps, the concave test profile
//! phi and the exponential transform, and comparison/stability harnesses that
//! drive the solver.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{self, ScalarField};
use crate::solver::{solve_dirichlet, DirichletProblem, SolveOptions, SolveReport};

/// Relative slack for inequality verdicts: holds means
/// lhs <= rhs + 1e-12 max(1, rhs).
pub const VERDICT_SLACK: f64 = 1e-12;
/// Vectors closer than this (relative to the larger norm) are rejected as
/// effectively equal; the bound is continuous so nothing is lost.
pub const NEAR_EQUAL_TOL: f64 = 1e-8;
/// Discrete solution ordering is asserted up to this absolute tolerance.
pub const COMPARISON_TOL: f64 = 1e-8;

/// Checked inequality instance. `witness` holds the raw inputs (or, for the
/// harnesses, the location of the worst margin) so failures can be replayed.
#[derive(Clone, Debug)]
pub struct InequalityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub witness: Vec<f64>,
}

impl InequalityVerdict {
    fn new(lhs: f64, rhs: f64, witness: Vec<f64>) -> Self {
        InequalityVerdict {
            lhs,
            rhs,
            holds: lhs <= rhs + VERDICT_SLACK * rhs.abs().max(1.0),
            witness,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn validate_pair(a: &[f64], b: &[f64], epsilon: f64) -> Result<(f64, f64)> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::InvalidParameter(
            "vectors must be nonempty and of equal dimension".into(),
        ));
    }
    if !a.iter().chain(b).all(|v| v.is_finite()) || !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(
            "vectors must be finite and epsilon >= 0".into(),
        ));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidParameter(
            "both vectors must be nonzero".into(),
        ));
    }
    let gap = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    if gap <= NEAR_EQUAL_TOL * na.max(nb) {
        return Err(Error::NearEqualPair {
            tol: NEAR_EQUAL_TOL,
        });
    }
    Ok((na, nb))
}

fn witness_of(a: &[f64], b: &[f64], epsilon: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(2 * a.len() + 1);
    w.extend_from_slice(a);
    w.extend_from_slice(b);
    w.push(epsilon);
    w
}

/// The regularized-direction difference bound: with s_v = sqrt(|v|^2 + eps^2),
/// |a/s_a - b/s_b| <= 2|a - b| / max(|a|, |b|).
pub fn normalized_difference_bound(
    a: &[f64],
    b: &[f64],
    epsilon: f64,
) -> Result<InequalityVerdict> {
    let (na, nb) = validate_pair(a, b, epsilon)?;
    let sa = (na * na + epsilon * epsilon).sqrt();
    let sb = (nb * nb + epsilon * epsilon).sqrt();
    let lhs = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x / sa - y / sb;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let gap = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let rhs = 2.0 * gap / na.max(nb);
    Ok(InequalityVerdict::new(lhs, rhs, witness_of(a, b, epsilon)))
}

/// The two steps inside the proof of the difference bound:
/// first |a/s_a - b/s_b| <= (|a - b| + |s_b - s_a|) / max(|a|, |b|),
/// then |s_b - s_a| <= |a - b|.
pub fn normalized_difference_intermediates(
    a: &[f64],
    b: &[f64],
    epsilon: f64,
) -> Result<(InequalityVerdict, InequalityVerdict)> {
    let (na, nb) = validate_pair(a, b, epsilon)?;
    let sa = (na * na + epsilon * epsilon).sqrt();
    let sb = (nb * nb + epsilon * epsilon).sqrt();
    let lhs = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x / sa - y / sb;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let gap = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let s_gap = (sb - sa).abs();
    let witness = witness_of(a, b, epsilon);
    let step = InequalityVerdict::new(lhs, (gap + s_gap) / na.max(nb), witness.clone());
    let norm_gap = InequalityVerdict::new(s_gap, gap, witness);
    Ok((step, norm_gap))
}

/// A sampled instance of the difference bound together with its two
/// proof-internal steps.
#[derive(Clone, Debug)]
pub struct SampledChecks {
    pub main: InequalityVerdict,
    pub step: InequalityVerdict,
    pub norm_gap: InequalityVerdict,
}

impl SampledChecks {
    pub fn all_hold(&self) -> bool {
        self.main.holds && self.step.holds && self.norm_gap.holds
    }
}

/// Draw one valid sample with component magnitudes log-uniform in
/// [1e-6, 1e6] (epsilon is 0 for a quarter of samples) and evaluate all
/// three inequalities. Near-equal draws are rejected and retried.
pub fn sample_normalized_difference(rng: &mut impl Rng, dim: usize) -> SampledChecks {
    loop {
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        for v in a.iter_mut().chain(b.iter_mut()) {
            let mag = 10f64.powf(rng.gen_range(-6.0..6.0));
            *v = if rng.gen_bool(0.5) { mag } else { -mag };
        }
        let epsilon = if rng.gen_bool(0.25) {
            0.0
        } else {
            10f64.powf(rng.gen_range(-6.0..6.0))
        };
        let main = match normalized_difference_bound(&a, &b, epsilon) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let (step, norm_gap) = normalized_difference_intermediates(&a, &b, epsilon)
            .expect("validated by the main bound");
        return SampledChecks {
            main,
            step,
            norm_gap,
        };
    }
}

fn kappa0(gamma: f64) -> f64 {
    1.0 / (gamma * 2f64.powf(gamma + 1.0))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 1.0 && gamma < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "profile exponent must lie in (1,2), got {gamma}"
        )));
    }
    Ok(())
}

fn check_s(s: f64, lo_open: bool) -> Result<()> {
    let ok = s.is_finite() && s <= 2.0 && if lo_open { s > 0.0 } else { s >= 0.0 };
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "profile argument must lie in {}, got {s}",
            if lo_open { "(0,2]" } else { "[0,2]" }
        )));
    }
    Ok(())
}

/// Concave profile phi(s) = s - kappa0 s^gamma with kappa0 = 1/(gamma 2^{gamma+1}),
/// for s in [0,2] and gamma in (1,2).
pub fn phi(s: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_s(s, false)?;
    Ok(s - kappa0(gamma) * s.powf(gamma))
}

/// phi'(s) = 1 - gamma kappa0 s^{gamma-1}; stays within [3/4, 1] on [0,2]
/// and equals exactly 3/4 at s = 2.
pub fn phi_prime(s: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_s(s, false)?;
    Ok(1.0 - gamma * kappa0(gamma) * s.powf(gamma - 1.0))
}

/// phi''(s) = -gamma (gamma-1) kappa0 s^{gamma-2} < 0; undefined at s = 0
/// where the power blows up.
pub fn phi_second(s: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_s(s, true)?;
    Ok(-gamma * (gamma - 1.0) * kappa0(gamma) * s.powf(gamma - 2.0))
}

/// Exponential transform h_bar = (1 - e^{nu (h - H)}) / nu. For h <= H it
/// satisfies 0 <= h_bar <= H - h by convexity of the exponential.
pub fn exp_transform(h: f64, nu: f64, hmax: f64) -> Result<f64> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "transform rate must be positive, got {nu}"
        )));
    }
    if !h.is_finite() || !hmax.is_finite() {
        return Err(Error::InvalidParameter(
            "transform arguments must be finite".into(),
        ));
    }
    // exp_m1 keeps the difference accurate when nu (h - H) is tiny;
    // 1 - exp(...) would cancel, leaving absolute error ~ulp(1)/nu.
    Ok(-(nu * (h - hmax)).exp_m1() / nu)
}

/// Solve the base problem and each boundary-raised variant, then check the
/// discrete ordering u_g <= u_{g + dg} + tolerance at every interior node.
///
/// The base problem must include the zeroth-order term (the ordering comes
/// from monotonicity in the boundary data for the proper equation). Each
/// verdict has lhs = worst signed violation, rhs = [`COMPARISON_TOL`], and
/// the coordinates of the worst node as witness.
pub fn comparison_harness(
    base: &DirichletProblem,
    perturbations: &[ScalarField],
    opts: &SolveOptions,
) -> Result<Vec<InequalityVerdict>> {
    if !base.eq().zeroth_order() {
        return Err(Error::InvalidParameter(
            "comparison harness requires the zeroth-order term".into(),
        ));
    }
    let grid = base.grid().clone();
    let u0 = solve_dirichlet(base, opts)?;
    let mut verdicts = Vec::with_capacity(perturbations.len());
    for dg in perturbations {
        if dg.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        if !dg.values().iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidField(
                "boundary perturbations must be finite and nonnegative".into(),
            ));
        }
        let raised: Vec<f64> = base
            .boundary()
            .values()
            .iter()
            .zip(dg.values())
            .map(|(g, d)| g + d)
            .collect();
        let problem =
            DirichletProblem::new(base.eq().clone(), ScalarField::from_values(grid.clone(), raised)?)?;
        let u1 = solve_dirichlet(&problem, opts)?;
        let mut worst = f64::MIN;
        let mut worst_node = grid.interior_nodes()[0];
        for &node in grid.interior_nodes() {
            let gap = u0.solution.value(node) - u1.solution.value(node);
            if gap > worst {
                worst = gap;
                worst_node = node;
            }
        }
        let mut witness = vec![0.0; grid.dim()];
        grid.coords(worst_node, &mut witness);
        verdicts.push(InequalityVerdict::new(worst, COMPARISON_TOL, witness));
    }
    Ok(verdicts)
}

/// Solutions of an equation family on one grid with shared boundary data,
/// with the input perturbations and all pairwise solution gaps recorded.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    /// Sup-norm gap of each exponent field to the last (limit) entry.
    pub input_gaps_p: Vec<f64>,
    /// Sup-norm gap of each source field to the last entry.
    pub input_gaps_f: Vec<f64>,
    /// Full symmetric matrix of max-norm solution gaps.
    pub gap_matrix: Vec<Vec<f64>>,
    /// gap_matrix[i][i+1], the Cauchy sequence read.
    pub successive_gaps: Vec<f64>,
    /// Successive gaps are nonincreasing (5% slack; gaps at solver noise
    /// level are ignored).
    pub cauchy: bool,
    pub reports: Vec<SolveReport>,
}

/// Solve every problem of a family that shares grid and boundary data, and
/// measure how the solutions approach each other as the coefficients settle.
pub fn stability_harness(
    problems: &[DirichletProblem],
    opts: &SolveOptions,
) -> Result<StabilityReport> {
    let Some(first) = problems.first() else {
        return Err(Error::InvalidParameter(
            "stability harness needs at least one problem".into(),
        ));
    };
    let grid = first.grid().clone();
    for p in problems {
        if p.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        if p.boundary().values() != first.boundary().values() {
            return Err(Error::InvalidParameter(
                "stability family must share boundary data".into(),
            ));
        }
    }
    let reports: Vec<SolveReport> = problems
        .iter()
        .map(|p| solve_dirichlet(p, opts))
        .collect::<Result<_>>()?;
    let last = problems.len() - 1;
    let sup_gap = |a: &ScalarField, b: &ScalarField| field::max_abs_diff(a, b).unwrap_or(f64::NAN);
    let input_gaps_p: Vec<f64> = problems
        .iter()
        .map(|p| {
            sup_gap(
                p.eq().exponent().samples(),
                problems[last].eq().exponent().samples(),
            )
        })
        .collect();
    let input_gaps_f: Vec<f64> = problems
        .iter()
        .map(|p| sup_gap(p.eq().source(), problems[last].eq().source()))
        .collect();
    let n = problems.len();
    let mut gap_matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let g = sup_gap(&reports[i].solution, &reports[j].solution);
            gap_matrix[i][j] = g;
            gap_matrix[j][i] = g;
        }
    }
    let successive_gaps: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| gap_matrix[i][i + 1])
        .collect();
    let floor = 2.0 * opts.tol;
    let cauchy = successive_gaps
        .windows(2)
        .all(|w| w[1] <= floor || w[1] <= 1.05 * w[0]);
    Ok(StabilityReport {
        input_gaps_p,
        input_gaps_f,
        gap_matrix,
        successive_gaps,
        cauchy,
        reports,
    })
}
