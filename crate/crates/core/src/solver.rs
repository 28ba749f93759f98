//! Dirichlet solver for the regularized equation on the masked disc.
//!
//! Unknowns are the interior nodes; every collar node is pinned to the
//! boundary field. The nonlinear system residual(u) = 0 is solved by damped
//! Newton with a backtracking line search; when the line search stalls, the
//! solver falls back to Picard iterations (freeze the diffusion matrix at the
//! current gradient, solve the linear problem, repeat) and then resumes
//! Newton. Linear systems go through a sparse direct LU factorization.
//! epsilon = 0 is never solved directly; reach it by continuation and compare
//! tails.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::field::{self, ScalarField};
use crate::grid::{Grid, MAX_DIM};
use crate::operator::{EquationSpec, OperatorCtx};

/// Equation plus Dirichlet data. The boundary field supplies values at every
/// non-interior node (the collar), so it must be finite everywhere.
#[derive(Clone, Debug)]
pub struct DirichletProblem {
    eq: EquationSpec,
    boundary: ScalarField,
}

impl DirichletProblem {
    pub fn new(eq: EquationSpec, boundary: ScalarField) -> Result<Self> {
        if boundary.grid() != eq.grid() {
            return Err(Error::GridMismatch);
        }
        if !boundary.values().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidField(
                "boundary data must be finite at every node (the collar uses it)".into(),
            ));
        }
        Ok(DirichletProblem { eq, boundary })
    }

    pub fn eq(&self) -> &EquationSpec {
        &self.eq
    }

    pub fn boundary(&self) -> &ScalarField {
        &self.boundary
    }

    pub fn grid(&self) -> &Grid {
        self.eq.grid()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        DirichletProblem::new(self.eq.with_epsilon(epsilon)?, self.boundary.clone())
    }
}

/// How the Newton matrix is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Finite differences compressed by stencil-aware graph coloring.
    #[default]
    FiniteDifference,
    /// Exact chain rule through the stencils and the diffusion matrix.
    Analytic,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Max-norm residual target.
    pub tol: f64,
    pub max_newton: usize,
    pub max_picard: usize,
    /// Line-search backtracking factor in (0,1).
    pub damping: f64,
    pub jacobian: JacobianMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_newton: 50,
            max_picard: 500,
            damping: 0.5,
            jacobian: JacobianMode::FiniteDifference,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in (0,1), got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Outcome of one solve. `converged` implies `residual_norm <= tol`;
/// `history` holds the max-norm residual after the initial guess and after
/// every accepted step (Newton and Picard alike).
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: ScalarField,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Result of a decreasing-epsilon continuation run.
#[derive(Clone, Debug)]
pub struct EpsilonSweep {
    pub epsilons: Vec<f64>,
    pub solutions: Vec<ScalarField>,
    /// Max-norm gaps between consecutive solutions, length len-1.
    pub cauchy_gaps: Vec<f64>,
    pub reports: Vec<SolveReport>,
}

/// Solve with the cold start u = boundary extension.
pub fn solve_dirichlet(problem: &DirichletProblem, opts: &SolveOptions) -> Result<SolveReport> {
    solve_dirichlet_from(problem, problem.boundary(), opts)
}

/// Solve warm-started from `initial` (interior values; collar is re-pinned).
pub fn solve_dirichlet_from(
    problem: &DirichletProblem,
    initial: &ScalarField,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    if initial.grid() != problem.grid() {
        return Err(Error::GridMismatch);
    }
    if problem.eq().reg().epsilon <= 0.0 {
        return Err(Error::InvalidParameter(
            "the solver requires epsilon > 0; reach epsilon = 0 by continuation".into(),
        ));
    }
    configure_parallelism();
    let disc = Discretization::new(problem);
    let mut u = problem.boundary().values().to_vec();
    for &node in disc.grid.interior_nodes() {
        u[node] = initial.value(node);
    }
    disc.run(u, opts)
}

/// Warm-started solves along a strictly decreasing, strictly positive
/// epsilon schedule, recording consecutive max-norm gaps.
pub fn continuation_in_epsilon(
    problem: &DirichletProblem,
    epsilons: &[f64],
    opts: &SolveOptions,
) -> Result<EpsilonSweep> {
    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon schedule".into()));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "epsilon schedule must be strictly decreasing".into(),
            ));
        }
    }
    if epsilons[epsilons.len() - 1] <= 0.0 {
        return Err(Error::InvalidParameter(
            "epsilon schedule must stay strictly positive".into(),
        ));
    }
    let mut solutions: Vec<ScalarField> = Vec::with_capacity(epsilons.len());
    let mut reports = Vec::with_capacity(epsilons.len());
    let mut gaps = Vec::new();
    for (k, &eps) in epsilons.iter().enumerate() {
        let prob = problem.with_epsilon(eps)?;
        let report = if let Some(prev) = solutions.last() {
            solve_dirichlet_from(&prob, prev, opts)?
        } else {
            solve_dirichlet(&prob, opts)?
        };
        if k > 0 {
            gaps.push(field::max_abs_diff(
                &report.solution,
                &solutions[k - 1],
            )?);
        }
        solutions.push(report.solution.clone());
        reports.push(report);
    }
    Ok(EpsilonSweep {
        epsilons: epsilons.to_vec(),
        solutions,
        cauchy_gaps: gaps,
        reports,
    })
}

/// Sequential by default so that repeated runs are bitwise identical;
/// NORMPX_THREADS > 1 opts into parallel factorization.
fn configure_parallelism() {
    let k = std::env::var("NORMPX_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .unwrap_or(1);
    if k <= 1 {
        faer::set_global_parallelism(Par::Seq);
    } else {
        faer::set_global_parallelism(Par::rayon(k));
    }
}

struct Discretization<'a> {
    grid: &'a Grid,
    ctx: OperatorCtx<'a>,
    /// node -> position among interior nodes, usize::MAX elsewhere.
    interior_pos: Vec<usize>,
    /// 5^dim stencil-aware colors; same-color columns never share a row.
    colors: Vec<Vec<usize>>,
}

impl<'a> Discretization<'a> {
    fn new(problem: &'a DirichletProblem) -> Self {
        let grid = problem.grid();
        let ctx = OperatorCtx::new(problem.eq());
        let mut interior_pos = vec![usize::MAX; grid.node_count()];
        for (k, &node) in grid.interior_nodes().iter().enumerate() {
            interior_pos[node] = k;
        }
        // one-sided gradients couple up to offset 2 per axis, so rows read a
        // radius-2 cube; mod-5 per axis keeps same-color columns disjoint
        let ncolors = 5usize.pow(grid.dim() as u32);
        let mut colors = vec![Vec::new(); ncolors];
        for &node in grid.interior_nodes() {
            let mut c = 0;
            for axis in (0..grid.dim()).rev() {
                c = c * 5 + grid.axis_index(node, axis) % 5;
            }
            colors[c].push(node);
        }
        Discretization {
            grid,
            ctx,
            interior_pos,
            colors,
        }
    }

    fn m(&self) -> usize {
        self.grid.interior_nodes().len()
    }

    fn residual_vec(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        for (k, &node) in self.grid.interior_nodes().iter().enumerate() {
            out[k] = self.ctx.residual_at(u, node)?;
        }
        Ok(())
    }

    /// Nodes whose values the residual at `node` may read: the radius-2 axis
    /// pattern of the gradient plus the radius-1 cross pattern of the
    /// Hessian. A superset is harmless; a miss would corrupt the Jacobian.
    fn support(&self, node: usize, out: &mut Vec<usize>) {
        out.clear();
        out.push(node);
        let d = self.grid.dim();
        for k in 0..d {
            let s = self.grid.stride(k);
            let i = self.grid.axis_index(node, k);
            out.push(node + s);
            out.push(node - s);
            if i + 2 < self.grid.points_per_axis() {
                out.push(node + 2 * s);
            }
            if i >= 2 {
                out.push(node - 2 * s);
            }
            for l in 0..k {
                let t = self.grid.stride(l);
                out.push(node + s + t);
                out.push(node + s - t);
                out.push(node - s + t);
                out.push(node - s - t);
            }
        }
    }

    fn jacobian_fd(&self, u: &mut Vec<f64>, base: &[f64]) -> Result<Vec<Triplet<usize, usize, f64>>> {
        let m = self.m();
        let mut trips: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(m * 16);
        let sqrt_eps = f64::EPSILON.sqrt();
        let mut pert = vec![0.0; m];
        let mut support = Vec::with_capacity(32);
        for color in &self.colors {
            if color.is_empty() {
                continue;
            }
            let mut steps: Vec<(usize, f64, f64)> = Vec::with_capacity(color.len());
            for &node in color {
                let old = u[node];
                let step = sqrt_eps * old.abs().max(1.0);
                u[node] = old + step;
                steps.push((node, old, step));
            }
            self.residual_vec(u, &mut pert)?;
            for &(node, old, _) in &steps {
                u[node] = old;
            }
            // each row sees at most one perturbed column: the same-color
            // support member
            for (row, &rnode) in self.grid.interior_nodes().iter().enumerate() {
                self.support(rnode, &mut support);
                for &snode in &support {
                    if self.interior_pos[snode] == usize::MAX {
                        continue;
                    }
                    if let Ok(k) = color.binary_search(&snode) {
                        let (_, _, step) = steps[k];
                        let dv = (pert[row] - base[row]) / step;
                        if dv != 0.0 {
                            trips.push(Triplet::new(row, self.interior_pos[snode], dv));
                        }
                        break;
                    }
                }
            }
        }
        Ok(trips)
    }

    fn jacobian_analytic(&self, u: &[f64]) -> Result<Vec<Triplet<usize, usize, f64>>> {
        let grid = self.grid;
        let d = grid.dim();
        let h = grid.spacing();
        let h2 = h * h;
        let m = self.m();
        let mut trips: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(m * 16);
        let mut eta = [0.0; MAX_DIM];
        let mut hess = [0.0; MAX_DIM * MAX_DIM];
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(32);

        for (row, &node) in grid.interior_nodes().iter().enumerate() {
            field::gradient_at_node(grid, u, node, &mut eta);
            for k in 0..d {
                eta[k] += self.ctx.shift[k];
            }
            field::hessian_at_node(grid, u, node, &mut hess);
            let s: f64 = eta[..d].iter().map(|e| e * e).sum::<f64>() + self.ctx.eps2;
            let pfac = self.ctx.p[node] - 2.0;
            let mut t = 0.0;
            let mut heta = [0.0; MAX_DIM];
            for i in 0..d {
                let mut hi = 0.0;
                for j in 0..d {
                    hi += hess[i * d + j] * eta[j];
                }
                heta[i] = hi;
                t += hi * eta[i];
            }
            // dF/dH_ij = -(delta_ij + pfac eta_i eta_j / s)
            // dF/deta_i = -(2 pfac / s) (heta_i - t eta_i / s)
            acc.clear();
            if self.ctx.c != 0.0 {
                acc.push((node, self.ctx.c));
            }
            // Hessian stencils
            for k in 0..d {
                let sk = grid.stride(k);
                let w = -(1.0 + pfac * eta[k] * eta[k] / s);
                acc.push((node + sk, w / h2));
                acc.push((node - sk, w / h2));
                acc.push((node, -2.0 * w / h2));
                for l in 0..k {
                    let sl = grid.stride(l);
                    // both symmetric slots share the one cross stencil
                    let w = -2.0 * (pfac * eta[k] * eta[l] / s);
                    let c = w / (4.0 * h2);
                    acc.push((node + sk + sl, c));
                    acc.push((node - sk - sl, c));
                    acc.push((node + sk - sl, -c));
                    acc.push((node - sk + sl, -c));
                }
            }
            // gradient stencils
            for k in 0..d {
                let ge = -(2.0 * pfac / s) * (heta[k] - t * eta[k] / s);
                if ge == 0.0 {
                    continue;
                }
                let sk = grid.stride(k);
                match field::grad_stencil(grid, node, k) {
                    field::GradStencil::Central | field::GradStencil::CollarCentral => {
                        acc.push((node + sk, ge / (2.0 * h)));
                        acc.push((node - sk, -ge / (2.0 * h)));
                    }
                    field::GradStencil::Forward => {
                        acc.push((node, -3.0 * ge / (2.0 * h)));
                        acc.push((node + sk, 4.0 * ge / (2.0 * h)));
                        acc.push((node + 2 * sk, -ge / (2.0 * h)));
                    }
                    field::GradStencil::Backward => {
                        acc.push((node, 3.0 * ge / (2.0 * h)));
                        acc.push((node - sk, -4.0 * ge / (2.0 * h)));
                        acc.push((node - 2 * sk, ge / (2.0 * h)));
                    }
                }
            }
            for &(snode, v) in &acc {
                let col = self.interior_pos[snode];
                if col != usize::MAX {
                    trips.push(Triplet::new(row, col, v));
                }
            }
        }
        Ok(trips)
    }

    /// One frozen-coefficient linear solve: freeze A(x, Du+q) at `u`, solve
    /// -trace(A D^2 v) + c v = f + c anchor for v with the collar pinned.
    fn picard_step(&self, u: &[f64]) -> Result<Vec<f64>> {
        let grid = self.grid;
        let d = grid.dim();
        let h2 = grid.spacing() * grid.spacing();
        let m = self.m();
        let mut trips: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(m * 10);
        let mut rhs = vec![0.0; m];
        let mut eta = [0.0; MAX_DIM];
        let mut amat = [0.0; MAX_DIM * MAX_DIM];
        for (row, &node) in grid.interior_nodes().iter().enumerate() {
            field::gradient_at_node(grid, u, node, &mut eta);
            for k in 0..d {
                eta[k] += self.ctx.shift[k];
            }
            let s: f64 = eta[..d].iter().map(|e| e * e).sum::<f64>() + self.ctx.eps2;
            let pfac = self.ctx.p[node] - 2.0;
            for i in 0..d {
                for j in 0..d {
                    amat[i * d + j] =
                        pfac * (eta[i] * eta[j]) / s + if i == j { 1.0 } else { 0.0 };
                }
            }
            rhs[row] = self.ctx.f[node]
                + self
                    .ctx
                    .anchor
                    .map_or(0.0, |a| self.ctx.c * a[node]);
            let mut push = |col_node: usize, v: f64, rhs_row: &mut f64| {
                let col = self.interior_pos[col_node];
                if col == usize::MAX {
                    // known collar value moves to the right-hand side
                    *rhs_row -= v * u[col_node];
                } else {
                    trips.push(Triplet::new(row, col, v));
                }
            };
            let mut center = self.ctx.c;
            for k in 0..d {
                let sk = grid.stride(k);
                let w = -amat[k * d + k] / h2;
                push(node + sk, w, &mut rhs[row]);
                push(node - sk, w, &mut rhs[row]);
                center += -2.0 * w;
                for l in 0..k {
                    let sl = grid.stride(l);
                    let c = -2.0 * amat[k * d + l] / (4.0 * h2);
                    push(node + sk + sl, c, &mut rhs[row]);
                    push(node - sk - sl, c, &mut rhs[row]);
                    push(node + sk - sl, -c, &mut rhs[row]);
                    push(node - sk + sl, -c, &mut rhs[row]);
                }
            }
            trips.push(Triplet::new(row, row, center));
        }
        let delta = sparse_solve(m, trips, &rhs)?;
        let mut out = u.to_vec();
        for (k, &node) in grid.interior_nodes().iter().enumerate() {
            out[node] = delta[k];
        }
        Ok(out)
    }

    fn run(&self, mut u: Vec<f64>, opts: &SolveOptions) -> Result<SolveReport> {
        let m = self.m();
        let mut f = vec![0.0; m];
        let mut ftry = vec![0.0; m];
        self.residual_vec(&u, &mut f)?;
        let mut rn = linf(&f);
        let mut history = vec![rn];
        let mut newton_used = 0usize;
        let mut picard_used = 0usize;
        let mut best_u = u.clone();
        let mut best_rn = rn;

        'outer: while rn > opts.tol {
            if newton_used >= opts.max_newton {
                break;
            }
            // Newton step
            let trips = match opts.jacobian {
                JacobianMode::FiniteDifference => self.jacobian_fd(&mut u, &f)?,
                JacobianMode::Analytic => self.jacobian_analytic(&u)?,
            };
            let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
            let delta = sparse_solve(m, trips, &neg_f)?;
            newton_used += 1;

            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..24 {
                let mut utry = u.clone();
                for (k, &node) in self.grid.interior_nodes().iter().enumerate() {
                    utry[node] += lambda * delta[k];
                }
                self.residual_vec(&utry, &mut ftry)?;
                let rtry = linf(&ftry);
                if rtry <= (1.0 - 1e-4 * lambda) * rn {
                    u = utry;
                    std::mem::swap(&mut f, &mut ftry);
                    rn = rtry;
                    accepted = true;
                    break;
                }
                lambda *= opts.damping;
            }
            if accepted {
                history.push(rn);
                if rn < best_rn {
                    best_rn = rn;
                    best_u = u.clone();
                }
                continue;
            }

            // line search stalled: Picard until meaningful progress
            let stall_rn = rn;
            while picard_used < opts.max_picard {
                let unew = self.picard_step(&u)?;
                self.residual_vec(&unew, &mut ftry)?;
                let rnew = linf(&ftry);
                picard_used += 1;
                if rnew.is_finite() && rnew <= 4.0 * rn {
                    u = unew;
                    std::mem::swap(&mut f, &mut ftry);
                    rn = rnew;
                    history.push(rn);
                    if rn < best_rn {
                        best_rn = rn;
                        best_u = u.clone();
                    }
                    if rn <= opts.tol || rn <= 0.25 * stall_rn {
                        continue 'outer;
                    }
                } else {
                    // diverging; give Newton another chance from the best seen
                    u = best_u.clone();
                    self.residual_vec(&u, &mut f)?;
                    rn = linf(&f);
                    continue 'outer;
                }
            }
            break;
        }

        let iterations = newton_used + picard_used;
        let converged = rn <= opts.tol;
        let solution = ScalarField::from_values(self.grid.clone(), u)?;
        let report = SolveReport {
            solution,
            iterations,
            residual_norm: rn,
            converged,
            history,
        };
        if !converged {
            return Err(Error::NoConvergence {
                residual_norm: rn,
                iterations,
                tol: opts.tol,
                report: Box::new(report),
            });
        }
        Ok(report)
    }
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Direct sparse solve via LU with partial pivoting. Triplets may repeat;
/// duplicates are combined deterministically before factorization.
fn sparse_solve(m: usize, mut trips: Vec<Triplet<usize, usize, f64>>, rhs: &[f64]) -> Result<Vec<f64>> {
    trips.sort_by(|a, b| (a.col, a.row).cmp(&(b.col, b.row)));
    let mut combined: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(trips.len());
    for t in trips {
        match combined.last_mut() {
            Some(last) if last.row == t.row && last.col == t.col => last.val += t.val,
            _ => combined.push(t),
        }
    }
    let a = SparseColMat::try_new_from_triplets(m, m, &combined)
        .map_err(|e| Error::LinearSolve(format!("assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::LinearSolve(format!("LU factorization failed: {e:?}")))?;
    let b = Mat::from_fn(m, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    Ok((0..m).map(|i| x[(i, 0)]).collect())
}
