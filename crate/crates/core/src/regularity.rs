//! Measurements on computed fields: Hölder seminorms and exponent fits,
//! dyadic oscillation and affine-approximation decay, a weak Harnack ratio
//! check, a gradient measure condition, and the closed-form constants used by
//! the regularity arguments.

use crate::error::{Error, Result};
use crate::field::{self, ScalarField, VectorField};
use crate::grid::{BallRegion, Grid, MAX_DIM};
use crate::util;

/// Pairwise seminorm sweeps switch to a deterministic stride subsample above
/// this node count.
pub const SEMINORM_NODE_CAP: usize = 10_000;
/// The exponent fit sweeps pairs once with constant work per pair, so it
/// affords a larger cap before subsampling.
pub const FIT_NODE_CAP: usize = 20_000;
/// Levels and pair differences below this are treated as zero in log fits.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Quarter-octave bins for the pair-distance envelope.
const LOG_BIN_WIDTH: f64 = std::f64::consts::LN_2 / 4.0;

/// A scalar or vector field viewed through one measuring interface.
#[derive(Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Vector(&'a VectorField),
}

impl<'a> From<&'a ScalarField> for FieldRef<'a> {
    fn from(u: &'a ScalarField) -> Self {
        FieldRef::Scalar(u)
    }
}

impl<'a> From<&'a VectorField> for FieldRef<'a> {
    fn from(v: &'a VectorField) -> Self {
        FieldRef::Vector(v)
    }
}

impl<'a> FieldRef<'a> {
    pub fn grid(&self) -> &Grid {
        match self {
            FieldRef::Scalar(u) => u.grid(),
            FieldRef::Vector(v) => v.grid(),
        }
    }

    /// Squared difference magnitude between two nodes: (u(a)-u(b))^2 for
    /// scalars, squared Euclidean distance of the vectors otherwise.
    fn diff_sq(&self, a: usize, b: usize) -> f64 {
        match self {
            FieldRef::Scalar(u) => {
                let d = u.value(a) - u.value(b);
                d * d
            }
            FieldRef::Vector(v) => {
                let dim = v.grid().dim();
                let mut s = 0.0;
                for k in 0..dim {
                    let d = v.component(a, k) - v.component(b, k);
                    s += d * d;
                }
                s
            }
        }
    }

    /// Per-ball statistic for decay reports: oscillation for scalars,
    /// supremum of the Euclidean norm for vectors.
    fn level_value(&self, region: &BallRegion) -> Result<f64> {
        match self {
            FieldRef::Scalar(u) => field::oscillation(u, region),
            FieldRef::Vector(v) => field::supremum_norm(v, region),
        }
    }
}

fn subsample(nodes: Vec<usize>, cap: usize) -> (Vec<usize>, bool) {
    if nodes.len() <= cap {
        (nodes, false)
    } else {
        let stride = nodes.len().div_ceil(cap);
        (nodes.into_iter().step_by(stride).collect(), true)
    }
}

fn node_coords(grid: &Grid, nodes: &[usize]) -> Vec<f64> {
    let d = grid.dim();
    let mut out = vec![0.0; nodes.len() * d];
    for (k, &node) in nodes.iter().enumerate() {
        grid.coords(node, &mut out[k * d..k * d + d]);
    }
    out
}

fn dist_sq(xs: &[f64], d: usize, a: usize, b: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..d {
        let t = xs[a * d + k] - xs[b * d + k];
        s += t * t;
    }
    s
}

/// Discrete Hölder seminorm sup |u(x)-u(y)| / |x-y|^alpha over node pairs in
/// the region, alpha in (0,1]. Above [`SEMINORM_NODE_CAP`] nodes the sup runs
/// on a deterministic stride subsample and is a lower bound.
pub fn holder_seminorm<'a>(
    field: impl Into<FieldRef<'a>>,
    region: &BallRegion,
    alpha: f64,
) -> Result<f64> {
    let field = field.into();
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "holder exponent must lie in (0,1], got {alpha}"
        )));
    }
    let grid = field.grid();
    let nodes = region.nodes(grid)?;
    if nodes.len() < 2 {
        return Err(Error::InvalidRegion(
            "seminorm needs at least two nodes in the region".into(),
        ));
    }
    let (nodes, _) = subsample(nodes, SEMINORM_NODE_CAP);
    let d = grid.dim();
    let xs = node_coords(grid, &nodes);
    let mut best = 0.0f64;
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let dv = field.diff_sq(nodes[a], nodes[b]).sqrt();
            if dv == 0.0 {
                continue;
            }
            let dist = dist_sq(&xs, d, a, b).sqrt();
            best = best.max(dv / dist.powf(alpha));
        }
    }
    Ok(best)
}

/// Fitted Hölder exponent and seminorm over a region.
#[derive(Clone, Debug)]
pub struct HolderReport {
    pub region: BallRegion,
    /// Fitted exponent, clamped into the candidate range (subset of (0,1]).
    pub alpha: f64,
    /// exp(intercept) of the log-log fit; the constant in |Δu| ≈ C|Δx|^α.
    pub seminorm: f64,
    /// RMS of the log-log fit at the clamped exponent.
    pub fit_residual: f64,
    /// Set when the pair cloud carries no signal (constant field, singleton
    /// region); then alpha = 1 and seminorm = 0 by convention.
    pub degenerate: bool,
    /// Set when the region exceeded [`FIT_NODE_CAP`] and was subsampled.
    pub subsampled: bool,
}

/// Least-squares Hölder-exponent fit on the upper envelope of the pair cloud.
///
/// Raw pairs (log|x-y|, log|Δu|) scatter over everything below the modulus of
/// continuity, so a straight fit of the full cloud measures scatter, not
/// regularity. Instead pair distances are grouped into quarter-octave bins,
/// each bin keeps its largest |Δu| (the discrete modulus of continuity), and
/// the line is fit through those envelope points. Distances beyond
/// radius - h are discarded: near the diameter only near-boundary pairs
/// remain and the envelope artificially collapses. The slope is clamped into
/// [min, max] of `alphas` and the intercept is refit at the clamped slope.
pub fn fit_holder_exponent<'a>(
    field: impl Into<FieldRef<'a>>,
    region: &BallRegion,
    alphas: &[f64],
) -> Result<HolderReport> {
    let field = field.into();
    if alphas.is_empty() || !alphas.iter().all(|a| a.is_finite() && *a > 0.0 && *a <= 1.0) {
        return Err(Error::InvalidParameter(
            "exponent candidates must be a nonempty subset of (0,1]".into(),
        ));
    }
    let grid = field.grid();
    let nodes = region.nodes(grid)?;
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (nodes, subsampled) = subsample(nodes, FIT_NODE_CAP);
    let d = grid.dim();
    let h = grid.spacing();
    let xs = node_coords(grid, &nodes);

    let dmax = (region.radius() - h).max(0.75 * region.radius());
    // bin k covers distances [h e^{k w}, h e^{(k+1) w}); store squared edges
    // so the hot loop never takes roots or logs
    let nbins = ((dmax / h).ln() / LOG_BIN_WIDTH).ceil().max(1.0) as usize + 1;
    let edges_sq: Vec<f64> = (0..=nbins)
        .map(|k| {
            let e = h * (k as f64 * LOG_BIN_WIDTH).exp();
            e * e
        })
        .collect();
    let dmax_sq = dmax * dmax;
    let floor_sq = NOISE_FLOOR * NOISE_FLOOR;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; nbins];
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let d2 = dist_sq(&xs, d, a, b);
            if d2 > dmax_sq {
                continue;
            }
            let dv2 = field.diff_sq(nodes[a], nodes[b]);
            if dv2 < floor_sq {
                continue;
            }
            // first edge is h itself and d2 >= h^2 up to rounding
            let bin = edges_sq[1..].partition_point(|e| *e <= d2).min(nbins - 1);
            match best[bin] {
                Some((_, cur)) if cur >= dv2 => {}
                _ => best[bin] = Some((d2, dv2)),
            }
        }
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for entry in best.iter().flatten() {
        lx.push(0.5 * entry.0.ln());
        ly.push(0.5 * entry.1.ln());
    }
    if lx.len() < 2 {
        return Ok(HolderReport {
            region: region.clone(),
            alpha: 1.0,
            seminorm: 0.0,
            fit_residual: 0.0,
            degenerate: true,
            subsampled,
        });
    }
    let (slope, _, _) = util::fit_line(&lx, &ly)?;
    let lo = alphas.iter().cloned().fold(f64::MAX, f64::min);
    let hi = alphas.iter().cloned().fold(f64::MIN, f64::max);
    let alpha = slope.clamp(lo, hi);
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let intercept = my - alpha * mx;
    Ok(HolderReport {
        region: region.clone(),
        alpha,
        seminorm: intercept.exp(),
        fit_residual: util::rms_residual(&lx, &ly, alpha, intercept),
        degenerate: false,
        subsampled,
    })
}

/// Interpretation of `fitted_rate` in a [`DyadicDecayReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayKind {
    /// values[k] ≈ C γ^k; fitted_rate is γ.
    Geometric,
    /// values[k] ≈ C r_k^e with r_k = τ^k; fitted_rate is the exponent e.
    Power,
}

/// A per-ball quantity on the shrinking balls B_{τ^k}(center) plus its
/// fitted decay rate.
#[derive(Clone, Debug)]
pub struct DyadicDecayReport {
    pub tau: f64,
    /// The levels k actually measured. Leading levels whose ball pokes out
    /// of the domain are skipped; trailing levels with fewer than two nodes
    /// are dropped with `truncated` set.
    pub levels: Vec<usize>,
    pub values: Vec<f64>,
    pub fitted_rate: f64,
    pub fit_residual: f64,
    pub kind: DecayKind,
    pub truncated: bool,
}

struct LevelScan {
    levels: Vec<usize>,
    regions: Vec<BallRegion>,
    truncated: bool,
}

fn scan_levels(grid: &Grid, center: &[f64], tau: f64, depth: usize) -> Result<LevelScan> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "decay ratio must lie in (0,1), got {tau}"
        )));
    }
    if depth < 2 {
        return Err(Error::InvalidParameter(
            "decay needs at least two levels".into(),
        ));
    }
    if center.len() != grid.dim() || !center.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidRegion(
            "decay center must be finite and match the grid dimension".into(),
        ));
    }
    let cnorm = util::norm(center);
    let mut levels = Vec::new();
    let mut regions = Vec::new();
    let mut truncated = false;
    for k in 0..depth {
        let radius = tau.powi(k as i32);
        if cnorm + radius > 1.0 + grid.spacing() {
            // ball pokes out of the domain; larger levels are meaningless
            // for an off-center point, so skip from the top
            continue;
        }
        let region = BallRegion::new(center.to_vec(), radius)?;
        if region.nodes(grid)?.len() < 2 {
            truncated = true;
            break;
        }
        levels.push(k);
        regions.push(region);
    }
    if levels.len() < 2 {
        return Err(Error::InvalidRegion(
            "decay needs at least two usable levels on this grid".into(),
        ));
    }
    Ok(LevelScan {
        levels,
        regions,
        truncated,
    })
}

/// Least-squares geometric fit values[k] ≈ C rate^k over informative levels.
fn fit_log_decay(levels: &[usize], values: &[f64]) -> Option<(f64, f64)> {
    let mut ks = Vec::new();
    let mut lv = Vec::new();
    for (&k, &v) in levels.iter().zip(values) {
        if v >= NOISE_FLOOR {
            ks.push(k as f64);
            lv.push(v.ln());
        }
    }
    if ks.len() < 2 {
        return None;
    }
    let (slope, intercept, rms) = util::fit_line(&ks, &lv).ok()?;
    let _ = intercept;
    Some((slope, rms))
}

/// Supremum (vector) or oscillation (scalar) of the field on shrinking balls,
/// with a geometric rate fitted to the informative levels. A field that has
/// already decayed below the noise floor everywhere reports rate 0.
pub fn oscillation_decay<'a>(
    field: impl Into<FieldRef<'a>>,
    center: &[f64],
    tau: f64,
    depth: usize,
) -> Result<DyadicDecayReport> {
    let field = field.into();
    let scan = scan_levels(field.grid(), center, tau, depth)?;
    let mut values = Vec::with_capacity(scan.levels.len());
    for region in &scan.regions {
        values.push(field.level_value(region)?);
    }
    let (fitted_rate, fit_residual) = match fit_log_decay(&scan.levels, &values) {
        Some((slope, rms)) => (slope.exp(), rms),
        None => (0.0, 0.0),
    };
    Ok(DyadicDecayReport {
        tau,
        levels: scan.levels,
        values,
        fitted_rate,
        fit_residual,
        kind: DecayKind::Geometric,
        truncated: scan.truncated,
    })
}

/// Oscillation of u minus its best affine approximation on shrinking balls.
///
/// Each level fits a + b.(x-center) by least squares and reports the exact
/// oscillation of the residual; the zero affine is always admissible, so the
/// value never exceeds the plain oscillation. The fitted power exponent e in
/// values ≈ C (τ^k)^e is 1 + α for a C^{1,α} field. Levels where every
/// value sits below the noise floor yield an infinite exponent.
pub fn affine_decay(
    u: &ScalarField,
    center: &[f64],
    tau: f64,
    depth: usize,
) -> Result<DyadicDecayReport> {
    let grid = u.grid();
    let scan = scan_levels(grid, center, tau, depth)?;
    let d = grid.dim();
    let mut values = Vec::new();
    let mut levels = Vec::new();
    let mut truncated = scan.truncated;
    for (idx, region) in scan.regions.iter().enumerate() {
        let nodes = region.nodes(grid)?;
        // normal equations for the affine fit in centered coordinates
        let m = d + 1;
        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        let mut x = [0.0; MAX_DIM];
        let mut row = [0.0; MAX_DIM + 1];
        for &node in &nodes {
            grid.coords(node, &mut x[..d]);
            row[0] = 1.0;
            for k in 0..d {
                row[k + 1] = x[k] - center[k];
            }
            let v = u.value(node);
            for i in 0..m {
                b[i] += row[i] * v;
                for j in 0..m {
                    a[i * m + j] += row[i] * row[j];
                }
            }
        }
        if util::solve_dense(&mut a, &mut b, m).is_err() {
            // too few or degenerate nodes to pin an affine map
            truncated = true;
            break;
        }
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for &node in &nodes {
            grid.coords(node, &mut x[..d]);
            let mut fit = b[0];
            for k in 0..d {
                fit += b[k + 1] * (x[k] - center[k]);
            }
            let r = u.value(node) - fit;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let plain = field::oscillation(u, region)?;
        values.push((hi - lo).min(plain));
        levels.push(scan.levels[idx]);
    }
    if levels.len() < 2 {
        return Err(Error::InvalidRegion(
            "decay needs at least two usable levels on this grid".into(),
        ));
    }
    let (fitted_rate, fit_residual) = match fit_log_decay(&levels, &values) {
        Some((slope, rms)) => (slope / tau.ln(), rms),
        None => (f64::INFINITY, 0.0),
    };
    Ok(DyadicDecayReport {
        tau,
        levels,
        values,
        fitted_rate,
        fit_residual,
        kind: DecayKind::Power,
        truncated,
    })
}

/// Geometric rate of a synthetic level sequence values[k] ≈ C rate^k.
pub fn fit_geometric_rate(values: &[f64]) -> Result<(f64, f64)> {
    let levels: Vec<usize> = (0..values.len()).collect();
    fit_log_decay(&levels, values)
        .map(|(slope, rms)| (slope.exp(), rms))
        .ok_or_else(|| {
            Error::InvalidParameter(
                "geometric fit needs at least two levels above the noise floor".into(),
            )
        })
}

/// One weak-Harnack ratio evaluation on concentric balls at the origin.
#[derive(Clone, Debug)]
pub struct HarnackCheck {
    pub tau: f64,
    pub qexp: f64,
    /// tau^{-N/q} (sum_{B_tau} |u|^q h^N)^{1/q}.
    pub lhs: f64,
    /// inf over B_{2 tau} of u, clamped at 0 to absorb the -1e-12 tolerance.
    pub inf_term: f64,
    /// tau (sum_{B_{4 sqrt(N) tau}} |f|^N h^N)^{1/N}.
    pub f_term: f64,
    /// lhs / (inf_term + f_term); 0 when lhs = 0, infinite if only the
    /// denominator vanishes.
    pub fitted_c: f64,
}

/// Assemble the weak-Harnack ratio for a nonnegative field u and source f.
/// Requires tau < 1/(4 sqrt(N)) so the largest ball stays inside the domain,
/// and u >= -1e-12 on the whole interior.
pub fn weak_harnack_check(
    u: &ScalarField,
    f: &ScalarField,
    tau: f64,
    qexp: f64,
) -> Result<HarnackCheck> {
    if u.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let dim = grid.dim() as f64;
    let cap = 1.0 / (4.0 * dim.sqrt());
    if !(tau > 0.0 && tau < cap) {
        return Err(Error::InvalidParameter(format!(
            "harnack ratio needs 0 < tau < 1/(4 sqrt(N)) = {cap:.6}, got {tau}"
        )));
    }
    if !(qexp.is_finite() && qexp > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent must be positive, got {qexp}"
        )));
    }
    let worst = grid
        .interior_nodes()
        .iter()
        .map(|&n| u.value(n))
        .fold(f64::MAX, f64::min);
    if worst < -1e-12 {
        return Err(Error::InvalidField(format!(
            "field must be nonnegative (within 1e-12); minimum is {worst:e}"
        )));
    }
    let small = BallRegion::centred(grid.dim(), tau)?;
    let mid = BallRegion::centred(grid.dim(), 2.0 * tau)?;
    let big = BallRegion::centred(grid.dim(), 4.0 * dim.sqrt() * tau)?;
    let lhs = tau.powf(-dim / qexp) * field::lq_integral_mean(u, &small, qexp)?;
    let inf_term = field::infimum(u, &mid)?.max(0.0);
    let f_term = tau * field::lq_integral_mean(f, &big, dim)?;
    let denom = inf_term + f_term;
    let fitted_c = if lhs == 0.0 {
        0.0
    } else {
        lhs / denom
    };
    Ok(HarnackCheck {
        tau,
        qexp,
        lhs,
        inf_term,
        f_term,
        fitted_c,
    })
}

/// Measure fraction of the unit ball where |Du - d| exceeds eps0, for a unit
/// direction d: (node count x h^N) / |B_1|.
pub fn morrey_condition(du: &VectorField, d: &[f64], eps0: f64) -> Result<f64> {
    let grid = du.grid();
    let dim = grid.dim();
    if d.len() != dim {
        return Err(Error::GridMismatch);
    }
    let norm = util::norm(d);
    if !(norm.is_finite() && (norm - 1.0).abs() <= 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "direction must be a unit vector, |d| = {norm}"
        )));
    }
    if !(eps0.is_finite() && eps0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite and >= 0, got {eps0}"
        )));
    }
    let eps_sq = eps0 * eps0;
    let mut count = 0usize;
    for &node in grid.interior_nodes() {
        let mut s = 0.0;
        for k in 0..dim {
            let t = du.component(node, k) - d[k];
            s += t * t;
        }
        if s > eps_sq {
            count += 1;
        }
    }
    let cell = grid.spacing().powi(dim as i32);
    Ok(count as f64 * cell / util::unit_ball_volume(dim))
}

/// Scale constants for one improvement-of-oscillation step.
#[derive(Clone, Debug)]
pub struct ImposcConstants {
    pub c1: f64,
    pub qexp: f64,
    pub dim: usize,
    pub mu: f64,
    pub l: f64,
    pub f_sup: f64,
    /// Ball ratio: min of the dimensional cap 1/(4 sqrt(N)) and the
    /// source-limited scale.
    pub tau: f64,
    /// Oscillation gain on the shrunken ball.
    pub theta: f64,
}

/// Evaluate the improvement-of-oscillation step size and gain:
/// tau = min(1/(4 sqrt(N)), sqrt(C1 |B1|^{1/q-1/N} mu^{1/q} l /
/// (2 4 sqrt(N) (f_sup+1)))) and theta = C1 |B1|^{1/q} mu^{1/q} l / 2.
pub fn imposc_constants(
    c1: f64,
    qexp: f64,
    dim: usize,
    mu: f64,
    l: f64,
    f_sup: f64,
) -> Result<ImposcConstants> {
    if dim < 1 || dim > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimension must be in 1..={MAX_DIM}, got {dim}"
        )));
    }
    for (name, v) in [("c1", c1), ("q", qexp), ("mu", mu), ("l", l)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if mu > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "mu is a measure fraction and cannot exceed 1, got {mu}"
        )));
    }
    if l >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "l must lie in (0,1), got {l}"
        )));
    }
    if !(f_sup.is_finite() && f_sup >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "f_sup must be finite and >= 0, got {f_sup}"
        )));
    }
    let n = dim as f64;
    let vol = util::unit_ball_volume(dim);
    let theta = 0.5 * c1 * vol.powf(1.0 / qexp) * mu.powf(1.0 / qexp) * l;
    let cap = 1.0 / (4.0 * n.sqrt());
    let scale = (c1 * vol.powf(1.0 / qexp - 1.0 / n) * mu.powf(1.0 / qexp) * l
        / (2.0 * 4.0 * n.sqrt() * (f_sup + 1.0)))
        .sqrt();
    Ok(ImposcConstants {
        c1,
        qexp,
        dim,
        mu,
        l,
        f_sup,
        tau: cap.min(scale),
        theta,
    })
}

/// Hölder exponent implied by a geometric oscillation decay: gamma per step
/// of ratio tau gives alpha = ln(gamma)/ln(tau).
pub fn holder_exponent_from(gamma: f64, tau: f64) -> Result<f64> {
    for (name, v) in [("gamma", gamma), ("tau", tau)] {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in (0,1), got {v}"
            )));
        }
    }
    Ok(gamma.ln() / tau.ln())
}

/// Constants assembled by the Lipschitz bound argument.
#[derive(Clone, Debug)]
pub struct LipschitzProofConstants {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub osc_u: f64,
    /// Exponent of the concave test profile, beta/2 + 1 in (1, 1.5).
    pub gamma: f64,
    /// Coefficient 1/(gamma 2^{gamma+1}) keeping the profile increasing.
    pub kappa0: f64,
    /// Concavity constant beta / 2^{beta/2+3}.
    pub c3: f64,
    /// Localization radius (6 C2 / (C1 C3))^{1/(beta/2-1)} / 2.
    pub r: f64,
    /// Height scale 8 osc_u / r^2.
    pub m: f64,
    /// Threshold the Lipschitz constant must exceed:
    /// max(2 C2 sqrt(M)/(C1 C3), M + 1).
    pub l_lower: f64,
}

/// Evaluate the explicit constants of the Lipschitz estimate from the
/// profile exponent beta, structure constants C1, C2, and the oscillation of
/// the solution.
pub fn lipschitz_proof_constants(
    beta: f64,
    c1: f64,
    c2: f64,
    osc_u: f64,
) -> Result<LipschitzProofConstants> {
    if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0,1), got {beta}"
        )));
    }
    for (name, v) in [("c1", c1), ("c2", c2)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if !(osc_u.is_finite() && osc_u >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "osc_u must be finite and >= 0, got {osc_u}"
        )));
    }
    let gamma = beta / 2.0 + 1.0;
    let kappa0 = 1.0 / (gamma * 2f64.powf(gamma + 1.0));
    let c3 = beta / 2f64.powf(beta / 2.0 + 3.0);
    let r = 0.5 * (6.0 * c2 / (c1 * c3)).powf(1.0 / (beta / 2.0 - 1.0));
    let m = 8.0 * osc_u / (r * r);
    let l_lower = (2.0 * c2 * m.sqrt() / (c1 * c3)).max(m + 1.0);
    Ok(LipschitzProofConstants {
        beta,
        c1,
        c2,
        osc_u,
        gamma,
        kappa0,
        c3,
        r,
        m,
        l_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gradient;
    use crate::grid::Grid;

    fn linear_field(grid: &Grid, b: &[f64]) -> ScalarField {
        ScalarField::from_fn(grid, |x| {
            b.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>()
        })
        .unwrap()
    }

    #[test]
    fn seminorm_of_constant_is_zero() {
        let grid = Grid::new(2, 33).unwrap();
        let u = ScalarField::constant(&grid, 3.25).unwrap();
        let region = BallRegion::centred(2, 0.5).unwrap();
        for alpha in [0.25, 0.5, 1.0] {
            assert_eq!(holder_seminorm(&u, &region, alpha).unwrap(), 0.0);
        }
    }

    #[test]
    fn lipschitz_seminorm_of_linear_field_is_the_slope() {
        let grid = Grid::new(2, 65).unwrap();
        let b = [1.0, 2.0];
        let u = linear_field(&grid, &b);
        let region = BallRegion::centred(2, 0.5).unwrap();
        let norm = (b[0] * b[0] + b[1] * b[1]).sqrt();
        let s = holder_seminorm(&u, &region, 1.0).unwrap();
        // Cauchy-Schwarz caps the ratio at |b|; the grid realizes it within
        // the angular resolution of node directions
        assert!(s <= norm + 1e-9);
        assert!(s >= 0.99 * norm, "seminorm {s} vs slope norm {norm}");

        // alpha = 1/2 on a diameter-1 region: sup |b.(x-y)| / |x-y|^{1/2}
        // is attained at diametral pairs aligned with b, value |b| diam^{1/2}
        let s = holder_seminorm(&u, &region, 0.5).unwrap();
        assert!((s - norm).abs() <= 0.02 * norm, "got {s}, expected {norm}");
    }

    #[test]
    fn seminorm_matches_exhaustive_pair_oracle_exactly() {
        let grid = Grid::new(2, 33).unwrap();
        let u = ScalarField::from_fn(&grid, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let region = BallRegion::new(vec![0.2, -0.1], 0.25).unwrap();
        let nodes = region.nodes(&grid).unwrap();
        assert!(nodes.len() > 10);
        for alpha in [0.3, 1.0] {
            let mut oracle = 0.0f64;
            let mut xa = [0.0; MAX_DIM];
            let mut xb = [0.0; MAX_DIM];
            for (i, &a) in nodes.iter().enumerate() {
                for &b in &nodes[i + 1..] {
                    grid.coords(a, &mut xa);
                    grid.coords(b, &mut xb);
                    let dist = ((xa[0] - xb[0]).powi(2) + (xa[1] - xb[1]).powi(2)).sqrt();
                    let dv = (u.value(a) - u.value(b)).abs();
                    if dv > 0.0 {
                        oracle = oracle.max(dv / dist.powf(alpha));
                    }
                }
            }
            assert_eq!(holder_seminorm(&u, &region, alpha).unwrap(), oracle);
        }
    }

    #[test]
    fn seminorm_rejects_bad_inputs() {
        let grid = Grid::new(2, 33).unwrap();
        let u = ScalarField::constant(&grid, 0.0).unwrap();
        let region = BallRegion::centred(2, 0.5).unwrap();
        assert!(holder_seminorm(&u, &region, 0.0).is_err());
        assert!(holder_seminorm(&u, &region, 1.5).is_err());
        // singleton region: one node at the origin
        let tiny = BallRegion::centred(2, 0.01).unwrap();
        assert!(holder_seminorm(&u, &tiny, 1.0).is_err());
    }

    #[test]
    fn exponent_fit_recovers_a_square_root_profile() {
        let grid = Grid::new(2, 33).unwrap();
        let u = ScalarField::from_fn(&grid, |x| 2.0 * util::norm(x).sqrt()).unwrap();
        let region = BallRegion::centred(2, 0.9).unwrap();
        let alphas: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let report = fit_holder_exponent(&u, &region, &alphas).unwrap();
        assert!(!report.degenerate);
        assert!(
            (report.alpha - 0.5).abs() <= 0.05,
            "fitted alpha {}",
            report.alpha
        );
        assert!(
            (report.seminorm - 2.0).abs() <= 0.2,
            "fitted seminorm {}",
            report.seminorm
        );
    }

    #[test]
    fn exponent_fit_saturates_at_one_for_affine_fields() {
        let grid = Grid::new(2, 65).unwrap();
        let u = linear_field(&grid, &[0.7, -0.2]);
        let region = BallRegion::centred(2, 0.5).unwrap();
        let alphas: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let report = fit_holder_exponent(&u, &region, &alphas).unwrap();
        assert!(!report.degenerate);
        assert!((report.alpha - 1.0).abs() <= 0.05, "alpha {}", report.alpha);
    }

    #[test]
    fn exponent_fit_flags_constant_fields_as_degenerate() {
        let grid = Grid::new(2, 33).unwrap();
        let u = ScalarField::constant(&grid, -1.5).unwrap();
        let region = BallRegion::centred(2, 0.5).unwrap();
        let report = fit_holder_exponent(&u, &region, &[0.25, 0.5, 1.0]).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.alpha, 1.0);
        assert_eq!(report.seminorm, 0.0);
    }

    #[test]
    fn synthetic_geometric_sequence_fits_exactly() {
        let values: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
        let (rate, rms) = fit_geometric_rate(&values).unwrap();
        assert!((rate - 0.5).abs() <= 1e-6, "rate {rate}");
        assert!(rms <= 1e-9);
        assert!(fit_geometric_rate(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn oscillation_decay_of_a_linear_field_tracks_tau() {
        let grid = Grid::new(2, 129).unwrap();
        let u = linear_field(&grid, &[1.0, 0.5]);
        let report = oscillation_decay(&u, &[0.0, 0.0], 0.5, 5).unwrap();
        assert_eq!(report.levels, vec![0, 1, 2, 3, 4]);
        assert!(!report.truncated);
        assert_eq!(report.kind, DecayKind::Geometric);
        // osc over B_r of a linear map scales like r
        assert!(
            (report.fitted_rate - 0.5).abs() <= 0.05,
            "rate {}",
            report.fitted_rate
        );
    }

    #[test]
    fn oscillation_decay_of_a_zero_vector_field_reports_rate_zero() {
        let grid = Grid::new(2, 33).unwrap();
        let v = crate::field::VectorField::from_fn(&grid, |_, out| out.fill(0.0)).unwrap();
        let report = oscillation_decay(&v, &[0.0, 0.0], 0.5, 3).unwrap();
        assert!(report.values.iter().all(|v| *v == 0.0));
        assert_eq!(report.fitted_rate, 0.0);
    }

    #[test]
    fn decay_truncates_when_balls_run_out_of_nodes() {
        let grid = Grid::new(2, 33).unwrap();
        let u = linear_field(&grid, &[1.0, 0.0]);
        // tau^k shrinks below the spacing well before depth 12
        let report = oscillation_decay(&u, &[0.0, 0.0], 0.3, 12).unwrap();
        assert!(report.truncated);
        assert!(report.levels.len() >= 2);
        assert!(report.levels.len() < 12);
    }

    #[test]
    fn affine_decay_vanishes_on_affine_fields() {
        let grid = Grid::new(2, 65).unwrap();
        let u = ScalarField::from_fn(&grid, |x| 0.4 * x[0] - 0.9 * x[1] + 0.7).unwrap();
        let report = affine_decay(&u, &[0.0, 0.0], 0.5, 4).unwrap();
        assert!(report.values.iter().all(|v| *v <= 1e-12), "{:?}", report.values);
        assert_eq!(report.kind, DecayKind::Power);
        assert!(report.fitted_rate.is_infinite());
    }

    #[test]
    fn affine_decay_of_a_paraboloid_has_exponent_two() {
        let grid = Grid::new(2, 129).unwrap();
        let u = ScalarField::from_fn(&grid, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let report = affine_decay(&u, &[0.0, 0.0], 0.5, 4).unwrap();
        assert!(
            (report.fitted_rate - 2.0).abs() <= 0.15,
            "exponent {}",
            report.fitted_rate
        );
        // each value is about r^2/2 and never exceeds the plain oscillation
        let osc = oscillation_decay(&u, &[0.0, 0.0], 0.5, 4).unwrap();
        for (a, o) in report.values.iter().zip(&osc.values) {
            assert!(a <= o);
        }
    }

    #[test]
    fn harnack_check_on_the_constant_one_field() {
        let grid = Grid::new(2, 129).unwrap();
        let u = ScalarField::constant(&grid, 1.0).unwrap();
        let f = ScalarField::constant(&grid, 0.0).unwrap();
        let check = weak_harnack_check(&u, &f, 0.15, 1.0).unwrap();
        // lhs reduces to the Riemann area of B_tau over tau^2, i.e. |B_1|
        let expect = util::unit_ball_volume(2);
        assert!(
            (check.lhs - expect).abs() <= 0.05 * expect,
            "lhs {} vs {expect}",
            check.lhs
        );
        assert_eq!(check.inf_term, 1.0);
        assert_eq!(check.f_term, 0.0);
        assert!((check.fitted_c - expect).abs() <= 0.05 * expect);
    }

    #[test]
    fn harnack_check_edge_cases() {
        let grid = Grid::new(2, 65).unwrap();
        let zero = ScalarField::constant(&grid, 0.0).unwrap();
        let check = weak_harnack_check(&zero, &zero, 0.1, 1.0).unwrap();
        assert_eq!(check.lhs, 0.0);
        assert_eq!(check.fitted_c, 0.0);
        // tau at or beyond the dimensional cap is rejected
        let one = ScalarField::constant(&grid, 1.0).unwrap();
        assert!(weak_harnack_check(&one, &zero, 0.18, 1.0).is_err());
        // negative fields are rejected
        let neg = ScalarField::constant(&grid, -1e-6).unwrap();
        assert!(weak_harnack_check(&neg, &zero, 0.1, 1.0).is_err());
    }

    #[test]
    fn morrey_fraction_examples() {
        let grid = Grid::new(2, 129).unwrap();
        let d = [1.0, 0.0];
        // Du identical to the direction: nothing exceeds
        let at_d = crate::field::VectorField::from_fn(&grid, |_, out| {
            out[0] = 1.0;
            out[1] = 0.0;
        })
        .unwrap();
        assert_eq!(morrey_condition(&at_d, &d, 0.5).unwrap(), 0.0);
        // Du displaced by 2 eps0: everything exceeds; the fraction is the
        // Riemann measure of the whole ball
        let far = crate::field::VectorField::from_fn(&grid, |_, out| {
            out[0] = 2.0;
            out[1] = 0.0;
        })
        .unwrap();
        let frac = morrey_condition(&far, &d, 0.5).unwrap();
        assert!((frac - 1.0).abs() <= 0.02, "fraction {frac}");
        // Du = x: the exceedance set is the disc minus a lens whose area has
        // the closed form 2 cos^{-1}(7/8)/2 ... = 0.35077; fraction 0.88835
        let radial = crate::field::VectorField::from_fn(&grid, |x, out| {
            out.copy_from_slice(&x[..2]);
        })
        .unwrap();
        let frac = morrey_condition(&radial, &d, 0.5).unwrap();
        assert!((frac - 0.88835).abs() <= 0.02, "fraction {frac}");
        // direction must be unit length
        assert!(morrey_condition(&radial, &[2.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn gradient_field_plugs_into_the_measurers() {
        let grid = Grid::new(2, 65).unwrap();
        let u = ScalarField::from_fn(&grid, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let du = gradient(&u).unwrap();
        // |Du| = |x| on B_r has supremum about r
        let report = oscillation_decay(&du, &[0.0, 0.0], 0.5, 4).unwrap();
        assert!(
            (report.fitted_rate - 0.5).abs() <= 0.06,
            "rate {}",
            report.fitted_rate
        );
    }

    #[test]
    fn imposc_constants_match_the_worked_example() {
        let c = imposc_constants(1.0, 1.0, 2, 0.1, 0.5, 0.0).unwrap();
        assert!((c.theta - 0.5 * std::f64::consts::PI * 0.05).abs() <= 1e-12);
        assert!((c.theta - 0.0785).abs() <= 1e-4);
        assert!((c.tau - 0.0885).abs() <= 1e-3);
        // the dimensional cap engages for large inputs
        let capped = imposc_constants(1.0, 1.0, 2, 1.0, 0.99, 0.0).unwrap();
        assert!((capped.tau - 1.0 / (4.0 * 2f64.sqrt())).abs() <= 1e-15);
        // tau decreases as the source grows
        let noisy = imposc_constants(1.0, 1.0, 2, 0.1, 0.5, 100.0).unwrap();
        assert!(noisy.tau < c.tau);
        // theta -> 1 for the algebraic corner case mu = 1, l -> 1,
        // C1 = 2/|B1|^{1/q}
        let vol = util::unit_ball_volume(2);
        let corner = imposc_constants(2.0 / vol, 1.0, 2, 1.0, 0.999, 0.0).unwrap();
        assert!((corner.theta - 0.999).abs() <= 1e-12);
    }

    #[test]
    fn imposc_constants_monotonicity_and_cap() {
        let base = imposc_constants(1.0, 2.0, 3, 0.2, 0.4, 1.0).unwrap();
        for (c1, mu, l) in [(1.5, 0.2, 0.4), (1.0, 0.3, 0.4), (1.0, 0.2, 0.5)] {
            let bigger = imposc_constants(c1, 2.0, 3, mu, l, 1.0).unwrap();
            assert!(bigger.theta > base.theta);
            assert!(bigger.tau >= base.tau);
        }
        assert!(base.tau <= 1.0 / (4.0 * 3f64.sqrt()) + 1e-15);
        assert!(imposc_constants(1.0, 1.0, 2, 0.1, 1.0, 0.0).is_err());
        assert!(imposc_constants(1.0, 1.0, 2, 1.5, 0.5, 0.0).is_err());
        assert!(imposc_constants(-1.0, 1.0, 2, 0.1, 0.5, 0.0).is_err());
    }

    #[test]
    fn holder_exponent_from_examples() {
        assert!((holder_exponent_from(0.5, 0.25).unwrap() - 0.5).abs() <= 1e-15);
        assert!((holder_exponent_from(0.7, 0.7).unwrap() - 1.0).abs() <= 1e-15);
        let a = holder_exponent_from(0.9, 0.1).unwrap();
        assert!((a - 0.0458).abs() <= 1e-4);
        assert!(holder_exponent_from(1.0, 0.5).is_err());
        assert!(holder_exponent_from(0.5, 0.0).is_err());
    }

    #[test]
    fn lipschitz_constants_match_the_worked_example() {
        let c = lipschitz_proof_constants(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(c.gamma, 1.25);
        assert!((c.kappa0 - 0.1682).abs() <= 1e-4);
        assert!((c.c3 - 0.0526).abs() <= 1e-4);
        assert!(c.r > 0.0 && c.m > 0.0);
        assert!(c.l_lower >= c.m + 1.0 - 1e-12);
        // zero oscillation: M = 0 and the threshold floors at 1
        let flat = lipschitz_proof_constants(0.5, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(flat.m, 0.0);
        assert_eq!(flat.l_lower, 1.0);
        assert!(lipschitz_proof_constants(1.0, 1.0, 1.0, 1.0).is_err());
    }
}
