//! Small numeric helpers shared across modules.

use crate::error::{Error, Result};

/// Volume of the unit ball in `dim` dimensions, via the exact recurrence
/// V_0 = 1, V_1 = 2, V_d = V_{d-2} * 2*pi/d. Avoids a gamma-function
/// dependency; exact for every integer dimension.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Solve a small dense system in place by Gaussian elimination with partial
/// pivoting. `a` is n x n row-major, `b` the right-hand side; the solution
/// overwrites `b`. Meant for normal-equation systems of size <= MAX_DIM + 1.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n {
        let mut piv = k;
        for r in k + 1..n {
            if a[r * n + k].abs() > a[piv * n + k].abs() {
                piv = r;
            }
        }
        if a[piv * n + k].abs() < 1e-300 {
            return Err(Error::LinearSolve("singular dense system".into()));
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        for r in k + 1..n {
            let m = a[r * n + k] / a[k * n + k];
            if m == 0.0 {
                continue;
            }
            for c in k..n {
                a[r * n + c] -= m * a[k * n + c];
            }
            b[r] -= m * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[k * n + c] * b[c];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(())
}

/// Least-squares line fit y = slope * x + intercept, with the root-mean-square
/// residual of the fit. Requires at least two points with distinct x.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "line fit needs at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx < 1e-300 {
        return Err(Error::InvalidParameter(
            "line fit is degenerate: all abscissae equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = rms_residual(xs, ys, slope, intercept);
    Ok((slope, intercept, rms))
}

/// RMS residual of y ≈ slope * x + intercept over the given points.
pub fn rms_residual(xs: &[f64], ys: &[f64], slope: f64, intercept: f64) -> f64 {
    let n = xs.len() as f64;
    let ss = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>();
    (ss / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_match_closed_forms() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
        // V_4 = pi^2 / 2
        let pi = std::f64::consts::PI;
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-13);
    }

    #[test]
    fn dense_solve_recovers_known_solution() {
        // [[2,1],[1,3]] x = [3,4] -> x = [1,1]
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 4.0];
        solve_dense(&mut a, &mut b, 2).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-14);
        assert!((b[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_solve_rejects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 2.0];
        assert!(solve_dense(&mut a, &mut b, 2).is_err());
    }

    #[test]
    fn line_fit_exact_on_a_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, c, r) = fit_line(&xs, &ys).unwrap();
        assert!((s - 2.5).abs() < 1e-12);
        assert!((c + 1.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }
}
