//! Log-spaced evaluation grids and trapezoid quadrature in log t.
//!
//! Every improper integral in the crate has the shape `∫ g(t) dt/t`; with
//! u = log t the measure dt/t becomes du, so the trapezoid rule in u is the
//! natural quadrature and is exact for integrands polynomial in log t.

use crate::{Error, Result};

/// Strictly increasing log-spaced grid of `points` values on [t_min, t_max].
pub fn log_spaced(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::InvalidParams(format!(
            "log grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidParams("log grid needs at least 2 points".into()));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                t_max
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect())
}

/// Validate a caller-supplied grid: strictly increasing, positive, finite.
pub fn validate(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParams("empty t grid".into()));
    }
    if t_grid[0] <= 0.0 || !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidParams("t grid must be positive and finite".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("t grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Trapezoid rule for `∫ g dt/t` over the grid span, g sampled at grid points.
pub fn trapezoid_log(t_grid: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(t_grid.len(), g.len());
    let mut acc = 0.0;
    for i in 1..t_grid.len() {
        let du = (t_grid[i] / t_grid[i - 1]).ln();
        acc += 0.5 * (g[i] + g[i - 1]) * du;
    }
    acc
}

/// Like [`trapezoid_log`], restricted to the sub-span starting at index `from`.
pub fn trapezoid_log_tail(t_grid: &[f64], g: &[f64], from: usize) -> f64 {
    let mut acc = 0.0;
    for i in (from + 1)..t_grid.len() {
        let du = (t_grid[i] / t_grid[i - 1]).ln();
        acc += 0.5 * (g[i] + g[i - 1]) * du;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_endpoints_and_monotonicity() {
        let g = log_spaced(1e-4, 1e4, 256).unwrap();
        assert_eq!(g.len(), 256);
        assert_relative_eq!(g[0], 1e-4, max_relative = 1e-12);
        assert_eq!(g[255], 1e4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(log_spaced(0.0, 1.0, 8).is_err());
        assert!(log_spaced(2.0, 1.0, 8).is_err());
        assert!(validate(&[1.0, 1.0]).is_err());
        assert!(validate(&[]).is_err());
    }

    #[test]
    fn trapezoid_exact_for_log_polynomials() {
        // ∫ log(t) dt/t over [1, e^2] = 2 in u-coordinates; the rule is exact.
        let t = log_spaced(1.0, (2.0f64).exp(), 9).unwrap();
        let g: Vec<f64> = t.iter().map(|t| t.ln()).collect();
        assert_relative_eq!(trapezoid_log(&t, &g), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn trapezoid_power_integrand() {
        // ∫_a^b t^{1/2} dt/t = 2(sqrt(b)-sqrt(a)).
        let t = log_spaced(1e-2, 1e2, 4001).unwrap();
        let g: Vec<f64> = t.iter().map(|t| t.sqrt()).collect();
        assert_relative_eq!(trapezoid_log(&t, &g), 2.0 * (10.0f64 - 0.1), max_relative = 1e-6);
    }
}
