//! Finite-difference differential operators on sampled functions: gradient
//! magnitude, k-th order derivative magnitude, Laplacian, and the level-set
//! gradient cumulant.
//!
//! All stencils are centered differences with explicit zero extension past
//! the grid box, valid because sampled functions are compactly supported
//! inside it. A derivative widens the support by one cell per order, so the
//! input's support must keep that many layers of clearance from the
//! boundary; violations surface as invariant errors, never silent clamps.

use crate::mesh::{GridSpec, MeasureSpec, SampledFunction};
use crate::rearrange::RearrangementProfile;
use crate::{Error, Result};

/// Magnitude (and low-order components) of a k-th order derivative field.
#[derive(Debug, Clone)]
pub struct DerivativeField {
    pub order: usize,
    pub magnitude: SampledFunction,
    /// Ordered partials, retained for order <= 2 (axis sequences in
    /// lexicographic order).
    pub components: Vec<SampledFunction>,
}

fn centered_diff(values: &[f64], grid: &GridSpec, axis: usize) -> Vec<f64> {
    let m = grid.points_per_axis;
    let strides = grid.strides();
    let stride = strides[axis];
    let inv2h = 1.0 / (2.0 * grid.spacing());
    let mut out = vec![0.0; values.len()];
    let mut idx = vec![0usize; grid.dim];
    for (flat, slot) in out.iter_mut().enumerate() {
        grid.decompose(flat, &mut idx);
        let i = idx[axis];
        let right = if i + 1 < m { values[flat + stride] } else { 0.0 };
        let left = if i > 0 { values[flat - stride] } else { 0.0 };
        *slot = (right - left) * inv2h;
    }
    out
}

fn wrap(grid: GridSpec, measure: MeasureSpec, values: Vec<f64>, what: &str) -> Result<SampledFunction> {
    SampledFunction::new(grid, measure, values).map_err(|e| match e {
        Error::Invariant(_) => Error::Invariant(format!(
            "{what} reaches the grid boundary; the support needs one clear layer per derivative order"
        )),
        other => other,
    })
}

/// Euclidean length of the centered-difference gradient.
pub fn gradient_magnitude(f: &SampledFunction) -> Result<DerivativeField> {
    higher_derivative_magnitude(f, 1)
}

/// Magnitude of the vector of all ordered partial derivatives of total
/// order k (each ordered sequence counted once), 1 <= k <= 4.
pub fn higher_derivative_magnitude(f: &SampledFunction, k: usize) -> Result<DerivativeField> {
    if k == 0 || k > 4 {
        return Err(Error::InvalidParams(format!("derivative order must be 1..=4, got {k}")));
    }
    let grid = *f.grid();
    if grid.points_per_axis < 2 * k + 3 {
        return Err(Error::InvalidGrid(format!(
            "grid too coarse for {k} stencil layers (m = {})",
            grid.points_per_axis
        )));
    }
    // level j holds every ordered partial of order j
    let mut level: Vec<Vec<f64>> = vec![f.values().to_vec()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * grid.dim);
        for field in &level {
            for axis in 0..grid.dim {
                next.push(centered_diff(field, &grid, axis));
            }
        }
        level = next;
    }
    let mut mag = vec![0.0; grid.cell_count()];
    for field in &level {
        for (m, v) in mag.iter_mut().zip(field) {
            *m += v * v;
        }
    }
    for m in mag.iter_mut() {
        *m = m.sqrt();
    }
    let magnitude = wrap(grid, f.measure(), mag, "derivative magnitude")?;
    let components = if k <= 2 {
        level
            .into_iter()
            .map(|v| wrap(grid, f.measure(), v, "derivative component"))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(DerivativeField { order: k, magnitude, components })
}

/// Standard (2n+1)-point Laplacian stencil.
pub fn laplacian(f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    if grid.points_per_axis < 5 {
        return Err(Error::InvalidGrid("grid too coarse for the Laplacian stencil".into()));
    }
    let m = grid.points_per_axis;
    let strides = grid.strides();
    let values = f.values();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut out = vec![0.0; values.len()];
    let mut idx = vec![0usize; grid.dim];
    for (flat, slot) in out.iter_mut().enumerate() {
        grid.decompose(flat, &mut idx);
        let center = values[flat];
        let mut acc = 0.0;
        for axis in 0..grid.dim {
            let i = idx[axis];
            let right = if i + 1 < m { values[flat + strides[axis]] } else { 0.0 };
            let left = if i > 0 { values[flat - strides[axis]] } else { 0.0 };
            acc += right - 2.0 * center + left;
        }
        *slot = acc * inv_h2;
    }
    wrap(grid, f.measure(), out, "Laplacian")
}

/// Level-set gradient cumulant `Φ(t) = ∫_{|f| > f*(t)} |∇f| dμ` at every
/// profile grid point; non-decreasing in t and bounded by ‖∇f‖_L1.
pub fn level_gradient_cumulant(
    f: &SampledFunction,
    profile: &RearrangementProfile,
) -> Result<Vec<f64>> {
    let grad = gradient_magnitude(f)?;
    let gv = grad.magnitude.values();
    let gw = grad.magnitude.weights();
    // cells sorted by |f| descending with prefix sums of |∇f| weight
    let mut cells: Vec<(f64, f64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (v.abs(), gv[i] * gw[i]))
        .collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut prefix = Vec::with_capacity(cells.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &(_, gwv) in &cells {
        acc += gwv;
        prefix.push(acc);
    }
    let phi = profile
        .t_grid
        .iter()
        .map(|&t| {
            let s = profile.steps().f_star(t);
            let count = cells.partition_point(|&(v, _)| v > s);
            prefix[count]
        })
        .collect();
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;
    use crate::rearrange::rearrange;
    use crate::tgrid::log_spaced;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn cone_2d(m: usize) -> SampledFunction {
        let g = build_grid(2, 2.0, m).unwrap();
        SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            (1.0 - r).max(0.0)
        })
        .unwrap()
    }

    #[test]
    fn cone_gradient_interior() {
        let f = cone_2d(201);
        let g = gradient_magnitude(&f).unwrap();
        let grid = f.grid();
        // away from apex and rim, |∇(1-r)| = 1
        let mut idx = vec![0usize; 2];
        let h = grid.spacing();
        for (flat, &m) in g.magnitude.values().iter().enumerate() {
            grid.decompose(flat, &mut idx);
            let x = grid.coords(flat);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r > 0.15 && r < 0.85 {
                assert!((m - 1.0).abs() < 3.0 * h, "|∇f| = {m} at r = {r}");
            }
        }
        assert_relative_eq!(g.magnitude.integrate_abs(), PI, max_relative = 0.02);
    }

    #[test]
    fn tent_total_variation() {
        let g = build_grid(1, 2.0, 2001).unwrap();
        let f = SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| (1.0 - x[0].abs()).max(0.0))
            .unwrap();
        let d = gradient_magnitude(&f).unwrap();
        assert_relative_eq!(d.magnitude.integrate_abs(), 2.0, max_relative = 0.01);
    }

    #[test]
    fn zero_function_zero_field() {
        let g = build_grid(2, 1.0, 21).unwrap();
        let z = SampledFunction::zeros(g, MeasureSpec::Lebesgue);
        let d = gradient_magnitude(&z).unwrap();
        assert!(d.magnitude.values().iter().all(|&v| v == 0.0));
        let d4 = higher_derivative_magnitude(&z, 4).unwrap();
        assert!(d4.magnitude.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn second_derivative_of_quartic_bump() {
        // f(x) = (1-x^2)^2 on |x|<1: f''(0) = -4
        let g = build_grid(1, 2.0, 2001).unwrap();
        let f = SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| {
            let s = 1.0 - x[0] * x[0];
            if s > 0.0 {
                s * s
            } else {
                0.0
            }
        })
        .unwrap();
        let d2 = higher_derivative_magnitude(&f, 2).unwrap();
        let center = g.cell_count() / 2;
        assert_abs_diff_eq!(g.axis_coord(center), 0.0);
        // single ordered partial in 1d: the signed component
        assert_relative_eq!(d2.components[0].values()[center], -4.0, max_relative = 1e-4);
        assert_relative_eq!(d2.magnitude.values()[center], 4.0, max_relative = 1e-4);
    }

    #[test]
    fn first_order_matches_gradient() {
        let f = cone_2d(101);
        let a = gradient_magnitude(&f).unwrap();
        let b = higher_derivative_magnitude(&f, 1).unwrap();
        assert_eq!(a.magnitude.values(), b.magnitude.values());
    }

    #[test]
    fn laplacian_of_quadratic() {
        // (1-|x|^2)/4 on the unit disk: Δf = -1 inside, exactly for the
        // stencil away from the rim
        let g = build_grid(2, 2.0, 201).unwrap();
        let f = SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| {
            let s = 1.0 - (x[0] * x[0] + x[1] * x[1]);
            if s > 0.0 {
                s / 4.0
            } else {
                0.0
            }
        })
        .unwrap();
        let lap = laplacian(&f).unwrap();
        let grid = f.grid();
        for flat in 0..grid.cell_count() {
            let x = grid.coords(flat);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r < 0.9 {
                assert_relative_eq!(lap.values()[flat], -1.0, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_of_truncated_linear() {
        let g = build_grid(1, 2.0, 401).unwrap();
        let f = SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| {
            if x[0].abs() < 1.0 {
                x[0]
            } else {
                0.0
            }
        })
        .unwrap();
        let lap = laplacian(&f).unwrap();
        for flat in 0..g.cell_count() {
            let x = g.axis_coord(flat);
            if x.abs() < 0.9 {
                assert_abs_diff_eq!(lap.values()[flat], 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn order_bounds_checked() {
        let f = cone_2d(41);
        assert!(higher_derivative_magnitude(&f, 0).is_err());
        assert!(higher_derivative_magnitude(&f, 5).is_err());
        let tiny = build_grid(1, 1.0, 5).unwrap();
        let z = SampledFunction::zeros(tiny, MeasureSpec::Lebesgue);
        assert!(higher_derivative_magnitude(&z, 4).is_err());
    }

    #[test]
    fn level_cumulant_cone() {
        let f = cone_2d(401);
        let t = vec![1e-3, 0.1, PI / 4.0, 1.0, 2.0, PI, 5.0, 1e2];
        let p = rearrange(&f, &t).unwrap();
        let phi = level_gradient_cumulant(&f, &p).unwrap();
        // at t = π/4 the level is 0.5 and the superlevel set the disk r<1/2
        assert_relative_eq!(phi[2], PI / 4.0, max_relative = 0.02);
        // monotone, bounded by ‖∇f‖_1, and saturating past the support
        let total = gradient_magnitude(&f).unwrap().magnitude.integrate_abs();
        for w in phi.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        assert!(phi.iter().all(|&v| v <= total + 1e-12));
        let j = t.iter().position(|&x| x >= p.supp).unwrap();
        assert_relative_eq!(phi[j], total, max_relative = 0.05);
    }

    #[test]
    fn level_cumulant_zero() {
        let g = build_grid(1, 1.0, 64).unwrap();
        let z = SampledFunction::zeros(g, MeasureSpec::Lebesgue);
        let t = log_spaced(1e-2, 1e1, 16).unwrap();
        let p = rearrange(&z, &t).unwrap();
        let phi = level_gradient_cumulant(&z, &p).unwrap();
        assert!(phi.iter().all(|&v| v == 0.0));
    }
}
