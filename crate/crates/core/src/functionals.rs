//! Norms and seminorms over rearrangement profiles and sampled functions:
//! Lorentz L(p,q) and L(∞,q), the Zygmund L(LogL) integral, the
//! logarithmically weighted embedding functional, normalized L(∞,q)(Ω),
//! moduli of continuity, Besov seminorms, and fundamental functions.
//!
//! Quadrature convention: dt/t integrals run trapezoidally in log t over
//! the profile grid; outside the grid the step structure supplies exact
//! closed-form pieces (constant f* below the first step, `mass/t` beyond
//! the support). Sups (q = ∞) are evaluated exactly from the step
//! structure, which attains them at piece endpoints.

use rayon::prelude::*;

use crate::mesh::{MeasureSpec, SampledFunction};
use crate::rearrange::{RearrangementProfile, StepRearrangement};
use crate::tgrid;
use crate::{Error, Result};

/// Lorentz exponents (p, q) with ∞ encoded as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzExponents {
    pub p: f64,
    pub q: f64,
}

impl LorentzExponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "Lorentz exponents need p, q >= 1, got ({p}, {q})"
            )));
        }
        Ok(LorentzExponents { p, q })
    }
}

/// Anchor space of a modulus of continuity: plain L^p or Lorentz L(p,r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormAnchor {
    Lp(f64),
    Lorentz(f64, f64),
}

impl NormAnchor {
    fn validate(&self) -> Result<()> {
        match *self {
            NormAnchor::Lp(p) => {
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::InvalidParams(format!("anchor L^p needs finite p >= 1, got {p}")));
                }
            }
            NormAnchor::Lorentz(p, r) => {
                if !(p >= 1.0 && p.is_finite()) || !(r >= 1.0) {
                    return Err(Error::InvalidParams(format!(
                        "anchor L(p,r) needs finite p >= 1 and r >= 1, got ({p}, {r})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exponent 1/p of the fundamental function t^{1/p}.
    pub fn fundamental_exponent(&self) -> f64 {
        match *self {
            NormAnchor::Lp(p) => 1.0 / p,
            NormAnchor::Lorentz(p, _) => 1.0 / p,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NormAnchor::Lp(p) => format!("L^{p}"),
            NormAnchor::Lorentz(p, r) => format!("L({p},{r})"),
        }
    }
}

/// Fundamental function of the anchor space: `t^{1/p}` for L^p and L(p,r).
pub fn fundamental_function(anchor: &NormAnchor, t: f64) -> f64 {
    debug_assert!(t > 0.0);
    t.powf(anchor.fundamental_exponent())
}

/// Besov seminorm parameters: smoothness alpha in (0,1), anchor exponents
/// (p, r) with r = p meaning plain L^p, and outer exponent q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub alpha: f64,
    pub p: f64,
    pub r: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(alpha: f64, p: f64, r: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(p >= 1.0 && p.is_finite()) || !(r >= 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "Besov exponents need finite p >= 1 and r, q >= 1, got p={p} r={r} q={q}"
            )));
        }
        Ok(BesovParams { alpha, p, r, q })
    }

    pub fn anchor(&self) -> NormAnchor {
        if self.r == self.p {
            NormAnchor::Lp(self.p)
        } else {
            NormAnchor::Lorentz(self.p, self.r)
        }
    }
}

// ---------------------------------------------------------------------------
// Lorentz norms
// ---------------------------------------------------------------------------

/// Union of the profile grid restricted to (a, b) with the endpoints,
/// known analytic breakpoints (e.g. the support measure, where f* drops to
/// its tail), and, where the grid does not reach, log-spaced filler at the
/// grid's density.
fn padded_points(t_grid: &[f64], a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    debug_assert!(a > 0.0 && b > a);
    let du = if t_grid.len() >= 2 {
        ((t_grid[t_grid.len() - 1] / t_grid[0]).ln() / (t_grid.len() - 1) as f64).max(1e-6)
    } else {
        0.05
    };
    let mut pts = vec![a];
    let push = |pts: &mut Vec<f64>, x: f64| {
        if x > *pts.last().unwrap() * (1.0 + 1e-13) && x < b {
            pts.push(x);
        }
    };
    // filler below the grid
    let lo_end = t_grid.first().copied().unwrap_or(b).min(b);
    if a < lo_end {
        let span = (lo_end / a).ln();
        let n = (span / du).ceil() as usize;
        for i in 1..n {
            push(&mut pts, a * (span * i as f64 / n as f64).exp());
        }
    }
    for &t in t_grid {
        if t > a {
            push(&mut pts, t);
        }
    }
    // filler above the grid
    let hi_end = t_grid.last().copied().unwrap_or(a).max(a);
    if hi_end < b {
        let start = hi_end.max(a);
        let span = (b / start).ln();
        let n = (span / du).ceil() as usize;
        for i in 1..n {
            push(&mut pts, start * (span * i as f64 / n as f64).exp());
        }
    }
    pts.push(b);
    // straddle each breakpoint so one-sided limits of step integrands stay
    // on their own side (the sliver between the pair is negligible)
    for &bp in breakpoints {
        for x in [bp * (1.0 - 1e-9), bp] {
            if x > a && x < b {
                let j = pts.partition_point(|&y| y < x);
                if (pts[j] - x).abs() > 1e-13 * x && (pts[j - 1] - x).abs() > 1e-13 * x {
                    pts.insert(j, x);
                }
            }
        }
    }
    pts
}

/// Trapezoid-in-log of `g(t) dt/t` over [a, b] on the padded grid.
fn quad_log(
    t_grid: &[f64],
    a: f64,
    b: f64,
    breakpoints: &[f64],
    g: impl Fn(f64) -> f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pts = padded_points(t_grid, a, b, breakpoints);
    let vals: Vec<f64> = pts.iter().map(|&t| g(t)).collect();
    tgrid::trapezoid_log(&pts, &vals)
}

/// `∫_0^upper (f** - f*)^q dt/t` using the grid trapezoid between the first
/// step and the support, with the exact `(mass/t)^q` tail past the support.
fn osc_q_integral(profile: &RearrangementProfile, upper: f64, q: f64) -> f64 {
    let steps = profile.steps();
    if profile.supp == 0.0 || upper <= 0.0 {
        return 0.0;
    }
    let first_step = steps.first_weight();
    // osc vanishes identically on (0, first step)
    let a = first_step.min(upper);
    let b_num = upper.min(profile.supp.max(profile.t_grid.last().copied().unwrap_or(0.0)));
    let mut total = 0.0;
    if b_num > a {
        total += quad_log(&profile.t_grid, a, b_num, &[profile.supp], |t| {
            (steps.f_star_star(t) - steps.f_star(t)).powf(q)
        });
    }
    if upper > b_num {
        // beyond both grid and support the oscillation is mass/t exactly
        total += profile.mass.powf(q) * (b_num.powf(-q) - upper.powf(-q)) / q;
    }
    total
}

/// Lorentz norm of a profile.
///
/// Finite p: `{∫ (f*(t) t^{1/p})^q dt/t}^{1/q}` (sup over t of the same
/// expression when q = ∞). p = ∞: the same with `f*(t) t^{1/p}` replaced by
/// the oscillation `f** - f*`.
pub fn lorentz_norm(profile: &RearrangementProfile, exps: LorentzExponents) -> Result<f64> {
    let LorentzExponents { p, q } = exps;
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::InvalidParams(format!("Lorentz norm needs p, q >= 1, got ({p}, {q})")));
    }
    let steps = profile.steps();
    if profile.supp == 0.0 {
        return Ok(0.0);
    }
    let t_min = profile.t_grid[0];
    let t_max = *profile.t_grid.last().unwrap();

    if p.is_finite() {
        if q.is_finite() {
            let below = steps.lorentz_piece_integral(0.0, t_min.min(profile.supp), p, q);
            let hi = profile.supp.min(t_max);
            let mid = if hi > t_min {
                quad_log(&profile.t_grid, t_min, hi, &[profile.supp], |t| {
                    (steps.f_star(t) * t.powf(1.0 / p)).powf(q)
                })
            } else {
                0.0
            };
            let above = if profile.supp > t_max {
                steps.lorentz_piece_integral(t_max, profile.supp, p, q)
            } else {
                0.0
            };
            Ok((below + mid + above).powf(1.0 / q))
        } else {
            // weak norm: exact sup over the step structure
            Ok(steps.weak_sup(0.0, profile.supp, p))
        }
    } else if q.is_finite() {
        Ok(osc_q_integral(profile, f64::INFINITY, q).powf(1.0 / q))
    } else {
        Ok(steps.osc_sup(0.0, profile.supp))
    }
}

/// Zygmund-type integral `∫_0^{|Ω|} f*(s) log(e|Ω|/s) ds`, evaluated
/// exactly over the step structure.
pub fn llogl_norm(profile: &RearrangementProfile, omega_measure: f64) -> Result<f64> {
    if !(omega_measure > 0.0) {
        return Err(Error::InvalidParams(format!(
            "L(LogL) needs a positive domain measure, got {omega_measure}"
        )));
    }
    // antiderivative of log(e Ω / s): F(s) = s (2 + log(Ω/s)), F(0+) = 0
    let f_anti = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            s * (2.0 + (omega_measure / s).ln())
        }
    };
    let mut total = 0.0;
    for (lo, hi, v) in profile.steps().pieces(omega_measure) {
        total += v * (f_anti(hi) - f_anti(lo));
    }
    Ok(total)
}

/// Logarithmically weighted embedding functional
/// `{∫_0^{|Ω|} (f**(s)/(1 + log(|Ω|/s)))^n ds/s}^{1/n}`, n >= 2.
///
/// n = 1 is rejected: the integral diverges for every nontrivial f.
pub fn hbw_functional(
    profile: &RearrangementProfile,
    omega_measure: f64,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(
            "embedding functional diverges for n = 1 (rejected by design)".into(),
        ));
    }
    if !(omega_measure > 0.0) {
        return Err(Error::InvalidParams(format!(
            "embedding functional needs |Ω| > 0, got {omega_measure}"
        )));
    }
    let steps = profile.steps();
    if profile.supp == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    // On (0, a0] the average f** is constant (= sup) and the integral has
    // the closed form sup^n U^{1-n}/(n-1) with U = 1 + log(Ω/a0).
    let a0 = steps.first_weight().min(omega_measure);
    let u0 = 1.0 + (omega_measure / a0).ln();
    let mut total = profile.sup_norm.powf(nf) * u0.powf(1.0 - nf) / (nf - 1.0);
    if omega_measure > a0 {
        total += quad_log(&profile.t_grid, a0, omega_measure, &[profile.supp], |s| {
            (steps.f_star_star(s) / (1.0 + (omega_measure / s).ln())).powf(nf)
        });
    }
    Ok(total.powf(1.0 / nf))
}

/// Normalized L(∞,q)(Ω) norm:
/// `{∫_0^{|Ω|} (f**-f*)^q ds/s}^{1/q} + (1/|Ω|) ∫ |f|`.
pub fn normalized_linf_q(
    profile: &RearrangementProfile,
    omega_measure: f64,
    q: f64,
) -> Result<f64> {
    if !(omega_measure > 0.0) || !(q >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "normalized norm needs |Ω| > 0 and q >= 1, got ({omega_measure}, {q})"
        )));
    }
    let integral = if q.is_finite() {
        osc_q_integral(profile, omega_measure, q).powf(1.0 / q)
    } else {
        profile.steps().osc_sup(0.0, omega_measure)
    };
    Ok(integral + profile.mass / omega_measure)
}

/// Truncated oscillation norm `{∫_0^{|Ω|} (f**-f*)^q ds/s}^{1/q}` (the
/// domain form of the L(∞,q) norm, without the normalizing average).
pub fn truncated_linf_q(profile: &RearrangementProfile, omega_measure: f64, q: f64) -> Result<f64> {
    if !(omega_measure > 0.0) || !(q >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "truncated norm needs |Ω| > 0 and q >= 1, got ({omega_measure}, {q})"
        )));
    }
    Ok(if q.is_finite() {
        osc_q_integral(profile, omega_measure, q).powf(1.0 / q)
    } else {
        profile.steps().osc_sup(0.0, omega_measure)
    })
}

// ---------------------------------------------------------------------------
// Moduli of continuity and Besov seminorms
// ---------------------------------------------------------------------------

/// Modulus of continuity sampled at the grid-commensurate shift radii.
///
/// `w[i]` is the running maximum of `‖f(·+h)-f‖` over all grid shifts with
/// `|h| <= radii[i]`; the curve is a right-continuous non-decreasing step
/// function of t saturating at `w_sat` past the largest radius.
#[derive(Debug, Clone)]
pub struct ModulusCurve {
    pub radii: Vec<f64>,
    pub w: Vec<f64>,
    pub anchor: NormAnchor,
    pub fundamental_exponent: f64,
}

impl ModulusCurve {
    /// w(t): 0 at t < first radius is handled by the caller (linear ramp).
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || self.radii.is_empty() {
            return 0.0;
        }
        let j = self.radii.partition_point(|&r| r <= t);
        if j == 0 {
            // below one spacing: linear interpolation to 0
            self.w[0] * (t / self.radii[0]).min(1.0)
        } else {
            self.w[j - 1]
        }
    }

    pub fn saturated(&self) -> f64 {
        self.w.last().copied().unwrap_or(0.0)
    }
}

/// Norm of the difference `f(·+k h) - f` over the whole lattice for one
/// integer shift vector.
fn shift_norm(f: &SampledFunction, shift: &[isize], anchor: &NormAnchor) -> f64 {
    let grid = f.grid();
    let m = grid.points_per_axis as isize;
    let dim = grid.dim;
    let values = f.values();
    let strides = grid.strides();
    // support bounding box in axis indices
    let mask = f.support_mask();
    let mut lo = vec![m; dim];
    let mut hi = vec![-1isize; dim];
    let mut idx = vec![0usize; dim];
    for (flat, &s) in mask.iter().enumerate() {
        if s {
            grid.decompose(flat, &mut idx);
            for d in 0..dim {
                lo[d] = lo[d].min(idx[d] as isize);
                hi[d] = hi[d].max(idx[d] as isize);
            }
        }
    }
    if hi[0] < 0 {
        return 0.0;
    }
    if hi[0] < lo[0] {
        return 0.0;
    }
    // the difference f(y + shift * h) - f(y) is nonzero only for y in the
    // support box or its back-translate; visit those two boxes and skip
    // their overlap on the second pass
    let box1: Vec<(isize, isize)> = (0..dim).map(|d| (lo[d], hi[d])).collect();
    let box2: Vec<(isize, isize)> = (0..dim).map(|d| (lo[d] - shift[d], hi[d] - shift[d])).collect();
    let h = grid.spacing();
    let w_cell = h.powi(dim as i32);
    match *anchor {
        NormAnchor::Lp(p) => {
            let mut acc = 0.0;
            if p == 1.0 {
                for_each_diff(values, m, strides.clone(), &box1, None, shift, &mut |d| acc += d);
                for_each_diff(values, m, strides, &box2, Some(&box1), shift, &mut |d| acc += d);
            } else if p == 2.0 {
                for_each_diff(values, m, strides.clone(), &box1, None, shift, &mut |d| {
                    acc += d * d
                });
                for_each_diff(values, m, strides, &box2, Some(&box1), shift, &mut |d| {
                    acc += d * d
                });
            } else {
                for_each_diff(values, m, strides.clone(), &box1, None, shift, &mut |d| {
                    acc += d.powf(p)
                });
                for_each_diff(values, m, strides, &box2, Some(&box1), shift, &mut |d| {
                    acc += d.powf(p)
                });
            }
            (acc * w_cell).powf(1.0 / p)
        }
        NormAnchor::Lorentz(p, r) => {
            let mut pairs = Vec::new();
            for_each_diff(values, m, strides.clone(), &box1, None, shift, &mut |d| {
                pairs.push((d, w_cell))
            });
            for_each_diff(values, m, strides, &box2, Some(&box1), shift, &mut |d| {
                pairs.push((d, w_cell))
            });
            let steps = StepRearrangement::from_pairs(pairs);
            if r.is_finite() {
                steps.lorentz_piece_integral(0.0, steps.supp(), p, r).powf(1.0 / r)
            } else {
                steps.weak_sup(0.0, steps.supp(), p)
            }
        }
    }
}

/// Emit |f(y + shift) - f(y)| over `ranges`, minus an excluded sub-box;
/// reads outside the array are zero. Rows along the last axis run with
/// direct flat indexing.
fn for_each_diff<F: FnMut(f64)>(
    values: &[f64],
    m: isize,
    strides: Vec<usize>,
    ranges: &[(isize, isize)],
    exclude: Option<&[(isize, isize)]>,
    shift: &[isize],
    emit: &mut F,
) {
    let dim = ranges.len();
    let last = dim - 1;
    let s_last = shift[last];
    // row iterator over the leading dims
    let mut outer = vec![0isize; last];
    let mut outer_count = 1usize;
    for d in 0..last {
        outer_count *= (ranges[d].1 - ranges[d].0 + 1).max(0) as usize;
    }
    if (ranges[last].1 - ranges[last].0) < 0 {
        return;
    }
    for c in 0..outer_count.max(1) {
        if last > 0 {
            let mut rest = c;
            for d in (0..last).rev() {
                let span = (ranges[d].1 - ranges[d].0 + 1) as usize;
                outer[d] = ranges[d].0 + (rest % span) as isize;
                rest /= span;
            }
        }
        // base-row validity for the unshifted and shifted reads
        let mut base_ok = true;
        let mut shift_ok = true;
        let mut base_flat = 0isize;
        let mut shift_flat = 0isize;
        for d in 0..last {
            let y = outer[d];
            if y < 0 || y >= m {
                base_ok = false;
            } else {
                base_flat += y * strides[d] as isize;
            }
            let ys = y + shift[d];
            if ys < 0 || ys >= m {
                shift_ok = false;
            } else {
                shift_flat += ys * strides[d] as isize;
            }
        }
        if !base_ok && !shift_ok {
            continue;
        }
        // excluded y-range along the last axis for this row
        let ex = exclude.and_then(|ex| {
            (0..last)
                .all(|d| outer[d] >= ex[d].0 && outer[d] <= ex[d].1)
                .then_some((ex[last].0, ex[last].1))
        });
        let (r0, r1) = ranges[last];
        let segments: [(isize, isize); 2] = match ex {
            Some((e0, e1)) => [(r0, (e0 - 1).min(r1)), ((e1 + 1).max(r0), r1)],
            None => [(r0, r1), (1, 0)],
        };
        for (a, b) in segments {
            for y in a..=b {
                let va = if base_ok && y >= 0 && y < m {
                    values[(base_flat + y) as usize]
                } else {
                    0.0
                };
                let ys = y + s_last;
                let vb = if shift_ok && ys >= 0 && ys < m {
                    values[(shift_flat + ys) as usize]
                } else {
                    0.0
                };
                let diff = (vb - va).abs();
                if diff != 0.0 {
                    emit(diff);
                }
            }
        }
    }
}

/// Compute the full modulus curve of `f` in the given anchor norm.
///
/// Shifts are all nonzero integer lattice vectors up to one support
/// diameter (one of each ± pair; the difference norm is symmetric), sorted
/// by Euclidean length.
pub fn modulus_curve(f: &SampledFunction, anchor: &NormAnchor) -> Result<ModulusCurve> {
    anchor.validate()?;
    if f.measure() != MeasureSpec::Lebesgue {
        return Err(Error::InvalidParams(
            "modulus of continuity requires Lebesgue measure (translation invariance)".into(),
        ));
    }
    let grid = f.grid();
    let h = grid.spacing();
    let dim = grid.dim;
    // support bbox diameter in cells, plus one layer: shifts beyond this
    // saturate the modulus
    let mask = f.support_mask();
    let mut lo = vec![grid.points_per_axis as isize; dim];
    let mut hi = vec![-1isize; dim];
    let mut idx = vec![0usize; dim];
    for (flat, &s) in mask.iter().enumerate() {
        if s {
            grid.decompose(flat, &mut idx);
            for d in 0..dim {
                lo[d] = lo[d].min(idx[d] as isize);
                hi[d] = hi[d].max(idx[d] as isize);
            }
        }
    }
    if hi[0] < 0 {
        return Ok(ModulusCurve {
            radii: vec![h],
            w: vec![0.0],
            anchor: *anchor,
            fundamental_exponent: anchor.fundamental_exponent(),
        });
    }
    let diag: f64 = (0..dim)
        .map(|d| ((hi[d] - lo[d] + 1) as f64).powi(2))
        .sum::<f64>()
        .sqrt();
    let kmax = diag.ceil() as isize + 1;

    // Shift set (one of each ± pair, first nonzero component positive):
    // every lattice vector up to DENSE_KMAX, axis shifts at every integer
    // radius, and a geometric radius ladder of rounded directions beyond.
    // Past the dense radius the modulus is close to saturation, so sparse
    // angular sampling loses O(h); the set is still nested in t.
    const DENSE_KMAX: isize = 48;
    let mut shifts: Vec<Vec<isize>> = Vec::new();
    let dense = kmax.min(DENSE_KMAX);
    let mut cur = vec![0isize; dim];
    enumerate_shifts(dim, 0, dense, &mut cur, &mut shifts);
    shifts.retain(|k| {
        let n2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
        n2 > 0.0 && n2.sqrt() <= dense as f64
    });
    if kmax > dense {
        for d in 0..dim {
            for j in (dense + 1)..=kmax {
                let mut k = vec![0isize; dim];
                k[d] = j;
                shifts.push(k);
            }
        }
        if dim > 1 {
            let dirs = 64usize;
            let mut radius = dense as f64;
            while radius < kmax as f64 {
                radius *= 1.06;
                let r = radius.min(kmax as f64);
                for a in 0..dirs {
                    let phi = std::f64::consts::PI * (a as f64 + 0.5) / dirs as f64;
                    // half circle: first component positive
                    let mut k = vec![0isize; dim];
                    k[0] = (r * phi.sin()).round() as isize;
                    k[1] = (r * phi.cos()).round() as isize;
                    if k[0] > 0 || (k[0] == 0 && k[1] > 0) {
                        shifts.push(k);
                    }
                }
            }
        }
        shifts.sort();
        shifts.dedup();
    }
    shifts.sort_by(|a, b| {
        let na: f64 = a.iter().map(|&x| (x * x) as f64).sum();
        let nb: f64 = b.iter().map(|&x| (x * x) as f64).sum();
        na.partial_cmp(&nb).unwrap().then_with(|| a.cmp(b))
    });

    let norms: Vec<f64> = shifts
        .par_iter()
        .map(|k| shift_norm(f, k, anchor))
        .collect();

    // running max, compressed to unique radii
    let mut radii = Vec::new();
    let mut w = Vec::new();
    let mut best: f64 = 0.0;
    for (k, &nv) in shifts.iter().zip(&norms) {
        let r = (k.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt() * h;
        best = best.max(nv);
        match radii.last() {
            Some(&last) if (r - last as f64).abs() < 1e-12 * r => {
                *w.last_mut().unwrap() = best;
            }
            _ => {
                radii.push(r);
                w.push(best);
            }
        }
    }
    Ok(ModulusCurve { radii, w, anchor: *anchor, fundamental_exponent: anchor.fundamental_exponent() })
}

fn enumerate_shifts(
    dim: usize,
    d: usize,
    kmax: isize,
    cur: &mut Vec<isize>,
    out: &mut Vec<Vec<isize>>,
) {
    if d == dim {
        // keep the representative with first nonzero component positive
        if let Some(&first) = cur.iter().find(|&&x| x != 0) {
            if first > 0 {
                out.push(cur.clone());
            }
        }
        return;
    }
    for k in -kmax..=kmax {
        cur[d] = k;
        enumerate_shifts(dim, d + 1, kmax, cur, out);
    }
    cur[d] = 0;
}

/// Modulus of continuity `w_X(t, f)` at a single width t >= 0.
pub fn modulus(f: &SampledFunction, anchor: &NormAnchor, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParams(format!("modulus needs t >= 0, got {t}")));
    }
    let curve = modulus_curve(f, anchor)?;
    Ok(curve.eval(t))
}

/// Besov seminorm `{∫_0^∞ [t^{-α} w(t,f)]^q dt/t}^{1/q}` (sup form for
/// q = ∞), integrated exactly over the step structure of the modulus
/// curve: below one spacing w is a linear ramp to 0, above the last radius
/// it is constant, and both tails integrate in closed form.
pub fn besov_seminorm(f: &SampledFunction, params: &BesovParams) -> Result<f64> {
    let anchor = params.anchor();
    let curve = modulus_curve(f, &anchor)?;
    Ok(besov_from_curve(&curve, params.alpha, params.q))
}

/// The Besov integral given a precomputed modulus curve.
pub fn besov_from_curve(curve: &ModulusCurve, alpha: f64, q: f64) -> f64 {
    let radii = &curve.radii;
    let w = &curve.w;
    if radii.is_empty() || curve.saturated() == 0.0 {
        return 0.0;
    }
    let r1 = radii[0];
    let w1 = w[0];
    if q.is_finite() {
        let aq = alpha * q;
        // ramp piece below r1: w(t) = w1 t / r1
        let mut total = if w1 > 0.0 {
            (w1 / r1).powf(q) * r1.powf((1.0 - alpha) * q) / ((1.0 - alpha) * q)
        } else {
            0.0
        };
        // constant pieces between consecutive radii
        for i in 0..radii.len() {
            let lo = radii[i];
            let hi = if i + 1 < radii.len() { radii[i + 1] } else { f64::INFINITY };
            if w[i] > 0.0 {
                let upper = if hi.is_finite() { hi.powf(-aq) } else { 0.0 };
                total += w[i].powf(q) * (lo.powf(-aq) - upper) / aq;
            }
        }
        total.powf(1.0 / q)
    } else {
        // sup of t^{-alpha} w(t): on each constant piece the sup is at the
        // left end; on the ramp it is at r1.
        let mut best = w1 * r1.powf(-alpha);
        for i in 0..radii.len() {
            best = best.max(w[i] * radii[i].powf(-alpha));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, MeasureSpec, SampledFunction};
    use crate::rearrange::rearrange;
    use crate::tgrid::log_spaced;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn indicator_1d(cells: usize) -> SampledFunction {
        let g = build_grid(1, 2.0, 2001).unwrap();
        let h = g.spacing();
        SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| {
            if x[0] > 0.0 && x[0] <= cells as f64 * h + 1e-12 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    fn default_profile(f: &SampledFunction) -> crate::rearrange::RearrangementProfile {
        let t = log_spaced(1e-4, 1e4, 256).unwrap();
        rearrange(f, &t).unwrap()
    }

    fn cone_2d(m: usize) -> SampledFunction {
        let g = build_grid(2, 2.0, m).unwrap();
        SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            (1.0 - r).max(0.0)
        })
        .unwrap()
    }

    #[test]
    fn lorentz_indicator_21() {
        let p = default_profile(&indicator_1d(500));
        let n = lorentz_norm(&p, LorentzExponents::new(2.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(n, 2.0, max_relative = 0.01);
    }

    #[test]
    fn lorentz_indicator_linf_q_independent_of_size() {
        for &q in &[1.0, 2.0, 4.0] {
            let expect = (1.0f64 / q).powf(1.0 / q);
            for &cells in &[250usize, 500, 750] {
                let p = default_profile(&indicator_1d(cells));
                let n = lorentz_norm(&p, LorentzExponents::new(f64::INFINITY, q).unwrap()).unwrap();
                assert_relative_eq!(n, expect, max_relative = 0.01);
            }
        }
    }

    #[test]
    fn lorentz_11_is_mass() {
        let f = cone_2d(201);
        let p = default_profile(&f);
        let n = lorentz_norm(&p, LorentzExponents::new(1.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(n, f.integrate_abs(), max_relative = 1e-3);
    }

    #[test]
    fn lorentz_linf1_is_sup_norm() {
        // tent on R^1
        let g = build_grid(1, 2.0, 2001).unwrap();
        let f = SampledFunction::from_fn(g, MeasureSpec::Lebesgue, |x| (1.0 - x[0].abs()).max(0.0))
            .unwrap();
        let p = default_profile(&f);
        let n = lorentz_norm(&p, LorentzExponents::new(f64::INFINITY, 1.0).unwrap()).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 0.01);
    }

    #[test]
    fn lorentz_pp_matches_direct_lp() {
        let f = cone_2d(201);
        let p = default_profile(&f);
        for &pp in &[1.0, 1.5, 2.0, 4.0] {
            let n = lorentz_norm(&p, LorentzExponents::new(pp, pp).unwrap()).unwrap();
            assert_relative_eq!(n, f.lp_norm(pp), max_relative = 0.01);
        }
    }

    #[test]
    fn lorentz_rejects_sub_one_exponents() {
        assert!(LorentzExponents::new(0.5, 1.0).is_err());
        assert!(LorentzExponents::new(2.0, 0.0).is_err());
    }

    #[test]
    fn lorentz_zero_function() {
        let g = build_grid(1, 1.0, 33).unwrap();
        let z = SampledFunction::zeros(g, MeasureSpec::Lebesgue);
        let p = default_profile(&z);
        for exps in [(1.0, 1.0), (2.0, 1.0), (f64::INFINITY, 2.0), (3.0, f64::INFINITY)] {
            let n = lorentz_norm(&p, LorentzExponents::new(exps.0, exps.1).unwrap()).unwrap();
            assert_eq!(n, 0.0);
        }
    }

    #[test]
    fn positive_homogeneity() {
        let f = cone_2d(101);
        let f2 = f.map_values(|_, v| 2.5 * v).unwrap();
        let p = default_profile(&f);
        let p2 = default_profile(&f2);
        for exps in [(2.0, 1.0), (1.0, 1.0), (f64::INFINITY, 2.0), (2.0, f64::INFINITY)] {
            let e = LorentzExponents::new(exps.0, exps.1).unwrap();
            assert_relative_eq!(
                lorentz_norm(&p2, e).unwrap(),
                2.5 * lorentz_norm(&p, e).unwrap(),
                max_relative = 1e-10
            );
        }
        assert_relative_eq!(
            llogl_norm(&p2, 1.0).unwrap(),
            2.5 * llogl_norm(&p, 1.0).unwrap(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            hbw_functional(&p2, PI, 2).unwrap(),
            2.5 * hbw_functional(&p, PI, 2).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn llogl_indicator() {
        // f* ≡ 1 on (0,1), |Ω| = 1: ∫_0^1 log(e/s) ds = 2, exactly
        let p = default_profile(&indicator_1d(500));
        let n = llogl_norm(&p, 1.0).unwrap();
        assert_relative_eq!(n, 2.0, max_relative = 1e-6);
        let z = SampledFunction::zeros(*indicator_1d(10).grid(), MeasureSpec::Lebesgue);
        assert_eq!(llogl_norm(&default_profile(&z), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn hbw_closed_forms() {
        // f** ≡ 1 on (0,1): substituting u = 1 + log(1/s) gives
        // ∫_1^∞ u^{-n} du = 1/(n-1)
        let p = default_profile(&indicator_1d(500));
        let n2 = hbw_functional(&p, 1.0, 2).unwrap();
        assert_relative_eq!(n2, 1.0, max_relative = 0.005);
        let n3 = hbw_functional(&p, 1.0, 3).unwrap();
        assert_relative_eq!(n3, 0.5f64.powf(1.0 / 3.0), max_relative = 0.005);
        assert!(hbw_functional(&p, 1.0, 1).is_err());
    }

    #[test]
    fn normalized_linf_q_indicator() {
        // osc vanishes below the support measure, so only the average term
        // remains
        let p = default_profile(&indicator_1d(500));
        let n = normalized_linf_q(&p, 1.0, 1.0).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn modulus_indicator_l1() {
        let f = indicator_1d(500);
        let h = f.grid().spacing();
        let anchor = NormAnchor::Lp(1.0);
        for &t in &[0.1, 0.25, 0.5] {
            let w = modulus(&f, &anchor, t).unwrap();
            assert!((w - 2.0 * t).abs() <= 2.0 * h + 1e-12, "w({t}) = {w}");
        }
        assert_eq!(modulus(&f, &anchor, 0.0).unwrap(), 0.0);
        assert!(modulus(&f, &anchor, -1.0).is_err());
    }

    #[test]
    fn modulus_monotone_and_bounded() {
        let f = indicator_1d(300);
        let curve = modulus_curve(&f, &NormAnchor::Lp(1.0)).unwrap();
        for i in 1..curve.w.len() {
            assert!(curve.w[i] >= curve.w[i - 1]);
        }
        // w <= 2 ||f||_1
        let bound = 2.0 * f.integrate_abs() + 1e-9;
        assert!(curve.saturated() <= bound);
    }

    #[test]
    fn modulus_rejects_gaussian() {
        let g = build_grid(1, 8.0, 101).unwrap();
        let f = SampledFunction::zeros(g, MeasureSpec::Gaussian);
        assert!(modulus(&f, &NormAnchor::Lp(1.0), 0.5).is_err());
    }

    #[test]
    fn besov_indicator_half() {
        // 2 a^{1-α} (1/(1-α) + 1/α) with a = 1, α = 1/2: 8
        let f = indicator_1d(500);
        let params = BesovParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let b = besov_seminorm(&f, &params).unwrap();
        assert_relative_eq!(b, 8.0, max_relative = 0.05);
    }

    #[test]
    fn besov_dilation_scaling() {
        // indicator family a = r: seminorm = 2 a^{1-α} (1/(1-α) + 1/α)
        let alpha = 0.5;
        let params = BesovParams::new(alpha, 1.0, 1.0, 1.0).unwrap();
        let b1 = besov_seminorm(&indicator_1d(250), &params).unwrap();
        let b2 = besov_seminorm(&indicator_1d(750), &params).unwrap();
        // sizes 0.5 and 1.5: ratio 3^{1-α} = sqrt(3)
        assert_relative_eq!(b2 / b1, 3.0f64.sqrt(), max_relative = 0.02);
    }

    #[test]
    fn besov_sup_form_upper_bounds_curve() {
        let f = indicator_1d(400);
        let alpha = 0.3;
        let params = BesovParams::new(alpha, 1.0, 1.0, f64::INFINITY).unwrap();
        let b = besov_seminorm(&f, &params).unwrap();
        let curve = modulus_curve(&f, &NormAnchor::Lp(1.0)).unwrap();
        for (i, &r) in curve.radii.iter().enumerate() {
            assert!(curve.w[i] * r.powf(-alpha) <= b + 1e-12);
        }
    }

    #[test]
    fn besov_rejects_bad_alpha() {
        assert!(BesovParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(BesovParams::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(BesovParams::new(1.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn besov_zero_function() {
        let g = build_grid(1, 1.0, 33).unwrap();
        let z = SampledFunction::zeros(g, MeasureSpec::Lebesgue);
        let params = BesovParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(besov_seminorm(&z, &params).unwrap(), 0.0);
    }

    #[test]
    fn fundamental_function_values() {
        assert_abs_diff_eq!(fundamental_function(&NormAnchor::Lp(2.0), 4.0), 2.0);
        assert_abs_diff_eq!(fundamental_function(&NormAnchor::Lorentz(3.0, 1.0), 8.0), 2.0);
        assert_abs_diff_eq!(fundamental_function(&NormAnchor::Lp(1.0), 7.25), 7.25);
    }

    #[test]
    fn lorentz_anchor_modulus_matches_lp_for_p_eq_r() {
        let f = indicator_1d(300);
        let w_lp = modulus(&f, &NormAnchor::Lp(2.0), 0.3).unwrap();
        let w_lo = modulus(&f, &NormAnchor::Lorentz(2.0, 2.0), 0.3).unwrap();
        assert_relative_eq!(w_lp, w_lo, max_relative = 1e-10);
    }
}
