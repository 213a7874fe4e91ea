//! Deterministic test-function generators with analytic ground truth, the
//! standard 24-function corpus, and the mollified-indicator machinery for
//! perimeter limits.
//!
//! Every generator is a pure function of (generator, theta, seed, grid,
//! measure), bit-for-bit reproducible. The random Fourier family draws its
//! coefficients from a counter-based SplitMix64 stream so the corpus can be
//! regenerated identically in any language.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::mesh::{GridSpec, MeasureSpec, SampledFunction, Shape};
use crate::{Error, Result};

/// Generator families for corpus functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorId {
    /// theta = [R, H]: H (1 - |x|/R)+ in any dimension.
    Cone,
    /// theta = [R, H]: the 1-d cone.
    Tent,
    /// theta = [R, H]: H exp(1 - 1/(1 - (|x|/R)^2)) on |x| < R.
    SmoothBump,
    /// theta = [R, beta, H]: H (1 - (|x|/R)^2)^beta on |x| < R, beta >= 1.
    PowerBump,
    /// theta = [R, K, H]: band-limited random trigonometric sum (modes
    /// k in [0..K]^n \ {0}, coefficients from the seed stream) times the
    /// smooth bump cutoff of radius R.
    RandomFourier,
    /// theta = [size, eps, kind]: indicator of a ball (kind = 0, radius =
    /// size) or box (kind = 1, side = size) convolved with the normalized
    /// smooth mollifier of radius eps.
    MollifiedIndicator,
    /// theta = [degree, R, H]: H x_1^degree times the smooth bump of radius
    /// R; for sampling under the Gaussian measure.
    GaussianHermiteBump,
    /// Degenerate all-zero family (for error-path contracts).
    Zero,
}

impl GeneratorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorId::Cone => "cone",
            GeneratorId::Tent => "tent",
            GeneratorId::SmoothBump => "smooth_bump",
            GeneratorId::PowerBump => "power_bump",
            GeneratorId::RandomFourier => "random_fourier",
            GeneratorId::MollifiedIndicator => "mollified_indicator",
            GeneratorId::GaussianHermiteBump => "gaussian_hermite_bump",
            GeneratorId::Zero => "zero",
        }
    }
}

impl std::str::FromStr for GeneratorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cone" => GeneratorId::Cone,
            "tent" => GeneratorId::Tent,
            "smooth_bump" => GeneratorId::SmoothBump,
            "power_bump" => GeneratorId::PowerBump,
            "random_fourier" => GeneratorId::RandomFourier,
            "mollified_indicator" => GeneratorId::MollifiedIndicator,
            "gaussian_hermite_bump" => GeneratorId::GaussianHermiteBump,
            "zero" => GeneratorId::Zero,
            other => return Err(Error::InvalidParams(format!("unknown generator '{other}'"))),
        })
    }
}

/// A parametric family: generator, per-coordinate theta bounds, seed.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FamilySpec {
    pub generator: GeneratorId,
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

/// Shape with analytic measure and perimeter.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub dim: usize,
    pub measure_value: f64,
    pub perimeter_value: f64,
}

/// Unit ball volume in dimension n (n <= 3 is all the lab uses).
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            // π^{n/2} / Γ(n/2 + 1) via the half-integer recursion
            let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
            let mut k = if n % 2 == 0 { 2 } else { 3 };
            while k <= n {
                v *= 2.0 * std::f64::consts::PI / k as f64;
                k += 2;
            }
            v
        }
    }
}

impl ShapeSpec {
    pub fn ball(dim: usize, radius: f64) -> Self {
        let omega = unit_ball_volume(dim);
        ShapeSpec {
            shape: Shape::Ball(radius),
            dim,
            measure_value: omega * radius.powi(dim as i32),
            perimeter_value: dim as f64 * omega * radius.powi(dim as i32 - 1),
        }
    }

    pub fn cube(dim: usize, side: f64) -> Self {
        ShapeSpec {
            shape: Shape::Box(side / 2.0),
            dim,
            measure_value: side.powi(dim as i32),
            perimeter_value: 2.0 * dim as f64 * side.powi(dim as i32 - 1),
        }
    }
}

/// Analytic perimeter of a supported shape.
pub fn perimeter_oracle(shape: &ShapeSpec) -> f64 {
    shape.perimeter_value
}

// ---------------------------------------------------------------------------
// SplitMix64 counter stream
// ---------------------------------------------------------------------------

/// SplitMix64 output for one counter position of a seeded stream; the
/// corpus PRNG. Maps to a double in [-1, 1).
pub fn stream_value(seed: u64, counter: u64) -> f64 {
    let mut z = seed
        .wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    // top 53 bits to [0,1), then shift to [-1,1)
    let u = (z >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * u - 1.0
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn smooth_bump_profile(r: f64) -> f64 {
    // exp(1 - 1/(1-r^2)) on r < 1, C^infinity with value 1 at r = 0
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

fn radial(grid: &GridSpec, measure: MeasureSpec, g: impl Fn(f64) -> f64 + Sync) -> Result<SampledFunction> {
    let values: Vec<f64> = (0..grid.cell_count())
        .into_par_iter()
        .map(|flat| {
            let x = grid.coords(flat);
            g(x.iter().map(|v| v * v).sum::<f64>().sqrt())
        })
        .collect();
    SampledFunction::new(*grid, measure, values).map_err(|e| match e {
        Error::Invariant(msg) => {
            Error::InvalidParams(format!("support exceeds the box interior: {msg}"))
        }
        other => other,
    })
}

fn check_theta(gen: GeneratorId, theta: &[f64], want: usize) -> Result<()> {
    if theta.len() != want {
        return Err(Error::InvalidParams(format!(
            "{} expects {want} theta components, got {}",
            gen.as_str(),
            theta.len()
        )));
    }
    if !theta.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParams("theta must be finite".into()));
    }
    Ok(())
}

/// Generate a corpus function. Pure in (generator, theta, seed, grid,
/// measure); errors if the requested support cannot keep a zero boundary
/// layer inside the box.
pub fn generate(
    gen: GeneratorId,
    theta: &[f64],
    seed: u64,
    grid: &GridSpec,
    measure: MeasureSpec,
) -> Result<SampledFunction> {
    match gen {
        GeneratorId::Cone | GeneratorId::Tent => {
            check_theta(gen, theta, 2)?;
            if gen == GeneratorId::Tent && grid.dim != 1 {
                return Err(Error::InvalidParams("tent is the 1-d cone; use cone for n > 1".into()));
            }
            let (r, h) = (theta[0], theta[1]);
            if r <= 0.0 {
                return Err(Error::InvalidParams("cone radius must be positive".into()));
            }
            radial(grid, measure, move |d| {
                let v = h * (1.0 - d / r);
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            })
        }
        GeneratorId::SmoothBump => {
            check_theta(gen, theta, 2)?;
            let (r, h) = (theta[0], theta[1]);
            if r <= 0.0 {
                return Err(Error::InvalidParams("bump radius must be positive".into()));
            }
            radial(grid, measure, move |d| h * smooth_bump_profile(d / r))
        }
        GeneratorId::PowerBump => {
            check_theta(gen, theta, 3)?;
            let (r, beta, h) = (theta[0], theta[1], theta[2]);
            if r <= 0.0 || beta < 1.0 {
                return Err(Error::InvalidParams(
                    "power bump needs radius > 0 and beta >= 1".into(),
                ));
            }
            radial(grid, measure, move |d| {
                let s = 1.0 - (d / r) * (d / r);
                if s > 0.0 {
                    h * s.powf(beta)
                } else {
                    0.0
                }
            })
        }
        GeneratorId::RandomFourier => {
            check_theta(gen, theta, 3)?;
            let (r, kf, h) = (theta[0], theta[1], theta[2]);
            let kmax = kf.round() as i64;
            if r <= 0.0 || kmax < 1 || kmax > 8 {
                return Err(Error::InvalidParams(
                    "random fourier needs radius > 0 and 1 <= K <= 8".into(),
                ));
            }
            // modes k in [0..K]^n \ {0}, lexicographic; coefficients
            // (a_k, b_k) at counters (2i, 2i+1)
            let dim = grid.dim;
            let mut modes: Vec<Vec<i64>> = Vec::new();
            let total = (kmax as usize + 1).pow(dim as u32);
            for c in 0..total {
                let mut rest = c;
                let mut k = vec![0i64; dim];
                for d in (0..dim).rev() {
                    k[d] = (rest % (kmax as usize + 1)) as i64;
                    rest /= kmax as usize + 1;
                }
                if k.iter().any(|&x| x != 0) {
                    modes.push(k);
                }
            }
            let coef: Vec<(f64, f64)> = (0..modes.len())
                .map(|i| (stream_value(seed, 2 * i as u64), stream_value(seed, 2 * i as u64 + 1)))
                .collect();
            let pi_over_r = std::f64::consts::PI / r;
            let values: Vec<f64> = (0..grid.cell_count())
                .into_par_iter()
                .map(|flat| {
                    let x = grid.coords(flat);
                    let d = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let cutoff = smooth_bump_profile(d / r);
                    if cutoff == 0.0 {
                        return 0.0;
                    }
                    let mut s = 0.0;
                    for (k, &(a, b)) in modes.iter().zip(&coef) {
                        let phase: f64 =
                            k.iter().zip(&x).map(|(&ki, &xi)| ki as f64 * xi).sum::<f64>() * pi_over_r;
                        s += a * phase.cos() + b * phase.sin();
                    }
                    h * cutoff * s
                })
                .collect();
            SampledFunction::new(*grid, measure, values).map_err(|e| match e {
                Error::Invariant(msg) => {
                    Error::InvalidParams(format!("support exceeds the box interior: {msg}"))
                }
                other => other,
            })
        }
        GeneratorId::MollifiedIndicator => {
            check_theta(gen, theta, 3)?;
            let (size, eps, kind) = (theta[0], theta[1], theta[2]);
            let shape = match kind.round() as i64 {
                0 => Shape::Ball(size),
                1 => Shape::Box(size / 2.0),
                _ => {
                    return Err(Error::InvalidParams(
                        "mollified indicator kind must be 0 (ball) or 1 (box)".into(),
                    ))
                }
            };
            mollified_indicator(&shape, eps, grid, measure)
        }
        GeneratorId::GaussianHermiteBump => {
            check_theta(gen, theta, 3)?;
            let (deg, r, h) = (theta[0].round() as i64, theta[1], theta[2]);
            if !(0..=4).contains(&deg) || r <= 0.0 {
                return Err(Error::InvalidParams(
                    "hermite bump needs degree 0..=4 and radius > 0".into(),
                ));
            }
            let values: Vec<f64> = (0..grid.cell_count())
                .into_par_iter()
                .map(|flat| {
                    let x = grid.coords(flat);
                    let d = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    h * x[0].powi(deg as i32) * smooth_bump_profile(d / r)
                })
                .collect();
            SampledFunction::new(*grid, measure, values).map_err(|e| match e {
                Error::Invariant(msg) => {
                    Error::InvalidParams(format!("support exceeds the box interior: {msg}"))
                }
                other => other,
            })
        }
        GeneratorId::Zero => Ok(SampledFunction::zeros(*grid, measure)),
    }
}

/// Discrete convolution of a shape indicator with the normalized smooth
/// mollifier of radius eps. Values lie in [0,1] and equal 1 on the
/// eps-eroded interior.
pub fn mollified_indicator(
    shape: &Shape,
    eps: f64,
    grid: &GridSpec,
    measure: MeasureSpec,
) -> Result<SampledFunction> {
    let h = grid.spacing();
    if eps < 2.0 * h {
        return Err(Error::InvalidParams(format!(
            "mollifier radius {eps} below grid resolution (needs >= 2h = {})",
            2.0 * h
        )));
    }
    let dim = grid.dim;
    let reach = (eps / h).floor() as isize;
    // kernel offsets and weights, normalized to unit sum
    let mut offsets: Vec<(Vec<isize>, f64)> = Vec::new();
    let total = (2 * reach + 1).pow(dim as u32) as usize;
    let mut ksum = 0.0;
    for c in 0..total {
        let mut rest = c;
        let mut off = vec![0isize; dim];
        for d in (0..dim).rev() {
            off[d] = (rest % (2 * reach + 1) as usize) as isize - reach;
            rest /= (2 * reach + 1) as usize;
        }
        let dist = off.iter().map(|&o| (o as f64 * h).powi(2)).sum::<f64>().sqrt();
        let w = smooth_bump_profile(dist / eps);
        if w > 0.0 {
            ksum += w;
            offsets.push((off, w));
        }
    }
    for o in offsets.iter_mut() {
        o.1 /= ksum;
    }

    let m = grid.points_per_axis as isize;
    let strides = grid.strides();
    // cell-averaged indicator: 4 subsamples per axis keep the discretized
    // boundary from dominating the mollification error
    const SUB: usize = 4;
    let sub_total = SUB.pow(dim as u32);
    let chi: Vec<f64> = (0..grid.cell_count())
        .into_par_iter()
        .map(|flat| {
            let c = grid.coords(flat);
            let mut inside = 0usize;
            for s in 0..sub_total {
                let mut rest = s;
                let mut x = c.clone();
                for d in (0..dim).rev() {
                    let frac = (rest % SUB) as f64;
                    rest /= SUB;
                    x[d] += h * ((frac + 0.5) / SUB as f64 - 0.5);
                }
                if shape.contains(&x) {
                    inside += 1;
                }
            }
            inside as f64 / sub_total as f64
        })
        .collect();
    let values: Vec<f64> = (0..grid.cell_count())
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; dim];
            grid.decompose(flat, &mut idx);
            let mut acc = 0.0;
            'outer: for (off, w) in &offsets {
                let mut nflat = 0usize;
                for d in 0..dim {
                    let j = idx[d] as isize + off[d];
                    if j < 0 || j >= m {
                        continue 'outer;
                    }
                    nflat += j as usize * strides[d];
                }
                acc += w * chi[nflat];
            }
            if acc < 1e-14 {
                0.0
            } else {
                acc.min(1.0)
            }
        })
        .collect();
    SampledFunction::new(*grid, measure, values).map_err(|e| match e {
        Error::Invariant(msg) => {
            Error::InvalidParams(format!("mollified support exceeds the box interior: {msg}"))
        }
        other => other,
    })
}

/// Convergence report of ‖∇f_eps‖_L1 toward the analytic perimeter.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoareaReport {
    pub eps: Vec<f64>,
    pub gradient_l1: Vec<f64>,
    pub rel_error: Vec<f64>,
    pub perimeter: f64,
}

/// Mollify the shape at each eps and compare ‖∇f_eps‖_L1 with the analytic
/// perimeter. Requires a decreasing eps ladder with the smallest eps >= 2h.
pub fn coarea_limit_check(
    shape: &ShapeSpec,
    eps_sequence: &[f64],
    grid: &GridSpec,
) -> Result<CoareaReport> {
    if eps_sequence.is_empty() || eps_sequence.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParams("eps ladder must be strictly decreasing".into()));
    }
    let h = grid.spacing();
    if *eps_sequence.last().unwrap() < 2.0 * h {
        return Err(Error::InvalidParams(format!(
            "smallest eps {} below grid resolution 2h = {}",
            eps_sequence.last().unwrap(),
            2.0 * h
        )));
    }
    let per = shape.perimeter_value;
    let mut grads = Vec::new();
    let mut errs = Vec::new();
    for &eps in eps_sequence {
        let f = mollified_indicator(&shape.shape, eps, grid, MeasureSpec::Lebesgue)?;
        let g = crate::calculus::gradient_magnitude(&f)?;
        let l1 = g.magnitude.integrate_abs();
        grads.push(l1);
        errs.push((l1 - per).abs() / per);
    }
    Ok(CoareaReport {
        eps: eps_sequence.to_vec(),
        gradient_l1: grads,
        rel_error: errs,
        perimeter: per,
    })
}

// ---------------------------------------------------------------------------
// Standard corpus
// ---------------------------------------------------------------------------

/// One corpus entry: everything needed to regenerate the function.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CorpusEntry {
    pub label: String,
    pub generator: GeneratorId,
    pub theta: Vec<f64>,
    pub seed: u64,
    pub grid: GridSpec,
    pub measure: MeasureSpec,
    /// Highest derivative order the function supports in checks.
    pub k_max: usize,
    /// Domain for Ω-relative checks, when the entry is built for one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Shape>,
}

impl CorpusEntry {
    pub fn build(&self) -> Result<SampledFunction> {
        generate(self.generator, &self.theta, self.seed, &self.grid, self.measure)
    }
}

/// The fixed 24-function corpus: 10 Lebesgue functions in each of n = 1, 2
/// and 4 Gaussian-measure functions.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    let g1 = GridSpec { dim: 1, half_width: 2.0, points_per_axis: 2001 };
    let g2 = GridSpec { dim: 2, half_width: 2.0, points_per_axis: 201 };
    let gg1 = GridSpec { dim: 1, half_width: 8.0, points_per_axis: 2001 };
    let gg2 = GridSpec { dim: 2, half_width: 8.0, points_per_axis: 201 };
    let leb = MeasureSpec::Lebesgue;
    let gau = MeasureSpec::Gaussian;
    let e = |label: &str,
             generator: GeneratorId,
             theta: &[f64],
             seed: u64,
             grid: GridSpec,
             measure: MeasureSpec,
             k_max: usize| CorpusEntry {
        label: label.into(),
        generator,
        theta: theta.to_vec(),
        seed,
        grid,
        measure,
        k_max,
        domain: None,
    };
    let mut list = vec![
        // n = 1, Lebesgue
        e("tent_r1", GeneratorId::Tent, &[1.0, 1.0], 0, g1, leb, 1),
        e("tent_r05_h2", GeneratorId::Tent, &[0.5, 2.0], 0, g1, leb, 1),
        e("tent_r15", GeneratorId::Tent, &[1.5, 1.0], 0, g1, leb, 1),
        e("bump1d_r1", GeneratorId::SmoothBump, &[1.0, 1.0], 0, g1, leb, 4),
        e("bump1d_r08", GeneratorId::SmoothBump, &[0.8, 1.5], 0, g1, leb, 4),
        e("pbump1d_b2", GeneratorId::PowerBump, &[1.0, 2.0, 1.0], 0, g1, leb, 2),
        e("pbump1d_b3", GeneratorId::PowerBump, &[1.2, 3.0, 0.8], 0, g1, leb, 3),
        e("fourier1d_s7", GeneratorId::RandomFourier, &[1.5, 3.0, 1.0], 7, g1, leb, 4),
        e("fourier1d_s11", GeneratorId::RandomFourier, &[1.2, 2.0, 1.0], 11, g1, leb, 4),
        e("mollind1d", GeneratorId::MollifiedIndicator, &[1.0, 0.1, 0.0], 0, g1, leb, 1),
        // n = 2, Lebesgue
        e("cone_r1", GeneratorId::Cone, &[1.0, 1.0], 0, g2, leb, 1),
        e("cone_r14", GeneratorId::Cone, &[1.4, 0.7], 0, g2, leb, 1),
        e("bump2d_r1", GeneratorId::SmoothBump, &[1.0, 1.0], 0, g2, leb, 4),
        e("bump2d_r12", GeneratorId::SmoothBump, &[1.2, 0.6], 0, g2, leb, 4),
        e("pbump2d_b2", GeneratorId::PowerBump, &[1.0, 2.0, 1.0], 0, g2, leb, 2),
        e("pbump2d_b3", GeneratorId::PowerBump, &[1.3, 3.0, 1.2], 0, g2, leb, 3),
        e("fourier2d_s7", GeneratorId::RandomFourier, &[1.4, 2.0, 1.0], 7, g2, leb, 4),
        e("qbump2d", GeneratorId::PowerBump, &[1.0, 1.0, 0.25], 0, g2, leb, 1),
        e("mollind2d_ball", GeneratorId::MollifiedIndicator, &[1.0, 0.1, 0.0], 0, g2, leb, 1),
        e("mollind2d_box", GeneratorId::MollifiedIndicator, &[1.6, 0.1, 1.0], 0, g2, leb, 1),
        // Gaussian measure
        e("gauss1d_x", GeneratorId::GaussianHermiteBump, &[1.0, 3.0, 1.0], 0, gg1, gau, 4),
        e("gauss1d_x2", GeneratorId::GaussianHermiteBump, &[2.0, 3.0, 0.5], 0, gg1, gau, 4),
        e("gauss2d_x", GeneratorId::GaussianHermiteBump, &[1.0, 3.0, 1.0], 0, gg2, gau, 4),
        e("gauss2d_bump", GeneratorId::GaussianHermiteBump, &[0.0, 2.5, 1.0], 0, gg2, gau, 4),
    ];
    // the quadratic bump carries the unit-disk domain for boundary checks
    for entry in list.iter_mut() {
        if entry.label == "qbump2d" {
            entry.domain = Some(Shape::Ball(1.0));
        }
    }
    list
}

/// Write a corpus manifest as pretty JSON.
pub fn write_manifest<W: Write>(entries: &[CorpusEntry], mut w: W) -> Result<()> {
    let s = serde_json::to_string_pretty(entries)?;
    writeln!(w, "{s}")?;
    Ok(())
}

pub fn save_manifest(entries: &[CorpusEntry], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_manifest(entries, std::io::BufWriter::new(f))
}

pub fn load_manifest(path: &Path) -> Result<Vec<CorpusEntry>> {
    let data = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&data)?)
}
