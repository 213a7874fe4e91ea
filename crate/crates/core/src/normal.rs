//! Standard normal density, cumulative function, and quantile.

/// 1/sqrt(2*pi)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density phi(x).
#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// erf(x), Abramowitz & Stegun 7.1.26 rational approximation.
/// Absolute error below 1.5e-7; relative error in the tails scales with
/// exp(-x^2) so cumulative tail masses stay accurate.
pub fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let a1 = 0.254_829_592;
    let a2 = -0.284_496_736;
    let a3 = 1.421_413_741;
    let a4 = -1.453_152_027;
    let a5 = 1.061_405_429;
    let y = 1.0 - (((((a5 * t + a4) * t) + a3) * t + a2) * t + a1) * t * (-x * x).exp();
    sign * y
}

/// Standard normal cumulative function N(x).
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Standard normal quantile N^{-1}(p), p in (0,1).
///
/// Acklam's rational approximation refined by one Halley step against
/// [`cdf`]; exact at p = 1/2.
pub fn quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement of N(x) = p.
    let e = cdf(x) - p;
    let u = e / pdf(x).max(f64::MIN_POSITIVE);
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_reference_values() {
        assert_abs_diff_eq!(cdf(0.0), 0.5, epsilon = 5e-9);
        assert_abs_diff_eq!(cdf(1.0), 0.841_344_746_068_543, epsilon = 1e-6);
        assert_abs_diff_eq!(cdf(-1.96), 0.024_997_895_148_220, epsilon = 1e-6);
        assert!(cdf(8.0) > 1.0 - 1e-14);
        assert!(cdf(-8.0) < 1e-14);
    }

    #[test]
    fn cdf_matches_density_quadrature() {
        // Dense Riemann sum of the density on [-10, 0.1] as an independent
        // check of N(0.1).
        let n = 2_000_000;
        let a = -10.0;
        let b = 0.1;
        let h = (b - a) / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            sum += pdf(a + (i as f64 + 0.5) * h);
        }
        sum *= h;
        assert_abs_diff_eq!(cdf(0.1), sum, epsilon = 1e-7);
    }

    #[test]
    fn quantile_inverts_cdf() {
        assert_abs_diff_eq!(quantile(0.5), 0.0, epsilon = 1e-8);
        for &p in &[1e-6, 1e-4, 0.01, 0.3, 0.7, 0.975, 1.0 - 1e-5] {
            let x = quantile(p);
            assert_abs_diff_eq!(cdf(x), p, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(quantile(1e-4), -3.719_016, epsilon = 1e-3);
    }
}
