use statrs::function::erf::erfc;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Φ(x)` for the standard normal CDF.
///
/// Uses `erfc` where it is accurate and the asymptotic tail series below
/// `x = -20`, where `Φ` itself approaches underflow.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > 8.5 {
        // Φ(x) = 1 - Φ(-x) with Φ(-x) < 1e-17.
        -0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
    } else if x > -20.0 {
        (0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)).ln()
    } else {
        let z2 = 1.0 / (x * x);
        let series = 1.0 - z2 + 3.0 * z2 * z2 - 15.0 * z2 * z2 * z2;
        -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}
