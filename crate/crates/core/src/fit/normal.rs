//! Standard normal cdf in log space, built on `erfc`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Below this argument `erfc` underflows and the asymptotic series is used.
const TAIL: f64 = -37.0;

/// `Phi(t)`.
pub fn cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// `log Phi(t)`, finite for every finite `t`.
pub fn log_cdf(t: f64) -> f64 {
    if t > 5.0 {
        // Phi(t) is close to 1: log1p of the upper tail mass.
        (-0.5 * libm::erfc(t * FRAC_1_SQRT_2)).ln_1p()
    } else if t >= TAIL {
        cdf(t).ln()
    } else {
        let z2 = 1.0 / (t * t);
        let series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
        -0.5 * t * t - (-t).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// Inverse Mills ratio `phi(t) / Phi(t)`.
pub fn mills(t: f64) -> f64 {
    (-0.5 * t * t - LN_SQRT_2PI - log_cdf(t)).exp()
}

/// `Phi^{-1}(p)` by bisection; only used for clipped degenerate fits.
pub fn quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
