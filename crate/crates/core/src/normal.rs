//! Standard-normal primitives and the normal-theory divisors used to turn
//! ranges and interquartile ranges into standard deviations.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "probability must lie in [0, 1], got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

#[inline]
pub(crate) fn ln_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Lower tail `Φ(x)` without argument checks. Infinite inputs map to 0 or 1.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate for large positive `x`.
#[inline]
pub(crate) fn phi_upper(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Φ(hi) - Φ(lo)` for `lo <= hi`, evaluated on whichever tail keeps the
/// subtraction free of cancellation.
#[inline]
pub(crate) fn phi_between(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        phi_upper(lo) - phi_upper(hi)
    } else {
        phi(hi) - phi(lo)
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "normal CDF needs a finite argument, got {x}"
        )));
    }
    Ok(Probability(phi(x)))
}

// Rational approximation of the lower-tail normal quantile (relative error
// about 1.15e-9), polished below with a single Halley step.
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

fn quantile_lower_half(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement against the erfc-backed CDF.
    let e = phi(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Unchecked quantile for `p` in the open unit interval.
#[inline]
pub(crate) fn phi_inv(p: f64) -> f64 {
    if p <= 0.5 {
        quantile_lower_half(p)
    } else {
        -quantile_lower_half(1.0 - p)
    }
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "normal quantile needs 0 < p < 1, got {p}"
        )));
    }
    Ok(phi_inv(p))
}

fn check_n(n: u64, what: &str) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("{what} needs n >= 2, got {n}")));
    }
    Ok(n as f64)
}

/// Range divisor: `E(b - a) ≈ σ·ξ(n)` under normality.
pub fn xi_n(n: u64) -> Result<f64> {
    let n = check_n(n, "xi(n)")?;
    Ok(2.0 * phi_inv((n - 0.375) / (n + 0.25)))
}

/// Interquartile-range divisor: `E(q3 - q1) ≈ σ·η(n)` under normality.
pub fn eta_n(n: u64) -> Result<f64> {
    let n = check_n(n, "eta(n)")?;
    Ok(2.0 * phi_inv((0.75 * n - 0.125) / (n + 0.25)))
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log-gamma needs a finite x > 0, got {x}"
        )));
    }
    Ok(libm::lgamma(x))
}

/// `ln(n!)` for small and large `n` alike.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Mean of the standard half-normal, `√(2/π)`.
pub(crate) fn half_normal_mean() -> f64 {
    (2.0 / PI).sqrt()
}
