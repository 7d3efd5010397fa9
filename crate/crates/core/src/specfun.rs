//! Log-gamma and digamma on the positive reals.
//!
//! Both functions reduce their argument into a range where a series is
//! accurate: `ln Γ` uses a Taylor expansion around 1 and 2 for small
//! arguments and Stirling's series above 10, `ψ₀` uses upward recurrence
//! followed by its asymptotic expansion.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ζ(k) - 1` for `k = 2..=30`.
#[allow(clippy::excessive_precision)]
const ZETA_MINUS_ONE: [f64; 29] = [
    6.44934066848226406e-01,
    2.02056903159594292e-01,
    8.23232337111381857e-02,
    3.69277551433699266e-02,
    1.73430619844491402e-02,
    8.34927738192282713e-03,
    4.07735619794433960e-03,
    2.00839282608221426e-03,
    9.94575127818085256e-04,
    4.94188604119464529e-04,
    2.46086553308048320e-04,
    1.22713347578489145e-04,
    6.12481350587048277e-05,
    3.05882363070204933e-05,
    1.52822594086518710e-05,
    7.63719763789976257e-06,
    3.81729326499984022e-06,
    1.90821271655393897e-06,
    9.53962033872796212e-07,
    4.76932986787806447e-07,
    2.38450502727733004e-07,
    1.19219925965311064e-07,
    5.96081890512594801e-08,
    2.98035035146522793e-08,
    1.49015548283650427e-08,
    7.45071178983543006e-09,
    3.72533402478845728e-09,
    1.86265972351304914e-09,
    9.31327432419668166e-10,
];

/// Stirling coefficients `B_2k / (2k (2k - 1))`.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Asymptotic digamma coefficients `B_2k / 2k`.
const DIGAMMA_ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

fn check_argument(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "{name} requires a finite positive argument, got {x}"
        )));
    }
    Ok(())
}

/// `ln Γ(x)` for finite `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_argument("log_gamma", x)?;
    Ok(lgamma(x))
}

/// `ψ₀(x)` for finite `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_argument("digamma", x)?;
    Ok(psi(x))
}

/// `ln Γ(2 + z) = z(1 - γ) + Σ_{k≥2} (-1)^k (ζ(k) - 1) z^k / k`, valid for `|z| ≤ ½`.
fn lgamma_two_plus(z: f64) -> f64 {
    let mut sum = 0.0;
    // Smallest terms first.
    for (idx, &c) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (idx + 2) as i32;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c * z.powi(k) / f64::from(k);
    }
    sum + z * (1.0 - EULER_GAMMA)
}

/// Unchecked `ln Γ` used on the hot paths, where arguments are positive by construction.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite(), "lgamma({x})");
    if x < 0.5 {
        // Γ(x) = Γ(1 + x) / x
        lgamma_two_plus(x) - x.ln_1p() - x.ln()
    } else if x < 1.5 {
        let z = x - 1.0;
        lgamma_two_plus(z) - z.ln_1p()
    } else if x < 2.5 {
        lgamma_two_plus(x - 2.0)
    } else if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        lgamma_two_plus(y - 2.0) + prod.ln()
    } else {
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let mut series = 0.0;
        for &c in STIRLING.iter().rev() {
            series = series * inv2 + c;
        }
        (x - 0.5) * x.ln() - x + HALF_LN_2PI + series * inv
    }
}

/// Unchecked `ψ₀`.
pub(crate) fn psi(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite(), "psi({x})");
    let mut z = x;
    let mut shift = 0usize;
    while z < 10.0 {
        z += 1.0;
        shift += 1;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    for &c in DIGAMMA_ASYMPTOTIC.iter().rev() {
        series = series * inv2 + c;
    }
    let mut result = z.ln() - 0.5 / z - series * inv2;
    // ψ(x) = ψ(x + m) - Σ_{i<m} 1/(x + i); subtract the largest term last.
    for i in (0..shift).rev() {
        result -= 1.0 / (x + i as f64);
    }
    result
}
