//! Exact null densities of `T1` and `T2` for `n = 4Q+1`.
//!
//! Both densities are double integrals over the joint law of the two outer
//! order statistics (min/max for `T1`, the quartiles for `T2`), with the
//! median written in terms of `t`. The integrals are evaluated in probability
//! coordinates `s = Φ(u)`, `r = Φ(v)` so that the `φ(u)φ(v)` weights cancel the
//! Jacobian, then with nested adaptive Gauss–Kronrod on the unit triangle
//! `0 < s < r < 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{ln_factorial, ln_std_normal_pdf, phi_between, phi_inv, phi_upper};
use crate::quadrature::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatisticKind {
    T1,
    T2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullDensityQuery {
    pub kind: StatisticKind,
    pub n: u64,
    pub t: f64,
}

fn quarter(n: u64) -> Result<u64> {
    if n < 5 || !(n - 1).is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "exact null densities need n = 4Q+1 with Q >= 1, got n = {n}"
        )));
    }
    Ok((n - 1) / 4)
}

/// Log of the multinomial constant in front of each density.
fn ln_constant(kind: StatisticKind, n: u64, q: u64) -> f64 {
    match kind {
        StatisticKind::T1 => ln_factorial(n) - 2.0 * ln_factorial(2 * q - 1),
        StatisticKind::T2 => ln_factorial(n) - 2.0 * (ln_factorial(q) + ln_factorial(q - 1)),
    }
}

struct Integrand {
    kind: StatisticKind,
    q: f64,
    ln_c: f64,
    t: f64,
}

impl Integrand {
    /// Integrand at probability coordinates `s < r`.
    fn eval(&self, s: f64, r: f64) -> f64 {
        if !(s > 0.0 && r < 1.0 && s < r) {
            return 0.0;
        }
        let u = phi_inv(s);
        let v = phi_inv(r);
        if v <= u {
            return 0.0;
        }
        // Median location implied by t, always inside [u, v] for |t| < 1.
        let w = 0.5 * (1.0 + self.t) * u + 0.5 * (1.0 - self.t) * v;
        let below = phi_between(u, w);
        let above = phi_between(w, v);
        if below <= 0.0 || above <= 0.0 {
            return 0.0;
        }
        let jac = (0.5 * (v - u)).ln();
        let ln_f = match self.kind {
            StatisticKind::T1 => {
                let k = 2.0 * self.q - 1.0;
                self.ln_c + jac + ln_std_normal_pdf(w) + k * (below.ln() + above.ln())
            }
            StatisticKind::T2 => {
                let k = self.q - 1.0;
                self.ln_c
                    + jac
                    + ln_std_normal_pdf(w)
                    + self.q * (s.ln() + phi_upper(v).ln())
                    + k * (below.ln() + above.ln())
            }
        };
        ln_f.exp()
    }
}

fn axis_options(rel_tol: f64) -> QuadOptions {
    QuadOptions { abs_tol: 1e-14, rel_tol, max_intervals: 400, initial_pieces: 4 }
}

fn density_with_tol(kind: StatisticKind, n: u64, t: f64, rel_tol: f64) -> Result<f64> {
    let q = quarter(n)?;
    if !(t > -1.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("density argument must lie in (-1, 1), got {t}")));
    }
    let integrand = Integrand { kind, q: q as f64, ln_c: ln_constant(kind, n, q), t };
    let opts = axis_options(rel_tol);
    let outer = integrate(
        |s| integrate(|r| integrand.eval(s, r), s, 1.0, &opts).value,
        0.0,
        1.0,
        &opts,
    );
    Ok(outer.value.max(0.0))
}

/// Null density of `T1` or `T2` at `t`.
pub fn null_density(query: &NullDensityQuery) -> Result<f64> {
    density_with_tol(query.kind, query.n, query.t, 1e-7)
}

/// `P(lo < T < hi)` under the null, by integrating the density.
pub fn null_probability(kind: StatisticKind, n: u64, lo: f64, hi: f64) -> Result<f64> {
    quarter(n)?;
    if !(lo >= -1.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need -1 <= lo <= hi <= 1, got lo = {lo}, hi = {hi}"
        )));
    }
    let opts = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-7, max_intervals: 100, initial_pieces: 1 };
    // The inner density tolerance sits a notch looser than the outer one.
    let density = |t: f64| {
        if t <= -1.0 || t >= 1.0 {
            0.0
        } else {
            density_with_tol(kind, n, t, 1e-6).unwrap_or(0.0)
        }
    };
    Ok(integrate(density, lo, hi, &opts).value)
}

/// `P(T > c)` under the null.
pub fn null_upper_tail(kind: StatisticKind, n: u64, c: f64) -> Result<f64> {
    if !(c > -1.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!("tail point must lie in (-1, 1), got {c}")));
    }
    null_probability(kind, n, c, 1.0)
}

/// Upper `upper_tail` quantile of the null distribution, found by a
/// bracketed root search on [`null_upper_tail`].
pub fn null_quantile(kind: StatisticKind, n: u64, upper_tail: f64) -> Result<f64> {
    quarter(n)?;
    if !(upper_tail > 0.0 && upper_tail < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "upper tail probability must lie in (0, 0.5), got {upper_tail}"
        )));
    }
    // The density is symmetric, so the quantile is positive.
    let g = |c: f64| null_upper_tail(kind, n, c).map(|p| p - upper_tail);
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
    let (mut g_lo, mut g_hi) = (0.5 - upper_tail, g(hi)?);
    // Illinois variant of regula falsi.
    let mut side = 0i8;
    for _ in 0..60 {
        let c = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        let gc = g(c)?;
        if gc.abs() < 1e-9 || (hi - lo) < 1e-9 {
            return Ok(c);
        }
        if gc > 0.0 {
            lo = c;
            g_lo = gc;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = c;
            g_hi = gc;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(0.5 * (lo + hi))
}
