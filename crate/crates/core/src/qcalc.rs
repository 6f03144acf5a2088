//! q-calculus primitives evaluated in the natural-log domain.
//!
//! Every quantity handled here is a product of strictly positive factors, so
//! it is carried as a [`LogValue`] and only exponentiated at the API edge.
//! Factors of the form `1 - q^k` and `1 + a q^k` go through `expm1`/`ln_1p`
//! so that nothing is lost when `q^k` is tiny.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const DEFAULT_TAIL_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_TERMS: usize = 10_000;

/// Validated deformation parameter `0 < q < 1` with the truncation policy
/// used for infinite products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QContext {
    q: f64,
    ln_q: f64,
    tail_tol: f64,
    max_terms: usize,
}

impl QContext {
    pub fn new(q: f64) -> Result<Self> {
        Self::with_tolerances(q, DEFAULT_TAIL_TOL, DEFAULT_MAX_TERMS)
    }

    pub fn with_tolerances(q: f64, tail_tol: f64, max_terms: usize) -> Result<Self> {
        check_q(q)?;
        if !(tail_tol > 0.0 && tail_tol.is_finite()) {
            return Err(domain(format!(
                "tail tolerance must be positive, got {tail_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(domain("max_terms must be at least 1"));
        }
        Ok(QContext {
            q,
            ln_q: q.ln(),
            tail_tol,
            max_terms,
        })
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn ln_q(&self) -> f64 {
        self.ln_q
    }

    /// `log(1/q)`, strictly positive.
    #[inline]
    pub fn ln_inv_q(&self) -> f64 {
        -self.ln_q
    }

    #[inline]
    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    #[inline]
    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `q^t` for real `t`.
    #[inline]
    pub fn pow(&self, t: f64) -> f64 {
        (t * self.ln_q).exp()
    }

    /// `ln(1 - q^t)` for `t > 0`.
    #[inline]
    pub(crate) fn ln_one_minus_pow(&self, t: f64) -> f64 {
        (-(t * self.ln_q).exp_m1()).ln()
    }

    /// The q-number `[t]_q = (1 - q^t) / (1 - q)`.
    #[inline]
    pub fn q_number(&self, t: f64) -> f64 {
        (t * self.ln_q).exp_m1() / self.ln_q.exp_m1()
    }

    /// The deformed value `[x]_{1/q} = (q^{-x} - 1) / (q^{-1} - 1)`.
    #[inline]
    pub fn deformed(&self, x: usize) -> f64 {
        let l = self.ln_inv_q();
        (x as f64 * l).exp_m1() / l.exp_m1()
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "q must lie strictly inside (0, 1), got {q}"
        )))
    }
}

/// Natural logarithm of a strictly positive quantity.
///
/// `Mul`/`Div` act on the represented quantity, i.e. they add and subtract
/// logarithms.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub const ONE: LogValue = LogValue(0.0);

    #[inline]
    pub fn from_ln(ln: f64) -> Self {
        LogValue(ln)
    }

    pub fn from_value(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(LogValue(value.ln()))
        } else {
            Err(domain(format!(
                "LogValue needs a positive finite value, got {value}"
            )))
        }
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn recip(self) -> Self {
        LogValue(-self.0)
    }

    #[inline]
    pub fn powf(self, e: f64) -> Self {
        LogValue(self.0 * e)
    }
}

// products of values are sums of logs
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for LogValue {
    type Output = LogValue;
    #[inline]
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue(self.0 + rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for LogValue {
    type Output = LogValue;
    #[inline]
    fn div(self, rhs: LogValue) -> LogValue {
        LogValue(self.0 - rhs.0)
    }
}

impl std::iter::Product for LogValue {
    fn product<I: Iterator<Item = LogValue>>(iter: I) -> Self {
        LogValue(iter.map(|v| v.0).sum())
    }
}

/// `ln(1 + e^t)` without overflow.
#[inline]
pub(crate) fn ln1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub fn q_number(t: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if !t.is_finite() {
        return Err(domain(format!("q-number argument must be finite, got {t}")));
    }
    Ok((t * q.ln()).exp_m1() / q.ln().exp_m1())
}

/// `ln [n]_q!`.
pub fn q_factorial_log(n: usize, ctx: &QContext) -> LogValue {
    let ln_one_minus_q = ctx.ln_one_minus_pow(1.0);
    let s: f64 = (1..=n).map(|k| ctx.ln_one_minus_pow(k as f64)).sum();
    LogValue(s - n as f64 * ln_one_minus_q)
}

/// `ln` of the Gaussian binomial coefficient `(n choose x)_q`.
pub fn q_binomial_coeff_log(n: usize, x: usize, ctx: &QContext) -> Result<LogValue> {
    if x > n {
        return Err(domain(format!(
            "q-binomial needs x <= n, got x = {x}, n = {n}"
        )));
    }
    Ok(q_factorial_log(n, ctx) / (q_factorial_log(x, ctx) * q_factorial_log(n - x, ctx)))
}

/// `ln` of `[n]_q! / ([x_1]_q! ... [x_k]_q! [n - sum x]_q!)`.
pub fn q_multinomial_coeff_log(n: usize, xs: &[usize], ctx: &QContext) -> Result<LogValue> {
    let s: usize = xs.iter().sum();
    if s > n {
        return Err(domain(format!(
            "q-multinomial needs sum(xs) <= n, got {s} > {n}"
        )));
    }
    let denom: LogValue = xs
        .iter()
        .chain(std::iter::once(&(n - s)))
        .map(|&x| q_factorial_log(x, ctx))
        .product();
    Ok(q_factorial_log(n, ctx) / denom)
}

/// Precomputed `ln [m]_q!` for `m = 0..=n_max`; used on hot paths that
/// evaluate many coefficients with the same `q`.
#[derive(Debug, Clone)]
pub struct LogQFactorials {
    logs: Vec<f64>,
}

impl LogQFactorials {
    pub fn new(n_max: usize, ctx: &QContext) -> Self {
        let ln_one_minus_q = ctx.ln_one_minus_pow(1.0);
        let mut logs = Vec::with_capacity(n_max + 1);
        let mut acc = 0.0;
        logs.push(acc);
        for k in 1..=n_max {
            acc += ctx.ln_one_minus_pow(k as f64) - ln_one_minus_q;
            logs.push(acc);
        }
        LogQFactorials { logs }
    }

    pub fn n_max(&self) -> usize {
        self.logs.len() - 1
    }

    #[inline]
    pub fn factorial(&self, n: usize) -> f64 {
        self.logs[n]
    }

    /// Caller guarantees `x <= n <= n_max`.
    #[inline]
    pub fn binomial(&self, n: usize, x: usize) -> f64 {
        self.logs[n] - self.logs[x] - self.logs[n - x]
    }
}

/// Number of factors in a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    Finite(usize),
    Infinite,
}

/// Result of a (possibly truncated) q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PochhammerLog {
    pub value: LogValue,
    /// Factors actually multiplied.
    pub terms: usize,
    /// Upper bound on `|ln(true) - ln(value)|` from the truncated tail;
    /// zero for finite products.
    pub tail_bound: f64,
}

/// `ln (a; q)_n = ln prod_{i=1}^{n} (1 - a q^{i-1})`.
///
/// Infinite products stop once the geometric tail bound
/// `|a| q^N / ((1 - q)(1 - |a| q^N))` drops below `ctx.tail_tol()`.
pub fn q_pochhammer_log(a: f64, terms: Terms, ctx: &QContext) -> Result<PochhammerLog> {
    if !a.is_finite() {
        return Err(domain(format!("q-Pochhammer base must be finite, got {a}")));
    }
    let factor_ln = |i: usize| -> Result<f64> {
        let f = a * ctx.pow(i as f64);
        if f >= 1.0 {
            Err(domain(format!(
                "q-Pochhammer factor 1 - a q^{i} = {} is not positive (a = {a})",
                1.0 - f
            )))
        } else {
            Ok((-f).ln_1p())
        }
    };
    match terms {
        Terms::Finite(n) => {
            let mut s = 0.0;
            for i in 0..n {
                s += factor_ln(i)?;
            }
            Ok(PochhammerLog {
                value: LogValue(s),
                terms: n,
                tail_bound: 0.0,
            })
        }
        Terms::Infinite => {
            if a == 0.0 {
                return Ok(PochhammerLog {
                    value: LogValue::ONE,
                    terms: 0,
                    tail_bound: 0.0,
                });
            }
            let one_minus_q = -ctx.ln_q().exp_m1();
            let mut s = 0.0;
            let mut last = a.abs();
            for i in 0..ctx.max_terms() {
                s += factor_ln(i)?;
                let next = a.abs() * ctx.pow((i + 1) as f64);
                last = next;
                if next < 1.0 {
                    let bound = next / (one_minus_q * (1.0 - next));
                    if bound < ctx.tail_tol() {
                        return Ok(PochhammerLog {
                            value: LogValue(s),
                            terms: i + 1,
                            tail_bound: bound,
                        });
                    }
                }
            }
            Err(Error::Convergence {
                max_terms: ctx.max_terms(),
                last_deviation: last,
            })
        }
    }
}

/// `ln e_q(z)` through the product form `1 / ((1 - q) z; q)_inf`.
///
/// Defined whenever every factor is positive, i.e. `(1 - q) z < 1`; this
/// covers all `z < 0`, which the Heine normalizer needs.
pub fn q_exponential(z: f64, ctx: &QContext) -> Result<LogValue> {
    let a = -ctx.ln_q().exp_m1() * z;
    Ok(q_pochhammer_log(a, Terms::Infinite, ctx)?.value.recip())
}

/// `ln` of the q-Stirling approximation to `[n]_q!` (the leading term,
/// without the `1 + O(1/n)` correction):
///
/// ```text
/// q^{-1/8} (2 pi (1-q))^{1/2} (q ln q^{-1})^{-1/2}
///     * q^{n(n-1)/2} q^{-n/2} [n]_{1/q}^{n+1/2} / prod_{j>=1} (1 + (q^{-n} - 1) q^{j-1})
/// ```
///
/// The `q^{n(n-1)/2}`, `[n]_{1/q}^{n+1/2}` and the first `n` product factors
/// are each of order `q^{-n^2/2}`; their exponents are cancelled exactly
/// here (net power `q^{1/2}`) so the result keeps full relative precision.
pub fn q_stirling_log(n: usize, ctx: &QContext) -> Result<LogValue> {
    if n == 0 {
        return Err(domain("q-Stirling formula needs n >= 1"));
    }
    let ln_q = ctx.ln_q();
    let nf = n as f64;
    let ln_const = -ln_q / 8.0 + 0.5 * (2.0 * PI * (-ln_q.exp_m1())).ln()
        - 0.5 * (ctx.q() * ctx.ln_inv_q()).ln();
    // (n + 1/2) ln[n]_{1/q} with the (1 - n) ln q part split off.
    let deformed_rest = ctx.ln_one_minus_pow(nf) - ctx.ln_one_minus_pow(1.0);
    // Factors j = 1..n, each written as q^{j-1-n} (1 + q^{n-j+1} - q^n).
    let head: f64 = (1..n)
        .map(|i| {
            let d = -ctx.pow(i as f64) * ((n - i) as f64 * ln_q).exp_m1();
            d.ln_1p()
        })
        .sum();
    // Factors j > n: 1 + q^{j-1-n} (1 - q^n).
    let one_minus_qn = -(nf * ln_q).exp_m1();
    let tail = q_pochhammer_log(-one_minus_qn, Terms::Infinite, ctx)?
        .value
        .ln();
    Ok(LogValue(
        ln_const + 0.5 * ln_q + (nf + 0.5) * deformed_rest - head - tail,
    ))
}
