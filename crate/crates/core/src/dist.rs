//! Exact q-binomial (first kind), q-multinomial, Heine and multiple Heine
//! probability functions, the moments of their deformed variables
//! `[X]_{1/q}`, and a seeded sampler for the q-multinomial.
//!
//! The q-multinomial is handled through its conditional chain:
//! `X_1 ~ qBin(n, theta_1)`, `X_j | X_1..X_{j-1} ~ qBin(n - s_{j-1}, theta_j)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::qcalc::{
    ln1p_exp, q_exponential, q_factorial_log, q_pochhammer_log, LogQFactorials, LogValue, QContext,
    Terms,
};

/// Category counts `(x_1, ..., x_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(Vec<usize>);

impl Outcome {
    pub fn new(xs: Vec<usize>) -> Self {
        Outcome(xs)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for Outcome {
    fn from(xs: Vec<usize>) -> Self {
        Outcome(xs)
    }
}

impl<const K: usize> From<[usize; K]> for Outcome {
    fn from(xs: [usize; K]) -> Self {
        Outcome(xs.to_vec())
    }
}

/// Mean and variance of a deformed variable `[X]_{1/q}`, possibly
/// conditional on earlier coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub mean: f64,
    pub variance: f64,
}

impl MomentPair {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

fn check_ln_param(name: &str, ln_value: f64) -> Result<()> {
    if ln_value.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite (log = {ln_value})"
        )))
    }
}

fn ln_positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value.ln())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// `ln (-theta; q)_m = sum_{i<m} ln(1 + theta q^i)`, overflow-free for large theta.
fn ln_neg_pochhammer(ln_theta: f64, m: usize, ctx: &QContext) -> f64 {
    (0..m)
        .map(|i| ln1p_exp(ln_theta + i as f64 * ctx.ln_q()))
        .sum()
}

/// Cumulative `ln (-theta; q)_m` for `m = 0..=n`.
fn ln_neg_pochhammer_prefix(ln_theta: f64, n: usize, ctx: &QContext) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for i in 0..n {
        acc += ln1p_exp(ln_theta + i as f64 * ctx.ln_q());
        out.push(acc);
    }
    out
}

#[inline]
fn choose2(x: usize) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Moments of `[X]_{1/q}` for `X ~ qBin(m, theta)`:
///
/// ```text
/// mean = [m]_q theta / (1 + theta q^{m-1})
/// var  = (1-q)/q [m]_q^2 theta^2 / ((1 + theta q^{m-1})^2 (1 + theta q^{m-2}))
///      + [m]_q theta / ((1 + theta q^{m-1}) (1 + theta q^{m-2}))
/// ```
pub fn qbinomial_deformed_moments(m: usize, ln_theta: f64, ctx: &QContext) -> MomentPair {
    if m == 0 {
        return MomentPair {
            mean: 0.0,
            variance: 0.0,
        };
    }
    let q = ctx.q();
    let nq = ctx.q_number(m as f64);
    let theta = ln_theta.exp();
    let a = 1.0 + (ln_theta + (m as f64 - 1.0) * ctx.ln_q()).exp();
    let b = 1.0 + (ln_theta + (m as f64 - 2.0) * ctx.ln_q()).exp();
    let r = theta / a;
    MomentPair {
        mean: nq * r,
        variance: (1.0 - q) / q * nq * nq * r * r / b + nq * r / b,
    }
}

/// q-binomial distribution of the first kind,
/// `f(x) = (n choose x)_q q^{x(x-1)/2} theta^x / prod_{i=1}^{n} (1 + theta q^{i-1})`.
#[derive(Debug, Clone)]
pub struct QBinomial {
    n: usize,
    ln_theta: f64,
    ctx: QContext,
    ln_norm: f64,
}

impl QBinomial {
    pub fn new(n: usize, theta: f64, ctx: QContext) -> Result<Self> {
        let ln_theta = ln_positive("theta", theta)?;
        Self::with_log_theta(n, ln_theta, ctx)
    }

    /// Construct from `ln theta`; the limit theorems use `theta = q^{-alpha n}`,
    /// which is best formed as `-alpha n ln q`.
    pub fn with_log_theta(n: usize, ln_theta: f64, ctx: QContext) -> Result<Self> {
        check_ln_param("theta", ln_theta)?;
        Ok(QBinomial {
            n,
            ln_theta,
            ctx,
            ln_norm: ln_neg_pochhammer(ln_theta, n, &ctx),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.ln_theta.exp()
    }

    pub fn ln_theta(&self) -> f64 {
        self.ln_theta
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn ln_pmf(&self, x: usize) -> Result<LogValue> {
        if x > self.n {
            return Err(domain(format!(
                "q-binomial outcome x = {x} exceeds n = {}",
                self.n
            )));
        }
        let c = &self.ctx;
        let coeff = q_factorial_log(self.n, c).ln()
            - q_factorial_log(x, c).ln()
            - q_factorial_log(self.n - x, c).ln();
        Ok(LogValue::from_ln(
            coeff + choose2(x) * c.ln_q() + x as f64 * self.ln_theta - self.ln_norm,
        ))
    }

    pub fn pmf(&self, x: usize) -> Result<f64> {
        Ok(self.ln_pmf(x)?.value())
    }

    /// `pmf(0), ..., pmf(n)`.
    pub fn pmf_table(&self) -> Vec<f64> {
        let lf = LogQFactorials::new(self.n, &self.ctx);
        (0..=self.n)
            .map(|x| {
                (lf.binomial(self.n, x) + choose2(x) * self.ctx.ln_q() + x as f64 * self.ln_theta
                    - self.ln_norm)
                    .exp()
            })
            .collect()
    }

    pub fn deformed_moments(&self) -> MomentPair {
        qbinomial_deformed_moments(self.n, self.ln_theta, &self.ctx)
    }
}

/// q-multinomial distribution of the first kind:
///
/// ```text
/// f(x_1..x_k) = (n; x_1..x_k)_q prod_j theta_j^{x_j} q^{x_j(x_j-1)/2}
///               / prod_{i=1}^{n - s_{j-1}} (1 + theta_j q^{i-1})
/// ```
#[derive(Debug, Clone)]
pub struct QMultinomial {
    n: usize,
    ln_thetas: Vec<f64>,
    ctx: QContext,
    factorials: LogQFactorials,
    // ln (-theta_j; q)_m for m = 0..=n
    norms: Vec<Vec<f64>>,
}

impl QMultinomial {
    pub fn new(n: usize, thetas: &[f64], ctx: QContext) -> Result<Self> {
        let ln_thetas = thetas
            .iter()
            .map(|&t| ln_positive("theta", t))
            .collect::<Result<Vec<_>>>()?;
        Self::with_log_thetas(n, ln_thetas, ctx)
    }

    pub fn with_log_thetas(n: usize, ln_thetas: Vec<f64>, ctx: QContext) -> Result<Self> {
        if ln_thetas.is_empty() {
            return Err(domain("q-multinomial needs at least one category"));
        }
        for &l in &ln_thetas {
            check_ln_param("theta", l)?;
        }
        let norms = ln_thetas
            .iter()
            .map(|&l| ln_neg_pochhammer_prefix(l, n, &ctx))
            .collect();
        Ok(QMultinomial {
            n,
            factorials: LogQFactorials::new(n, &ctx),
            ln_thetas,
            ctx,
            norms,
        })
    }

    /// `theta_j = q^{-alpha_j n}`, the parametrization of the limit theorems.
    pub fn from_alphas(n: usize, alphas: &[f64], ctx: QContext) -> Result<Self> {
        let ln_thetas = alphas
            .iter()
            .map(|&a| {
                if a > 0.0 && a < 1.0 {
                    Ok(-a * n as f64 * ctx.ln_q())
                } else {
                    Err(domain(format!("alpha must lie in (0, 1), got {a}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_log_thetas(n, ln_thetas, ctx)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.ln_thetas.len()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.ln_thetas.iter().map(|l| l.exp()).collect()
    }

    pub fn ln_thetas(&self) -> &[f64] {
        &self.ln_thetas
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    fn check_outcome(&self, xs: &[usize]) -> Result<()> {
        if xs.len() != self.k() {
            return Err(domain(format!(
                "outcome has {} coordinates, distribution has k = {}",
                xs.len(),
                self.k()
            )));
        }
        let s: usize = xs.iter().sum();
        if s > self.n {
            return Err(domain(format!("outcome total {s} exceeds n = {}", self.n)));
        }
        Ok(())
    }

    pub fn ln_pmf(&self, outcome: &Outcome) -> Result<LogValue> {
        self.ln_pmf_counts(outcome.as_slice())
    }

    /// [`Self::ln_pmf`] on a bare count slice, for enumeration loops.
    pub fn ln_pmf_counts(&self, xs: &[usize]) -> Result<LogValue> {
        self.check_outcome(xs)?;
        let lf = &self.factorials;
        let total: usize = xs.iter().sum();
        let mut ln = lf.factorial(self.n) - lf.factorial(self.n - total);
        let mut s = 0usize;
        for (j, &x) in xs.iter().enumerate() {
            ln += x as f64 * self.ln_thetas[j] + choose2(x) * self.ctx.ln_q()
                - lf.factorial(x)
                - self.norms[j][self.n - s];
            s += x;
        }
        Ok(LogValue::from_ln(ln))
    }

    pub fn pmf(&self, outcome: &Outcome) -> Result<f64> {
        Ok(self.ln_pmf(outcome)?.value())
    }

    /// Law of `X_j` given the first `j - 1` counts (`j` is 1-based; an empty
    /// prefix gives the marginal of `X_1`).
    pub fn conditional(&self, prefix: &[usize]) -> Result<QBinomial> {
        let j = prefix.len();
        if j >= self.k() {
            return Err(domain(format!(
                "prefix of length {j} leaves no coordinate to condition (k = {})",
                self.k()
            )));
        }
        let s: usize = prefix.iter().sum();
        if s > self.n {
            return Err(domain(format!("prefix total {s} exceeds n = {}", self.n)));
        }
        let m = self.n - s;
        Ok(QBinomial {
            n: m,
            ln_theta: self.ln_thetas[j],
            ctx: self.ctx,
            ln_norm: self.norms[j][m],
        })
    }

    /// The multiple Heine law with `lambda_j = theta_j / (1 - q)`, the
    /// `n -> infinity` limit at fixed `theta`.
    pub fn discrete_limit(&self) -> Result<MultipleHeine> {
        let ln_one_minus_q = (-self.ctx.ln_q().exp_m1()).ln();
        let ln_lambdas = self.ln_thetas.iter().map(|l| l - ln_one_minus_q).collect();
        MultipleHeine::with_log_lambdas(ln_lambdas, self.ctx)
    }

    /// `ln(f_qmult(x) / f_mheine(x))` against [`Self::discrete_limit`],
    /// evaluated without cancellation:
    ///
    /// ```text
    /// prod_j prod_{i=0}^{x_j-1} (1 - q^{m_j - i}) * (-theta_j q^{m_j}; q)_inf,   m_j = n - s_{j-1}
    /// ```
    pub fn ln_ratio_to_limit(&self, outcome: &Outcome) -> Result<f64> {
        let xs = outcome.as_slice();
        self.check_outcome(xs)?;
        let mut ln = 0.0;
        let mut s = 0usize;
        for (j, &x) in xs.iter().enumerate() {
            let m = self.n - s;
            for i in 0..x {
                ln += self.ctx.ln_one_minus_pow((m - i) as f64);
            }
            let a = -(self.ln_thetas[j] + m as f64 * self.ctx.ln_q()).exp();
            ln += q_pochhammer_log(a, Terms::Infinite, &self.ctx)?.value.ln();
            s += x;
        }
        Ok(ln)
    }

    /// Every outcome of the support `{x : sum x_j <= n}` in lexicographic order.
    pub fn support(&self) -> Vec<Outcome> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.k());
        fn rec(k: usize, rem: usize, cur: &mut Vec<usize>, out: &mut Vec<Outcome>) {
            if cur.len() == k {
                out.push(Outcome(cur.clone()));
                return;
            }
            for x in 0..=rem {
                cur.push(x);
                rec(k, rem - x, cur, out);
                cur.pop();
            }
        }
        rec(self.k(), self.n, &mut cur, &mut out);
        out
    }
}

/// `q`-trinomial probability function written out for two categories:
///
/// ```text
/// (n; x1, x2)_q theta1^x1 theta2^x2 q^{C(x1,2) + C(x2,2)}
///     / (prod_{i=1}^{n} (1 + theta1 q^{i-1}) prod_{i=1}^{n-x1} (1 + theta2 q^{i-1}))
/// ```
pub fn qtrinomial_ln_pmf(
    n: usize,
    thetas: (f64, f64),
    xs: (usize, usize),
    ctx: &QContext,
) -> Result<LogValue> {
    let (t1, t2) = (
        ln_positive("theta1", thetas.0)?,
        ln_positive("theta2", thetas.1)?,
    );
    let (x1, x2) = xs;
    if x1 + x2 > n {
        return Err(domain(format!(
            "q-trinomial needs x1 + x2 <= n, got {x1} + {x2} > {n}"
        )));
    }
    let coeff = crate::qcalc::q_multinomial_coeff_log(n, &[x1, x2], ctx)?.ln();
    let ln = coeff + x1 as f64 * t1 + x2 as f64 * t2 + (choose2(x1) + choose2(x2)) * ctx.ln_q()
        - ln_neg_pochhammer(t1, n, ctx)
        - ln_neg_pochhammer(t2, n - x1, ctx);
    Ok(LogValue::from_ln(ln))
}

/// Heine distribution, `f(x) = e_q(-lambda) q^{x(x-1)/2} lambda^x / [x]_q!`.
#[derive(Debug, Clone)]
pub struct Heine {
    ln_lambda: f64,
    ctx: QContext,
    ln_eq: f64,
}

impl Heine {
    pub fn new(lambda: f64, ctx: QContext) -> Result<Self> {
        Self::with_log_lambda(ln_positive("lambda", lambda)?, ctx)
    }

    pub fn with_log_lambda(ln_lambda: f64, ctx: QContext) -> Result<Self> {
        check_ln_param("lambda", ln_lambda)?;
        let ln_eq = q_exponential(-ln_lambda.exp(), &ctx)?.ln();
        Ok(Heine {
            ln_lambda,
            ctx,
            ln_eq,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.ln_lambda.exp()
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    /// `ln e_q(-lambda)`, the normalizing factor.
    pub fn ln_normalizer(&self) -> f64 {
        self.ln_eq
    }

    pub fn ln_pmf(&self, x: usize) -> LogValue {
        LogValue::from_ln(
            self.ln_eq + choose2(x) * self.ctx.ln_q() + x as f64 * self.ln_lambda
                - q_factorial_log(x, &self.ctx).ln(),
        )
    }

    pub fn pmf(&self, x: usize) -> f64 {
        self.ln_pmf(x).value()
    }

    /// `pmf(x+1) / pmf(x) = q^x lambda / [x+1]_q`; nonincreasing in `x`.
    fn step_ratio(&self, x: usize) -> f64 {
        (x as f64 * self.ctx.ln_q() + self.ln_lambda).exp() / self.ctx.q_number((x + 1) as f64)
    }

    /// Smallest `x_max` such that the mass above `x_max` is provably below
    /// `tol`, together with that bound. The bound uses the geometric
    /// majorant `pmf(x_max) r / (1 - r)` with `r` the step ratio at `x_max`.
    pub fn support_cutoff(&self, tol: f64) -> (usize, f64) {
        let mut x = 0usize;
        loop {
            let r = self.step_ratio(x);
            if r < 1.0 {
                let bound = self.pmf(x) * r / (1.0 - r);
                if bound < tol {
                    return (x, bound);
                }
            }
            x += 1;
        }
    }

    /// Moments of `[X]_{1/q}`; see [`heine_deformed_moments`].
    pub fn deformed_moments(&self) -> MomentPair {
        heine_deformed_moments(self)
    }
}

/// Product of independent Heine laws with rates `lambda_1..lambda_k`.
#[derive(Debug, Clone)]
pub struct MultipleHeine {
    components: Vec<Heine>,
}

impl MultipleHeine {
    pub fn new(lambdas: &[f64], ctx: QContext) -> Result<Self> {
        let ln = lambdas
            .iter()
            .map(|&l| ln_positive("lambda", l))
            .collect::<Result<Vec<_>>>()?;
        Self::with_log_lambdas(ln, ctx)
    }

    pub fn with_log_lambdas(ln_lambdas: Vec<f64>, ctx: QContext) -> Result<Self> {
        if ln_lambdas.is_empty() {
            return Err(domain("multiple Heine needs at least one rate"));
        }
        let components = ln_lambdas
            .into_iter()
            .map(|l| Heine::with_log_lambda(l, ctx))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultipleHeine { components })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Heine] {
        &self.components
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.components.iter().map(Heine::lambda).collect()
    }

    pub fn ctx(&self) -> &QContext {
        self.components[0].ctx()
    }

    pub fn ln_pmf(&self, outcome: &Outcome) -> Result<LogValue> {
        let xs = outcome.as_slice();
        if xs.len() != self.k() {
            return Err(domain(format!(
                "outcome has {} coordinates, distribution has k = {}",
                xs.len(),
                self.k()
            )));
        }
        Ok(self
            .components
            .iter()
            .zip(xs)
            .map(|(h, &x)| h.ln_pmf(x))
            .product())
    }

    pub fn pmf(&self, outcome: &Outcome) -> Result<f64> {
        Ok(self.ln_pmf(outcome)?.value())
    }
}

/// Moments of `[X_1]_{1/q}` under the q-multinomial (the q-binomial marginal).
pub fn marginal_moments(params: &QMultinomial) -> MomentPair {
    qbinomial_deformed_moments(params.n(), params.ln_thetas()[0], params.ctx())
}

/// Moments of `[X_j]_{1/q}` given `X_1..X_{j-1} = prefix` (1-based `j`,
/// `prefix.len() == j - 1`). For `j = 1` this is [`marginal_moments`].
pub fn conditional_moments(
    params: &QMultinomial,
    j: usize,
    prefix: &[usize],
) -> Result<MomentPair> {
    if j == 0 || j > params.k() {
        return Err(domain(format!(
            "coordinate index j = {j} outside 1..={}",
            params.k()
        )));
    }
    if prefix.len() != j - 1 {
        return Err(domain(format!(
            "conditioning on coordinate {j} needs {} prefix counts, got {}",
            j - 1,
            prefix.len()
        )));
    }
    let s: usize = prefix.iter().sum();
    if s > params.n() {
        return Err(domain(format!(
            "prefix total {s} exceeds n = {}",
            params.n()
        )));
    }
    Ok(qbinomial_deformed_moments(
        params.n() - s,
        params.ln_thetas()[j - 1],
        params.ctx(),
    ))
}

/// Moments of `[X]_{1/q}` for `X ~ Heine(lambda)`: mean `lambda`,
/// variance `lambda^2 q^{-1} (1 - q) + lambda`.
///
/// This is the `n -> infinity` limit of [`qbinomial_deformed_moments`] at
/// `theta = lambda (1 - q)` and agrees with direct summation. The variance
/// `lambda q^{-1} (1 - q) + lambda` that appears in some statements of the
/// multiple Heine approximation is available as
/// [`heine_printed_variance`]; it does not match the distribution.
pub fn heine_deformed_moments(params: &Heine) -> MomentPair {
    let lambda = params.lambda();
    let q = params.ctx().q();
    MomentPair {
        mean: lambda,
        variance: lambda * lambda * (1.0 - q) / q + lambda,
    }
}

/// `lambda q^{-1} (1 - q) + lambda`, kept for comparison only.
pub fn heine_printed_variance(lambda: f64, q: f64) -> f64 {
    lambda * (1.0 - q) / q + lambda
}

/// Inverse-CDF sampler over the conditional q-binomial chain.
#[derive(Debug, Clone)]
pub struct QMultinomialSampler {
    k: usize,
    n: usize,
    // cdfs[j][m] = cumulative pmf of qBin(m, theta_j) over x = 0..=m
    cdfs: Vec<Vec<Vec<f64>>>,
}

impl QMultinomialSampler {
    pub fn new(params: &QMultinomial) -> Self {
        let cdfs = params
            .ln_thetas()
            .iter()
            .map(|&lt| {
                (0..=params.n())
                    .map(|m| {
                        let b = QBinomial::with_log_theta(m, lt, *params.ctx())
                            .expect("theta validated by QMultinomial");
                        let mut acc = 0.0;
                        b.pmf_table()
                            .into_iter()
                            .map(|p| {
                                acc += p;
                                acc
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        QMultinomialSampler {
            k: params.k(),
            n: params.n(),
            cdfs,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let mut rem = self.n;
        let mut xs = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let cdf = &self.cdfs[j][rem];
            let u: f64 = rng.random();
            let x = cdf.partition_point(|&c| c <= u).min(rem);
            xs.push(x);
            rem -= x;
        }
        Outcome(xs)
    }
}

/// `count` independent draws, reproducible for a given `seed`.
pub fn sample(params: &QMultinomial, count: usize, seed: u64) -> Result<Vec<Outcome>> {
    if count == 0 {
        return Err(domain("sample count must be at least 1"));
    }
    let sampler = QMultinomialSampler::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| sampler.draw(&mut rng)).collect())
}
