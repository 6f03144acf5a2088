//! Convergence experiments: exact-vs-approximate error sweeps, the discrete
//! limit to the multiple Heine law, q-Stirling ratio studies and Monte Carlo
//! checks of the sampler.
//!
//! Every report is a pure function of its configuration. Independent values
//! of `n` run in parallel; records are assembled in input order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{sample, MultipleHeine, Outcome, QBinomial, QMultinomial};
use crate::error::{domain, Error, Result};
use crate::qcalc::{check_q, q_factorial_log, q_stirling_log, QContext};
use crate::swapprox::{
    conditional_frames, multiple_heine_sw_approx_log, qbinomial_sw_approx_log,
    qmultinomial_sw_approx_log, HeineForm, StandardizationFrame,
};

/// Largest number of lattice points any sweep will enumerate.
pub const ENUMERATION_CAP: u64 = 10_000_000;

pub const DEFAULT_CENTRAL_FRACTION: f64 = 0.1;

/// Configuration of a local-limit sweep with `theta_j = q^{-alpha_j n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub q: f64,
    pub alphas: Vec<f64>,
    pub n_values: Vec<usize>,
    pub central_fraction: f64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(q: f64, alphas: Vec<f64>, n_values: Vec<usize>) -> Result<Self> {
        let c = SweepConfig {
            q,
            alphas,
            n_values,
            central_fraction: DEFAULT_CENTRAL_FRACTION,
            seed: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if self.alphas.is_empty() {
            return Err(domain("sweep needs at least one alpha"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(domain(format!("alpha must lie in (0, 1), got {a}")));
        }
        check_n_values(&self.n_values)?;
        if !(self.central_fraction > 0.0 && self.central_fraction <= 1.0) {
            return Err(domain(format!(
                "central fraction must lie in (0, 1], got {}",
                self.central_fraction
            )));
        }
        Ok(())
    }
}

fn check_n_values(n_values: &[usize]) -> Result<()> {
    if n_values.is_empty() {
        return Err(domain("need at least one n value"));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain(format!(
            "n values must be strictly increasing, got {n_values:?}"
        )));
    }
    Ok(())
}

/// Discrete-limit study: fixed `theta`, growing `n`, fixed grid `x_j <= x_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLimitConfig {
    pub q: f64,
    pub thetas: Vec<f64>,
    pub n_values: Vec<usize>,
    pub x_max: usize,
}

impl DiscreteLimitConfig {
    pub fn new(q: f64, thetas: Vec<f64>, n_values: Vec<usize>, x_max: usize) -> Result<Self> {
        check_q(q)?;
        if thetas.is_empty() {
            return Err(domain("discrete limit needs at least one theta"));
        }
        check_n_values(&n_values)?;
        Ok(DiscreteLimitConfig {
            q,
            thetas,
            n_values,
            x_max,
        })
    }
}

/// Errors for one value of `n` (or of the rate scale, for Heine sweeps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub n: usize,
    /// Lattice points in the compared region, including undefined ones.
    pub grid_size: usize,
    pub sup_abs_error: f64,
    pub sup_rel_error: f64,
    pub mean_rel_error: f64,
    /// Points where the approximation is undefined (nonpositive shifted
    /// argument or degenerate conditional coordinate); excluded from the
    /// error statistics.
    pub undefined_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReportConfig {
    Limit(SweepConfig),
    DiscreteLimit(DiscreteLimitConfig),
    HeineLimit {
        q: f64,
        lambda_sets: Vec<Vec<f64>>,
        central_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: ReportConfig,
    pub records: Vec<ErrorRecord>,
}

impl ErrorReport {
    pub fn sup_rel_errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sup_rel_error).collect()
    }

    pub fn sup_abs_errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sup_abs_error).collect()
    }
}

/// `C(n + k, k)`, the number of points of `{x in N^k : sum x <= n}`.
pub fn simplex_size(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + i) as f64 / i as f64)
}

fn check_enumeration(points: f64, k: usize) -> Result<()> {
    if points > ENUMERATION_CAP as f64 {
        let mut n = 0;
        while simplex_size(n + 1, k) <= ENUMERATION_CAP as f64 {
            n += 1;
        }
        return Err(Error::Size {
            points,
            cap: ENUMERATION_CAP,
            k,
            suggested_n: n,
        });
    }
    Ok(())
}

/// Calls `f` on every `xs` with `xs.len() == k` and `sum xs <= n`, in
/// lexicographic order.
pub fn for_each_simplex_point<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    fn rec<F: FnMut(&[usize])>(k: usize, rem: usize, cur: &mut Vec<usize>, f: &mut F) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for x in 0..=rem {
            cur.push(x);
            rec(k, rem - x, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    rec(k, n, &mut cur, &mut f);
}

#[derive(Default)]
struct ErrorAccumulator {
    grid: usize,
    undefined: usize,
    defined: usize,
    sup_abs: f64,
    sup_rel: f64,
    sum_rel: f64,
}

impl ErrorAccumulator {
    fn push(&mut self, exact: f64, approx: Result<f64>) -> Result<()> {
        self.grid += 1;
        match approx {
            Ok(a) => {
                let abs = (a - exact).abs();
                let rel = abs / exact;
                self.defined += 1;
                self.sup_abs = self.sup_abs.max(abs);
                self.sup_rel = self.sup_rel.max(rel);
                self.sum_rel += rel;
                Ok(())
            }
            Err(Error::OutOfSupport { .. }) | Err(Error::Domain(_)) => {
                self.undefined += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn finish(self, n: usize) -> ErrorRecord {
        ErrorRecord {
            n,
            grid_size: self.grid,
            sup_abs_error: self.sup_abs,
            sup_rel_error: self.sup_rel,
            mean_rel_error: if self.defined > 0 {
                self.sum_rel / self.defined as f64
            } else {
                0.0
            },
            undefined_points: self.undefined,
        }
    }
}

fn limit_record(n: usize, config: &SweepConfig, ctx: QContext) -> Result<ErrorRecord> {
    let k = config.k();
    check_enumeration(simplex_size(n, k), k)?;
    let qm = QMultinomial::from_alphas(n, &config.alphas, ctx)?;
    let mut ln_max = f64::NEG_INFINITY;
    let mut failure = None;
    for_each_simplex_point(n, k, |xs| match qm.ln_pmf_counts(xs) {
        Ok(l) => ln_max = ln_max.max(l.ln()),
        Err(e) => failure = Some(e),
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let threshold = ln_max + config.central_fraction.ln();
    let mut region = Vec::new();
    for_each_simplex_point(n, k, |xs| {
        if let Ok(l) = qm.ln_pmf_counts(xs) {
            if l.ln() >= threshold {
                region.push((Outcome::new(xs.to_vec()), l.value()));
            }
        }
    });
    let mut acc = ErrorAccumulator::default();
    for (o, p) in region {
        let approx = conditional_frames(&qm, &o)
            .and_then(|frames| qmultinomial_sw_approx_log(&o, &frames, qm.ctx()))
            .map(|l| l.value());
        acc.push(p, approx)?;
    }
    Ok(acc.finish(n))
}

/// Compare the exact q-multinomial pmf against its Stieltjes-Wigert
/// approximation on the central region (outcomes with
/// `pmf >= central_fraction * max pmf`) for every `n`.
pub fn run_limit_sweep(config: &SweepConfig) -> Result<ErrorReport> {
    config.validate()?;
    let ctx = QContext::new(config.q)?;
    let records = config
        .n_values
        .par_iter()
        .map(|&n| limit_record(n, config, ctx))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport {
        config: ReportConfig::Limit(config.clone()),
        records,
    })
}

/// The univariate comparison done directly on [`QBinomial`] and
/// [`qbinomial_sw_approx_log`]; must agree with `run_limit_sweep` at `k = 1`.
pub fn univariate_limit_record(
    n: usize,
    alpha: f64,
    q: f64,
    central_fraction: f64,
) -> Result<ErrorRecord> {
    let ctx = QContext::new(q)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let b = QBinomial::with_log_theta(n, -alpha * n as f64 * ctx.ln_q(), ctx)?;
    let ln_pmf: Vec<f64> = (0..=n)
        .map(|x| b.ln_pmf(x).map(|l| l.ln()))
        .collect::<Result<_>>()?;
    let threshold =
        ln_pmf.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + central_fraction.ln();
    let frame = StandardizationFrame::from_moments(b.deformed_moments());
    let mut acc = ErrorAccumulator::default();
    for (x, &l) in ln_pmf.iter().enumerate() {
        if l >= threshold {
            let approx = frame
                .clone()
                .and_then(|f| qbinomial_sw_approx_log(x, &f, &ctx))
                .map(|v| v.value());
            acc.push(l.exp(), approx)?;
        }
    }
    Ok(acc.finish(n))
}

fn discrete_limit_record(
    n: usize,
    config: &DiscreteLimitConfig,
    ctx: QContext,
) -> Result<ErrorRecord> {
    let k = config.thetas.len();
    let qm = QMultinomial::new(n, &config.thetas, ctx)?;
    let mh = qm.discrete_limit()?;
    let mut acc = ErrorAccumulator::default();
    let mut cur = vec![0usize; k];
    loop {
        let o = Outcome::new(cur.clone());
        let h = mh.pmf(&o)?;
        // the gap |f_B - f_H| = f_H |f_B / f_H - 1|, outside the simplex f_B = 0
        let rel = if o.total() <= n {
            qm.ln_ratio_to_limit(&o)?.exp_m1().abs()
        } else {
            1.0
        };
        acc.grid += 1;
        acc.defined += 1;
        acc.sup_abs = acc.sup_abs.max(h * rel);
        acc.sup_rel = acc.sup_rel.max(rel);
        acc.sum_rel += rel;
        // odometer over {0..=x_max}^k
        let mut j = 0;
        while j < k {
            cur[j] += 1;
            if cur[j] <= config.x_max {
                break;
            }
            cur[j] = 0;
            j += 1;
        }
        if j == k {
            break;
        }
    }
    Ok(acc.finish(n))
}

/// Pointwise gap between the q-multinomial at fixed `theta` and its multiple
/// Heine limit over the grid `x_j <= x_max`, per `n`. Relative errors are
/// taken with respect to the Heine value.
pub fn run_discrete_limit(config: &DiscreteLimitConfig) -> Result<ErrorReport> {
    let ctx = QContext::new(config.q)?;
    let k = config.thetas.len();
    check_enumeration(((config.x_max + 1) as f64).powi(k as i32), k)?;
    let records = config
        .n_values
        .par_iter()
        .map(|&n| discrete_limit_record(n, config, ctx))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport {
        config: ReportConfig::DiscreteLimit(config.clone()),
        records,
    })
}

/// Multiple Heine vs its Stieltjes-Wigert approximation on the central
/// region, one record per rate vector. The product grid runs over each
/// coordinate's central set (pmf >= fraction * mode) and then filters the
/// joint pmf against `central_fraction * max`. Each record's `n` holds the
/// index of its rate vector in `lambda_sets`.
pub fn run_heine_sweep(
    q: f64,
    lambda_sets: &[Vec<f64>],
    central_fraction: f64,
    form: HeineForm,
) -> Result<ErrorReport> {
    let ctx = QContext::new(q)?;
    let records = lambda_sets
        .par_iter()
        .enumerate()
        .map(|(idx, lambdas)| {
            let mh = MultipleHeine::new(lambdas, ctx)?;
            // per-coordinate ranges where the marginal pmf can reach the cut
            let ranges: Vec<Vec<(usize, f64)>> = mh
                .components()
                .iter()
                .map(|h| {
                    let (xmax, _) = h.support_cutoff(central_fraction * 1e-6);
                    (0..=xmax).map(|x| (x, h.ln_pmf(x).ln())).collect()
                })
                .collect();
            let ln_max: f64 = ranges
                .iter()
                .map(|r| r.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max))
                .sum();
            let threshold = ln_max + central_fraction.ln();
            let mut acc = ErrorAccumulator::default();
            let mut cur = vec![0usize; ranges.len()];
            'outer: loop {
                let ln_p: f64 = cur.iter().zip(&ranges).map(|(&i, r)| r[i].1).sum();
                if ln_p >= threshold {
                    let o = Outcome::new(cur.iter().zip(&ranges).map(|(&i, r)| r[i].0).collect());
                    let approx = multiple_heine_sw_approx_log(&o, &mh, form).map(|l| l.value());
                    acc.push(ln_p.exp(), approx)?;
                }
                for j in 0..cur.len() {
                    cur[j] += 1;
                    if cur[j] < ranges[j].len() {
                        continue 'outer;
                    }
                    cur[j] = 0;
                }
                break;
            }
            Ok(acc.finish(idx))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport {
        config: ReportConfig::HeineLimit {
            q,
            lambda_sets: lambda_sets.to_vec(),
            central_fraction,
        },
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirlingRow {
    pub q: f64,
    pub n: usize,
    /// `[n]_q! / stirling(n)`.
    pub ratio: f64,
    /// `|ratio - 1|`, computed from the log difference with `expm1`.
    pub abs_deviation: f64,
    /// `n |ratio - 1|`.
    pub scaled_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirlingReport {
    pub rows: Vec<StirlingRow>,
}

impl StirlingReport {
    /// Rows for one `q`, in `n` order.
    pub fn for_q(&self, q: f64) -> Vec<&StirlingRow> {
        self.rows.iter().filter(|r| r.q == q).collect()
    }
}

pub fn run_stirling_study(n_values: &[usize], q_values: &[f64]) -> Result<StirlingReport> {
    let mut rows = Vec::with_capacity(n_values.len() * q_values.len());
    for &q in q_values {
        let ctx = QContext::new(q)?;
        for &n in n_values {
            let d = q_factorial_log(n, &ctx).ln() - q_stirling_log(n, &ctx)?.ln();
            let dev = d.exp_m1();
            rows.push(StirlingRow {
                q,
                n,
                ratio: 1.0 + dev,
                abs_deviation: dev.abs(),
                scaled_deviation: n as f64 * dev.abs(),
            });
        }
    }
    Ok(StirlingReport { rows })
}

pub const MIN_MC_COUNT: usize = 10_000;
pub const MC_FLAG_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub xs: Outcome,
    pub exact: f64,
    pub empirical: f64,
    /// `(empirical - exact) / sqrt(exact (1 - exact) / count)`; zero when
    /// both sides agree on a degenerate cell.
    pub z_score: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n: usize,
    pub thetas: Vec<f64>,
    pub q: f64,
    pub count: usize,
    pub seed: u64,
    pub cells: Vec<McCell>,
    pub max_abs_z: f64,
    pub flagged_cells: usize,
}

/// Empirical cell frequencies of [`sample`] against the exact pmf.
pub fn run_mc_validation(params: &QMultinomial, count: usize, seed: u64) -> Result<McReport> {
    if count < MIN_MC_COUNT {
        return Err(domain(format!(
            "Monte Carlo validation needs at least {MIN_MC_COUNT} draws, got {count}"
        )));
    }
    check_enumeration(simplex_size(params.n(), params.k()), params.k())?;
    let draws = sample(params, count, seed)?;
    let mut counts = std::collections::HashMap::new();
    for o in draws {
        *counts.entry(o).or_insert(0usize) += 1;
    }
    let mut cells = Vec::new();
    let mut max_abs_z: f64 = 0.0;
    let mut flagged_cells = 0;
    for o in params.support() {
        let exact = params.pmf(&o)?;
        let empirical = *counts.get(&o).unwrap_or(&0) as f64 / count as f64;
        let var = exact * (1.0 - exact) / count as f64;
        let z = if var > 0.0 {
            (empirical - exact) / var.sqrt()
        } else if empirical == exact {
            0.0
        } else {
            f64::INFINITY
        };
        let flagged = z.abs() > MC_FLAG_SIGMAS;
        flagged_cells += usize::from(flagged);
        max_abs_z = max_abs_z.max(z.abs());
        cells.push(McCell {
            xs: o,
            exact,
            empirical,
            z_score: z,
            flagged,
        });
    }
    Ok(McReport {
        n: params.n(),
        thetas: params.thetas(),
        q: params.ctx().q(),
        count,
        seed,
        cells,
        max_abs_z,
        flagged_cells,
    })
}

/// True when `values` strictly decreases except for at most
/// `allowed_violations` adjacent pairs.
pub fn is_decreasing(values: &[f64], allowed_violations: usize) -> bool {
    values
        .windows(2)
        .filter(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less))
        .count()
        <= allowed_violations
}
