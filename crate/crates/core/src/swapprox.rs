//! Stieltjes-Wigert density and the deformed standardized Stieltjes-Wigert
//! approximations to the q-binomial, q-trinomial, q-multinomial and
//! multiple Heine probability functions.
//!
//! Every approximation evaluates, per coordinate, the shifted argument
//!
//! ```text
//! u = q^{-3/2} (1 - q)^{1/2} ([x]_{1/q} - mean) / sd + q^{-1}
//! ```
//!
//! and the lattice density
//!
//! ```text
//! q^{-7/8} (2 pi)^{-1/2} sd^{-1} (ln q^{-1} / (q^{-1} - 1))^{1/2} u^{-1/2} q^{-x} exp(ln^2 u / (2 ln q)).
//! ```
//!
//! Where `u <= 0` the approximation is undefined and an
//! [`Error::OutOfSupport`] is returned rather than zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::{
    conditional_moments, heine_deformed_moments, MomentPair, MultipleHeine, Outcome, QMultinomial,
};
use crate::error::{domain, Error, Result};
use crate::qcalc::{LogValue, QContext};

/// Stieltjes-Wigert law with density
/// `q^{1/8} (2 pi ln q^{-1} w)^{-1/2} exp(ln^2 w / (2 ln q))`, `w > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesWigert {
    ctx: QContext,
}

impl StieltjesWigert {
    pub fn new(q: f64) -> Result<Self> {
        Ok(StieltjesWigert {
            ctx: QContext::new(q)?,
        })
    }

    pub fn from_ctx(ctx: QContext) -> Self {
        StieltjesWigert { ctx }
    }

    pub fn q(&self) -> f64 {
        self.ctx.q()
    }

    pub fn ln_density(&self, w: f64) -> Result<f64> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(domain(format!(
                "Stieltjes-Wigert density needs w > 0, got {w}"
            )));
        }
        let ln_q = self.ctx.ln_q();
        let lw = w.ln();
        Ok(ln_q / 8.0 - 0.5 * (2.0 * PI * self.ctx.ln_inv_q() * w).ln() + lw * lw / (2.0 * ln_q))
    }

    pub fn density(&self, w: f64) -> Result<f64> {
        Ok(self.ln_density(w)?.exp())
    }

    /// `q^{-1}`.
    pub fn mean(&self) -> f64 {
        1.0 / self.ctx.q()
    }

    /// `q^{-3/2} (1 - q)^{1/2}`.
    pub fn sd(&self) -> f64 {
        let q = self.ctx.q();
        ((1.0 - q) / (q * q * q)).sqrt()
    }

    pub fn variance(&self) -> f64 {
        let q = self.ctx.q();
        (1.0 - q) / (q * q * q)
    }
}

/// Mean and standard deviation used to standardize one deformed coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizationFrame {
    pub mean: f64,
    pub sd: f64,
}

impl StandardizationFrame {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(domain(format!("frame mean must be finite, got {mean}")));
        }
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(domain(format!(
                "frame standard deviation must be positive, got {sd} (degenerate coordinate)"
            )));
        }
        Ok(StandardizationFrame { mean, sd })
    }

    pub fn from_moments(m: MomentPair) -> Result<Self> {
        Self::new(m.mean, m.sd())
    }
}

/// How the second coordinate enters the two-category approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrinomialForm {
    /// Standardize `[x_2]_{1/q}`, consistent with every other coordinate.
    #[default]
    Deformed,
    /// Standardize `[x_2]_q`, as some printings of the bivariate formula read.
    Printed,
}

/// How the `ln^2` argument is formed in the multiple Heine approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeineForm {
    /// `ln^2 u` with the `+ q^{-1}` shift, as in the q-multinomial case.
    #[default]
    Shifted,
    /// `ln^2 (u - q^{-1})`: the shift dropped inside the logarithm.
    Printed,
}

#[inline]
fn scale(ctx: &QContext) -> f64 {
    let q = ctx.q();
    ((1.0 - q) / (q * q * q)).sqrt()
}

/// `q^{-3/2} (1 - q)^{1/2} (y - mean) / sd + q^{-1}` for a deformed value `y`.
pub fn shifted_argument(y: f64, frame: &StandardizationFrame, ctx: &QContext) -> f64 {
    scale(ctx) * (y - frame.mean) / frame.sd + 1.0 / ctx.q()
}

/// `ln [ q^{-7/8} (2 pi)^{-1/2} (ln q^{-1} / (q^{-1} - 1))^{1/2} ]`.
fn ln_unit_prefactor(ctx: &QContext) -> f64 {
    let l = ctx.ln_inv_q();
    -7.0 / 8.0 * ctx.ln_q() - 0.5 * (2.0 * PI).ln() + 0.5 * (l.ln() - l.exp_m1().ln())
}

fn positive_shift(x: usize, u: f64) -> Result<f64> {
    if u > 0.0 {
        Ok(u.ln())
    } else {
        Err(Error::OutOfSupport { x, shifted: u })
    }
}

/// Univariate q-binomial approximation at lattice point `x`.
pub fn qbinomial_sw_approx_log(
    x: usize,
    frame: &StandardizationFrame,
    ctx: &QContext,
) -> Result<LogValue> {
    let ln_u = positive_shift(x, shifted_argument(ctx.deformed(x), frame, ctx))?;
    Ok(LogValue::from_ln(
        ln_unit_prefactor(ctx) - frame.sd.ln() - 0.5 * ln_u - x as f64 * ctx.ln_q()
            + ln_u * ln_u / (2.0 * ctx.ln_q()),
    ))
}

pub fn qbinomial_sw_approx(x: usize, frame: &StandardizationFrame, ctx: &QContext) -> Result<f64> {
    Ok(qbinomial_sw_approx_log(x, frame, ctx)?.value())
}

/// Bivariate approximation of the q-trinomial; `frames` are the marginal
/// frame of `X_1` and the conditional frame of `X_2` given `X_1 = x1`.
pub fn qtrinomial_sw_approx_log(
    x1: usize,
    x2: usize,
    frames: (&StandardizationFrame, &StandardizationFrame),
    ctx: &QContext,
    form: TrinomialForm,
) -> Result<LogValue> {
    let (f1, f2) = frames;
    let y2 = match form {
        TrinomialForm::Deformed => ctx.deformed(x2),
        TrinomialForm::Printed => ctx.q_number(x2 as f64),
    };
    let l1 = positive_shift(x1, shifted_argument(ctx.deformed(x1), f1, ctx))?;
    let l2 = positive_shift(x2, shifted_argument(y2, f2, ctx))?;
    let l = ctx.ln_inv_q();
    // q^{-7/4} ln q^{-1} / (2 pi (q^{-1} - 1) sd1 sd2)
    let ln_pre = -7.0 / 4.0 * ctx.ln_q() + l.ln()
        - (2.0 * PI).ln()
        - l.exp_m1().ln()
        - f1.sd.ln()
        - f2.sd.ln();
    Ok(LogValue::from_ln(
        ln_pre - (x1 + x2) as f64 * ctx.ln_q() - 0.5 * (l1 + l2)
            + (l1 * l1 + l2 * l2) / (2.0 * ctx.ln_q()),
    ))
}

pub fn qtrinomial_sw_approx(
    x1: usize,
    x2: usize,
    frames: (&StandardizationFrame, &StandardizationFrame),
    ctx: &QContext,
    form: TrinomialForm,
) -> Result<f64> {
    Ok(qtrinomial_sw_approx_log(x1, x2, frames, ctx, form)?.value())
}

/// Multivariate approximation of the q-multinomial; `frames[j]` standardizes
/// coordinate `j` (marginal for `j = 0`, conditional on the earlier counts
/// otherwise, see [`conditional_frames`]).
pub fn qmultinomial_sw_approx_log(
    outcome: &Outcome,
    frames: &[StandardizationFrame],
    ctx: &QContext,
) -> Result<LogValue> {
    let xs = outcome.as_slice();
    if xs.len() != frames.len() {
        return Err(domain(format!(
            "{} coordinates but {} standardization frames",
            xs.len(),
            frames.len()
        )));
    }
    let k = xs.len() as f64;
    let mut ln_u_sum = 0.0;
    let mut ln_u_sq = 0.0;
    let mut ln_sd = 0.0;
    for (&x, f) in xs.iter().zip(frames) {
        let lu = positive_shift(x, shifted_argument(ctx.deformed(x), f, ctx))?;
        ln_u_sum += lu;
        ln_u_sq += lu * lu;
        ln_sd += f.sd.ln();
    }
    Ok(LogValue::from_ln(
        k * ln_unit_prefactor(ctx) - ln_sd - outcome.total() as f64 * ctx.ln_q() - 0.5 * ln_u_sum
            + ln_u_sq / (2.0 * ctx.ln_q()),
    ))
}

pub fn qmultinomial_sw_approx(
    outcome: &Outcome,
    frames: &[StandardizationFrame],
    ctx: &QContext,
) -> Result<f64> {
    Ok(qmultinomial_sw_approx_log(outcome, frames, ctx)?.value())
}

/// Marginal frame for `X_1` and conditional frames for `X_j | x_1..x_{j-1}`.
/// Fails with a domain error when a conditional coordinate is degenerate
/// (no trials remain).
pub fn conditional_frames(
    params: &QMultinomial,
    outcome: &Outcome,
) -> Result<Vec<StandardizationFrame>> {
    let xs = outcome.as_slice();
    if xs.len() != params.k() {
        return Err(domain(format!(
            "outcome has {} coordinates, distribution has k = {}",
            xs.len(),
            params.k()
        )));
    }
    (1..=xs.len())
        .map(|j| StandardizationFrame::from_moments(conditional_moments(params, j, &xs[..j - 1])?))
        .collect()
}

/// Frames `mean = lambda_j`, `sd^2 = lambda_j^2 q^{-1} (1 - q) + lambda_j`.
pub fn heine_frames(params: &MultipleHeine) -> Result<Vec<StandardizationFrame>> {
    params
        .components()
        .iter()
        .map(|h| StandardizationFrame::from_moments(heine_deformed_moments(h)))
        .collect()
}

/// Multiple Heine approximation for large rates.
pub fn multiple_heine_sw_approx_log(
    outcome: &Outcome,
    params: &MultipleHeine,
    form: HeineForm,
) -> Result<LogValue> {
    let frames = heine_frames(params)?;
    let ctx = params.ctx();
    match form {
        HeineForm::Shifted => qmultinomial_sw_approx_log(outcome, &frames, ctx),
        HeineForm::Printed => {
            let xs = outcome.as_slice();
            if xs.len() != frames.len() {
                return Err(domain(format!(
                    "outcome has {} coordinates, distribution has k = {}",
                    xs.len(),
                    frames.len()
                )));
            }
            let mut ln = 0.0;
            for (&x, f) in xs.iter().zip(&frames) {
                let u = shifted_argument(ctx.deformed(x), f, ctx);
                let lu = positive_shift(x, u)?;
                let lv = positive_shift(x, u - 1.0 / ctx.q())?;
                ln += ln_unit_prefactor(ctx) - f.sd.ln() - 0.5 * lu - x as f64 * ctx.ln_q()
                    + lv * lv / (2.0 * ctx.ln_q());
            }
            Ok(LogValue::from_ln(ln))
        }
    }
}

pub fn multiple_heine_sw_approx(
    outcome: &Outcome,
    params: &MultipleHeine,
    form: HeineForm,
) -> Result<f64> {
    Ok(multiple_heine_sw_approx_log(outcome, params, form)?.value())
}
