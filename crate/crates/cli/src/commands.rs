use qlimit_core::analysis::{
    run_discrete_limit, run_heine_sweep, run_limit_sweep, run_stirling_study, DiscreteLimitConfig,
    ErrorReport, SweepConfig,
};
use qlimit_core::dist::heine_printed_variance;
use qlimit_core::swapprox::{
    conditional_frames, multiple_heine_sw_approx, qmultinomial_sw_approx, qtrinomial_sw_approx,
    HeineForm, TrinomialForm,
};
use qlimit_core::{
    conditional_moments, sample as draw, Error, Heine, MomentPair, MultipleHeine, Outcome,
    QBinomial, QContext, QMultinomial, StieltjesWigert,
};
use serde::Serialize;

use crate::output::{Cell, Output, Record};
use crate::{
    ApproxArgs, ApproxDist, ConvergeArgs, Dist, Failure, FormArg, Mode, MomentsArgs, Params,
    PmfArgs, SampleArgs, StirlingArgs,
};

type CmdResult = Result<Output, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn echo<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

impl Params {
    fn ctx(&self) -> Result<QContext, Failure> {
        Ok(QContext::new(self.q)?)
    }

    fn n(&self) -> Result<usize, Failure> {
        self.n
            .map_or_else(|| usage("--n is required for this distribution"), Ok)
    }

    /// q-multinomial from `--thetas` (or `--theta` for one category) or `--alphas`.
    fn multinomial(&self) -> Result<QMultinomial, Failure> {
        let n = self.n()?;
        let ctx = self.ctx()?;
        let mut thetas = self.thetas.clone();
        thetas.extend(self.theta);
        match (thetas.is_empty(), self.alphas.is_empty()) {
            (false, true) => Ok(QMultinomial::new(n, &thetas, ctx)?),
            (true, false) => Ok(QMultinomial::from_alphas(n, &self.alphas, ctx)?),
            (true, true) => usage("give --theta/--thetas or --alphas"),
            (false, false) => usage("--theta/--thetas and --alphas are mutually exclusive"),
        }
    }

    fn binomial(&self) -> Result<QBinomial, Failure> {
        let m = self.multinomial()?;
        if m.k() != 1 {
            return usage("q-binomial takes a single --theta or --alphas value");
        }
        Ok(m.conditional(&[])?)
    }

    fn heine(&self) -> Result<Heine, Failure> {
        let lambda = self
            .lambda
            .map_or_else(|| usage("--lambda is required"), Ok)?;
        Ok(Heine::new(lambda, self.ctx()?)?)
    }

    fn multiple_heine(&self) -> Result<MultipleHeine, Failure> {
        if self.lambdas.is_empty() {
            return usage("--lambdas is required");
        }
        Ok(MultipleHeine::new(&self.lambdas, self.ctx()?)?)
    }
}

fn pmf_row(xs: &[usize], ln: f64) -> Record {
    Record::new()
        .with_counts(xs)
        .with("pmf", ln.exp())
        .with("ln_pmf", ln)
}

fn univariate_points(x: Option<usize>, all: bool, upper: usize) -> Result<Vec<usize>, Failure> {
    match (x, all) {
        (Some(x), false) => Ok(vec![x]),
        (None, true) => Ok((0..=upper).collect()),
        _ => usage("give exactly one of --x or --all"),
    }
}

pub fn pmf(a: &PmfArgs) -> CmdResult {
    let mut warnings = Vec::new();
    let records = match a.dist {
        Dist::Qbinomial => {
            let b = a.params.binomial()?;
            univariate_points(a.x, a.all, b.n())?
                .into_iter()
                .map(|x| Ok(pmf_row(&[x], b.ln_pmf(x)?.ln())))
                .collect::<Result<Vec<_>, Error>>()?
        }
        Dist::Heine => {
            let h = a.params.heine()?;
            let (cut, bound) = h.support_cutoff(1e-12);
            if a.all {
                warnings.push(format!(
                    "support truncated at x = {cut}; neglected mass below {bound:.3e}"
                ));
            }
            univariate_points(a.x, a.all, cut)?
                .into_iter()
                .map(|x| pmf_row(&[x], h.ln_pmf(x).ln()))
                .collect()
        }
        Dist::Qmultinomial => {
            let m = a.params.multinomial()?;
            let outcomes = match (a.xs.is_empty(), a.all) {
                (false, false) => vec![Outcome::new(a.xs.clone())],
                (true, true) => m.support(),
                _ => return usage("give exactly one of --xs or --all"),
            };
            outcomes
                .iter()
                .map(|o| Ok(pmf_row(o.as_slice(), m.ln_pmf(o)?.ln())))
                .collect::<Result<Vec<_>, Error>>()?
        }
        Dist::MultipleHeine => {
            let mh = a.params.multiple_heine()?;
            if a.xs.is_empty() || a.all {
                return usage("multiple Heine takes --xs");
            }
            let o = Outcome::new(a.xs.clone());
            vec![pmf_row(o.as_slice(), mh.ln_pmf(&o)?.ln())]
        }
    };
    Ok(Output {
        config: echo(a),
        records,
        warnings,
    })
}

fn moment_row(m: MomentPair) -> Record {
    Record::new()
        .with("mean", m.mean)
        .with("variance", m.variance)
        .with("sd", m.sd())
}

pub fn moments(a: &MomentsArgs) -> CmdResult {
    let mut warnings = Vec::new();
    let records = match a.dist {
        Dist::Qbinomial => vec![moment_row(a.params.binomial()?.deformed_moments())],
        Dist::Qmultinomial => {
            let m = a.params.multinomial()?;
            let mp = conditional_moments(&m, a.j, &a.prefix)?;
            vec![Record::new()
                .with("j", a.j)
                .with_counts(&a.prefix)
                .extend(moment_row(mp))]
        }
        Dist::Heine => {
            let h = a.params.heine()?;
            warnings.push(
                "variance is lambda^2 q^-1 (1-q) + lambda, the exact value; \
                 printed_variance is lambda q^-1 (1-q) + lambda for comparison"
                    .to_string(),
            );
            vec![moment_row(h.deformed_moments()).with(
                "printed_variance",
                heine_printed_variance(h.lambda(), h.ctx().q()),
            )]
        }
        Dist::MultipleHeine => {
            let mh = a.params.multiple_heine()?;
            mh.components()
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    Record::new()
                        .with("j", i + 1)
                        .extend(moment_row(h.deformed_moments()))
                })
                .collect()
        }
    };
    Ok(Output {
        config: echo(a),
        records,
        warnings,
    })
}

fn approx_row(xs: &[usize], exact: f64, approx: Result<f64, Error>) -> Result<Record, Error> {
    let r = Record::new().with_counts(xs).with("exact", exact);
    match approx {
        Ok(v) => Ok(r
            .with("approx", v)
            .with("rel_error", (v - exact).abs() / exact)
            .with("defined", true)),
        // nonpositive shifted argument, or a coordinate with no trials left
        Err(Error::OutOfSupport { .. } | Error::Domain(_)) => Ok(r
            .with("approx", None::<f64>)
            .with("rel_error", None::<f64>)
            .with("defined", false)),
        Err(e) => Err(e),
    }
}

fn central_region(m: &QMultinomial, fraction: f64) -> Result<Vec<Outcome>, Error> {
    let support = m.support();
    let pmfs = support
        .iter()
        .map(|o| m.pmf(o))
        .collect::<Result<Vec<_>, _>>()?;
    let max = pmfs.iter().cloned().fold(0.0, f64::max);
    Ok(support
        .into_iter()
        .zip(pmfs)
        .filter(|(_, p)| *p >= fraction * max)
        .map(|(o, _)| o)
        .collect())
}

pub fn approx(a: &ApproxArgs) -> CmdResult {
    let mut warnings = Vec::new();
    let records = match a.dist {
        ApproxDist::StieltjesWigert => {
            if a.w.is_empty() {
                return usage("stieltjes-wigert takes --w");
            }
            let sw = StieltjesWigert::new(a.params.q)?;
            a.w.iter()
                .map(|&w| Ok(Record::new().with("w", w).with("density", sw.density(w)?)))
                .collect::<Result<Vec<_>, Error>>()?
        }
        ApproxDist::Qbinomial | ApproxDist::Qmultinomial => {
            let m = a.params.multinomial()?;
            if a.dist == ApproxDist::Qbinomial && m.k() != 1 {
                return usage("q-binomial takes a single --theta or --alphas value");
            }
            let trinomial = match (a.form, m.k()) {
                (FormArg::Standard, _) => None,
                (FormArg::Printed, 2) => Some(TrinomialForm::Printed),
                (FormArg::Printed, _) => {
                    return usage("--form printed applies to two categories only")
                }
            };
            let ctx = *m.ctx();
            let mut xs = a.xs.clone();
            xs.extend(a.x);
            let outcomes = match (xs.is_empty(), a.all) {
                (false, false) => vec![Outcome::new(xs)],
                (true, true) => central_region(&m, a.central_fraction)?,
                _ => return usage("give exactly one of --x/--xs or --all"),
            };
            outcomes
                .iter()
                .map(|o| {
                    let exact = m.pmf(o)?;
                    let value = conditional_frames(&m, o).and_then(|f| match trinomial {
                        Some(form) => {
                            let x = o.as_slice();
                            qtrinomial_sw_approx(x[0], x[1], (&f[0], &f[1]), &ctx, form)
                        }
                        None => qmultinomial_sw_approx(o, &f, &ctx),
                    });
                    approx_row(o.as_slice(), exact, value)
                })
                .collect::<Result<Vec<_>, Error>>()?
        }
        ApproxDist::MultipleHeine => {
            let mh = a.params.multiple_heine()?;
            if a.xs.is_empty() {
                return usage("multiple Heine takes --xs");
            }
            let form = match a.form {
                FormArg::Standard => HeineForm::Shifted,
                FormArg::Printed => HeineForm::Printed,
            };
            let o = Outcome::new(a.xs.clone());
            vec![approx_row(
                o.as_slice(),
                mh.pmf(&o)?,
                multiple_heine_sw_approx(&o, &mh, form),
            )?]
        }
    };
    let undefined = records
        .iter()
        .filter(|r| r.get("defined") == Some(&Cell::Bool(false)))
        .count();
    if undefined > 0 {
        warnings.push(format!("approximation undefined at {undefined} point(s)"));
    }
    Ok(Output {
        config: echo(a),
        records,
        warnings,
    })
}

pub fn sample(a: &SampleArgs) -> CmdResult {
    let m = QMultinomial::new(a.n, &a.thetas, QContext::new(a.q)?)?;
    let records = draw(&m, a.count, a.seed)?
        .iter()
        .enumerate()
        .map(|(i, o)| Record::new().with("draw", i).with_counts(o.as_slice()))
        .collect();
    Ok(Output {
        config: echo(a),
        records,
        warnings: Vec::new(),
    })
}

fn report_rows(report: &ErrorReport, key: &str) -> Vec<Record> {
    report
        .records
        .iter()
        .map(|r| {
            Record::new()
                .with(key, r.n)
                .with("grid_size", r.grid_size)
                .with("sup_abs_error", r.sup_abs_error)
                .with("sup_rel_error", r.sup_rel_error)
                .with("mean_rel_error", r.mean_rel_error)
                .with("undefined_points", r.undefined_points)
        })
        .collect()
}

pub fn converge(a: &ConvergeArgs) -> CmdResult {
    let (report, key) = match a.mode {
        Mode::Limit => {
            if a.alphas.is_empty() {
                return usage("--mode limit takes --alphas");
            }
            let mut cfg = SweepConfig::new(a.q, a.alphas.clone(), a.n_values.clone())?;
            cfg.central_fraction = a.central_fraction;
            cfg.validate()?;
            (run_limit_sweep(&cfg)?, "n")
        }
        Mode::Discrete => {
            if a.thetas.is_empty() {
                return usage("--mode discrete takes --thetas");
            }
            let cfg = DiscreteLimitConfig::new(a.q, a.thetas.clone(), a.n_values.clone(), a.x_max)?;
            (run_discrete_limit(&cfg)?, "n")
        }
        Mode::Heine => {
            if a.lambdas.is_empty() {
                return usage("--mode heine takes one or more --lambdas");
            }
            let sets: Vec<Vec<f64>> = a.lambdas.iter().map(|s| s.0.clone()).collect();
            let form = match a.form {
                FormArg::Standard => HeineForm::Shifted,
                FormArg::Printed => HeineForm::Printed,
            };
            (
                run_heine_sweep(a.q, &sets, a.central_fraction, form)?,
                "set",
            )
        }
    };
    let warnings = report
        .records
        .iter()
        .filter(|r| r.undefined_points > 0)
        .map(|r| {
            format!(
                "{key} = {}: approximation undefined at {} point(s)",
                r.n, r.undefined_points
            )
        })
        .collect();
    Ok(Output {
        config: echo(&report.config),
        records: report_rows(&report, key),
        warnings,
    })
}

pub fn stirling(a: &StirlingArgs) -> CmdResult {
    let report = run_stirling_study(&a.n, &a.q)?;
    let warnings = report
        .rows
        .iter()
        .filter(|r| r.abs_deviation == 0.0)
        .map(|r| format!("q = {}, n = {}: deviation below double precision", r.q, r.n))
        .collect();
    let records = report
        .rows
        .iter()
        .map(|r| {
            Record::new()
                .with("q", r.q)
                .with("n", r.n)
                .with("ratio", r.ratio)
                .with("abs_deviation", r.abs_deviation)
                .with("scaled_deviation", r.scaled_deviation)
        })
        .collect();
    Ok(Output {
        config: echo(a),
        records,
        warnings,
    })
}
