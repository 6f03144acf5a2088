//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per check and
//! exits non-zero if any check fails. Run with
//! `cargo test -p qlimit-core --test acceptance`.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use qlimit_core::analysis::{
    is_decreasing, run_discrete_limit, run_heine_sweep, run_limit_sweep, run_mc_validation,
    run_stirling_study, DiscreteLimitConfig, SweepConfig, DEFAULT_CENTRAL_FRACTION,
};
use qlimit_core::dist::heine_printed_variance;
use qlimit_core::swapprox::{
    conditional_frames, qbinomial_sw_approx_log, qmultinomial_sw_approx_log,
    qtrinomial_sw_approx_log, HeineForm, TrinomialForm,
};
use qlimit_core::{
    conditional_moments, marginal_moments, Heine, MultipleHeine, Outcome, QBinomial, QContext,
    QMultinomial, StandardizationFrame, StieltjesWigert,
};

const Q_GRID: [f64; 3] = [0.3, 0.6, 0.9];
const THETA_GRID: [f64; 3] = [0.3, 0.9, 2.0];

type Check = (u8, &'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Every k-tuple drawn from `THETA_GRID`.
fn theta_tuples(k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                THETA_GRID.iter().map(move |&th| {
                    let mut t = t.clone();
                    t.push(th);
                    t
                })
            })
            .collect();
    }
    out
}

fn criterion_1() -> Verdict {
    let mut dev_bin: f64 = 0.0;
    let mut dev_mult: f64 = 0.0;
    let mut dev_heine: f64 = 0.0;
    let mut dev_mheine: f64 = 0.0;
    for &q in &Q_GRID {
        let ctx = QContext::new(q).unwrap();
        for &theta in &THETA_GRID {
            for n in 0..=30 {
                let s: f64 = QBinomial::new(n, theta, ctx)
                    .unwrap()
                    .pmf_table()
                    .iter()
                    .sum();
                dev_bin = dev_bin.max((s - 1.0).abs());
            }
            let h = Heine::new(theta, ctx).unwrap();
            let (cut, _) = h.support_cutoff(1e-16);
            let s: f64 = (0..=cut).map(|x| h.pmf(x)).sum();
            dev_heine = dev_heine.max((s - 1.0).abs());
        }
        for k in 1..=3 {
            for thetas in theta_tuples(k) {
                for n in 0..=15 {
                    let m = QMultinomial::new(n, &thetas, ctx).unwrap();
                    let s: f64 = m.support().iter().map(|o| m.pmf(o).unwrap()).sum();
                    dev_mult = dev_mult.max((s - 1.0).abs());
                }
                if k >= 2 {
                    let mh = MultipleHeine::new(&thetas, ctx).unwrap();
                    let cuts: Vec<usize> = mh
                        .components()
                        .iter()
                        .map(|h| h.support_cutoff(1e-16).0)
                        .collect();
                    let mut s = 0.0;
                    for x in common::simplex(cuts.iter().sum(), k) {
                        if x.iter().zip(&cuts).all(|(a, b)| a <= b) {
                            s += mh.pmf(&Outcome::new(x)).unwrap();
                        }
                    }
                    dev_mheine = dev_mheine.max((s - 1.0).abs());
                }
            }
        }
    }
    verdict(
        dev_bin <= 1e-11 && dev_mult <= 1e-11 && dev_heine <= 1e-9 && dev_mheine <= 1e-9,
        format!(
            "max |sum-1|: q-binomial {dev_bin:.2e}, q-multinomial {dev_mult:.2e} (tol 1e-11); \
             Heine {dev_heine:.2e}, multiple Heine {dev_mheine:.2e} (tol 1e-9)"
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for &q in &Q_GRID {
        let ctx = QContext::new(q).unwrap();
        for k in 1..=3 {
            for thetas in theta_tuples(k) {
                for n in 0..=12 {
                    let m = QMultinomial::new(n, &thetas, ctx).unwrap();
                    for o in m.support() {
                        let direct = m.ln_pmf(&o).unwrap().ln();
                        let xs = o.as_slice();
                        let chain: f64 = (0..k)
                            .map(|j| m.conditional(&xs[..j]).unwrap().ln_pmf(xs[j]).unwrap().ln())
                            .sum();
                        worst = worst.max((direct - chain).exp_m1().abs());
                        checked += 1;
                    }
                }
            }
        }
    }
    verdict(
        worst <= 1e-12,
        format!("{checked} outcomes, max relative gap {worst:.2e} (tol 1e-12)"),
    )
}

fn criterion_3() -> Verdict {
    let tol = 1e-9;
    let mut worst_mult: f64 = 0.0;
    for &q in &Q_GRID {
        let ctx = QContext::new(q).unwrap();
        for &theta in &THETA_GRID {
            for n in [1, 2, 5, 12, 30] {
                let b = QBinomial::new(n, theta, ctx).unwrap();
                let (_, mean, var) = common::summed_moments(
                    b.pmf_table()
                        .into_iter()
                        .enumerate()
                        .map(|(x, p)| (common::deformed(x, q), p)),
                );
                let mp = b.deformed_moments();
                worst_mult = worst_mult.max(common::rel_diff(mp.mean, mean));
                worst_mult = worst_mult.max(common::rel_diff(mp.variance, var));
            }
        }
        // conditional moments from the joint law
        for k in 2..=3 {
            for thetas in theta_tuples(k) {
                for n in [4, 9] {
                    let m = QMultinomial::new(n, &thetas, ctx).unwrap();
                    let joint: Vec<(Vec<usize>, f64)> = m
                        .support()
                        .into_iter()
                        .map(|o| {
                            let p = m.pmf(&o).unwrap();
                            (o.into_inner(), p)
                        })
                        .collect();
                    for j in 1..=k {
                        let mut cond: HashMap<Vec<usize>, Vec<(f64, f64)>> = HashMap::new();
                        for (xs, p) in &joint {
                            cond.entry(xs[..j - 1].to_vec())
                                .or_default()
                                .push((common::deformed(xs[j - 1], q), *p));
                        }
                        for (prefix, pts) in cond {
                            if prefix.iter().sum::<usize>() == n {
                                continue;
                            }
                            let (_, mean, var) = common::summed_moments(pts);
                            let mp = if j == 1 {
                                marginal_moments(&m)
                            } else {
                                conditional_moments(&m, j, &prefix).unwrap()
                            };
                            worst_mult = worst_mult.max(common::rel_diff(mp.mean, mean));
                            worst_mult = worst_mult.max(common::rel_diff(mp.variance, var));
                        }
                    }
                }
            }
        }
    }

    let mut worst_heine_mean: f64 = 0.0;
    let mut worst_heine_var: f64 = 0.0;
    let mut worst_corrected: f64 = 0.0;
    for &q in &Q_GRID {
        let ctx = QContext::new(q).unwrap();
        for &lambda in &THETA_GRID {
            let pmf = common::heine_pmf(lambda, q, 150);
            let (_, mean, var) = common::summed_moments(
                pmf.iter()
                    .enumerate()
                    .map(|(x, &p)| (common::deformed(x, q), p)),
            );
            worst_heine_mean = worst_heine_mean.max(common::rel_diff(lambda, mean));
            worst_heine_var =
                worst_heine_var.max(common::rel_diff(heine_printed_variance(lambda, q), var));
            let h = Heine::new(lambda, ctx).unwrap();
            worst_corrected =
                worst_corrected.max(common::rel_diff(h.deformed_moments().variance, var));
        }
    }
    verdict(
        worst_mult <= tol && worst_heine_mean <= tol && worst_heine_var <= tol,
        format!(
            "q-binomial/conditional moments max rel {worst_mult:.2e}; Heine mean {worst_heine_mean:.2e}, \
             Heine variance lambda q^-1 (1-q) + lambda max rel {worst_heine_var:.2e} (tol 1e-9); \
             for reference lambda^2 q^-1 (1-q) + lambda max rel {worst_corrected:.2e}"
        ),
    )
}

fn criterion_4() -> Verdict {
    let ns = [20, 40, 80, 160];
    let qs = [0.3, 0.5, 0.8];
    let report = run_stirling_study(&ns, &qs).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &q in &qs {
        let rows = report.for_q(q);
        let bounded = rows[3].scaled_deviation <= 2.0 * rows[0].scaled_deviation;
        let factors: Vec<f64> = rows
            .windows(2)
            .map(|w| w[1].abs_deviation / w[0].abs_deviation)
            .collect();
        let halving = factors.iter().all(|f| (0.35..=0.65).contains(f));
        pass &= bounded && halving;
        let devs: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.3e}", r.abs_deviation))
            .collect();
        let fs: Vec<String> = factors.iter().map(|f| format!("{f:.3}")).collect();
        parts.push(format!(
            "q={q}: |ratio-1| [{}], step factors [{}], n|ratio-1| 160 vs 20: {:.3e} vs {:.3e}",
            devs.join(", "),
            fs.join(", "),
            rows[3].scaled_deviation,
            rows[0].scaled_deviation
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_5() -> Verdict {
    let cfg = DiscreteLimitConfig::new(0.5, vec![0.5, 1.0], vec![25, 50, 100, 150], 8).unwrap();
    let report = run_discrete_limit(&cfg).unwrap();
    let gaps = report.sup_abs_errors();
    let pass = is_decreasing(&gaps[..3], 0) && gaps[3] < 1e-6;
    verdict(
        pass,
        format!(
            "sup pointwise gap n=25,50,100,150: {:.3e}, {:.3e}, {:.3e}, {:.3e} (decreasing, last < 1e-6)",
            gaps[0], gaps[1], gaps[2], gaps[3]
        ),
    )
}

fn criterion_6() -> Verdict {
    let ns = vec![20, 40, 80];
    let mut pass = true;
    let mut parts = Vec::new();
    for alphas in [vec![0.5], vec![0.5, 0.5]] {
        let k = alphas.len();
        let report = run_limit_sweep(&SweepConfig::new(0.9, alphas, ns.clone()).unwrap()).unwrap();
        let errs = report.sup_rel_errors();
        pass &= is_decreasing(&errs, 0);
        parts.push(format!(
            "k={k} sup rel {:.4}, {:.4}, {:.4}",
            errs[0], errs[1], errs[2]
        ));
    }

    // reduction identities on the central lattice of the k=2 case
    let ctx = QContext::new(0.9).unwrap();
    let m2 = QMultinomial::from_alphas(40, &[0.5, 0.5], ctx).unwrap();
    let m1 = QMultinomial::from_alphas(40, &[0.5], ctx).unwrap();
    let f1 = StandardizationFrame::from_moments(marginal_moments(&m1)).unwrap();
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    let close = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    for x1 in 0..=40usize {
        if let Ok(uni) = qbinomial_sw_approx_log(x1, &f1, &ctx) {
            let one = qmultinomial_sw_approx_log(&Outcome::from([x1]), &[f1], &ctx).unwrap();
            worst = worst.max(close(uni.ln(), one.ln()));
            compared += 1;
        }
        for x2 in 0..=(40 - x1) {
            let o = Outcome::from([x1, x2]);
            let Ok(frames) = conditional_frames(&m2, &o) else {
                continue;
            };
            let Ok(tri) = qtrinomial_sw_approx_log(
                x1,
                x2,
                (&frames[0], &frames[1]),
                &ctx,
                TrinomialForm::Deformed,
            ) else {
                continue;
            };
            let two = qmultinomial_sw_approx_log(&o, &frames, &ctx).unwrap();
            let sep = qbinomial_sw_approx_log(x1, &frames[0], &ctx).unwrap().ln()
                + qbinomial_sw_approx_log(x2, &frames[1], &ctx).unwrap().ln();
            worst = worst
                .max(close(tri.ln(), two.ln()))
                .max(close(tri.ln(), sep));
            compared += 1;
        }
    }
    pass &= worst <= 1e-13 && compared > 0;
    parts.push(format!(
        "reductions over {compared} points max rel {worst:.2e} (tol 1e-13)"
    ));
    verdict(pass, parts.join("; "))
}

fn criterion_7() -> Verdict {
    let sets = vec![vec![50.0, 50.0], vec![200.0, 200.0]];
    let report = run_heine_sweep(0.9, &sets, DEFAULT_CENTRAL_FRACTION, HeineForm::Shifted).unwrap();
    let errs = report.sup_rel_errors();
    let undefined: Vec<usize> = report.records.iter().map(|r| r.undefined_points).collect();
    verdict(
        errs[1] < errs[0] && errs.iter().all(|e| e.is_finite()),
        format!(
            "sup rel lambda=50: {:.4}, lambda=200: {:.4}; undefined points {:?}",
            errs[0], errs[1], undefined
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [0.3, 0.5, 0.9, 0.99] {
        let sw = StieltjesWigert::new(q).unwrap();
        let density = |w: f64| sw.density(w).unwrap();
        let mass = common::sw_moment_integral(density, q, 0);
        let m1 = common::sw_moment_integral(density, q, 1);
        let m2 = common::sw_moment_integral(density, q, 2);
        let mean = m1 / mass;
        let var = m2 / mass - mean * mean;
        let want_var = (1.0 - q) / q.powi(3);
        let (dm, dmean, dvar) = (
            (mass - 1.0).abs(),
            (mean - 1.0 / q).abs(),
            (var - want_var).abs(),
        );
        pass &= dm <= 1e-8 && dmean <= 1e-6 && dvar <= 1e-5;
        parts.push(format!(
            "q={q}: |mass-1| {dm:.1e}, |mean-1/q| {dmean:.1e}, |var-(1-q)/q^3| {dvar:.1e}"
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_9() -> Verdict {
    let ctx = QContext::new(0.6).unwrap();
    let m = QMultinomial::new(6, &[0.5, 0.8], ctx).unwrap();
    let seed = 20_240_601;
    let first = run_mc_validation(&m, 100_000, seed).unwrap();
    if first.flagged_cells == 0 {
        return verdict(
            true,
            format!(
                "seed {seed}: {} cells, max |z| {:.2}",
                first.cells.len(),
                first.max_abs_z
            ),
        );
    }
    let second = run_mc_validation(&m, 100_000, seed + 1).unwrap();
    verdict(
        second.flagged_cells == 0,
        format!(
            "seed {seed}: {} flagged (max |z| {:.2}); rerun seed {}: {} flagged (max |z| {:.2})",
            first.flagged_cells,
            first.max_abs_z,
            seed + 1,
            second.flagged_cells,
            second.max_abs_z
        ),
    )
}

fn main() -> ExitCode {
    let checks: [Check; 9] = [
        (1, "normalization", criterion_1),
        (2, "chain identity", criterion_2),
        (3, "moment identities", criterion_3),
        (4, "q-Stirling O(1/n)", criterion_4),
        (5, "discrete limit", criterion_5),
        (6, "local limit theorems", criterion_6),
        (7, "multiple Heine approximation", criterion_7),
        (8, "Stieltjes-Wigert density", criterion_8),
        (9, "Monte Carlo sampler", criterion_9),
    ];
    let mut failed = 0;
    for (id, name, run) in checks {
        let t = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!(
            "criterion {id}: {status} {name} [{:.1}s] {}",
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
