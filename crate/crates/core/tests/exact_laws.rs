mod common;

use proptest::prelude::*;
use qlimit_core::qcalc::{q_binomial_coeff_log, q_multinomial_coeff_log, q_number};
use qlimit_core::{Heine, MultipleHeine, Outcome, QBinomial, QContext, QMultinomial};

#[test]
fn qbinomial_matches_definition() {
    for q in [0.3, 0.6, 0.9] {
        let ctx = QContext::new(q).unwrap();
        for theta in [0.3, 0.9, 2.0, 15.0] {
            for n in [0, 1, 7, 20] {
                let want = common::qbinomial_pmf(n, theta, q);
                let got = QBinomial::new(n, theta, ctx).unwrap().pmf_table();
                for (g, w) in got.iter().zip(&want) {
                    assert!(
                        common::rel_diff(*g, *w) < 1e-12,
                        "q={q} theta={theta} n={n}: {g} vs {w}"
                    );
                }
            }
        }
    }
}

#[test]
fn heine_matches_definition() {
    for q in [0.3, 0.6, 0.9] {
        let ctx = QContext::new(q).unwrap();
        for lambda in [0.3, 2.0, 10.0] {
            let h = Heine::new(lambda, ctx).unwrap();
            let want = common::heine_pmf(lambda, q, 40);
            for (x, w) in want.iter().enumerate() {
                if *w > 1e-250 {
                    assert!(
                        common::rel_diff(h.pmf(x), *w) < 1e-11,
                        "q={q} lambda={lambda} x={x}"
                    );
                }
            }
        }
    }
}

#[test]
fn trinomial_joint_from_definition() {
    // f(x1, x2) = qBin(x1; n, th1) qBin(x2; n - x1, th2)
    let q = 0.6;
    let ctx = QContext::new(q).unwrap();
    let m = QMultinomial::new(9, &[0.5, 1.7], ctx).unwrap();
    for x1 in 0..=9 {
        let first = common::qbinomial_pmf(9, 0.5, q)[x1];
        let second = common::qbinomial_pmf(9 - x1, 1.7, q);
        for (x2, p2) in second.iter().enumerate() {
            let got = m.pmf(&Outcome::from([x1, x2])).unwrap();
            assert!(common::rel_diff(got, first * p2) < 1e-12);
        }
    }
}

#[test]
fn multiple_heine_is_a_product() {
    let ctx = QContext::new(0.7).unwrap();
    let mh = MultipleHeine::new(&[1.5, 4.0, 0.2], ctx).unwrap();
    let a = common::heine_pmf(1.5, 0.7, 10);
    let b = common::heine_pmf(4.0, 0.7, 10);
    let c = common::heine_pmf(0.2, 0.7, 10);
    for x in common::simplex(10, 3) {
        let want = a[x[0]] * b[x[1]] * c[x[2]];
        let got = mh.pmf(&Outcome::new(x.clone())).unwrap();
        assert!(common::rel_diff(got, want) < 1e-11, "{x:?}");
    }
}

#[test]
fn q_number_tends_to_t() {
    for t in [0.5, 1.0, 3.0, 7.25] {
        assert!((q_number(t, 1.0 - 1e-6).unwrap() - t).abs() < 1e-4);
    }
}

#[test]
fn degenerate_second_category() {
    // As theta_2 -> 0 all mass of X_2 sits at 0 and the joint law at
    // (x1, 0) becomes the q-binomial law of X_1.
    let q = 0.8;
    let ctx = QContext::new(q).unwrap();
    let marginal = common::qbinomial_pmf(12, 1.3, q);
    let mut prev = f64::INFINITY;
    for theta2 in [1e-2, 1e-4, 1e-6, 1e-8] {
        let m = QMultinomial::new(12, &[1.3, theta2], ctx).unwrap();
        let gap = (0..=12)
            .map(|x1| (m.pmf(&Outcome::from([x1, 0])).unwrap() - marginal[x1]).abs())
            .fold(0.0, f64::max);
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-6);
}

proptest! {
    #[test]
    fn gaussian_coefficients_are_symmetric(q in 0.05f64..0.98, n in 0usize..40, frac in 0.0f64..=1.0) {
        let ctx = QContext::new(q).unwrap();
        let x = ((n as f64) * frac).round() as usize;
        let a = q_binomial_coeff_log(n, x, &ctx).unwrap().ln();
        let b = q_binomial_coeff_log(n, n - x, &ctx).unwrap().ln();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn gaussian_coefficients_satisfy_pascal(q in 0.05f64..0.98, n in 1usize..=25, frac in 0.0f64..=1.0) {
        let table = common::gaussian_table(n, q);
        let ctx = QContext::new(q).unwrap();
        let x = ((n as f64) * frac).round() as usize;
        let got = q_binomial_coeff_log(n, x, &ctx).unwrap().value();
        prop_assert!(common::rel_diff(got, table[n][x]) <= 1e-12);
    }

    #[test]
    fn multinomial_coefficient_chains(q in 0.05f64..0.98, xs in prop::collection::vec(0usize..8, 1..4), extra in 0usize..6) {
        let ctx = QContext::new(q).unwrap();
        let n = xs.iter().sum::<usize>() + extra;
        let whole = q_multinomial_coeff_log(n, &xs, &ctx).unwrap().ln();
        let mut s = 0;
        let mut chain = 0.0;
        for &x in &xs {
            chain += q_binomial_coeff_log(n - s, x, &ctx).unwrap().ln();
            s += x;
        }
        prop_assert!((whole - chain).abs() <= 1e-12 * whole.abs().max(1.0));
    }

    #[test]
    fn qmultinomial_normalizes(
        q in 0.1f64..0.95,
        thetas in prop::collection::vec(0.05f64..20.0, 1..=3),
        n in 0usize..=12,
    ) {
        let m = QMultinomial::new(n, &thetas, QContext::new(q).unwrap()).unwrap();
        let total: f64 = m.support().iter().map(|o| m.pmf(o).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-11);
    }

    #[test]
    fn conditional_chain_reproduces_joint(
        q in 0.1f64..0.95,
        thetas in prop::collection::vec(0.05f64..20.0, 2..=3),
        n in 1usize..=12,
        seed in any::<u64>(),
    ) {
        let m = QMultinomial::new(n, &thetas, QContext::new(q).unwrap()).unwrap();
        let support = m.support();
        let o = &support[(seed % support.len() as u64) as usize];
        let xs = o.as_slice();
        let chain: f64 = (0..xs.len())
            .map(|j| m.conditional(&xs[..j]).unwrap().ln_pmf(xs[j]).unwrap().ln())
            .sum();
        prop_assert!((m.ln_pmf(o).unwrap().ln() - chain).exp_m1().abs() < 1e-12);
    }
}
