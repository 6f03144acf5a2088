//! Reference computations that share no code with the library: plain
//! products and sums in f64, and double-exponential quadrature.
#![allow(dead_code)]

/// `[x]_{1/q}` as the finite sum `1 + q^{-1} + ... + q^{-(x-1)}`.
pub fn deformed(x: usize, q: f64) -> f64 {
    (0..x).map(|i| q.powi(-(i as i32))).sum()
}

/// `[i]_q` as `1 + q + ... + q^{i-1}`.
pub fn q_int(i: usize, q: f64) -> f64 {
    (0..i).map(|j| q.powi(j as i32)).sum()
}

pub fn q_factorial(n: usize, q: f64) -> f64 {
    (1..=n).map(|i| q_int(i, q)).product()
}

/// Gaussian coefficients by the recurrence
/// `(n choose x)_q = (n-1 choose x-1)_q + q^x (n-1 choose x)_q`.
pub fn gaussian_table(n_max: usize, q: f64) -> Vec<Vec<f64>> {
    let mut t = vec![vec![1.0]];
    for n in 1..=n_max {
        let prev = &t[n - 1];
        let mut row = vec![0.0; n + 1];
        for x in 0..=n {
            let a = if x > 0 { prev[x - 1] } else { 0.0 };
            let b = if x < n { prev[x] } else { 0.0 };
            row[x] = a + q.powi(x as i32) * b;
        }
        t.push(row);
    }
    t
}

/// q-binomial pmf straight from its definition.
pub fn qbinomial_pmf(n: usize, theta: f64, q: f64) -> Vec<f64> {
    let g = gaussian_table(n, q);
    let denom: f64 = (0..n).map(|i| 1.0 + theta * q.powi(i as i32)).product();
    (0..=n)
        .map(|x| {
            g[n][x] * q.powf((x * x.saturating_sub(1)) as f64 / 2.0) * theta.powi(x as i32) / denom
        })
        .collect()
}

/// Heine pmf with the normalizer `prod_{i>=0} (1 + lambda (1-q) q^i)`
/// taken over enough factors to reach machine precision.
pub fn heine_pmf(lambda: f64, q: f64, x_max: usize) -> Vec<f64> {
    let mut norm = 1.0;
    let mut i = 0;
    loop {
        let f = lambda * (1.0 - q) * q.powi(i);
        if f < 1e-18 {
            break;
        }
        norm *= 1.0 + f;
        i += 1;
    }
    let mut out = Vec::with_capacity(x_max + 1);
    let mut term = 1.0 / norm;
    for x in 0..=x_max {
        if x > 0 {
            term *= lambda * q.powi(x as i32 - 1) / q_int(x, q);
        }
        out.push(term);
    }
    out
}

/// Mean and variance of `g(X)` for a finite pmf, two-pass. Points of zero
/// probability are skipped so an overflowing `g` there cannot poison the sums.
pub fn summed_moments<I: IntoIterator<Item = (f64, f64)>>(values_and_probs: I) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = values_and_probs
        .into_iter()
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let mass: f64 = pts.iter().map(|&(_, p)| p).sum();
    let mean = pts.iter().map(|&(y, p)| y * p).sum::<f64>() / mass;
    let var = pts
        .iter()
        .map(|&(y, p)| (y - mean).powi(2) * p)
        .sum::<f64>()
        / mass;
    assert!(mean.is_finite() && var.is_finite(), "summation overflowed");
    (mass, mean, var)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// `int_0^inf density(w) w^k dw` after `w = e^t`. In `t` the SW density is
/// a Gaussian of variance `ln(1/q)`; the integral runs over 40 standard
/// deviations each side of its centre, one standard deviation per panel.
pub fn sw_moment_integral<F: Fn(f64) -> f64>(density: F, q: f64, k: i32) -> f64 {
    let l = -q.ln();
    let sd = l.sqrt();
    let centre = l * (k as f64 + 1.5);
    let g = |t: f64| density(t.exp()) * ((k + 1) as f64 * t).exp();
    (-40..40)
        .map(|i| {
            let a = centre + i as f64 * sd;
            quadrature::double_exponential::integrate(g, a, a + sd, 1e-16).integral
        })
        .sum()
}

/// All `(x_1..x_k)` with `x_j >= 0` and sum at most `n`.
pub fn simplex(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for x in 0..=n {
        for mut rest in simplex(n - x, k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}
