//! Statistical test helpers used by the validation suites.

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        for _ in 0..500 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction, x >= a+1.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Survival function of the chi-square distribution with `df` degrees.
pub fn chi_square_sf(stat: f64, df: f64) -> f64 {
    1.0 - gamma_p(df / 2.0, stat / 2.0)
}

/// Two-sided p-value of the Kolmogorov statistic sqrt(n) * D.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..101 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against a CDF; returns (D, p-value).
pub fn ks_test<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> (f64, f64) {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("NaN sample"));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max(((i as f64 + 1.0) / n - f).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

/// Chi-square goodness-of-fit of observed counts against expected counts.
/// Bins with expectation below `min_expected` are pooled into the tail.
/// Returns (statistic, degrees of freedom, p-value).
pub fn chi_square_gof(observed: &[f64], expected: &[f64], min_expected: f64) -> (f64, f64, f64) {
    assert_eq!(observed.len(), expected.len());
    let mut obs_pooled = Vec::new();
    let mut exp_pooled = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= min_expected {
            obs_pooled.push(acc_o);
            exp_pooled.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        if let (Some(o), Some(e)) = (obs_pooled.last_mut(), exp_pooled.last_mut()) {
            *o += acc_o;
            *e += acc_e;
        } else {
            obs_pooled.push(acc_o);
            exp_pooled.push(acc_e);
        }
    }
    let mut stat = 0.0;
    for (&o, &e) in obs_pooled.iter().zip(&exp_pooled) {
        stat += (o - e) * (o - e) / e;
    }
    let df = (obs_pooled.len().max(2) - 1) as f64;
    (stat, df, chi_square_sf(stat, df))
}

/// Chi-square independence test on a contingency table (rows x cols of
/// counts). Rows/columns with zero margin are dropped.
pub fn chi_square_independence(table: &[Vec<f64>]) -> (f64, f64, f64) {
    let rows: Vec<usize> = (0..table.len())
        .filter(|&i| table[i].iter().sum::<f64>() > 0.0)
        .collect();
    let ncol = table[0].len();
    let cols: Vec<usize> = (0..ncol)
        .filter(|&j| table.iter().map(|r| r[j]).sum::<f64>() > 0.0)
        .collect();
    let total: f64 = table.iter().flatten().sum();
    let mut stat = 0.0;
    for &i in &rows {
        let ri: f64 = table[i].iter().sum();
        for &j in &cols {
            let cj: f64 = table.iter().map(|r| r[j]).sum();
            let e = ri * cj / total;
            if e > 0.0 {
                let o = table[i][j];
                stat += (o - e) * (o - e) / e;
            }
        }
    }
    let df = ((rows.len() - 1) * (cols.len() - 1)).max(1) as f64;
    (stat, df, chi_square_sf(stat, df))
}

/// Poisson pmf table for k = 0..=kmax.
pub fn poisson_pmf(mean: f64, kmax: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(kmax + 1);
    let mut p = (-mean).exp();
    pmf.push(p);
    for k in 1..=kmax {
        p *= mean / k as f64;
        pmf.push(p);
    }
    pmf
}
