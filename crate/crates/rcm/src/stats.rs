//! Small statistical toolbox: normal CDF, Kolmogorov-Smirnov and
//! Anderson-Darling statistics against a fully specified normal, chi-square
//! machinery for one-step frequency tests, and least-squares line fits.

/// Error function, Abramowitz & Stegun 7.1.26 (|error| <= 1.5e-7),
/// adequate for the test statistics used here.
pub fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * (1.0 + erf((x - mean) / (sd * std::f64::consts::SQRT_2)))
}

/// Two-sided Kolmogorov-Smirnov distance of `samples` to the CDF `f`.
pub fn ks_statistic(samples: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = f(x);
        let hi = (i as f64 + 1.0) / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic KS critical value at level alpha: c(alpha)/sqrt(n) with
/// c(0.01) = 1.6276 (one percent level used throughout the test suite).
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Anderson-Darling A^2 against a fully specified continuous CDF.
pub fn anderson_darling(samples: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    let nf = n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let u = f(samples[i]).clamp(1e-15, 1.0 - 1e-15);
        let v = f(samples[n - 1 - i]).clamp(1e-15, 1.0 - 1e-15);
        s += (2.0 * i as f64 + 1.0) * (u.ln() + (1.0 - v).ln());
    }
    -nf - s / nf
}

/// 1% critical value of A^2 for a fully specified (case 0) null.
pub const AD_CRITICAL_1PCT: f64 = 3.857;

/// Pearson chi-square statistic for observed counts against expected
/// probabilities (expected counts must be positive).
pub fn chi_square(observed: &[u64], probs: &[f64], total: u64) -> f64 {
    observed
        .iter()
        .zip(probs)
        .filter(|&(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Least-squares fit y = a + b x; returns (intercept, slope, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (intercept, slope, r2)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (denominator n-1).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}
