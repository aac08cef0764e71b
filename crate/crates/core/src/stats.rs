//! Small statistics helpers with deterministic (thread-count independent)
//! reduction order.

/// Sum with a fixed-shape pairwise tree. Deterministic for a given input
/// order and more accurate than a running sum on long inputs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 64;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn se_mean(xs: &[f64]) -> f64 {
    (sample_var(xs) / xs.len() as f64).sqrt()
}

/// Unbiased sample covariance of two equally long samples.
pub fn sample_cov(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let prods: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .collect();
    pairwise_sum(&prods) / (xs.len() - 1) as f64
}

/// Standard error of the sample covariance of a bivariate Gaussian,
/// `sqrt((s_xx s_yy + s_xy^2)/n)`.
pub fn se_cov_gaussian(var_x: f64, var_y: f64, cov: f64, n: usize) -> f64 {
    ((var_x * var_y + cov * cov) / n as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            i += 1;
        } else if b[j] < a[i] {
            j += 1;
        } else {
            // advance through ties in both samples before evaluating
            let v = a[i];
            while i < a.len() && a[i] == v {
                i += 1;
            }
            while j < b.len() && b[j] == v {
                j += 1;
            }
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// One-sample KS distance against a CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|x, y| x.total_cmp(y));
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample KS distance at level `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    kolmogorov_quantile(alpha) * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Asymptotic critical value of the one-sample KS distance at level `alpha`.
pub fn ks_one_sample_critical(n: usize, alpha: f64) -> f64 {
    kolmogorov_quantile(alpha) / (n as f64).sqrt()
}

/// `c(alpha)` with `P(K > c) = alpha` for the Kolmogorov distribution,
/// solved from the series `P(K > c) = 2 sum (-1)^{k-1} e^{-2 k^2 c^2}`.
fn kolmogorov_quantile(alpha: f64) -> f64 {
    let surv = |c: f64| {
        let mut s = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * c * c).exp();
            s += if k % 2 == 1 { term } else { -term };
        }
        2.0 * s
    };
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if surv(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert_relative_eq!(pairwise_sum(&xs), naive, max_relative = 1e-12);
    }

    #[test]
    fn kolmogorov_quantiles() {
        // classical table values
        assert_relative_eq!(kolmogorov_quantile(0.05), 1.358, max_relative = 1e-3);
        assert_relative_eq!(kolmogorov_quantile(0.01), 1.628, max_relative = 1e-3);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let b: Vec<f64> = (0..500).map(|i| i as f64 / 500.0 + 0.3).collect();
        assert!(ks_two_sample(&a, &b) > 0.25);
        assert!(ks_two_sample(&a, &a) < 1e-12);
    }

    #[test]
    fn variance_of_known_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(sample_var(&xs), 5.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(sample_cov(&xs, &xs), 5.0 / 3.0, max_relative = 1e-15);
    }
}
