mod common;

use newsvendor_core::special::*;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f increasing with a root in [lo, hi]
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn normal_quantile_by_bisection() {
    let oracle = bisect(-5.0, 5.0, |x| std_normal_cdf(x) - 1.0 / 3.0);
    assert!((oracle + 0.4307272993).abs() < 1e-10);
    assert!((std_normal_inv_cdf(1.0 / 3.0).unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn chi2_quantiles_against_closed_forms() {
    // df = 2: exponential with mean 2
    let two = -2.0 * 0.05f64.ln();
    assert!((chi2_quantile(2, 0.95).unwrap() - two).abs() < 1e-9);
    assert!((two - 5.9914645).abs() < 1e-7);
    // df = 1: square of a standard normal
    let one = bisect(0.0, 20.0, |x| 2.0 * std_normal_cdf(x.sqrt()) - 1.0 - 0.95);
    assert!((chi2_quantile(1, 0.95).unwrap() - one).abs() < 1e-9);
    assert!((one - 3.84146).abs() < 1e-5);
}

#[test]
fn poisson_cdf_matches_pmf_summation() {
    for rate in [0.3, 1.0, 4.0, 17.5, 42.0, 120.0] {
        let pmf = common::pmf_table(rate, 400);
        let mut acc = 0.0;
        for (k, p) in pmf.iter().enumerate().take((rate * 2.0 + 30.0) as usize) {
            acc += p;
            let got = poisson_cdf(k as i64, rate).unwrap();
            assert!((got - acc).abs() <= 1e-13 * acc.max(1e-300) + 1e-300, "k={k} rate={rate}: {got} vs {acc}");
            let pm = poisson_pmf(k as i64, rate).unwrap();
            assert!((pm - p).abs() <= 1e-13 * p, "pmf k={k} rate={rate}");
        }
    }
    assert_eq!(poisson_cdf(-1, 3.0).unwrap(), 0.0);
}

#[test]
fn poisson_quantile_by_summation() {
    let pmf = common::pmf_table(4.0, 100);
    let mut acc = 0.0;
    let mut k = 0;
    while acc + pmf[k] < 0.5 {
        acc += pmf[k];
        k += 1;
    }
    assert_eq!(k, 4);
    assert_eq!(poisson_inv_cdf(0.5, 4.0).unwrap(), 4);
    assert_eq!(poisson_inv_cdf(1.0 / 3.0, 4.0).unwrap(), 3);
}
