use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use super::{StatsError, TestResult};
use crate::measures::ContingencyQuad;

const INTEGRAL_TOLERANCE: f64 = 1e-9;

fn as_count(v: f64) -> Result<u64, StatsError> {
    let r = v.round();
    if !v.is_finite() || v < 0.0 || (v - r).abs() > INTEGRAL_TOLERANCE {
        return Err(StatsError::NonIntegral(v));
    }
    Ok(r as u64)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// One-sided (enrichment) Fisher exact test: the probability of drawing at
/// least `p` positives in `p + n` draws without replacement from an urn of
/// `P` positives and `N` negatives. The statistic is the hypergeometric
/// probability of the observed table.
pub fn fisher_exact_greater(q: &ContingencyQuad) -> Result<TestResult, StatsError> {
    let (p, n) = (as_count(q.p)?, as_count(q.n)?);
    let (big_p, big_n) = (as_count(q.total_p)?, as_count(q.total_n)?);
    if p > big_p || n > big_n {
        return Err(StatsError::InvalidTable(format!(
            "p={p}, n={n}, P={big_p}, N={big_n}"
        )));
    }
    let draws = p + n;
    let total = big_p + big_n;
    let lo = draws.saturating_sub(big_n);
    let hi = draws.min(big_p);
    let ln_denominator = ln_choose(total, draws);
    let ln_term = |x: u64| ln_choose(big_p, x) + ln_choose(big_n, draws - x) - ln_denominator;

    let observed = ln_term(p).exp();
    if p <= lo {
        return Ok(TestResult::new(observed, 1.0));
    }
    // log-sum-exp over the upper tail
    let logs: Vec<f64> = (p..=hi).map(ln_term).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok(TestResult::new(observed, (max + sum.ln()).exp()))
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi_square_upper_tail(statistic: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    erfc((statistic / 2.0).sqrt())
}

/// Pearson chi-square (no continuity correction) on the table
/// [covered, uncovered] x [positive, negative]. Any empty margin gives (0, 1).
pub fn chi_square_2x2(q: &ContingencyQuad) -> TestResult {
    let ContingencyQuad { p, n, total_p, total_n } = *q;
    let total = total_p + total_n;
    let covered = p + n;
    let uncovered = total - covered;
    let margins = [total_p, total_n, covered, uncovered];
    if total <= 0.0 || margins.iter().any(|&m| m <= 0.0) {
        return TestResult::degenerate();
    }
    let diff = p * total_n - n * total_p;
    let statistic = total * diff * diff / (total_p * total_n * covered * uncovered);
    TestResult::new(statistic, chi_square_upper_tail(statistic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    fn q(p: f64, n: f64, big_p: f64, big_n: f64) -> ContingencyQuad {
        ContingencyQuad::unchecked(p, n, big_p, big_n)
    }

    fn binom(n: u64, k: u64) -> BigInt {
        if k > n {
            return BigInt::zero();
        }
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        acc
    }

    /// Exact upper hypergeometric tail by enumeration of all tables.
    fn exact_tail(p: u64, n: u64, big_p: u64, big_n: u64) -> f64 {
        let draws = p + n;
        let denom = binom(big_p + big_n, draws);
        let mut num = BigInt::zero();
        for x in p..=draws.min(big_p) {
            num += binom(big_p, x) * binom(big_n, draws - x);
        }
        BigRational::new(num, denom).to_f64().unwrap()
    }

    fn log10_rel_err(actual: f64, expected: f64) -> f64 {
        ((actual.log10() - expected.log10()) / expected.log10()).abs()
    }

    #[test]
    fn reproduces_report_p_values() {
        let r1 = fisher_exact_greater(&q(176.0, 0.0, 473.0, 527.0)).unwrap();
        assert!(log10_rel_err(r1.p_value, 3.8e-67) <= 0.05, "{}", r1.p_value);
        assert_eq!(format!("{:.1E}", r1.p_value), "3.8E-67");
        let r2 = fisher_exact_greater(&q(183.0, 0.0, 473.0, 527.0)).unwrap();
        assert_eq!(format!("{:.1E}", r2.p_value), "2.9E-70");
        let r3 = fisher_exact_greater(&q(185.0, 0.0, 473.0, 527.0)).unwrap();
        assert_eq!(format!("{:.1E}", r3.p_value), "3.6E-71");
    }

    #[test]
    fn covering_everything_is_not_significant() {
        assert_eq!(fisher_exact_greater(&q(10.0, 7.0, 10.0, 7.0)).unwrap().p_value, 1.0);
    }

    #[test]
    fn small_table_matches_rational_enumeration() {
        let r = fisher_exact_greater(&q(2.0, 1.0, 3.0, 3.0)).unwrap();
        // tables with x >= 2 of 3 draws from 3+3: (C(3,2)C(3,1) + C(3,3)) / C(6,3) = 10/20
        assert!((r.p_value - 0.5).abs() < 1e-12);
        assert_eq!(exact_tail(2, 1, 3, 3), 0.5);
    }

    #[test]
    fn exhaustive_small_quads() {
        for big_p in 1..=12u64 {
            for big_n in 0..=(12 - big_p) {
                for p in 0..=big_p {
                    for n in 0..=big_n {
                        let got = fisher_exact_greater(&q(p as f64, n as f64, big_p as f64, big_n as f64))
                            .unwrap()
                            .p_value;
                        let want = exact_tail(p, n, big_p, big_n);
                        assert!(
                            ((got - want) / want).abs() <= 1e-12,
                            "({p},{n},{big_p},{big_n}): {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn non_integral_counts_rejected() {
        assert_eq!(
            fisher_exact_greater(&q(2.5, 1.0, 3.0, 3.0)).unwrap_err(),
            StatsError::NonIntegral(2.5)
        );
        assert!(fisher_exact_greater(&q(2.0 + 1e-12, 1.0, 3.0, 3.0)).is_ok());
    }

    /// Upper tail of chi-square(1) by Simpson quadrature of the normal density
    /// after substituting t = u^2.
    fn chi1_tail_quadrature(x: f64) -> f64 {
        let a = x.sqrt();
        let b = a + 40.0;
        let steps = 200_000;
        let h = (b - a) / steps as f64;
        let f = |u: f64| 2.0 / (2.0 * std::f64::consts::PI).sqrt() * (-u * u / 2.0).exp();
        let mut s = f(a) + f(b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn independence_gives_zero_statistic() {
        let r = chi_square_2x2(&q(5.0, 5.0, 50.0, 50.0));
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn perfect_split_statistic() {
        let r = chi_square_2x2(&q(30.0, 0.0, 30.0, 30.0));
        assert!((r.statistic - 60.0).abs() < 1e-12);
        let oracle = chi1_tail_quadrature(60.0);
        assert!(((r.p_value - oracle) / oracle).abs() < 1e-6, "{} vs {}", r.p_value, oracle);
        for x in [0.5, 1.0, 3.841458820694124, 10.0] {
            let o = chi1_tail_quadrature(x);
            assert!((chi_square_upper_tail(x) - o).abs() < 1e-9);
        }
        // 3.84 is the 5% critical value
        assert!((chi_square_upper_tail(3.841458820694124) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn empty_margin_is_degenerate() {
        assert_eq!(chi_square_2x2(&q(0.0, 0.0, 10.0, 10.0)), TestResult::degenerate());
        assert_eq!(chi_square_2x2(&q(10.0, 10.0, 10.0, 10.0)), TestResult::degenerate());
    }
}
