//! Small statistical helpers shared by the estimator, the sizing rules and
//! the Monte Carlo checks.

/// Two-sided 1% critical value of the standard normal.
pub const Z_TWO_SIDED_001: f64 = 2.575_829_303_548_901;

/// Standard deviation of a binomial proportion with `n` trials.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Hoeffding deviation: with `m` samples, the empirical rate is within
/// `delta` of the true rate except with probability `failure_prob`.
pub fn hoeffding_delta(m: usize, failure_prob: f64) -> f64 {
    assert!(m > 0, "hoeffding_delta needs at least one sample");
    assert!(failure_prob > 0.0 && failure_prob < 1.0);
    ((2.0 / failure_prob).ln() / (2.0 * m as f64)).sqrt()
}

/// Smallest sample size whose Hoeffding deviation is at most `delta`.
pub fn hoeffding_sample_size(delta: f64, failure_prob: f64) -> usize {
    assert!(delta > 0.0);
    assert!(failure_prob > 0.0 && failure_prob < 1.0);
    ((2.0 / failure_prob).ln() / (2.0 * delta * delta)).ceil() as usize
}

/// Pooled two-sample z statistic for `x1/n1` against `x2/n2`. Returns 0 when
/// both samples are all-zero or all-one.
pub fn two_proportion_z(x1: usize, n1: usize, x2: usize, n2: usize) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    (x1 as f64 / n1f - x2 as f64 / n2f) / se
}
