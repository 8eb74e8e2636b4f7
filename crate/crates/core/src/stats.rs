//! Inferential statistics for success-rate comparisons.
//!
//! Rates are fractions in [0,1] unless a name ends in `_pp` (percentage points).

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("n must be positive")]
    EmptySample,
    #[error("successes {successes} exceed n {n}")]
    TooManySuccesses { successes: u64, n: u64 },
    #[error("confidence/alpha/power must lie strictly between 0 and 1, got {0}")]
    BadProbability(f64),
    #[error("rates must lie strictly between 0 and 1 and differ; got {0} and {1}")]
    BadRates(f64, f64),
    #[error("z is undefined: both arms are all-success or all-failure")]
    UndefinedZ,
}

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

fn check_prob(p: f64) -> Result<f64, StatsError> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(StatsError::BadProbability(p))
    }
}

/// Two-sided critical value for a confidence level.
pub fn z_for_confidence(confidence: f64) -> Result<f64, StatsError> {
    check_prob(confidence)?;
    Ok(normal_quantile(1.0 - (1.0 - confidence) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn check_counts(successes: u64, n: u64) -> Result<(), StatsError> {
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    if successes > n {
        return Err(StatsError::TooManySuccesses { successes, n });
    }
    Ok(())
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, n: u64, confidence: f64) -> Result<Interval, StatsError> {
    check_counts(successes, n)?;
    let z = z_for_confidence(confidence)?;
    let (s, nf) = (successes as f64, n as f64);
    let p = s / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == n { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok(Interval { estimate: p, lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencySummary {
    pub successes_a: u64,
    pub n_a: u64,
    pub successes_b: u64,
    pub n_b: u64,
}

impl ContingencySummary {
    pub fn new(successes_a: u64, n_a: u64, successes_b: u64, n_b: u64) -> Result<Self, StatsError> {
        check_counts(successes_a, n_a)?;
        check_counts(successes_b, n_b)?;
        Ok(Self {
            successes_a,
            n_a,
            successes_b,
            n_b,
        })
    }

    pub fn rate_a(&self) -> f64 {
        self.successes_a as f64 / self.n_a as f64
    }

    pub fn rate_b(&self) -> f64 {
        self.successes_b as f64 / self.n_b as f64
    }

    /// Cells (a, b, c, d) = (successes_a, failures_a, successes_b, failures_b).
    pub fn cells(&self) -> [f64; 4] {
        [
            self.successes_a as f64,
            (self.n_a - self.successes_a) as f64,
            self.successes_b as f64,
            (self.n_b - self.successes_b) as f64,
        ]
    }

    pub fn swapped(&self) -> Self {
        Self {
            successes_a: self.successes_b,
            n_a: self.n_b,
            successes_b: self.successes_a,
            n_b: self.n_a,
        }
    }
}

/// ln(k!) for k = 0..=n, by exact accumulation of ln(i).
fn log_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Two-sided Fisher exact p: total probability of all tables with the same
/// margins that are no more likely than the observed one.
pub fn fisher_exact_two_sided(c: &ContingencySummary) -> f64 {
    let n = c.n_a + c.n_b;
    let k = c.successes_a + c.successes_b;
    let lf = log_factorials(n);
    let ln_choose = |a: u64, b: u64| lf[a as usize] - lf[b as usize] - lf[(a - b) as usize];
    // Unnormalized log weights; dividing by their sum avoids rounding in C(n, n_a)
    // and makes "every table included" exactly 1.
    let log_w = |x: u64| ln_choose(k, x) + ln_choose(n - k, c.n_a - x);
    let lo = c.n_a.saturating_sub(n - k);
    let hi = k.min(c.n_a);
    let observed = log_w(c.successes_a);
    // Relative slack so tables tied with the observed one are not lost to rounding.
    let threshold = observed + 1e-7f64.ln_1p();
    let peak = (lo..=hi).map(log_w).fold(f64::NEG_INFINITY, f64::max);
    let (mut included, mut excluded) = (0.0, 0.0);
    for x in lo..=hi {
        let lw = log_w(x);
        let w = (lw - peak).exp();
        if lw <= threshold {
            included += w;
        } else {
            excluded += w;
        }
    }
    included / (included + excluded)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p_two_sided: f64,
    pub diff_pp: f64,
    pub ci_pp: (f64, f64),
}

/// z from the pooled standard error; the difference CI from the unpooled one.
pub fn two_prop_ztest(c: &ContingencySummary) -> Result<ZTest, StatsError> {
    let (p1, p2) = (c.rate_a(), c.rate_b());
    let (n1, n2) = (c.n_a as f64, c.n_b as f64);
    let pooled = (c.successes_a + c.successes_b) as f64 / (n1 + n2);
    let se_pooled = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    if se_pooled == 0.0 {
        return Err(StatsError::UndefinedZ);
    }
    let diff = p1 - p2;
    let z = diff / se_pooled;
    let p_two_sided = (2.0 * normal_cdf(-z.abs())).min(1.0);
    let se_unpooled = (p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2).sqrt();
    let zc = z_for_confidence(0.95)?;
    Ok(ZTest {
        z,
        p_two_sided,
        diff_pp: 100.0 * diff,
        ci_pp: (100.0 * (diff - zc * se_unpooled), 100.0 * (diff + zc * se_unpooled)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSizes {
    /// Wald interval, percentage points.
    pub risk_diff_pp: Interval,
    /// Log-scale interval; absent when either arm has zero successes.
    pub relative_risk: Option<Interval>,
    pub odds_ratio: f64,
    pub p_fisher: f64,
}

/// RD (Wald), RR (log-normal CI, uncorrected) and OR (0.5 added to every
/// cell only when some cell is zero).
pub fn effect_sizes(c: &ContingencySummary) -> EffectSizes {
    let z = z_for_confidence(0.95).expect("0.95 is a valid confidence");
    let (p1, p2) = (c.rate_a(), c.rate_b());
    let (n1, n2) = (c.n_a as f64, c.n_b as f64);
    let diff = p1 - p2;
    let se = (p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2).sqrt();
    let risk_diff_pp = Interval {
        estimate: 100.0 * diff,
        lo: 100.0 * (diff - z * se),
        hi: 100.0 * (diff + z * se),
    };

    let [a, b, cc, d] = c.cells();
    let relative_risk = (a > 0.0 && cc > 0.0).then(|| {
        let rr = p1 / p2;
        let se_log = (1.0 / a - 1.0 / n1 + 1.0 / cc - 1.0 / n2).sqrt();
        Interval {
            estimate: rr,
            lo: (rr.ln() - z * se_log).exp(),
            hi: (rr.ln() + z * se_log).exp(),
        }
    });

    let odds_ratio = if [a, b, cc, d].contains(&0.0) {
        ((a + 0.5) * (d + 0.5)) / ((b + 0.5) * (cc + 0.5))
    } else {
        (a * d) / (b * cc)
    };

    EffectSizes {
        risk_diff_pp,
        relative_risk,
        odds_ratio,
        p_fisher: fisher_exact_two_sided(c),
    }
}

/// RR and OR with 0.5 added to every cell unconditionally (Haldane–Anscombe),
/// the convention used by the per-pair comparison tables.
pub fn haldane_rr_or(c: &ContingencySummary) -> (f64, f64) {
    let [a, b, cc, d] = c.cells().map(|x| x + 0.5);
    let rr = (a / (a + b)) / (cc / (cc + d));
    let or = (a * d) / (b * cc);
    (rr, or)
}

fn check_rates(p1: f64, p2: f64) -> Result<(), StatsError> {
    let ok = |p: f64| p > 0.0 && p < 1.0;
    if ok(p1) && ok(p2) && p1 != p2 {
        Ok(())
    } else {
        Err(StatsError::BadRates(p1, p2))
    }
}

/// Normal-approximation power of a two-sided two-proportion test with `n` per
/// arm: pooled SE under the null, unpooled SE under the alternative.
pub fn achieved_power(p1: f64, p2: f64, alpha: f64, n: u64) -> Result<f64, StatsError> {
    check_rates(p1, p2)?;
    check_prob(alpha)?;
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    let nf = n as f64;
    let z_a = normal_quantile(1.0 - alpha / 2.0);
    let pbar = (p1 + p2) / 2.0;
    let se0 = (2.0 * pbar * (1.0 - pbar) / nf).sqrt();
    let se1 = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / nf).sqrt();
    Ok(normal_cdf(((p1 - p2).abs() - z_a * se0) / se1))
}

/// Unrounded per-arm sample size from the same formula as [`achieved_power`].
pub fn required_n_exact(p1: f64, p2: f64, alpha: f64, target_power: f64) -> Result<f64, StatsError> {
    check_rates(p1, p2)?;
    check_prob(alpha)?;
    check_prob(target_power)?;
    let z_a = normal_quantile(1.0 - alpha / 2.0);
    let z_b = normal_quantile(target_power);
    let pbar = (p1 + p2) / 2.0;
    let num = z_a * (2.0 * pbar * (1.0 - pbar)).sqrt() + z_b * (p1 * (1.0 - p1) + p2 * (1.0 - p2)).sqrt();
    Ok((num / (p1 - p2)).powi(2))
}

pub fn power_two_prop(p1: f64, p2: f64, alpha: f64, target_power: f64) -> Result<u64, StatsError> {
    Ok(required_n_exact(p1, p2, alpha, target_power)?.ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    pub p_two_sided: f64,
}

/// Ties dropped; exact two-sided binomial(0.5) on the remaining pairs.
pub fn sign_test(wins: u64, losses: u64, ties: u64) -> SignTest {
    let n = wins + losses;
    let p_two_sided = if n == 0 {
        1.0
    } else {
        let dist = Binomial::new(0.5, n).expect("0.5 is a valid probability");
        (2.0 * dist.cdf(wins.min(losses))).min(1.0)
    };
    SignTest {
        wins,
        losses,
        ties,
        p_two_sided,
    }
}

/// Sign test over paired per-unit scores (a vs b).
pub fn sign_test_paired(a: &[f64], b: &[f64]) -> SignTest {
    let (mut w, mut l, mut t) = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Greater) => w += 1,
            Some(std::cmp::Ordering::Less) => l += 1,
            _ => t += 1,
        }
    }
    sign_test(w, l, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Describe {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Describe {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linear-interpolation quantile on sorted data (the "type 7" definition).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, sample SD (n−1), median and quartiles; `None` for empty input.
pub fn describe(values: &[f64]) -> Option<Describe> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(Describe {
        n,
        mean,
        sd,
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(a: u64, na: u64, b: u64, nb: u64) -> ContingencySummary {
        ContingencySummary::new(a, na, b, nb).unwrap()
    }

    /// Φ by Simpson integration of the density from 0, independent of statrs.
    fn cdf_oracle(x: f64) -> f64 {
        let steps = 20_000;
        let h = x / steps as f64;
        let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = phi(0.0) + phi(x);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * phi(i as f64 * h);
        }
        0.5 + acc * h / 3.0
    }

    fn choose(n: u64, k: u64) -> u128 {
        let mut r: u128 = 1;
        for i in 0..k {
            r = r * (n - i) as u128 / (i + 1) as u128;
        }
        r
    }

    /// Enumerate every table with the observed margins using exact integers.
    fn fisher_oracle(c: &ContingencySummary) -> f64 {
        let n = c.n_a + c.n_b;
        let k = c.successes_a + c.successes_b;
        let weight = |x: u64| choose(k, x) * choose(n - k, c.n_a - x);
        let observed = weight(c.successes_a);
        let total = choose(n, c.n_a);
        let lo = c.n_a.saturating_sub(n - k);
        let hi = k.min(c.n_a);
        let tail: u128 = (lo..=hi).map(weight).filter(|&w| w <= observed).sum();
        tail as f64 / total as f64
    }

    #[test]
    fn normal_cdf_matches_integration_oracle() {
        for x in [-3.0, -1.96, -0.5, 0.0, 0.7, 1.645, 2.4, 4.0] {
            assert!((normal_cdf(x) - cdf_oracle(x)).abs() < 1e-10, "{x}");
        }
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn wilson_published_values() {
        let ci = wilson_ci(108, 120, 0.95).unwrap();
        assert!((100.0 * ci.lo - 83.3).abs() < 0.05 && (100.0 * ci.hi - 94.2).abs() < 0.05);
        let ci = wilson_ci(100, 100, 0.95).unwrap();
        assert!((100.0 * ci.lo - 96.3).abs() < 0.05 && ci.hi == 1.0);
        let ci = wilson_ci(117, 120, 0.95).unwrap();
        assert!((100.0 * ci.lo - 92.9).abs() < 0.05 && (100.0 * ci.hi - 99.1).abs() < 0.06);
        assert_eq!(wilson_ci(0, 1, 0.95).unwrap().lo, 0.0);
        assert_eq!(wilson_ci(1, 0, 0.95), Err(StatsError::EmptySample));
        assert!(wilson_ci(3, 2, 0.95).is_err());
    }

    #[test]
    fn wilson_closed_form_oracle() {
        // 9/20 at z = 1.959964: center and half-width computed by hand.
        let z: f64 = 1.959963984540054;
        let (p, n) = (0.45f64, 20.0f64);
        let center = (p + z * z / 40.0) / (1.0 + z * z / n);
        let half = z * ((p * (1.0 - p) + z * z / 80.0) / n).sqrt() / (1.0 + z * z / n);
        let ci = wilson_ci(9, 20, 0.95).unwrap();
        assert!((ci.lo - (center - half)).abs() < 1e-12 && (ci.hi - (center + half)).abs() < 1e-12);
    }

    #[test]
    fn fisher_published_values() {
        assert!((fisher_exact_two_sided(&table(45, 100, 24, 100)) - 0.0028).abs() < 0.0005);
        assert!((fisher_exact_two_sided(&table(42, 100, 24, 100)) - 0.0103).abs() < 0.0005);
        assert!((fisher_exact_two_sided(&table(9, 20, 5, 20)) - 0.3203).abs() < 0.0005);
        assert!((fisher_exact_two_sided(&table(45, 100, 42, 100)) - 0.7755).abs() < 0.0005);
        assert_eq!(fisher_exact_two_sided(&table(9, 20, 9, 20)), 1.0);
        assert_eq!(fisher_exact_two_sided(&table(20, 20, 19, 20)), 1.0);
    }

    #[test]
    fn ztest_published_values() {
        let t = two_prop_ztest(&table(117, 120, 108, 120)).unwrap();
        assert!((t.z - 2.4).abs() < 1e-9);
        assert!((t.p_two_sided - 0.016).abs() < 0.0005);
        assert!((t.diff_pp - 7.5).abs() < 1e-9);
        assert!((t.ci_pp.0 - 1.4).abs() < 0.1 && (t.ci_pp.1 - 13.6).abs() < 0.1);

        let same = two_prop_ztest(&table(30, 60, 30, 60)).unwrap();
        assert_eq!(same.diff_pp, 0.0);
        assert!((same.p_two_sided - 1.0).abs() < 1e-15);
        assert_eq!(two_prop_ztest(&table(10, 10, 20, 20)), Err(StatsError::UndefinedZ));
    }

    #[test]
    fn ztest_matches_oracle_cdf() {
        let t = two_prop_ztest(&table(50, 100, 40, 100)).unwrap();
        let pooled = 0.45f64;
        let z = 0.1 / (pooled * (1.0 - pooled) * 0.02).sqrt();
        let p = 2.0 * (1.0 - cdf_oracle(z));
        assert!((t.z - z).abs() < 1e-12);
        assert!((t.p_two_sided - p).abs() < 1e-9);
    }

    #[test]
    fn effect_size_published_values() {
        let e = effect_sizes(&table(45, 100, 24, 100));
        assert!((e.risk_diff_pp.estimate - 21.0).abs() < 1e-9);
        assert!((e.risk_diff_pp.lo - 8.1).abs() < 0.05 && (e.risk_diff_pp.hi - 33.9).abs() < 0.05);
        let rr = e.relative_risk.unwrap();
        assert!((rr.estimate - 1.88).abs() < 0.005);
        assert!((rr.lo - 1.24).abs() < 0.005 && (rr.hi - 2.83).abs() < 0.005);

        let e = effect_sizes(&table(9, 20, 5, 20));
        assert!((e.risk_diff_pp.lo - -8.9).abs() < 0.05 && (e.risk_diff_pp.hi - 48.9).abs() < 0.05);
        let rr = e.relative_risk.unwrap();
        assert!((rr.estimate - 1.80).abs() < 0.005);
        assert!((rr.lo - 0.73).abs() < 0.005 && (rr.hi - 4.43).abs() < 0.005);

        let e = effect_sizes(&table(12, 40, 12, 40));
        assert_eq!((e.risk_diff_pp.estimate, e.relative_risk.unwrap().estimate, e.odds_ratio), (0.0, 1.0, 1.0));
    }

    #[test]
    fn odds_ratio_correction_only_for_zero_cells() {
        // 9/20 vs 5/20: plain (9·15)/(11·5)
        assert!((effect_sizes(&table(9, 20, 5, 20)).odds_ratio - 135.0 / 55.0).abs() < 1e-12);
        // 50/50 vs 40/50 has a zero cell: (50.5·10.5)/(0.5·40.5)
        assert!((effect_sizes(&table(50, 50, 40, 50)).odds_ratio - 26.185185185185187).abs() < 1e-9);
        assert!(effect_sizes(&table(0, 10, 3, 10)).relative_risk.is_none());
    }

    #[test]
    fn haldane_matches_comparison_tables() {
        let (rr, or) = haldane_rr_or(&table(5, 20, 9, 20));
        assert!((rr - 0.579).abs() < 0.0005 && (or - 0.430).abs() < 0.0005);
        let (rr, or) = haldane_rr_or(&table(50, 50, 40, 50));
        assert!((rr - 1.247).abs() < 0.0005 && (or - 26.185).abs() < 0.0005);
        let (rr, or) = haldane_rr_or(&table(20, 20, 19, 20));
        assert!((rr - 1.051).abs() < 0.0005 && (or - 3.154).abs() < 0.0005);
    }

    #[test]
    fn power_values() {
        let p = achieved_power(0.24, 0.45, 0.05, 100).unwrap();
        assert!((p - 0.88).abs() < 0.01);
        let n = power_two_prop(0.25, 0.45, 0.05, 0.80).unwrap();
        assert!((80..=95).contains(&n), "{n}");
        assert_eq!(n, 89);
        assert!(achieved_power(0.24, 0.45, 0.05, 100_000).unwrap() > 0.999_999);
        assert!(achieved_power(0.3, 0.3, 0.05, 10).is_err());
        assert!(power_two_prop(0.0, 0.3, 0.05, 0.8).is_err());
    }

    #[test]
    fn power_inverts_sample_size() {
        let n = required_n_exact(0.25, 0.45, 0.05, 0.8).unwrap();
        // Evaluating power at the fractional n must return the target.
        let z_a = normal_quantile(0.975);
        let pbar: f64 = 0.35;
        let se0 = (2.0 * pbar * (1.0 - pbar) / n).sqrt();
        let se1 = ((0.25 * 0.75 + 0.45 * 0.55) / n).sqrt();
        assert!((cdf_oracle((0.2 - z_a * se0) / se1) - 0.8).abs() < 1e-9);
    }

    #[test]
    fn sign_tests() {
        assert_eq!(sign_test(2, 1, 5).p_two_sided, 1.0);
        assert_eq!(sign_test(0, 0, 4).p_two_sided, 1.0);
        // 10 wins, 0 losses: 2 * 0.5^10
        assert!((sign_test(10, 0, 0).p_two_sided - 2.0 / 1024.0).abs() < 1e-12);
        let s = sign_test_paired(&[0.9, 0.5, 0.4, 0.3], &[0.5, 0.5, 0.6, 0.1]);
        assert_eq!((s.wins, s.losses, s.ties), (2, 1, 1));
    }

    #[test]
    fn describe_values() {
        let d = describe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((d.mean, d.median, d.q1, d.q3), (2.5, 2.5, 1.75, 3.25));
        assert!((d.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(describe(&[]).is_none());
        assert_eq!(describe(&[7.0]).unwrap().sd, 0.0);
    }

    proptest! {
        #[test]
        fn fisher_matches_enumeration(na in 1u64..=30, nb in 1u64..=30, fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
            let a = (fa * na as f64).round() as u64;
            let b = (fb * nb as f64).round() as u64;
            let c = table(a, na, b, nb);
            let p = fisher_exact_two_sided(&c);
            let oracle = fisher_oracle(&c).min(1.0);
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert!((p - oracle).abs() < 1e-9, "{c:?}: {p} vs {oracle}");
        }

        #[test]
        fn wilson_bounds(n in 1u64..500, f in 0.0f64..=1.0, conf in 0.5f64..0.999) {
            let s = (f * n as f64).round() as u64;
            let ci = wilson_ci(s, n, conf).unwrap();
            prop_assert!(0.0 <= ci.lo && ci.hi <= 1.0);
            prop_assert!(ci.contains(ci.estimate));
        }

        #[test]
        fn ztest_symmetric(na in 2u64..200, nb in 2u64..200, fa in 0.05f64..0.95, fb in 0.05f64..0.95) {
            let c = table((fa * na as f64) as u64, na, (fb * nb as f64) as u64, nb);
            if let Ok(t) = two_prop_ztest(&c) {
                let s = two_prop_ztest(&c.swapped()).unwrap();
                prop_assert!((t.p_two_sided - s.p_two_sided).abs() < 1e-12);
                prop_assert!((t.diff_pp + s.diff_pp).abs() < 1e-9);
            }
        }

        #[test]
        fn effect_intervals_contain_estimates(na in 2u64..200, nb in 2u64..200, fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
            let c = table((fa * na as f64).round() as u64, na, (fb * nb as f64).round() as u64, nb);
            let e = effect_sizes(&c);
            prop_assert!(e.risk_diff_pp.contains(e.risk_diff_pp.estimate));
            if let Some(rr) = e.relative_risk {
                prop_assert!(rr.estimate > 0.0 && rr.contains(rr.estimate));
            }
        }
    }
}
