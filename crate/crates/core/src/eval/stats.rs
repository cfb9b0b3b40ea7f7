use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ScoreCounts;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub const DEFAULT_ITERATIONS: u64 = 10_000;
/// Up to this many units `Resampling::Auto` enumerates every swap pattern.
pub const EXHAUSTIVE_MAX_UNITS: usize = 20;

const EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    SignTest,
    Randomization(Statistic),
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestKind::SignTest => f.write_str("sign-test\trecall"),
            TestKind::Randomization(s) => write!(f, "randomization\t{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Precision,
    FScore,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Precision => "precision",
            Statistic::FScore => "f-score",
        })
    }
}

impl Statistic {
    /// On pooled counts. F is computed as 2c/(claimed+key), which equals
    /// 2pr/(p+r) without the intermediate divisions.
    fn eval(self, correct: u64, claimed: u64, key_total: u64) -> f64 {
        let (num, den) = match self {
            Statistic::Precision => (100 * correct, claimed),
            Statistic::FScore => (200 * correct, claimed + key_total),
        };
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }
}

/// Outcome of a one-sided test of "A is better than B".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceResult {
    pub kind: TestKind,
    pub p_value: f64,
    /// Discordant pairs for the sign test, units for randomization.
    pub n: u64,
    /// Pairs favoring A for the sign test, observed delta for randomization.
    pub observed: f64,
    /// Sign test only: every pair tied.
    pub no_discordant: bool,
}

impl SignificanceResult {
    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }

    pub fn sig5(&self) -> bool {
        self.significant_at(0.05)
    }

    pub fn sig10(&self) -> bool {
        self.significant_at(0.10)
    }
}

/// Exact P(X ≥ k) for X ~ Binomial(n, ½).
pub fn binomial_upper_tail(n: u64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let mut coeff = BigUint::one();
    let mut tail = BigUint::zero();
    // C(n, i) for i = n, n-1, ..., k
    for i in (k..=n).rev() {
        if i < n {
            coeff = coeff * (i + 1) / (n - i);
        }
        tail += &coeff;
    }
    ratio_pow2(&tail, n)
}

/// num / 2^exp, rounded once.
fn ratio_pow2(num: &BigUint, exp: u64) -> f64 {
    let bits = num.bits();
    let shift = bits.saturating_sub(64);
    let mantissa = (num >> shift).to_u64().expect("fits after shift") as f64;
    let e = shift as i64 - exp as i64;
    let half = (e / 2) as i32;
    mantissa * 2f64.powi(half) * 2f64.powi(e as i32 - half)
}

/// Sign test from counts: `n` discordant pairs, `k` of them favoring A.
pub fn sign_test(n: u64, k: u64) -> Result<SignificanceResult> {
    if k > n {
        return Err(Error::InvalidArgument(format!("{k} favorable pairs out of {n}")));
    }
    Ok(SignificanceResult {
        kind: TestKind::SignTest,
        p_value: if n == 0 { 1.0 } else { binomial_upper_tail(n, k) },
        n,
        observed: k as f64,
        no_discordant: n == 0,
    })
}

/// Matched-pairs sign test on per-key-arc recall flags.
pub fn sign_test_recall(a: &[bool], b: &[bool]) -> Result<SignificanceResult> {
    if a.len() != b.len() {
        return Err(Error::Misaligned(format!("{} and {} recall flags", a.len(), b.len())));
    }
    let favor_a = a.iter().zip(b).filter(|&(&x, &y)| x && !y).count() as u64;
    let favor_b = a.iter().zip(b).filter(|&(&x, &y)| !x && y).count() as u64;
    sign_test(favor_a + favor_b, favor_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    /// Exhaustive up to [`EXHAUSTIVE_MAX_UNITS`] units, sampled above.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizationConfig {
    pub statistic: Statistic,
    pub iterations: u64,
    pub seed: u64,
    pub resampling: Resampling,
    pub execution: Execution,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            statistic: Statistic::FScore,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            resampling: Resampling::Auto,
            execution: Execution::default(),
        }
    }
}

/// Paired randomization test of statistic(A) − statistic(B) over pooled
/// unit counts. Each unit's A and B counts swap together.
pub fn randomization_test(
    a: &[ScoreCounts],
    b: &[ScoreCounts],
    config: &RandomizationConfig,
) -> Result<SignificanceResult> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("randomization test over zero units".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Misaligned(format!("{} and {} units", a.len(), b.len())));
    }
    let n = a.len();
    let stat = config.statistic;
    let mut total_a = ScoreCounts::default();
    let mut total_b = ScoreCounts::default();
    for (x, y) in a.iter().zip(b) {
        total_a.add(x);
        total_b.add(y);
    }
    let delta = |swapped: &dyn Fn(usize) -> bool| -> f64 {
        let (mut ca, mut cla, mut ka) = (total_a.correct, total_a.claimed, total_a.key_total);
        let (mut cb, mut clb, mut kb) = (total_b.correct, total_b.claimed, total_b.key_total);
        for i in 0..n {
            if swapped(i) {
                let (x, y) = (&a[i], &b[i]);
                ca = ca - x.correct + y.correct;
                cla = cla - x.claimed + y.claimed;
                ka = ka - x.key_total + y.key_total;
                cb = cb - y.correct + x.correct;
                clb = clb - y.claimed + x.claimed;
                kb = kb - y.key_total + x.key_total;
            }
        }
        stat.eval(ca, cla, ka) - stat.eval(cb, clb, kb)
    };
    let observed = delta(&|_| false);
    let at_least = |d: f64| d >= observed - EPSILON;

    let exhaustive = match config.resampling {
        Resampling::Exhaustive => true,
        Resampling::Sampled => false,
        Resampling::Auto => n <= EXHAUSTIVE_MAX_UNITS,
    };
    let p_value = if exhaustive {
        if n > 40 {
            return Err(Error::InvalidArgument(format!(
                "exhaustive enumeration over {n} units is infeasible"
            )));
        }
        let patterns = 1u64 << n;
        let hits = exec::count_range(config.execution, 0..patterns, |mask| {
            at_least(delta(&|i| mask >> i & 1 == 1))
        });
        hits as f64 / patterns as f64
    } else {
        if config.iterations == 0 {
            return Err(Error::InvalidArgument("zero randomization iterations".into()));
        }
        let seed = config.seed;
        let hits = exec::count_range(config.execution, 0..config.iterations, |it| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(it);
            let flips: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            at_least(delta(&|i| flips[i]))
        });
        (1 + hits) as f64 / (1 + config.iterations) as f64
    };
    Ok(SignificanceResult {
        kind: TestKind::Randomization(stat),
        p_value,
        n: n as u64,
        observed,
        no_discordant: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_of_ten() {
        let r = sign_test(10, 9).unwrap();
        assert_eq!(r.p_value, 11.0 / 1024.0);
        assert!(r.sig5());
    }

    #[test]
    fn trivial_sign_tests() {
        let flags = [true, false, true];
        let r = sign_test_recall(&flags, &flags).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(r.no_discordant);
        assert_eq!(sign_test(1, 1).unwrap().p_value, 0.5);
        assert_eq!(sign_test(15, 15).unwrap().p_value, 2f64.powi(-15));
        assert!(sign_test(3, 4).is_err());
    }

    #[test]
    fn large_n_tail_is_finite() {
        let p = binomial_upper_tail(1000, 500);
        assert!(p > 0.5 && p < 0.52, "{p}");
        let tiny = binomial_upper_tail(1000, 1000);
        assert!(tiny > 0.0 && tiny < 1e-300);
    }

    #[test]
    fn identical_units_give_one() {
        let u = vec![ScoreCounts::new(3, 2, 1), ScoreCounts::new(4, 4, 2)];
        for resampling in [Resampling::Exhaustive, Resampling::Sampled] {
            let cfg = RandomizationConfig {
                resampling,
                iterations: 200,
                ..Default::default()
            };
            assert_eq!(randomization_test(&u, &u, &cfg).unwrap().p_value, 1.0);
        }
    }

    #[test]
    fn dominant_system() {
        let a = vec![ScoreCounts::new(5, 5, 5); 12];
        let b = vec![ScoreCounts::new(5, 5, 1); 12];
        let r = randomization_test(&a, &b, &RandomizationConfig::default()).unwrap();
        assert_eq!(r.p_value, 1.0 / 4096.0);
    }

    #[test]
    fn sampled_is_deterministic() {
        let a: Vec<_> = (0..30).map(|i| ScoreCounts::new(5, 4, (i % 4) as u64)).collect();
        let b: Vec<_> = (0..30).map(|i| ScoreCounts::new(5, 5, (i % 3) as u64)).collect();
        let cfg = RandomizationConfig {
            seed: 7,
            iterations: 500,
            ..Default::default()
        };
        let x = randomization_test(&a, &b, &cfg).unwrap();
        let y = randomization_test(
            &a,
            &b,
            &RandomizationConfig {
                execution: Execution::Sequential,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn zero_units_rejected() {
        assert!(randomization_test(&[], &[], &RandomizationConfig::default()).is_err());
    }
}
