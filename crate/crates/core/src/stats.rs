//! Small statistics helpers: streaming moments and the one-sample
//! Kolmogorov–Smirnov test.

use crate::scalar::Real;

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub count: u64,
    pub mean: T,
    m2: T,
}

impl<T: Real> Default for Moments<T> {
    fn default() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }
}

impl<T: Real> Moments<T> {
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / T::of(self.count as f64);
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let (na, nb, nn) = (
            T::of(self.count as f64),
            T::of(other.count as f64),
            T::of(n as f64),
        );
        let delta = other.mean - self.mean;
        Self {
            count: n,
            mean: self.mean + delta * nb / nn,
            m2: self.m2 + other.m2 + delta * delta * na * nb / nn,
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> T {
        if self.count < 2 {
            return T::zero();
        }
        self.m2 / T::of((self.count - 1) as f64)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> T {
        if self.count == 0 {
            return T::zero();
        }
        (self.variance() / T::of(self.count as f64)).sqrt()
    }
}

/// Outcome of a one-sample KS test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test of `samples` against `cdf`.
///
/// The p-value uses the asymptotic Kolmogorov distribution with the
/// Stephens small-sample correction.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> KsOutcome {
    assert!(!samples.is_empty(), "KS test needs samples");
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    KsOutcome {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
    }
}

/// P(K > λ) for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
