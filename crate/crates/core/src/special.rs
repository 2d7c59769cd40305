//! Modified Bessel function I₀ and the first-order Marcum Q-function.

use crate::scalar::Real;

/// Exponentially scaled modified Bessel function `I₀(x)·exp(-|x|)`.
///
/// Power series up to |x| = 30, Hankel asymptotic expansion beyond.
pub fn bessel_i0e<T: Real>(x: T) -> T {
    let x = x.abs();
    if x <= T::of(30.0) {
        // I0(x) = Σ (x²/4)^k / (k!)²
        let q = x * x * T::of(0.25);
        let mut term = T::one();
        let mut sum = T::one();
        let mut k = 1.0;
        loop {
            term = term * q / T::of(k * k);
            sum = sum + term;
            if term <= sum * T::EPS * T::of(0.5) {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // I0e(x) ~ 1/sqrt(2πx) Σ ((2k-1)!!)² / (k! 8^k x^k)
        let mut term = T::one();
        let mut sum = T::one();
        let inv = T::one() / (T::of(8.0) * x);
        for k in 1..60 {
            let odd = T::of((2 * k - 1) as f64);
            let next = term * odd * odd * inv / T::of(k as f64);
            if next >= term {
                break;
            }
            term = next;
            sum = sum + term;
            if term <= sum * T::EPS * T::of(0.5) {
                break;
            }
        }
        sum / (T::of(2.0) * T::PI() * x).sqrt()
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0<T: Real>(x: T) -> T {
    bessel_i0e(x) * x.abs().exp()
}

/// Truncation target for the Poisson-mixture series.
const SERIES_TAIL: f64 = 1e-17;

/// Computes `Σ_k pois(k; outer) · F(k; inner)` where `F(k; inner)` is the
/// Poisson(inner) CDF at `k - shift`. Every term is non-negative.
fn poisson_mixture<T: Real>(outer: T, inner: T, shift: usize) -> T {
    // log-space Poisson pmf so large means neither overflow nor underflow
    let ln_pmf = |k: usize, mean: T| -> T {
        if mean == T::zero() {
            return if k == 0 { T::zero() } else { T::neg_infinity() };
        }
        let kf = T::of(k as f64);
        -mean + kf * mean.ln() - (kf + T::one()).ln_gamma()
    };
    let spread = |mean: T| (T::of(12.0) * mean.sqrt() + T::of(40.0)).ceil();
    let k_max = (outer + spread(outer)).to_usize().unwrap_or(usize::MAX / 2);
    let mut sum = T::zero();
    let mut outer_mass = T::zero();
    let mut cdf = T::zero();
    let mut next_inner = 0usize;
    for k in 0..=k_max {
        // advance the inner CDF to index k - shift
        if k >= shift {
            let target = k - shift;
            while next_inner <= target {
                cdf = cdf + ln_pmf(next_inner, inner).exp();
                next_inner += 1;
            }
        }
        let w = ln_pmf(k, outer).exp();
        outer_mass = outer_mass + w;
        sum = sum + w * cdf.min(T::one());
        if T::of(k as f64) > outer && T::one() - outer_mass < T::of(SERIES_TAIL) {
            break;
        }
    }
    sum
}

/// First-order Marcum Q-function `Q₁(α, b)`.
///
/// With `λ = α²/2` and `x = b²/2`, `Q₁ = P[N_x <= N_λ]` for independent
/// Poisson counts, which expands into a series of non-negative terms. The
/// smaller of `Q₁` and `1 - Q₁` is summed directly so neither side loses
/// relative accuracy.
pub fn marcum_q1<T: Real>(alpha: T, b: T) -> T {
    assert!(
        alpha >= T::zero() && b >= T::zero(),
        "Marcum Q requires non-negative arguments"
    );
    if b == T::zero() {
        return T::one();
    }
    let lambda = alpha * alpha * T::of(0.5);
    let x = b * b * T::of(0.5);
    if lambda == T::zero() {
        return (-x).exp();
    }
    if x > lambda + T::one() {
        poisson_mixture(lambda, x, 0)
    } else {
        T::one() - poisson_mixture(x, lambda, 1)
    }
}

/// `1 - Q₁(α, b)`, accurate when `Q₁` is close to one.
pub fn marcum_q1_complement<T: Real>(alpha: T, b: T) -> T {
    assert!(
        alpha >= T::zero() && b >= T::zero(),
        "Marcum Q requires non-negative arguments"
    );
    if b == T::zero() {
        return T::zero();
    }
    let lambda = alpha * alpha * T::of(0.5);
    let x = b * b * T::of(0.5);
    if lambda == T::zero() {
        return -(-x).exp_m1();
    }
    if x > lambda + T::one() {
        T::one() - poisson_mixture(lambda, x, 0)
    } else {
        // P[N_x > N_λ] = Σ_j pois(j; x) P[N_λ <= j - 1]
        poisson_mixture(x, lambda, 1)
    }
}
