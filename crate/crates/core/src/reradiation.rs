//! Fraction β of the maximum re-radiated power that reaches the receiver.
//!
//! Power absorbed in an annular strip at axial distance `x` and radius `r`
//! inside the transmit cone is re-emitted isotropically once; the portion
//! collected by the receive aperture is integrated over the far-field part
//! of the cone, `eps_tx <= x <= d - eps_rx`, `0 <= r <= x tan(theta)`.
//! β is that collected power divided by the classical maximum
//! `P_tx G_tx A_rx (1 - e^{-kd}) / (4π d²)`.

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{Estimate, Integrator, QuadratureConfig};
use crate::scalar::Real;
use crate::stats::Moments;
use crate::streams::{block_rng, blocks};

/// Tx–Rx geometry for the β integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry<T> {
    /// Tx–Rx distance in m.
    pub distance: T,
    /// Beam half-opening angle in rad.
    pub half_angle: T,
    /// Tx Rayleigh distance in m.
    pub eps_tx: T,
    /// Rx Rayleigh distance in m.
    pub eps_rx: T,
}

impl<T: Real> LinkGeometry<T> {
    pub fn new(distance: T, half_angle: T, eps_tx: T, eps_rx: T) -> Result<Self> {
        if !(distance > T::zero()) || !distance.is_finite() {
            return Err(Error::invalid("distance", format!("must be > 0, got {distance}")));
        }
        if !(half_angle > T::zero() && half_angle < T::FRAC_PI_2()) {
            return Err(Error::invalid(
                "half_angle",
                format!("must lie in (0, pi/2), got {half_angle}"),
            ));
        }
        if !(eps_tx >= T::zero()) || !(eps_rx >= T::zero()) {
            return Err(Error::invalid("rayleigh distance", "must be >= 0"));
        }
        if !(eps_tx + eps_rx < distance) {
            return Err(Error::invalid(
                "rayleigh distance",
                format!("eps_tx + eps_rx = {} must be < distance {distance}", eps_tx + eps_rx),
            ));
        }
        Ok(Self {
            distance,
            half_angle,
            eps_tx,
            eps_rx,
        })
    }

    /// Like [`LinkGeometry::new`], but when the Rayleigh distances do not fit
    /// inside the link they are shrunk proportionally so that together they
    /// cover half of it.
    pub fn with_fitted_rayleigh(distance: T, half_angle: T, eps_tx: T, eps_rx: T) -> Result<Self> {
        let total = eps_tx + eps_rx;
        if total >= distance && total > T::zero() {
            let s = distance * T::of(0.5) / total;
            Self::new(distance, half_angle, eps_tx * s, eps_rx * s)
        } else {
            Self::new(distance, half_angle, eps_tx, eps_rx)
        }
    }

    /// Returns `None` when the Rayleigh distances leave no far-field region.
    pub fn far_field(distance: T, half_angle: T, eps_tx: T, eps_rx: T) -> Result<Option<Self>> {
        if distance > T::zero() && eps_tx + eps_rx >= distance {
            return Ok(None);
        }
        Self::new(distance, half_angle, eps_tx, eps_rx).map(Some)
    }

    /// Axial integration limits `[eps_tx, d - eps_rx]`.
    pub fn axial_range(&self) -> (T, T) {
        (self.eps_tx, self.distance - self.eps_rx)
    }

    /// Area of the (x, r) integration region.
    pub fn region_area(&self) -> T {
        let (lo, hi) = self.axial_range();
        self.half_angle.tan() * (hi * hi - lo * lo) * T::of(0.5)
    }
}

/// Transmit power, gain and receive aperture. They cancel in β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    pub p_tx: T,
    pub g_tx: T,
    pub a_rx: T,
}

impl<T: Real> LinkBudget<T> {
    pub fn new(p_tx: T, g_tx: T, a_rx: T) -> Result<Self> {
        for (name, v) in [("p_tx", p_tx), ("g_tx", g_tx), ("a_rx", a_rx)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(Self { p_tx, g_tx, a_rx })
    }

    pub fn unit() -> Self {
        Self {
            p_tx: T::one(),
            g_tx: T::one(),
            a_rx: T::one(),
        }
    }

    fn product(&self) -> T {
        self.p_tx * self.g_tx * self.a_rx
    }
}

/// Integrand of the β double integral, in 1/m³.
///
/// `r cosϑ exp(-k (x + √(x²+r²) + √((d-x)²+r²))) / (((d-x)²+r²)(x²+r²))`
/// with `cosϑ = (d-x)/√((d-x)²+r²)`.
#[inline]
pub fn beta_integrand<T: Real>(x: T, r: T, distance: T, k: T) -> T {
    let dx = distance - x;
    let r2 = r * r;
    let to_rx2 = dx * dx + r2;
    let from_tx2 = x * x + r2;
    let to_rx = to_rx2.sqrt();
    let path = x + from_tx2.sqrt() + to_rx;
    r * (dx / to_rx) * (-k * path).exp() / (to_rx2 * from_tx2)
}

/// `k d² / (2 (1 - e^{-kd}))`, evaluated with `expm1`. Tends to `d/2` as
/// `k → 0`, which is returned for `k = 0`.
pub fn beta_prefactor<T: Real>(k: T, distance: T) -> T {
    if k == T::zero() {
        return distance * T::of(0.5);
    }
    k * distance * distance / (T::of(-2.0) * (-k * distance).exp_m1())
}

fn integral<T: Real>(geom: &LinkGeometry<T>, k: T, cfg: &QuadratureConfig<T>) -> Result<Estimate<T>> {
    let integ = Integrator::new(*cfg)?;
    let (lo, hi) = geom.axial_range();
    let tan = geom.half_angle.tan();
    let d = geom.distance;
    integ.integrate_2d(
        |x, r| beta_integrand(x, r, d, k),
        lo,
        hi,
        |_| T::zero(),
        |x| x * tan,
    )
}

fn check_fraction<T: Real>(beta: T, est: &Estimate<T>, prefactor: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    if beta >= T::zero() && beta <= T::one() {
        return Ok(beta);
    }
    let slack = (est.error * prefactor).max(cfg.rel_tol * beta.abs()).max(cfg.abs_tol);
    if beta > T::one() && beta - T::one() <= slack {
        warn!("beta = {beta} exceeds 1 within quadrature tolerance; clamped");
        Ok(T::one())
    } else if beta < T::zero() && -beta <= slack {
        warn!("beta = {beta} below 0 within quadrature tolerance; clamped");
        Ok(T::zero())
    } else {
        Err(Error::BetaOutOfRange { value: beta.f64() })
    }
}

/// β for a medium with absorption coefficient `k > 0`.
pub fn compute_beta<T: Real>(geom: &LinkGeometry<T>, k: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    if k == T::zero() {
        return Err(Error::DegenerateMedium);
    }
    if !(k > T::zero()) || !k.is_finite() {
        return Err(Error::invalid("k", format!("must be > 0, got {k}")));
    }
    let est = integral(geom, k, cfg)?;
    let pre = beta_prefactor(k, geom.distance);
    check_fraction(pre * est.value, &est, pre, cfg)
}

/// Limit of β as `k → 0` (prefactor `d/2`).
pub fn lossless_beta<T: Real>(geom: &LinkGeometry<T>, cfg: &QuadratureConfig<T>) -> Result<T> {
    let est = integral(geom, T::zero(), cfg)?;
    let pre = beta_prefactor(T::zero(), geom.distance);
    check_fraction(pre * est.value, &est, pre, cfg)
}

/// Re-radiated power collected at the receiver, in W.
pub fn diffused_power<T: Real>(
    geom: &LinkGeometry<T>,
    k: T,
    budget: &LinkBudget<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    if !(k >= T::zero()) {
        return Err(Error::invalid("k", format!("must be >= 0, got {k}")));
    }
    let est = integral(geom, k, cfg)?;
    Ok(k * budget.product() / (T::of(8.0) * T::PI()) * est.value)
}

/// Classical upper bound on the re-radiated power at the receiver, in W.
pub fn diffused_power_max<T: Real>(distance: T, k: T, budget: &LinkBudget<T>) -> Result<T> {
    if !(distance > T::zero()) {
        return Err(Error::invalid("distance", format!("must be > 0, got {distance}")));
    }
    if !(k >= T::zero()) {
        return Err(Error::invalid("k", format!("must be >= 0, got {k}")));
    }
    let absorbed = -(-k * distance).exp_m1();
    Ok(budget.product() / (T::of(4.0) * T::PI() * distance * distance) * absorbed)
}

/// Monte-Carlo estimate of β with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSample<T> {
    pub beta: T,
    pub stderr: T,
    pub samples: u64,
}

/// Monte-Carlo evaluation of the β integral.
///
/// `x` is drawn with density proportional to the cone radius `x tanθ`, then
/// `r` uniformly on `[0, x tanθ]`, which is uniform on the region; each
/// sample is weighted by the region area. `k = 0` uses the `d/2` prefactor.
/// Deterministic for a given seed regardless of the rayon pool size.
pub fn beta_mc_oracle<T: Real>(geom: &LinkGeometry<T>, k: T, n: u64, seed: u64) -> Result<BetaSample<T>> {
    if n < 10_000 {
        return Err(Error::invalid("n", format!("need at least 10^4 samples, got {n}")));
    }
    if !(k >= T::zero()) {
        return Err(Error::invalid("k", format!("must be >= 0, got {k}")));
    }
    let (lo, hi) = geom.axial_range();
    let lo2 = lo * lo;
    let span2 = hi * hi - lo2;
    let tan = geom.half_angle.tan();
    let d = geom.distance;
    let partials: Vec<Moments<T>> = blocks(n)
        .map(|(b, len)| {
            let mut rng = block_rng(seed, 0, b);
            let mut m = Moments::default();
            for _ in 0..len {
                let u = T::unit_uniform(&mut rng);
                let v = T::unit_uniform(&mut rng);
                let x = (lo2 + u * span2).sqrt();
                let r = v * x * tan;
                m.push(beta_integrand(x, r, d, k));
            }
            m
        })
        .collect();
    let m = partials.into_iter().fold(Moments::default(), Moments::merge);
    let scale = beta_prefactor(k, d) * geom.region_area();
    Ok(BetaSample {
        beta: scale * m.mean,
        stderr: scale * m.stderr(),
        samples: n,
    })
}

/// Finds the half-angle at which β reaches `target` for the given link,
/// by bisection (β grows with the cone).
pub fn calibrate_half_angle<T: Real>(
    distance: T,
    eps_tx: T,
    eps_rx: T,
    k: T,
    target: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    let beta_at = |theta: T| -> Result<T> {
        compute_beta(&LinkGeometry::new(distance, theta, eps_tx, eps_rx)?, k, cfg)
    };
    let mut lo = T::of(1e-4);
    let mut hi = T::FRAC_PI_2() - T::of(1e-4);
    if !(beta_at(lo)? <= target && beta_at(hi)? >= target) {
        return Err(Error::invalid("target", format!("beta = {target} is not reachable for this link")));
    }
    for _ in 0..100 {
        let mid = (lo + hi) * T::of(0.5);
        if beta_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::of(1e-12) * hi {
            break;
        }
    }
    Ok((lo + hi) * T::of(0.5))
}

/// Evaluates β at every distance, in parallel, preserving order. Distances
/// whose Rayleigh distances leave no far-field region yield β = 0.
pub fn beta_sweep<T: Real>(
    distances: &[T],
    half_angle: T,
    eps_tx: T,
    eps_rx: T,
    k: T,
    cfg: &QuadratureConfig<T>,
) -> Result<Vec<T>> {
    distances
        .par_iter()
        .map(|&d| match LinkGeometry::far_field(d, half_angle, eps_tx, eps_rx)? {
            None => Ok(T::zero()),
            Some(g) if k == T::zero() => lossless_beta(&g, cfg),
            Some(g) => compute_beta(&g, k, cfg),
        })
        .collect()
}
