//! Constellations, energy-dependent noise, unequal-variance ML thresholds
//! and symbol detectors.
//!
//! All decisions happen in the derotated frame `ỹ = |h| s + ñ`. A symbol of
//! energy `|s|²` sees complex noise of variance `σ² + |s|² β(1-γ)(1-a)`,
//! i.e. half of that per quadrature component.
//!
//! Indexing: PAM point `i` (0-based) sits at `(2i+1-M)Δ`. QAM point
//! `li·L + lq` sits at `(x_li, x_lq)` with `x_l = (2l+1-L)Δ` and `L = √M`.
//! Ties always go to the lower index.

use num_complex::Complex;

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Pam,
    Qam,
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modulation::Pam => "PAM",
            Modulation::Qam => "QAM",
        })
    }
}

/// Square QAM or real PAM constellation with mean symbol energy `Ē_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    kind: Modulation,
    order: usize,
    delta: T,
    es_bar: T,
    points: Vec<Complex<T>>,
}

impl<T: Real> Constellation<T> {
    /// M-PAM with `Δ = √(3Ē_s/(M²-1))`; M even and at least 2.
    pub fn pam(order: usize, es_bar: T) -> Result<Self> {
        if order < 2 || !order.is_multiple_of(2) {
            return Err(Error::invalid("order", format!("PAM needs an even M >= 2, got {order}")));
        }
        check_energy(es_bar)?;
        let m = T::of(order as f64);
        let delta = (T::of(3.0) * es_bar / (m * m - T::one())).sqrt();
        let points = (0..order)
            .map(|i| Complex::new(level(i, order, delta), T::zero()))
            .collect();
        Ok(Self {
            kind: Modulation::Pam,
            order,
            delta,
            es_bar,
            points,
        })
    }

    /// Square M-QAM with `Δ = √(3Ē_s/(2(M-1)))`; M ∈ {4, 16, 64, 256}.
    pub fn qam(order: usize, es_bar: T) -> Result<Self> {
        if ![4, 16, 64, 256].contains(&order) {
            return Err(Error::invalid(
                "order",
                format!("square QAM needs M in {{4, 16, 64, 256}}, got {order}"),
            ));
        }
        check_energy(es_bar)?;
        let delta = (T::of(3.0) * es_bar / (T::of(2.0) * T::of((order - 1) as f64))).sqrt();
        let side = side_of(order);
        let mut points = Vec::with_capacity(order);
        for li in 0..side {
            for lq in 0..side {
                points.push(Complex::new(level(li, side, delta), level(lq, side, delta)));
            }
        }
        Ok(Self {
            kind: Modulation::Qam,
            order,
            delta,
            es_bar,
            points,
        })
    }

    pub fn new(kind: Modulation, order: usize, es_bar: T) -> Result<Self> {
        match kind {
            Modulation::Pam => Self::pam(order, es_bar),
            Modulation::Qam => Self::qam(order, es_bar),
        }
    }

    pub fn kind(&self) -> Modulation {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn es_bar(&self) -> T {
        self.es_bar
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    /// Amplitude levels per axis: M for PAM, √M for QAM.
    pub fn levels_per_axis(&self) -> usize {
        match self.kind {
            Modulation::Pam => self.order,
            Modulation::Qam => side_of(self.order),
        }
    }

    /// Coordinate of per-axis level `l`.
    pub fn level(&self, l: usize) -> T {
        level(l, self.levels_per_axis(), self.delta)
    }

    pub fn mean_energy(&self) -> T {
        self.points.iter().map(|p| p.norm_sqr()).sum::<T>() / T::of(self.order as f64)
    }
}

fn check_energy<T: Real>(es_bar: T) -> Result<()> {
    if !(es_bar > T::zero()) || !es_bar.is_finite() {
        return Err(Error::invalid("es_bar", format!("must be > 0, got {es_bar}")));
    }
    Ok(())
}

fn side_of(order: usize) -> usize {
    (order as f64).sqrt().round() as usize
}

fn level<T: Real>(l: usize, n: usize, delta: T) -> T {
    T::of(2.0 * l as f64 + 1.0 - n as f64) * delta
}

/// Thermal noise and the re-radiation noise per unit symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile<T> {
    pub thermal: T,
    pub scale: T,
}

impl<T: Real> NoiseProfile<T> {
    /// Both terms must be finite and non-negative, and not both zero.
    pub fn new(thermal: T, scale: T) -> Result<Self> {
        for (name, v) in [("thermal", thermal), ("scale", scale)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if thermal == T::zero() && scale == T::zero() {
            return Err(Error::invalid("thermal", "noise-free profile".to_string()));
        }
        Ok(Self { thermal, scale })
    }

    pub fn from_channel(model: &ChannelModel<T>) -> Self {
        Self {
            thermal: model.thermal_noise,
            scale: model.reradiation_noise_scale(),
        }
    }

    pub fn is_equal_variance(&self) -> bool {
        self.scale == T::zero()
    }
}

/// `σ² + |s|² β(1-γ)(1-a)`.
pub fn symbol_noise_variance<T: Real>(point: Complex<T>, profile: &NoiseProfile<T>) -> T {
    profile.thermal + point.norm_sqr() * profile.scale
}

fn threshold_degeneracy<T: Real>(p0: T, p1: T, var0: T, var1: T) -> Error {
    Error::ThresholdDegeneracy {
        p0: p0.f64(),
        p1: p1.f64(),
        var0: var0.f64(),
        var1: var1.f64(),
    }
}

fn check_variances<T: Real>(var0: T, var1: T) -> Result<()> {
    for v in [var0, var1] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::invalid("variance", format!("must be finite and > 0, got {v}")));
        }
    }
    Ok(())
}

/// Likelihood-equality root for points at `-c` (variance `var_lo`) and `+c`
/// (variance `var_hi`), measured from their midpoint. The discriminant is
/// `var_lo·var_hi·(4c² + D ln(var_hi/var_lo)/2) ≥ 0`, so the root is always
/// real; it is taken in the form that stays accurate when `D → 0`.
fn pam_root<T: Real>(var_lo: T, var_hi: T, c: T) -> T {
    let half = T::of(0.5);
    let d = var_hi - var_lo;
    let s = var_hi + var_lo;
    let log_ratio = (var_hi / var_lo).ln();
    let prod = var_lo * var_hi;
    let qd = c * c * d - half * prod * log_ratio;
    let disc = prod * (T::of(4.0) * c * c + half * d * log_ratio);
    -qd / (c * s + disc.max(T::zero()).sqrt())
}

/// ML threshold between two adjacent PAM points at `∓|h|Δ` relative to their
/// midpoint, where `var_lo` belongs to the point at `-|h|Δ`.
///
/// Fails with [`Error::ThresholdDegeneracy`] when the root leaves
/// `(-|h|Δ, |h|Δ)`.
pub fn pam_threshold<T: Real>(var_lo: T, var_hi: T, h_mag: T, delta: T) -> Result<T> {
    check_variances(var_lo, var_hi)?;
    if !(h_mag > T::zero()) || !(delta > T::zero()) {
        return Err(Error::invalid("h_mag", "|h| and Δ must be > 0".to_string()));
    }
    let c = h_mag * delta;
    let t = pam_root(var_lo, var_hi, c);
    if t > -c && t < c {
        Ok(t)
    } else {
        Err(threshold_degeneracy(-c, c, var_lo, var_hi))
    }
}

/// Real roots of `A x² + B x + C` for the pair `(p0, var0)`, `(p1, var1)`,
/// with
/// `A = var0 - var1`, `B = 2(p0 var1 - p1 var0)` and
/// `C = p1² var0 - p0² var1 - ln(σ0/σ1) var0 var1`.
fn qam_roots<T: Real>(p0: T, p1: T, var0: T, var1: T) -> Result<(T, Option<T>)> {
    let two = T::of(2.0);
    let a = var0 - var1;
    let b = two * (p0 * var1 - p1 * var0);
    let c = p1 * p1 * var0 - p0 * p0 * var1 - T::of(0.5) * (var0 / var1).ln() * var0 * var1;
    if a == T::zero() {
        // -C/B reduces to the midpoint exactly; skip the rounding
        return Ok(((p0 + p1) * T::of(0.5), None));
    }
    let disc = b * b - T::of(4.0) * a * c;
    if disc < T::zero() {
        return Err(threshold_degeneracy(p0, p1, var0, var1));
    }
    let sign = if b < T::zero() { -T::one() } else { T::one() };
    let q = -T::of(0.5) * (b + sign * disc.sqrt());
    if q == T::zero() {
        // b = 0 and disc = 0: double root
        return Ok((T::zero(), None));
    }
    Ok((c / q, Some(q / a)))
}

/// ML threshold between 1-D points `p0` and `p1` with variances `var0` and
/// `var1`: the quadratic root lying strictly between the two points.
pub fn qam_threshold<T: Real>(p0: T, p1: T, var0: T, var1: T) -> Result<T> {
    check_variances(var0, var1)?;
    if p0 == p1 {
        return Err(Error::invalid("p1", "points must differ".to_string()));
    }
    let (lo, hi) = (p0.min(p1), p0.max(p1));
    let (r0, r1) = qam_roots(p0, p1, var0, var1)?;
    [Some(r0), r1]
        .into_iter()
        .flatten()
        .find(|&r| r > lo && r < hi)
        .ok_or_else(|| threshold_degeneracy(p0, p1, var0, var1))
}

/// Like [`qam_threshold`] but accepts a boundary outside `(p0, p1)`. Very
/// small `|h|` can push the boundary past a point; this keeps following the
/// same root instead of failing, which is what averaging over fading needs.
/// Agrees with [`qam_threshold`] wherever that succeeds.
pub fn qam_threshold_relaxed<T: Real>(p0: T, p1: T, var0: T, var1: T) -> Result<T> {
    check_variances(var0, var1)?;
    if p0 == p1 {
        return Err(Error::invalid("p1", "points must differ".to_string()));
    }
    let (lo, hi, var_lo, var_hi) = if p0 < p1 {
        (p0, p1, var0, var1)
    } else {
        (p1, p0, var1, var0)
    };
    let half = (hi - lo) * T::of(0.5);
    Ok(lo + half + pam_root(var_lo, var_hi, half))
}

/// Decision boundaries in the derotated frame for a given `|h|`.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSet<T> {
    /// `M - 1` absolute boundaries between adjacent PAM points, ascending.
    Pam(Vec<T>),
    /// Per-axis boundaries; `columns[lq][li]` separates in-phase levels `li`
    /// and `li + 1` on the row at quadrature level `lq`, `rows[li][lq]` the
    /// quadrature levels `lq` and `lq + 1` in the column at in-phase `li`.
    Qam { columns: Vec<Vec<T>>, rows: Vec<Vec<T>> },
}

impl<T: Real> ThresholdSet<T> {
    pub fn new(constellation: &Constellation<T>, h_mag: T, profile: &NoiseProfile<T>) -> Result<Self> {
        let n = constellation.levels_per_axis();
        let x = |l: usize| constellation.level(l) * h_mag;
        let var = |li: usize, lq: usize| {
            let p = match constellation.kind() {
                Modulation::Pam => Complex::new(constellation.level(li), T::zero()),
                Modulation::Qam => Complex::new(constellation.level(li), constellation.level(lq)),
            };
            symbol_noise_variance(p, profile)
        };
        match constellation.kind() {
            Modulation::Pam => (0..n - 1)
                .map(|l| qam_threshold(x(l), x(l + 1), var(l, 0), var(l + 1, 0)))
                .collect::<Result<_>>()
                .map(ThresholdSet::Pam),
            Modulation::Qam => {
                let mut columns = Vec::with_capacity(n);
                for lq in 0..n {
                    columns.push(
                        (0..n - 1)
                            .map(|li| qam_threshold(x(li), x(li + 1), var(li, lq), var(li + 1, lq)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                // σ² is symmetric in the two coordinates
                let rows = columns.clone();
                Ok(ThresholdSet::Qam { columns, rows })
            }
        }
    }

    /// PAM decision by interval lookup on the in-phase component.
    pub fn decide_pam(&self, x: T) -> Option<usize> {
        match self {
            ThresholdSet::Pam(bounds) => Some(bounds.partition_point(|&t| t < x)),
            ThresholdSet::Qam { .. } => None,
        }
    }
}

/// Detector state for one constellation and noise profile.
#[derive(Debug, Clone)]
pub struct Detector<T> {
    kind: Modulation,
    points: Vec<Complex<T>>,
    inv_variances: Vec<T>,
    log_variances: Vec<T>,
}

impl<T: Real> Detector<T> {
    pub fn new(constellation: &Constellation<T>, profile: &NoiseProfile<T>) -> Self {
        let points = constellation.points().to_vec();
        let variances: Vec<T> = points.iter().map(|&p| symbol_noise_variance(p, profile)).collect();
        // PAM uses the in-phase density, whose normaliser is √σ²
        let weight = match constellation.kind() {
            Modulation::Pam => T::of(0.5),
            Modulation::Qam => T::one(),
        };
        Self {
            kind: constellation.kind(),
            inv_variances: variances.iter().map(|v| v.recip()).collect(),
            log_variances: variances.iter().map(|v| weight * v.ln()).collect(),
            points,
        }
    }

    /// Maximum-likelihood decision under per-symbol noise variances. PAM
    /// uses the in-phase component only, QAM the full 2-D likelihood.
    pub fn optimal(&self, y: Complex<T>, h_mag: T) -> usize {
        let mut best = 0;
        let mut best_metric = T::neg_infinity();
        for (m, p) in self.points.iter().enumerate() {
            let dist = match self.kind {
                Modulation::Pam => {
                    let e = y.re - p.re * h_mag;
                    e * e
                }
                Modulation::Qam => (y - *p * h_mag).norm_sqr(),
            };
            let metric = -dist * self.inv_variances[m] - self.log_variances[m];
            if metric > best_metric {
                best_metric = metric;
                best = m;
            }
        }
        best
    }

    /// Minimum-distance decision, which is ML only for equal variances.
    pub fn suboptimal(&self, y: Complex<T>, h_mag: T) -> usize {
        let mut best = 0;
        let mut best_dist = T::infinity();
        for (m, p) in self.points.iter().enumerate() {
            let dist = match self.kind {
                Modulation::Pam => {
                    let e = y.re - p.re * h_mag;
                    e * e
                }
                Modulation::Qam => (y - *p * h_mag).norm_sqr(),
            };
            if dist < best_dist {
                best_dist = dist;
                best = m;
            }
        }
        best
    }
}

/// One-shot [`Detector::optimal`].
pub fn detect_optimal<T: Real>(
    y: Complex<T>,
    constellation: &Constellation<T>,
    h_mag: T,
    profile: &NoiseProfile<T>,
) -> usize {
    Detector::new(constellation, profile).optimal(y, h_mag)
}

/// One-shot [`Detector::suboptimal`].
pub fn detect_suboptimal<T: Real>(y: Complex<T>, constellation: &Constellation<T>, h_mag: T) -> usize {
    // the profile does not affect minimum-distance decisions
    let profile = NoiseProfile {
        thermal: T::one(),
        scale: T::zero(),
    };
    Detector::new(constellation, &profile).suboptimal(y, h_mag)
}
