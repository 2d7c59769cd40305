//! Closed-form symbol error rates under energy-dependent noise: the exact
//! PAM expression and the nearest-neighbour union bound for square QAM.
//!
//! Everything is conditional on the channel amplitude `|h|`; the
//! [`ser_for_channel`] entry point either fixes `|h| = σ_l` or averages the
//! conditional SER over the Rician amplitude density.

use crate::channel::{amplitude_pdf, ChannelModel};
use crate::error::{Error, Result};
use crate::modem::{qam_threshold, qam_threshold_relaxed, symbol_noise_variance, Constellation, Modulation, NoiseProfile};
use crate::quadrature::Integrator;
use crate::scalar::{q_function, Real};
use num_complex::Complex;

/// Per-class contributions to the QAM union bound, each already summed over
/// the first quadrant: inner points (four neighbours), side points (three)
/// and the corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamComponents<T> {
    pub pm: T,
    pub ps: T,
    pub pc: T,
}

/// SER at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint<T> {
    /// Thermal-only receive SNR `Ē_s/σ²`.
    pub gamma_rx: T,
    pub h_mag: T,
    /// Capped to `[0, 1]`.
    pub ser: T,
    pub components: Option<QamComponents<T>>,
}

/// How the thresholds treat a boundary that leaves the interval between
/// its two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Raise [`Error::ThresholdDegeneracy`].
    Strict,
    /// Keep following the root; used inside fading averages.
    Relaxed,
}

/// How the channel amplitude enters [`ser_for_channel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Conditional SER at `|h| = σ_l`, the RMS amplitude.
    Conditional,
    /// Conditional SER averaged over the Rician amplitude density.
    Fading,
}

impl std::fmt::Display for Averaging {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Averaging::Conditional => "conditional",
            Averaging::Fading => "fading",
        })
    }
}

fn pair_threshold<T: Real>(x0: T, x1: T, v0: T, v1: T, mode: ThresholdMode) -> Result<T> {
    match mode {
        ThresholdMode::Strict => qam_threshold(x0, x1, v0, v1),
        ThresholdMode::Relaxed => qam_threshold_relaxed(x0, x1, v0, v1),
    }
}

fn check_inputs<T: Real>(c: &Constellation<T>, kind: Modulation, h_mag: T) -> Result<()> {
    if c.kind() != kind {
        return Err(Error::invalid("constellation", format!("expected {kind}, got {}", c.kind())));
    }
    if !(h_mag > T::zero()) || !h_mag.is_finite() {
        return Err(Error::invalid("h_mag", format!("must be > 0, got {h_mag}")));
    }
    Ok(())
}

/// Exact M-PAM SER for amplitude `|h|`:
///
/// `2/M [Q(|h|Δ/(σ_{M/2}/√2)) + Σ Q((T_i + |h|Δ)/(σ_i/√2)) + Q((|h|Δ - T_i)/(σ_{i+1}/√2))]`
///
/// with the sum over adjacent pairs on the positive half-axis and `T_i`
/// measured from each pair's midpoint.
pub fn ser_pam<T: Real>(c: &Constellation<T>, h_mag: T, profile: &NoiseProfile<T>) -> Result<T> {
    ser_pam_with(c, h_mag, profile, ThresholdMode::Strict)
}

pub fn ser_pam_with<T: Real>(
    c: &Constellation<T>,
    h_mag: T,
    profile: &NoiseProfile<T>,
    mode: ThresholdMode,
) -> Result<T> {
    check_inputs(c, Modulation::Pam, h_mag)?;
    let m = c.order();
    let half = m / 2;
    let var = |l: usize| symbol_noise_variance(Complex::new(c.level(l), T::zero()), profile);
    let sd = |l: usize| (var(l) * T::of(0.5)).sqrt();
    let gap = h_mag * c.delta();
    let mut total = q_function(gap / sd(half));
    for l in half..m - 1 {
        let x0 = c.level(l) * h_mag;
        let x1 = c.level(l + 1) * h_mag;
        let t = pair_threshold(x0, x1, var(l), var(l + 1), mode)? - (x0 + x1) * T::of(0.5);
        total = total + q_function((t + gap) / sd(l)) + q_function((gap - t) / sd(l + 1));
    }
    Ok((T::of(2.0) / T::of(m as f64) * total).min(T::one()))
}

/// Nearest-neighbour union bound `4/M (Pm + Ps + Pc)` for square QAM.
///
/// Each first-quadrant point contributes `1 - P_h P_v`, where `P_h` and
/// `P_v` are the per-axis probabilities of landing between its thresholds.
/// A point on the first row or column borders its mirror image across the
/// axis, which has the same variance, so that boundary is the axis itself.
/// The outermost points have no outer boundary.
pub fn ser_qam_union<T: Real>(c: &Constellation<T>, h_mag: T, profile: &NoiseProfile<T>) -> Result<SerPoint<T>> {
    ser_qam_union_with(c, h_mag, profile, ThresholdMode::Strict)
}

pub fn ser_qam_union_with<T: Real>(
    c: &Constellation<T>,
    h_mag: T,
    profile: &NoiseProfile<T>,
    mode: ThresholdMode,
) -> Result<SerPoint<T>> {
    check_inputs(c, Modulation::Qam, h_mag)?;
    let n = c.levels_per_axis();
    let half = n / 2;
    let var = |li: usize, lq: usize| symbol_noise_variance(Complex::new(c.level(li), c.level(lq)), profile);
    let x = |l: usize| c.level(l) * h_mag;

    // per-axis error probability of the point at level `l` along the axis,
    // `other` fixing its level on the orthogonal axis
    let axis_error = |l: usize, other: usize| -> Result<T> {
        let v = var(l, other);
        let sd = (v * T::of(0.5)).sqrt();
        let lower = if l == half {
            T::zero()
        } else {
            pair_threshold(x(l - 1), x(l), var(l - 1, other), v, mode)?
        };
        let mut e = q_function((x(l) - lower) / sd);
        if l + 1 < n {
            let upper = pair_threshold(x(l), x(l + 1), v, var(l + 1, other), mode)?;
            e = e + q_function((upper - x(l)) / sd);
        }
        Ok(e)
    };

    let (mut pm, mut ps, mut pc) = (T::zero(), T::zero(), T::zero());
    for li in half..n {
        for lq in half..n {
            let eh = axis_error(li, lq)?;
            let ev = axis_error(lq, li)?;
            // 1 - (1 - eh)(1 - ev) without cancellation
            let err = eh + ev - eh * ev;
            match (li + 1 == n, lq + 1 == n) {
                (false, false) => pm = pm + err,
                (true, true) => pc = pc + err,
                _ => ps = ps + err,
            }
        }
    }
    let ser = (T::of(4.0) / T::of(c.order() as f64) * (pm + ps + pc)).min(T::one());
    Ok(SerPoint {
        gamma_rx: c.es_bar() / profile.thermal,
        h_mag,
        ser,
        components: Some(QamComponents { pm, ps, pc }),
    })
}

/// Conditional SER for either modulation.
pub fn ser_conditional<T: Real>(
    c: &Constellation<T>,
    h_mag: T,
    profile: &NoiseProfile<T>,
    mode: ThresholdMode,
) -> Result<SerPoint<T>> {
    match c.kind() {
        Modulation::Pam => Ok(SerPoint {
            gamma_rx: c.es_bar() / profile.thermal,
            h_mag,
            ser: ser_pam_with(c, h_mag, profile, mode)?,
            components: None,
        }),
        Modulation::Qam => ser_qam_union_with(c, h_mag, profile, mode),
    }
}

/// `∫ f(r) p_R(r) dr` over the Rician amplitude with factor `k` and
/// `E[r²] = σ_l²`. The range spans twelve approximate standard deviations
/// either side of the peak and is split there.
pub fn average_over_amplitude<T: Real, F>(k: T, sigma_l: T, mut f: F, integrator: &Integrator<T>) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let kp1 = k + T::one();
    let peak = sigma_l * (k / kp1).sqrt();
    let spread = sigma_l / (T::of(2.0) * kp1).sqrt();
    let lo = (peak - T::of(12.0) * spread).max(T::zero());
    let hi = peak + T::of(12.0) * spread;
    let mut failure = None;
    let mut integrand = |r: T| -> T {
        if failure.is_some() {
            return T::zero();
        }
        match f(r).and_then(|v| Ok(v * amplitude_pdf(r, k, sigma_l)?)) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                T::zero()
            }
        }
    };
    let mut total = T::zero();
    for (a, b) in [(lo, peak), (peak, hi)] {
        if b > a {
            total = total + integrator.integrate(&mut integrand, a, b)?.value;
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// SER of `c` over `model` under the given averaging.
///
/// With no diffuse component (K = ∞) the amplitude is fixed at `σ_l` and
/// both modes coincide. The fading average uses relaxed thresholds.
pub fn ser_for_channel<T: Real>(
    c: &Constellation<T>,
    model: &ChannelModel<T>,
    averaging: Averaging,
    integrator: &Integrator<T>,
) -> Result<SerPoint<T>> {
    let profile = NoiseProfile::from_channel(model);
    let sigma_l = model.total_power().sqrt();
    let k = model.rician_factor();
    if averaging == Averaging::Conditional || k.is_infinite() {
        return ser_conditional(c, sigma_l, &profile, ThresholdMode::Strict);
    }
    let ser = average_over_amplitude(
        k,
        sigma_l,
        |r| {
            if r > T::zero() {
                Ok(ser_conditional(c, r, &profile, ThresholdMode::Relaxed)?.ser)
            } else {
                Ok(T::one() - T::one() / T::of(c.order() as f64))
            }
        },
        integrator,
    )?;
    Ok(SerPoint {
        gamma_rx: model.rx_snr(),
        h_mag: sigma_l,
        ser: ser.clamp(T::zero(), T::one()),
        components: None,
    })
}

/// Equal-variance M-PAM SER `2(M-1)/M · Q(√2 |h|Δ/σ)`.
pub fn textbook_pam_ser<T: Real>(order: usize, h_mag: T, delta: T, thermal: T) -> T {
    let m = T::of(order as f64);
    T::of(2.0) * (m - T::one()) / m * q_function(T::SQRT_2() * h_mag * delta / thermal.sqrt())
}

/// Equal-variance square-QAM SER `1 - (1 - p)²` with
/// `p = 2(1 - 1/√M) Q(√2 |h|Δ/σ)`. For square QAM the nearest-neighbour
/// regions are exact, so this is also the nearest-neighbour union bound.
pub fn textbook_qam_ser<T: Real>(order: usize, h_mag: T, delta: T, thermal: T) -> T {
    let side = T::of(order as f64).sqrt();
    let p = T::of(2.0) * (T::one() - side.recip()) * q_function(T::SQRT_2() * h_mag * delta / thermal.sqrt());
    p * (T::of(2.0) - p)
}
