//! The β–γ LoS channel.
//!
//! A fraction `a = e^{-kd}` of the power survives the LoS path. Of the
//! absorbed `1 - a`, a fraction β reaches the receiver; γ of that arrives as
//! diffuse (Rician) scattering and `1 - γ` raises the noise floor in
//! proportion to the received symbol power.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{normal_cdf, Real};
use crate::special::{bessel_i0e, marcum_q1_complement};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Parameters of the unified channel and its noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel<T> {
    /// LoS transmittance `a`.
    pub transmittance: T,
    /// Fraction β of the maximum re-radiated power reaching the receiver.
    pub beta: T,
    /// Fraction γ of the received re-radiation that is coherent scattering.
    pub gamma: T,
    /// Thermal noise power σ² in W.
    pub thermal_noise: T,
    /// Received average symbol power Ē_s in W.
    pub es_bar: T,
}

/// One channel realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw<T> {
    pub h: Complex<T>,
    pub amplitude: T,
    pub phase: T,
}

/// Received SNR counting thermal noise only, Γ_rx = Ē_s/σ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec<T> {
    pub gamma_rx: T,
}

impl<T: Real> SnrSpec<T> {
    pub fn new(gamma_rx: T) -> Result<Self> {
        if !(gamma_rx > T::zero()) || !gamma_rx.is_finite() {
            return Err(Error::invalid("gamma_rx", format!("must be > 0, got {gamma_rx}")));
        }
        Ok(Self { gamma_rx })
    }

    pub fn from_db(db: T) -> Result<Self> {
        Self::new(crate::scalar::db_to_linear(db))
    }
}

fn check_fractions<T: Real>(a: T, beta: T, gamma: T) -> Result<()> {
    if !(a > T::zero() && a <= T::one()) {
        return Err(Error::invalid("transmittance", format!("must lie in (0, 1], got {a}")));
    }
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(Error::invalid("beta", format!("must lie in [0, 1], got {beta}")));
    }
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(Error::invalid("gamma", format!("must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

impl<T: Real> ChannelModel<T> {
    pub fn new(transmittance: T, beta: T, gamma: T, thermal_noise: T, es_bar: T) -> Result<Self> {
        check_fractions(transmittance, beta, gamma)?;
        if !(thermal_noise > T::zero()) || !thermal_noise.is_finite() {
            return Err(Error::invalid("thermal_noise", format!("must be > 0, got {thermal_noise}")));
        }
        if !(es_bar > T::zero()) || !es_bar.is_finite() {
            return Err(Error::invalid("es_bar", format!("must be > 0, got {es_bar}")));
        }
        Ok(Self {
            transmittance,
            beta,
            gamma,
            thermal_noise,
            es_bar,
        })
    }

    /// Model normalised to `Ē_s = 1` with `σ² = 1/Γ_rx`.
    pub fn from_rx_snr(transmittance: T, beta: T, gamma: T, snr: SnrSpec<T>) -> Result<Self> {
        Self::new(transmittance, beta, gamma, snr.gamma_rx.recip(), T::one())
    }

    pub fn rx_snr(&self) -> T {
        self.es_bar / self.thermal_noise
    }

    pub fn rician_factor(&self) -> T {
        rician_factor(self.transmittance, self.beta, self.gamma)
    }

    /// σ_l², the total power through the channel.
    pub fn total_power(&self) -> T {
        total_channel_power(self.transmittance, self.beta, self.gamma)
    }

    /// Diffuse (scattered) power `γβ(1-a)`.
    pub fn diffuse_power(&self) -> T {
        self.gamma * self.beta * (T::one() - self.transmittance)
    }

    /// Re-radiation noise per unit received symbol energy, `β(1-γ)(1-a)`.
    pub fn reradiation_noise_scale(&self) -> T {
        self.beta * (T::one() - self.gamma) * (T::one() - self.transmittance)
    }

    pub fn noise_variance(&self) -> T {
        noise_variance(self)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw<T> {
        sample_channel(self, rng)
    }

    pub fn instantaneous_snr(&self, amplitude: T) -> T {
        instantaneous_snr(self, amplitude)
    }

    pub fn limiting_avg_snr(&self) -> T {
        limiting_avg_snr(self.transmittance, self.beta, self.gamma)
    }
}

/// Received average symbol power `(c / 4πfd)² E_avg` for transmit power `E_avg`.
pub fn received_symbol_power<T: Real>(transmit_power: T, frequency: T, distance: T) -> T {
    let ratio = T::of(SPEED_OF_LIGHT) / (T::of(4.0) * T::PI() * frequency * distance);
    ratio * ratio * transmit_power
}

/// Rician factor `a / (γβ(1-a))`; infinite when the diffuse part vanishes.
pub fn rician_factor<T: Real>(a: T, beta: T, gamma: T) -> T {
    let diffuse = gamma * beta * (T::one() - a);
    if diffuse > T::zero() {
        a / diffuse
    } else {
        T::infinity()
    }
}

/// `σ_l² = a + γβ(1-a)`.
pub fn total_channel_power<T: Real>(a: T, beta: T, gamma: T) -> T {
    a + gamma * beta * (T::one() - a)
}

/// Total noise variance `σ² + Ē_s β(1-γ)(1-a)`.
pub fn noise_variance<T: Real>(model: &ChannelModel<T>) -> T {
    model.thermal_noise + model.es_bar * model.reradiation_noise_scale()
}

/// Draws `h`. The LoS term `√(K/(K+1)) σ_l e^{jθ}` has amplitude `√a` and
/// the diffuse term `√(1/(K+1)) CN(0, σ_l²)` is `CN(0, γβ(1-a))`; both forms
/// are used in that reduced shape so K = ∞ (γ = 0, β = 0 or a = 1) needs no
/// special case. θ is uniform on [0, 2π).
pub fn sample_channel<T: Real, R: Rng + ?Sized>(model: &ChannelModel<T>, rng: &mut R) -> ChannelDraw<T> {
    let theta = T::unit_uniform(rng) * T::TAU();
    let los = Complex::from_polar(model.transmittance.sqrt(), theta);
    let h = if model.gamma > T::zero() {
        let sd = (model.diffuse_power() * T::of(0.5)).sqrt();
        let re = T::standard_normal(rng);
        let im = T::standard_normal(rng);
        los + Complex::new(re * sd, im * sd)
    } else {
        // γ = 0: deterministic amplitude σ_l = √a
        los
    };
    let (amplitude, phase) = h.to_polar();
    ChannelDraw { h, amplitude, phase }
}

fn check_amplitude_params<T: Real>(k: T, sigma_l: T) -> Result<()> {
    if k.is_infinite() {
        return Err(Error::DegenerateDistribution);
    }
    if !(k >= T::zero()) {
        return Err(Error::invalid("K", format!("must be >= 0, got {k}")));
    }
    if !(sigma_l > T::zero()) {
        return Err(Error::invalid("sigma_l", format!("must be > 0, got {sigma_l}")));
    }
    Ok(())
}

/// Rician amplitude density of `r = |h|` with factor K and `E[r²] = σ_l²`.
///
/// Evaluated through the scaled Bessel function,
/// `2(K+1) r/σ_l² · exp(-(√K - √(K+1) r/σ_l)²) · I₀e(2r√(K(K+1))/σ_l)`,
/// which stays finite for any finite K.
pub fn amplitude_pdf<T: Real>(r: T, k: T, sigma_l: T) -> Result<T> {
    check_amplitude_params(k, sigma_l)?;
    if r <= T::zero() {
        return Ok(T::zero());
    }
    let kp1 = k + T::one();
    let s2 = sigma_l * sigma_l;
    let t = k.sqrt() - kp1.sqrt() * r / sigma_l;
    let z = T::of(2.0) * r * (k * kp1).sqrt() / sigma_l;
    Ok(T::of(2.0) * kp1 * r / s2 * (-t * t).exp() * bessel_i0e(z))
}

/// `F_R(r) = 1 - Q₁(√(2K), r√(2(K+1))/σ_l)`.
pub fn amplitude_cdf<T: Real>(r: T, k: T, sigma_l: T) -> Result<T> {
    check_amplitude_params(k, sigma_l)?;
    if r <= T::zero() {
        return Ok(T::zero());
    }
    if r.is_infinite() {
        return Ok(T::one());
    }
    let alpha = (T::of(2.0) * k).sqrt();
    let b = r * (T::of(2.0) * (k + T::one())).sqrt() / sigma_l;
    Ok(marcum_q1_complement(alpha, b).min(T::one()))
}

/// Mean and standard deviation of the large-K normal approximation
/// `r ~ N(√(K/(K+1)) σ_l, σ_l²/(2(K+1)))`.
pub fn amplitude_normal_params<T: Real>(k: T, sigma_l: T) -> (T, T) {
    let kp1 = k + T::one();
    ((k / kp1).sqrt() * sigma_l, sigma_l / (T::of(2.0) * kp1).sqrt())
}

/// Density of the large-K normal approximation.
pub fn amplitude_pdf_normal<T: Real>(r: T, k: T, sigma_l: T) -> Result<T> {
    check_amplitude_params(k, sigma_l)?;
    let (mean, sd) = amplitude_normal_params(k, sigma_l);
    let z = (r - mean) / sd;
    Ok((-(z * z) * T::of(0.5)).exp() / (sd * T::TAU().sqrt()))
}

/// CDF of the large-K normal approximation.
pub fn amplitude_cdf_normal<T: Real>(r: T, k: T, sigma_l: T) -> Result<T> {
    check_amplitude_params(k, sigma_l)?;
    let (mean, sd) = amplitude_normal_params(k, sigma_l);
    Ok(normal_cdf((r - mean) / sd))
}

/// `Γ = Γ_rx r² / (Γ_rx β(1-γ)(1-a) + 1)`.
pub fn instantaneous_snr<T: Real>(model: &ChannelModel<T>, amplitude: T) -> T {
    let g = model.rx_snr();
    g * amplitude * amplitude / (g * model.reradiation_noise_scale() + T::one())
}

/// Limit of `E[Γ]` as `Γ_rx → ∞`: `(a + γβ(1-a)) / (β(1-γ)(1-a))`.
/// Infinite when no re-radiation reaches the noise floor.
pub fn limiting_avg_snr<T: Real>(a: T, beta: T, gamma: T) -> T {
    let noise = beta * (T::one() - gamma) * (T::one() - a);
    if noise > T::zero() {
        total_channel_power(a, beta, gamma) / noise
    } else {
        T::infinity()
    }
}
