//! Monte-Carlo link simulation.
//!
//! Each trial draws the channel, a uniform symbol and complex Gaussian noise
//! whose variance grows with the symbol's energy, derotates by the channel
//! phase and hands the same observation to both detectors. Trials are cut
//! into blocks with their own counter-based streams (see [`crate::streams`]),
//! so results do not depend on the number of worker threads.

use num_complex::Complex;
use rand::Rng;

use crate::channel::{ChannelModel, SnrSpec};
use crate::error::{Error, Result};
use crate::modem::{Constellation, Detector, Modulation, NoiseProfile};
use crate::scalar::Real;
use crate::stats::Moments;
use crate::streams::{block_rng, map_blocks};

/// Grid points with fewer errors than this are flagged unreliable.
pub const MIN_RELIABLE_ERRORS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingMode {
    /// Independent channel draw every trial.
    PerTrial,
    /// `|h| = σ_l` for every trial; matches the conditional SER.
    FixedAmplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorSelection {
    Optimal,
    Suboptimal,
    Both,
}

impl DetectorSelection {
    pub fn optimal(self) -> bool {
        matches!(self, DetectorSelection::Optimal | DetectorSelection::Both)
    }

    pub fn suboptimal(self) -> bool {
        matches!(self, DetectorSelection::Suboptimal | DetectorSelection::Both)
    }
}

/// SER simulation over a grid of receive SNRs. Symbols are normalised to
/// `Ē_s = 1`, so `σ² = 10^{-snr_db/10}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub modulation: Modulation,
    pub order: usize,
    pub transmittance: T,
    pub beta: T,
    pub gamma: T,
    /// Γ_rx grid in dB, strictly increasing.
    pub snr_db: Vec<T>,
    pub trials: u64,
    pub seed: u64,
    pub detectors: DetectorSelection,
    pub fading: FadingMode,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1".to_string()));
        }
        check_grid(&self.snr_db, "snr_db")?;
        Constellation::new(self.modulation, self.order, T::one())?;
        for &db in &self.snr_db {
            self.model(db)?;
        }
        Ok(())
    }

    pub fn model(&self, snr_db: T) -> Result<ChannelModel<T>> {
        ChannelModel::from_rx_snr(self.transmittance, self.beta, self.gamma, SnrSpec::from_db(snr_db)?)
    }
}

fn check_grid<T: Real>(grid: &[T], name: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "grid is empty".to_string()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "grid has non-finite values".to_string()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, "grid must be strictly increasing".to_string()));
    }
    Ok(())
}

/// Error count with its binomial summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ser_hat: f64,
    /// `√(p(1-p)/n)`.
    pub stderr: f64,
    /// At least [`MIN_RELIABLE_ERRORS`] errors.
    pub reliable: bool,
}

impl SerEstimate {
    pub fn new(errors: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = errors as f64 / n;
        Self {
            errors,
            trials,
            ser_hat: p,
            stderr: (p * (1.0 - p) / n).sqrt(),
            reliable: errors >= MIN_RELIABLE_ERRORS,
        }
    }

    /// `[p - zσ, p + zσ]`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.ser_hat - z * self.stderr, self.ser_hat + z * self.stderr)
    }

    /// Whether the two `z`-sigma intervals are disjoint.
    pub fn separated_from(&self, other: &SerEstimate, z: f64) -> bool {
        let (a0, a1) = self.interval(z);
        let (b0, b1) = other.interval(z);
        a1 < b0 || b1 < a0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerSimPoint<T> {
    pub snr_db: T,
    pub optimal: Option<SerEstimate>,
    pub suboptimal: Option<SerEstimate>,
}

/// Complex Gaussian noise `CN(0, variance)`.
pub fn complex_noise<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let sd = (variance * T::of(0.5)).sqrt();
    let re = T::standard_normal(rng);
    let im = T::standard_normal(rng);
    Complex::new(re * sd, im * sd)
}

/// Runs the SER simulation for every grid point in order.
pub fn run_ser_sim<T: Real>(cfg: &SimConfig<T>) -> Result<Vec<SerSimPoint<T>>> {
    cfg.validate()?;
    let constellation = Constellation::new(cfg.modulation, cfg.order, T::one())?;
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr_db)| {
            let model = cfg.model(snr_db)?;
            let (opt, sub) = simulate_point(cfg, &constellation, &model, point as u64);
            Ok(SerSimPoint {
                snr_db,
                optimal: cfg.detectors.optimal().then(|| SerEstimate::new(opt, cfg.trials)),
                suboptimal: cfg.detectors.suboptimal().then(|| SerEstimate::new(sub, cfg.trials)),
            })
        })
        .collect()
}

/// Error counts `(optimal, suboptimal)` at one grid point.
fn simulate_point<T: Real>(
    cfg: &SimConfig<T>,
    constellation: &Constellation<T>,
    model: &ChannelModel<T>,
    point: u64,
) -> (u64, u64) {
    let profile = NoiseProfile::from_channel(model);
    let detector = Detector::new(constellation, &profile);
    let points = constellation.points();
    let variances: Vec<T> = points
        .iter()
        .map(|&s| crate::modem::symbol_noise_variance(s, &profile))
        .collect();
    let fixed_h = Complex::new(model.total_power().sqrt(), T::zero());
    let (want_opt, want_sub) = (cfg.detectors.optimal(), cfg.detectors.suboptimal());

    map_blocks(
        cfg.trials,
        |block, len| {
            let mut rng = block_rng(cfg.seed, point, block);
            let (mut opt, mut sub) = (0u64, 0u64);
            for _ in 0..len {
                let h = match cfg.fading {
                    FadingMode::PerTrial => model.sample(&mut rng).h,
                    FadingMode::FixedAmplitude => fixed_h,
                };
                let idx = rng.random_range(0..points.len());
                let y = h * points[idx] + complex_noise(&mut rng, variances[idx]);
                let h_mag = h.norm();
                // phase compensation; the noise stays circular
                let y = y * h.conj() / h_mag;
                if want_opt && detector.optimal(y, h_mag) != idx {
                    opt += 1;
                }
                if want_sub && detector.suboptimal(y, h_mag) != idx {
                    sub += 1;
                }
            }
            (opt, sub)
        },
        (0, 0),
        |a, b| (a.0 + b.0, a.1 + b.1),
    )
}

/// Average instantaneous SNR over channel draws at each thermal-only SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSimConfig<T> {
    pub transmittance: T,
    pub beta: T,
    pub gamma: T,
    /// Linear Γ_rx grid, strictly increasing.
    pub gamma_rx: Vec<T>,
    pub draws: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrEstimate<T> {
    pub gamma_rx: T,
    pub mean: T,
    pub stderr: T,
    pub draws: u64,
}

impl<T: Real> SnrSimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.draws < 2 {
            return Err(Error::invalid("draws", "must be >= 2".to_string()));
        }
        check_grid(&self.gamma_rx, "gamma_rx")?;
        for &g in &self.gamma_rx {
            ChannelModel::from_rx_snr(self.transmittance, self.beta, self.gamma, SnrSpec::new(g)?)?;
        }
        Ok(())
    }
}

/// Mean of `Γ_rx |h|²/(Γ_rx β(1-γ)(1-a) + 1)` over channel draws.
pub fn run_snr_sim<T: Real>(cfg: &SnrSimConfig<T>) -> Result<Vec<SnrEstimate<T>>> {
    cfg.validate()?;
    cfg.gamma_rx
        .iter()
        .enumerate()
        .map(|(point, &g)| {
            let model = ChannelModel::from_rx_snr(cfg.transmittance, cfg.beta, cfg.gamma, SnrSpec::new(g)?)?;
            let moments = map_blocks(
                cfg.draws,
                |block, len| {
                    let mut rng = block_rng(cfg.seed, point as u64, block);
                    let mut m = Moments::default();
                    for _ in 0..len {
                        let draw = model.sample(&mut rng);
                        m.push(model.instantaneous_snr(draw.amplitude));
                    }
                    m
                },
                Moments::default(),
                Moments::merge,
            );
            Ok(SnrEstimate {
                gamma_rx: g,
                mean: moments.mean,
                stderr: moments.stderr(),
                draws: cfg.draws,
            })
        })
        .collect()
}
