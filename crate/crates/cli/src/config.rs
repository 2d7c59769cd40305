//! Experiment configuration: TOML schema, loading and validation.
//!
//! ```toml
//! seed = 7
//! out_dir = "out"
//!
//! [geometry]
//! half_angle_rad = 0.6797502415
//! eps_tx_m = 0.64
//! eps_rx_m = 0.51
//!
//! [medium]
//! frequency_hz = 300e9
//! distance_m = 10.0
//! k_per_m = 0.0233              # or: absorption_table = "k.csv"
//!
//! [[experiment]]
//! kind = "beta_vs_distance"
//! name = "beta"
//! distances = { start = 0.5, stop = 100.0, points = 40, spacing = "log" }
//! ```
//!
//! Unknown keys are rejected. Validation errors point at the line of the
//! offending section.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use betagamma::{AbsorptionProvider, AbsorptionTable, Averaging, DetectorSelection, FadingMode, Modulation};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Invalid {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    threads: Option<usize>,
    geometry: Spanned<GeometrySection>,
    medium: Spanned<MediumSection>,
    quadrature: Option<Spanned<QuadratureSection>>,
    #[serde(rename = "experiment", default)]
    experiments: Vec<Spanned<ExperimentSection>>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Half-angle of the re-radiating cone seen from the transmitter.
    pub half_angle_rad: f64,
    pub eps_tx_m: f64,
    pub eps_rx_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumSection {
    frequency_hz: f64,
    distance_m: f64,
    k_per_m: Option<f64>,
    absorption_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_subdivisions")]
    pub max_subdivisions: usize,
}

fn default_rel_tol() -> f64 {
    1e-6
}

fn default_abs_tol() -> f64 {
    1e-14
}

fn default_max_subdivisions() -> usize {
    2000
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_subdivisions: default_max_subdivisions(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// A grid given either as an explicit list or as an evenly spaced range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl GridSpec {
    fn resolve(&self) -> Result<Vec<f64>, String> {
        let grid = match *self {
            GridSpec::List(ref v) => v.clone(),
            GridSpec::Range {
                start,
                stop,
                points,
                spacing,
            } => {
                if points < 2 {
                    return Err("a range needs at least 2 points".into());
                }
                if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                    return Err("log spacing needs positive bounds".into());
                }
                let (a, b) = match spacing {
                    Spacing::Linear => (start, stop),
                    Spacing::Log => (start.ln(), stop.ln()),
                };
                let step = (b - a) / (points - 1) as f64;
                (0..points)
                    .map(|i| {
                        // pin the end points exactly
                        let t = if i == points - 1 { b } else { a + step * i as f64 };
                        match spacing {
                            Spacing::Linear => t,
                            Spacing::Log if i == 0 => start,
                            Spacing::Log if i == points - 1 => stop,
                            Spacing::Log => t.exp(),
                        }
                    })
                    .collect()
            }
        };
        if grid.is_empty() {
            return Err("grid is empty".into());
        }
        if grid.iter().any(|v| !v.is_finite()) {
            return Err("grid has non-finite values".into());
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err("grid must be strictly increasing".into());
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaMode {
    Fixed { value: f64 },
    /// β from the geometry and medium at the medium's distance.
    Computed,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ModulationName {
    Pam,
    Qam,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
enum FadingName {
    #[default]
    PerTrial,
    FixedAmplitude,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
enum AveragingName {
    #[default]
    Fading,
    Conditional,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
enum DetectorName {
    Optimal,
    Suboptimal,
    #[default]
    Both,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ExperimentSection {
    BetaVsDistance {
        name: String,
        distances: GridSpec,
    },
    LimitingSnrVsDistance {
        name: String,
        distances: GridSpec,
        gammas: Vec<f64>,
    },
    SerVsRxsnr {
        name: String,
        modulation: ModulationName,
        order: usize,
        beta: BetaMode,
        gammas: Vec<f64>,
        snr_db: GridSpec,
        trials: u64,
        #[serde(default)]
        fading: FadingName,
        #[serde(default)]
        averaging: AveragingName,
        #[serde(default)]
        detectors: DetectorName,
    },
}

/// Where the absorption coefficient came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum AbsorptionSource {
    Constant,
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Medium {
    pub frequency_hz: f64,
    pub distance_m: f64,
    pub k_per_m: f64,
    pub transmittance: f64,
    pub absorption: AbsorptionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    BetaVsDistance {
        distances_m: Vec<f64>,
    },
    LimitingSnrVsDistance {
        distances_m: Vec<f64>,
        gammas: Vec<f64>,
    },
    SerVsRxsnr {
        #[serde(serialize_with = "ser_modulation")]
        modulation: Modulation,
        order: usize,
        beta: BetaMode,
        gammas: Vec<f64>,
        snr_db: Vec<f64>,
        trials: u64,
        #[serde(serialize_with = "ser_fading")]
        fading: FadingMode,
        #[serde(serialize_with = "ser_averaging")]
        averaging: Averaging,
        #[serde(serialize_with = "ser_detectors")]
        detectors: DetectorSelection,
    },
}

fn ser_modulation<S: serde::Serializer>(m: &Modulation, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        Modulation::Pam => "pam",
        Modulation::Qam => "qam",
    })
}

fn ser_fading<S: serde::Serializer>(m: &FadingMode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        FadingMode::PerTrial => "per_trial",
        FadingMode::FixedAmplitude => "fixed_amplitude",
    })
}

fn ser_averaging<S: serde::Serializer>(m: &Averaging, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}

fn ser_detectors<S: serde::Serializer>(m: &DetectorSelection, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        DetectorSelection::Optimal => "optimal",
        DetectorSelection::Suboptimal => "suboptimal",
        DetectorSelection::Both => "both",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub name: String,
    /// Line of the `[[experiment]]` table in the config.
    pub line: usize,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

impl Experiment {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::BetaVsDistance { .. } => "beta_vs_distance",
            ExperimentKind::LimitingSnrVsDistance { .. } => "limiting_snr_vs_distance",
            ExperimentKind::SerVsRxsnr { .. } => "ser_vs_rxsnr",
        }
    }
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` lets rayon decide. Never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
    pub geometry: GeometrySection,
    pub medium: Medium,
    pub quadrature: QuadratureSection,
    pub experiments: Vec<Experiment>,
}

pub const DEFAULT_SEED: u64 = 1;

impl Config {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_str_at(&text, path, base)
    }

    /// Parses `text`, reporting errors against `path` and resolving
    /// relative table paths against `base`.
    pub fn from_str_at(text: &str, path: &Path, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        let line_of = |offset: usize| text[..offset.min(text.len())].matches('\n').count() + 1;
        let invalid = |offset: usize, message: String| ConfigError::Invalid {
            path: path.to_path_buf(),
            line: line_of(offset),
            message,
        };

        let geometry_span = raw.geometry.span().start;
        let geometry = raw.geometry.into_inner();
        let g = geometry;
        if !(g.half_angle_rad > 0.0 && g.half_angle_rad < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(geometry_span, format!("half_angle_rad must lie in (0, π/2), got {}", g.half_angle_rad)));
        }
        for (name, v) in [("eps_tx_m", g.eps_tx_m), ("eps_rx_m", g.eps_rx_m)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(geometry_span, format!("{name} must be finite and >= 0, got {v}")));
            }
        }

        let medium_span = raw.medium.span().start;
        let m = raw.medium.into_inner();
        if !(m.frequency_hz > 0.0) || !m.frequency_hz.is_finite() {
            return Err(invalid(medium_span, format!("frequency_hz must be > 0, got {}", m.frequency_hz)));
        }
        if !(m.distance_m > 0.0) || !m.distance_m.is_finite() {
            return Err(invalid(medium_span, format!("distance_m must be > 0, got {}", m.distance_m)));
        }
        let (provider, absorption) = match (m.k_per_m, m.absorption_table) {
            (Some(k), None) => (
                AbsorptionProvider::constant(k).map_err(|e| invalid(medium_span, e.to_string()))?,
                AbsorptionSource::Constant,
            ),
            (None, Some(table)) => {
                let full = base.join(&table);
                let t = AbsorptionTable::from_csv_path(&full).map_err(|e| invalid(medium_span, e.to_string()))?;
                (AbsorptionProvider::Table(t), AbsorptionSource::Table { path: table })
            }
            _ => {
                return Err(invalid(
                    medium_span,
                    "give exactly one of k_per_m and absorption_table".into(),
                ))
            }
        };
        let k_per_m = provider
            .absorption_at(m.frequency_hz)
            .map_err(|e| invalid(medium_span, format!("absorption at {} Hz: {e}", m.frequency_hz)))?;
        let transmittance =
            betagamma::absorption::transmittance(k_per_m, m.distance_m).map_err(|e| invalid(medium_span, e.to_string()))?;
        if !(transmittance > 0.0) {
            return Err(invalid(medium_span, "transmittance underflows to 0".into()));
        }
        let medium = Medium {
            frequency_hz: m.frequency_hz,
            distance_m: m.distance_m,
            k_per_m,
            transmittance,
            absorption,
        };

        let quadrature = match raw.quadrature {
            None => QuadratureSection::default(),
            Some(q) => {
                let span = q.span().start;
                let q = q.into_inner();
                betagamma::QuadratureConfig::new(q.rel_tol, q.abs_tol, q.max_subdivisions)
                    .map_err(|e| invalid(span, e.to_string()))?;
                q
            }
        };

        if raw.experiments.is_empty() {
            return Err(ConfigError::Invalid {
                path: path.to_path_buf(),
                line: 1,
                message: "no [[experiment]] tables".into(),
            });
        }
        let mut names = HashSet::new();
        let mut experiments = Vec::with_capacity(raw.experiments.len());
        for spanned in raw.experiments {
            let span = spanned.span().start;
            let err = |msg: String| invalid(span, msg);
            let exp = spanned.into_inner();
            let (name, kind) = match exp {
                ExperimentSection::BetaVsDistance { name, distances } => {
                    let distances_m = positive_grid(&distances, "distances").map_err(err)?;
                    (name, ExperimentKind::BetaVsDistance { distances_m })
                }
                ExperimentSection::LimitingSnrVsDistance { name, distances, gammas } => {
                    let distances_m = positive_grid(&distances, "distances").map_err(err)?;
                    check_gammas(&gammas).map_err(err)?;
                    (name, ExperimentKind::LimitingSnrVsDistance { distances_m, gammas })
                }
                ExperimentSection::SerVsRxsnr {
                    name,
                    modulation,
                    order,
                    beta,
                    gammas,
                    snr_db,
                    trials,
                    fading,
                    averaging,
                    detectors,
                } => {
                    let modulation = match modulation {
                        ModulationName::Pam => Modulation::Pam,
                        ModulationName::Qam => Modulation::Qam,
                    };
                    betagamma::Constellation::new(modulation, order, 1.0).map_err(|e| err(e.to_string()))?;
                    if let BetaMode::Fixed { value } = beta {
                        if !(0.0..=1.0).contains(&value) {
                            return Err(err(format!("beta must lie in [0, 1], got {value}")));
                        }
                    }
                    check_gammas(&gammas).map_err(err)?;
                    let snr_db = snr_db.resolve().map_err(|e| err(format!("snr_db: {e}")))?;
                    if trials == 0 {
                        return Err(err("trials must be >= 1".into()));
                    }
                    (
                        name,
                        ExperimentKind::SerVsRxsnr {
                            modulation,
                            order,
                            beta,
                            gammas,
                            snr_db,
                            trials,
                            fading: match fading {
                                FadingName::PerTrial => FadingMode::PerTrial,
                                FadingName::FixedAmplitude => FadingMode::FixedAmplitude,
                            },
                            averaging: match averaging {
                                AveragingName::Fading => Averaging::Fading,
                                AveragingName::Conditional => Averaging::Conditional,
                            },
                            detectors: match detectors {
                                DetectorName::Optimal => DetectorSelection::Optimal,
                                DetectorName::Suboptimal => DetectorSelection::Suboptimal,
                                DetectorName::Both => DetectorSelection::Both,
                            },
                        },
                    )
                }
            };
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(invalid(span, format!("name `{name}` must be non-empty and use only [A-Za-z0-9_-]")));
            }
            if !names.insert(name.clone()) {
                return Err(invalid(span, format!("duplicate experiment name `{name}`")));
            }
            experiments.push(Experiment {
                name,
                line: line_of(span),
                kind,
            });
        }

        Ok(Config {
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            threads: raw.threads.filter(|&t| t > 0),
            geometry,
            medium,
            quadrature,
            experiments,
        })
    }

    pub fn quadrature_config(&self) -> betagamma::QuadratureConfig {
        let q = self.quadrature;
        betagamma::QuadratureConfig::new(q.rel_tol, q.abs_tol, q.max_subdivisions).expect("validated at load")
    }

    /// Transmittance over `distance` with this medium's coefficient.
    pub fn transmittance_at(&self, distance: f64) -> f64 {
        (-self.medium.k_per_m * distance).exp()
    }
}

fn positive_grid(spec: &GridSpec, name: &str) -> Result<Vec<f64>, String> {
    let grid = spec.resolve().map_err(|e| format!("{name}: {e}"))?;
    if grid[0] <= 0.0 {
        return Err(format!("{name}: values must be > 0"));
    }
    Ok(grid)
}

fn check_gammas(gammas: &[f64]) -> Result<(), String> {
    if gammas.is_empty() {
        return Err("gammas is empty".into());
    }
    if let Some(g) = gammas.iter().find(|g| !(0.0..1.0).contains(*g)) {
        return Err(format!("gamma must lie in [0, 1), got {g}"));
    }
    Ok(())
}
