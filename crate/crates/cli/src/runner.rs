//! Runs the experiments of a [`Config`] and writes one CSV per experiment
//! plus `manifest.json`.
//!
//! Rows are produced in grid order and numbers are printed in their
//! shortest round-trip form, so an unchanged config and seed give
//! byte-identical files whatever the thread count.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use betagamma::channel::limiting_avg_snr;
use betagamma::reradiation::beta_sweep;
use betagamma::ser_analysis::ser_for_channel;
use betagamma::simulator::{run_ser_sim, SerSimPoint};
use betagamma::{ChannelModel, Constellation, Integrator, SerEstimate, SimConfig, SnrSpec};
use log::info;
use serde::Serialize;
use thiserror::Error;

use crate::config::{BetaMode, Config, Experiment, ExperimentKind, GeometrySection, QuadratureSection};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("experiment `{experiment}` (config line {line}): {source}")]
    Numerical {
        experiment: String,
        line: usize,
        #[source]
        source: betagamma::Error,
    },
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BetaKey {
    distance: u64,
    half_angle: u64,
    eps_tx: u64,
    eps_rx: u64,
    k: u64,
    rel_tol: u64,
    abs_tol: u64,
    max_subdivisions: usize,
}

/// β values keyed on (distance, geometry, k, quadrature tolerance), shared
/// across the experiments of a run.
#[derive(Debug, Default)]
pub struct BetaCache {
    map: HashMap<BetaKey, f64>,
}

impl BetaCache {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn betas(
        &mut self,
        distances: &[f64],
        geometry: &GeometrySection,
        k: f64,
        quadrature: &QuadratureSection,
    ) -> Result<Vec<f64>, betagamma::Error> {
        let key = |d: f64| BetaKey {
            distance: d.to_bits(),
            half_angle: geometry.half_angle_rad.to_bits(),
            eps_tx: geometry.eps_tx_m.to_bits(),
            eps_rx: geometry.eps_rx_m.to_bits(),
            k: k.to_bits(),
            rel_tol: quadrature.rel_tol.to_bits(),
            abs_tol: quadrature.abs_tol.to_bits(),
            max_subdivisions: quadrature.max_subdivisions,
        };
        let missing: Vec<f64> = distances
            .iter()
            .copied()
            .filter(|&d| !self.map.contains_key(&key(d)))
            .collect();
        if !missing.is_empty() {
            let cfg = betagamma::QuadratureConfig::new(quadrature.rel_tol, quadrature.abs_tol, quadrature.max_subdivisions)?;
            let fresh = beta_sweep(
                &missing,
                geometry.half_angle_rad,
                geometry.eps_tx_m,
                geometry.eps_rx_m,
                k,
                &cfg,
            )?;
            for (d, b) in missing.into_iter().zip(fresh) {
                self.map.insert(key(d), b);
            }
        }
        Ok(distances.iter().map(|&d| self.map[&key(d)]).collect())
    }
}

/// A CSV table; header names carry units.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let output_err = |e: &dyn std::fmt::Display| RunError::Output {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| output_err(&e))?;
        w.write_record(&self.header).map_err(|e| output_err(&e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| output_err(&e))?;
        }
        w.flush().map_err(|e| output_err(&e))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// Per-(experiment, γ) simulation seed derived from the master seed with a
/// SplitMix64 finaliser.
pub fn derive_seed(seed: u64, experiment: usize, gamma: usize) -> u64 {
    let tag = ((experiment as u64) << 32) | gamma as u64;
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What was produced for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub experiment: String,
    pub kind: &'static str,
    pub file: String,
    pub rows: usize,
    pub columns: Vec<&'static str>,
    /// β used by an SER experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Simulation seed per γ, in the order of `gammas`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub simulation_seeds: Vec<u64>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a Config,
    outputs: &'a [OutputRecord],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outputs: Vec<OutputRecord>,
    pub manifest: PathBuf,
}

/// Evaluates one experiment into a table.
pub fn evaluate(
    config: &Config,
    index: usize,
    cache: &mut BetaCache,
) -> Result<(Table, OutputRecord), RunError> {
    let exp = &config.experiments[index];
    let numerical = |source: betagamma::Error| RunError::Numerical {
        experiment: exp.name.clone(),
        line: exp.line,
        source,
    };
    let k = config.medium.k_per_m;
    let mut record = OutputRecord {
        experiment: exp.name.clone(),
        kind: exp.kind_name(),
        file: format!("{}.csv", exp.name),
        rows: 0,
        columns: Vec::new(),
        beta: None,
        simulation_seeds: Vec::new(),
    };
    let table = match &exp.kind {
        ExperimentKind::BetaVsDistance { distances_m } => {
            let betas = cache
                .betas(distances_m, &config.geometry, k, &config.quadrature)
                .map_err(numerical)?;
            let mut t = Table::new(vec!["distance_m", "transmittance", "beta"]);
            for (&d, &b) in distances_m.iter().zip(&betas) {
                t.push(vec![fmt_f64(d), fmt_f64(config.transmittance_at(d)), fmt_f64(b)]);
            }
            t
        }
        ExperimentKind::LimitingSnrVsDistance { distances_m, gammas } => {
            let betas = cache
                .betas(distances_m, &config.geometry, k, &config.quadrature)
                .map_err(numerical)?;
            let mut t = Table::new(vec![
                "gamma",
                "distance_m",
                "transmittance",
                "beta_computed",
                "limiting_snr_beta1_db",
                "limiting_snr_computed_db",
            ]);
            for &g in gammas {
                for (&d, &b) in distances_m.iter().zip(&betas) {
                    let a = config.transmittance_at(d);
                    t.push(vec![
                        fmt_f64(g),
                        fmt_f64(d),
                        fmt_f64(a),
                        fmt_f64(b),
                        fmt_f64(db(limiting_avg_snr(a, 1.0, g))),
                        fmt_f64(db(limiting_avg_snr(a, b, g))),
                    ]);
                }
            }
            t
        }
        ExperimentKind::SerVsRxsnr {
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
            let beta = match *beta {
                BetaMode::Fixed { value } => value,
                BetaMode::Computed => {
                    cache
                        .betas(&[config.medium.distance_m], &config.geometry, k, &config.quadrature)
                        .map_err(numerical)?[0]
                }
            };
            record.beta = Some(beta);
            let a = config.medium.transmittance;
            let constellation = Constellation::new(*modulation, *order, 1.0).map_err(numerical)?;
            let integrator = Integrator::new(config.quadrature_config()).map_err(numerical)?;
            let mut t = Table::new(vec![
                "gamma",
                "beta",
                "snr_db",
                "ser_analytic",
                "ser_opt",
                "ser_opt_stderr",
                "errors_opt",
                "ser_subopt",
                "ser_subopt_stderr",
                "errors_subopt",
                "trials",
                "reliable_opt",
                "reliable_subopt",
            ]);
            for (gi, &g) in gammas.iter().enumerate() {
                let seed = derive_seed(config.seed, index, gi);
                record.simulation_seeds.push(seed);
                let sim = SimConfig {
                    modulation: *modulation,
                    order: *order,
                    transmittance: a,
                    beta,
                    gamma: g,
                    snr_db: snr_db.clone(),
                    trials: *trials,
                    seed,
                    detectors: *detectors,
                    fading: *fading,
                };
                info!("{}: gamma = {g}, {} points x {trials} trials", exp.name, snr_db.len());
                let simulated = run_ser_sim(&sim).map_err(numerical)?;
                for SerSimPoint { snr_db, optimal, suboptimal } in simulated {
                    let model = ChannelModel::from_rx_snr(a, beta, g, SnrSpec::from_db(snr_db).map_err(numerical)?)
                        .map_err(numerical)?;
                    let analytic = ser_for_channel(&constellation, &model, *averaging, &integrator).map_err(numerical)?;
                    let est = |e: Option<SerEstimate>| -> [String; 4] {
                        match e {
                            Some(e) => [
                                fmt_f64(e.ser_hat),
                                fmt_f64(e.stderr),
                                e.errors.to_string(),
                                e.reliable.to_string(),
                            ],
                            None => Default::default(),
                        }
                    };
                    let [so, eo, no, ro] = est(optimal);
                    let [ss, es, ns, rs] = est(suboptimal);
                    t.push(vec![
                        fmt_f64(g),
                        fmt_f64(beta),
                        fmt_f64(snr_db),
                        fmt_f64(analytic.ser),
                        so,
                        eo,
                        no,
                        ss,
                        es,
                        ns,
                        trials.to_string(),
                        ro,
                        rs,
                    ]);
                }
            }
            t
        }
    };
    record.rows = table.rows.len();
    record.columns = table.header.clone();
    Ok((table, record))
}

/// Runs every experiment and writes the outputs under `config.out_dir`.
pub fn run(config: &Config) -> Result<RunSummary, RunError> {
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| RunError::Output {
        path: out.clone(),
        message: e.to_string(),
    })?;
    let mut cache = BetaCache::default();
    let mut outputs = Vec::with_capacity(config.experiments.len());
    for (i, exp) in config.experiments.iter().enumerate() {
        info!("running {} ({})", exp.name, exp.kind_name());
        let (table, record) = evaluate(config, i, &mut cache)?;
        table.write(&out.join(&record.file))?;
        outputs.push(record);
    }
    let manifest_path = out.join("manifest.json");
    let manifest = Manifest {
        tool: "betagamma",
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs: &outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Output {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| RunError::Output {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    Ok(RunSummary {
        outputs,
        manifest: manifest_path,
    })
}

/// Names of the experiments, for `validate` output.
pub fn describe(config: &Config) -> Vec<String> {
    config
        .experiments
        .iter()
        .map(|e: &Experiment| format!("{} ({}, line {})", e.name, e.kind_name(), e.line))
        .collect()
}
