//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use betagamma::channel::{amplitude_cdf, amplitude_pdf, limiting_avg_snr};
use betagamma::modem::{pam_threshold, qam_threshold};
use betagamma::reradiation::{beta_mc_oracle, beta_sweep, compute_beta, diffused_power, diffused_power_max};
use betagamma::ser_analysis::{ser_conditional, ser_pam, ser_qam_union, textbook_pam_ser, textbook_qam_ser};
use betagamma::simulator::run_ser_sim;
use betagamma::special::marcum_q1;
use betagamma::stats::ks_test;
use betagamma::streams::block_rng;
use betagamma::{
    ChannelModel, Constellation, DetectorSelection, Detector, FadingMode, Integrator, LinkBudget, LinkGeometry,
    Modulation, NoiseProfile, QuadratureConfig, SimConfig, SnrSimConfig, SnrSpec, ThresholdMode,
};
use num_complex::Complex64;
use rand::Rng;

const EPS_TX: f64 = 0.64;
const EPS_RX: f64 = 0.51;
const K_REF: f64 = 0.0233;
const D_REF: f64 = 10.0;
const THETA_REF: f64 = 0.6797502415;

/// Criteria expected to fail; see README.
const KNOWN_FAILURES: &[usize] = &[8];

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn quad(rel: f64) -> QuadratureConfig {
    QuadratureConfig::new(rel, 1e-16, 4000).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn transmittance(k: f64, d: f64) -> f64 {
    (-k * d).exp()
}

fn geometry(d: f64, theta: f64) -> LinkGeometry {
    LinkGeometry::with_fitted_rayleigh(d, theta, EPS_TX, EPS_RX).unwrap()
}

fn criterion_1() -> Outcome {
    let cfg = quad(1e-10);
    let mut worst_z: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut budget_rng = block_rng(0xB0D6E7, 0, 0);
    let mut point = 0u64;
    for d in [1.0, 5.0, 10.0, 50.0] {
        for k in [0.001, 0.01, 0.1] {
            for theta in [0.02, 0.05, 0.1] {
                let g = geometry(d, theta);
                let beta = compute_beta(&g, k, &cfg).unwrap();
                let mc = beta_mc_oracle(&g, k, 10_000_000, 1000 + point).unwrap();
                point += 1;
                worst_z = worst_z.max((beta - mc.beta).abs() / mc.stderr);
                for _ in 0..3 {
                    let budget = LinkBudget::new(
                        10f64.powf(budget_rng.random_range(-3.0..1.0)),
                        10f64.powf(budget_rng.random_range(0.0..4.0)),
                        10f64.powf(budget_rng.random_range(-6.0..-2.0)),
                    )
                    .unwrap();
                    let ratio = diffused_power(&g, k, &budget, &cfg).unwrap() / diffused_power_max(d, k, &budget).unwrap();
                    worst_ratio = worst_ratio.max(rel_err(ratio, beta));
                }
            }
        }
    }
    outcome(
        worst_z <= 3.0 && worst_ratio <= 1e-6,
        format!("36 points, worst |quad - MC| = {worst_z:.2} stderr, worst budget-ratio error {worst_ratio:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let cfg = quad(1e-10);
    let mut in_range = true;
    for d in [1.0, 5.0, 10.0, 50.0] {
        for k in [0.001, 0.01, 0.1] {
            for theta in [0.02, 0.05, 0.1] {
                let b = compute_beta(&geometry(d, theta), k, &cfg).unwrap();
                in_range &= (0.0..=1.0).contains(&b);
            }
        }
    }
    let distances: Vec<f64> = (0..40).map(|i| 0.5 * 200f64.powf(i as f64 / 39.0)).collect();
    let betas = beta_sweep(&distances, THETA_REF, EPS_TX, EPS_RX, K_REF, &cfg).unwrap();
    in_range &= betas.iter().all(|b| (0.0..=1.0).contains(b));
    let signs: Vec<f64> = betas
        .windows(2)
        .map(|w| (w[1] - w[0]).signum() * f64::from(w[1] != w[0]))
        .filter(|s| *s != 0.0)
        .collect();
    let changes: Vec<(f64, f64)> = signs.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0], w[1])).collect();
    let shape = changes.is_empty() || (changes.len() == 1 && changes[0] == (1.0, -1.0));
    let peak = distances[betas.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0];
    outcome(
        in_range && shape,
        format!(
            "beta in [0,1]: {in_range}, {} sign change(s) over 40 points, peak near {peak:.2} m",
            changes.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let combos = [
        (0.3, 0.2, 0.0),
        (0.3, 0.6, 0.5),
        (0.3, 1.0, 0.9),
        (0.6, 0.2, 0.5),
        (0.6, 0.6, 0.9),
        (0.6, 1.0, 0.0),
        (0.9, 0.2, 0.9),
        (0.9, 0.6, 0.0),
        (0.9, 1.0, 0.5),
    ];
    let mut worst: f64 = 0.0;
    for (i, &(a, beta, gamma)) in combos.iter().enumerate() {
        let est = simulate_snr(a, beta, gamma, 1e6, 1_000_000, 300 + i as u64);
        worst = worst.max(rel_err(est, limiting_avg_snr(a, beta, gamma)));
    }
    let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
    let monotone_analytic = grid
        .windows(2)
        .all(|w| limiting_avg_snr(0.6, 0.5, w[1]) > limiting_avg_snr(0.6, 0.5, w[0]));
    let sims: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(i, &g)| simulate_snr(0.6, 0.5, g, 1e6, 1_000_000, 400 + i as u64))
        .collect();
    let monotone_sim = sims.windows(2).all(|w| w[1] > w[0]);
    let a = 0.8;
    let rayleigh_free = rel_err(limiting_avg_snr(a, 1.0, 0.0), a / (1.0 - a));
    let mut lossless_worst: f64 = 0.0;
    for (i, g) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let est = simulate_snr(1e-6, 1.0, g, 1e6, 1_000_000, 500 + i as u64);
        lossless_worst = lossless_worst.max(rel_err(est, g / (1.0 - g)));
    }
    outcome(
        worst <= 0.02 && monotone_analytic && monotone_sim && rayleigh_free <= 1e-14 && lossless_worst <= 0.01,
        format!(
            "9 combos worst {:.3}%, gamma-monotone analytic {monotone_analytic} sim {monotone_sim}, \
             a/(1-a) error {rayleigh_free:.1e}, a=1e-6 worst {:.3}%",
            100.0 * worst,
            100.0 * lossless_worst
        ),
    )
}

fn simulate_snr(a: f64, beta: f64, gamma: f64, gamma_rx: f64, draws: u64, seed: u64) -> f64 {
    let cfg = SnrSimConfig {
        transmittance: a,
        beta,
        gamma,
        gamma_rx: vec![gamma_rx],
        draws,
        seed,
    };
    betagamma::simulator::run_snr_sim(&cfg).unwrap()[0].mean
}

fn criterion_4() -> Outcome {
    let mut min_p: f64 = 1.0;
    let mut worst_norm: f64 = 0.0;
    let integrator = Integrator::new(quad(1e-12)).unwrap();
    for (i, k) in [0.5, 5.0, 50.0].into_iter().enumerate() {
        // β = 1, γ = 0.5 gives K = 2a/(1-a)
        let a = k / (2.0 + k);
        let model = ChannelModel::from_rx_snr(a, 1.0, 0.5, SnrSpec::new(100.0).unwrap()).unwrap();
        let sigma_l = model.total_power().sqrt();
        let mut rng = block_rng(600 + i as u64, 0, 0);
        let mut samples: Vec<f64> = (0..100_000).map(|_| model.sample(&mut rng).amplitude).collect();
        let ks = ks_test(&mut samples, |r| amplitude_cdf(r, k, sigma_l).unwrap());
        min_p = min_p.min(ks.p_value);
        let hi = sigma_l * 20.0;
        let peak = sigma_l * (k / (k + 1.0)).sqrt();
        let total: f64 = [(0.0, peak), (peak, hi)]
            .into_iter()
            .map(|(lo, hi)| integrator.integrate(|r| amplitude_pdf(r, k, sigma_l).unwrap(), lo, hi).unwrap().value)
            .sum();
        worst_norm = worst_norm.max((total - 1.0).abs());
    }
    let mut worst_anchor: f64 = 0.0;
    for x in [0.0f64, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
        worst_anchor = worst_anchor.max((marcum_q1(x, 0.0) - 1.0).abs());
        worst_anchor = worst_anchor.max((marcum_q1(0.0, x) - (-x * x / 2.0).exp()).abs());
    }
    outcome(
        min_p > 0.01 && worst_norm <= 1e-8 && worst_anchor <= 1e-12,
        format!("min KS p-value {min_p:.3}, pdf mass error {worst_norm:.1e}, Marcum anchor error {worst_anchor:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for snr_db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let thermal = 10f64.powf(-snr_db / 10.0);
        let profile = NoiseProfile::new(thermal, 0.0).unwrap();
        for h in [0.3, 1.0] {
            for m in [2, 4, 8, 16] {
                let c = Constellation::pam(m, 1.0).unwrap();
                let got = ser_pam(&c, h, &profile).unwrap();
                worst = worst.max(rel_err(got, textbook_pam_ser(m, h, c.delta(), thermal)));
            }
            for m in [4, 16, 64] {
                let c = Constellation::qam(m, 1.0).unwrap();
                let got = ser_qam_union(&c, h, &profile).unwrap().ser;
                worst = worst.max(rel_err(got, textbook_qam_ser(m, h, c.delta(), thermal)));
            }
        }
    }
    let mut rng = block_rng(700, 0, 0);
    let mut mismatches = 0u32;
    for _ in 0..100_000 {
        let kind = if rng.random_bool(0.5) { Modulation::Pam } else { Modulation::Qam };
        let order = [4usize, 16, 64][rng.random_range(0..3)];
        let c = Constellation::new(kind, order, 1.0).unwrap();
        let profile = NoiseProfile::new(10f64.powf(rng.random_range(-3.0..1.0)), 0.0).unwrap();
        let det = Detector::new(&c, &profile);
        let h = rng.random_range(0.05..2.0);
        let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if det.optimal(y, h) != det.suboptimal(y, h) {
            mismatches += 1;
        }
    }
    outcome(
        worst <= 1e-12 && mismatches == 0,
        format!("worst SER relative error {worst:.1e}, {mismatches} detector mismatches in 1e5 inputs"),
    )
}

/// Per-component log-likelihood of `x` under `N(p, var/2)`, up to a constant.
fn log_lik(x: f64, p: f64, var: f64) -> f64 {
    -(x - p) * (x - p) / var - 0.5 * var.ln()
}

fn bisect(p0: f64, p1: f64, v0: f64, v1: f64) -> Option<f64> {
    let g = |x: f64| log_lik(x, p0, v0) - log_lik(x, p1, v1);
    let (mut lo, mut hi) = (p0.min(p1), p0.max(p1));
    let (glo, ghi) = (g(lo), g(hi));
    if glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn criterion_6() -> Outcome {
    let mut rng = block_rng(800, 0, 0);
    let (mut worst_lik, mut worst_bisect): (f64, f64) = (0.0, 0.0);
    let (mut pam_done, mut qam_done, mut redraws, mut errors) = (0, 0, 0, 0);
    while pam_done < 1000 || qam_done < 1000 {
        let v0 = 10f64.powf(rng.random_range(-3.0..0.0));
        let v1 = 10f64.powf(rng.random_range(-3.0..0.0));
        let (p0, p1, is_pam) = if pam_done < 1000 {
            let c = 10f64.powf(rng.random_range(-1.0..0.5));
            (-c, c, true)
        } else {
            let p0 = rng.random_range(-3.0..3.0);
            (p0, p0 + rng.random_range(0.1..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }, false)
        };
        let Some(reference) = bisect(p0, p1, v0, v1) else {
            // no ML boundary between the two points
            redraws += 1;
            continue;
        };
        let got = if is_pam {
            pam_threshold(v0, v1, p1, 1.0)
        } else {
            qam_threshold(p0, p1, v0, v1)
        };
        let Ok(t) = got else {
            errors += 1;
            continue;
        };
        worst_lik = worst_lik.max((log_lik(t, p0, v0) - log_lik(t, p1, v1)).abs());
        let span = (p1 - p0).abs();
        worst_bisect = worst_bisect.max((t - reference).abs() / span);
        if is_pam {
            pam_done += 1;
        } else {
            qam_done += 1;
        }
    }
    let mut exact = true;
    for _ in 0..1000 {
        let v = 10f64.powf(rng.random_range(-3.0..1.0));
        let p0 = rng.random_range(-3.0..3.0);
        let p1 = p0 + rng.random_range(0.1..2.0);
        exact &= pam_threshold(v, v, rng.random_range(0.1..2.0), rng.random_range(0.1..1.0)).unwrap() == 0.0;
        exact &= qam_threshold(p0, p1, v, v).unwrap() == 0.5 * (p0 + p1);
    }
    outcome(
        worst_lik <= 1e-9 && worst_bisect <= 1e-9 && errors == 0 && exact,
        format!(
            "2x1000 tuples ({redraws} redrawn without a boundary), log-likelihood gap {worst_lik:.1e}, \
             bisection gap {worst_bisect:.1e}, {errors} spurious failures, exact midpoints {exact}"
        ),
    )
}

fn ser_sim(modulation: Modulation, order: usize, a: f64, beta: f64, gamma: f64, snr_db: Vec<f64>, seed: u64) -> SimConfig {
    SimConfig {
        modulation,
        order,
        transmittance: a,
        beta,
        gamma,
        snr_db,
        trials: 10_000_000,
        seed,
        detectors: DetectorSelection::Both,
        fading: FadingMode::FixedAmplitude,
    }
}

fn criterion_7() -> Outcome {
    let a = transmittance(K_REF, D_REF);
    let grid = vec![10.0, 15.0, 20.0, 25.0, 30.0];
    let (mut ok, mut checked) = (true, 0);
    let (mut worst_pam_z, mut worst_qam_above, mut worst_qam_below): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut seed = 900;
    for (modulation, order) in [(Modulation::Qam, 16), (Modulation::Pam, 4)] {
        for gamma in [0.0, 0.5, 0.9] {
            seed += 1;
            let cfg = ser_sim(modulation, order, a, 1.0, gamma, grid.clone(), seed);
            let c = Constellation::new(modulation, order, 1.0).unwrap();
            for p in run_ser_sim(&cfg).unwrap() {
                let sim = p.optimal.unwrap();
                if sim.errors < 100 {
                    continue;
                }
                checked += 1;
                let model = cfg.model(p.snr_db).unwrap();
                let profile = NoiseProfile::from_channel(&model);
                let h = model.total_power().sqrt();
                let analytic = ser_conditional(&c, h, &profile, ThresholdMode::Strict).unwrap().ser;
                match modulation {
                    Modulation::Pam => {
                        let z = (analytic - sim.ser_hat).abs() / sim.stderr;
                        worst_pam_z = worst_pam_z.max(z);
                        ok &= z <= 3.0;
                    }
                    Modulation::Qam => {
                        let above = (analytic - sim.ser_hat) / sim.ser_hat;
                        worst_qam_above = worst_qam_above.max(above);
                        let below = (sim.ser_hat - analytic) / sim.stderr;
                        worst_qam_below = worst_qam_below.max(below);
                        ok &= above <= 0.10 && below <= 3.0;
                    }
                }
            }
        }
    }
    outcome(
        ok,
        format!(
            "{checked} points with >= 100 errors; PAM worst {worst_pam_z:.2} stderr; QAM union at most \
             {:.2}% above simulation, at most {worst_qam_below:.2} stderr below",
            100.0 * worst_qam_above
        ),
    )
}

fn criterion_8() -> Outcome {
    let a = transmittance(K_REF, D_REF);
    let grid = vec![25.0, 30.0];
    let beta_small = compute_beta(&LinkGeometry::new(D_REF, THETA_REF, EPS_TX, EPS_RX).unwrap(), K_REF, &quad(1e-10)).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, beta, want_separated, seed) in [("beta=1", 1.0, true, 1001), ("computed beta", beta_small, false, 1002)] {
        let mut cfg = ser_sim(Modulation::Qam, 16, a, beta, 0.0, grid.clone(), seed);
        cfg.fading = FadingMode::PerTrial;
        for p in run_ser_sim(&cfg).unwrap() {
            let (opt, sub) = (p.optimal.unwrap(), p.suboptimal.unwrap());
            let separated = opt.separated_from(&sub, 3.0);
            let good = if want_separated {
                separated && sub.ser_hat > opt.ser_hat
            } else {
                !separated
            };
            ok &= good;
            lines.push(format!(
                "{label} ({beta:.4}) {} dB: opt {:.5}±{:.5} subopt {:.5}±{:.5} {}",
                p.snr_db,
                opt.ser_hat,
                3.0 * opt.stderr,
                sub.ser_hat,
                3.0 * sub.stderr,
                if good { "ok" } else { "violated" }
            ));
        }
    }
    outcome(ok, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("repro.toml");
    std::fs::write(
        &config,
        r#"seed = 7

[geometry]
half_angle_rad = 0.6797502415
eps_tx_m = 0.64
eps_rx_m = 0.51

[medium]
frequency_hz = 300e9
distance_m = 10.0
k_per_m = 0.0233

[[experiment]]
kind = "beta_vs_distance"
name = "beta"
distances = { start = 0.5, stop = 100.0, points = 12, spacing = "log" }

[[experiment]]
kind = "limiting_snr_vs_distance"
name = "limiting"
distances = [2.0, 10.0, 50.0]
gammas = [0.0, 0.5]

[[experiment]]
kind = "ser_vs_rxsnr"
name = "ser"
modulation = "qam"
order = 16
beta = { mode = "computed" }
gammas = [0.0, 0.9]
snr_db = [5.0, 15.0, 25.0]
trials = 300000
"#,
    )
    .unwrap();
    let runs: Vec<_> = [("a", 1), ("b", 4), ("c", 1)]
        .into_iter()
        .map(|(name, threads)| {
            let out = dir.path().join(name);
            let status = Command::new(env!("CARGO_BIN_EXE_betagamma"))
                .arg("run")
                .arg(&config)
                .arg("--out-dir")
                .arg(&out)
                .arg("--threads")
                .arg(threads.to_string())
                .stdout(Stdio::null())
                .stderr(Stdio::null())
                .status()
                .unwrap();
            (out, status.success())
        })
        .collect();
    let all_ran = runs.iter().all(|r| r.1);
    let mut identical = all_ran;
    let mut files = 0;
    if all_ran {
        for file in ["beta.csv", "limiting.csv", "ser.csv"] {
            let read = |dir: &Path| std::fs::read(dir.join(file)).unwrap();
            let first = read(&runs[0].0);
            identical &= runs.iter().all(|r| read(&r.0) == first);
            files += 1;
        }
    }
    outcome(
        identical,
        format!("{files} CSVs compared over 3 runs (1, 4, 1 threads), exit ok {all_ran}, bit-identical {identical}"),
    )
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [Criterion; 9] = [
        (1, "beta oracle equivalence", criterion_1),
        (2, "beta bounds and shape", criterion_2),
        (3, "limiting average SNR", criterion_3),
        (4, "amplitude distribution fidelity", criterion_4),
        (5, "equal-variance regression", criterion_5),
        (6, "threshold correctness", criterion_6),
        (7, "analytic vs simulated SER", criterion_7),
        (8, "detector ordering", criterion_8),
        (9, "reproducibility", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (n, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {n} ({name}): {} [{:.1} s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass && !KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
