use betagamma::channel::limiting_avg_snr;
use betagamma::modem::symbol_noise_variance;
use betagamma::ser_analysis::{ser_conditional, ser_for_channel};
use betagamma::simulator::{complex_noise, run_ser_sim, run_snr_sim};
use betagamma::stats::Moments;
use betagamma::streams::block_rng;
use betagamma::{
    Averaging, ChannelModel, Constellation, DetectorSelection, FadingMode, Integrator, Modulation, NoiseProfile,
    QuadratureConfig, SimConfig, SnrSimConfig, SnrSpec, ThresholdMode,
};

fn sim(modulation: Modulation, order: usize, beta: f64, gamma: f64, snr_db: Vec<f64>, fading: FadingMode) -> SimConfig {
    SimConfig {
        modulation,
        order,
        transmittance: 0.7922,
        beta,
        gamma,
        snr_db,
        trials: 1_000_000,
        seed: 11,
        detectors: DetectorSelection::Both,
        fading,
    }
}

#[test]
fn pam_closed_form_matches_optimal_detector() {
    for (order, gamma) in [(4, 0.0), (4, 0.5), (8, 0.9)] {
        let cfg = sim(Modulation::Pam, order, 1.0, gamma, vec![12.0, 20.0], FadingMode::FixedAmplitude);
        let c = Constellation::pam(order, 1.0).unwrap();
        for p in run_ser_sim(&cfg).unwrap() {
            let model = cfg.model(p.snr_db).unwrap();
            let profile = NoiseProfile::from_channel(&model);
            let analytic = ser_conditional(&c, model.total_power().sqrt(), &profile, ThresholdMode::Strict)
                .unwrap()
                .ser;
            let est = p.optimal.unwrap();
            assert!(est.errors >= 100);
            assert!(
                (analytic - est.ser_hat).abs() < 4.0 * est.stderr,
                "M={order} γ={gamma} {} dB: {analytic} vs {est:?}",
                p.snr_db
            );
        }
    }
}

#[test]
fn qam_union_bound_sits_just_above_simulation() {
    for gamma in [0.0, 0.5, 0.9] {
        let cfg = sim(Modulation::Qam, 16, 1.0, gamma, vec![10.0, 20.0, 30.0], FadingMode::FixedAmplitude);
        let c = Constellation::qam(16, 1.0).unwrap();
        for p in run_ser_sim(&cfg).unwrap() {
            let model = cfg.model(p.snr_db).unwrap();
            let profile = NoiseProfile::from_channel(&model);
            let bound = ser_conditional(&c, model.total_power().sqrt(), &profile, ThresholdMode::Strict)
                .unwrap()
                .ser;
            let est = p.optimal.unwrap();
            if est.errors < 100 {
                continue;
            }
            assert!(bound > est.ser_hat - 3.0 * est.stderr, "γ={gamma}: {bound} vs {est:?}");
            assert!(bound < 1.1 * est.ser_hat, "γ={gamma}: {bound} vs {est:?}");
        }
    }
}

#[test]
fn fading_average_tracks_per_trial_simulation() {
    let integrator = Integrator::new(QuadratureConfig::new(1e-8, 1e-14, 4000).unwrap()).unwrap();
    let cfg = sim(Modulation::Pam, 4, 0.6, 0.5, vec![8.0, 16.0], FadingMode::PerTrial);
    let c = Constellation::pam(4, 1.0).unwrap();
    for p in run_ser_sim(&cfg).unwrap() {
        let model = cfg.model(p.snr_db).unwrap();
        let analytic = ser_for_channel(&c, &model, Averaging::Fading, &integrator).unwrap().ser;
        let est = p.optimal.unwrap();
        assert!((analytic - est.ser_hat).abs() < 4.0 * est.stderr, "{analytic} vs {est:?}");
    }
}

#[test]
fn noise_variance_per_symbol_class() {
    let model = ChannelModel::from_rx_snr(0.7922, 0.8, 0.3, SnrSpec::from_db(15.0).unwrap()).unwrap();
    let profile = NoiseProfile::from_channel(&model);
    let c = Constellation::qam(16, 1.0).unwrap();
    // inner, side and corner points
    for (class, idx) in [0usize, 1, 5].into_iter().enumerate() {
        let s = c.points()[idx];
        let v = symbol_noise_variance(s, &profile);
        let mut rng = block_rng(5, class as u64, 0);
        let mut m = Moments::default();
        for _ in 0..1_000_000 {
            m.push(complex_noise(&mut rng, v).norm_sqr());
        }
        let expect = model.thermal_noise + s.norm_sqr() * 0.8 * 0.7 * (1.0 - 0.7922);
        assert!((m.mean - expect).abs() < 0.01 * expect, "class {class}: {} vs {expect}", m.mean);
    }
}

#[test]
fn snr_simulation_examples() {
    let run = |a: f64, beta: f64, gamma: f64, gamma_rx: f64| {
        let cfg = SnrSimConfig {
            transmittance: a,
            beta,
            gamma,
            gamma_rx: vec![gamma_rx],
            draws: 1_000_000,
            seed: 3,
        };
        run_snr_sim(&cfg).unwrap()[0].mean
    };
    assert!((run(0.5, 1.0, 0.0, 1e6) - 1.0).abs() < 0.02);
    assert!((run(0.5, 0.0, 0.3, 50.0) - 25.0).abs() < 1e-9);
    assert!((run(1e-6, 1.0, 0.9, 1e6) - 9.0).abs() < 0.02 * 9.0);
    let limit = limiting_avg_snr(0.7922, 0.23, 0.5);
    assert!((run(0.7922, 0.23, 0.5, 1e7) - limit).abs() < 0.02 * limit);
}

#[test]
fn detectors_pair_on_identical_streams() {
    let mut cfg = sim(Modulation::Qam, 16, 1.0, 0.0, vec![25.0], FadingMode::PerTrial);
    cfg.trials = 2_000_000;
    let p = &run_ser_sim(&cfg).unwrap()[0];
    let (opt, sub) = (p.optimal.unwrap(), p.suboptimal.unwrap());
    assert!(sub.ser_hat > opt.ser_hat);
    assert!(opt.separated_from(&sub, 3.0));
}
