use adacomb::scenario::{
    run_ensemble, EnsembleConfig, FilterGraph, InputModel, LinearScenario, NoiseLevel, PairGraph,
    PlantModel, QSpec, WeightSpec,
};
use adacomb::theory::{lms_emse, optimal_params, TrackingSpec};
use adacomb::{db, CombinedPair, FilterState, MixerState, MixingRule};

const LEN: usize = 7;
const NOISE: f64 = 1e-2;

fn scenario(trace_q: f64) -> LinearScenario {
    LinearScenario::new(
        LEN,
        InputModel::white(1.0 / LEN as f64).unwrap(),
        PlantModel::fixed(WeightSpec::Gaussian { norm: 1.0 })
            .with_drift(QSpec::ScaledIdentity { variance: trace_q / LEN as f64 }),
        NoiseLevel::Variance(NOISE),
    )
    .unwrap()
}

fn lms_steady(step: f64, trace_q: f64, seed: u64) -> f64 {
    let sc = scenario(trace_q);
    let cfg = EnsembleConfig::new(100, 40_000, seed).with_steady_tail(30_000);
    let m = run_ensemble(&cfg, |_, rng| {
        Ok((sc.source(rng)?, FilterGraph::new(FilterState::lms(LEN, step)?)))
    })
    .unwrap();
    m.steady("emse").unwrap()
}

#[test]
fn lone_lms_matches_tracking_formula() {
    let spec = TrackingSpec::white(LEN, NOISE, 1.0 / LEN as f64, 1e-6).unwrap();
    let theory = lms_emse(0.01, &spec).unwrap();
    assert!((db(theory) + 40.0).abs() < 0.1);
    let sim = lms_steady(0.01, 1e-6, 11);
    assert!((db(sim) - db(theory)).abs() < 0.5, "sim {} dB, theory {} dB", db(sim), db(theory));
}

#[test]
fn optimally_tuned_lms_has_zero_nsd() {
    let trace_q = 1e-5;
    let spec = TrackingSpec::white(LEN, NOISE, 1.0 / LEN as f64, trace_q).unwrap();
    let opt = optimal_params(&spec).unwrap();
    let sim = lms_steady(opt.step, trace_q, 12);
    let nsd = db(sim / opt.zeta_lms);
    assert!(nsd.abs() < 0.5, "NSD {nsd} dB");
}

#[test]
fn empirical_cross_emse_obeys_cauchy_schwarz() {
    let sc = scenario(1e-5);
    let cfg = EnsembleConfig::new(60, 30_000, 13).with_steady_tail(20_000);
    let m = run_ensemble(&cfg, |_, rng| {
        let pair = CombinedPair::new(
            FilterState::lms(LEN, 0.1)?,
            FilterState::lms(LEN, 0.005)?,
            MixerState::new(MixingRule::CvxPnLms, 1.0)?,
        );
        Ok((sc.source(rng)?, PairGraph::new(pair)))
    })
    .unwrap();
    let w = m.window("steady").unwrap();
    let idx = |c: &str| m.channel(c).unwrap();
    let (z1, z2, z12) = (w.mean[idx("emse1")], w.mean[idx("emse2")], w.mean[idx("cross")]);
    let rel = w.std_err[idx("cross")] / z12.abs();
    assert!(z12.abs() <= (z1 * z2).sqrt() * (1.0 + 3.0 * rel), "{z12} vs {z1} {z2}");
}
