//! Acceptance checks. Each test prints one `PASS`/`FAIL` line to stderr
//! (bypassing output capture) before asserting.

use std::io::Write;
use std::time::Instant;

use qds_core::dataset::{
    all_names, decode, encode, enumerate_configs, generate_example, simulate, write_dataset, DatasetConfig,
    DatasetName,
};
use qds_core::distortion::{design_discrete, AnalogFilterSpec};
use qds_core::measurement::{initial_states, observables, reconstruct_expectation, w_operator};
use qds_core::noisegen::{batch, psd_z, AxisNoise, NoiseParams, NoiseProfile, PsdFamily};
use qds_core::pulsegen::{random_gaussian, sample, PulseConfig, PulseTrain};
use qds_core::qlinalg::ComplexMatrix;
use qds_core::rng::StreamKey;
use qds_core::validation::{validate_record, verify_distortion, verify_psd, DEFAULT_SUBSTEPS};

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{status}] criterion {id:>2}: {title} ({detail})");
    assert!(pass, "criterion {id} failed: {detail}");
}

fn config(name: &str) -> DatasetConfig {
    DatasetConfig::from_name(name).unwrap()
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn criterion_01_noiseless_cross_oracle() {
    let cfg = config("G_1q_X");
    let started = Instant::now();
    let errors: Vec<f64> = pool(1).install(|| {
        (0..20)
            .map(|i| {
                let rec = generate_example(&cfg, i).unwrap();
                validate_record(&rec, DEFAULT_SUBSTEPS, 1e-6).unwrap().mean_abs_error
            })
            .collect()
    });
    let elapsed = started.elapsed().as_secs_f64();
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    report(
        1,
        "noiseless G_1q_X agrees with the RK4 oracle",
        mean <= 1e-6 && elapsed <= 60.0,
        &format!("mean |ΔE| = {mean:.3e} ≤ 1e-6, {elapsed:.1} s ≤ 60 s single-threaded"),
    );
}

#[test]
fn criterion_02_noisy_matched_cross_oracle() {
    let mut cfg = config("G_1q_X_Z_N1");
    cfg.num_realizations = 100;
    let mut worst = 0.0f64;
    for i in 0..5 {
        let rec = generate_example(&cfg, i).unwrap();
        let r = validate_record(&rec, DEFAULT_SUBSTEPS, 1e-6).unwrap();
        worst = r.per_observable.iter().copied().fold(worst, f64::max);
    }
    report(
        2,
        "noisy G_1q_X_Z_N1 with matched realizations agrees with the oracle",
        worst <= 1e-6,
        &format!("worst per-observable mean |ΔE| = {worst:.3e} ≤ 1e-6"),
    );
}

#[test]
fn criterion_03_unitarity_fuzz() {
    let names = [
        "G_1q_X_Z_N1",
        "S_1q_XY_XZ_N1N5_D",
        "G_1q_XY_XZ_N3N6",
        "G_2q_IX-XI_IZ-ZI_N1-N6_D",
        "S_2q_IX-XI-XX_IZ-ZI_N1-N5",
    ];
    let mut count = 0usize;
    let mut worst = 0.0f64;
    for (e, name) in names.iter().enumerate() {
        let mut cfg = config(name);
        cfg.pulse.num_steps = 256;
        cfg.num_realizations = 10;
        cfg.full = true;
        cfg.master_seed = 11;
        let sim = simulate(&cfg, e as u64, 0..10).unwrap();
        let all = sim
            .u0
            .iter()
            .chain(&sim.unitaries)
            .chain(&sim.interaction)
            .chain(sim.ui.as_ref().unwrap());
        for u in all {
            worst = worst.max(u.unitarity_residual());
            count += 1;
        }
    }
    report(
        3,
        "propagators and interaction unitaries stay unitary",
        count >= 10_000 && worst <= 1e-10,
        &format!("{count} unitaries, max ‖U†U−I‖_F = {worst:.3e} ≤ 1e-10"),
    );
}

#[test]
fn criterion_04_v_o_identity_and_reconstruction() {
    let mut worst_v = 0.0f64;
    let noiseless: Vec<DatasetConfig> = enumerate_configs()
        .into_iter()
        .filter(|c| c.is_noiseless())
        .collect();
    for (i, cfg) in noiseless.iter().enumerate() {
        let sim = simulate(cfg, i as u64, 0..1).unwrap();
        for v in &sim.v_o {
            worst_v = worst_v.max((*v - ComplexMatrix::identity(cfg.dim())).frobenius_norm());
        }
    }

    let mut triples = 0usize;
    let mut worst_r = 0.0f64;
    for (name, k) in [("G_1q_XY_XZ_N1N5", 20), ("S_2q_IX-XI-XX_IZ-ZI_N1-N6_D", 3)] {
        let mut cfg = config(name);
        cfg.num_realizations = k;
        let sim = simulate(&cfg, 4, 0..k as u64).unwrap();
        let n = cfg.category().nqubits();
        let states = initial_states(n).unwrap();
        let obs = observables(n).unwrap();
        let u0 = sim.u0_final();
        for (r, u) in sim.unitaries.iter().enumerate() {
            let direct = sim.monte_carlo.realization(r);
            for (o_idx, o) in obs.matrices.iter().enumerate() {
                let w = w_operator(u, u0, o).unwrap();
                for (s_idx, rho) in states.states.iter().enumerate() {
                    let rebuilt = reconstruct_expectation(&w, u0, rho, o);
                    worst_r = worst_r.max((rebuilt - direct[s_idx * obs.matrices.len() + o_idx]).abs());
                    triples += 1;
                }
            }
        }
    }
    report(
        4,
        "noiseless V_O is the identity and W_O reconstructs expectations",
        worst_v <= 1e-12 && triples >= 1000 && worst_r <= 1e-10,
        &format!(
            "{} noiseless configs, max ‖V_O−I‖_F = {worst_v:.3e}; {triples} triples, max error {worst_r:.3e}",
            noiseless.len()
        ),
    );
}

#[test]
fn criterion_05_counts() {
    let configs = enumerate_configs().len();
    let one = initial_states(1).unwrap().states.len() * observables(1).unwrap().matrices.len();
    let two = initial_states(2).unwrap().states.len() * observables(2).unwrap().matrices.len();
    report(
        5,
        "dataset and measurement counts",
        configs == 52 && one == 18 && two == 540,
        &format!("{configs} configs, {one} one-qubit and {two} two-qubit expectations"),
    );
}

#[test]
fn criterion_06_psd_recovery_and_n6() {
    let axes = [AxisNoise {
        profile: NoiseProfile::N1,
        family: PsdFamily::Z,
    }];
    let params = NoiseParams::default();
    let b = batch(&axes, 2000, 1.0, 1024, &params, 5, 0).unwrap();
    let r = verify_psd(&b[0].samples, 1024, 1.0, psd_z, 4, 50, 0.05).unwrap();

    let axes = [
        AxisNoise {
            profile: NoiseProfile::N1,
            family: PsdFamily::X,
        },
        AxisNoise {
            profile: NoiseProfile::N6,
            family: PsdFamily::Z,
        },
    ];
    let b = batch(&axes, 64, 1.0, 1024, &params, 5, 1).unwrap();
    let n6_exact = b[0].samples.iter().zip(&b[1].samples).all(|(x, y)| x * x == *y);
    report(
        6,
        "N1 realizations reproduce S_Z and N6 squares its source",
        r.passed && n6_exact,
        &format!(
            "max band-relative error {:.3e} ≤ 0.05 over {} bands, N6 exact = {n6_exact}",
            r.max_abs_error,
            r.psd_relative_errors.len()
        ),
    );
}

#[test]
fn criterion_07_distortion_properties() {
    let fs = 1024.0;
    let cfg = PulseConfig::default();
    let filter = design_discrete(&AnalogFilterSpec::default(), fs).unwrap();
    let mut delayed = true;
    let mut min_lag = i64::MAX;
    let mut max_ratio = 0.0f64;
    for seed in 0..20 {
        let train = random_gaussian(&cfg, &mut StreamKey::pulse(seed, 0, 0).rng());
        let w = sample(&PulseTrain::Gaussian(train), &cfg);
        let r = verify_distortion(&w.samples, &filter.filter_samples(&w.samples)).unwrap();
        let (lag, ratio) = (r.lag.unwrap(), r.peak_ratio.unwrap());
        delayed &= lag > 0 && ratio < 1.0;
        min_lag = min_lag.min(lag);
        max_ratio = max_ratio.max(ratio);
    }

    let smooth = PulseConfig {
        gaussian_sigma: Some(0.02),
        ..PulseConfig::default()
    };
    let draw = |seed| {
        let t = random_gaussian(&smooth, &mut StreamKey::pulse(seed, 0, 0).rng());
        sample(&PulseTrain::Gaussian(t), &smooth).samples
    };
    let (x1, x2) = (draw(100), draw(101));
    let (a, b) = (0.8, -1.7);
    let combo: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| a * p + b * q).collect();
    let (y1, y2, yc) = (
        filter.filter_samples(&x1),
        filter.filter_samples(&x2),
        filter.filter_samples(&combo),
    );
    let linearity = (0..yc.len())
        .map(|i| (yc[i] - (a * y1[i] + b * y2[i])).abs())
        .fold(0.0, f64::max);
    let shift = 53;
    let mut shifted = vec![0.0; shift];
    shifted.extend_from_slice(&x1[..x1.len() - shift]);
    let ys = filter.filter_samples(&shifted);
    let invariance = (shift..ys.len())
        .map(|i| (ys[i] - y1[i - shift]).abs())
        .fold(0.0, f64::max);

    let mut dc_worst = 0.0f64;
    for order in 1..=8 {
        let spec = AnalogFilterSpec {
            order,
            ..AnalogFilterSpec::default()
        };
        let eps = spec.epsilon();
        let expected = if order % 2 == 1 { 1.0 } else { 1.0 / (1.0 + eps * eps).sqrt() };
        let d = design_discrete(&spec, fs).unwrap();
        dc_worst = dc_worst.max((d.eval_hz(0.0).norm() - expected).abs());
    }
    report(
        7,
        "distortion delays and attenuates, and is linear time-invariant",
        delayed && linearity <= 1e-10 && invariance <= 1e-10 && dc_worst <= 1e-9,
        &format!(
            "min lag {min_lag}, max peak ratio {max_ratio:.3}; linearity {linearity:.1e}, \
             shift {invariance:.1e}, DC parity {dc_worst:.1e}"
        ),
    );
}

#[test]
fn criterion_08_monte_carlo_convergence() {
    let cfg = config("G_1q_X_Z_N1");
    let runs = 20u64;
    let spread = |k: u64, offset: u64| -> Vec<f64> {
        let means: Vec<Vec<f64>> = (0..runs)
            .map(|r| {
                let start = offset + r * k;
                simulate(&cfg, 0, start..start + k).unwrap().monte_carlo.averaged
            })
            .collect();
        (0..means[0].len())
            .map(|e| {
                let col: Vec<f64> = means.iter().map(|m| m[e]).collect();
                let mu = col.iter().sum::<f64>() / col.len() as f64;
                col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (col.len() - 1) as f64
            })
            .collect()
    };
    let var_small: f64 = spread(125, 0).iter().sum();
    let var_large: f64 = spread(2000, runs * 125).iter().sum();
    let ratio = (var_small / var_large).sqrt();
    report(
        8,
        "standard error of E_O scales as 1/√K",
        ratio >= 4.0 / 1.5 && ratio <= 4.0 * 1.5,
        &format!("σ(K=125)/σ(K=2000) = {ratio:.3}, expected 4 within ×1.5"),
    );
}

#[test]
fn criterion_09_persistence_and_names() {
    let mut cfg = config("G_2q_IX-XI-XX_IZ-ZI_N1-N6_D");
    cfg.pulse.num_steps = 64;
    cfg.num_realizations = 2;
    cfg.full = true;
    let rec = generate_example(&cfg, 7).unwrap();
    let bytes = encode(&rec).unwrap();
    let back = decode(&bytes).unwrap();
    let idempotent = encode(&back).unwrap() == bytes && back == rec;

    let mut undetected = 0usize;
    let positions: Vec<usize> = (0..bytes.len()).step_by(97).chain(0..64).chain(bytes.len() - 16..bytes.len()).collect();
    for &i in &positions {
        let mut bad = bytes.clone();
        bad[i] ^= 0x40;
        if decode(&bad).is_ok() {
            undetected += 1;
        }
    }

    let names = all_names();
    let bijective = names
        .iter()
        .all(|n| DatasetName::parse(&n.to_string()).as_ref() == Ok(n))
        && names.len() == 52;
    let worked = ["G_2q_IX-XI-XX_IZ-ZI_N1-N6", "S_1q_XY_D"]
        .iter()
        .all(|s| DatasetName::parse(s).map(|n| n.to_string()).as_deref() == Ok(*s));
    report(
        9,
        "container round-trips bitwise, detects corruption; names are a bijection",
        idempotent && undetected == 0 && bijective && worked,
        &format!(
            "{} bytes idempotent = {idempotent}; {} corruptions, {undetected} undetected; 52-name bijection = {bijective}",
            bytes.len(),
            positions.len()
        ),
    );
}

#[test]
fn criterion_10_thread_count_does_not_change_output() {
    let mut cfg = config("G_1q_X_Z_N2");
    cfg.num_examples = 2;
    cfg.num_realizations = 32;
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let outputs: Vec<Vec<Vec<u8>>> = [1, 8]
        .iter()
        .zip(&dirs)
        .map(|(&threads, dir)| {
            let (path, manifest) = pool(threads).install(|| write_dataset(&cfg, dir.path(), |_, _| {}).unwrap());
            manifest
                .examples
                .iter()
                .map(|e| std::fs::read(path.join(&e.file)).unwrap())
                .collect()
        })
        .collect();
    let identical = outputs[0].len() == 2 && outputs[0] == outputs[1];
    report(
        10,
        "1 and 8 threads write byte-identical files",
        identical,
        &format!(
            "{} files of {} bytes, identical = {identical}",
            outputs[0].len(),
            outputs[0].first().map_or(0, |f| f.len())
        ),
    );
}
