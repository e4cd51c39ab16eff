//! Example generation: pulses, distortion, noise, Hamiltonians, evolution,
//! measurements and noise operators.

use std::ops::Range;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::distortion::{apply, design_discrete, DiscreteFilter};
use crate::error::{Error, Result};
use crate::evolution::{evolve, evolve_sum, interaction_unitary};
use crate::hamiltonian::{noise_row, system_slices};
use crate::measurement::{
    expectations_for, initial_states, observables, v_operator, w_from_interaction,
    ExpectationTensor, InitialStateSet, ObservableSet,
};
use crate::noisegen::{self, n6_sources};
use crate::pulsegen::{random_train, sample, PulseTrain, Waveform};
use crate::qlinalg::ComplexMatrix;
use crate::rng::StreamKey;

use super::config::DatasetConfig;
use super::record::{ExampleRecord, NamedArray};

/// Everything computed for one example before it is packed into a record.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub example_index: u64,
    pub realizations: Range<u64>,
    pub trains: Vec<PulseTrain>,
    pub pulses: Vec<Waveform>,
    pub distorted: Vec<Waveform>,
    pub filter: Option<DiscreteFilter>,
    pub h0: Vec<ComplexMatrix>,
    /// U₀ after each slice.
    pub u0: Vec<ComplexMatrix>,
    /// One entry per noisy axis, each `K × M`.
    pub noise: Vec<Vec<f64>>,
    /// Full propagators U(T), one per realization.
    pub unitaries: Vec<ComplexMatrix>,
    pub interaction: Vec<ComplexMatrix>,
    /// Noiseless expectations Tr(U₀ρU₀†O).
    pub reference: Vec<f64>,
    pub monte_carlo: ExpectationTensor,
    /// One V_O per observable.
    pub v_o: Vec<ComplexMatrix>,
    /// `M × K` noise Hamiltonians and interaction unitaries, time-major.
    pub h1: Option<Vec<ComplexMatrix>>,
    pub ui: Option<Vec<ComplexMatrix>>,
}

impl Simulation {
    pub fn u0_final(&self) -> &ComplexMatrix {
        self.u0.last().expect("at least one slice")
    }
}

struct RealizationOutput {
    noise: Vec<Vec<f64>>,
    unitary: ComplexMatrix,
    interaction: ComplexMatrix,
    expectations: Vec<f64>,
    ws: Vec<ComplexMatrix>,
    h1: Option<Vec<ComplexMatrix>>,
    ui: Option<Vec<ComplexMatrix>>,
}

/// Pulse trains for every control axis of an example.
pub fn control_trains(cfg: &DatasetConfig, example: u64) -> Vec<PulseTrain> {
    let n_ctrl = cfg.category().control_terms(cfg.interacting_half).len();
    (0..n_ctrl as u32)
        .map(|axis| {
            let mut rng = StreamKey::pulse(cfg.master_seed, example, axis).rng();
            random_train(cfg.name.waveform, &cfg.pulse, &mut rng)
        })
        .collect()
}

pub fn distortion_filter(cfg: &DatasetConfig) -> Result<Option<DiscreteFilter>> {
    if cfg.name.distorted {
        Ok(Some(design_discrete(&cfg.filter, cfg.sample_rate())?))
    } else {
        Ok(None)
    }
}

/// Runs the pipeline for one example over the given realization indices.
pub fn simulate(cfg: &DatasetConfig, example: u64, realizations: Range<u64>) -> Result<Simulation> {
    cfg.validate()?;
    if realizations.is_empty() {
        return Err(Error::InvalidConfig("realization range is empty".into()));
    }
    let cat = cfg.category();
    let m = cfg.pulse.num_steps;
    let dt = cfg.pulse.dt();

    let trains = control_trains(cfg, example);
    let pulses: Vec<Waveform> = trains.iter().map(|t| sample(t, &cfg.pulse)).collect();
    let filter = distortion_filter(cfg)?;
    let distorted: Vec<Waveform> = match &filter {
        Some(f) => pulses.iter().map(|w| apply(f, w)).collect(),
        None => pulses.clone(),
    };
    let drive: Vec<&[f64]> = distorted.iter().map(|w| w.samples.as_slice()).collect();
    let h0 = system_slices(cat, &cfg.gaps, &drive, cfg.interacting_half)?;
    let u0 = evolve(&h0, dt, true)?
        .intermediates
        .expect("intermediates requested");
    let u0_final = *u0.last().expect("at least one slice");

    let states = initial_states(cat.nqubits())?;
    let obs = observables(cat.nqubits())?;
    let reference = expectations_for(&states, &obs, &u0_final)?;

    let axes = cfg.axes();
    let sources = n6_sources(&axes)?;
    let outputs: Vec<RealizationOutput> = realizations
        .clone()
        .into_par_iter()
        .map(|k| {
            let noise = noisegen::realization(
                &axes,
                &sources,
                cfg.pulse.total_time,
                m,
                &cfg.noise,
                (cfg.master_seed, example, k),
            )?;
            let series: Vec<&[f64]> = noise.iter().map(|s| s.as_slice()).collect();
            let h1 = noise_row(cat, &series)?;
            let trace = evolve_sum(&h0, &h1, dt, cfg.full)?;
            run_measurements(&states, &obs, &u0, noise, h1, trace.final_unitary, trace.intermediates, cfg.full)
        })
        .collect::<Result<_>>()?;

    let k = outputs.len();
    let noise = (0..axes.len())
        .map(|a| outputs.iter().flat_map(|o| o.noise[a].iter().copied()).collect())
        .collect();
    let v_o = (0..obs.matrices.len())
        .map(|i| {
            let ws: Vec<ComplexMatrix> = outputs.iter().map(|o| o.ws[i]).collect();
            v_operator(&ws)
        })
        .collect::<Result<_>>()?;
    let time_major = |get: fn(&RealizationOutput) -> &Option<Vec<ComplexMatrix>>| {
        if !cfg.full {
            return None;
        }
        Some(
            (0..m)
                .flat_map(|j| outputs.iter().map(move |o| get(o).as_ref().expect("retained")[j]))
                .collect::<Vec<_>>(),
        )
    };
    let h1 = time_major(|o| &o.h1);
    let ui = time_major(|o| &o.ui);
    let monte_carlo = ExpectationTensor::from_rows(
        states.states.len(),
        obs.matrices.len(),
        outputs.iter().map(|o| o.expectations.clone()).collect(),
    );
    debug_assert_eq!(monte_carlo.num_realizations, k);

    Ok(Simulation {
        example_index: example,
        realizations,
        trains,
        pulses,
        distorted,
        filter,
        h0,
        u0,
        noise,
        unitaries: outputs.iter().map(|o| o.unitary).collect(),
        interaction: outputs.iter().map(|o| o.interaction).collect(),
        reference,
        monte_carlo,
        v_o,
        h1,
        ui,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_measurements(
    states: &InitialStateSet,
    obs: &ObservableSet,
    u0: &[ComplexMatrix],
    noise: Vec<Vec<f64>>,
    h1: Vec<ComplexMatrix>,
    unitary: ComplexMatrix,
    intermediates: Option<Vec<ComplexMatrix>>,
    full: bool,
) -> Result<RealizationOutput> {
    let u0_final = u0.last().expect("at least one slice");
    let interaction = interaction_unitary(&unitary, u0_final)?;
    let expectations = expectations_for(states, obs, &unitary)?;
    let ws = obs
        .matrices
        .iter()
        .map(|o| w_from_interaction(&interaction, o))
        .collect::<Result<_>>()?;
    let ui = match intermediates {
        Some(us) if full => Some(
            us.iter()
                .zip(u0)
                .map(|(u, u0j)| interaction_unitary(u, u0j))
                .collect::<Result<_>>()?,
        ),
        _ => None,
    };
    Ok(RealizationOutput {
        noise,
        unitary,
        interaction,
        expectations,
        ws,
        h1: full.then_some(h1),
        ui,
    })
}

/// Simulates all K realizations and packs the result into a record.
pub fn generate_example(cfg: &DatasetConfig, example: u64) -> Result<ExampleRecord> {
    let k = cfg.effective_realizations() as u64;
    let sim = simulate(cfg, example, 0..k)?;
    to_record(cfg, &sim)
}

/// `simulation_parameters` block: the config plus derived fields.
pub fn simulation_parameters(cfg: &DatasetConfig) -> Result<Value> {
    let mut v = serde_json::to_value(cfg)?;
    let cat = cfg.category();
    let states = initial_states(cat.nqubits())?;
    let obs = observables(cat.nqubits())?;
    let derived = json!({
        "category": cat,
        "nqubits": cat.nqubits(),
        "dim": cat.dim(),
        "custom": cfg.is_custom(),
        "noise_profiles": cfg.profiles(),
        "noise_axes": cat.noise_terms().iter().map(|t| t.label).collect::<Vec<_>>(),
        "control_axes": cat.control_terms(cfg.interacting_half).iter().map(|t| t.label).collect::<Vec<_>>(),
        "simulated_realizations": cfg.effective_realizations(),
        "initial_states": states.labels,
        "observables": obs.labels.iter().map(|l| l.name()).collect::<Vec<_>>(),
        "pulse_shape": cfg.name.waveform,
        "distortion": cfg.name.distorted,
        "gaussian_sigma_effective": cfg.pulse.sigma(),
        "sample_rate_hz": cfg.sample_rate(),
    });
    let obj = v.as_object_mut().expect("config serializes to an object");
    for (key, value) in derived.as_object().expect("object literal") {
        obj.insert(key.clone(), value.clone());
    }
    Ok(v)
}

pub fn to_record(cfg: &DatasetConfig, sim: &Simulation) -> Result<ExampleRecord> {
    let m = cfg.pulse.num_steps;
    let n_ctrl = sim.pulses.len();
    let k = sim.monte_carlo.num_realizations;
    let entries = sim.monte_carlo.entries_per_realization();
    let n_axes = sim.noise.len();
    let n_obs = sim.v_o.len();

    let param_rows: Vec<f64> = sim
        .trains
        .iter()
        .flat_map(|t| t.parameter_rows().into_iter().flatten())
        .collect();
    let interleave = |ws: &[Waveform]| -> Vec<f64> {
        (0..m).flat_map(|j| ws.iter().map(move |w| w.samples[j])).collect()
    };
    let n_pulses = sim.trains.first().map_or(0, |t| t.num_pulses());

    let mut arrays = vec![
        NamedArray::real("pulse_parameters", vec![n_ctrl, n_pulses, 3], param_rows),
        NamedArray::real("time_range", vec![m], cfg.pulse.sample_times()),
        NamedArray::real("pulses", vec![m, n_ctrl], interleave(&sim.pulses)),
        NamedArray::real("distorted_pulses", vec![m, n_ctrl], interleave(&sim.distorted)),
        NamedArray::real("expectations", vec![entries], sim.reference.clone()),
        NamedArray::matrices("V_O", vec![n_obs], &sim.v_o),
        NamedArray::real("V_O_per_realization", vec![k, entries], sim.monte_carlo.per_realization.clone()),
        NamedArray::real("E_O", vec![entries], sim.monte_carlo.averaged.clone()),
        NamedArray::real("noise", vec![n_axes, k, m], sim.noise.concat()),
        NamedArray::matrices("H0", vec![m], &sim.h0),
    ];
    if let Some(h1) = &sim.h1 {
        arrays.push(NamedArray::matrices("H1", vec![m, k], h1));
    }
    arrays.push(NamedArray::matrices("U0", vec![m], &sim.u0));
    if let Some(ui) = &sim.ui {
        arrays.push(NamedArray::matrices("UI", vec![m, k], ui));
    }

    let table: Vec<_> = arrays.iter().map(|a| a.spec()).collect();
    let key_order: Vec<&str> = std::iter::once("simulation_parameters")
        .chain(arrays.iter().map(|a| a.name.as_str()))
        .collect();
    let metadata = json!({
        "format": "qds",
        "example_index": sim.example_index,
        "seed_lineage": {
            "master_seed": cfg.master_seed,
            "example": sim.example_index,
            "realizations": [sim.realizations.start, sim.realizations.end],
            "pulse_channels": (0..n_ctrl as u32).map(|a| StreamKey::pulse(cfg.master_seed, sim.example_index, a)).collect::<Vec<_>>(),
            "first_noise_channels": (0..n_axes as u32)
                .map(|a| StreamKey::noise(cfg.master_seed, sim.example_index, sim.realizations.start, a))
                .collect::<Vec<_>>(),
        },
        "filter": sim.filter,
        "key_order": key_order,
        "arrays": table,
        "simulation_parameters": simulation_parameters(cfg)?,
    });
    let record = ExampleRecord { metadata, arrays };
    record.check_shapes()?;
    Ok(record)
}
