use serde::{Deserialize, Serialize};

use crate::distortion::AnalogFilterSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::{EnergyGaps, SystemCategory};
use crate::noisegen::{AxisNoise, NoiseParams, NoiseProfile};
use crate::pulsegen::PulseConfig;

use super::name::{all_names, DatasetName};

pub const DEFAULT_NUM_REALIZATIONS: usize = 2000;
pub const DEFAULT_NUM_EXAMPLES: usize = 10;

/// Everything needed to regenerate a dataset. Serialized as the
/// `simulation_parameters` block of every example, and accepted back as a
/// config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: DatasetName,
    #[serde(default)]
    pub gaps: EnergyGaps,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub noise: NoiseParams,
    /// Used only when the name carries the `D` flag.
    #[serde(default)]
    pub filter: AnalogFilterSpec,
    /// Monte Carlo realizations K. Noiseless datasets always simulate one.
    #[serde(default = "default_k")]
    pub num_realizations: usize,
    #[serde(default = "default_num_examples")]
    pub num_examples: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Puts a ½ on the interacting σx⊗σx control term.
    #[serde(default)]
    pub interacting_half: bool,
    /// Retain the per-realization H1 and UI arrays.
    #[serde(default)]
    pub full: bool,
}

fn default_k() -> usize {
    DEFAULT_NUM_REALIZATIONS
}

fn default_num_examples() -> usize {
    DEFAULT_NUM_EXAMPLES
}

impl DatasetConfig {
    pub fn new(name: DatasetName) -> Self {
        Self {
            name,
            gaps: EnergyGaps::default(),
            pulse: PulseConfig::default(),
            noise: NoiseParams::default(),
            filter: AnalogFilterSpec::default(),
            num_realizations: DEFAULT_NUM_REALIZATIONS,
            num_examples: DEFAULT_NUM_EXAMPLES,
            master_seed: 0,
            interacting_half: false,
            full: false,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(Self::new(DatasetName::parse(name)?))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn category(&self) -> SystemCategory {
        self.name.category
    }

    pub fn dim(&self) -> usize {
        self.category().dim()
    }

    pub fn is_noiseless(&self) -> bool {
        self.name.is_noiseless()
    }

    /// Realizations actually simulated.
    pub fn effective_realizations(&self) -> usize {
        if self.is_noiseless() {
            1
        } else {
            self.num_realizations
        }
    }

    /// True when the name is not one of the 52 enumerated datasets.
    pub fn is_custom(&self) -> bool {
        !all_names().contains(&self.name)
    }

    pub fn axes(&self) -> Vec<AxisNoise> {
        self.name
            .axis_profiles()
            .into_iter()
            .zip(self.category().noise_families())
            .map(|(profile, family)| AxisNoise { profile, family })
            .collect()
    }

    pub fn profiles(&self) -> Vec<NoiseProfile> {
        self.name.axis_profiles()
    }

    pub fn sample_rate(&self) -> f64 {
        self.pulse.num_steps as f64 / self.pulse.total_time
    }

    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        if self.name.distorted {
            self.filter.validate()?;
        }
        if self.num_realizations == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.num_examples == 0 {
            return Err(Error::InvalidConfig("number of examples must be at least 1".into()));
        }
        crate::noisegen::n6_sources(&self.axes())?;
        Ok(())
    }
}

/// Default configurations for all 52 datasets.
pub fn enumerate_configs() -> Vec<DatasetConfig> {
    all_names().into_iter().map(DatasetConfig::new).collect()
}
