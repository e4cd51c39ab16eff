//! Dataset registry, naming, example assembly and persistence.

mod config;
mod container;
mod name;
mod pipeline;
mod record;
mod store;

pub use config::{enumerate_configs, DatasetConfig, DEFAULT_NUM_EXAMPLES, DEFAULT_NUM_REALIZATIONS};
pub use container::{decode, encode, fnv1a64, read_example, write_example, FormatError, FORMAT_VERSION, MAGIC};
pub use name::{all_names, base_combinations, DatasetName, NameError, NamePart};
pub use pipeline::{
    control_trains, distortion_filter, generate_example, simulate, simulation_parameters, to_record,
    Simulation,
};
pub use record::{ArrayData, ArraySpec, Dtype, ExampleRecord, NamedArray};
pub use store::{example_file_name, write_dataset, Manifest, ManifestEntry};
