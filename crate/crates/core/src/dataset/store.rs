use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

use super::config::DatasetConfig;
use super::container::{write_example, FORMAT_VERSION};
use super::pipeline::{generate_example, simulation_parameters};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
    /// FNV-1a checksum as stored in the file trailer, hex.
    pub checksum: String,
    /// Wall-clock generation time in seconds.
    pub elapsed_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub format_version: u16,
    pub num_examples: usize,
    pub simulation_parameters: Value,
    pub examples: Vec<ManifestEntry>,
    /// Wall-clock seconds for the whole dataset.
    pub elapsed_time: f64,
}

pub fn example_file_name(index: usize) -> String {
    format!("example_{index:05}.qds")
}

/// Generates every example of `cfg` into `out_root/<name>/` and writes
/// `manifest.json`. `progress` is called with the number of finished examples.
pub fn write_dataset<F>(cfg: &DatasetConfig, out_root: &Path, progress: F) -> Result<(PathBuf, Manifest)>
where
    F: Fn(usize, usize) + Sync,
{
    cfg.validate()?;
    let dir = out_root.join(cfg.name.to_string());
    fs::create_dir_all(&dir)?;
    let started = Instant::now();
    let done = AtomicUsize::new(0);
    let examples = (0..cfg.num_examples)
        .into_par_iter()
        .map(|i| {
            let t = Instant::now();
            let record = generate_example(cfg, i as u64)?;
            let file = example_file_name(i);
            let path = dir.join(&file);
            let checksum = write_example(&path, &record)?;
            let bytes = fs::metadata(&path)?.len();
            progress(done.fetch_add(1, Ordering::SeqCst) + 1, cfg.num_examples);
            Ok(ManifestEntry {
                file,
                bytes,
                checksum: format!("{checksum:016x}"),
                elapsed_time: t.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        name: cfg.name.to_string(),
        format_version: FORMAT_VERSION,
        num_examples: cfg.num_examples,
        simulation_parameters: simulation_parameters(cfg)?,
        examples,
        elapsed_time: started.elapsed().as_secs_f64(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok((dir, manifest))
}
