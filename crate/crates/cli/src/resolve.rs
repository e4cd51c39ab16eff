//! Turning names, config files and overrides into a checked dataset config.

use std::fs;
use std::path::Path;

use qds_core::dataset::{all_names, DatasetConfig, DatasetName};

use crate::args::{Overrides, Source};
use crate::{CliError, CliResult};

/// Up to three enumerated names closest to `input` by edit distance.
pub fn near_matches(input: &str) -> Vec<String> {
    let mut scored: Vec<(usize, String)> = all_names()
        .into_iter()
        .map(|n| {
            let s = n.to_string();
            (strsim::levenshtein(input, &s), s)
        })
        .collect();
    scored.sort();
    let limit = (input.len() / 2).max(3);
    scored
        .into_iter()
        .filter(|(d, _)| *d <= limit)
        .take(3)
        .map(|(_, s)| s)
        .collect()
}

pub fn parse_name(input: &str) -> CliResult<DatasetName> {
    DatasetName::parse(input).map_err(|e| {
        let close = near_matches(input);
        let hint = if close.is_empty() {
            String::from("run `qds list` for the available names")
        } else {
            format!("did you mean: {}", close.join(", "))
        };
        CliError::Usage(format!("unknown dataset name: {e}; {hint}"))
    })
}

pub fn load_config(path: &Path) -> CliResult<DatasetConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    DatasetConfig::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn base_config(name: Option<&str>, config: Option<&Path>) -> CliResult<DatasetConfig> {
    match (name, config) {
        (Some(n), None) => Ok(DatasetConfig::new(parse_name(n)?)),
        (None, Some(p)) => load_config(p),
        (Some(_), Some(_)) => Err(CliError::Usage("give either a name or --config, not both".into())),
        (None, None) => Err(CliError::Usage("a dataset name or --config is required".into())),
    }
}

pub fn apply(mut cfg: DatasetConfig, o: &Overrides) -> CliResult<DatasetConfig> {
    if let Some(v) = o.num_examples {
        cfg.num_examples = v;
    }
    if let Some(v) = o.k {
        cfg.num_realizations = v;
    }
    if let Some(v) = o.m {
        cfg.pulse.num_steps = v;
    }
    if let Some(v) = o.seed {
        cfg.master_seed = v;
    }
    if o.full {
        cfg.full = true;
    }
    if o.no_distortion_override {
        cfg.name.distorted = false;
    }
    if let Some(v) = o.filter_order {
        cfg.filter.order = v;
    }
    if let Some(v) = o.filter_ripple {
        cfg.filter.passband_ripple_db = v;
    }
    if let Some(v) = o.filter_cutoff {
        cfg.filter.cutoff_rad_per_s = v;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if cfg.name.distorted {
        qds_core::dataset::distortion_filter(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(cfg)
}

pub fn resolve(source: &Source, overrides: &Overrides) -> CliResult<DatasetConfig> {
    let name = source.positional.as_deref().or(source.name.as_deref());
    apply(base_config(name, source.config.as_deref())?, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_matches_rank_by_distance() {
        assert_eq!(near_matches("G_1q_XX")[0], "G_1q_X");
        assert!(near_matches("G_1q_X_Z_N7").contains(&"G_1q_X_Z_N1".to_string()));
        assert!(near_matches("completely-unrelated-input-string").is_empty());
    }

    #[test]
    fn overrides_apply_and_validate() {
        let o = Overrides {
            k: Some(7),
            m: Some(256),
            no_distortion_override: true,
            ..Overrides::default()
        };
        let cfg = apply(DatasetConfig::from_name("S_1q_XY_D").unwrap(), &o).unwrap();
        assert_eq!(cfg.num_realizations, 7);
        assert_eq!(cfg.pulse.num_steps, 256);
        assert!(!cfg.name.distorted);
        let bad = Overrides {
            m: Some(1000),
            ..Overrides::default()
        };
        assert!(matches!(
            apply(DatasetConfig::from_name("G_1q_X").unwrap(), &bad),
            Err(CliError::Usage(_))
        ));
    }
}
