//! Canonical dataset identifiers such as `G_2q_IX-XI-XX_IZ-ZI_N1-N6`.
//!
//! A name has up to six underscore-separated parts: waveform (`G`/`S`), qubit
//! count (`1q`/`2q`), control axes, noise axes, noise profiles and an optional
//! trailing `D` for distorted pulses. The two noise parts appear together or
//! not at all. One-qubit profile lists are concatenated (`N1N5`); two-qubit
//! lists are hyphenated (`N1-N6`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::SystemCategory;
use crate::noisegen::NoiseProfile;
use crate::pulsegen::PulseShape;

/// Which part of a dataset name failed to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamePart {
    Whole,
    Waveform,
    Qubits,
    Control,
    NoiseAxes,
    NoiseProfiles,
    Distortion,
}

impl fmt::Display for NamePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamePart::Whole => "name",
            NamePart::Waveform => "waveform",
            NamePart::Qubits => "qubit count",
            NamePart::Control => "control axes",
            NamePart::NoiseAxes => "noise axes",
            NamePart::NoiseProfiles => "noise profiles",
            NamePart::Distortion => "distortion flag",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid dataset name {name:?}: {part} part {value:?} {reason}")]
pub struct NameError {
    pub name: String,
    pub part: NamePart,
    pub value: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DatasetName {
    pub waveform: PulseShape,
    pub category: SystemCategory,
    /// One profile per noisy axis; empty for noiseless datasets.
    pub profiles: Vec<NoiseProfile>,
    pub distorted: bool,
}

fn waveform_tag(shape: PulseShape) -> &'static str {
    match shape {
        PulseShape::Gaussian => "G",
        PulseShape::Square => "S",
    }
}

impl DatasetName {
    pub fn new(
        waveform: PulseShape,
        category: SystemCategory,
        profiles: Vec<NoiseProfile>,
        distorted: bool,
    ) -> Self {
        Self {
            waveform,
            category,
            profiles,
            distorted,
        }
    }

    pub fn nqubits(&self) -> usize {
        self.category.nqubits()
    }

    pub fn is_noiseless(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn control_tag(&self) -> &'static str {
        self.category.control_tag()
    }

    pub fn noise_axes_tag(&self) -> Option<&'static str> {
        (!self.is_noiseless()).then(|| self.category.noise_axes_tag())
    }

    pub fn noise_profiles_tag(&self) -> Option<String> {
        if self.is_noiseless() {
            return None;
        }
        let tags: Vec<&str> = self.profiles.iter().map(|p| p.tag()).collect();
        Some(match self.nqubits() {
            1 => tags.concat(),
            _ => tags.join("-"),
        })
    }

    /// Per-axis profiles, with N0 on every axis of a noiseless dataset.
    pub fn axis_profiles(&self) -> Vec<NoiseProfile> {
        if self.is_noiseless() {
            vec![NoiseProfile::N0; self.category.noise_terms().len()]
        } else {
            self.profiles.clone()
        }
    }

    pub fn parse(s: &str) -> Result<Self, NameError> {
        let err = |part: NamePart, value: &str, reason: &str| NameError {
            name: s.to_string(),
            part,
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = s.split('_').collect();
        if !(3..=6).contains(&parts.len()) {
            return Err(err(
                NamePart::Whole,
                s,
                "must have 3 to 6 underscore-separated parts",
            ));
        }

        let waveform = match parts[0] {
            "G" => PulseShape::Gaussian,
            "S" => PulseShape::Square,
            other => return Err(err(NamePart::Waveform, other, "must be G or S")),
        };
        let nqubits = match parts[1] {
            "1q" => 1,
            "2q" => 2,
            other => return Err(err(NamePart::Qubits, other, "must be 1q or 2q")),
        };
        let category = SystemCategory::from_control_tag(nqubits, parts[2]).ok_or_else(|| {
            err(
                NamePart::Control,
                parts[2],
                if nqubits == 1 {
                    "must be X or XY for one qubit"
                } else {
                    "must be IX-XI or IX-XI-XX for two qubits"
                },
            )
        })?;

        let mut rest = &parts[3..];
        let distorted = match rest.last() {
            Some(&"D") => {
                rest = &rest[..rest.len() - 1];
                true
            }
            _ => false,
        };
        let profiles = match rest {
            [] => Vec::new(),
            [axes, profiles] => {
                if *axes != category.noise_axes_tag() {
                    return Err(err(
                        NamePart::NoiseAxes,
                        axes,
                        &format!("must be {} for this system", category.noise_axes_tag()),
                    ));
                }
                let parsed = parse_profiles(nqubits, profiles)
                    .ok_or_else(|| err(NamePart::NoiseProfiles, profiles, "is not a list of N1–N6 tags"))?;
                if parsed.len() != category.noise_terms().len() {
                    return Err(err(
                        NamePart::NoiseProfiles,
                        profiles,
                        &format!("must list one profile per noise axis ({})", category.noise_terms().len()),
                    ));
                }
                parsed
            }
            [single] if distorted || single.starts_with('N') => {
                return Err(err(
                    NamePart::NoiseAxes,
                    single,
                    "noise axes and noise profiles must appear together",
                ))
            }
            [single] => return Err(err(NamePart::Distortion, single, "must be D")),
            [_, _, extra] => return Err(err(NamePart::Distortion, extra, "must be D")),
            _ => return Err(err(NamePart::Whole, s, "has too many parts")),
        };

        let name = Self::new(waveform, category, profiles, distorted);
        if name.to_string() != s {
            return Err(err(NamePart::NoiseProfiles, parts.get(4).unwrap_or(&""), "is not in canonical form"));
        }
        Ok(name)
    }
}

fn parse_profiles(nqubits: usize, tag: &str) -> Option<Vec<NoiseProfile>> {
    let tags: Vec<&str> = if nqubits == 1 {
        if tag.len() % 2 != 0 || !tag.is_ascii() {
            return None;
        }
        (0..tag.len()).step_by(2).map(|i| &tag[i..i + 2]).collect()
    } else {
        tag.split('-').collect()
    };
    let profiles: Option<Vec<NoiseProfile>> = tags.into_iter().map(NoiseProfile::from_tag).collect();
    profiles.filter(|p| !p.is_empty() && !p.contains(&NoiseProfile::N0))
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_{}q_{}",
            waveform_tag(self.waveform),
            self.nqubits(),
            self.control_tag()
        )?;
        if let (Some(axes), Some(profiles)) = (self.noise_axes_tag(), self.noise_profiles_tag()) {
            write!(f, "_{axes}_{profiles}")?;
        }
        if self.distorted {
            f.write_str("_D")?;
        }
        Ok(())
    }
}

impl FromStr for DatasetName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for DatasetName {
    type Error = NameError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

impl From<DatasetName> for String {
    fn from(n: DatasetName) -> Self {
        n.to_string()
    }
}

/// The 13 (category, profiles) combinations that make up the dataset family.
pub fn base_combinations() -> Vec<(SystemCategory, Vec<NoiseProfile>)> {
    use NoiseProfile::*;
    use SystemCategory::*;
    vec![
        (Cat1, vec![]),
        (Cat1, vec![N1]),
        (Cat1, vec![N2]),
        (Cat1, vec![N3]),
        (Cat1, vec![N4]),
        (Cat2, vec![]),
        (Cat2, vec![N1, N5]),
        (Cat2, vec![N1, N6]),
        (Cat2, vec![N3, N6]),
        (Cat3, vec![N1, N6]),
        (Cat4, vec![]),
        (Cat4, vec![N1, N5]),
        (Cat4, vec![N1, N6]),
    ]
}

/// All 52 names: Gaussian then square, each base followed by its distorted twin.
pub fn all_names() -> Vec<DatasetName> {
    let mut out = Vec::with_capacity(52);
    for waveform in [PulseShape::Gaussian, PulseShape::Square] {
        for (category, profiles) in base_combinations() {
            for distorted in [false, true] {
                out.push(DatasetName::new(waveform, category, profiles.clone(), distorted));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let n = DatasetName::parse("G_2q_IX-XI-XX_IZ-ZI_N1-N6").unwrap();
        assert_eq!(n.waveform, PulseShape::Gaussian);
        assert_eq!(n.category, SystemCategory::Cat4);
        assert_eq!(n.profiles, [NoiseProfile::N1, NoiseProfile::N6]);
        assert!(!n.distorted);

        let n = DatasetName::parse("S_1q_XY_D").unwrap();
        assert_eq!(n.waveform, PulseShape::Square);
        assert_eq!(n.category, SystemCategory::Cat2);
        assert!(n.is_noiseless());
        assert!(n.distorted);

        let n = DatasetName::parse("G_1q_XY_XZ_N1N5_D").unwrap();
        assert_eq!(n.profiles, [NoiseProfile::N1, NoiseProfile::N5]);
        assert_eq!(n.noise_profiles_tag().unwrap(), "N1N5");
    }

    #[test]
    fn all_names_round_trip() {
        let names = all_names();
        assert_eq!(names.len(), 52);
        let mut strings: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        for (n, s) in names.iter().zip(&strings) {
            assert_eq!(&DatasetName::parse(s).unwrap(), n);
        }
        strings.sort();
        strings.dedup();
        assert_eq!(strings.len(), 52);
        assert!(strings.contains(&"G_1q_X".to_string()));
        assert!(strings.contains(&"S_1q_XY_D".to_string()));
    }

    #[test]
    fn malformed_names_point_at_the_bad_part() {
        let part = |s: &str| DatasetName::parse(s).unwrap_err().part;
        assert_eq!(part("Q_1q_X"), NamePart::Waveform);
        assert_eq!(part("G_3q_X"), NamePart::Qubits);
        assert_eq!(part("G_1q_Y"), NamePart::Control);
        assert_eq!(part("G_1q_X_X_N1"), NamePart::NoiseAxes);
        assert_eq!(part("G_1q_X_Z_N9"), NamePart::NoiseProfiles);
        assert_eq!(part("G_1q_X_Z_N1N2"), NamePart::NoiseProfiles);
        assert_eq!(part("G_1q_X_Z_N1_E"), NamePart::Distortion);
        assert_eq!(part("G_1q_X_N1"), NamePart::NoiseAxes);
        assert_eq!(part("G_1q_X_Q"), NamePart::Distortion);
        assert_eq!(part("G"), NamePart::Whole);
        assert_eq!(part("G_1q_X_Z_N1_D_D"), NamePart::Whole);
        assert_eq!(part("G_2q_IX-XI_IZ-ZI_N1N6"), NamePart::NoiseProfiles);
        assert_eq!(part("G_1q_X_Z_N0"), NamePart::NoiseProfiles);
        let e = DatasetName::parse("G_1q_W").unwrap_err();
        assert!(e.to_string().contains("control axes"));
    }

    #[test]
    fn serde_uses_the_canonical_string() {
        let n = DatasetName::parse("S_2q_IX-XI_IZ-ZI_N1-N6_D").unwrap();
        let json = serde_json::to_string(&n).unwrap();
        assert_eq!(json, "\"S_2q_IX-XI_IZ-ZI_N1-N6_D\"");
        assert_eq!(serde_json::from_str::<DatasetName>(&json).unwrap(), n);
        assert!(serde_json::from_str::<DatasetName>("\"G_9q\"").is_err());
    }
}
