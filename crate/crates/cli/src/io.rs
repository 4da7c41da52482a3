//! Instance and deployment files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uavdeploy::{radius_from_snr, Deployment, Instance, Metric, Placement, RadioLink, Target, Uav};

use crate::error::{from_instance_error, CliError};

/// On-disk instance. Either `r` is given per agent, or `radio` plus the
/// agent's `power` lets the radius be derived from the SNR threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub beta: f64,
    pub d: f64,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "is_strip")]
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioRecord>,
    pub uavs: Vec<UavRecord>,
}

fn is_strip(t: &Target) -> bool {
    *t == Target::Strip
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioRecord {
    pub xi: f64,
    pub sigma2: f64,
    /// SNR threshold in dB.
    pub gamma_th_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavRecord {
    pub id: usize,
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub h: f64,
    pub v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

impl From<RadioRecord> for RadioLink {
    fn from(r: RadioRecord) -> Self {
        RadioLink {
            xi: r.xi,
            sigma2: r.sigma2,
            gamma_th_db: r.gamma_th_db,
        }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, CliError> {
        let radio: Option<RadioLink> = self.radio.map(Into::into);
        let mut uavs = Vec::with_capacity(self.uavs.len());
        for (k, u) in self.uavs.iter().enumerate() {
            let r = match (u.r, u.power, radio) {
                (Some(r), _, _) => r,
                (None, Some(power), Some(radio)) => radius_from_snr(&radio.with_power(power), u.h)
                    .map_err(|e| CliError::input(format!("uavs[{k}].power"), e.to_string()))?,
                (None, None, Some(_)) => {
                    return Err(CliError::input(
                        format!("uavs[{k}].power"),
                        "needed to derive the radius when `r` is absent",
                    ))
                }
                (None, _, None) => {
                    return Err(CliError::input(
                        format!("uavs[{k}].r"),
                        "missing radius and no `radio` block to derive it",
                    ))
                }
            };
            uavs.push(Uav {
                id: u.id,
                x: u.x,
                z: u.z.unwrap_or(0.0),
                r,
                h: u.h,
                v: u.v,
                power: u.power,
            });
        }
        let inst = Instance::with_target(self.beta, self.d, uavs, self.metric, self.target)
            .map_err(from_instance_error)?;
        Ok(match radio {
            Some(radio) => inst.with_radio(radio),
            None => inst,
        })
    }

    /// Radii are always written out, so reading the file back never depends
    /// on re-deriving them.
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            beta: inst.beta(),
            d: inst.d(),
            metric: inst.metric(),
            target: inst.target(),
            radio: inst.radio().map(|r| RadioRecord {
                xi: r.xi,
                sigma2: r.sigma2,
                gamma_th_db: r.gamma_th_db,
            }),
            uavs: inst
                .uavs()
                .iter()
                .map(|u| UavRecord {
                    id: u.id,
                    x: u.x,
                    z: (u.z != 0.0).then_some(u.z),
                    r: Some(u.r),
                    h: u.h,
                    v: u.v,
                    power: u.power,
                })
                .collect(),
        }
    }
}

/// Deserializes JSON, reporting the path of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::input(path, e.into_inner().to_string())
    })
}

pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    parse_json::<InstanceFile>(text)?.into_instance()
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read_text(path)?)
}

pub fn instance_to_json(inst: &Instance) -> String {
    to_json(&InstanceFile::from_instance(inst))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The parts of a solver report that `verify` needs; other fields are ignored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DeploymentRecord {
    pub placements: Vec<Placement>,
    pub per_delay: BTreeMap<usize, f64>,
}

impl DeploymentRecord {
    pub fn into_deployment(self) -> Deployment {
        let max_delay = self.per_delay.values().copied().fold(0.0, f64::max);
        let total_delay = self.per_delay.values().sum();
        Deployment {
            placements: self.placements,
            per_delay: self.per_delay,
            max_delay,
            total_delay,
        }
    }
}

pub fn read_deployment(path: &Path) -> Result<Deployment, CliError> {
    Ok(parse_json::<DeploymentRecord>(&read_text(path)?)?.into_deployment())
}
