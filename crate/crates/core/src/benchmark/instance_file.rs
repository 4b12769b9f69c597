//! JSON instance files. Identifiers are 1-based on disk; every real is written
//! with 17 significant digits so that reading a written file is lossless.

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::model::{
    JobSpec, MachineSpec, OperationSpec, PowerProfile, ProblemInstance, ProcessingOption, SwitchEnergyTable, Time,
};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// A real that serializes in exponent form with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite real {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Real)
    }
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

fn floats(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionRecord {
    machine: usize,
    gear: usize,
    duration: Time,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperationRecord {
    options: Vec<OptionRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRecord {
    setup_time: Time,
    operations: Vec<OperationRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineRecord {
    setup_power: Real,
    process_power: Vec<Real>,
    idle_power: Vec<Real>,
    standby_power: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    turn_on: Option<Vec<Real>>,
    switch: Vec<Vec<Real>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    schema_version: u32,
    speed_count: usize,
    jobs: Vec<JobRecord>,
    machines: Vec<MachineRecord>,
}

#[derive(Debug, Error)]
pub enum InstanceFileError {
    #[error("malformed instance document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("schema violation: {0}")]
    Schema(String),
}

impl InstanceDocument {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self {
            schema_version: INSTANCE_SCHEMA_VERSION,
            speed_count: inst.speed_count,
            jobs: inst
                .jobs
                .iter()
                .map(|j| JobRecord {
                    setup_time: j.setup_time,
                    operations: j
                        .operations
                        .iter()
                        .map(|o| OperationRecord {
                            options: o
                                .options
                                .iter()
                                .map(|p| OptionRecord { machine: p.machine + 1, gear: p.gear, duration: p.duration })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
            machines: inst
                .machines
                .iter()
                .map(|m| MachineRecord {
                    setup_power: Real(m.power.setup_power),
                    process_power: reals(&m.power.process_power),
                    idle_power: reals(&m.power.idle_power),
                    standby_power: Real(m.power.standby_power),
                    turn_on: m.turn_on.as_deref().map(reals),
                    switch: m.switch.matrix.iter().map(|r| reals(r)).collect(),
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<ProblemInstance, InstanceFileError> {
        if self.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(InstanceFileError::Version { found: self.schema_version, expected: INSTANCE_SCHEMA_VERSION });
        }
        let s = self.speed_count;
        let mc = self.machines.len();
        let schema = |m: String| Err(InstanceFileError::Schema(m));
        if s == 0 {
            return schema("speed_count must be positive".into());
        }
        for (j, job) in self.jobs.iter().enumerate() {
            for (o, op) in job.operations.iter().enumerate() {
                for p in &op.options {
                    if p.machine == 0 || p.machine > mc {
                        return schema(format!("job {} operation {}: machine {} outside 1..={mc}", j + 1, o + 1, p.machine));
                    }
                    if p.gear == 0 || p.gear > s {
                        return schema(format!("job {} operation {}: gear {} outside 1..={s}", j + 1, o + 1, p.gear));
                    }
                }
            }
        }
        for (m, r) in self.machines.iter().enumerate() {
            let m = m + 1;
            if r.process_power.len() != s || r.idle_power.len() != s {
                return schema(format!("machine {m}: power vectors must have {s} entries"));
            }
            if r.turn_on.as_ref().is_some_and(|t| t.len() != s) {
                return schema(format!("machine {m}: turn_on must have {s} entries"));
            }
            if r.switch.len() != s + 1 || r.switch.iter().any(|row| row.len() != s + 1) {
                return schema(format!("machine {m}: switch table must be {0}x{0}", s + 1));
            }
        }
        Ok(ProblemInstance {
            speed_count: s,
            jobs: self
                .jobs
                .into_iter()
                .map(|j| JobSpec {
                    setup_time: j.setup_time,
                    operations: j
                        .operations
                        .into_iter()
                        .map(|o| OperationSpec {
                            options: o
                                .options
                                .into_iter()
                                .map(|p| ProcessingOption { machine: p.machine - 1, gear: p.gear, duration: p.duration })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
            machines: self
                .machines
                .into_iter()
                .map(|m| MachineSpec {
                    power: PowerProfile {
                        setup_power: m.setup_power.0,
                        process_power: floats(&m.process_power),
                        idle_power: floats(&m.idle_power),
                        standby_power: m.standby_power.0,
                    },
                    switch: SwitchEnergyTable::new(m.switch.iter().map(|r| floats(r)).collect()),
                    turn_on: m.turn_on.as_deref().map(floats),
                })
                .collect(),
        })
    }
}

pub fn write_instance(inst: &ProblemInstance) -> Result<String, InstanceFileError> {
    let mut text = serde_json::to_string_pretty(&InstanceDocument::from_instance(inst))?;
    text.push('\n');
    Ok(text)
}

pub fn read_instance(text: &str) -> Result<ProblemInstance, InstanceFileError> {
    serde_json::from_str::<InstanceDocument>(text)?.into_instance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::base::{random_base, BaseShape};
    use crate::benchmark::generator::{extend_instance, GeneratorParams};
    use crate::sample;

    #[test]
    fn sample_round_trip() {
        let inst = sample::instance();
        let text = write_instance(&inst).unwrap();
        assert_eq!(read_instance(&text).unwrap(), inst);
        assert!(!text.contains("turn_on"));
    }

    #[test]
    fn generated_round_trip_is_bit_exact() {
        let inst = extend_instance(&random_base(&BaseShape::mk_like(), 1), &GeneratorParams::default(), 1).unwrap();
        let text = write_instance(&inst).unwrap();
        let back = read_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(write_instance(&back).unwrap(), text);
    }

    #[test]
    fn reals_have_seventeen_digits() {
        let s = serde_json::to_string(&Real(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(serde_json::from_str::<Real>(&s).unwrap(), Real(0.1));
        assert!(serde_json::to_string(&Real(f64::NAN)).is_err());
    }

    #[test]
    fn gear_out_of_range_is_schema_error() {
        let text = write_instance(&sample::instance()).unwrap().replacen("\"gear\": 3", "\"gear\": 4", 1);
        let e = read_instance(&text).unwrap_err();
        assert!(matches!(e, InstanceFileError::Schema(ref m) if m.contains("gear 4")), "{e}");
    }

    #[test]
    fn version_mismatch() {
        let text = write_instance(&sample::instance()).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(read_instance(&text), Err(InstanceFileError::Version { found: 9, expected: 1 })));
    }

    #[test]
    fn machine_zero_rejected() {
        let text = write_instance(&sample::instance()).unwrap().replacen("\"machine\": 1", "\"machine\": 0", 1);
        assert!(matches!(read_instance(&text), Err(InstanceFileError::Schema(_))));
    }
}
