//! Extension of a single-speed FJSP base into a multi-state instance: gear
//! durations, job setup times, per-machine powers and switch energies.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::base::BaseFjspInstance;
use crate::model::{
    JobSpec, MachineSpec, OperationSpec, PowerProfile, ProblemInstance, ProcessingOption, SwitchEnergyTable, Time,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub low: T,
    pub high: T,
}

impl<T: PartialOrd + Copy> Range<T> {
    pub const fn new(low: T, high: T) -> Self {
        Self { low, high }
    }

    pub fn contains(&self, v: T) -> bool {
        self.low <= v && v <= self.high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Duration multiplier of each gear, slowest first.
    pub speed_multipliers: Vec<Time>,
    pub setup_time: Range<Time>,
    pub setup_power: Range<f64>,
    pub standby_power: Range<f64>,
    /// Process power of gear `g` is `r * g` with `r` drawn from this range.
    pub process_base_power: Range<f64>,
    /// Idle power of gear `g` is `r * g` with `r` drawn from this range.
    pub idle_base_power: Range<f64>,
    pub turn_on_ratio: Range<f64>,
    pub switch_ratio: Range<f64>,
    /// Dormancy (gear <-> standby) energy as a fraction of turn-on energy.
    pub dormancy_factor: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            speed_multipliers: vec![3, 2, 1],
            setup_time: Range::new(1, 2),
            setup_power: Range::new(10.0, 30.0),
            standby_power: Range::new(3.0, 5.0),
            process_base_power: Range::new(30.0, 50.0),
            idle_base_power: Range::new(5.0, 10.0),
            turn_on_ratio: Range::new(6.0, 8.0),
            switch_ratio: Range::new(0.2, 0.3),
            dormancy_factor: 0.2,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("range `{0}` is empty, negative or not finite")]
    BadRange(&'static str),
    #[error("speed multipliers must be non-empty and positive")]
    BadMultipliers,
    #[error("dormancy factor must be finite and non-negative")]
    BadDormancy,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.speed_multipliers.is_empty() || self.speed_multipliers.contains(&0) {
            return Err(GeneratorError::BadMultipliers);
        }
        if self.setup_time.low > self.setup_time.high {
            return Err(GeneratorError::BadRange("setup_time"));
        }
        let reals = [
            ("setup_power", self.setup_power),
            ("standby_power", self.standby_power),
            ("process_base_power", self.process_base_power),
            ("idle_base_power", self.idle_base_power),
            ("turn_on_ratio", self.turn_on_ratio),
            ("switch_ratio", self.switch_ratio),
        ];
        for (name, r) in reals {
            if !(r.low.is_finite() && r.high.is_finite() && 0.0 <= r.low && r.low <= r.high) {
                return Err(GeneratorError::BadRange(name));
            }
        }
        if !(self.dormancy_factor.is_finite() && self.dormancy_factor >= 0.0) {
            return Err(GeneratorError::BadDormancy);
        }
        Ok(())
    }
}

fn draw<R: Rng>(rng: &mut R, r: Range<f64>) -> f64 {
    if r.low == r.high {
        r.low
    } else {
        rng.gen_range(r.low..=r.high)
    }
}

/// Deterministic in `(base, params, seed)`.
pub fn extend_instance(
    base: &BaseFjspInstance,
    params: &GeneratorParams,
    seed: u64,
) -> Result<ProblemInstance, GeneratorError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = params.speed_multipliers.len();
    let jobs = base
        .jobs
        .iter()
        .map(|ops| JobSpec {
            setup_time: rng.gen_range(params.setup_time.low..=params.setup_time.high),
            operations: ops
                .iter()
                .map(|alts| OperationSpec {
                    options: alts
                        .iter()
                        .flat_map(|a| {
                            params.speed_multipliers.iter().enumerate().map(move |(g, &k)| ProcessingOption {
                                machine: a.machine,
                                gear: g + 1,
                                duration: a.duration * k,
                            })
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let machines = (0..base.machine_count)
        .map(|_| {
            let setup_power = draw(&mut rng, params.setup_power);
            let standby_power = draw(&mut rng, params.standby_power);
            let rp = draw(&mut rng, params.process_base_power);
            let ri = draw(&mut rng, params.idle_base_power);
            let rt = draw(&mut rng, params.turn_on_ratio);
            let rs = draw(&mut rng, params.switch_ratio);
            let process_power: Vec<f64> = (1..=s).map(|g| rp * g as f64).collect();
            let idle_power: Vec<f64> = (1..=s).map(|g| ri * g as f64).collect();
            let turn_on: Vec<f64> = process_power.iter().map(|p| (p - standby_power) * rt).collect();
            let mut matrix = vec![vec![0.0; s + 1]; s + 1];
            for g in 1..=s {
                matrix[0][g] = params.dormancy_factor * turn_on[g - 1];
                matrix[g][0] = matrix[0][g];
                for h in 1..=s {
                    if g != h {
                        matrix[g][h] = (process_power[g - 1] + process_power[h - 1]) / 2.0 * rs;
                    }
                }
            }
            MachineSpec {
                power: PowerProfile { setup_power, process_power, idle_power, standby_power },
                switch: SwitchEnergyTable::new(matrix),
                turn_on: Some(turn_on),
            }
        })
        .collect();
    Ok(ProblemInstance { speed_count: s, jobs, machines })
}
