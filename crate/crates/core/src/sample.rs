//! The two-job, two-machine worked example used throughout the tests and
//! shipped with the CLI (`efjsp sample`).
//!
//! Processing times, setup times, switch energies and idle/standby powers are
//! the published example data. Setup and process powers are not published for
//! this example; the values here (setup 10, process 6/12/24 per gear) are
//! fixed choices of this crate.

use crate::encoding::Chromosome;
use crate::model::{
    JobSpec, MachineSpec, OperationSpec, PowerProfile, ProblemInstance, ProcessingOption, ScheduleTable,
    ScheduledRow, SwitchEnergyTable,
};

pub const SETUP_POWER: f64 = 10.0;
pub const PROCESS_POWER: [f64; 3] = [6.0, 12.0, 24.0];

fn op(times: &[(usize, [u64; 3])]) -> OperationSpec {
    let mut options = Vec::new();
    for &(machine, durations) in times {
        for (g, &d) in durations.iter().enumerate() {
            options.push(ProcessingOption { machine, gear: g + 1, duration: d });
        }
    }
    OperationSpec { options }
}

pub fn switch_table() -> SwitchEnergyTable {
    SwitchEnergyTable::new(vec![
        vec![0.0, 5.0, 8.0, 10.0],
        vec![5.0, 0.0, 5.0, 8.0],
        vec![8.0, 5.0, 0.0, 5.0],
        vec![10.0, 8.0, 5.0, 0.0],
    ])
}

pub fn instance() -> ProblemInstance {
    let machine = MachineSpec {
        power: PowerProfile {
            setup_power: SETUP_POWER,
            process_power: PROCESS_POWER.to_vec(),
            idle_power: vec![3.0, 6.0, 9.0],
            standby_power: 2.0,
        },
        switch: switch_table(),
        turn_on: None,
    };
    ProblemInstance {
        speed_count: 3,
        jobs: vec![
            JobSpec { setup_time: 1, operations: vec![op(&[(0, [18, 12, 6])]), op(&[(0, [6, 4, 2])])] },
            JobSpec {
                setup_time: 2,
                operations: vec![
                    op(&[(0, [30, 20, 10]), (1, [27, 18, 9])]),
                    op(&[(0, [4, 2, 1]), (1, [6, 4, 2])]),
                    op(&[(0, [6, 3, 1])]),
                    op(&[(1, [9, 6, 3])]),
                ],
            },
        ],
        machines: vec![machine.clone(), machine],
    }
}

/// Sequence O11 -> O21 -> O22 -> O23 -> O24 -> O12 with the highlighted
/// machine/speed choices (columns are 0-based message-matrix indices).
pub fn paper_chromosome() -> Chromosome {
    Chromosome { os: vec![0, 1, 1, 1, 1, 0], mv: vec![0, 0, 0, 4, 1, 0] }
}

/// The published Gantt chart of the example: O12 runs last on M1 after its own
/// setup, leaving M1 idle over [7, 13] and M2 idle over [15, 18].
pub fn paper_gantt_schedule() -> ScheduleTable {
    let p = |job, op, machine, gear, start, end| ScheduledRow { job, op: Some(op), machine, gear, start, end };
    let s = |job, machine, start, end| ScheduledRow { job, op: None, machine, gear: 0, start, end };
    ScheduleTable::new(vec![
        s(0, 0, 0, 1),
        p(0, 0, 0, 3, 1, 7),
        s(1, 1, 0, 2),
        p(1, 0, 1, 3, 2, 11),
        p(1, 1, 1, 2, 11, 15),
        s(1, 0, 13, 15),
        p(1, 2, 0, 2, 15, 18),
        p(1, 3, 1, 3, 18, 21),
        s(0, 0, 18, 19),
        p(0, 1, 0, 3, 19, 21),
    ])
}
