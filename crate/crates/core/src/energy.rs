//! Energy accounting of a feasible schedule: turn-on (IE1), continuous speed
//! switches (IE2), setup (SE1), processing (SE2) and idle/standby intervals
//! (ISE).

use thiserror::Error;

use crate::model::{idle_intervals, IdleIntervalRecord, ProblemInstance, ScheduleTable, ScheduledRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalMode {
    Idle,
    Standby,
}

impl IntervalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalMode::Idle => "idle",
            IntervalMode::Standby => "standby",
        }
    }
}

/// Which side of an idle interval pays the single speed switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchSide {
    /// Switch charged when entering the interval (previous gear above next).
    Entering,
    /// Switch charged when leaving the interval (previous gear at or below next).
    Leaving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDecision {
    pub interval: IdleIntervalRecord,
    pub mode: IntervalMode,
    /// Gear held while idling: the lower of the two neighbouring gears.
    pub idle_gear: usize,
    pub switch_side: SwitchSide,
    pub idle_energy: f64,
    pub standby_energy: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyBreakdown {
    pub ie1: f64,
    pub ie2: f64,
    pub se1: f64,
    pub se2: f64,
    pub ise: f64,
    pub tec: f64,
    pub interval_decisions: Vec<IntervalDecision>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnergyError {
    #[error("interval [{start}, {end}] on machine {machine} has no neighbouring operation on both sides")]
    BoundaryInterval { machine: usize, start: u64, end: u64 },
}

fn first_process_gear(rows: &[ScheduledRow]) -> Option<usize> {
    rows.iter().find(|r| !r.is_setup()).map(|r| r.gear)
}

pub fn turn_on_energy(inst: &ProblemInstance, sched: &ScheduleTable) -> f64 {
    (0..inst.machine_count())
        .filter_map(|m| first_process_gear(&sched.machine_rows(m)).map(|g| inst.turn_on_energy(m, g)))
        .sum()
}

/// Switch energy between back-to-back process rows on one machine. A setup row
/// sitting between them does not break continuity.
fn machine_transition_energy(inst: &ProblemInstance, machine: usize, rows: &[ScheduledRow]) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<&ScheduledRow> = None;
    for (i, row) in rows.iter().enumerate() {
        if row.is_setup() {
            continue;
        }
        let block_start = match i.checked_sub(1).map(|k| &rows[k]) {
            Some(s) if s.is_setup() && s.job == row.job && s.end == row.start => s.start,
            _ => row.start,
        };
        if let Some(p) = prev {
            if p.end == block_start && p.gear != row.gear {
                total += inst.switch_energy(machine, p.gear, row.gear);
            }
        }
        prev = Some(row);
    }
    total
}

pub fn transition_energy(inst: &ProblemInstance, sched: &ScheduleTable) -> f64 {
    (0..inst.machine_count())
        .map(|m| machine_transition_energy(inst, m, &sched.machine_rows(m)))
        .sum()
}

pub fn setup_energy(inst: &ProblemInstance, sched: &ScheduleTable) -> f64 {
    sched
        .setup_rows()
        .map(|r| inst.machines[r.machine].power.setup_power * r.len() as f64)
        .sum()
}

pub fn process_energy(inst: &ProblemInstance, sched: &ScheduleTable) -> f64 {
    sched
        .process_rows()
        .map(|r| inst.process_power(r.machine, r.gear) * r.len() as f64)
        .sum()
}

/// Cheaper of idling at the lower neighbouring gear (one switch) and dropping
/// to standby (two switches). Ties resolve to idle.
pub fn interval_energy(inst: &ProblemInstance, interval: &IdleIntervalRecord) -> Result<IntervalDecision, EnergyError> {
    let (prev, next) = match (interval.prev_speed, interval.next_speed) {
        (Some(p), Some(n)) => (p, n),
        _ => {
            return Err(EnergyError::BoundaryInterval {
                machine: interval.machine,
                start: interval.start,
                end: interval.end,
            })
        }
    };
    let m = interval.machine;
    let len = interval.len() as f64;
    let idle_gear = prev.min(next);
    let switch_side = if prev > next { SwitchSide::Entering } else { SwitchSide::Leaving };
    let switch = match switch_side {
        SwitchSide::Entering => inst.switch_energy(m, prev, idle_gear),
        SwitchSide::Leaving => inst.switch_energy(m, idle_gear, next),
    };
    let idle_energy = inst.idle_power(m, idle_gear) * len + switch;
    let standby_energy = inst.machines[m].power.standby_power * len
        + inst.switch_energy(m, prev, 0)
        + inst.switch_energy(m, 0, next);
    let (mode, energy) = if standby_energy < idle_energy {
        (IntervalMode::Standby, standby_energy)
    } else {
        (IntervalMode::Idle, idle_energy)
    };
    Ok(IntervalDecision { interval: *interval, mode, idle_gear, switch_side, idle_energy, standby_energy, energy })
}

pub fn total_energy(inst: &ProblemInstance, sched: &ScheduleTable) -> EnergyBreakdown {
    let mut b = EnergyBreakdown::default();
    for m in 0..inst.machine_count() {
        let rows = sched.machine_rows(m);
        if let Some(g) = first_process_gear(&rows) {
            b.ie1 += inst.turn_on_energy(m, g);
        }
        b.ie2 += machine_transition_energy(inst, m, &rows);
        for interval in idle_intervals_of(&rows, m) {
            // idle_intervals only yields interior gaps, which always carry both gears
            if let Ok(d) = interval_energy(inst, &interval) {
                b.ise += d.energy;
                b.interval_decisions.push(d);
            }
        }
    }
    b.se1 = setup_energy(inst, sched);
    b.se2 = process_energy(inst, sched);
    b.tec = b.ie1 + b.ie2 + b.se1 + b.se2 + b.ise;
    b
}

fn idle_intervals_of(rows: &[ScheduledRow], machine: usize) -> Vec<IdleIntervalRecord> {
    idle_intervals(&ScheduleTable::new(rows.to_vec()), machine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScheduledRow;
    use crate::sample;

    fn interval(machine: usize, start: u64, end: u64, prev: usize, next: usize) -> IdleIntervalRecord {
        IdleIntervalRecord { machine, start, end, prev_speed: Some(prev), next_speed: Some(next) }
    }

    #[test]
    fn first_sample_interval_goes_standby() {
        let d = interval_energy(&sample::instance(), &interval(0, 7, 13, 3, 2)).unwrap();
        assert_eq!(d.idle_energy, 41.0);
        assert_eq!(d.standby_energy, 30.0);
        assert_eq!(d.mode, IntervalMode::Standby);
        assert_eq!(d.energy, 30.0);
        assert_eq!(d.switch_side, SwitchSide::Entering);
        assert_eq!(d.idle_gear, 2);
    }

    #[test]
    fn second_sample_interval_stays_idle() {
        let d = interval_energy(&sample::instance(), &interval(1, 15, 18, 2, 3)).unwrap();
        assert_eq!(d.idle_energy, 23.0);
        assert_eq!(d.standby_energy, 24.0);
        assert_eq!(d.mode, IntervalMode::Idle);
        assert_eq!(d.energy, 23.0);
        assert_eq!(d.switch_side, SwitchSide::Leaving);
    }

    #[test]
    fn same_gear_interval_pays_no_switch() {
        let d = interval_energy(&sample::instance(), &interval(0, 0, 2, 2, 2)).unwrap();
        assert_eq!(d.idle_energy, 6.0 * 2.0);
    }

    #[test]
    fn boundary_interval_is_rejected() {
        let mut i = interval(0, 0, 2, 2, 2);
        i.prev_speed = None;
        assert!(interval_energy(&sample::instance(), &i).is_err());
    }

    #[test]
    fn tie_resolves_to_idle() {
        let mut inst = sample::instance();
        // idle at v1 for 1 unit with a 5-unit switch: 3 + 5 = 8; standby 2 + 5 + 1 = 8
        inst.machines[0].switch.matrix[2][0] = 5.0;
        inst.machines[0].switch.matrix[0][1] = 1.0;
        let d = interval_energy(&inst, &interval(0, 0, 1, 2, 1)).unwrap();
        assert_eq!(d.idle_energy, d.standby_energy);
        assert_eq!(d.mode, IntervalMode::Idle);
    }

    #[test]
    fn paper_gantt_components() {
        let inst = sample::instance();
        let sched = sample::paper_gantt_schedule();
        assert_eq!(turn_on_energy(&inst, &sched), 20.0);
        // M2: O21 (v3) -> O22 (v2) contiguous = 5; M1: O23 (v2) -> setup -> O12 (v3) = 5
        assert_eq!(transition_energy(&inst, &sched), 10.0);
        assert_eq!(setup_energy(&inst, &sched), 10.0 * (1.0 + 2.0 + 2.0 + 1.0));
        let b = total_energy(&inst, &sched);
        assert_eq!(b.ise, 53.0);
        assert_eq!(b.interval_decisions.len(), 2);
        assert_eq!(b.tec, b.ie1 + b.ie2 + b.se1 + b.se2 + b.ise);
    }

    #[test]
    fn process_energy_cases() {
        let mut inst = sample::instance();
        inst.machines[0].power.process_power[2] = 103.7386;
        let row = ScheduledRow { job: 0, op: Some(0), machine: 0, gear: 3, start: 0, end: 6 };
        let one = process_energy(&inst, &ScheduleTable::new(vec![row]));
        assert!((one - 622.4316).abs() < 1e-9);
        let two = process_energy(&inst, &ScheduleTable::new(vec![row, row]));
        assert_eq!(two, 2.0 * one);
        let zero = ScheduledRow { end: 0, ..row };
        assert_eq!(process_energy(&inst, &ScheduleTable::new(vec![zero])), 0.0);
    }

    #[test]
    fn setup_energy_with_power_ten() {
        let inst = sample::instance();
        let sched = ScheduleTable::new(vec![
            ScheduledRow { job: 0, op: None, machine: 0, gear: 0, start: 0, end: 1 },
            ScheduledRow { job: 1, op: None, machine: 1, gear: 0, start: 0, end: 2 },
        ]);
        assert_eq!(setup_energy(&inst, &sched), 30.0);
    }

    #[test]
    fn empty_schedule_is_all_zero() {
        let b = total_energy(&sample::instance(), &ScheduleTable::default());
        assert_eq!(b, EnergyBreakdown::default());
    }

    #[test]
    fn contiguous_same_gear_and_gapped_rows_pay_no_transition() {
        let inst = sample::instance();
        let same = ScheduleTable::new(vec![
            ScheduledRow { job: 1, op: Some(0), machine: 1, gear: 2, start: 0, end: 18 },
            ScheduledRow { job: 1, op: Some(1), machine: 1, gear: 2, start: 18, end: 22 },
        ]);
        assert_eq!(transition_energy(&inst, &same), 0.0);
        let gapped = ScheduleTable::new(vec![
            ScheduledRow { job: 1, op: Some(0), machine: 1, gear: 3, start: 0, end: 9 },
            ScheduledRow { job: 1, op: Some(1), machine: 1, gear: 2, start: 10, end: 14 },
        ]);
        assert_eq!(transition_energy(&inst, &gapped), 0.0);
        assert_eq!(total_energy(&inst, &gapped).interval_decisions.len(), 1);
    }

    #[test]
    fn unused_machines_cost_nothing_to_turn_on() {
        let inst = sample::instance();
        let sched = ScheduleTable::new(vec![ScheduledRow { job: 0, op: Some(0), machine: 0, gear: 1, start: 0, end: 18 }]);
        assert_eq!(turn_on_energy(&inst, &sched), inst.switch_energy(0, 0, 1));
        assert_eq!(turn_on_energy(&inst, &ScheduleTable::default()), 0.0);
    }
}
