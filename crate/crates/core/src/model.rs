//! Problem data for the energy-aware flexible job shop with machine multi-states,
//! together with the instance and schedule validators.
//!
//! Identifiers are 0-based everywhere inside the library (jobs, operations,
//! machines, message-matrix columns). Gears are 1-based: gear 0 is the standby
//! speed and never appears on a processing option.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Integral time unit.
pub type Time = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcessingOption {
    pub machine: usize,
    /// Speed gear in `1..=speed_count`.
    pub gear: usize,
    pub duration: Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationSpec {
    pub options: Vec<ProcessingOption>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub setup_time: Time,
    pub operations: Vec<OperationSpec>,
}

/// State powers of one machine. Per-gear vectors are indexed by `gear - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    pub setup_power: f64,
    pub process_power: Vec<f64>,
    pub idle_power: Vec<f64>,
    pub standby_power: f64,
}

/// Speed-switch instruction energies, `(s + 1) x (s + 1)`, entry `[a][b]` is the
/// energy of switching from gear `a` to gear `b` (gear 0 = standby).
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchEnergyTable {
    pub matrix: Vec<Vec<f64>>,
}

impl SwitchEnergyTable {
    pub fn new(matrix: Vec<Vec<f64>>) -> Self {
        Self { matrix }
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.matrix[from][to]
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    pub power: PowerProfile,
    pub switch: SwitchEnergyTable,
    /// Optional per-gear turn-on energies. When absent, turn-on uses the
    /// switch table row of gear 0.
    pub turn_on: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub speed_count: usize,
    pub jobs: Vec<JobSpec>,
    pub machines: Vec<MachineSpec>,
}

impl ProblemInstance {
    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    /// Total number of operations `D`.
    pub fn operation_count(&self) -> usize {
        self.jobs.iter().map(|j| j.operations.len()).sum()
    }

    /// Canonical position of the first operation of every job (jobs ascending,
    /// then operations ascending). The trailing entry equals `D`.
    pub fn op_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.jobs.len() + 1);
        let mut acc = 0;
        for job in &self.jobs {
            offsets.push(acc);
            acc += job.operations.len();
        }
        offsets.push(acc);
        offsets
    }

    /// `(job, op)` pairs in canonical order.
    pub fn operations(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.jobs
            .iter()
            .enumerate()
            .flat_map(|(j, job)| (0..job.operations.len()).map(move |o| (j, o)))
    }

    pub fn operation(&self, job: usize, op: usize) -> &OperationSpec {
        &self.jobs[job].operations[op]
    }

    #[inline]
    pub fn process_power(&self, machine: usize, gear: usize) -> f64 {
        self.machines[machine].power.process_power[gear - 1]
    }

    #[inline]
    pub fn idle_power(&self, machine: usize, gear: usize) -> f64 {
        self.machines[machine].power.idle_power[gear - 1]
    }

    #[inline]
    pub fn switch_energy(&self, machine: usize, from: usize, to: usize) -> f64 {
        self.machines[machine].switch.get(from, to)
    }

    /// Energy to power a machine on straight into `gear`.
    pub fn turn_on_energy(&self, machine: usize, gear: usize) -> f64 {
        let m = &self.machines[machine];
        match &m.turn_on {
            Some(v) => v[gear - 1],
            None => m.switch.get(0, gear),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScheduledRow {
    pub job: usize,
    /// `None` marks a setup row.
    pub op: Option<usize>,
    pub machine: usize,
    /// Gear of a process row; 0 on setup rows.
    pub gear: usize,
    pub start: Time,
    pub end: Time,
}

impl ScheduledRow {
    pub fn is_setup(&self) -> bool {
        self.op.is_none()
    }

    pub fn len(&self) -> Time {
        self.end.saturating_sub(self.start)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleTable {
    pub rows: Vec<ScheduledRow>,
}

impl ScheduleTable {
    pub fn new(rows: Vec<ScheduledRow>) -> Self {
        Self { rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn process_rows(&self) -> impl Iterator<Item = &ScheduledRow> {
        self.rows.iter().filter(|r| !r.is_setup())
    }

    pub fn setup_rows(&self) -> impl Iterator<Item = &ScheduledRow> {
        self.rows.iter().filter(|r| r.is_setup())
    }

    /// All rows on `machine`, ordered by start time. A setup row sorts before a
    /// process row that starts at the instant the setup ends.
    pub fn machine_rows(&self, machine: usize) -> Vec<ScheduledRow> {
        let mut rows: Vec<_> = self.rows.iter().copied().filter(|r| r.machine == machine).collect();
        rows.sort_by_key(|r| (r.start, r.end, !r.is_setup()));
        rows
    }

    /// Row of operation `(job, op)`, if scheduled.
    pub fn find(&self, job: usize, op: usize) -> Option<&ScheduledRow> {
        self.rows.iter().find(|r| r.job == job && r.op == Some(op))
    }

    /// Setup row immediately preceding `row` on its machine, if any.
    pub fn setup_before(&self, row: &ScheduledRow) -> Option<&ScheduledRow> {
        self.rows
            .iter()
            .find(|r| r.is_setup() && r.machine == row.machine && r.job == row.job && r.end == row.start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleIntervalRecord {
    pub machine: usize,
    pub start: Time,
    pub end: Time,
    pub prev_speed: Option<usize>,
    pub next_speed: Option<usize>,
}

impl IdleIntervalRecord {
    pub fn len(&self) -> Time {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoOperations,
    NoSpeeds,
    EmptyJob { job: usize },
    OperationUnprocessable { job: usize, op: usize },
    UnknownMachine { job: usize, op: usize, machine: usize },
    GearOutOfRange { job: usize, op: usize, gear: usize },
    ZeroDuration { job: usize, op: usize },
    DuplicateOption { job: usize, op: usize, machine: usize, gear: usize },
    PowerVectorLength { machine: usize },
    NegativePower { machine: usize },
    NonFiniteValue { machine: usize },
    SwitchTableShape { machine: usize },
    NegativeSwitchEnergy { machine: usize, from: usize, to: usize },
    NonZeroSwitchDiagonal { machine: usize, gear: usize },
    TurnOnLength { machine: usize },

    MissingOperation { job: usize, op: usize },
    DuplicateOperation { job: usize, op: usize },
    IllegalOption { job: usize, op: usize, machine: usize, gear: usize },
    DurationMismatch { job: usize, op: usize, expected: Time, actual: Time },
    InvertedRow { job: usize, machine: usize, start: Time },
    Overlap { machine: usize, first_start: Time, second_start: Time },
    Precedence { job: usize, op: usize },
    MissingSetup { job: usize, op: usize, machine: usize },
    SetupLength { job: usize, machine: usize, start: Time },
    OrphanSetup { job: usize, machine: usize, start: Time },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoOperations => write!(f, "instance has no operations"),
            NoSpeeds => write!(f, "speed count must be at least 1"),
            EmptyJob { job } => write!(f, "job {} has no operations", job + 1),
            OperationUnprocessable { job, op } => {
                write!(f, "operation unprocessable: O{}{} has no options", job + 1, op + 1)
            }
            UnknownMachine { job, op, machine } => {
                write!(f, "O{}{} references unknown machine {}", job + 1, op + 1, machine + 1)
            }
            GearOutOfRange { job, op, gear } => {
                write!(f, "O{}{} uses gear {} outside 1..=s", job + 1, op + 1, gear)
            }
            ZeroDuration { job, op } => write!(f, "O{}{} has a zero-duration option", job + 1, op + 1),
            DuplicateOption { job, op, machine, gear } => write!(
                f,
                "O{}{} lists (M{}, v{}) more than once",
                job + 1,
                op + 1,
                machine + 1,
                gear
            ),
            PowerVectorLength { machine } => {
                write!(f, "machine {} power vectors do not have one entry per gear", machine + 1)
            }
            NegativePower { machine } => write!(f, "machine {} has a negative power", machine + 1),
            NonFiniteValue { machine } => write!(f, "machine {} has a non-finite value", machine + 1),
            SwitchTableShape { machine } => {
                write!(f, "machine {} switch table is not (s+1)x(s+1)", machine + 1)
            }
            NegativeSwitchEnergy { machine, from, to } => write!(
                f,
                "negative switch energy on machine {} for v{} -> v{}",
                machine + 1,
                from,
                to
            ),
            NonZeroSwitchDiagonal { machine, gear } => {
                write!(f, "machine {} switch table diagonal v{} is not zero", machine + 1, gear)
            }
            TurnOnLength { machine } => {
                write!(f, "machine {} turn-on vector does not have one entry per gear", machine + 1)
            }
            MissingOperation { job, op } => write!(f, "O{}{} is not scheduled", job + 1, op + 1),
            DuplicateOperation { job, op } => write!(f, "O{}{} is scheduled more than once", job + 1, op + 1),
            IllegalOption { job, op, machine, gear } => write!(
                f,
                "O{}{} on (M{}, v{}) is not an available option",
                job + 1,
                op + 1,
                machine + 1,
                gear
            ),
            DurationMismatch { job, op, expected, actual } => write!(
                f,
                "O{}{} lasts {} but its option requires {}",
                job + 1,
                op + 1,
                actual,
                expected
            ),
            InvertedRow { job, machine, start } => {
                write!(f, "row of job {} on machine {} at {} ends before it starts", job + 1, machine + 1, start)
            }
            Overlap { machine, first_start, second_start } => write!(
                f,
                "rows starting at {} and {} overlap on machine {}",
                first_start,
                second_start,
                machine + 1
            ),
            Precedence { job, op } => write!(
                f,
                "precedence violation: O{}{} starts before O{}{} completes",
                job + 1,
                op + 1,
                job + 1,
                op
            ),
            MissingSetup { job, op, machine } => write!(
                f,
                "setup violation: O{}{} on machine {} follows another job without a setup",
                job + 1,
                op + 1,
                machine + 1
            ),
            SetupLength { job, machine, start } => write!(
                f,
                "setup of job {} on machine {} at {} does not last the job's setup time",
                job + 1,
                machine + 1,
                start
            ),
            OrphanSetup { job, machine, start } => write!(
                f,
                "setup of job {} on machine {} at {} is not followed by an operation of that job",
                job + 1,
                machine + 1,
                start
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    StandbyAboveIdle { machine: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("schedule row references unknown job {0}")]
    UnknownJob(usize),
    #[error("schedule row references unknown operation {op} of job {job}")]
    UnknownOperation { job: usize, op: usize },
    #[error("schedule row references unknown machine {0}")]
    UnknownMachine(usize),
}

pub fn validate_instance(inst: &ProblemInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    let s = inst.speed_count;
    if s == 0 {
        v.push(Violation::NoSpeeds);
    }
    if inst.operation_count() == 0 {
        v.push(Violation::NoOperations);
    }
    for (j, job) in inst.jobs.iter().enumerate() {
        if job.operations.is_empty() {
            v.push(Violation::EmptyJob { job: j });
        }
        for (o, op) in job.operations.iter().enumerate() {
            if op.options.is_empty() {
                v.push(Violation::OperationUnprocessable { job: j, op: o });
            }
            let mut seen = HashSet::new();
            for opt in &op.options {
                if opt.machine >= inst.machine_count() {
                    v.push(Violation::UnknownMachine { job: j, op: o, machine: opt.machine });
                }
                if opt.gear == 0 || opt.gear > s {
                    v.push(Violation::GearOutOfRange { job: j, op: o, gear: opt.gear });
                }
                if opt.duration == 0 {
                    v.push(Violation::ZeroDuration { job: j, op: o });
                }
                if !seen.insert((opt.machine, opt.gear)) {
                    v.push(Violation::DuplicateOption { job: j, op: o, machine: opt.machine, gear: opt.gear });
                }
            }
        }
    }
    for (m, spec) in inst.machines.iter().enumerate() {
        let p = &spec.power;
        if p.process_power.len() != s || p.idle_power.len() != s {
            v.push(Violation::PowerVectorLength { machine: m });
        }
        let scalars = [p.setup_power, p.standby_power];
        let all = scalars.iter().chain(&p.process_power).chain(&p.idle_power);
        if all.clone().any(|x| !x.is_finite()) {
            v.push(Violation::NonFiniteValue { machine: m });
        } else if all.clone().any(|&x| x < 0.0) {
            v.push(Violation::NegativePower { machine: m });
        }
        let table = &spec.switch.matrix;
        if table.len() != s + 1 || table.iter().any(|row| row.len() != s + 1) {
            v.push(Violation::SwitchTableShape { machine: m });
        } else {
            for (a, row) in table.iter().enumerate() {
                for (b, &e) in row.iter().enumerate() {
                    if !e.is_finite() {
                        v.push(Violation::NonFiniteValue { machine: m });
                    } else if e < 0.0 {
                        v.push(Violation::NegativeSwitchEnergy { machine: m, from: a, to: b });
                    } else if a == b && e != 0.0 {
                        v.push(Violation::NonZeroSwitchDiagonal { machine: m, gear: a });
                    }
                }
            }
        }
        if let Some(t) = &spec.turn_on {
            if t.len() != s {
                v.push(Violation::TurnOnLength { machine: m });
            } else if t.iter().any(|x| !x.is_finite()) {
                v.push(Violation::NonFiniteValue { machine: m });
            } else if t.iter().any(|&x| x < 0.0) {
                v.push(Violation::NegativePower { machine: m });
            }
        }
        let min_idle = p.idle_power.iter().copied().fold(f64::INFINITY, f64::min);
        if p.standby_power > min_idle {
            report.warnings.push(Warning::StandbyAboveIdle { machine: m });
        }
    }
    report
}

/// Checks a schedule against the scheduling constraints: operation coverage,
/// option legality and durations, machine capacity, job precedence and setup
/// placement. Unknown identifiers are a structural error, not a violation.
pub fn validate_schedule(inst: &ProblemInstance, sched: &ScheduleTable) -> Result<ValidationReport, ModelError> {
    for r in &sched.rows {
        if r.job >= inst.job_count() {
            return Err(ModelError::UnknownJob(r.job));
        }
        if r.machine >= inst.machine_count() {
            return Err(ModelError::UnknownMachine(r.machine));
        }
        if let Some(op) = r.op {
            if op >= inst.jobs[r.job].operations.len() {
                return Err(ModelError::UnknownOperation { job: r.job, op });
            }
        }
    }

    let mut report = ValidationReport::default();
    let v = &mut report.violations;

    for r in &sched.rows {
        if r.end < r.start {
            v.push(Violation::InvertedRow { job: r.job, machine: r.machine, start: r.start });
        }
    }

    // (a) + (e): coverage, option legality, durations
    let offsets = inst.op_offsets();
    let mut placed: Vec<Option<ScheduledRow>> = vec![None; inst.operation_count()];
    for r in sched.process_rows() {
        let op = r.op.unwrap();
        let slot = &mut placed[offsets[r.job] + op];
        if slot.is_some() {
            v.push(Violation::DuplicateOperation { job: r.job, op });
            continue;
        }
        *slot = Some(*r);
        match inst.operation(r.job, op).options.iter().find(|o| o.machine == r.machine && o.gear == r.gear) {
            None => v.push(Violation::IllegalOption { job: r.job, op, machine: r.machine, gear: r.gear }),
            Some(opt) if opt.duration != r.len() => v.push(Violation::DurationMismatch {
                job: r.job,
                op,
                expected: opt.duration,
                actual: r.len(),
            }),
            Some(_) => {}
        }
    }
    for (job, op) in inst.operations() {
        if placed[offsets[job] + op].is_none() {
            v.push(Violation::MissingOperation { job, op });
        }
    }

    // (c) job precedence
    for (job, spec) in inst.jobs.iter().enumerate() {
        for op in 1..spec.operations.len() {
            if let (Some(prev), Some(cur)) = (placed[offsets[job] + op - 1], placed[offsets[job] + op]) {
                if prev.end > cur.start {
                    v.push(Violation::Precedence { job, op });
                }
            }
        }
    }

    // (b) + (d): machine capacity and setups
    for m in 0..inst.machine_count() {
        let rows = sched.machine_rows(m);
        for pair in rows.windows(2) {
            if pair[0].end > pair[1].start {
                v.push(Violation::Overlap { machine: m, first_start: pair[0].start, second_start: pair[1].start });
            }
        }
        let mut prev_job: Option<usize> = None;
        for (i, r) in rows.iter().enumerate() {
            if r.is_setup() {
                if r.len() != inst.jobs[r.job].setup_time {
                    v.push(Violation::SetupLength { job: r.job, machine: m, start: r.start });
                }
                let followed = rows[i + 1..]
                    .iter()
                    .find(|n| n.start >= r.end)
                    .is_some_and(|n| !n.is_setup() && n.job == r.job && n.start == r.end);
                if !followed {
                    v.push(Violation::OrphanSetup { job: r.job, machine: m, start: r.start });
                }
                continue;
            }
            let needs_setup = prev_job != Some(r.job) && inst.jobs[r.job].setup_time > 0;
            if needs_setup {
                let has = rows.iter().any(|s| s.is_setup() && s.job == r.job && s.end == r.start);
                if !has {
                    v.push(Violation::MissingSetup { job: r.job, op: r.op.unwrap(), machine: m });
                }
            }
            prev_job = Some(r.job);
        }
    }

    Ok(report)
}

/// Positive-length gaps between consecutive occupied segments on `machine`,
/// ascending by start. The leading gap before the first row and the open tail
/// are not intervals.
pub fn idle_intervals(sched: &ScheduleTable, machine: usize) -> Vec<IdleIntervalRecord> {
    let rows = sched.machine_rows(machine);
    let mut out = Vec::new();
    let mut busy_until: Option<Time> = None;
    let mut last_gear: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if let Some(until) = busy_until {
            if r.start > until {
                let next_speed = rows[i..].iter().find(|n| !n.is_setup()).map(|n| n.gear);
                out.push(IdleIntervalRecord { machine, start: until, end: r.start, prev_speed: last_gear, next_speed });
            }
        }
        busy_until = Some(busy_until.map_or(r.end, |u| u.max(r.end)));
        if !r.is_setup() {
            last_gear = Some(r.gear);
        }
    }
    out
}

/// Latest completion time over all process rows.
pub fn makespan(sched: &ScheduleTable) -> Result<Time, ModelError> {
    sched.process_rows().map(|r| r.end).max().ok_or(ModelError::EmptySchedule)
}
