//! Two-layer chromosome (operation sequence + machine/speed selection), message
//! matrices and the active decoder with setup handling.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::model::{ProblemInstance, ProcessingOption, ScheduleTable, ScheduledRow, Time};

/// Options of one operation sorted by duration, then machine, then gear.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageMatrix {
    pub columns: Vec<ProcessingOption>,
}

impl MessageMatrix {
    pub fn new(options: &[ProcessingOption]) -> Self {
        let mut columns = options.to_vec();
        columns.sort_by_key(|o| (o.duration, o.machine, o.gear));
        Self { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn machines(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c.machine).collect()
    }

    pub fn gears(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c.gear).collect()
    }

    pub fn durations(&self) -> Vec<Time> {
        self.columns.iter().map(|c| c.duration).collect()
    }
}

/// Message matrices of every operation in canonical `(job, op)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageMatrices {
    matrices: Vec<MessageMatrix>,
    offsets: Vec<usize>,
}

impl MessageMatrices {
    pub fn build(inst: &ProblemInstance) -> Self {
        let matrices = inst
            .operations()
            .map(|(j, o)| MessageMatrix::new(&inst.operation(j, o).options))
            .collect();
        Self { matrices, offsets: inst.op_offsets() }
    }

    pub fn position(&self, job: usize, op: usize) -> usize {
        self.offsets[job] + op
    }

    pub fn get(&self, job: usize, op: usize) -> &MessageMatrix {
        &self.matrices[self.position(job, op)]
    }

    pub fn at(&self, position: usize) -> &MessageMatrix {
        &self.matrices[position]
    }

    /// `(job, op)` of a canonical position.
    pub fn operation_at(&self, position: usize) -> (usize, usize) {
        let job = self.offsets.partition_point(|&o| o <= position) - 1;
        (job, position - self.offsets[job])
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn job_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn ops_of(&self, job: usize) -> usize {
        self.offsets[job + 1] - self.offsets[job]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MessageMatrix> {
        self.matrices.iter()
    }
}

pub fn build_message_matrix(inst: &ProblemInstance) -> MessageMatrices {
    MessageMatrices::build(inst)
}

/// `os` lists job ids (each job `i` exactly `n_i` times); the k-th occurrence
/// of a job is its k-th operation. `mv[p]` is a 0-based column into the
/// message matrix of canonical position `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub os: Vec<usize>,
    pub mv: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("OS has length {actual}, expected {expected}")]
    OsLength { expected: usize, actual: usize },
    #[error("MV has length {actual}, expected {expected}")]
    MvLength { expected: usize, actual: usize },
    #[error("OS position {position} holds unknown job {job}")]
    UnknownJob { position: usize, job: usize },
    #[error("OS position {position}: job {job} appears more often than it has operations")]
    Multiset { position: usize, job: usize },
    #[error("MV position {position} holds column {column} but the operation has {options} options")]
    MvOutOfRange { position: usize, column: usize, options: usize },
}

impl Chromosome {
    pub fn validate(&self, mm: &MessageMatrices) -> Result<(), EncodingError> {
        let d = mm.len();
        if self.os.len() != d {
            return Err(EncodingError::OsLength { expected: d, actual: self.os.len() });
        }
        if self.mv.len() != d {
            return Err(EncodingError::MvLength { expected: d, actual: self.mv.len() });
        }
        let mut counts = vec![0usize; mm.job_count()];
        for (position, &job) in self.os.iter().enumerate() {
            if job >= counts.len() {
                return Err(EncodingError::UnknownJob { position, job });
            }
            counts[job] += 1;
            if counts[job] > mm.ops_of(job) {
                return Err(EncodingError::Multiset { position, job });
            }
        }
        for (position, &column) in self.mv.iter().enumerate() {
            let options = mm.at(position).len();
            if column >= options {
                return Err(EncodingError::MvOutOfRange { position, column, options });
            }
        }
        Ok(())
    }

    /// OS index holding each `(job, op)`, in canonical order.
    pub fn os_positions(&self, mm: &MessageMatrices) -> Vec<usize> {
        let mut seen = vec![0usize; mm.job_count()];
        let mut out = vec![0usize; self.os.len()];
        for (i, &job) in self.os.iter().enumerate() {
            out[mm.position(job, seen[job])] = i;
            seen[job] += 1;
        }
        out
    }
}

fn base_os(mm: &MessageMatrices) -> Vec<usize> {
    (0..mm.job_count()).flat_map(|j| std::iter::repeat(j).take(mm.ops_of(j))).collect()
}

pub fn random_chromosome<R: Rng + ?Sized>(mm: &MessageMatrices, rng: &mut R) -> Chromosome {
    let mut os = base_os(mm);
    os.shuffle(rng);
    let mv = mm.iter().map(|m| rng.gen_range(0..m.len())).collect();
    Chromosome { os, mv }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreedyRule {
    /// Shortest processing time.
    MinTime,
    /// Smallest process power x duration.
    MinEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreedMode {
    /// Best column for every operation.
    Total,
    /// Uniform choice between best and second-best column.
    Partial,
}

/// Columns of `m` ranked best-first under `rule`; ties keep message-matrix order.
pub fn ranked_columns(inst: &ProblemInstance, m: &MessageMatrix, rule: GreedyRule) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m.len()).collect();
    if rule == GreedyRule::MinEnergy {
        let energy = |c: &ProcessingOption| inst.process_power(c.machine, c.gear) * c.duration as f64;
        idx.sort_by(|&a, &b| energy(&m.columns[a]).total_cmp(&energy(&m.columns[b])).then(a.cmp(&b)));
    }
    idx
}

pub fn heuristic_chromosome<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    mm: &MessageMatrices,
    rule: GreedyRule,
    mode: GreedMode,
    rng: &mut R,
) -> Chromosome {
    let mut os = base_os(mm);
    os.shuffle(rng);
    let mv = mm
        .iter()
        .map(|m| {
            let ranked = ranked_columns(inst, m, rule);
            match mode {
                GreedMode::Total => ranked[0],
                GreedMode::Partial if ranked.len() > 1 => ranked[rng.gen_range(0..2)],
                GreedMode::Partial => ranked[0],
            }
        })
        .collect();
    Chromosome { os, mv }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: Time,
    end: Time,
    job: usize,
    op: Option<usize>,
    gear: usize,
}

/// Active decoding with setup: every operation goes into the earliest idle
/// interval of its machine that can hold it, with a setup row right-justified
/// against its start whenever the machine predecessor is absent or belongs to
/// another job.
pub fn decode(inst: &ProblemInstance, chrom: &Chromosome) -> Result<ScheduleTable, EncodingError> {
    decode_with(inst, &MessageMatrices::build(inst), chrom)
}

pub fn decode_with(inst: &ProblemInstance, mm: &MessageMatrices, chrom: &Chromosome) -> Result<ScheduleTable, EncodingError> {
    chrom.validate(mm)?;
    let setup = |job: usize| inst.jobs[job].setup_time;
    let mut machines: Vec<Vec<Segment>> = vec![Vec::new(); inst.machine_count()];
    let mut next_op = vec![0usize; inst.job_count()];
    let mut job_ready = vec![0 as Time; inst.job_count()];

    for &job in &chrom.os {
        let op = next_op[job];
        next_op[job] += 1;
        let opt = mm.get(job, op).columns[chrom.mv[mm.position(job, op)]];
        let segs = &mut machines[opt.machine];
        let ready = job_ready[job];

        let mut placed = false;
        for k in 0..=segs.len() {
            let (gap_start, prev_job) = match k.checked_sub(1) {
                Some(p) => (segs[p].end, Some(segs[p].job)),
                None => (0, None),
            };
            let gap_end = segs.get(k).map_or(Time::MAX, |s| s.start);
            let su = if prev_job == Some(job) { 0 } else { setup(job) };
            let start = (gap_start + su).max(ready);
            let end = start + opt.duration;
            if end > gap_end {
                continue;
            }
            // The row after the gap may now follow a different job and need
            // its own setup, or may carry a setup that became redundant.
            let mut successor_setup = None;
            let mut drop_successor_setup = false;
            if let Some(next) = segs.get(k) {
                if next.op.is_some() && next.job != job && setup(next.job) > 0 {
                    let su_next = setup(next.job);
                    if end + su_next > next.start {
                        continue;
                    }
                    successor_setup =
                        Some(Segment { start: next.start - su_next, end: next.start, job: next.job, op: None, gear: 0 });
                } else if next.op.is_none() && next.job == job {
                    drop_successor_setup = true;
                }
            }

            let mut insert = Vec::with_capacity(3);
            if su > 0 {
                insert.push(Segment { start: start - su, end: start, job, op: None, gear: 0 });
            }
            insert.push(Segment { start, end, job, op: Some(op), gear: opt.gear });
            insert.extend(successor_setup);
            let tail = if drop_successor_setup { k + 1 } else { k };
            segs.splice(k..tail, insert);
            job_ready[job] = end;
            placed = true;
            break;
        }
        debug_assert!(placed, "the open tail interval always admits an operation");
    }

    let rows = machines
        .iter()
        .enumerate()
        .flat_map(|(m, segs)| {
            segs.iter().map(move |s| ScheduledRow {
                job: s.job,
                op: s.op,
                machine: m,
                gear: s.gear,
                start: s.start,
                end: s.end,
            })
        })
        .collect();
    Ok(ScheduleTable::new(rows))
}
