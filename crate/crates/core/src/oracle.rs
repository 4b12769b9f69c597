//! Exhaustive Pareto front over the decode-reachable space of tiny instances.
//!
//! The oracle enumerates chromosomes (every OS multiset permutation times every
//! MV combination), not raw schedules: the solver can only reach schedules the
//! decoder produces, so this set is the right optimality reference for it.
//! Energy is re-derived here by a plain per-machine walk that shares no code
//! with the `energy` module.

use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::{decode_with, Chromosome, MessageMatrices};
use crate::model::{ProblemInstance, ScheduleTable, ScheduledRow, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_points: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_points: 10_000_000 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    /// `size` is `None` when the count overflows 128 bits.
    #[error("search space of {} chromosomes exceeds the limit of {limit}", size.map_or("more than 2^128".to_string(), |s| s.to_string()))]
    TooLarge { size: Option<u128>, limit: u128 },
    #[error("instance has no operations")]
    Empty,
}

/// Number of chromosomes: multinomial OS count times the product of option counts.
pub fn search_space_size(mm: &MessageMatrices) -> Option<u128> {
    let mut os: u128 = 1;
    let mut placed: u128 = 0;
    for j in 0..mm.job_count() {
        for k in 1..=mm.ops_of(j) as u128 {
            placed += 1;
            // running product stays an integer: C(placed, k) built incrementally
            os = os.checked_mul(placed)? / k;
        }
    }
    let mv = mm.iter().try_fold(1u128, |acc, m| acc.checked_mul(m.len() as u128))?;
    os.checked_mul(mv)
}

/// Objective values recomputed without the `energy` module.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndependentEnergy {
    pub turn_on: f64,
    pub switching: f64,
    pub setup: f64,
    pub process: f64,
    pub intervals: f64,
    pub total: f64,
}

pub fn independent_energy(inst: &ProblemInstance, sched: &ScheduleTable) -> IndependentEnergy {
    let mut e = IndependentEnergy::default();
    for (m, spec) in inst.machines.iter().enumerate() {
        let mut rows: Vec<&ScheduledRow> = sched.rows.iter().filter(|r| r.machine == m).collect();
        rows.sort_by_key(|r| (r.start, r.op.is_some()));
        let e_sw = |a: usize, b: usize| spec.switch.matrix[a][b];
        let mut last: Option<&ScheduledRow> = None;
        for (i, r) in rows.iter().enumerate() {
            if r.op.is_none() {
                e.setup += spec.power.setup_power * (r.end - r.start) as f64;
                continue;
            }
            e.process += spec.power.process_power[r.gear - 1] * (r.end - r.start) as f64;
            let occupied_from = if i > 0 && rows[i - 1].op.is_none() && rows[i - 1].end == r.start {
                rows[i - 1].start
            } else {
                r.start
            };
            match last {
                None => {
                    e.turn_on += match &spec.turn_on {
                        Some(t) => t[r.gear - 1],
                        None => e_sw(0, r.gear),
                    }
                }
                Some(p) if p.end == occupied_from => e.switching += e_sw(p.gear, r.gear),
                Some(p) => {
                    let len = (occupied_from - p.end) as f64;
                    let low = p.gear.min(r.gear);
                    let idle = spec.power.idle_power[low - 1] * len + e_sw(p.gear, r.gear);
                    let standby = spec.power.standby_power * len + e_sw(p.gear, 0) + e_sw(0, r.gear);
                    e.intervals += if standby < idle { standby } else { idle };
                }
            }
            last = Some(r);
        }
    }
    e.total = e.turn_on + e.switching + e.setup + e.process + e.intervals;
    e
}

fn latest_completion(sched: &ScheduleTable) -> Time {
    sched.rows.iter().filter(|r| r.op.is_some()).map(|r| r.end).max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub makespan: Time,
    pub tec: f64,
    pub witness: Chromosome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactFront {
    /// Sorted by makespan ascending.
    pub points: Vec<FrontPoint>,
    pub space: u128,
}

impl ExactFront {
    pub fn objective_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.makespan as f64, p.tec)).collect()
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn better(a: (Time, f64), b: (Time, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Adds a point keeping the first witness among equal objective pairs.
fn offer(front: &mut Vec<FrontPoint>, p: FrontPoint) {
    let key = (p.makespan, p.tec);
    if front.iter().any(|q| (q.makespan, q.tec) == key || better((q.makespan, q.tec), key)) {
        return;
    }
    front.retain(|q| !better(key, (q.makespan, q.tec)));
    front.push(p);
}

pub fn enumerate_front(inst: &ProblemInstance, limits: OracleLimits) -> Result<ExactFront, OracleError> {
    let mm = MessageMatrices::build(inst);
    if mm.is_empty() {
        return Err(OracleError::Empty);
    }
    let space = search_space_size(&mm);
    match space {
        Some(s) if s <= limits.max_points => {}
        _ => return Err(OracleError::TooLarge { size: space, limit: limits.max_points }),
    }
    let mut os: Vec<usize> = (0..mm.job_count()).flat_map(|j| std::iter::repeat(j).take(mm.ops_of(j))).collect();
    let mut perms = vec![os.clone()];
    while next_permutation(&mut os) {
        perms.push(os.clone());
    }
    let radices: Vec<usize> = mm.iter().map(|m| m.len()).collect();

    let partial: Vec<Vec<FrontPoint>> = perms
        .into_par_iter()
        .map(|os| {
            let mut front = Vec::new();
            let mut mv = vec![0usize; radices.len()];
            loop {
                let chrom = Chromosome { os: os.clone(), mv: mv.clone() };
                let sched = decode_with(inst, &mm, &chrom).expect("enumerated chromosomes are valid");
                let tec = independent_energy(inst, &sched).total;
                offer(&mut front, FrontPoint { makespan: latest_completion(&sched), tec, witness: chrom });
                // odometer, last position fastest
                let mut k = radices.len();
                loop {
                    if k == 0 {
                        return front;
                    }
                    k -= 1;
                    mv[k] += 1;
                    if mv[k] < radices[k] {
                        break;
                    }
                    mv[k] = 0;
                }
            }
        })
        .collect();

    let mut points = Vec::new();
    for front in partial {
        for p in front {
            offer(&mut points, p);
        }
    }
    points.sort_by(|a, b| a.makespan.cmp(&b.makespan).then(a.tec.total_cmp(&b.tec)));
    Ok(ExactFront { points, space: space.unwrap() })
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Whether the independent objective values match `model::makespan` and
/// `energy::total_energy` on `sched`. An empty schedule passes vacuously.
pub fn cross_check_schedule(inst: &ProblemInstance, sched: &ScheduleTable) -> bool {
    if sched.rows.iter().all(|r| r.op.is_none()) {
        return true;
    }
    let Ok(cmax) = crate::model::makespan(sched) else {
        return false;
    };
    let tec = crate::energy::total_energy(inst, sched).tec;
    cmax == latest_completion(sched) && rel_eq(tec, independent_energy(inst, sched).total)
}

pub fn cross_check(inst: &ProblemInstance, chrom: &Chromosome) -> bool {
    let mm = MessageMatrices::build(inst);
    match decode_with(inst, &mm, chrom) {
        Ok(sched) => cross_check_schedule(inst, &sched),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::random_chromosome;
    use crate::model::{JobSpec, MachineSpec, OperationSpec, PowerProfile, ProcessingOption, SwitchEnergyTable};
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sample_space_size() {
        let mm = MessageMatrices::build(&sample::instance());
        assert_eq!(search_space_size(&mm), Some(15 * 2916));
    }

    #[test]
    fn gantt_intervals_total_53() {
        let inst = sample::instance();
        let e = independent_energy(&inst, &sample::paper_gantt_schedule());
        assert_eq!(e.intervals, 53.0);
        assert_eq!(e.turn_on, 20.0);
        assert_eq!(e.switching, 10.0);
        assert_eq!(e.setup, 60.0);
        assert!(cross_check_schedule(&inst, &sample::paper_gantt_schedule()));
    }

    #[test]
    fn random_chromosomes_cross_check() {
        let inst = sample::instance();
        let mm = MessageMatrices::build(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            assert!(cross_check(&inst, &random_chromosome(&mm, &mut rng)));
        }
    }

    #[test]
    fn empty_schedule_is_vacuous() {
        assert!(cross_check_schedule(&sample::instance(), &ScheduleTable::default()));
    }

    fn one_op_instance() -> ProblemInstance {
        ProblemInstance {
            speed_count: 1,
            jobs: vec![JobSpec {
                setup_time: 1,
                operations: vec![OperationSpec { options: vec![ProcessingOption { machine: 0, gear: 1, duration: 4 }] }],
            }],
            machines: vec![MachineSpec {
                power: PowerProfile { setup_power: 2.0, process_power: vec![3.0], idle_power: vec![1.0], standby_power: 0.5 },
                switch: SwitchEnergyTable::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
                turn_on: None,
            }],
        }
    }

    #[test]
    fn single_option_front() {
        let f = enumerate_front(&one_op_instance(), OracleLimits::default()).unwrap();
        assert_eq!(f.space, 1);
        assert_eq!(f.points.len(), 1);
        assert_eq!(f.points[0].makespan, 5);
        assert_eq!(f.points[0].tec, 2.0 + 12.0 + 1.0);
    }

    #[test]
    fn refuses_large_spaces() {
        let err = enumerate_front(&sample::instance(), OracleLimits { max_points: 1000 }).unwrap_err();
        assert_eq!(err, OracleError::TooLarge { size: Some(43740), limit: 1000 });
    }

    #[test]
    fn sample_front_is_nondominated_and_reproducible() {
        let inst = sample::instance();
        let a = enumerate_front(&inst, OracleLimits::default()).unwrap();
        let b = enumerate_front(&inst, OracleLimits::default()).unwrap();
        assert_eq!(a, b);
        let pts = a.objective_points();
        for p in &pts {
            for q in &pts {
                assert!(!crate::optimizer::dominates(*p, *q));
            }
        }
        for p in &a.points {
            assert!(cross_check(&inst, &p.witness));
        }
    }

    #[test]
    fn permutation_count() {
        let mut v = vec![0, 0, 1, 1, 1, 1];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 15);
    }
}
