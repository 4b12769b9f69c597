//! Critical-path extraction and variable neighborhood search over three
//! structures: critical machine mutation (N1), critical operation swap (N2) and
//! max-load machine reassignment (N3).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::encoding::{decode_with, Chromosome, MessageMatrices};
use crate::model::{ProblemInstance, ScheduleTable, ScheduledRow, Time};
use crate::optimizer::{evaluate, Objectives};

/// Operations `(job, op)` in forward order, from one starting at time 0 to one
/// completing at the makespan.
pub type CriticalPath = Vec<(usize, usize)>;

fn merged_start(sched: &ScheduleTable, row: &ScheduledRow) -> Time {
    sched.setup_before(row).map_or(row.start, |s| s.start)
}

/// Walks backward from the latest-completing operation (ties: highest job,
/// then op), each step stepping to whichever of the job predecessor and machine
/// predecessor completes later. Equal completions follow the machine
/// predecessor.
pub fn critical_path(sched: &ScheduleTable) -> CriticalPath {
    let rows: Vec<&ScheduledRow> = sched.process_rows().collect();
    let Some(mut cur) = rows.iter().copied().max_by_key(|r| (r.end, r.job, r.op)) else {
        return Vec::new();
    };
    let mut path = Vec::new();
    loop {
        let op = cur.op.expect("process row");
        path.push((cur.job, op));
        let start = merged_start(sched, cur);
        if start == 0 {
            break;
        }
        let job_pred = op.checked_sub(1).and_then(|p| sched.find(cur.job, p));
        let machine_pred = rows
            .iter()
            .copied()
            .filter(|r| r.machine == cur.machine && r.end <= cur.start)
            .max_by_key(|r| (r.end, r.start));
        cur = match (job_pred, machine_pred) {
            (Some(j), Some(m)) => {
                if j.end > m.end {
                    j
                } else {
                    m
                }
            }
            (Some(j), None) => j,
            (None, Some(m)) => m,
            (None, None) => break,
        };
    }
    path.reverse();
    path
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    N1,
    N2,
    N3,
}

pub const STRUCTURES: [Structure; 3] = [Structure::N1, Structure::N2, Structure::N3];

/// Random column of `position` on a machine other than its current one: the
/// machine is drawn uniformly among the alternatives, then the gear among that
/// machine's columns.
fn reassign_machine<R: Rng + ?Sized>(mm: &MessageMatrices, chrom: &Chromosome, position: usize, rng: &mut R) -> usize {
    let m = mm.at(position);
    let current = m.columns[chrom.mv[position]].machine;
    let mut others: Vec<usize> = m.machines().into_iter().filter(|&x| x != current).collect();
    others.sort_unstable();
    others.dedup();
    let target = *others.choose(rng).expect("caller checked for alternatives");
    let cols: Vec<usize> = (0..m.len()).filter(|&c| m.columns[c].machine == target).collect();
    *cols.choose(rng).unwrap()
}

fn has_alternative_machine(mm: &MessageMatrices, position: usize) -> bool {
    let ms = mm.at(position).machines();
    ms.iter().any(|&m| m != ms[0])
}

/// One neighbor of `chrom` (whose decoded schedule is `sched`) under
/// `structure`, or `None` when the structure has no applicable move.
pub fn neighbor<R: Rng + ?Sized>(
    mm: &MessageMatrices,
    chrom: &Chromosome,
    sched: &ScheduleTable,
    structure: Structure,
    rng: &mut R,
) -> Option<Chromosome> {
    let mut out = chrom.clone();
    match structure {
        Structure::N1 => {
            let movable: Vec<usize> = critical_path(sched)
                .into_iter()
                .map(|(j, o)| mm.position(j, o))
                .filter(|&p| has_alternative_machine(mm, p))
                .collect();
            let &p = movable.choose(rng)?;
            out.mv[p] = reassign_machine(mm, chrom, p, rng);
        }
        Structure::N2 => {
            let pos = chrom.os_positions(mm);
            let crit: Vec<(usize, usize)> = critical_path(sched).into_iter().map(|(j, o)| (j, pos[mm.position(j, o)])).collect();
            // same-job swaps leave the repetition encoding unchanged
            let pairs: Vec<(usize, usize)> = (0..crit.len())
                .flat_map(|a| (a + 1..crit.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| crit[a].0 != crit[b].0)
                .map(|(a, b)| (crit[a].1, crit[b].1))
                .collect();
            let &(a, b) = pairs.choose(rng)?;
            out.os.swap(a, b);
        }
        Structure::N3 => {
            let mut load = vec![0 as Time; sched.rows.iter().map(|r| r.machine + 1).max().unwrap_or(0)];
            for r in &sched.rows {
                load[r.machine] += r.len();
            }
            let busiest = (0..load.len()).max_by_key(|&m| (load[m], std::cmp::Reverse(m)))?;
            let movable: Vec<usize> = sched
                .process_rows()
                .filter(|r| r.machine == busiest)
                .map(|r| mm.position(r.job, r.op.unwrap()))
                .filter(|&p| has_alternative_machine(mm, p))
                .collect();
            let &p = movable.choose(rng)?;
            out.mv[p] = reassign_machine(mm, chrom, p, rng);
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnsOutcome {
    pub chromosome: Chromosome,
    pub objectives: Objectives,
    pub evaluations: u64,
}

/// Upper bound on neighbor evaluations in one VNS call, as a multiple of the
/// per-structure budget.
pub const VNS_TOTAL_FACTOR: usize = 10;

/// Cycles N1 → N2 → N3 with `budget` evaluations per structure. A dominating
/// neighbor becomes current and restarts at N1; exhausting N3 ends the search.
pub fn vns<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    mm: &MessageMatrices,
    chrom: &Chromosome,
    objectives: Objectives,
    budget: usize,
    rng: &mut R,
) -> VnsOutcome {
    let mut cur = chrom.clone();
    let mut cur_obj = objectives;
    let mut evaluations = 0u64;
    let total = (budget * VNS_TOTAL_FACTOR) as u64;
    if budget == 0 {
        return VnsOutcome { chromosome: cur, objectives: cur_obj, evaluations };
    }
    let mut sched = decode_with(inst, mm, &cur).expect("valid chromosome");
    let mut k = 0;
    'outer: while k < STRUCTURES.len() {
        for _ in 0..budget {
            if evaluations >= total {
                break 'outer;
            }
            let Some(cand) = neighbor(mm, &cur, &sched, STRUCTURES[k], rng) else {
                break;
            };
            evaluations += 1;
            let o = evaluate(inst, mm, &cand);
            if o.dominates(&cur_obj) {
                sched = decode_with(inst, mm, &cand).expect("valid chromosome");
                cur = cand;
                cur_obj = o;
                k = 0;
                continue 'outer;
            }
        }
        k += 1;
    }
    VnsOutcome { chromosome: cur, objectives: cur_obj, evaluations }
}
