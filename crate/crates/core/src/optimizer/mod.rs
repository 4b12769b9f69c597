//! D-DEPSO: discrete particle swarm with DE-built learning exemplars, TPOF
//! position updates, dominance selection, an external Pareto archive and
//! critical-path VNS on the best particles.
//!
//! Every particle update within an iteration reads only the previous
//! iteration's state and draws from its own RNG stream, so evaluations run in
//! parallel (on the caller's rayon pool) while results stay bit-identical for a
//! given seed regardless of thread count.

pub mod operators;
pub mod pareto;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{
    decode_with, heuristic_chromosome, random_chromosome, Chromosome, GreedMode, GreedyRule, MessageMatrices,
};
use crate::energy::total_energy;
use crate::local_search::vns;
use crate::model::{makespan, ProblemInstance, Time};
pub use operators::*;
pub use pareto::{dominates, ArchiveEntry, Objectives, ParetoArchive, Point};

#[derive(Debug, Error, PartialEq)]
pub enum OptimizerError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("fusion weights {0:?} must be finite, non-negative and not all zero")]
    InvalidWeights([f64; 3]),
}

/// Component switched off in an ablation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ablation {
    /// Random initialization only.
    Nhi,
    /// Particle's own pbest as exemplar.
    Nde,
    /// No critical-path local search.
    Ncp,
}

impl std::str::FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nhi" => Ok(Ablation::Nhi),
            "nde" => Ok(Ablation::Nde),
            "ncp" => Ok(Ablation::Ncp),
            other => Err(format!("unknown ablation `{other}` (expected nhi, nde or ncp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub population: usize,
    pub max_iter: usize,
    /// DE scale factor: adoption probability of an agreed neighbour entry.
    pub f: f64,
    /// DE crossover probability.
    pub cr: f64,
    pub archive_capacity: usize,
    /// Neighbour evaluations per VNS structure.
    pub vns_budget: usize,
    pub disable_hybrid_init: bool,
    pub disable_de: bool,
    pub disable_vns: bool,
    pub seed: u64,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            population: 30,
            max_iter: 300,
            f: 0.5,
            cr: 0.3,
            archive_capacity: 100,
            vns_budget: 20,
            disable_hybrid_init: false,
            disable_de: false,
            disable_vns: false,
            seed: 0,
        }
    }
}

/// Particles handed to VNS each iteration.
pub const VNS_ELITE: usize = 5;

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::InvalidConfig(m.to_string()));
        if self.population < 3 {
            return bad("population must be at least 3");
        }
        if !(0.0..=1.0).contains(&self.f) {
            return bad("F must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return bad("Cr must lie in [0, 1]");
        }
        if self.archive_capacity < 2 {
            return bad("archive capacity must be at least 2");
        }
        Ok(())
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        match ablation {
            Ablation::Nhi => self.disable_hybrid_init = true,
            Ablation::Nde => self.disable_de = true,
            Ablation::Ncp => self.disable_vns = true,
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Chromosome,
    pub objectives: Objectives,
    pub pbest: Chromosome,
    pub pbest_objectives: Objectives,
}

impl Particle {
    fn new(position: Chromosome, objectives: Objectives) -> Self {
        Self { pbest: position.clone(), pbest_objectives: objectives, position, objectives }
    }

    /// Moves the particle; pbest follows only when dominated by the new position.
    pub fn move_to(&mut self, position: Chromosome, objectives: Objectives) {
        if objectives.dominates(&self.pbest_objectives) {
            self.pbest = position.clone();
            self.pbest_objectives = objectives;
        }
        self.position = position;
        self.objectives = objectives;
    }
}

/// Decodes and scores a chromosome: `(makespan, TEC)`.
pub fn evaluate(inst: &ProblemInstance, mm: &MessageMatrices, chrom: &Chromosome) -> Objectives {
    let sched = decode_with(inst, mm, chrom).expect("operators only produce valid chromosomes");
    Objectives {
        makespan: makespan(&sched).expect("instances have at least one operation"),
        tec: total_energy(inst, &sched).tec,
    }
}

/// Group sizes `(rule 1, rule 2, random)` of the hybrid initialization.
pub fn init_group_sizes(population: usize, hybrid: bool) -> (usize, usize, usize) {
    if !hybrid {
        return (0, 0, population);
    }
    let rule = population * 2 / 5;
    (rule, rule, population - 2 * rule)
}

/// Initial positions: one total-greed and otherwise partial-greed chromosomes
/// for each rule, then random ones. Particle `i` draws from RNG stream `i`.
pub fn initial_positions(inst: &ProblemInstance, mm: &MessageMatrices, cfg: &AlgorithmConfig) -> Vec<Chromosome> {
    let (r1, r2, _) = init_group_sizes(cfg.population, !cfg.disable_hybrid_init);
    (0..cfg.population)
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, 0, i as u64);
            let greedy = |rule, k: usize, rng: &mut ChaCha8Rng| {
                let mode = if k == 0 { GreedMode::Total } else { GreedMode::Partial };
                heuristic_chromosome(inst, mm, rule, mode, rng)
            };
            if i < r1 {
                greedy(GreedyRule::MinTime, i, &mut rng)
            } else if i < r1 + r2 {
                greedy(GreedyRule::MinEnergy, i - r1, &mut rng)
            } else {
                random_chromosome(mm, &mut rng)
            }
        })
        .collect()
}

pub fn initialize_population(inst: &ProblemInstance, mm: &MessageMatrices, cfg: &AlgorithmConfig) -> Vec<Particle> {
    initial_positions(inst, mm, cfg)
        .into_par_iter()
        .map(|x| {
            let o = evaluate(inst, mm, &x);
            Particle::new(x, o)
        })
        .collect()
}

/// Independent ChaCha stream per `(iteration, slot)`.
pub fn stream_rng(seed: u64, iteration: usize, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) | slot);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub best_makespan: Time,
    pub best_tec: f64,
    pub archive: Vec<Objectives>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub archive: ParetoArchive,
    /// Record 0 describes the initial population; record `t` follows iteration `t`.
    pub trace: Vec<IterationRecord>,
    pub evaluations: u64,
}

fn record(iteration: usize, archive: &ParetoArchive) -> IterationRecord {
    IterationRecord {
        iteration,
        best_makespan: archive.best_makespan().map_or(0, |e| e.objectives.makespan),
        best_tec: archive.best_tec().map_or(0.0, |e| e.objectives.tec),
        archive: archive.entries().iter().map(|e| e.objectives).collect(),
    }
}

struct Move {
    rotated: (Chromosome, Objectives),
    candidate: (Chromosome, Objectives),
    chosen_candidate: bool,
}

pub fn run(inst: &ProblemInstance, cfg: &AlgorithmConfig) -> Result<RunOutcome, OptimizerError> {
    run_with_observer(inst, cfg, |_| {})
}

/// Same as [`run`], calling `observer` after every trace record is produced.
pub fn run_with_observer<F: FnMut(&IterationRecord)>(
    inst: &ProblemInstance,
    cfg: &AlgorithmConfig,
    mut observer: F,
) -> Result<RunOutcome, OptimizerError> {
    cfg.validate()?;
    let mm = MessageMatrices::build(inst);
    let n = cfg.population;
    let mut particles = initialize_population(inst, &mm, cfg);
    let mut evaluations = n as u64;
    let mut archive = ParetoArchive::new(cfg.archive_capacity);
    for p in &particles {
        archive.insert(ArchiveEntry { chromosome: p.position.clone(), objectives: p.objectives });
    }
    let mut trace = vec![record(0, &archive)];
    observer(&trace[0]);

    for iter in 1..=cfg.max_iter {
        let guides: Vec<Chromosome> = archive.entries().iter().map(|e| e.chromosome.clone()).collect();
        let snapshot = &particles;
        let moves: Vec<Move> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, iter, i as u64);
                let me = &snapshot[i];
                let exemplar = if cfg.disable_de {
                    me.pbest.clone()
                } else {
                    let prev = &snapshot[(i + n - 1) % n].pbest;
                    let next = &snapshot[(i + 1) % n].pbest;
                    let mutant = de_mutate(prev, &me.pbest, next, cfg.f, &mut rng);
                    de_crossover(&mutant, &me.pbest, cfg.cr, &mut rng)
                };
                let gbest = &guides[rng.gen_range(0..guides.len())];
                let (rotated, candidate) =
                    update_position(&me.position, &exemplar, gbest, iter, cfg.max_iter, &mm, &mut rng);
                let ro = evaluate(inst, &mm, &rotated);
                let co = evaluate(inst, &mm, &candidate);
                let chosen_candidate = co.dominates(&ro);
                Move { rotated: (rotated, ro), candidate: (candidate, co), chosen_candidate }
            })
            .collect();
        evaluations += 2 * n as u64;

        for (p, m) in particles.iter_mut().zip(&moves) {
            let (x, o) = if m.chosen_candidate { &m.candidate } else { &m.rotated };
            p.move_to(x.clone(), *o);
        }
        for m in moves {
            for (x, o) in [m.rotated, m.candidate] {
                archive.insert(ArchiveEntry { chromosome: x, objectives: o });
            }
        }

        if !cfg.disable_vns && cfg.vns_budget > 0 {
            let points: Vec<_> = particles.iter().map(|p| p.objectives.point()).collect();
            let elite = pareto::best_indices(&points, VNS_ELITE.min(n));
            let improved: Vec<(usize, Chromosome, Objectives, u64)> = elite
                .par_iter()
                .enumerate()
                .map(|(k, &i)| {
                    let mut rng = stream_rng(cfg.seed, iter, (n + k) as u64);
                    let p = &particles[i];
                    let out = vns(inst, &mm, &p.position, p.objectives, cfg.vns_budget, &mut rng);
                    (i, out.chromosome, out.objectives, out.evaluations)
                })
                .collect();
            for (i, x, o, evals) in improved {
                evaluations += evals;
                if o.dominates(&particles[i].objectives) {
                    particles[i].move_to(x.clone(), o);
                    archive.insert(ArchiveEntry { chromosome: x, objectives: o });
                }
            }
        }

        trace.push(record(iter, &archive));
        observer(trace.last().unwrap());
    }

    Ok(RunOutcome { archive, trace, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    #[test]
    fn group_sizes() {
        assert_eq!(init_group_sizes(30, true), (12, 12, 6));
        assert_eq!(init_group_sizes(5, true), (2, 2, 1));
        assert_eq!(init_group_sizes(30, false), (0, 0, 30));
    }

    #[test]
    fn hybrid_init_composition() {
        let inst = sample::instance();
        let mm = MessageMatrices::build(&inst);
        let cfg = AlgorithmConfig::default();
        let xs = initial_positions(&inst, &mm, &cfg);
        assert_eq!(xs.len(), 30);
        // T1 is the all-fastest particle
        assert!(xs[0].mv.iter().all(|&c| c == 0));
        let t2: Vec<usize> = (0..mm.len())
            .map(|p| crate::encoding::ranked_columns(&inst, mm.at(p), GreedyRule::MinEnergy)[0])
            .collect();
        assert_eq!(xs[12].mv, t2);
        for x in &xs[1..12] {
            for (p, &col) in x.mv.iter().enumerate() {
                assert!(col < 2.min(mm.at(p).len()));
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(AlgorithmConfig::default().validate().is_ok());
        let bad = AlgorithmConfig { population: 2, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AlgorithmConfig { f: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AlgorithmConfig { cr: -0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(run(&sample::instance(), &AlgorithmConfig { population: 1, ..Default::default() }).is_err());
    }

    #[test]
    fn zero_iterations_archives_initial_front() {
        let inst = sample::instance();
        let mm = MessageMatrices::build(&inst);
        let cfg = AlgorithmConfig { max_iter: 0, seed: 9, ..Default::default() };
        let out = run(&inst, &cfg).unwrap();
        let pts: Vec<_> = initialize_population(&inst, &mm, &cfg).iter().map(|p| p.objectives.point()).collect();
        let mut want: Vec<_> = pareto::nondominated_filter(&pts).into_iter().map(|i| pts[i]).collect();
        let mut got = out.archive.points();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn same_seed_same_trace() {
        let inst = sample::instance();
        let cfg = AlgorithmConfig { max_iter: 10, seed: 4, ..Default::default() };
        assert_eq!(run(&inst, &cfg).unwrap(), run(&inst, &cfg).unwrap());
    }

    #[test]
    fn ablation_parsing() {
        assert_eq!("NDE".parse::<Ablation>(), Ok(Ablation::Nde));
        assert!("xyz".parse::<Ablation>().is_err());
        let cfg = AlgorithmConfig::default().with_ablation(Ablation::Ncp);
        assert!(cfg.disable_vns && !cfg.disable_de);
    }

    #[test]
    fn pbest_moves_only_on_domination() {
        let x = Chromosome { os: vec![0], mv: vec![0] };
        let y = Chromosome { os: vec![1], mv: vec![1] };
        let o = |m, e| Objectives { makespan: m, tec: e };
        let mut p = Particle::new(x.clone(), o(10, 10.0));
        p.move_to(y.clone(), o(5, 20.0));
        assert_eq!(p.pbest, x);
        p.move_to(y.clone(), o(9, 9.0));
        assert_eq!(p.pbest, y);
        assert_eq!(p.pbest_objectives, o(9, 9.0));
    }
}
