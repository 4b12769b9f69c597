//! Variation operators: DE-style exemplar construction on the MV layer,
//! self-rotation inertia on the OS layer, and the three-parent precedence
//! operation fusion (TPOF).

use rand::seq::SliceRandom;
use rand::Rng;

use super::pareto::Objectives;
use super::OptimizerError;
use crate::encoding::{Chromosome, MessageMatrices};

/// Mutation: where the two neighbours agree on an MV entry, adopt that entry
/// with probability `f`; elsewhere keep the particle's own entry.
pub fn de_mutate<R: Rng + ?Sized>(
    pbest_prev: &Chromosome,
    pbest_self: &Chromosome,
    pbest_next: &Chromosome,
    f: f64,
    rng: &mut R,
) -> Chromosome {
    let mv = pbest_self
        .mv
        .iter()
        .zip(pbest_prev.mv.iter().zip(&pbest_next.mv))
        .map(|(&own, (&a, &b))| if a == b && rng.gen::<f64>() < f { a } else { own })
        .collect();
    Chromosome { os: pbest_self.os.clone(), mv }
}

/// Binomial crossover on the MV layer with one forced mutant position.
pub fn de_crossover<R: Rng + ?Sized>(mutant: &Chromosome, pbest_self: &Chromosome, cr: f64, rng: &mut R) -> Chromosome {
    let d = pbest_self.mv.len();
    let forced = if d > 0 { rng.gen_range(0..d) } else { 0 };
    let mv = (0..d)
        .map(|k| {
            let take = rng.gen::<f64>() < cr || k == forced;
            if take {
                mutant.mv[k]
            } else {
                pbest_self.mv[k]
            }
        })
        .collect();
    Chromosome { os: pbest_self.os.clone(), mv }
}

/// Rotates `os[a..=b]` right by one: the segment's last element moves to its front.
pub fn rotate_segment(os: &mut [usize], a: usize, b: usize) {
    os[a..=b].rotate_right(1);
}

pub fn self_rotate<R: Rng + ?Sized>(chrom: &Chromosome, rng: &mut R) -> Chromosome {
    let mut out = chrom.clone();
    let n = out.os.len();
    if n < 2 {
        return out;
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (a, b) = (a.min(b), a.max(b));
    rotate_segment(&mut out.os, a, b);
    out
}

/// Number of jobs handed to each parent, proportional to the weights.
pub fn subset_sizes(weights: [f64; 3], n_jobs: usize) -> Result<[usize; 3], OptimizerError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(OptimizerError::InvalidWeights(weights));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(OptimizerError::InvalidWeights(weights));
    }
    let n = n_jobs as f64;
    // absorb representation error such as 0.7 * 10 = 6.999...
    let floor = |x: f64| ((x + 1e-9).floor() as usize).min(n_jobs);
    let n1 = floor(weights[0] / total * n);
    let n2 = floor((weights[0] + weights[1]) / total * n).max(n1) - n1;
    Ok([n1, n2, n_jobs - n1 - n2])
}

/// TPOF with an explicit job partition: `owner[job]` in `0..3` names the
/// parent the job is inherited from.
pub fn tpof_with_partition(parents: [&Chromosome; 3], owner: &[usize], mm: &MessageMatrices) -> Chromosome {
    let d = parents[0].os.len();
    let mut os: Vec<Option<usize>> = parents[0].os.iter().map(|&j| (owner[j] == 0).then_some(j)).collect();
    let mut free = (0..d).filter(|&i| os[i].is_none()).collect::<Vec<_>>().into_iter();
    for (which, parent) in parents.iter().enumerate().skip(1) {
        for &j in parent.os.iter().filter(|&&j| owner[j] == which) {
            let slot = free.next().expect("job multiset is shared by all parents");
            os[slot] = Some(j);
        }
    }
    let mv = (0..d)
        .map(|p| {
            let (job, _) = mm.operation_at(p);
            parents[owner[job]].mv[p]
        })
        .collect();
    Chromosome { os: os.into_iter().map(|x| x.expect("every slot filled")).collect(), mv }
}

pub fn tpof<R: Rng + ?Sized>(
    parents: [&Chromosome; 3],
    weights: [f64; 3],
    mm: &MessageMatrices,
    rng: &mut R,
) -> Result<Chromosome, OptimizerError> {
    let n_jobs = mm.job_count();
    let sizes = subset_sizes(weights, n_jobs)?;
    let mut jobs: Vec<usize> = (0..n_jobs).collect();
    jobs.shuffle(rng);
    let mut owner = vec![0usize; n_jobs];
    for (k, &j) in jobs.iter().enumerate() {
        owner[j] = if k < sizes[0] {
            0
        } else if k < sizes[0] + sizes[1] {
            1
        } else {
            2
        };
    }
    Ok(tpof_with_partition(parents, &owner, mm))
}

pub const C_MIN: f64 = 1.5;
pub const C_MAX: f64 = 2.0;

/// Inertia weight, decreasing linearly from 2 to 0.4.
pub fn inertia_weight(iter: usize, max_iter: usize) -> f64 {
    2.0 - iter as f64 * (2.0 - 0.4) / max_iter as f64
}

/// Cognitive factor for a draw `u` in (0, 1], clamped to [1.5, 2].
pub fn cognitive_factor(iter: usize, max_iter: usize, u: f64) -> f64 {
    (2.0 - iter as f64 * (2.0 - 1.5) / (max_iter as f64 * u)).clamp(C_MIN, C_MAX)
}

/// Social factor for a draw `u` in (0, 1], clamped to [1.5, 2].
pub fn social_factor(iter: usize, max_iter: usize, u: f64) -> f64 {
    (1.5 + iter as f64 * (2.0 - 1.5) / (max_iter as f64 * u)).clamp(C_MIN, C_MAX)
}

/// Fusion weights `(w, c1 r1, c2 r2)` for iteration `iter`.
pub fn fusion_weights<R: Rng + ?Sized>(iter: usize, max_iter: usize, rng: &mut R) -> [f64; 3] {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = 1.0 - rng.gen::<f64>();
    let c1 = cognitive_factor(iter, max_iter, u1);
    let c2 = social_factor(iter, max_iter, u2);
    let r1: f64 = rng.gen();
    let r2: f64 = rng.gen();
    [inertia_weight(iter, max_iter), c1 * r1, c2 * r2]
}

/// Returns `(rotated current position, candidate position)`.
pub fn update_position<R: Rng + ?Sized>(
    position: &Chromosome,
    exemplar: &Chromosome,
    gbest: &Chromosome,
    iter: usize,
    max_iter: usize,
    mm: &MessageMatrices,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let rotated = self_rotate(position, rng);
    let weights = fusion_weights(iter, max_iter, rng);
    let candidate = tpof([&rotated, exemplar, gbest], weights, mm, rng).expect("inertia weight is positive");
    (rotated, candidate)
}

/// The candidate replaces the rotated position only if it dominates it.
pub fn select<'a>(
    current: (&'a Chromosome, Objectives),
    candidate: (&'a Chromosome, Objectives),
) -> (&'a Chromosome, Objectives) {
    if candidate.1.dominates(&current.1) {
        candidate
    } else {
        current
    }
}
