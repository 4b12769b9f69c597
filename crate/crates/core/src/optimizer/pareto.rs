//! Dominance, crowding distance, non-dominated ranking and the bounded
//! external archive.

use crate::encoding::Chromosome;
use crate::model::Time;

/// A point in objective space `(makespan, tec)`, both minimized.
pub type Point = (f64, f64);

/// Strict Pareto dominance for minimization.
pub fn dominates(a: Point, b: Point) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objectives {
    pub makespan: Time,
    pub tec: f64,
}

impl Objectives {
    pub fn point(&self) -> Point {
        (self.makespan as f64, self.tec)
    }

    pub fn dominates(&self, other: &Objectives) -> bool {
        dominates(self.point(), other.point())
    }
}

/// Crowding distance of every point; extremes of either objective get
/// `f64::INFINITY`.
pub fn crowding_distances(points: &[Point]) -> Vec<f64> {
    let n = points.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for key in [|p: &Point| p.0, |p: &Point| p.1] {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| key(&points[a]).total_cmp(&key(&points[b])).then(a.cmp(&b)));
        let lo = key(&points[idx[0]]);
        let hi = key(&points[idx[n - 1]]);
        dist[idx[0]] = f64::INFINITY;
        dist[idx[n - 1]] = f64::INFINITY;
        if hi <= lo {
            continue;
        }
        for w in 1..n - 1 {
            let span = key(&points[idx[w + 1]]) - key(&points[idx[w - 1]]);
            dist[idx[w]] += span / (hi - lo);
        }
    }
    dist
}

/// Non-domination rank of every point (0 = first front).
pub fn nondominated_ranks(points: &[Point]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(points[i], points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut level = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = level;
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        front = next;
        level += 1;
    }
    rank
}

/// Indices of the `k` best points: rank ascending, then crowding distance
/// descending (computed within each front), then index.
pub fn best_indices(points: &[Point], k: usize) -> Vec<usize> {
    let ranks = nondominated_ranks(points);
    let mut crowd = vec![0.0; points.len()];
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    for r in 0..=max_rank {
        let members: Vec<usize> = (0..points.len()).filter(|&i| ranks[i] == r).collect();
        let pts: Vec<Point> = members.iter().map(|&i| points[i]).collect();
        for (&i, d) in members.iter().zip(crowding_distances(&pts)) {
            crowd[i] = d;
        }
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| ranks[a].cmp(&ranks[b]).then(crowd[b].total_cmp(&crowd[a])).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Mutually non-dominated subset, first occurrence kept among equal points.
pub fn nondominated_filter(points: &[Point]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        if keep.iter().any(|&k| points[k] == p || dominates(points[k], p)) {
            continue;
        }
        keep.retain(|&k| !dominates(p, points[k]));
        keep.push(i);
    }
    keep.sort_unstable();
    keep
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub chromosome: Chromosome,
    pub objectives: Objectives,
}

/// Bounded set of mutually non-dominated solutions with distinct objective
/// pairs. Overflow evicts the most crowded member; extremes are never evicted.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    capacity: usize,
}

impl ParetoArchive {
    pub fn new(capacity: usize) -> Self {
        Self { entries: Vec::new(), capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.entries.iter().map(|e| e.objectives.point()).collect()
    }

    /// Returns whether the entry was admitted.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        let p = entry.objectives.point();
        if self
            .entries
            .iter()
            .any(|e| e.objectives.point() == p || dominates(e.objectives.point(), p))
        {
            return false;
        }
        self.entries.retain(|e| !dominates(p, e.objectives.point()));
        self.entries.push(entry);
        while self.entries.len() > self.capacity {
            let crowd = crowding_distances(&self.points());
            let victim = (0..crowd.len())
                .filter(|&i| crowd[i].is_finite())
                .min_by(|&a, &b| crowd[a].total_cmp(&crowd[b]).then(a.cmp(&b)));
            match victim {
                Some(v) => {
                    self.entries.remove(v);
                }
                None => break,
            }
        }
        true
    }

    /// Entry with the smallest makespan (ties: smallest energy).
    pub fn best_makespan(&self) -> Option<&ArchiveEntry> {
        self.entries.iter().min_by(|a, b| {
            a.objectives
                .makespan
                .cmp(&b.objectives.makespan)
                .then(a.objectives.tec.total_cmp(&b.objectives.tec))
        })
    }

    /// Entry with the smallest energy (ties: smallest makespan).
    pub fn best_tec(&self) -> Option<&ArchiveEntry> {
        self.entries.iter().min_by(|a, b| {
            a.objectives
                .tec
                .total_cmp(&b.objectives.tec)
                .then(a.objectives.makespan.cmp(&b.objectives.makespan))
        })
    }
}
