//! Front quality indicators for bi-objective minimization: IGD, hypervolume and
//! the C-metric, plus min-max normalization over a union of fronts.

use thiserror::Error;

use crate::optimizer::pareto::{dominates, Point};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{0} front is empty")]
    EmptyFront(&'static str),
    #[error("point ({0}, {1}) does not dominate the reference point ({2}, {3})")]
    NotDominatingReference(f64, f64, f64, f64),
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Mean distance from each reference point to its nearest candidate point.
pub fn igd(reference: &[Point], candidate: &[Point]) -> Result<f64, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyFront("reference"));
    }
    if candidate.is_empty() {
        return Err(MetricsError::EmptyFront("candidate"));
    }
    let total: f64 = reference
        .iter()
        .map(|&r| candidate.iter().map(|&c| dist(r, c)).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(total / reference.len() as f64)
}

/// Area dominated by `front` and bounded by `reference`. An empty front has
/// zero volume.
pub fn hv(front: &[Point], reference: Point) -> Result<f64, MetricsError> {
    if let Some(p) = front.iter().find(|p| !(p.0 < reference.0 && p.1 < reference.1)) {
        return Err(MetricsError::NotDominatingReference(p.0, p.1, reference.0, reference.1));
    }
    let mut pts = front.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = reference.1;
    for p in pts {
        if p.1 < ceiling {
            area += (reference.0 - p.0) * (ceiling - p.1);
            ceiling = p.1;
        }
    }
    Ok(area)
}

/// Fraction of `b` strictly dominated by at least one point of `a`.
pub fn c_metric(a: &[Point], b: &[Point]) -> Result<f64, MetricsError> {
    if b.is_empty() {
        return Err(MetricsError::EmptyFront("B"));
    }
    let covered = b.iter().filter(|&&q| a.iter().any(|&p| dominates(p, q))).count();
    Ok(covered as f64 / b.len() as f64)
}

/// Per-objective `(min, max)` over a union of fronts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn of(fronts: &[Vec<Point>]) -> Option<Self> {
        let mut it = fronts.iter().flatten();
        let first = *it.next()?;
        let mut b = Bounds { min: first, max: first };
        for p in it {
            b.min = (b.min.0.min(p.0), b.min.1.min(p.1));
            b.max = (b.max.0.max(p.0), b.max.1.max(p.1));
        }
        Some(b)
    }

    /// Affine map into `[0, 1]`; a degenerate objective maps to 0.
    pub fn apply(&self, p: Point) -> Point {
        let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        (scale(p.0, self.min.0, self.max.0), scale(p.1, self.min.1, self.max.1))
    }
}

/// Normalizes every front with the extremes of their union. Returns `None` if
/// the union is empty.
pub fn normalize(fronts: &[Vec<Point>]) -> Option<(Vec<Vec<Point>>, Bounds)> {
    let bounds = Bounds::of(fronts)?;
    let out = fronts.iter().map(|f| f.iter().map(|&p| bounds.apply(p)).collect()).collect();
    Some((out, bounds))
}

/// Reference point used for hypervolume on normalized fronts.
pub const HV_REFERENCE: Point = (1.1, 1.1);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn igd_examples() {
        let r = igd(&[(0.0, 0.0), (1.0, 1.0)], &[(0.0, 0.0)]).unwrap();
        assert_eq!(r, 2f64.sqrt() / 2.0);
        assert_eq!(igd(&[(0.0, 1.0), (1.0, 0.0)], &[(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]).unwrap(), 0.0);
        assert_eq!(igd(&[(0.0, 0.0)], &[(3.0, 4.0)]).unwrap(), 5.0);
        assert!(igd(&[], &[(0.0, 0.0)]).is_err());
        assert!(igd(&[(0.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn hv_examples() {
        assert_eq!(hv(&[(1.0, 1.0)], (2.0, 2.0)).unwrap(), 1.0);
        assert_eq!(hv(&[(1.0, 2.0), (2.0, 1.0)], (3.0, 3.0)).unwrap(), 3.0);
        assert_eq!(hv(&[(1.0, 2.0), (2.0, 1.0), (2.5, 2.5)], (3.0, 3.0)).unwrap(), 3.0);
        assert!(hv(&[(3.0, 1.0)], (3.0, 3.0)).is_err());
        assert_eq!(hv(&[], (1.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn c_metric_examples() {
        assert_eq!(c_metric(&[(0.0, 0.0)], &[(1.0, 1.0), (0.0, 0.0)]).unwrap(), 0.5);
        let f = [(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)];
        assert_eq!(c_metric(&f, &f).unwrap(), 0.0);
        assert_eq!(c_metric(&[(0.0, 0.0)], &f).unwrap(), 1.0);
        assert_eq!(c_metric(&f, &[(0.0, 0.0)]).unwrap(), 0.0);
        assert!(c_metric(&f, &[]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let (n, b) = normalize(&[vec![(5.0, 7.0)]]).unwrap();
        assert_eq!(n, vec![vec![(0.0, 0.0)]]);
        assert_eq!(b.min, (5.0, 7.0));
        let (n, _) = normalize(&[vec![(2.0, 10.0)], vec![(4.0, 30.0)]]).unwrap();
        assert_eq!(n, vec![vec![(0.0, 0.0)], vec![(1.0, 1.0)]]);
        assert!(normalize(&[vec![], vec![]]).is_none());
    }

    fn front() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..20)
    }

    proptest! {
        #[test]
        fn igd_self_is_zero_and_monotone(r in front(), c in front(), extra in (0.0f64..1.0, 0.0f64..1.0)) {
            prop_assert_eq!(igd(&r, &r).unwrap(), 0.0);
            let mut more = c.clone();
            more.push(extra);
            prop_assert!(igd(&r, &more).unwrap() <= igd(&r, &c).unwrap());
        }

        #[test]
        fn hv_monotone_and_order_free(f in front(), extra in (0.0f64..1.0, 0.0f64..1.0)) {
            let base = hv(&f, HV_REFERENCE).unwrap();
            let mut more = f.clone();
            more.push(extra);
            prop_assert!(hv(&more, HV_REFERENCE).unwrap() >= base - 1e-12);
            let mut rev = f.clone();
            rev.reverse();
            prop_assert!((hv(&rev, HV_REFERENCE).unwrap() - base).abs() < 1e-12);
        }

        #[test]
        fn hv_matches_grid_count(f in prop::collection::vec((0u8..10, 0u8..10), 1..8)) {
            let pts: Vec<Point> = f.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
            let cells = (0..10).flat_map(|x| (0..10).map(move |y| (x, y)))
                .filter(|&(x, y)| pts.iter().any(|p| p.0 <= x as f64 && p.1 <= y as f64))
                .count();
            prop_assert_eq!(hv(&pts, (10.0, 10.0)).unwrap(), cells as f64);
        }

        #[test]
        fn c_metric_full_cover(b in front()) {
            let a = vec![(-1.0, -1.0)];
            prop_assert_eq!(c_metric(&a, &b).unwrap(), 1.0);
            prop_assert_eq!(c_metric(&b, &a).unwrap(), 0.0);
        }

        #[test]
        fn normalization_preserves_dominance(f in front(), g in front()) {
            let (n, _) = normalize(&[f.clone(), g.clone()]).unwrap();
            for (i, &p) in f.iter().enumerate() {
                for (j, &q) in g.iter().enumerate() {
                    if dominates(p, q) {
                        prop_assert!(!dominates(n[1][j], n[0][i]));
                    }
                }
            }
            for p in n.iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&p.0) && (0.0..=1.0).contains(&p.1));
            }
        }
    }
}
