//! Shepard inverse-distance weighting over the `n` nearest neighbours.
//!
//! For neighbour distances `r_i` and `R = 1.01 * max(r_i)` the weights are
//! `w_i = ((R - r_i) / (R * r_i))^p`, normalized to sum to one per target.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Point3;
use crate::spatial::KdTree;

use super::matrix::InterpolationMatrix;

/// Which grid the neighbour search runs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchDirection {
    /// Neighbours are searched for each target point.
    Forward,
    /// Neighbours are searched for each source point and scattered to targets.
    Backward,
    /// Forward when there are no more targets than sources, else backward.
    #[default]
    Auto,
}

impl std::str::FromStr for SearchDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(SearchDirection::Forward),
            "backward" => Ok(SearchDirection::Backward),
            "auto" => Ok(SearchDirection::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown search direction '{s}'"))),
        }
    }
}

/// Inverse-distance weighting parameters. The defaults (20 neighbours,
/// exponent 2) are conventions, not prescribed values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdwConfig {
    pub neighbors: usize,
    pub exponent: f64,
    pub direction: SearchDirection,
}

impl Default for IdwConfig {
    fn default() -> Self {
        IdwConfig {
            neighbors: 20,
            exponent: 2.0,
            direction: SearchDirection::Auto,
        }
    }
}

/// Forward is chosen iff `num_targets <= num_sources`.
pub fn resolve_direction(direction: SearchDirection, num_sources: usize, num_targets: usize) -> SearchDirection {
    match direction {
        SearchDirection::Auto if num_targets <= num_sources => SearchDirection::Forward,
        SearchDirection::Auto => SearchDirection::Backward,
        d => d,
    }
}

/// Shepard weights (not normalized) for neighbour distances. Returns
/// `Err(k)` when neighbour `k` coincides with the query point; the query
/// then takes that neighbour's value.
pub fn shepard_weights(distances: &[f64], exponent: f64) -> std::result::Result<Vec<f64>, usize> {
    let r_max = distances.iter().copied().fold(0.0, f64::max);
    let big_r = 1.01 * r_max;
    if let Some(k) = distances.iter().position(|&r| r <= 1e-12 * big_r) {
        return Err(k);
    }
    Ok(distances
        .iter()
        .map(|&r| ((big_r - r) / (big_r * r)).powf(exponent))
        .collect())
}

fn unit_or_normalized(cols: &[usize], dists: &[f64], exponent: f64) -> Vec<(usize, f64)> {
    match shepard_weights(dists, exponent) {
        Err(k) => vec![(cols[k], 1.0)],
        Ok(w) => {
            let sum: f64 = w.iter().sum();
            cols.iter().zip(w).map(|(&c, w)| (c, w / sum)).collect()
        }
    }
}

/// Builds the `targets x sources` IDW operator.
pub fn build_idw(sources: &[Point3], targets: &[Point3], cfg: &IdwConfig) -> Result<InterpolationMatrix> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("IDW needs at least one source point".into()));
    }
    if cfg.neighbors == 0 || cfg.neighbors > sources.len() {
        return Err(Error::InvalidArgument(format!(
            "IDW neighbors must be in [1, {}] (number of source points), got {}",
            sources.len(),
            cfg.neighbors
        )));
    }
    if !(cfg.exponent > 0.0) {
        return Err(Error::InvalidArgument(format!("IDW exponent must be > 0, got {}", cfg.exponent)));
    }
    let n = cfg.neighbors;
    match resolve_direction(cfg.direction, sources.len(), targets.len()) {
        SearchDirection::Backward => build_backward(sources, targets, n, cfg.exponent),
        _ => {
            let tree = KdTree::new(sources);
            let rows = targets
                .par_iter()
                .map(|&t| {
                    let hits = tree.nearest(t, n);
                    let cols: Vec<usize> = hits.iter().map(|h| h.index).collect();
                    let dists: Vec<f64> = hits.iter().map(|h| h.dist()).collect();
                    unit_or_normalized(&cols, &dists, cfg.exponent)
                })
                .collect();
            InterpolationMatrix::from_rows(sources.len(), rows)
        }
    }
}

fn build_backward(sources: &[Point3], targets: &[Point3], n: usize, exponent: f64) -> Result<InterpolationMatrix> {
    if targets.is_empty() {
        return InterpolationMatrix::from_rows(sources.len(), Vec::new());
    }
    let n = n.min(targets.len());
    let tree = KdTree::new(targets);
    let contributions: Vec<Vec<(usize, usize, f64)>> = sources
        .par_iter()
        .enumerate()
        .map(|(s, &p)| {
            let hits = tree.nearest(p, n);
            let dists: Vec<f64> = hits.iter().map(|h| h.dist()).collect();
            match shepard_weights(&dists, exponent) {
                // negative weight marks an exact source/target coincidence
                Err(k) => vec![(hits[k].index, s, -1.0)],
                Ok(w) => hits.iter().zip(w).map(|(h, w)| (h.index, s, w)).collect(),
            }
        })
        .collect();

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); targets.len()];
    let mut exact: Vec<Option<usize>> = vec![None; targets.len()];
    for (t, s, w) in contributions.into_iter().flatten() {
        if w < 0.0 {
            exact[t] = Some(exact[t].map_or(s, |e| e.min(s)));
        } else {
            rows[t].push((s, w));
        }
    }
    for (row, exact) in rows.iter_mut().zip(exact) {
        if let Some(s) = exact {
            *row = vec![(s, 1.0)];
        } else {
            let sum: f64 = row.iter().map(|e| e.1).sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|e| e.1 /= sum);
            } else {
                row.clear();
            }
        }
    }
    let m = InterpolationMatrix::from_rows(sources.len(), rows)?;
    if m.unmatched_count() > 0 {
        log::warn!(
            "backward IDW left {} of {} target points without a source contribution",
            m.unmatched_count(),
            targets.len()
        );
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_two_point_case() {
        // r = (1, 2), p = 1: R = 2.02, w1 = 1.02/2.02, w2 = 0.02/4.04
        let w = shepard_weights(&[1.0, 2.0], 1.0).unwrap();
        assert!((w[0] - 0.504950495).abs() < 1e-9);
        assert!((w[1] - 0.004950495).abs() < 1e-9);
        let m = build_idw(
            &[[1., 0., 0.], [-2., 0., 0.]],
            &[[0., 0., 0.]],
            &IdwConfig { neighbors: 2, exponent: 1.0, direction: SearchDirection::Forward },
        )
        .unwrap();
        let v = m.mul_vec(&[1.0, 0.0]).unwrap();
        assert!((v[0] - 0.99029).abs() < 1e-5);
    }

    #[test]
    fn equidistant_pair_gives_mean() {
        for p in [0.5, 1.0, 2.0, 3.0] {
            let m = build_idw(
                &[[1., 0., 0.], [-1., 0., 0.]],
                &[[0., 0., 0.]],
                &IdwConfig { neighbors: 2, exponent: p, direction: SearchDirection::Forward },
            )
            .unwrap();
            assert!((m.mul_vec(&[3.0, 5.0]).unwrap()[0] - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_neighbor_and_exact_hit() {
        let src = [[0., 0., 0.], [1., 0., 0.], [2., 0., 0.]];
        let cfg = IdwConfig { neighbors: 1, exponent: 2.0, direction: SearchDirection::Forward };
        let m = build_idw(&src, &[[0.9, 0.1, 0.], [2.0, 0., 0.]], &cfg).unwrap();
        assert_eq!(m.mul_vec(&[10., 20., 30.]).unwrap(), vec![20., 30.]);
        let cfg3 = IdwConfig { neighbors: 3, ..cfg };
        let m = build_idw(&src, &[[1.0, 0., 0.]], &cfg3).unwrap();
        assert_eq!(m.row(0), (&[1usize][..], &[1.0][..]));
    }

    #[test]
    fn weights_decrease_with_distance() {
        let w = shepard_weights(&[0.3, 0.5, 0.9, 1.4], 2.0).unwrap();
        assert!(w.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn auto_rule_and_errors() {
        assert_eq!(resolve_direction(SearchDirection::Auto, 10, 10), SearchDirection::Forward);
        assert_eq!(resolve_direction(SearchDirection::Auto, 10, 11), SearchDirection::Backward);
        let src = [[0., 0., 0.]];
        assert!(build_idw(&[], &src, &IdwConfig::default()).is_err());
        assert!(build_idw(&src, &src, &IdwConfig { neighbors: 2, ..Default::default() }).is_err());
        assert!(build_idw(&src, &src, &IdwConfig { neighbors: 1, exponent: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn backward_rows_are_normalized() {
        let src: Vec<Point3> = (0..5).map(|i| [i as f64, 0.0, 0.0]).collect();
        let tgt: Vec<Point3> = (0..20).map(|i| [i as f64 * 0.21 + 0.05, 0.1, 0.0]).collect();
        let m = build_idw(&src, &tgt, &IdwConfig { neighbors: 2, exponent: 2.0, direction: SearchDirection::Auto }).unwrap();
        for (i, s) in m.row_sums().into_iter().enumerate() {
            if !m.is_unmatched(i) {
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        assert!(m.unmatched_count() > 0);
    }
}
