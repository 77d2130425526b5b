//! Cached nodal metric data on one periodic unit cell.
//!
//! Every lattice the distance machinery walks on (Dijkstra seeds, fast
//! marching fields) uses node spacings of the form `stride / resolution`, so
//! segment midpoints between lattice nodes land on the half-step lattice.
//! Caching f, ∇f on the node lattice and e^f on the half-step lattice of one
//! unit cell therefore serves every query region via periodic indexing.

use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Minimum admissible resolution per unit cell.
pub const MIN_RESOLUTION: usize = 64;

#[derive(Clone, Debug)]
pub struct Grid<S> {
    resolution: usize,
    halfwidth: S,
    f_nodes: Vec<S>,
    grad_nodes: Vec<Vec2<S>>,
    expf_half: Vec<S>,
}

impl<S: Real> Grid<S> {
    pub fn new(metric: &MetricField<S>, resolution: usize, halfwidth: S) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {resolution} below the minimum {MIN_RESOLUTION}"
            )));
        }
        if halfwidth <= S::one() {
            return Err(Error::InvalidParameter(
                "grid halfwidth must exceed 1".into(),
            ));
        }
        let n = resolution;
        let h = S::of(1.0 / n as f64);
        let mut f_nodes = Vec::with_capacity(n * n);
        let mut grad_nodes = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = Vec2::new(S::of(i as f64) * h, S::of(j as f64) * h);
                f_nodes.push(metric.f(x));
                grad_nodes.push(metric.grad_f(x));
            }
        }
        let n2 = 2 * n;
        let h2 = S::of(1.0 / n2 as f64);
        let mut expf_half = Vec::with_capacity(n2 * n2);
        for j in 0..n2 {
            for i in 0..n2 {
                let x = Vec2::new(S::of(i as f64) * h2, S::of(j as f64) * h2);
                expf_half.push(metric.f(x).exp());
            }
        }
        Ok(Grid {
            resolution,
            halfwidth,
            f_nodes,
            grad_nodes,
            expf_half,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn halfwidth(&self) -> S {
        self.halfwidth
    }

    /// True iff x lies inside the declared sampled region.
    pub fn contains(&self, x: Vec2<S>) -> bool {
        x.x.abs() <= self.halfwidth && x.y.abs() <= self.halfwidth
    }

    pub fn check_contains(&self, x: Vec2<S>) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideRegion {
                x: x.x.as_f64(),
                y: x.y.as_f64(),
                halfwidth: self.halfwidth.as_f64(),
            })
        }
    }

    pub fn check_radius(&self, center: Vec2<S>, radius: S) -> Result<()> {
        let reach = center.x.abs().max(center.y.abs()) + radius;
        if reach <= self.halfwidth {
            Ok(())
        } else {
            Err(Error::RegionTooSmall {
                radius: radius.as_f64(),
                halfwidth: self.halfwidth.as_f64(),
            })
        }
    }

    #[inline]
    fn wrap(i: i64, n: usize) -> usize {
        (i.rem_euclid(n as i64)) as usize
    }

    /// f at the node lattice point (i, j)·(1/resolution), periodically wrapped.
    #[inline]
    pub fn f_node(&self, i: i64, j: i64) -> S {
        let n = self.resolution;
        self.f_nodes[Self::wrap(j, n) * n + Self::wrap(i, n)]
    }

    #[inline]
    pub fn grad_node(&self, i: i64, j: i64) -> Vec2<S> {
        let n = self.resolution;
        self.grad_nodes[Self::wrap(j, n) * n + Self::wrap(i, n)]
    }

    /// e^f at the half-step lattice point (i, j)·(1/(2·resolution)).
    #[inline]
    pub fn expf_half(&self, i: i64, j: i64) -> S {
        let n2 = 2 * self.resolution;
        self.expf_half[Self::wrap(j, n2) * n2 + Self::wrap(i, n2)]
    }

    /// e^{2f} at the node lattice point.
    #[inline]
    pub fn exp2f_node(&self, i: i64, j: i64) -> S {
        let e = self.expf_half(2 * i, 2 * j);
        e * e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_agrees_with_direct_evaluation() {
        let m = MetricField::<f64>::cosine_product(0.3).unwrap();
        let grid = Grid::new(&m, 64, 8.0).unwrap();
        for &(i, j) in &[(0i64, 0i64), (13, 50), (-7, 129), (64, -64), (1000, 3)] {
            let x = Vec2::new(i as f64 / 64.0, j as f64 / 64.0);
            assert!((grid.f_node(i, j) - m.f(x)).abs() < 1e-12);
            assert!((grid.grad_node(i, j) - m.grad_f(x)).norm() < 1e-12);
            assert!((grid.expf_half(2 * i, 2 * j) - m.f(x).exp()).abs() < 1e-12);
        }
        // half-step points
        let x = Vec2::new(7.5 / 64.0, 3.5 / 64.0);
        assert!((grid.expf_half(15, 7) - m.f(x).exp()).abs() < 1e-12);
    }

    #[test]
    fn region_checks() {
        let m = MetricField::<f64>::flat();
        let grid = Grid::new(&m, 64, 4.0).unwrap();
        assert!(grid.contains(Vec2::new(3.9, -3.9)));
        assert!(grid.check_contains(Vec2::new(4.1, 0.0)).is_err());
        assert!(grid.check_radius(Vec2::zero(), 3.5).is_ok());
        assert!(grid.check_radius(Vec2::new(1.0, 0.0), 3.5).is_err());
    }

    #[test]
    fn resolution_floor_enforced() {
        let m = MetricField::<f64>::flat();
        assert!(Grid::new(&m, 32, 4.0).is_err());
    }
}
