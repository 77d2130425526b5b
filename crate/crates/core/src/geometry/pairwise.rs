//! Point-to-point shortest-path seeds: A* over a lattice graph.
//!
//! The graph uses the 8-connected neighborhood plus knight moves, which keeps
//! the worst directional overestimate below 2.8 %. The seed path is only a
//! homotopy-correct upper bound; callers refine it by curve shortening. The
//! search is restricted to the ellipse that must contain every competitive
//! path, with foci at the endpoints, which keeps node counts proportional to
//! the squared separation.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{Grid, MetricField};
use crate::scalar::{OrdF, Real};
use crate::vec2::Vec2;

/// 8-connected plus knight moves, with Euclidean step lengths.
const MOVES: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
];

/// Worst-case ratio of lattice path length to straight-line length for the
/// move set above (attained between the (1,0) and (2,1) directions).
const CHAMFER_MARGIN: f64 = 1.03;

#[derive(Clone, Copy, Debug)]
pub struct PairwiseParams<S> {
    /// Upper bound on the equivalence constant A of the metric.
    pub a_upper: S,
    /// Cap on lattice nodes allocated for one query.
    pub node_budget: usize,
}

impl<S: Real> PairwiseParams<S> {
    pub fn from_metric(metric: &MetricField<S>) -> Self {
        PairwiseParams {
            a_upper: metric.amplitude_budget().exp(),
            node_budget: 2_500_000,
        }
    }
}

/// A lattice shortest path between two points, before refinement.
#[derive(Clone, Debug)]
pub struct DistanceOutcome<S> {
    /// Node positions from x to y, with the exact endpoints at both ends.
    pub polyline: Vec<Vec2<S>>,
    /// Midpoint-rule g-length of the polyline.
    pub length: S,
    /// Lattice spacing used.
    pub spacing: S,
    /// Documented seed tolerance: 2·(cell diagonal)·e^{max f}.
    pub tolerance: S,
}

pub fn pairwise_distance<S: Real>(
    metric: &MetricField<S>,
    grid: &Grid<S>,
    x: Vec2<S>,
    y: Vec2<S>,
    params: &PairwiseParams<S>,
) -> Result<DistanceOutcome<S>> {
    grid.check_contains(x)?;
    grid.check_contains(y)?;

    let chord = x.dist(y);
    let a = params.a_upper;
    if chord < S::of(1e-12) {
        return Ok(DistanceOutcome {
            polyline: vec![x, y],
            length: S::zero(),
            spacing: S::zero(),
            tolerance: S::zero(),
        });
    }

    // Any lattice path competitive with the optimum stays inside the ellipse
    // d_E(·,x) + d_E(·,y) ≤ major: the optimum is at most the chamfer margin
    // times the g-length of the straight chord, and d_E ≤ A·(g-length).
    let chord_g_length = {
        let pieces = (chord.as_f64() / 0.5).ceil().max(1.0) as usize;
        let mut acc = S::zero();
        let step = S::one() / S::of(pieces as f64);
        for k in 0..pieces {
            let p = x.lerp(y, step * S::of(k as f64));
            let q = x.lerp(y, step * S::of((k + 1) as f64));
            acc += metric.segment_length_simpson(p, q);
        }
        acc
    };
    let upper = (a * chord).min(chord_g_length * S::of(1.001));

    // The refinement stage sets the final accuracy; the seed lattice only
    // needs to resolve the metric's features, so its resolution shrinks with
    // the separation (and with the node budget for very long queries).
    let n = grid.resolution();
    let wanted = (192.0 / chord.as_f64()).max(16.0);
    let mut stride = 1usize;
    let major_for = |h: f64| {
        a.as_f64() * (CHAMFER_MARGIN * upper.as_f64() + 4.0 * h * a.as_f64()) + 8.0 * h
    };
    loop {
        let h = stride as f64 / n as f64;
        let major = major_for(h);
        let minor = (major * major - chord.as_f64().powi(2)).max(0.0).sqrt();
        let est = (major / h + 6.0) * (minor / h + 6.0);
        let n_eff = n as f64 / stride as f64;
        if (est <= params.node_budget as f64 && n_eff <= wanted) || stride >= n / 4 {
            break;
        }
        stride *= 2;
    }
    let h = S::of(stride as f64 / n as f64);
    let major = S::of(major_for(h.as_f64()));
    let spread = (major * major - chord * chord).max(S::zero()).sqrt() * S::of(0.5)
        + S::of(3.0) * h;

    let lo = Vec2::new(x.x.min(y.x) - spread, x.y.min(y.y) - spread);
    let hi = Vec2::new(x.x.max(y.x) + spread, x.y.max(y.y) + spread);
    let ix0 = (lo.x / h).floor().as_f64() as i64 - 1;
    let iy0 = (lo.y / h).floor().as_f64() as i64 - 1;
    let nx = ((hi.x / h).ceil().as_f64() as i64 - ix0 + 2) as usize;
    let ny = ((hi.y / h).ceil().as_f64() as i64 - iy0 + 2) as usize;

    let node_pos = |i: usize, j: usize| -> Vec2<S> {
        Vec2::new(
            S::of((ix0 + i as i64) as f64) * h,
            S::of((iy0 + j as i64) as f64) * h,
        )
    };
    let snap = |p: Vec2<S>| -> (usize, usize) {
        let i = ((p.x / h).round().as_f64() as i64 - ix0) as usize;
        let j = ((p.y / h).round().as_f64() as i64 - iy0) as usize;
        (i.min(nx - 1), j.min(ny - 1))
    };

    let (si, sj) = snap(x);
    let (ti, tj) = snap(y);
    let start = sj * nx + si;
    let goal = tj * nx + ti;
    let goal_pos = node_pos(ti, tj);

    // Flat directions inside the move cone make whole corridors of lattice
    // paths exactly tie; a microscopic lateral penalty collapses the
    // degeneracy onto the chord without affecting any genuine comparison.
    let chord_dir = (y - x) * chord.recip();
    let tie_break = S::of(1e-9);

    let mut dist = vec![S::infinity(); nx * ny];
    let mut parent = vec![u32::MAX; nx * ny];
    let mut settled = vec![false; nx * ny];
    let mut heap: BinaryHeap<std::cmp::Reverse<(OrdF<S>, u32)>> = BinaryHeap::new();

    // admissible, consistent heuristic: straight-line length at the smallest
    // possible conformal factor
    let exp_min = (-metric.amplitude_budget()).exp();
    let heur = |p: Vec2<S>| exp_min * p.dist(goal_pos);

    dist[start] = S::zero();
    heap.push(std::cmp::Reverse((OrdF(heur(node_pos(si, sj))), start as u32)));

    let stride_i = stride as i64;
    while let Some(std::cmp::Reverse((_, u))) = heap.pop() {
        let u = u as usize;
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == goal {
            break;
        }
        let (ui, uj) = (u % nx, u / nx);
        let up = node_pos(ui, uj);
        let gu_i = ix0 + ui as i64;
        let gu_j = iy0 + uj as i64;
        for &(di, dj) in &MOVES {
            let vi = ui as i64 + di;
            let vj = uj as i64 + dj;
            if vi < 0 || vj < 0 || vi >= nx as i64 || vj >= ny as i64 {
                continue;
            }
            let v = vj as usize * nx + vi as usize;
            if settled[v] {
                continue;
            }
            let vp = node_pos(vi as usize, vj as usize);
            if vp.dist(x) + vp.dist(y) > major {
                continue;
            }
            // midpoint of the move lands on the half-step lattice
            let mid_i = (2 * gu_i + di) * stride_i;
            let mid_j = (2 * gu_j + dj) * stride_i;
            let lateral = (vp - x).cross(chord_dir).abs();
            let w = grid.expf_half(mid_i, mid_j) * up.dist(vp) + tie_break * lateral;
            let nd = dist[u] + w;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u as u32;
                heap.push(std::cmp::Reverse((OrdF(nd + heur(vp)), v as u32)));
            }
        }
    }

    if !settled[goal] {
        return Err(Error::Unstable(format!(
            "lattice search did not reach the target (chord {:.3})",
            chord.as_f64()
        )));
    }

    let mut nodes = Vec::new();
    let mut cur = goal;
    loop {
        nodes.push(node_pos(cur % nx, cur / nx));
        if cur == start {
            break;
        }
        cur = parent[cur] as usize;
    }
    nodes.reverse();

    let mut polyline = Vec::with_capacity(nodes.len() + 2);
    if x.dist(nodes[0]) > S::of(1e-12) {
        polyline.push(x);
    }
    polyline.extend(nodes);
    if y.dist(*polyline.last().unwrap()) > S::of(1e-12) {
        polyline.push(y);
    }
    if polyline.len() < 2 {
        polyline = vec![x, y];
    }
    let length = metric.curve_length_unchecked(&polyline);
    let a_cell = metric.amplitude_budget().exp();
    Ok(DistanceOutcome {
        polyline,
        length,
        spacing: h,
        tolerance: S::of(2.0) * h * S::SQRT_2() * a_cell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_seed_is_near_straight() {
        let m = MetricField::<f64>::flat();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        let p = PairwiseParams::from_metric(&m);
        let out = pairwise_distance(&m, &g, Vec2::zero(), Vec2::new(3.0, 4.0), &p).unwrap();
        assert!(out.length >= 5.0 - 1e-9);
        assert!(out.length <= 5.0 * 1.03, "seed length {}", out.length);
        assert_eq!(out.polyline.first().copied(), Some(Vec2::zero()));
        assert_eq!(out.polyline.last().copied(), Some(Vec2::new(3.0, 4.0)));
    }

    #[test]
    fn coincident_points_give_zero() {
        let m = MetricField::<f64>::flat();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        let p = PairwiseParams::from_metric(&m);
        let q = Vec2::new(0.3, 0.3);
        let out = pairwise_distance(&m, &g, q, q, &p).unwrap();
        assert_eq!(out.length, 0.0);
    }

    #[test]
    fn endpoints_outside_region_rejected() {
        let m = MetricField::<f64>::flat();
        let g = Grid::new(&m, 128, 4.0).unwrap();
        let p = PairwiseParams::from_metric(&m);
        assert!(pairwise_distance(&m, &g, Vec2::zero(), Vec2::new(5.0, 0.0), &p).is_err());
    }

    #[test]
    fn seed_is_upper_bound_for_bumpy_metric() {
        let m = MetricField::<f64>::cosine_product(0.3).unwrap();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        let p = PairwiseParams::from_metric(&m);
        let x = Vec2::new(0.1, 0.2);
        let y = Vec2::new(2.3, 1.1);
        let out = pairwise_distance(&m, &g, x, y, &p).unwrap();
        let a = m.equivalence_constant();
        let de = x.dist(y);
        assert!(out.length <= a * de * 1.03);
        assert!(out.length >= de / a);
    }
}
