//! Distance fields d(source, ·) by fast marching, and the volume quantities
//! built on them (geodesic ball areas, the packing constant C_ε).
//!
//! The eikonal equation for a conformal metric e^{2f}·g_E reads
//! ‖∇u‖_E = e^{f}, which fast marching solves on a lattice with one-sided
//! second-order upwind differences. Pairwise point-to-point distances go
//! through a different route (Dijkstra seed plus curve shortening, see
//! `pairwise`); fields are for the many-target queries: areas of balls and
//! tubes, and shell membership d(z, F̄) for every lattice point at once.
//!
//! Lattice spacings are always `stride / resolution`, so node values of f and
//! e^f come out of the periodic unit-cell cache.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{Grid, MetricField};
use crate::scalar::{OrdF, Real};
use crate::vec2::Vec2;

const FAR: u8 = 0;
const NARROW: u8 = 1;
const ACCEPTED: u8 = 2;
/// Source nodes carry exact initial values that marching must not overwrite.
const FROZEN: u8 = 3;

/// What the field measures distance from.
#[derive(Clone, Copy, Debug)]
pub enum FieldSource<'a, S> {
    /// A single point.
    Point(Vec2<S>),
    /// The closed unit square [0,1]² (the fundamental domain F̄); the field
    /// is d(·, F̄), zero inside.
    UnitSquare,
    /// A polyline, for tube neighborhoods of geodesic segments.
    Polyline(&'a [Vec2<S>]),
}

/// A solved distance field on a rectangular lattice patch.
#[derive(Clone, Debug)]
pub struct DistanceField<S> {
    /// Node spacing (stride / grid resolution).
    h: S,
    stride: usize,
    /// Lattice index (in h units) of the lower-left node.
    ix0: i64,
    iy0: i64,
    nx: usize,
    ny: usize,
    dist: Vec<S>,
    state: Vec<u8>,
    stop: S,
    tolerance: S,
}

struct Fmm<'a, S> {
    metric: &'a MetricField<S>,
    grid: &'a Grid<S>,
    field: DistanceField<S>,
    heap: BinaryHeap<std::cmp::Reverse<(OrdF<S>, u32)>>,
}

impl<S: Real> DistanceField<S> {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    fn node_pos(&self, i: usize, j: usize) -> Vec2<S> {
        Vec2::new(
            S::of((self.ix0 + i as i64) as f64) * self.h,
            S::of((self.iy0 + j as i64) as f64) * self.h,
        )
    }

    pub fn spacing(&self) -> S {
        self.h
    }

    /// Largest distance the march certified.
    pub fn stop_radius(&self) -> S {
        self.stop
    }

    /// Documented distance tolerance: 2·(cell diagonal)·e^{max f}.
    pub fn tolerance(&self) -> S {
        self.tolerance
    }

    /// Field value at x by bilinear interpolation, if the surrounding nodes
    /// settled.
    pub fn value_at(&self, x: Vec2<S>) -> Option<S> {
        let fx = x.x / self.h - S::of(self.ix0 as f64);
        let fy = x.y / self.h - S::of(self.iy0 as f64);
        let i = fx.floor().as_f64() as i64;
        let j = fy.floor().as_f64() as i64;
        if i < 0 || j < 0 || i + 1 >= self.nx as i64 || j + 1 >= self.ny as i64 {
            return None;
        }
        let (i, j) = (i as usize, j as usize);
        let tx = fx - S::of(i as f64);
        let ty = fy - S::of(j as f64);
        let mut vals = [S::zero(); 4];
        for (slot, (di, dj)) in [(0usize, 0usize), (1, 0), (0, 1), (1, 1)].iter().enumerate() {
            let id = self.idx(i + di, j + dj);
            let st = self.state[id];
            if st != ACCEPTED && st != FROZEN {
                return None;
            }
            vals[slot] = self.dist[id];
        }
        let one = S::one();
        Some(
            vals[0] * (one - tx) * (one - ty)
                + vals[1] * tx * (one - ty)
                + vals[2] * (one - tx) * ty
                + vals[3] * tx * ty,
        )
    }

    /// Riemannian area of {d ≤ r}: Σ e^{2f}·h² over settled nodes within r.
    pub fn volume_within(&self, grid: &Grid<S>, r: S) -> S {
        let cell = self.h * self.h;
        let stride = self.stride as i64;
        let mut acc = S::zero();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let id = self.idx(i, j);
                let st = self.state[id];
                if (st == ACCEPTED || st == FROZEN) && self.dist[id] <= r {
                    let gi = (self.ix0 + i as i64) * stride;
                    let gj = (self.iy0 + j as i64) * stride;
                    acc += grid.exp2f_node(gi, gj) * cell;
                }
            }
        }
        acc
    }

    /// Settled nodes with value in [lo, hi], thinned by `step` in each axis.
    pub fn band_nodes(&self, lo: S, hi: S, step: usize) -> Vec<(Vec2<S>, S)> {
        let step = step.max(1);
        let mut out = Vec::new();
        for j in (0..self.ny).step_by(step) {
            for i in (0..self.nx).step_by(step) {
                let id = self.idx(i, j);
                let st = self.state[id];
                if (st == ACCEPTED || st == FROZEN) && self.dist[id] >= lo && self.dist[id] <= hi {
                    out.push((self.node_pos(i, j), self.dist[id]));
                }
            }
        }
        out
    }
}

impl<'a, S: Real> Fmm<'a, S> {
    #[inline]
    fn speed(&self, i: usize, j: usize) -> S {
        let stride = self.field.stride as i64;
        let gi = (self.field.ix0 + i as i64) * stride;
        let gj = (self.field.iy0 + j as i64) * stride;
        self.grid.expf_half(2 * gi, 2 * gj)
    }

    fn seed(&mut self, i: usize, j: usize, value: S) {
        let id = self.field.idx(i, j);
        if self.field.state[id] == FROZEN && self.field.dist[id] <= value {
            return;
        }
        self.field.state[id] = FROZEN;
        self.field.dist[id] = value;
        self.heap
            .push(std::cmp::Reverse((OrdF(value), id as u32)));
    }

    /// One-sided upwind update at (i, j) from accepted neighbors.
    fn solve(&self, i: usize, j: usize) -> S {
        let f = &self.field;
        let h = f.h;
        let inv_h = h.recip();
        // (weight_sqrt, target) per axis, if an upwind neighbor exists
        let mut terms: [Option<(S, S)>; 2] = [None, None];
        for (axis, (di, dj)) in [(1i64, 0i64), (0, 1)].iter().enumerate() {
            let mut best: Option<(S, S)> = None;
            for sgn in [-1i64, 1] {
                let i1 = i as i64 + sgn * di;
                let j1 = j as i64 + sgn * dj;
                if i1 < 0 || j1 < 0 || i1 >= f.nx as i64 || j1 >= f.ny as i64 {
                    continue;
                }
                let id1 = f.idx(i1 as usize, j1 as usize);
                if f.state[id1] != ACCEPTED && f.state[id1] != FROZEN {
                    continue;
                }
                let u1 = f.dist[id1];
                // second-order one-sided stencil when the next node along the
                // same direction is settled and causally ordered
                let i2 = i as i64 + 2 * sgn * di;
                let j2 = j as i64 + 2 * sgn * dj;
                let mut cand = (inv_h, u1);
                if i2 >= 0 && j2 >= 0 && i2 < f.nx as i64 && j2 < f.ny as i64 {
                    let id2 = f.idx(i2 as usize, j2 as usize);
                    if (f.state[id2] == ACCEPTED || f.state[id2] == FROZEN)
                        && f.dist[id2] <= u1
                    {
                        let u2 = f.dist[id2];
                        let t = (S::of(4.0) * u1 - u2) * S::of(1.0 / 3.0);
                        cand = (S::of(1.5) * inv_h, t);
                    }
                }
                if best.map_or(true, |(_, t)| cand.1 < t) {
                    best = Some(cand);
                }
            }
            terms[axis] = best;
        }

        let n = self.speed(i, j);
        let solve_with = |sel: &[(S, S)]| -> Option<S> {
            let mut a = S::zero();
            let mut b = S::zero();
            let mut c = -(n * n);
            for &(w_sqrt, t) in sel {
                let w = w_sqrt * w_sqrt;
                a += w;
                b += w * t;
                c += w * t * t;
            }
            let disc = b * b - a * c;
            if disc < S::zero() {
                return None;
            }
            let u = (b + disc.sqrt()) / a;
            // causality: the solution must sit above every upwind value used
            for &(_, t) in sel {
                if u < t {
                    return None;
                }
            }
            Some(u)
        };

        match (terms[0], terms[1]) {
            (Some(t0), Some(t1)) => {
                let both = [t0, t1];
                if let Some(u) = solve_with(&both) {
                    return u;
                }
                let lone = if t0.1 <= t1.1 { t0 } else { t1 };
                solve_with(&[lone]).unwrap_or(S::infinity())
            }
            (Some(t0), None) => solve_with(&[t0]).unwrap_or(S::infinity()),
            (None, Some(t1)) => solve_with(&[t1]).unwrap_or(S::infinity()),
            (None, None) => S::infinity(),
        }
    }

    fn march(&mut self, stop: S) {
        let pad = S::of(4.0) * self.field.h * S::of(self.metric.amplitude_budget().exp().as_f64());
        let limit = stop + pad;
        while let Some(std::cmp::Reverse((OrdF(d), id))) = self.heap.pop() {
            let id = id as usize;
            if self.field.state[id] == ACCEPTED {
                continue;
            }
            if d > self.field.dist[id] {
                continue; // stale entry
            }
            self.field.state[id] = ACCEPTED;
            if d > limit {
                break;
            }
            let (i, j) = (id % self.field.nx, id / self.field.nx);
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let i1 = i as i64 + di;
                let j1 = j as i64 + dj;
                if i1 < 0 || j1 < 0 || i1 >= self.field.nx as i64 || j1 >= self.field.ny as i64 {
                    continue;
                }
                let id1 = self.field.idx(i1 as usize, j1 as usize);
                let st = self.field.state[id1];
                if st == ACCEPTED || st == FROZEN {
                    continue;
                }
                let u = self.solve(i1 as usize, j1 as usize);
                if u < self.field.dist[id1] {
                    self.field.dist[id1] = u;
                    self.field.state[id1] = NARROW;
                    self.heap.push(std::cmp::Reverse((OrdF(u), id1 as u32)));
                }
            }
        }
    }
}

/// Default node budget for a single field solve.
pub const FIELD_NODE_BUDGET: usize = 6_000_000;

/// Solve the distance field d(source, ·) out to g-distance `stop_radius`.
pub fn distance_field<'a, S: Real>(
    metric: &MetricField<S>,
    grid: &Grid<S>,
    source: FieldSource<'a, S>,
    stop_radius: S,
    budget: usize,
) -> Result<DistanceField<S>> {
    if stop_radius < S::zero() {
        return Err(Error::InvalidParameter("negative field radius".into()));
    }
    let a_bound = metric.amplitude_budget().exp();
    let reach = a_bound * stop_radius;

    let (mut lo, mut hi) = match source {
        FieldSource::Point(p) => (p, p),
        FieldSource::UnitSquare => (Vec2::zero(), Vec2::new(S::one(), S::one())),
        FieldSource::Polyline(pts) => {
            if pts.len() < 2 {
                return Err(Error::TooFewPoints {
                    got: pts.len(),
                    need: 2,
                });
            }
            let mut lo = pts[0];
            let mut hi = pts[0];
            for p in pts {
                lo.x = lo.x.min(p.x);
                lo.y = lo.y.min(p.y);
                hi.x = hi.x.max(p.x);
                hi.y = hi.y.max(p.y);
            }
            (lo, hi)
        }
    };
    lo.x = lo.x - reach;
    lo.y = lo.y - reach;
    hi.x = hi.x + reach;
    hi.y = hi.y + reach;
    for corner in [lo, hi] {
        if !grid.contains(corner) {
            return Err(Error::RegionTooSmall {
                radius: stop_radius.as_f64(),
                halfwidth: grid.halfwidth().as_f64(),
            });
        }
    }

    // Smallest stride whose lattice over the box fits the node budget.
    let n = grid.resolution();
    let extent = (hi.x - lo.x).max(hi.y - lo.y).as_f64() + 0.1;
    let mut stride = 1usize;
    loop {
        let nodes_per_axis = extent * n as f64 / stride as f64 + 4.0;
        if nodes_per_axis * nodes_per_axis <= budget as f64 || stride >= n / 8 {
            break;
        }
        stride *= 2;
    }
    let h = S::of(stride as f64 / n as f64);
    let ix0 = (lo.x / h).floor().as_f64() as i64 - 1;
    let iy0 = (lo.y / h).floor().as_f64() as i64 - 1;
    let nx = ((hi.x / h).ceil().as_f64() as i64 - ix0 + 2) as usize;
    let ny = ((hi.y / h).ceil().as_f64() as i64 - iy0 + 2) as usize;

    let tolerance = S::of(2.0) * h * S::SQRT_2() * a_bound;
    let field = DistanceField {
        h,
        stride,
        ix0,
        iy0,
        nx,
        ny,
        dist: vec![S::infinity(); nx * ny],
        state: vec![FAR; nx * ny],
        stop: stop_radius,
        tolerance,
    };
    let mut fmm = Fmm {
        metric,
        grid,
        field,
        heap: BinaryHeap::new(),
    };

    // Exact initialization band around the source; fast marching takes over
    // beyond it. Band radius a few cells, distances by Simpson quadrature
    // along the straight segment (exact to O(band³)).
    let band = S::of(3.5) * h;
    match source {
        FieldSource::Point(p) => {
            seed_disk(&mut fmm, p, band);
        }
        FieldSource::UnitSquare => {
            let r0 = (S::zero() - band) / h;
            let r1 = (S::one() + band) / h;
            let (i0, i1) = (r0.floor().as_f64() as i64, r1.ceil().as_f64() as i64);
            for gj in i0..=i1 {
                for gi in i0..=i1 {
                    let (i, j) = (gi - fmm.field.ix0, gj - fmm.field.iy0);
                    if i < 0 || j < 0 || i >= fmm.field.nx as i64 || j >= fmm.field.ny as i64 {
                        continue;
                    }
                    let x = fmm.field.node_pos(i as usize, j as usize);
                    let proj = Vec2::new(
                        x.x.max(S::zero()).min(S::one()),
                        x.y.max(S::zero()).min(S::one()),
                    );
                    let de = x.dist(proj);
                    if de <= band {
                        let v = if de == S::zero() {
                            S::zero()
                        } else {
                            metric.segment_length_simpson(proj, x)
                        };
                        fmm.seed(i as usize, j as usize, v);
                    }
                }
            }
        }
        FieldSource::Polyline(pts) => {
            for w in pts.windows(2) {
                seed_segment(&mut fmm, w[0], w[1], band);
            }
        }
    }

    fmm.march(stop_radius);
    Ok(fmm.field)
}

fn seed_disk<S: Real>(fmm: &mut Fmm<S>, p: Vec2<S>, band: S) {
    let h = fmm.field.h;
    let i_lo = ((p.x - band) / h).floor().as_f64() as i64;
    let i_hi = ((p.x + band) / h).ceil().as_f64() as i64;
    let j_lo = ((p.y - band) / h).floor().as_f64() as i64;
    let j_hi = ((p.y + band) / h).ceil().as_f64() as i64;
    for gj in j_lo..=j_hi {
        for gi in i_lo..=i_hi {
            let (i, j) = (gi - fmm.field.ix0, gj - fmm.field.iy0);
            if i < 0 || j < 0 || i >= fmm.field.nx as i64 || j >= fmm.field.ny as i64 {
                continue;
            }
            let x = fmm.field.node_pos(i as usize, j as usize);
            if x.dist(p) <= band {
                let v = fmm.metric.segment_length_simpson(p, x);
                fmm.seed(i as usize, j as usize, v);
            }
        }
    }
}

fn seed_segment<S: Real>(fmm: &mut Fmm<S>, a: Vec2<S>, b: Vec2<S>, band: S) {
    let h = fmm.field.h;
    let lo_x = a.x.min(b.x) - band;
    let hi_x = a.x.max(b.x) + band;
    let lo_y = a.y.min(b.y) - band;
    let hi_y = a.y.max(b.y) + band;
    let i_lo = (lo_x / h).floor().as_f64() as i64;
    let i_hi = (hi_x / h).ceil().as_f64() as i64;
    let j_lo = (lo_y / h).floor().as_f64() as i64;
    let j_hi = (hi_y / h).ceil().as_f64() as i64;
    let ab = b - a;
    let len_sq = ab.norm_sq();
    for gj in j_lo..=j_hi {
        for gi in i_lo..=i_hi {
            let (i, j) = (gi - fmm.field.ix0, gj - fmm.field.iy0);
            if i < 0 || j < 0 || i >= fmm.field.nx as i64 || j >= fmm.field.ny as i64 {
                continue;
            }
            let x = fmm.field.node_pos(i as usize, j as usize);
            let t = if len_sq > S::zero() {
                ((x - a).dot(ab) / len_sq).max(S::zero()).min(S::one())
            } else {
                S::zero()
            };
            let foot = a + ab * t;
            let de = x.dist(foot);
            if de <= band {
                let v = if de == S::zero() {
                    S::zero()
                } else {
                    fmm.metric.segment_length_simpson(foot, x)
                };
                fmm.seed(i as usize, j as usize, v);
            }
        }
    }
}

/// Riemannian area of the geodesic ball B(x, r).
pub fn ball_volume<S: Real>(
    metric: &MetricField<S>,
    grid: &Grid<S>,
    center: Vec2<S>,
    r: S,
) -> Result<S> {
    if r < S::zero() {
        return Err(Error::InvalidParameter("negative ball radius".into()));
    }
    if r == S::zero() {
        return Ok(S::zero());
    }
    let field = distance_field(metric, grid, FieldSource::Point(center), r, FIELD_NODE_BUDGET)?;
    Ok(field.volume_within(grid, r))
}

/// The packing constant C_ε and where it is attained.
#[derive(Clone, Copy, Debug)]
pub struct CEpsilon<S> {
    /// min over probes y of vol(B(y, ε/2))
    pub value: S,
    /// probe attaining the minimum
    pub minimizer: Vec2<S>,
}

/// C_ε = min over a fine grid of y in the fundamental domain of
/// vol(B(y, ε/2)). A coarse scan ranks probes, the best few are re-measured
/// at full resolution together with their neighborhoods.
pub fn c_epsilon<S: Real>(metric: &MetricField<S>, grid: &Grid<S>, eps: S) -> Result<CEpsilon<S>> {
    if eps <= S::zero() {
        return Err(Error::InvalidParameter("c_epsilon needs ε > 0".into()));
    }
    let rho = eps * S::of(0.5);

    let coarse_budget = 40_000;
    let coarse_n = 16usize;
    let mut ranked: Vec<(S, Vec2<S>)> = Vec::new();
    for j in 0..=coarse_n {
        for i in 0..=coarse_n {
            let y = Vec2::new(
                S::of(i as f64 / coarse_n as f64),
                S::of(j as f64 / coarse_n as f64),
            );
            let field = distance_field(metric, grid, FieldSource::Point(y), rho, coarse_budget)?;
            ranked.push((field.volume_within(grid, rho), y));
        }
    }
    ranked.sort_by(|a, b| OrdF(a.0).cmp(&OrdF(b.0)));

    let mut best = (S::infinity(), Vec2::zero());
    let fine_step = S::of(1.0 / (2.0 * coarse_n as f64));
    for &(_, y) in ranked.iter().take(6) {
        for dj in -1i32..=1 {
            for di in -1i32..=1 {
                let probe = Vec2::new(
                    (y.x + S::of(di as f64) * fine_step).max(S::zero()).min(S::one()),
                    (y.y + S::of(dj as f64) * fine_step).max(S::zero()).min(S::one()),
                );
                let v = ball_volume(metric, grid, probe, rho)?;
                if v < best.0 {
                    best = (v, probe);
                }
            }
        }
    }
    Ok(CEpsilon {
        value: best.0,
        minimizer: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_setup() -> (MetricField<f64>, Grid<f64>) {
        let m = MetricField::flat();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        (m, g)
    }

    #[test]
    fn flat_point_field_matches_euclid() {
        let (m, g) = flat_setup();
        let field = distance_field(&m, &g, FieldSource::Point(Vec2::zero()), 3.0, 2_000_000)
            .unwrap();
        for &(x, y) in &[(1.0, 0.0), (0.7, 0.7), (0.0, -2.5), (1.8, 1.2)] {
            let p = Vec2::new(x, y);
            let got = field.value_at(p).unwrap();
            assert!(
                (got - p.norm()).abs() < 6e-3,
                "d({x},{y}) = {got}, want {}",
                p.norm()
            );
        }
    }

    #[test]
    fn flat_ball_volume_is_disk_area() {
        let (m, g) = flat_setup();
        let vol = ball_volume(&m, &g, Vec2::new(0.3, 0.2), 2.0).unwrap();
        let expect = 4.0 * std::f64::consts::PI;
        assert!(
            (vol - expect).abs() < 0.02 * expect,
            "vol = {vol}, want {expect}"
        );
    }

    #[test]
    fn ball_volume_edge_cases() {
        let (m, g) = flat_setup();
        assert_eq!(ball_volume(&m, &g, Vec2::zero(), 0.0).unwrap(), 0.0);
        assert!(ball_volume(&m, &g, Vec2::zero(), -1.0).is_err());
        assert!(ball_volume(&m, &g, Vec2::zero(), 20.0).is_err());
    }

    #[test]
    fn ball_volume_monotone_in_radius() {
        let m = MetricField::cosine_product(0.3).unwrap();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        let mut prev = 0.0;
        for r in [0.5, 1.0, 1.5, 2.0] {
            let v = ball_volume(&m, &g, Vec2::new(0.1, 0.4), r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn bumpy_ball_respects_euclidean_comparison() {
        let m = MetricField::<f64>::cosine_product(0.3).unwrap();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        let a = m.equivalence_constant();
        let (_, max_f) = m.f_range(256);
        for r in [0.5, 1.0, 2.0] {
            let v = ball_volume(&m, &g, Vec2::new(0.7, 0.1), r).unwrap();
            let bound = (2.0 * max_f).exp() * std::f64::consts::PI * (a * r).powi(2);
            assert!(v <= bound * 1.01, "vol {v} vs comparison bound {bound}");
        }
    }

    #[test]
    fn unit_square_field_measures_set_distance() {
        let (m, g) = flat_setup();
        let field =
            distance_field(&m, &g, FieldSource::UnitSquare, 3.0, 2_000_000).unwrap();
        let d = field.value_at(Vec2::new(2.0, 0.5)).unwrap();
        assert!((d - 1.0).abs() < 6e-3, "d = {d}");
        let inside = field.value_at(Vec2::new(0.5, 0.5)).unwrap();
        assert!(inside.abs() < 1e-9);
        // diagonal corner direction
        let d = field.value_at(Vec2::new(-1.0, -1.0)).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 8e-3, "d = {d}");
    }

    #[test]
    fn c_epsilon_flat_is_quarter_disk() {
        let (m, g) = flat_setup();
        let c = c_epsilon(&m, &g, 0.5).unwrap();
        let expect = std::f64::consts::PI * 0.25 * 0.25;
        assert!(
            (c.value - expect).abs() < 0.02 * expect,
            "C_eps = {}, want {expect}",
            c.value
        );
    }

    #[test]
    fn c_epsilon_lower_bound_from_equivalence() {
        let m = MetricField::<f64>::cosine_product(0.3).unwrap();
        let g = Grid::new(&m, 128, 8.0).unwrap();
        let eps = 0.5;
        let c = c_epsilon(&m, &g, eps).unwrap();
        let a = m.equivalence_constant();
        let (min_f, _) = m.f_range(256);
        let floor =
            (2.0 * min_f).exp() * std::f64::consts::PI * (eps / (2.0 * a)).powi(2) * 0.95;
        assert!(c.value >= floor, "C_eps = {} below floor {floor}", c.value);
        assert!(c.value > 0.0);
    }

    #[test]
    fn c_epsilon_rejects_nonpositive() {
        let (m, g) = flat_setup();
        assert!(c_epsilon(&m, &g, 0.0).is_err());
    }
}
