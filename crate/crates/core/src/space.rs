//! The ambient computational context: a metric, its grid caches, the
//! measured equivalence constant, and the distance engines every higher
//! module calls into.
//!
//! Point-to-point distances follow the two-stage route: a lattice shortest
//! path (homotopy-correct upper bound) refined by curve shortening. Values
//! are therefore upper bounds of the true distance with a documented
//! tolerance, computed once per unordered pair (so symmetry is exact).
//!
//! The dynamical distance d̄(v,w)_T = max over sampled t ∈ [0, T+1] of
//! d(c_v(t), c_w(t)) prunes exact distance evaluations with the equivalence
//! bracket d_E/A ≤ d ≤ A·d_E, the one-segment chord length as a sharper upper
//! bound, and the Lipschitz bound |d(t) − d(s)| ≤ 2|t − s| that unit speed
//! gives for free.

use crate::error::{Error, Result};
use crate::flow::{integrate, GeodesicPath, PhasePoint, SAMPLE_SPACING};
use crate::geometry::{pairwise_distance, Grid, MetricField, PairwiseParams};
use crate::scalar::Real;
use crate::shortening::{refine_to_geodesic, resample, subdivided_chord};
use crate::vec2::Vec2;

/// Tunables of the distance machinery.
#[derive(Clone, Copy, Debug)]
pub struct NumericParams<S> {
    /// Node cap for one lattice shortest-path query.
    pub node_budget: usize,
    /// Final polyline spacing for short-range queries.
    pub fine_spacing_short: S,
    /// Final polyline spacing for long-range queries.
    pub fine_spacing_long: S,
    /// Queries at or below this Euclidean gap count as short-range.
    pub short_query_max: S,
    /// Queries at or below this Euclidean gap skip the lattice seed and
    /// refine the straight chord directly.
    pub chord_seed_max: S,
    /// Time step between samples of the dynamical distance.
    pub dbar_dt: S,
    /// Integration step used when a dynamical distance needs to integrate
    /// phase points.
    pub flow_step: S,
    /// Final polyline spacing of the quick distance grade used inside
    /// threshold decisions (net conflicts, d̄ pruning, projections).
    pub quick_spacing: S,
}

impl<S: Real> Default for NumericParams<S> {
    fn default() -> Self {
        NumericParams {
            node_budget: 2_500_000,
            fine_spacing_short: S::of(0.01),
            fine_spacing_long: S::of(0.025),
            short_query_max: S::of(4.0),
            chord_seed_max: S::of(0.75),
            dbar_dt: S::of(SAMPLE_SPACING),
            flow_step: S::of(1e-3),
            quick_spacing: S::of(0.03),
        }
    }
}

/// A refined point-to-point distance: value plus the realizing polyline.
#[derive(Clone, Debug)]
pub struct RefinedDistance<S> {
    pub value: S,
    pub polyline: Vec<Vec2<S>>,
    /// Tolerance budget of the lattice seed stage, 2·(cell diagonal)·e^{max f}.
    pub seed_tolerance: S,
}

#[derive(Clone, Debug)]
pub struct Space<S> {
    metric: MetricField<S>,
    grid: Grid<S>,
    equivalence: S,
    f_min: S,
    f_max: S,
    params: NumericParams<S>,
}

impl<S: Real> Space<S> {
    pub fn new(metric: MetricField<S>, resolution: usize, halfwidth: S) -> Result<Self> {
        let grid = Grid::new(&metric, resolution, halfwidth)?;
        let equivalence = metric.equivalence_constant();
        let (f_min, f_max) = metric.f_range(1024);
        Ok(Space {
            metric,
            grid,
            equivalence,
            f_min,
            f_max,
            params: NumericParams::default(),
        })
    }

    pub fn with_params(mut self, params: NumericParams<S>) -> Self {
        self.params = params;
        self
    }

    pub fn metric(&self) -> &MetricField<S> {
        &self.metric
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn params(&self) -> &NumericParams<S> {
        &self.params
    }

    /// The measured equivalence constant A.
    pub fn equivalence_constant(&self) -> S {
        self.equivalence
    }

    pub fn f_range(&self) -> (S, S) {
        (self.f_min, self.f_max)
    }

    /// 1/A·d_E: a certified lower bound for d.
    #[inline]
    pub fn distance_lower_bound(&self, x: Vec2<S>, y: Vec2<S>) -> S {
        x.dist(y) / self.equivalence
    }

    /// min(A·d_E, chord g-length): a certified upper bound for d. The chord
    /// length uses composite Simpson quadrature with a margin covering its
    /// error, so the bound never undershoots.
    pub fn distance_upper_bound(&self, x: Vec2<S>, y: Vec2<S>) -> S {
        let de = x.dist(y);
        let pieces = ((de.as_f64() / 0.25).ceil() as usize).max(1);
        let step = S::one() / S::of(pieces as f64);
        let mut chord = S::zero();
        for k in 0..pieces {
            let p = x.lerp(y, step * S::of(k as f64));
            let q = x.lerp(y, step * S::of((k + 1) as f64));
            chord += self.metric.segment_length_simpson(p, q);
        }
        chord += S::of(0.005) * de;
        (self.equivalence * de).min(chord)
    }

    /// The Riemannian distance d(x, y) on the universal cover.
    ///
    /// Computed once per unordered pair, so exactly symmetric.
    pub fn distance(&self, x: Vec2<S>, y: Vec2<S>) -> Result<S> {
        if self.metric.is_flat() {
            self.grid.check_contains(x)?;
            self.grid.check_contains(y)?;
            return Ok(x.dist(y));
        }
        let swap = (y.x, y.y) < (x.x, x.y);
        let (a, b) = if swap { (y, x) } else { (x, y) };
        Ok(self.distance_with_path(a, b)?.value)
    }

    /// Distance together with the realizing polyline from x to y.
    pub fn distance_with_path(&self, x: Vec2<S>, y: Vec2<S>) -> Result<RefinedDistance<S>> {
        self.grid.check_contains(x)?;
        self.grid.check_contains(y)?;
        let de = x.dist(y);
        if de < S::of(1e-12) {
            return Ok(RefinedDistance {
                value: S::zero(),
                polyline: vec![x, y],
                seed_tolerance: S::zero(),
            });
        }
        if self.metric.is_flat() {
            // straight segments are exactly geodesic
            return Ok(RefinedDistance {
                value: de,
                polyline: vec![x, y],
                seed_tolerance: S::zero(),
            });
        }
        let p = &self.params;
        let fine = if de <= p.short_query_max {
            p.fine_spacing_short
        } else {
            p.fine_spacing_long
        };
        if de <= p.chord_seed_max {
            let seed = subdivided_chord(&self.metric, x, y, fine);
            let out = crate::shortening::shorten(
                &self.metric,
                &seed,
                96,
                S::of(1e-11) * de.max(S::one()),
            );
            let value = self.metric.curve_length_unchecked(&out.polyline);
            return Ok(RefinedDistance {
                value,
                polyline: out.polyline,
                seed_tolerance: S::zero(),
            });
        }
        let pw = PairwiseParams {
            a_upper: self.equivalence * S::of(1.001),
            node_budget: p.node_budget,
        };
        let out = pairwise_distance(&self.metric, &self.grid, x, y, &pw)?;
        let polyline = refine_to_geodesic(&self.metric, &out.polyline, fine);
        let value = self.metric.curve_length_unchecked(&polyline);
        Ok(RefinedDistance {
            value,
            polyline,
            seed_tolerance: out.tolerance,
        })
    }

    /// Quick-grade distance: same seeds, coarser refinement. Used for
    /// threshold decisions where ~0.3 % relative accuracy is plenty; the
    /// value is still an upper bound of the true distance and still exactly
    /// symmetric.
    pub fn distance_quick(&self, x: Vec2<S>, y: Vec2<S>) -> Result<S> {
        if self.metric.is_flat() {
            self.grid.check_contains(x)?;
            self.grid.check_contains(y)?;
            return Ok(x.dist(y));
        }
        let swap = (y.x, y.y) < (x.x, x.y);
        let (a, b) = if swap { (y, x) } else { (x, y) };
        self.grid.check_contains(a)?;
        self.grid.check_contains(b)?;
        let de = a.dist(b);
        if de < S::of(1e-12) {
            return Ok(S::zero());
        }
        let p = &self.params;
        if de <= p.chord_seed_max {
            let seed = subdivided_chord(&self.metric, a, b, p.quick_spacing);
            let out = crate::shortening::shorten(
                &self.metric,
                &seed,
                24,
                S::of(1e-10) * de.max(S::one()),
            );
            return Ok(self.metric.curve_length_unchecked(&out.polyline));
        }
        let pw = PairwiseParams {
            a_upper: self.equivalence * S::of(1.001),
            node_budget: p.node_budget,
        };
        let seed = pairwise_distance(&self.metric, &self.grid, a, b, &pw)?.polyline;
        let polyline = refine_to_geodesic(&self.metric, &seed, p.quick_spacing);
        Ok(self.metric.curve_length_unchecked(&polyline))
    }

    /// Certification tolerance for minimality checks:
    /// 3·(grid cell diagonal)·e^{max f}.
    pub fn minimality_tolerance(&self) -> S {
        let h = S::of(1.0) / S::of(self.grid.resolution() as f64);
        S::of(3.0) * h * S::SQRT_2() * self.f_max.exp()
    }

    /// Uniform sample times covering [t0, t1] at ≤ dbar_dt spacing.
    pub fn time_samples(&self, t0: S, t1: S) -> Vec<S> {
        let span = t1 - t0;
        let count = ((span / self.params.dbar_dt).ceil().as_f64() as usize).max(1);
        let dt = span / S::of(count as f64);
        (0..=count).map(|k| t0 + dt * S::of(k as f64)).collect()
    }

    /// Exact max over the given sample times of d(c_v(t), c_w(t)).
    pub fn sampled_max_distance(
        &self,
        pv: &GeodesicPath<S>,
        pw: &GeodesicPath<S>,
        times: &[S],
    ) -> Result<S> {
        debug_assert!(!times.is_empty());
        let pairs: Vec<(Vec2<S>, Vec2<S>)> = times
            .iter()
            .map(|&t| (pv.position_at(t), pw.position_at(t)))
            .collect();
        if self.metric.is_flat() {
            return Ok(pairs
                .iter()
                .map(|&(a, b)| a.dist(b))
                .fold(S::zero(), |m, v| m.max(v)));
        }
        let n = times.len();
        let mut upper: Vec<S> = pairs
            .iter()
            .map(|&(a, b)| self.distance_upper_bound(a, b))
            .collect();
        let mut evaluated = vec![false; n];
        let mut best = S::zero();

        // start from the largest Euclidean gap
        let mut start = 0usize;
        let mut g_best = S::neg_infinity();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let g = a.dist(b);
            if g > g_best {
                g_best = g;
                start = i;
            }
        }
        let mut next = Some(start);
        while let Some(i) = next {
            let d = self.distance_quick(pairs[i].0, pairs[i].1)?;
            evaluated[i] = true;
            if d > best {
                best = d;
            }
            // |d(t) − d(s)| ≤ 2|t − s| at unit speed
            for j in 0..n {
                if !evaluated[j] {
                    let lip = d + S::of(2.0) * (times[j] - times[i]).abs();
                    if lip < upper[j] {
                        upper[j] = lip;
                    }
                }
            }
            next = None;
            let mut ub_best = best;
            for j in 0..n {
                if !evaluated[j] && upper[j] > ub_best {
                    ub_best = upper[j];
                    next = Some(j);
                }
            }
        }
        Ok(best)
    }

    /// Decide whether the sampled max distance exceeds `threshold` without
    /// necessarily computing it: equivalence and chord bounds first, exact
    /// evaluations (largest Euclidean gap first, Lipschitz-pruned) only in
    /// the undecided band.
    pub fn sampled_max_exceeds(
        &self,
        pv: &GeodesicPath<S>,
        pw: &GeodesicPath<S>,
        times: &[S],
        threshold: S,
    ) -> Result<bool> {
        let pairs: Vec<(Vec2<S>, Vec2<S>)> = times
            .iter()
            .map(|&t| (pv.position_at(t), pw.position_at(t)))
            .collect();
        if self.metric.is_flat() {
            return Ok(pairs.iter().any(|&(a, b)| a.dist(b) > threshold));
        }
        let a_equiv = self.equivalence;
        let mut upper: Vec<S> = Vec::with_capacity(pairs.len());
        for &(a, b) in &pairs {
            if a.dist(b) / a_equiv > threshold {
                return Ok(true);
            }
            upper.push(self.distance_upper_bound(a, b));
        }
        let n = times.len();
        let mut evaluated = vec![false; n];
        loop {
            let mut next = None;
            let mut ub_best = threshold;
            for j in 0..n {
                if !evaluated[j] && upper[j] > ub_best {
                    ub_best = upper[j];
                    next = Some(j);
                }
            }
            let Some(i) = next else {
                return Ok(false);
            };
            let d = self.distance_quick(pairs[i].0, pairs[i].1)?;
            if d > threshold {
                return Ok(true);
            }
            evaluated[i] = true;
            for j in 0..n {
                if !evaluated[j] {
                    let lip = d + S::of(2.0) * (times[j] - times[i]).abs();
                    if lip < upper[j] {
                        upper[j] = lip;
                    }
                }
            }
        }
    }

    /// Does d̄(v,w)_T exceed eps? (Threshold form of the dynamical distance.)
    pub fn dbar_exceeds(
        &self,
        pv: &GeodesicPath<S>,
        pw: &GeodesicPath<S>,
        t: S,
        eps: S,
    ) -> Result<bool> {
        let hi = t + S::one();
        for p in [pv, pw] {
            if !p.covers(S::zero(), hi) {
                return Err(Error::HorizonExceeded {
                    requested: hi.as_f64(),
                    limit: p.t_end().as_f64(),
                });
            }
        }
        let times = self.time_samples(S::zero(), hi);
        self.sampled_max_exceeds(pv, pw, &times, eps)
    }

    /// d̄(v,w)_T = max over sampled t ∈ [0, T+1] of d(c_v(t), c_w(t)),
    /// on stored paths.
    pub fn dynamical_distance_paths(
        &self,
        pv: &GeodesicPath<S>,
        pw: &GeodesicPath<S>,
        t: S,
    ) -> Result<S> {
        let hi = t + S::one();
        for p in [pv, pw] {
            if !p.covers(S::zero(), hi) {
                return Err(Error::HorizonExceeded {
                    requested: hi.as_f64(),
                    limit: p.t_end().as_f64(),
                });
            }
        }
        let times = self.time_samples(S::zero(), hi);
        self.sampled_max_distance(pv, pw, &times)
    }

    /// d̄(v,w)_T for phase points, integrating both orbits first.
    pub fn dynamical_distance(&self, v: PhasePoint<S>, w: PhasePoint<S>, t: S) -> Result<S> {
        let hi = t + S::one();
        let pv = integrate(&self.metric, v, hi, self.params.flow_step)?;
        let pw = integrate(&self.metric, w, hi, self.params.flow_step)?;
        self.dynamical_distance_paths(&pv, &pw, t)
    }

    /// Two-sided tube distance: max over sampled |t| ≤ t_max of
    /// d(c_v(t), c_w(t)).
    pub fn sup_distance_two_sided(
        &self,
        pv: &GeodesicPath<S>,
        pw: &GeodesicPath<S>,
        t_max: S,
    ) -> Result<S> {
        for p in [pv, pw] {
            if !p.covers(-t_max, t_max) {
                return Err(Error::HorizonExceeded {
                    requested: t_max.as_f64(),
                    limit: p.t_end().as_f64(),
                });
            }
        }
        let times = self.time_samples(-t_max, t_max);
        self.sampled_max_distance(pv, pw, &times)
    }

    /// Riemannian distance from x to the line point l(s), as a function the
    /// projection search minimizes.
    pub fn distance_to_line_point(&self, x: Vec2<S>, base: Vec2<S>, dir: Vec2<S>, s: S) -> Result<S> {
        self.distance(x, base + dir * s)
    }

    /// Nearest line parameter and distance: Euclidean foot refined by a
    /// bracketed golden-section search, bracket width from the equivalence
    /// bound |s* − s0| ≤ A²·d_E(x, l).
    pub fn project_point_to_line(&self, x: Vec2<S>, base: Vec2<S>, dir: Vec2<S>) -> Result<(S, S)> {
        let rel = x - base;
        let s0 = rel.dot(dir);
        let foot_gap = (rel - dir * s0).norm();
        if self.metric.is_flat() {
            return Ok((s0, foot_gap));
        }
        let a = self.equivalence;
        let w = (a * a - S::one()) * foot_gap + S::of(0.05);
        let mut lo = s0 - w;
        let mut hi = s0 + w;
        // coarse bracket scan, then golden section
        let mut best = (S::infinity(), s0);
        let scans = 6usize;
        for k in 0..=scans {
            let s = lo + (hi - lo) * S::of(k as f64 / scans as f64);
            let d = self.distance_quick(x, base + dir * s)?;
            if d < best.0 {
                best = (d, s);
            }
        }
        let step = (hi - lo) * S::of(1.0 / scans as f64);
        lo = best.1 - step;
        hi = best.1 + step;
        let phi = S::of(0.618_033_988_749_894_9);
        let mut c = hi - (hi - lo) * phi;
        let mut d_pt = lo + (hi - lo) * phi;
        let mut fc = self.distance_quick(x, base + dir * c)?;
        let mut fd = self.distance_quick(x, base + dir * d_pt)?;
        for _ in 0..16 {
            if (hi - lo).abs() < S::of(1e-6) {
                break;
            }
            if fc < fd {
                hi = d_pt;
                d_pt = c;
                fd = fc;
                c = hi - (hi - lo) * phi;
                fc = self.distance_quick(x, base + dir * c)?;
            } else {
                lo = c;
                c = d_pt;
                fc = fd;
                d_pt = lo + (hi - lo) * phi;
                fd = self.distance_quick(x, base + dir * d_pt)?;
            }
        }
        let s_star = (lo + hi) * S::of(0.5);
        let d_star = self.distance_quick(x, base + dir * s_star)?.min(best.0);
        Ok((s_star, d_star))
    }

    /// Resample helper re-exported for callers that shorten by hand.
    pub fn resample_polyline(&self, pts: &[Vec2<S>], spacing: S) -> Vec<Vec2<S>> {
        resample(&self.metric, pts, spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FourierCoeff;

    fn cos_x1_space() -> Space<f64> {
        let m = MetricField::conformal(vec![FourierCoeff {
            k1: 1,
            k2: 0,
            cos_amp: 0.3,
            sin_amp: 0.0,
        }])
        .unwrap();
        Space::new(m, 128, 16.0).unwrap()
    }

    #[test]
    fn flat_distance_is_euclidean() {
        let s = Space::new(MetricField::<f64>::flat(), 128, 16.0).unwrap();
        let d = s.distance(Vec2::zero(), Vec2::new(3.0, 4.0)).unwrap();
        assert_eq!(d, 5.0);
        let with_path = s
            .distance_with_path(Vec2::zero(), Vec2::new(3.0, 4.0))
            .unwrap();
        assert!((with_path.value - 5.0).abs() < 1e-3);
    }

    #[test]
    fn zero_distance_for_identical_points() {
        let s = cos_x1_space();
        let p = Vec2::new(0.4, 0.9);
        assert_eq!(s.distance(p, p).unwrap(), 0.0);
    }

    #[test]
    fn horizontal_unit_distance_matches_quadrature() {
        // f depends only on x₁, so every path from x₁=0 to x₁=1 has length
        // ≥ ∫ e^{f}|dx₁| and the straight horizontal segment is minimal.
        let s = cos_x1_space();
        let mut oracle = 0.0;
        let n = 4000;
        for k in 0..n {
            let t0 = k as f64 / n as f64;
            let t1 = (k + 1) as f64 / n as f64;
            let tm = 0.5 * (t0 + t1);
            let f = |t: f64| (0.3 * (std::f64::consts::TAU * t).cos()).exp();
            oracle += (t1 - t0) / 6.0 * (f(t0) + 4.0 * f(tm) + f(t1));
        }
        let d = s.distance(Vec2::zero(), Vec2::new(1.0, 0.0)).unwrap();
        assert!(d <= oracle + 1e-3, "d = {d}, straight-line length {oracle}");
        assert!((d - oracle).abs() < 3e-3, "d = {d}, oracle {oracle}");
    }

    #[test]
    fn distance_is_exactly_symmetric() {
        let s = cos_x1_space();
        let x = Vec2::new(0.17, 0.62);
        let y = Vec2::new(2.4, 1.13);
        assert_eq!(s.distance(x, y).unwrap(), s.distance(y, x).unwrap());
    }

    #[test]
    fn distance_within_equivalence_band() {
        let s = cos_x1_space();
        let a = s.equivalence_constant();
        let pairs = [
            (Vec2::new(0.2, 0.3), Vec2::new(1.7, 0.4)),
            (Vec2::new(-1.0, 0.0), Vec2::new(0.3, 2.2)),
            (Vec2::new(0.5, 0.5), Vec2::new(0.9, 0.5)),
        ];
        for (x, y) in pairs {
            let d = s.distance(x, y).unwrap();
            let de = x.dist(y);
            assert!(d >= de / a - 1e-6, "pair {x:?} {y:?}");
            assert!(d <= a * de + 1e-6, "pair {x:?} {y:?}");
        }
    }

    #[test]
    fn dbar_flat_parallel_lines() {
        let s = Space::new(MetricField::<f64>::flat(), 128, 32.0).unwrap();
        let v = PhasePoint::new(Vec2::zero(), 0.0);
        let w = PhasePoint::new(Vec2::new(0.0, 0.5), 0.0);
        for t in [1.0, 5.0, 10.0] {
            let d = s.dynamical_distance(v, w, t).unwrap();
            assert!((d - 0.5).abs() < 1e-9, "T={t}: {d}");
        }
    }

    #[test]
    fn dbar_flat_angular_spread() {
        let s = Space::new(MetricField::<f64>::flat(), 128, 32.0).unwrap();
        let psi = 0.3f64;
        let v = PhasePoint::new(Vec2::zero(), 0.0);
        let w = PhasePoint::new(Vec2::zero(), psi);
        let t = 7.0;
        let d = s.dynamical_distance(v, w, t).unwrap();
        let expect = (t + 1.0) * 2.0 * (psi / 2.0).sin();
        assert!((d - expect).abs() < 1e-6, "{d} vs {expect}");
        assert_eq!(s.dynamical_distance(v, v, t).unwrap(), 0.0);
    }

    #[test]
    fn dbar_monotone_in_t() {
        let s = cos_x1_space();
        let v = PhasePoint::new(Vec2::new(0.1, 0.0), 0.2);
        let w = PhasePoint::new(Vec2::new(0.3, 0.4), 0.5);
        let mut prev = 0.0;
        for t in [1.0, 2.0, 4.0, 8.0] {
            let d = s.dynamical_distance(v, w, t).unwrap();
            assert!(d >= prev - 1e-12, "T={t}");
            prev = d;
        }
    }

    #[test]
    fn dbar_dominates_endpoints() {
        let s = cos_x1_space();
        let v = PhasePoint::new(Vec2::new(0.1, 0.0), 0.9);
        let w = PhasePoint::new(Vec2::new(0.6, 0.2), 1.2);
        let t = 4.0;
        let pv = integrate(s.metric(), v, t + 1.0, 1e-3).unwrap();
        let pw = integrate(s.metric(), w, t + 1.0, 1e-3).unwrap();
        let dbar = s.dynamical_distance_paths(&pv, &pw, t).unwrap();
        let d0 = s.distance(pv.position_at(0.0), pw.position_at(0.0)).unwrap();
        let d1 = s
            .distance(pv.position_at(t + 1.0), pw.position_at(t + 1.0))
            .unwrap();
        assert!(dbar >= d0.max(d1) - 1e-9);
    }

    #[test]
    fn project_point_to_line_flat_is_euclidean_foot() {
        let s = Space::new(MetricField::<f64>::flat(), 128, 16.0).unwrap();
        let base = Vec2::new(1.0, 1.0);
        let dir = Vec2::new(0.6, 0.8);
        let x = base + dir * 3.0 + dir.perp() * 0.7;
        let (s_star, d) = s.project_point_to_line(x, base, dir).unwrap();
        assert!((s_star - 3.0).abs() < 1e-12);
        assert!((d - 0.7).abs() < 1e-12);
    }
}
