//! Minimal geodesics on the universal cover: construction, certification,
//! rotation numbers, accompanying Euclidean lines, and the order structure
//! (non-crossing, monotone projections) that the entropy machinery relies on.
//!
//! The infinite objects are approximated by central portions of long
//! minimizing segments; the truncation error is measured by an R-doubling
//! stability check rather than assumed. Minimality is certified by comparing
//! dyadic sub-segment lengths against independently computed distances, up to
//! the tolerance the distance discretization itself carries.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{GeodesicPath, PhasePoint, SAMPLE_SPACING};
use crate::scalar::Real;
use crate::space::Space;
use crate::vec2::Vec2;

pub use crate::shortening::{shorten, ShortenOutcome};

/// A Euclidean line with an induced order: the signed parameter along its
/// unit direction.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Line<S> {
    pub base: Vec2<S>,
    /// Unit direction.
    pub direction: Vec2<S>,
}

impl<S: Real> Line<S> {
    pub fn new(base: Vec2<S>, direction: Vec2<S>) -> Self {
        Line {
            base,
            direction: direction.normalized(),
        }
    }

    pub fn through(a: Vec2<S>, b: Vec2<S>) -> Self {
        Line::new(a, b - a)
    }

    pub fn from_angle(base: Vec2<S>, angle: S) -> Self {
        Line {
            base,
            direction: Vec2::from_angle(angle),
        }
    }

    #[inline]
    pub fn point(&self, s: S) -> Vec2<S> {
        self.base + self.direction * s
    }

    /// The induced order: Euclidean projection parameter.
    #[inline]
    pub fn param_of(&self, x: Vec2<S>) -> S {
        (x - self.base).dot(self.direction)
    }

    /// Euclidean distance from x to the line.
    #[inline]
    pub fn euclid_distance(&self, x: Vec2<S>) -> S {
        (x - self.base).cross(self.direction).abs()
    }

    pub fn translated(&self, by: Vec2<S>) -> Self {
        Line {
            base: self.base + by,
            direction: self.direction,
        }
    }
}

/// Rotation number of a lifted minimal geodesic: the slope of its
/// displacement, with ∞ (vertical) encoded as `slope: None`. The rational
/// flag holds a reduced p/q with q ≤ 12 when the slope sits inside the
/// detection window; vertical counts as rational, with flag (1, 0).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rotation<S> {
    pub slope: Option<S>,
    pub rational: Option<(i64, i64)>,
}

impl<S: Real> Rotation<S> {
    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }

    /// Angle in [0, π) of the direction this rotation number describes.
    pub fn angle(&self) -> S {
        match self.slope {
            None => S::FRAC_PI_2(),
            Some(a) => {
                let mut th = a.atan();
                if th < S::zero() {
                    th += S::PI();
                }
                th
            }
        }
    }
}

/// Largest denominator the rational detector searches.
pub const RATIONAL_DENOMINATOR_CAP: i64 = 12;

/// A certified (approximately) minimal geodesic with its accompanying data.
#[derive(Clone, Debug, Serialize)]
pub struct MinimalRecord<S> {
    pub path: GeodesicPath<S>,
    pub rotation: Rotation<S>,
    pub line: Line<S>,
    /// sup over samples of d(c(t), line).
    pub deviation: S,
    /// Worst dyadic sub-segment slack from certification.
    pub minimality_slack: S,
    /// Tolerance the certification ran at.
    pub certified_tol: S,
    /// Sup distance between the central portion and its R-doubled rebuild.
    pub stability_gap: S,
}

impl<S: Real> MinimalRecord<S> {
    pub fn initial_condition(&self) -> PhasePoint<S> {
        self.path.initial_condition()
    }

    /// Deck translation by an integer vector.
    pub fn translated(&self, by: Vec2<S>) -> Self {
        MinimalRecord {
            path: self.path.translated(by),
            rotation: self.rotation,
            line: self.line.translated(by),
            deviation: self.deviation,
            minimality_slack: self.minimality_slack,
            certified_tol: self.certified_tol,
            stability_gap: self.stability_gap,
        }
    }

    /// Shift the parameter origin to `t`.
    pub fn reparametrized(&self, t: S) -> Self {
        MinimalRecord {
            path: self.path.reparametrized(t),
            rotation: self.rotation,
            line: self.line,
            deviation: self.deviation,
            minimality_slack: self.minimality_slack,
            certified_tol: self.certified_tol,
            stability_gap: self.stability_gap,
        }
    }
}

/// Result of a minimality certification.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MinimalityCheck<S> {
    pub minimal: bool,
    pub worst_slack: S,
    pub pairs_tested: usize,
}

/// Options for record construction.
#[derive(Clone, Copy, Debug)]
pub struct RecordOptions {
    /// Run the R-doubling stability rebuild.
    pub stability_check: bool,
    /// Run dyadic minimality certification.
    pub certify: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions {
            stability_check: true,
            certify: true,
        }
    }
}

/// Minimizing geodesic segment from x to y: lattice seed refined by curve
/// shortening, parametrized by arc length from 0 at x.
pub fn minimizing_segment<S: Real>(
    space: &Space<S>,
    x: Vec2<S>,
    y: Vec2<S>,
) -> Result<GeodesicPath<S>> {
    if x.dist(y) < S::of(1e-12) {
        return Err(Error::InvalidParameter(
            "minimizing segment needs distinct endpoints".into(),
        ));
    }
    let refined = space.distance_with_path(x, y)?;
    GeodesicPath::from_polyline(
        space.metric(),
        &refined.polyline,
        S::of(SAMPLE_SPACING),
        S::zero(),
    )
}

/// One-sided sup distance from the samples of `path` restricted to [t0, t1]
/// to the polyline `other`, Euclidean. Used by stability checks and
/// same-image detection.
pub fn one_sided_gap<S: Real>(path: &GeodesicPath<S>, t0: S, t1: S, other: &[Vec2<S>]) -> S {
    let mut worst = S::zero();
    for sample in path.samples() {
        if sample.t < t0 || sample.t > t1 {
            continue;
        }
        let d = polyline_distance_to_point(other, sample.position);
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Same-image detection: two central portions whose mutual Hausdorff
/// distance over their middle halves stays below `threshold` are treated as
/// shifted parametrizations of one geodesic.
pub fn same_image<S: Real>(p1: &GeodesicPath<S>, p2: &GeodesicPath<S>, threshold: S) -> bool {
    let central = |p: &GeodesicPath<S>| {
        let mid = (p.t_start() + p.t_end()) * S::of(0.5);
        let w = (p.t_end() - p.t_start()) * S::of(0.25);
        (mid - w, mid + w)
    };
    let pts1: Vec<Vec2<S>> = p1.samples().iter().map(|s| s.position).collect();
    let pts2: Vec<Vec2<S>> = p2.samples().iter().map(|s| s.position).collect();
    let (a0, a1) = central(p1);
    let (b0, b1) = central(p2);
    one_sided_gap(p1, a0, a1, &pts2) < threshold && one_sided_gap(p2, b0, b1, &pts1) < threshold
}

/// Euclidean distance from a point to a polyline (min over segments).
pub fn polyline_distance_to_point<S: Real>(polyline: &[Vec2<S>], p: Vec2<S>) -> S {
    let mut best = S::infinity();
    for w in polyline.windows(2) {
        let d = point_segment_distance(p, w[0], w[1]);
        if d < best {
            best = d;
        }
    }
    best
}

#[inline]
fn point_segment_distance<S: Real>(p: Vec2<S>, a: Vec2<S>, b: Vec2<S>) -> S {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let t = if len_sq > S::zero() {
        ((p - a).dot(ab) / len_sq).max(S::zero()).min(S::one())
    } else {
        S::zero()
    };
    p.dist(a + ab * t)
}

/// The minimal geodesic accompanying a Euclidean line: central portion, over
/// the parameter window [−R/2, R/2], of the minimizing segment between
/// l(−R) and l(+R). The record carries rotation number, fitted line,
/// deviation, certification slack and the R-doubling stability gap.
pub fn minimal_geodesic_for_line<S: Real>(
    space: &Space<S>,
    line: &Line<S>,
    r: S,
) -> Result<MinimalRecord<S>> {
    minimal_geodesic_for_line_with(space, line, r, &RecordOptions::default())
}

pub fn minimal_geodesic_for_line_with<S: Real>(
    space: &Space<S>,
    line: &Line<S>,
    r: S,
    opts: &RecordOptions,
) -> Result<MinimalRecord<S>> {
    if r < S::of(20.0) {
        return Err(Error::SpanTooShort {
            got: r.as_f64(),
            need: 20.0,
        });
    }
    let metric = space.metric();
    let build = |radius: S| -> Result<GeodesicPath<S>> {
        let a = line.point(-radius);
        let b = line.point(radius);
        let refined = space.distance_with_path(a, b)?;
        let total = refined.value;
        GeodesicPath::from_polyline(
            metric,
            &refined.polyline,
            S::of(SAMPLE_SPACING),
            -total * S::of(0.5),
        )
    };

    let full = build(r)?;
    let half = r * S::of(0.5);
    if !full.covers(-half, half) {
        return Err(Error::SpanTooShort {
            got: (full.t_end() - full.t_start()).as_f64(),
            need: r.as_f64(),
        });
    }
    let central = full.window(metric, -half, half)?;

    let stability_gap = if opts.stability_check {
        let doubled = build(r * S::of(2.0))?;
        let pts: Vec<Vec2<S>> = doubled.samples().iter().map(|s| s.position).collect();
        one_sided_gap(&central, -half, half, &pts)
    } else {
        S::zero()
    };

    let rotation = rotation_number(&central)?;
    let fitted = accompanying_line(&central)?;
    let deviation = deviation_to_line(space, &central, &fitted)?;
    let tol = space.minimality_tolerance();
    let (slack, certified_tol) = if opts.certify {
        let check = is_minimal(space, &central, tol)?;
        (check.worst_slack, tol)
    } else {
        (S::nan(), S::nan())
    };

    Ok(MinimalRecord {
        path: central,
        rotation,
        line: fitted,
        deviation,
        minimality_slack: slack,
        certified_tol,
        stability_gap,
    })
}

/// Dyadic minimality certification: over sub-segments at spacings span/2^k
/// (down to a floor of max(1, span/64)), compare the path length against the
/// independently computed endpoint distance.
pub fn is_minimal<S: Real>(
    space: &Space<S>,
    path: &GeodesicPath<S>,
    tol: S,
) -> Result<MinimalityCheck<S>> {
    if path.samples().len() < 3 {
        return Err(Error::TooFewPoints {
            got: path.samples().len(),
            need: 3,
        });
    }
    let t0 = path.t_start();
    let t1 = path.t_end();
    let span = t1 - t0;
    let floor = S::one().max(span * S::of(1.0 / 64.0));

    let mut pairs: Vec<(S, S)> = Vec::new();
    let mut pieces = 1usize;
    loop {
        let spacing = span / S::of(pieces as f64);
        if spacing < floor {
            break;
        }
        for j in 0..pieces {
            let a = t0 + spacing * S::of(j as f64);
            let b = t0 + spacing * S::of((j + 1) as f64);
            pairs.push((a, b));
        }
        pieces *= 2;
    }

    let metric = space.metric();
    let slacks: Vec<S> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let pts = path.points_between(a, b);
            let len = metric.curve_length_unchecked(&pts);
            let dist = space.distance(path.position_at(a), path.position_at(b))?;
            Ok(len - dist)
        })
        .collect::<Result<Vec<S>>>()?;
    let worst = slacks.iter().copied().fold(S::neg_infinity(), S::max);
    Ok(MinimalityCheck {
        minimal: worst <= tol,
        worst_slack: worst,
        pairs_tested: pairs.len(),
    })
}

/// Rotation number from the displacement slope of the path.
pub fn rotation_number<S: Real>(path: &GeodesicPath<S>) -> Result<Rotation<S>> {
    let span = path.t_end() - path.t_start();
    if span < S::of(20.0 - 1e-6) {
        return Err(Error::SpanTooShort {
            got: span.as_f64(),
            need: 20.0,
        });
    }
    let delta = path.position_at(path.t_end()) - path.position_at(path.t_start());
    if delta.x.abs() < S::of(1e-6) * delta.y.abs() {
        return Ok(Rotation {
            slope: None,
            rational: Some((1, 0)),
        });
    }
    let alpha = delta.y / delta.x;
    let mut rational = None;
    for q in 1..=RATIONAL_DENOMINATOR_CAP {
        let p = (alpha * S::of(q as f64)).round().as_f64() as i64;
        let approx = S::of(p as f64) / S::of(q as f64);
        if (alpha - approx).abs() < S::of(0.5) / (S::of(q as f64) * span) {
            rational = Some((p, q));
            break;
        }
    }
    Ok(Rotation {
        slope: Some(alpha),
        rational,
    })
}

/// Total-least-squares line through the path samples, oriented along the
/// path's displacement.
pub fn accompanying_line<S: Real>(path: &GeodesicPath<S>) -> Result<Line<S>> {
    let span = path.t_end() - path.t_start();
    if span < S::of(20.0 - 1e-6) {
        return Err(Error::SpanTooShort {
            got: span.as_f64(),
            need: 20.0,
        });
    }
    let samples = path.samples();
    let n = S::of(samples.len() as f64);
    let mut mean = Vec2::zero();
    for s in samples {
        mean += s.position;
    }
    mean = mean * n.recip();
    let (mut sxx, mut sxy, mut syy) = (S::zero(), S::zero(), S::zero());
    for s in samples {
        let d = s.position - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // principal axis of the 2×2 covariance
    let theta = S::of(0.5) * (S::of(2.0) * sxy).atan2(sxx - syy);
    let mut dir = Vec2::from_angle(theta);
    let displacement = samples.last().unwrap().position - samples.first().unwrap().position;
    if dir.dot(displacement) < S::zero() {
        dir = -dir;
    }
    Ok(Line {
        base: mean,
        direction: dir,
    })
}

/// sup over samples of d(c(t), line), with the A-scaled Euclidean distance
/// as a pruning bound: the exact point-to-line search runs only where the
/// bound can still beat the running max.
pub fn deviation_to_line<S: Real>(
    space: &Space<S>,
    path: &GeodesicPath<S>,
    line: &Line<S>,
) -> Result<S> {
    let mut order: Vec<(S, Vec2<S>)> = path
        .samples()
        .iter()
        .map(|s| {
            let foot = line.point(line.param_of(s.position));
            (space.distance_upper_bound(s.position, foot), s.position)
        })
        .collect();
    order.sort_by(|p, q| crate::scalar::OrdF(q.0).cmp(&crate::scalar::OrdF(p.0)));
    let mut worst = S::zero();
    for (ub, x) in order {
        if ub <= worst {
            break; // sorted descending: nothing below can beat the max
        }
        let (_, d) = space.project_point_to_line(x, line.base, line.direction)?;
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Aggregated Hedlund constant over a sample of records.
#[derive(Clone, Debug, Serialize)]
pub struct HedlundEstimate<S> {
    pub constant: S,
    pub per_record: Vec<S>,
}

/// D = max over the sample of sup_t d(c(t), l_c).
pub fn hedlund_constant<S: Real>(
    space: &Space<S>,
    records: &[MinimalRecord<S>],
) -> Result<HedlundEstimate<S>> {
    let _ = space;
    if records.is_empty() {
        return Err(Error::InvalidParameter(
            "hedlund constant needs a non-empty sample".into(),
        ));
    }
    for rec in records {
        let span = rec.path.t_end() - rec.path.t_start();
        if span < S::of(40.0) - S::of(1e-9) {
            return Err(Error::SpanTooShort {
                got: span.as_f64(),
                need: 40.0,
            });
        }
    }
    let per_record: Vec<S> = records.iter().map(|r| r.deviation).collect();
    let constant = per_record.iter().copied().fold(S::zero(), S::max);
    Ok(HedlundEstimate {
        constant,
        per_record,
    })
}

/// Parameters of nearest points on `line` for every path sample.
pub fn project_to_line<S: Real>(
    space: &Space<S>,
    path: &GeodesicPath<S>,
    line: &Line<S>,
) -> Result<Vec<S>> {
    path.samples()
        .par_iter()
        .map(|s| {
            space
                .project_point_to_line(s.position, line.base, line.direction)
                .map(|(param, _)| param)
        })
        .collect()
}

/// Strict monotonicity after collapsing consecutive duplicates within `tol`.
pub fn strictly_monotone_after_collapse<S: Real>(params: &[S], tol: S) -> bool {
    let mut collapsed: Vec<S> = Vec::with_capacity(params.len());
    for &p in params {
        if collapsed.last().map_or(true, |&q| (p - q).abs() > tol) {
            collapsed.push(p);
        }
    }
    if collapsed.len() < 2 {
        return true;
    }
    let increasing = collapsed[1] > collapsed[0];
    collapsed.windows(2).all(|w| {
        if increasing {
            w[1] > w[0]
        } else {
            w[1] < w[0]
        }
    })
}

/// Number of transversal intersections of two lifted polylines. Touching
/// (closest approach under 10⁻⁶ without a sign change) does not count.
pub fn crossing_count<S: Real>(path1: &GeodesicPath<S>, path2: &GeodesicPath<S>) -> usize {
    let pts1: Vec<Vec2<S>> = path1.samples().iter().map(|s| s.position).collect();
    let pts2: Vec<Vec2<S>> = path2.samples().iter().map(|s| s.position).collect();
    polyline_crossings(&pts1, &pts2)
}

pub fn polyline_crossings<S: Real>(pts1: &[Vec2<S>], pts2: &[Vec2<S>]) -> usize {
    if pts1.len() < 2 || pts2.len() < 2 {
        return 0;
    }
    // uniform spatial hash over the segments of the second polyline
    let mut cell = S::zero();
    for w in pts2.windows(2) {
        cell = cell.max(w[0].dist(w[1]));
    }
    for w in pts1.windows(2) {
        cell = cell.max(w[0].dist(w[1]));
    }
    let cell = cell.max(S::of(1e-9)) * S::of(2.0);
    use std::collections::HashMap;
    let key = |p: Vec2<S>| -> (i64, i64) {
        (
            (p.x / cell).floor().as_f64() as i64,
            (p.y / cell).floor().as_f64() as i64,
        )
    };
    let mut hash: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
    for (idx, w) in pts2.windows(2).enumerate() {
        let (i0, j0) = key(w[0]);
        let (i1, j1) = key(w[1]);
        for i in i0.min(i1)..=i0.max(i1) {
            for j in j0.min(j1)..=j0.max(j1) {
                hash.entry((i, j)).or_default().push(idx as u32);
            }
        }
    }
    let mut stamp = vec![u32::MAX; pts2.len()];
    let mut count = 0usize;
    for (a_idx, w1) in pts1.windows(2).enumerate() {
        let (a, b) = (w1[0], w1[1]);
        let (i0, j0) = key(a);
        let (i1, j1) = key(b);
        for i in (i0.min(i1) - 1)..=(i0.max(i1) + 1) {
            for j in (j0.min(j1) - 1)..=(j0.max(j1) + 1) {
                let Some(list) = hash.get(&(i, j)) else {
                    continue;
                };
                for &s_idx in list {
                    let s_idx = s_idx as usize;
                    if stamp[s_idx] == a_idx as u32 {
                        continue;
                    }
                    stamp[s_idx] = a_idx as u32;
                    let (c, d) = (pts2[s_idx], pts2[s_idx + 1]);
                    if segments_cross_transversally(a, b, c, d) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Strict straddle test: each segment separates the other's endpoints.
fn segments_cross_transversally<S: Real>(a: Vec2<S>, b: Vec2<S>, c: Vec2<S>, d: Vec2<S>) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    let eps = S::of(1e-18);
    o1 * o2 < -eps && o3 * o4 < -eps
}

/// Initial conditions of certified minimal geodesics, one per requested
/// direction (cycled), through seeded random base points, deck-translated so
/// the parameter-0 footpoint lies in the fundamental domain.
pub fn sample_minimal_conditions<S: Real>(
    space: &Space<S>,
    count: usize,
    directions: &[S],
    span: S,
    rng: &mut impl rand::Rng,
) -> Result<Vec<MinimalRecord<S>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if directions.is_empty() {
        return Err(Error::InvalidParameter("need at least one direction".into()));
    }
    let r = span.max(S::of(20.0));
    // draw bases sequentially for determinism, build records in parallel
    let jobs: Vec<(S, Vec2<S>)> = (0..count)
        .map(|i| {
            let angle = directions[i % directions.len()];
            let base = Vec2::new(S::of(rng.gen::<f64>()), S::of(rng.gen::<f64>()));
            (angle, base)
        })
        .collect();
    let records: Vec<MinimalRecord<S>> = jobs
        .par_iter()
        .map(|&(angle, base)| {
            let line = Line::from_angle(base, angle);
            let rec = minimal_geodesic_for_line(space, &line, r)?;
            let foot = rec.path.position_at(S::zero());
            let (kx, ky) = foot.floor_lattice();
            Ok(rec.translated(Vec2::new(S::of(-(kx as f64)), S::of(-(ky as f64)))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FourierCoeff, MetricField};

    fn flat_space() -> Space<f64> {
        Space::new(MetricField::flat(), 128, 64.0).unwrap()
    }

    fn cos_x1_space() -> Space<f64> {
        let m = MetricField::conformal(vec![FourierCoeff {
            k1: 1,
            k2: 0,
            cos_amp: 0.3,
            sin_amp: 0.0,
        }])
        .unwrap();
        Space::new(m, 128, 64.0).unwrap()
    }

    #[test]
    fn minimizing_segment_flat_is_straight() {
        let s = flat_space();
        let path = minimizing_segment(&s, Vec2::zero(), Vec2::new(3.0, 4.0)).unwrap();
        let len = path.t_end() - path.t_start();
        assert!((len - 5.0).abs() < 1e-3, "length {len}");
        assert!(minimizing_segment(&s, Vec2::zero(), Vec2::zero()).is_err());
    }

    #[test]
    fn minimizing_segment_matches_distance() {
        let s = cos_x1_space();
        let x = Vec2::new(0.2, 0.1);
        let y = Vec2::new(3.1, 2.2);
        let path = minimizing_segment(&s, x, y).unwrap();
        let len = path.t_end() - path.t_start();
        let d = s.distance(x, y).unwrap();
        assert!((len - d).abs() <= 2.0 * s.minimality_tolerance());
    }

    #[test]
    fn long_horizontal_segment_bounded_by_straight_line() {
        let s = cos_x1_space();
        let path = minimizing_segment(&s, Vec2::zero(), Vec2::new(10.0, 0.0)).unwrap();
        let len = path.t_end() - path.t_start();
        // straight-line quadrature bound: ∫₀¹ e^{0.3cos(2πt)} dt · 10 = 10.22627
        assert!(len <= 10.2263 + 2e-3, "length {len}");
        assert!(len >= 10.0, "length {len}");
    }

    #[test]
    fn is_minimal_accepts_straight_rejects_corner() {
        let s = flat_space();
        let m = s.metric();
        let straight = GeodesicPath::from_polyline(
            m,
            &[Vec2::zero(), Vec2::new(4.0, 0.0)],
            SAMPLE_SPACING,
            0.0,
        )
        .unwrap();
        let check = is_minimal(&s, &straight, s.minimality_tolerance()).unwrap();
        assert!(check.minimal);
        assert!(check.worst_slack.abs() < 1e-6);

        let corner = GeodesicPath::from_polyline(
            m,
            &[Vec2::zero(), Vec2::new(1.0, 1.0), Vec2::new(2.0, 0.0)],
            SAMPLE_SPACING,
            0.0,
        )
        .unwrap();
        let check = is_minimal(&s, &corner, s.minimality_tolerance()).unwrap();
        assert!(!check.minimal);
        assert!(check.worst_slack > 0.5);
    }

    #[test]
    fn rotation_numbers_flat() {
        let s = flat_space();
        let m = s.metric();
        let mk = |angle: f64| {
            let dir = Vec2::from_angle(angle);
            GeodesicPath::from_polyline(m, &[dir * -12.0, dir * 12.0], SAMPLE_SPACING, 0.0)
                .unwrap()
        };
        let diag = rotation_number(&mk(std::f64::consts::FRAC_PI_4)).unwrap();
        assert_eq!(diag.rational, Some((1, 1)));
        assert!((diag.slope.unwrap() - 1.0).abs() < 1e-12);

        let vertical = rotation_number(&mk(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(vertical.slope.is_none());
        assert_eq!(vertical.rational, Some((1, 0)));

        let irr = rotation_number(&mk((2.0f64).sqrt().atan())).unwrap();
        assert!(irr.rational.is_none(), "rational flag {:?}", irr.rational);

        let short = GeodesicPath::from_polyline(
            m,
            &[Vec2::zero(), Vec2::new(5.0, 0.0)],
            SAMPLE_SPACING,
            0.0,
        )
        .unwrap();
        assert!(rotation_number(&short).is_err());
    }

    #[test]
    fn rational_detection_on_rational_slopes() {
        let s = flat_space();
        let m = s.metric();
        for (p, q) in [(1i64, 2i64), (2, 3), (5, 1), (3, 4)] {
            let dir = Vec2::new(q as f64, p as f64).normalized();
            let path =
                GeodesicPath::from_polyline(m, &[dir * -15.0, dir * 15.0], SAMPLE_SPACING, 0.0)
                    .unwrap();
            let rot = rotation_number(&path).unwrap();
            assert_eq!(rot.rational, Some((p, q)), "slope {p}/{q}");
        }
    }

    #[test]
    fn accompanying_line_recovers_flat_line() {
        let s = flat_space();
        let m = s.metric();
        let dir = Vec2::from_angle(0.4);
        let off = Vec2::new(1.0, 2.0);
        let path = GeodesicPath::from_polyline(
            m,
            &[dir * -15.0 + off, dir * 15.0 + off],
            SAMPLE_SPACING,
            0.0,
        )
        .unwrap();
        let line = accompanying_line(&path).unwrap();
        assert!(line.direction.cross(dir).abs() < 1e-9);
        let dev = deviation_to_line(&s, &path, &line).unwrap();
        assert!(dev < 1e-9, "residual {dev}");
    }

    #[test]
    fn accompanying_line_bounded_noise() {
        let s = flat_space();
        let m = s.metric();
        // a line plus bounded wiggle ≤ 0.1
        let pts: Vec<Vec2<f64>> = (0..=600)
            .map(|k| {
                let t = -15.0 + 0.05 * k as f64;
                Vec2::new(t, 0.5 * t + 0.1 * (1.3 * t).sin())
            })
            .collect();
        let path = GeodesicPath::from_polyline(m, &pts, SAMPLE_SPACING, 0.0).unwrap();
        let line = accompanying_line(&path).unwrap();
        let worst = path
            .samples()
            .iter()
            .map(|s| line.euclid_distance(s.position))
            .fold(0.0, f64::max);
        assert!(worst <= 0.1 + 1e-6, "sup deviation {worst}");
    }

    #[test]
    fn flat_line_record_has_zero_deviation() {
        let s = flat_space();
        let line = Line::from_angle(Vec2::new(0.3, 0.4), 0.25);
        let rec = minimal_geodesic_for_line(&s, &line, 20.0).unwrap();
        assert!(rec.deviation < 1e-6, "deviation {}", rec.deviation);
        assert!(rec.stability_gap < 1e-2);
        assert!(rec.minimality_slack <= rec.certified_tol);
        assert!(minimal_geodesic_for_line(&s, &line, 10.0).is_err());
    }

    #[test]
    fn projection_on_flat_lines_is_monotone() {
        let s = flat_space();
        let m = s.metric();
        let line = Line::from_angle(Vec2::zero(), 0.0);
        let on = GeodesicPath::from_polyline(
            m,
            &[Vec2::new(-11.0, 0.0), Vec2::new(11.0, 0.0)],
            SAMPLE_SPACING,
            0.0,
        )
        .unwrap();
        let params = project_to_line(&s, &on, &line).unwrap();
        assert!(strictly_monotone_after_collapse(&params, 1e-4));
        for (w, sm) in params.windows(2).zip(on.samples().windows(2)) {
            let dp = w[1] - w[0];
            let dt = sm[1].t - sm[0].t;
            assert!((dp - dt).abs() < 1e-9);
        }
        let off = GeodesicPath::from_polyline(
            m,
            &[Vec2::new(-11.0, 0.5), Vec2::new(11.0, 0.5)],
            SAMPLE_SPACING,
            0.0,
        )
        .unwrap();
        let params = project_to_line(&s, &off, &line).unwrap();
        assert!(strictly_monotone_after_collapse(&params, 1e-4));
    }

    #[test]
    fn crossing_counts_for_lines() {
        let s = flat_space();
        let m = s.metric();
        let mk = |base: Vec2<f64>, angle: f64| {
            let dir = Vec2::from_angle(angle);
            GeodesicPath::from_polyline(
                m,
                &[base + dir * -10.0, base + dir * 10.0],
                SAMPLE_SPACING,
                0.0,
            )
            .unwrap()
        };
        let horizontal = mk(Vec2::zero(), 0.0);
        let slanted = mk(Vec2::new(0.0, 1.0), -0.3);
        assert_eq!(crossing_count(&horizontal, &slanted), 1);

        let parallel = mk(Vec2::new(0.0, 0.7), 0.0);
        assert_eq!(crossing_count(&horizontal, &parallel), 0);
    }

    #[test]
    fn sampled_conditions_live_in_fundamental_domain() {
        let s = flat_space();
        let mut rng = rand::rngs::mock::StepRng::new(12345, 998244353);
        let recs = sample_minimal_conditions(&s, 3, &[0.0, 0.9], 20.0, &mut rng).unwrap();
        assert_eq!(recs.len(), 3);
        for rec in &recs {
            let foot = rec.path.position_at(0.0);
            assert!((0.0..1.0).contains(&foot.x) && (0.0..1.0).contains(&foot.y));
            let v = rec.initial_condition();
            assert!((v.position - foot).norm() < 1e-12);
        }
        assert!(sample_minimal_conditions(&s, 0, &[0.0], 20.0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn monotone_collapse_helper() {
        assert!(strictly_monotone_after_collapse(
            &[0.0, 1.0, 1.00001, 2.0],
            1e-4
        ));
        assert!(strictly_monotone_after_collapse(&[3.0, 2.0, 1.0], 1e-4));
        assert!(!strictly_monotone_after_collapse(&[0.0, 2.0, 1.0], 1e-4));
    }
}
