//! Birkhoff-style curve shortening: iterated replacement of interior nodes by
//! local geodesic midpoints of their neighbors.
//!
//! Replacements are conditional (kept only when the two adjacent segments get
//! shorter), so the polyline length is non-increasing across sweeps by
//! construction. Refinement of a lattice seed runs coarse-to-fine: high
//! frequency zigzag dies in a few sweeps per level, subdividing then handles
//! the next octave. Local geodesic midpoints come from short-range shooting;
//! below a gap threshold the closed-form sagitta correction
//! m ≈ m_E + (L²/8)·(∇f·n̂)n̂ is cheaper and accurate to O(L³).

use crate::flow::rk4_step;
use crate::geometry::MetricField;
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Neighbor gaps at or below this use the analytic sagitta midpoint.
const ANALYTIC_MIDPOINT_MAX: f64 = 0.06;
/// Gaps up to this use two-point shooting; beyond it the perturbative
/// expansions stop making sense and a direct local length minimization along
/// the chord bisector takes over (coarse ladder levels only).
const SHOOT_MIDPOINT_MAX: f64 = 0.35;

/// Result of a shortening run.
#[derive(Clone, Debug)]
pub struct ShortenOutcome<S> {
    pub polyline: Vec<Vec2<S>>,
    pub initial_length: S,
    pub final_length: S,
    pub sweeps: usize,
    /// False when the sweep cap was hit before the per-sweep decrease fell
    /// under the tolerance. Reported, not fatal.
    pub converged: bool,
}

/// Local geodesic midpoint of p and q.
pub fn geodesic_midpoint<S: Real>(metric: &MetricField<S>, p: Vec2<S>, q: Vec2<S>) -> Vec2<S> {
    let chord = q - p;
    let len = chord.norm();
    if len.as_f64() < 1e-12 || metric.is_flat() {
        return p.midpoint(q);
    }
    if len.as_f64() <= ANALYTIC_MIDPOINT_MAX {
        return analytic_midpoint(metric, p, q, chord, len);
    }
    if len.as_f64() <= SHOOT_MIDPOINT_MAX {
        return shoot_midpoint(metric, p, q)
            .unwrap_or_else(|| analytic_midpoint(metric, p, q, chord, len));
    }
    bisector_midpoint(metric, p, q, chord, len)
}

/// Coarse-gap midpoint: one parabolic minimization step of the two-segment
/// length along the perpendicular bisector. Sweeps iterate, so a single step
/// per visit is enough; tangential placement is left to the resampling
/// between ladder levels.
fn bisector_midpoint<S: Real>(
    metric: &MetricField<S>,
    p: Vec2<S>,
    q: Vec2<S>,
    chord: Vec2<S>,
    len: S,
) -> Vec2<S> {
    let mid = p.midpoint(q);
    let normal = chord.perp() * len.recip();
    let cost = |s: S| {
        let z = mid + normal * s;
        metric.segment_length(p, z) + metric.segment_length(z, q)
    };
    let h = len * S::of(0.12);
    let f_m = cost(-h);
    let f_0 = cost(S::zero());
    let f_p = cost(h);
    let denom = f_m - S::of(2.0) * f_0 + f_p;
    let s_star = if denom > S::of(1e-14) {
        let s = h * S::of(0.5) * (f_m - f_p) / denom;
        s.max(-len * S::of(0.35)).min(len * S::of(0.35))
    } else if f_m < f_p && f_m < f_0 {
        -h
    } else if f_p < f_m && f_p < f_0 {
        h
    } else {
        S::zero()
    };
    mid + normal * s_star
}

#[inline]
fn analytic_midpoint<S: Real>(
    metric: &MetricField<S>,
    p: Vec2<S>,
    q: Vec2<S>,
    chord: Vec2<S>,
    len: S,
) -> Vec2<S> {
    let mid = p.midpoint(q);
    let tangent = chord * len.recip();
    let normal = tangent.perp();
    let grad = metric.grad_f(mid);
    // The curvature vector of a g-geodesic is (∇f·n̂)n̂, so the arc joining
    // p and q bulges the opposite way, into the low-f side; the sagitta over
    // a chord of length L is κL²/8. The half-g-arc point also shifts along
    // the chord by (∇f·t̂)L²/8, toward the heavier end.
    let scale = len * len * S::of(0.125);
    mid + (tangent * grad.dot(tangent) - normal * grad.dot(normal)) * scale
}

/// Two-point geodesic midpoint by shooting from p toward q; None when the
/// angle iteration fails to converge.
fn shoot_midpoint<S: Real>(metric: &MetricField<S>, p: Vec2<S>, q: Vec2<S>) -> Option<Vec2<S>> {
    let chord = q - p;
    let len = chord.norm();
    let tangent = chord * len.recip();
    let normal = tangent.perp();

    // one trial: integrate until crossing the normal plane through q;
    // returns (signed miss, g-arc length to the crossing)
    let g_len_est = metric.segment_length(p, q);
    let dt = g_len_est * S::of(0.2);
    let max_steps = ((g_len_est / dt).as_f64() * 2.0 + 8.0) as usize;
    let trial = |theta: S| -> Option<(S, S)> {
        let mut x = p;
        let mut u = Vec2::from_angle(theta) * (-metric.f(p)).exp();
        let mut arc = S::zero();
        for _ in 0..max_steps {
            let (nx, nu) = rk4_step(metric, x, u, dt);
            let s_prev = (x - q).dot(tangent);
            let s_next = (nx - q).dot(tangent);
            if s_prev < S::zero() && s_next >= S::zero() {
                let frac = s_prev / (s_prev - s_next);
                let hit = x.lerp(nx, frac);
                let arc_hit = arc + dt * frac;
                let miss = (hit - q).dot(normal);
                return Some((miss, arc_hit));
            }
            x = nx;
            u = nu;
            arc += dt;
        }
        None
    };

    // walk the converged launch angle out to half the crossing arc
    let land = |theta: S, arc_half: S| -> Vec2<S> {
        let steps = ((arc_half / dt).ceil().as_f64() as usize).max(1);
        let step = arc_half / S::of(steps as f64);
        let mut x = p;
        let mut u = Vec2::from_angle(theta) * (-metric.f(p)).exp();
        for _ in 0..steps {
            let (nx, nu) = rk4_step(metric, x, u, step);
            x = nx;
            u = nu;
        }
        x
    };

    let theta0 = chord.angle();
    let (m0, arc0) = trial(theta0)?;
    let tol = S::of(1e-8) * len.max(S::one());
    if m0.abs() <= tol {
        return Some(land(theta0, arc0 * S::of(0.5)));
    }
    // the miss is nearly linear in the launch angle with slope ≈ len
    let mut th_a = theta0;
    let mut miss_a = m0;
    let mut th_b = theta0 - m0 / len;
    let mut best = (th_b, arc0);
    for _ in 0..6 {
        let (miss_b, arc_b) = trial(th_b)?;
        best = (th_b, arc_b);
        if miss_b.abs() <= tol {
            break;
        }
        let denom = miss_b - miss_a;
        if denom.abs() < S::of(1e-300) {
            break;
        }
        let th_next = th_b - miss_b * (th_b - th_a) / denom;
        th_a = th_b;
        miss_a = miss_b;
        th_b = th_next;
    }
    Some(land(best.0, best.1 * S::of(0.5)))
}

/// One Gauss-Seidel sweep of conditional midpoint replacement. Returns the
/// total length decrease.
fn sweep<S: Real>(metric: &MetricField<S>, pts: &mut [Vec2<S>], backward: bool) -> S {
    let n = pts.len();
    let mut gained = S::zero();
    let idx: Box<dyn Iterator<Item = usize>> = if backward {
        Box::new((1..n - 1).rev())
    } else {
        Box::new(1..n - 1)
    };
    for i in idx {
        let (a, b) = (pts[i - 1], pts[i + 1]);
        let cand = geodesic_midpoint(metric, a, b);
        let old = metric.segment_length(a, pts[i]) + metric.segment_length(pts[i], b);
        let new = metric.segment_length(a, cand) + metric.segment_length(cand, b);
        if new < old {
            pts[i] = cand;
            gained += old - new;
        }
    }
    gained
}

/// Shorten a polyline with fixed endpoints: sweeps of conditional midpoint
/// replacement until the per-sweep decrease drops below `tol` or the sweep
/// cap is reached. Length is non-increasing across sweeps.
pub fn shorten<S: Real>(
    metric: &MetricField<S>,
    polyline: &[Vec2<S>],
    max_sweeps: usize,
    tol: S,
) -> ShortenOutcome<S> {
    let mut pts = dedup(polyline);
    let initial_length = metric.curve_length_unchecked(&pts);
    if pts.len() < 3 {
        return ShortenOutcome {
            polyline: pts,
            initial_length,
            final_length: initial_length,
            sweeps: 0,
            converged: true,
        };
    }
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        let gained = sweep(metric, &mut pts, sweeps % 2 == 1);
        sweeps += 1;
        if gained < tol {
            converged = true;
            break;
        }
    }
    let final_length = metric.curve_length_unchecked(&pts);
    ShortenOutcome {
        polyline: pts,
        initial_length,
        final_length,
        sweeps,
        converged,
    }
}

/// Near-geodesic polyline between p and q by recursive midpoint bisection
/// (no sweeps): each split places the local geodesic midpoint of its
/// endpoints. Gives both a good short-range seed and, through its length, a
/// certified upper bound of d(p, q).
pub fn subdivided_chord<S: Real>(
    metric: &MetricField<S>,
    p: Vec2<S>,
    q: Vec2<S>,
    target_spacing: S,
) -> Vec<Vec2<S>> {
    let gap = p.dist(q);
    let mut levels = 0usize;
    let mut span = gap;
    while span > target_spacing && levels < 8 {
        span *= S::of(0.5);
        levels += 1;
    }
    let mut pts = vec![p, q];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(pts.len() * 2 - 1);
        for w in pts.windows(2) {
            next.push(w[0]);
            next.push(geodesic_midpoint(metric, w[0], w[1]));
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    pts
}

fn dedup<S: Real>(polyline: &[Vec2<S>]) -> Vec<Vec2<S>> {
    let mut pts: Vec<Vec2<S>> = Vec::with_capacity(polyline.len());
    for &p in polyline {
        if pts.last().map_or(true, |&q| p.dist(q) > S::of(1e-13)) {
            pts.push(p);
        }
    }
    if pts.len() == 1 {
        pts.push(pts[0]);
    }
    pts
}

/// Resample a polyline at uniform g-arc-length spacing.
pub fn resample<S: Real>(metric: &MetricField<S>, polyline: &[Vec2<S>], spacing: S) -> Vec<Vec2<S>> {
    let pts = dedup(polyline);
    if pts.len() < 2 {
        return pts;
    }
    let mut cum = Vec::with_capacity(pts.len());
    let mut acc = S::zero();
    cum.push(acc);
    for w in pts.windows(2) {
        acc += metric.segment_length(w[0], w[1]);
        cum.push(acc);
    }
    let total = acc;
    if total <= spacing {
        return vec![pts[0], *pts.last().unwrap()];
    }
    let count = ((total / spacing).round().as_f64() as usize).max(2);
    let ds = total / S::of(count as f64);
    let mut out = Vec::with_capacity(count + 1);
    let mut seg = 0usize;
    for k in 0..=count {
        let target = ds * S::of(k as f64);
        while seg + 2 < cum.len() && cum[seg + 1] < target {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let frac = if span > S::zero() {
            ((target - cum[seg]) / span).max(S::zero()).min(S::one())
        } else {
            S::zero()
        };
        out.push(pts[seg].lerp(pts[seg + 1], frac));
    }
    out
}

/// Coarse-to-fine refinement of a seed polyline toward the geodesic with the
/// same endpoints. Returns a polyline at `target_spacing`.
///
/// The ladder starts at roughly a twelfth of the seed length (capped so that
/// midpoint shooting stays short-range) and halves down to the target: each
/// wavelength of seed error gets smoothed at the level where midpoint
/// replacement damps it fastest. Low-frequency bow surviving the cap is
/// harmless for lengths: a bow of amplitude b and wavelength Λ costs only
/// O(b²·L/Λ²).
pub fn refine_to_geodesic<S: Real>(
    metric: &MetricField<S>,
    seed: &[Vec2<S>],
    target_spacing: S,
) -> Vec<Vec2<S>> {
    let mut pts = dedup(seed);
    if pts.len() < 2 {
        return pts;
    }
    let total = metric.curve_length_unchecked(&pts);
    // a bare chord has no seed error octaves to damp level by level
    let mut spacing = if pts.len() == 2 {
        target_spacing
    } else {
        (total * S::of(1.0 / 12.0)).min(S::one()).max(target_spacing)
    };
    loop {
        pts = resample(metric, &pts, spacing);
        let last = spacing <= target_spacing * S::of(1.001);
        // each level only has to damp its own octave of error; the final
        // level polishes with cheap analytic midpoints, so it gets more
        let cap = if pts.len() < 64 {
            64
        } else if last {
            128
        } else {
            48
        };
        let tol = S::of(1e-10) * total.max(S::one());
        let out = shorten(metric, &pts, cap, tol);
        pts = out.polyline;
        if last {
            break;
        }
        spacing = (spacing * S::of(0.5)).max(target_spacing);
    }
    pts
}
