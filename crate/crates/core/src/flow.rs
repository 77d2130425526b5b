//! The geodesic flow on the unit tangent bundle, lifted to the universal
//! cover, and the sampled-path representation every other module works with.
//!
//! Geodesics solve ẍ^k + Γ^k_{ij} ẋ^i ẋ^j = 0. The integrator is classical
//! fourth-order Runge-Kutta with the g-speed renormalized to 1 after every
//! step; the paper's estimates are metric statements about unit-speed
//! parametrizations, so exact unit speed is the invariant worth preserving.
//! Because speed is unit, the time parameter of every `GeodesicPath` *is*
//! g-arc-length.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Largest admissible integration step.
pub const MAX_STEP: f64 = 1e-2;
/// Largest admissible integration horizon.
pub const MAX_HORIZON: f64 = 512.0;
/// Default arc-length spacing of stored path samples. The sampled max in the
/// dynamical distance misses the continuous max by at most twice this value,
/// which is folded into every tolerance that consumes it.
pub const SAMPLE_SPACING: f64 = 0.05;

/// A point of the unit tangent bundle over ℝ²: footpoint plus direction
/// angle. The velocity is the g-unit vector e^{−f(x)}·(cos θ, sin θ).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhasePoint<S> {
    pub position: Vec2<S>,
    pub theta: S,
}

impl<S: Real> PhasePoint<S> {
    pub fn new(position: Vec2<S>, theta: S) -> Self {
        let tau = S::of(std::f64::consts::TAU);
        let mut t = theta % tau;
        if t < S::zero() {
            t += tau;
        }
        PhasePoint { position, theta: t }
    }

    /// The stored velocity: g-unit by construction.
    pub fn velocity(&self, metric: &MetricField<S>) -> Vec2<S> {
        Vec2::from_angle(self.theta) * (-metric.f(self.position)).exp()
    }

    pub fn reversed(&self) -> Self {
        PhasePoint::new(self.position, self.theta + S::PI())
    }
}

/// One stored sample of a unit-speed geodesic.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PathSample<S> {
    /// Arc-length parameter.
    pub t: S,
    pub position: Vec2<S>,
    /// Direction angle of the velocity.
    pub theta: S,
}

/// An arc-length-sampled lifted geodesic: uniform parameter spacing,
/// positions interpolated linearly between samples.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicPath<S> {
    samples: Vec<PathSample<S>>,
    spacing: S,
}

impl<S: Real> GeodesicPath<S> {
    pub fn from_samples(samples: Vec<PathSample<S>>, spacing: S) -> Self {
        debug_assert!(samples.len() >= 2);
        GeodesicPath { samples, spacing }
    }

    /// Resample a polyline by g-arc-length at the given spacing. The
    /// parameter of the first polyline point is `t0`; tangent angles come
    /// from the local chords.
    pub fn from_polyline(
        metric: &MetricField<S>,
        polyline: &[Vec2<S>],
        spacing: S,
        t0: S,
    ) -> Result<Self> {
        if polyline.len() < 2 {
            return Err(Error::TooFewPoints {
                got: polyline.len(),
                need: 2,
            });
        }
        let mut cum = Vec::with_capacity(polyline.len());
        let mut acc = S::zero();
        cum.push(acc);
        for w in polyline.windows(2) {
            acc += metric.segment_length(w[0], w[1]);
            cum.push(acc);
        }
        let total = acc;
        let count = (total / spacing).round().as_f64().max(1.0) as usize;
        let ds = total / S::of(count as f64);
        let mut samples = Vec::with_capacity(count + 1);
        let mut seg = 0usize;
        for k in 0..=count {
            let target = ds * S::of(k as f64);
            while seg + 2 < cum.len() && cum[seg + 1] < target {
                seg += 1;
            }
            let seg_len = cum[seg + 1] - cum[seg];
            let frac = if seg_len > S::zero() {
                ((target - cum[seg]) / seg_len).max(S::zero()).min(S::one())
            } else {
                S::zero()
            };
            let pos = polyline[seg].lerp(polyline[seg + 1], frac);
            let dir = polyline[seg + 1] - polyline[seg];
            let theta = if dir.norm_sq() > S::zero() {
                dir.angle()
            } else {
                S::zero()
            };
            samples.push(PathSample {
                t: t0 + target,
                position: pos,
                theta,
            });
        }
        Ok(GeodesicPath {
            samples,
            spacing: ds,
        })
    }

    pub fn samples(&self) -> &[PathSample<S>] {
        &self.samples
    }

    pub fn spacing(&self) -> S {
        self.spacing
    }

    pub fn t_start(&self) -> S {
        self.samples.first().unwrap().t
    }

    pub fn t_end(&self) -> S {
        self.samples.last().unwrap().t
    }

    pub fn covers(&self, t0: S, t1: S) -> bool {
        let slack = self.spacing * S::of(1e-6);
        self.t_start() <= t0 + slack && self.t_end() + slack >= t1
    }

    fn locate(&self, t: S) -> (usize, S) {
        let rel = (t - self.t_start()) / self.spacing;
        let idx = rel.floor().as_f64().max(0.0) as usize;
        let idx = idx.min(self.samples.len() - 2);
        let frac = (rel - S::of(idx as f64)).max(S::zero()).min(S::one());
        (idx, frac)
    }

    /// Position at parameter t (linear interpolation, clamped to the span).
    pub fn position_at(&self, t: S) -> Vec2<S> {
        let (i, frac) = self.locate(t);
        self.samples[i]
            .position
            .lerp(self.samples[i + 1].position, frac)
    }

    pub fn theta_at(&self, t: S) -> S {
        let (i, frac) = self.locate(t);
        // interpolate on the chord direction, not the raw angles
        let a = Vec2::from_angle(self.samples[i].theta);
        let b = Vec2::from_angle(self.samples[i + 1].theta);
        (a.lerp(b, frac)).angle()
    }

    pub fn phase_at(&self, t: S) -> PhasePoint<S> {
        PhasePoint::new(self.position_at(t), self.theta_at(t))
    }

    /// The phase point at parameter 0.
    pub fn initial_condition(&self) -> PhasePoint<S> {
        self.phase_at(S::zero())
    }

    /// Deck translation by an integer vector.
    pub fn translated(&self, by: Vec2<S>) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| PathSample {
                t: s.t,
                position: s.position + by,
                theta: s.theta,
            })
            .collect();
        GeodesicPath {
            samples,
            spacing: self.spacing,
        }
    }

    /// Same geodesic with the parameter origin shifted: t ↦ t − dt.
    pub fn reparametrized(&self, dt: S) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| PathSample {
                t: s.t - dt,
                position: s.position,
                theta: s.theta,
            })
            .collect();
        GeodesicPath {
            samples,
            spacing: self.spacing,
        }
    }

    /// The sample positions in [t0, t1] with interpolated endpoints.
    pub fn points_between(&self, t0: S, t1: S) -> Vec<Vec2<S>> {
        debug_assert!(t0 < t1);
        let mut pts = vec![self.position_at(t0)];
        for s in &self.samples {
            if s.t > t0 && s.t < t1 {
                pts.push(s.position);
            }
        }
        pts.push(self.position_at(t1));
        pts
    }

    /// Restrict to the parameter window [t0, t1].
    pub fn window(&self, metric: &MetricField<S>, t0: S, t1: S) -> Result<Self> {
        if !self.covers(t0, t1) {
            return Err(Error::SpanTooShort {
                got: (self.t_end() - self.t_start()).as_f64(),
                need: (t1 - t0).as_f64(),
            });
        }
        let pts = self.points_between(t0, t1);
        GeodesicPath::from_polyline(metric, &pts, self.spacing, t0)
    }
}

#[inline]
fn acceleration<S: Real>(metric: &MetricField<S>, x: Vec2<S>, u: Vec2<S>) -> Vec2<S> {
    let g = metric.grad_f(x);
    let diff = u.x * u.x - u.y * u.y;
    let cross = S::of(2.0) * u.x * u.y;
    Vec2::new(-g.x * diff - g.y * cross, g.y * diff - g.x * cross)
}

/// One RK4 step of the geodesic equation with g-speed renormalization.
#[inline]
pub(crate) fn rk4_step<S: Real>(
    metric: &MetricField<S>,
    x: Vec2<S>,
    u: Vec2<S>,
    dt: S,
) -> (Vec2<S>, Vec2<S>) {
    let half = S::of(0.5);
    let sixth = S::of(1.0 / 6.0);

    let k1x = u;
    let k1u = acceleration(metric, x, u);
    let k2x = u + k1u * (dt * half);
    let k2u = acceleration(metric, x + k1x * (dt * half), k2x);
    let k3x = u + k2u * (dt * half);
    let k3u = acceleration(metric, x + k2x * (dt * half), k3x);
    let k4x = u + k3u * dt;
    let k4u = acceleration(metric, x + k3x * dt, k4x);

    let nx = x + (k1x + (k2x + k3x) * S::of(2.0) + k4x) * (dt * sixth);
    let mut nu = u + (k1u + (k2u + k3u) * S::of(2.0) + k4u) * (dt * sixth);
    // renormalize to unit g-speed
    let scale = (metric.g_norm(nx, nu)).recip();
    nu = nu * scale;
    (nx, nu)
}

fn check_integration_params<S: Real>(t: S, h: S) -> Result<()> {
    if h.as_f64() > MAX_STEP {
        return Err(Error::StepTooLarge {
            step: h.as_f64(),
            max: MAX_STEP,
        });
    }
    if h <= S::zero() {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    if t.as_f64() > MAX_HORIZON {
        return Err(Error::HorizonExceeded {
            requested: t.as_f64(),
            limit: MAX_HORIZON,
        });
    }
    Ok(())
}

/// Integrate the geodesic with initial condition `v` over [0, T], sampling
/// every `SAMPLE_SPACING` units of arc length.
pub fn integrate<S: Real>(
    metric: &MetricField<S>,
    v: PhasePoint<S>,
    t: S,
    h: S,
) -> Result<GeodesicPath<S>> {
    check_integration_params(t, h)?;
    if t <= S::zero() {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }

    let n_samples = ((t / S::of(SAMPLE_SPACING)).round().as_f64() as usize).max(1);
    let spacing = t / S::of(n_samples as f64);
    let steps_per_sample = ((spacing / h).ceil().as_f64() as usize).max(1);
    let dt = spacing / S::of(steps_per_sample as f64);

    let mut x = v.position;
    let mut u = v.velocity(metric);
    let mut samples = Vec::with_capacity(n_samples + 1);
    samples.push(PathSample {
        t: S::zero(),
        position: x,
        theta: v.theta,
    });
    for k in 1..=n_samples {
        for _ in 0..steps_per_sample {
            let (nx, nu) = rk4_step(metric, x, u, dt);
            x = nx;
            u = nu;
        }
        samples.push(PathSample {
            t: spacing * S::of(k as f64),
            position: x,
            theta: u.angle(),
        });
    }
    Ok(GeodesicPath { samples, spacing })
}

/// The geodesic flow map φ^t applied to one phase point.
pub fn flow_map<S: Real>(
    metric: &MetricField<S>,
    v: PhasePoint<S>,
    t: S,
    h: S,
) -> Result<PhasePoint<S>> {
    if t == S::zero() {
        return Ok(v);
    }
    if t < S::zero() {
        let back = flow_map(metric, v.reversed(), -t, h)?;
        return Ok(back.reversed());
    }
    check_integration_params(t, h)?;
    let steps = ((t / h).ceil().as_f64() as usize).max(1);
    let dt = t / S::of(steps as f64);
    let mut x = v.position;
    let mut u = v.velocity(metric);
    for _ in 0..steps {
        let (nx, nu) = rk4_step(metric, x, u, dt);
        x = nx;
        u = nu;
    }
    Ok(PhasePoint::new(x, u.angle()))
}
