//! The Riemannian metric on T² and its lift to the universal cover ℝ².
//!
//! Metrics are conformal perturbations of the flat background metric,
//!
//!   g = e^{2f}·g_E,   f(x) = Σ_j c_j·cos(2π k_j·x) + s_j·sin(2π k_j·x),
//!
//! with integer wavenumbers k_j ∈ ℤ², so f is ℤ²-periodic by construction and
//! all derivatives are available in closed form. The flat metric is the empty
//! coefficient list. An amplitude budget Σ(|c|+|s|) ≤ 0.75 keeps e^{2f}
//! bounded and bounded away from zero, which in turn bounds the equivalence
//! constant between g-distances and Euclidean distances by e^{0.75}.

mod field;
mod grid;
mod pairwise;

pub use field::{
    ball_volume, c_epsilon, distance_field, CEpsilon, DistanceField, FieldSource,
    FIELD_NODE_BUDGET,
};
pub use grid::Grid;
pub use pairwise::{pairwise_distance, DistanceOutcome, PairwiseParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Largest allowed Σ(|c|+|s|) over the Fourier coefficients.
pub const AMPLITUDE_LIMIT: f64 = 0.75;

/// Euclidean diameter of the fundamental domain used throughout: the closed
/// unit square, so a = √2. Reports carry this value explicitly.
pub fn fundamental_domain_diameter<S: Real>() -> S {
    S::SQRT_2()
}

/// One Fourier mode of the conformal exponent.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FourierCoeff<S> {
    pub k1: i32,
    pub k2: i32,
    pub cos_amp: S,
    pub sin_amp: S,
}

/// A conformal metric g = e^{2f}·g_E on the torus, lifted to ℝ².
#[derive(Clone, Debug)]
pub struct MetricField<S> {
    coeffs: Vec<FourierCoeff<S>>,
}

/// The metric tensor at a point: for conformal metrics this is e^{2f}·I.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricTensor<S> {
    pub xx: S,
    pub xy: S,
    pub yy: S,
}

/// Christoffel symbols Γ^k_{ij} of g = e^{2f}g_E, symmetric in the lower
/// indices. Fields are named `g<k><i><j>`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Christoffel<S> {
    pub g111: S,
    pub g112: S,
    pub g122: S,
    pub g211: S,
    pub g212: S,
    pub g222: S,
}

impl<S: Real> Christoffel<S> {
    /// Symbol Γ^k_{ij} with 1-based indices, using the lower-index symmetry.
    pub fn symbol(&self, k: usize, i: usize, j: usize) -> S {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match (k, lo, hi) {
            (1, 1, 1) => self.g111,
            (1, 1, 2) => self.g112,
            (1, 2, 2) => self.g122,
            (2, 1, 1) => self.g211,
            (2, 1, 2) => self.g212,
            (2, 2, 2) => self.g222,
            _ => panic!("christoffel index out of range: ({k},{lo},{hi})"),
        }
    }
}

impl<S: Real> MetricField<S> {
    /// The flat metric (empty coefficient list).
    pub fn flat() -> Self {
        MetricField { coeffs: Vec::new() }
    }

    /// A conformal metric from Fourier coefficients. Rejects coefficient sets
    /// whose amplitude Σ(|c|+|s|) exceeds the budget.
    pub fn conformal(coeffs: Vec<FourierCoeff<S>>) -> Result<Self> {
        let m = MetricField { coeffs };
        let budget = m.amplitude_budget().as_f64();
        if budget > AMPLITUDE_LIMIT {
            return Err(Error::AmplitudeBudget {
                got: budget,
                limit: AMPLITUDE_LIMIT,
            });
        }
        Ok(m)
    }

    /// The classic test metric f = amp·cos(2πx₁)·cos(2πx₂), written in the
    /// product-to-sum form the coefficient list requires.
    pub fn cosine_product(amp: S) -> Result<Self> {
        let half = amp * S::of(0.5);
        Self::conformal(vec![
            FourierCoeff {
                k1: 1,
                k2: 1,
                cos_amp: half,
                sin_amp: S::zero(),
            },
            FourierCoeff {
                k1: 1,
                k2: -1,
                cos_amp: half,
                sin_amp: S::zero(),
            },
        ])
    }

    pub fn coeffs(&self) -> &[FourierCoeff<S>] {
        &self.coeffs
    }

    pub fn is_flat(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn amplitude_budget(&self) -> S {
        self.coeffs
            .iter()
            .map(|c| c.cos_amp.abs() + c.sin_amp.abs())
            .sum()
    }

    /// The conformal exponent f(x).
    #[inline]
    pub fn f(&self, x: Vec2<S>) -> S {
        let two_pi = S::of(std::f64::consts::TAU);
        let mut acc = S::zero();
        for c in &self.coeffs {
            let phase = two_pi * (S::of(c.k1 as f64) * x.x + S::of(c.k2 as f64) * x.y);
            let (sp, cp) = phase.sin_cos();
            acc = acc + c.cos_amp * cp + c.sin_amp * sp;
        }
        acc
    }

    /// ∇f(x), analytically from the Fourier series.
    #[inline]
    pub fn grad_f(&self, x: Vec2<S>) -> Vec2<S> {
        let two_pi = S::of(std::f64::consts::TAU);
        let mut g = Vec2::zero();
        for c in &self.coeffs {
            let k1 = S::of(c.k1 as f64);
            let k2 = S::of(c.k2 as f64);
            let phase = two_pi * (k1 * x.x + k2 * x.y);
            let (sp, cp) = phase.sin_cos();
            let radial = two_pi * (-c.cos_amp * sp + c.sin_amp * cp);
            g.x += radial * k1;
            g.y += radial * k2;
        }
        g
    }

    /// e^{f(x)}: the local length scale of g against the background metric.
    #[inline]
    pub fn conformal_factor(&self, x: Vec2<S>) -> S {
        self.f(x).exp()
    }

    /// The metric tensor e^{2f(x)}·I.
    pub fn eval_metric(&self, x: Vec2<S>) -> MetricTensor<S> {
        let e2f = (S::of(2.0) * self.f(x)).exp();
        MetricTensor {
            xx: e2f,
            xy: S::zero(),
            yy: e2f,
        }
    }

    /// Christoffel symbols of g = e^{2f}g_E at x.
    pub fn christoffel(&self, x: Vec2<S>) -> Christoffel<S> {
        let g = self.grad_f(x);
        Christoffel {
            g111: g.x,
            g112: g.y,
            g122: -g.x,
            g211: -g.y,
            g212: g.x,
            g222: g.y,
        }
    }

    /// g-norm of a Euclidean tangent vector at x.
    #[inline]
    pub fn g_norm(&self, x: Vec2<S>, v: Vec2<S>) -> S {
        self.conformal_factor(x) * v.norm()
    }

    /// Length of a polyline under g, one midpoint-rule evaluation per
    /// segment. Additive over concatenation by construction.
    pub fn curve_length(&self, polyline: &[Vec2<S>]) -> Result<S> {
        if polyline.len() < 2 {
            return Err(Error::TooFewPoints {
                got: polyline.len(),
                need: 2,
            });
        }
        Ok(self.curve_length_unchecked(polyline))
    }

    #[inline]
    pub(crate) fn curve_length_unchecked(&self, polyline: &[Vec2<S>]) -> S {
        let mut acc = S::zero();
        for w in polyline.windows(2) {
            acc += self.segment_length(w[0], w[1]);
        }
        acc
    }

    /// Midpoint-rule g-length of one straight segment.
    #[inline]
    pub fn segment_length(&self, p: Vec2<S>, q: Vec2<S>) -> S {
        self.conformal_factor(p.midpoint(q)) * p.dist(q)
    }

    /// g-length of a straight segment by 3-point Simpson quadrature; used
    /// where the midpoint rule is too coarse (source bands of distance
    /// fields).
    #[inline]
    pub fn segment_length_simpson(&self, p: Vec2<S>, q: Vec2<S>) -> S {
        let sixth = S::of(1.0 / 6.0);
        let w = self.conformal_factor(p)
            + S::of(4.0) * self.conformal_factor(p.midpoint(q))
            + self.conformal_factor(q);
        w * sixth * p.dist(q)
    }

    /// Extremes of f over a fine grid on one unit cell (f is periodic).
    pub fn f_range(&self, resolution: usize) -> (S, S) {
        if self.is_flat() {
            return (S::zero(), S::zero());
        }
        let n = resolution.max(8);
        let h = S::of(1.0 / n as f64);
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for i in 0..n {
            for j in 0..n {
                let v = self.f(Vec2::new(S::of(i as f64) * h, S::of(j as f64) * h));
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            }
        }
        (lo, hi)
    }

    /// The background-metric equivalence constant A = exp(max |f|), sampled
    /// on a fine grid over one unit cell. Satisfies
    /// (1/A)·d_E(x,y) ≤ d(x,y) ≤ A·d_E(x,y).
    pub fn equivalence_constant(&self) -> S {
        let (lo, hi) = self.f_range(1024);
        hi.abs().max(lo.abs()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = MetricField<f64>;

    fn cos_x1(amp: f64) -> M {
        M::conformal(vec![FourierCoeff {
            k1: 1,
            k2: 0,
            cos_amp: amp,
            sin_amp: 0.0,
        }])
        .unwrap()
    }

    #[test]
    fn flat_metric_is_identity() {
        let m = M::flat();
        let t = m.eval_metric(Vec2::new(0.3, 0.7));
        assert_eq!(t.xx, 1.0);
        assert_eq!(t.xy, 0.0);
        assert_eq!(t.yy, 1.0);
    }

    #[test]
    fn cosine_metric_at_origin() {
        let m = cos_x1(0.3);
        let t = m.eval_metric(Vec2::zero());
        let expect = (0.6f64).exp(); // 1.822119...
        assert!((t.xx - expect).abs() < 1e-12);
        assert!((t.yy - expect).abs() < 1e-12);
        assert!((expect - 1.822119).abs() < 1e-6);
    }

    #[test]
    fn cosine_metric_on_nodal_line() {
        let m = cos_x1(0.3);
        let t = m.eval_metric(Vec2::new(0.25, 0.0));
        assert!((t.xx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn christoffel_flat_vanishes() {
        let m = M::flat();
        let c = m.christoffel(Vec2::new(1.7, -0.4));
        assert_eq!(c, Christoffel::default());
    }

    #[test]
    fn christoffel_at_critical_point_vanishes() {
        let m = cos_x1(0.3);
        let c = m.christoffel(Vec2::zero());
        assert!(c.g111.abs() < 1e-15 && c.g222.abs() < 1e-15);
    }

    #[test]
    fn christoffel_quarter_period() {
        let m = cos_x1(0.3);
        let c = m.christoffel(Vec2::new(0.25, 0.0));
        // ∂₁f = -0.3·2π·sin(π/2) = -0.6π
        let expect = -0.6 * std::f64::consts::PI;
        assert!((c.g111 - expect).abs() < 1e-12);
        assert!((c.g122 + expect).abs() < 1e-12);
        assert!((c.g212 - expect).abs() < 1e-12);
        assert!(c.g112.abs() < 1e-12 && c.g211.abs() < 1e-12 && c.g222.abs() < 1e-12);
    }

    #[test]
    fn equivalence_constant_values() {
        assert_eq!(M::flat().equivalence_constant(), 1.0);
        let a = cos_x1(0.3).equivalence_constant();
        assert!((a - (0.3f64).exp()).abs() < 1e-9, "A = {a}");
    }

    #[test]
    fn curve_length_flat_345() {
        let m = M::flat();
        let len = m
            .curve_length(&[Vec2::zero(), Vec2::new(3.0, 4.0)])
            .unwrap();
        assert!((len - 5.0).abs() < 1e-14);
    }

    #[test]
    fn curve_length_degenerate_and_errors() {
        let m = M::flat();
        let p = Vec2::new(0.2, 0.9);
        assert_eq!(m.curve_length(&[p, p]).unwrap(), 0.0);
        assert!(m.curve_length(&[p]).is_err());
    }

    #[test]
    fn curve_length_on_nodal_vertical_line() {
        let m = cos_x1(0.3);
        // f vanishes identically on x₁ = 0.25.
        let len = m
            .curve_length(&[Vec2::new(0.25, 0.0), Vec2::new(0.25, 1.0)])
            .unwrap();
        assert!((len - 1.0).abs() < 1e-14);
    }

    #[test]
    fn curve_length_additive_over_concatenation() {
        let m = M::cosine_product(0.3).unwrap();
        let a = Vec2::new(0.1, 0.2);
        let b = Vec2::new(0.8, 0.5);
        let c = Vec2::new(1.3, 1.9);
        let whole = m.curve_length(&[a, b, c]).unwrap();
        let parts = m.curve_length(&[a, b]).unwrap() + m.curve_length(&[b, c]).unwrap();
        assert!((whole - parts).abs() < 1e-14);
    }

    #[test]
    fn amplitude_budget_enforced() {
        let r = M::conformal(vec![FourierCoeff {
            k1: 1,
            k2: 0,
            cos_amp: 0.5,
            sin_amp: 0.25,
        }]);
        assert!(r.is_ok());
        let r = M::conformal(vec![FourierCoeff {
            k1: 1,
            k2: 0,
            cos_amp: 0.5,
            sin_amp: 0.4,
        }]);
        assert!(r.is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let m = MetricField::<f32>::conformal(vec![FourierCoeff {
            k1: 1,
            k2: 0,
            cos_amp: 0.3f32,
            sin_amp: 0.0,
        }])
        .unwrap();
        let t = m.eval_metric(Vec2::new(0.0f32, 0.0));
        assert!((t.xx - (0.6f32).exp()).abs() < 1e-5);
    }
}
