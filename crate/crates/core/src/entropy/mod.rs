//! Separated/spanning-set entropy machinery: greedy nets under the dynamical
//! distance, growth-rate fits, the spanning construction over fundamental
//! domain and shell nets, and tube (μ-tube) entropy with its packing bounds.
//!
//! Greedy maximal nets replace exact maximum/minimum cardinalities (those are
//! NP-hard in general); growth rates are what the entropy estimates need, and
//! a greedy ε-separated set is sandwiched between the maximum cardinalities
//! at ε and 2ε. Along a T-series the greedy is run incrementally — a set
//! that is ε-separated at T stays separated at larger T because pairwise
//! dynamical distances are monotone in T — so reported cardinalities are
//! non-decreasing by construction while every set remains genuinely maximal.

mod nets;
mod spanning;
mod tubes;

pub use nets::{build_f_eps, build_f_r_eps, distance_to_unit_square, Net, ShellNet};
pub use spanning::{
    build_p_r, spanning_entropy_series, verify_spanning, BuildPrOptions, MeasuredConstants,
    PrMember, PrSeriesPoint, PrSeriesReport, SpanningConstruction, SpanningReport, WitnessCheck,
};
pub use tubes::{
    fit_neighborhood_constant, min_delta_triangle, neighborhood_volume, tube_entropy,
    tube_members, Triangle, TubeEntropyOptions, TubeEntropyReport, TubeMember, TubeReport,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::GeodesicPath;
use crate::scalar::Real;
use crate::space::Space;

/// One entry of a separated/spanning cardinality series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EntropySeriesPoint<S> {
    pub t: S,
    /// Greedy maximal separated cardinality (lower surrogate for r_T).
    pub separated: usize,
    /// Greedy cover cardinality (upper surrogate for s_T).
    pub spanning: usize,
}

/// Series of (T, cardinality) observations with fitted growth exponents.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport<S> {
    /// Separation scale (ε, or δ inside tubes).
    pub epsilon: S,
    pub series: Vec<EntropySeriesPoint<S>>,
    /// Tail slope of log r_T against T: the entropy estimate at this ε.
    pub slope_linear: S,
    /// Tail slope of log r_T against log T: the polynomial growth exponent.
    pub slope_log: S,
    pub description: String,
    pub notes: Vec<String>,
}

impl<S: Real> EntropyReport<S> {
    pub fn from_series(
        epsilon: S,
        series: Vec<EntropySeriesPoint<S>>,
        description: String,
    ) -> Result<Self> {
        let (slope_linear, slope_log) = entropy_estimate_from(&series)?;
        let mut notes = vec![
            "greedy maximal separated sets: cardinalities are lower surrogates for the maximum"
                .to_string(),
        ];
        if series
            .iter()
            .any(|p| p.spanning > p.separated)
        {
            notes.push("greedy cover exceeded separated cardinality on some T".to_string());
        }
        Ok(EntropyReport {
            epsilon,
            series,
            slope_linear,
            slope_log,
            description,
            notes,
        })
    }
}

/// Least-squares slope of y against x.
pub(crate) fn linear_fit_slope<S: Real>(xs: &[S], ys: &[S]) -> S {
    let n = S::of(xs.len() as f64);
    let mx = xs.iter().copied().sum::<S>() / n;
    let my = ys.iter().copied().sum::<S>() / n;
    let mut cov = S::zero();
    let mut var = S::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    if var == S::zero() {
        S::zero()
    } else {
        cov / var
    }
}

/// Fitted tail slopes of log r_T: against T (`slope_linear`, the entropy
/// estimate) and against log T (`slope_log`, the polynomial exponent). Uses
/// the tail half of the series.
pub fn entropy_estimate<S: Real>(report: &EntropyReport<S>) -> Result<(S, S)> {
    entropy_estimate_from(&report.series)
}

fn entropy_estimate_from<S: Real>(series: &[EntropySeriesPoint<S>]) -> Result<(S, S)> {
    if series.len() < 4 {
        return Err(Error::SeriesTooShort(format!(
            "need ≥ 4 T-values, got {}",
            series.len()
        )));
    }
    let t_min = series.first().unwrap().t;
    let t_max = series.last().unwrap().t;
    if t_max < S::of(4.0) * t_min {
        return Err(Error::SeriesTooShort(
            "T-values must span at least a factor 4".into(),
        ));
    }
    let tail = &series[series.len() / 2..];
    let ts: Vec<S> = tail.iter().map(|p| p.t).collect();
    let log_ts: Vec<S> = tail.iter().map(|p| p.t.ln()).collect();
    let log_rs: Vec<S> = tail
        .iter()
        .map(|p| S::of(p.separated.max(1) as f64).ln())
        .collect();
    Ok((
        linear_fit_slope(&ts, &log_rs),
        linear_fit_slope(&log_ts, &log_rs),
    ))
}

/// Greedy maximal (T, ε)-separated subset of `population` (indices into it),
/// scanning in the given order: a point is kept iff its d̄_T-distance to
/// every kept point exceeds ε.
pub fn separated_set<S: Real>(
    space: &Space<S>,
    population: &[GeodesicPath<S>],
    t: S,
    eps: S,
) -> Result<Vec<usize>> {
    if eps <= S::zero() {
        return Err(Error::InvalidParameter("separated set needs ε > 0".into()));
    }
    separated_scan(space, population, t, eps, (0..population.len()).collect())
}

fn separated_scan<S: Real>(
    space: &Space<S>,
    population: &[GeodesicPath<S>],
    t: S,
    eps: S,
    order: Vec<usize>,
) -> Result<Vec<usize>> {
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let mut isolated = true;
        for &k in &kept {
            if k == i {
                isolated = false;
                break;
            }
            if !space.dbar_exceeds(&population[i], &population[k], t, eps)? {
                isolated = false;
                break;
            }
        }
        if isolated {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Greedy (T, ε)-spanning cover of `population` (indices of chosen centers):
/// repeatedly picks the point covering the most uncovered points within
/// d̄_T ≤ ε, lowest index on ties.
pub fn spanning_set<S: Real>(
    space: &Space<S>,
    population: &[GeodesicPath<S>],
    t: S,
    eps: S,
) -> Result<Vec<usize>> {
    if eps <= S::zero() {
        return Err(Error::InvalidParameter("spanning set needs ε > 0".into()));
    }
    let n = population.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // pairwise coverage matrix from threshold decisions
    let mut covers = vec![false; n * n];
    for i in 0..n {
        covers[i * n + i] = true;
        for j in (i + 1)..n {
            let within =
                !space.dbar_exceeds(&population[i], &population[j], t, eps)?;
            covers[i * n + j] = within;
            covers[j * n + i] = within;
        }
    }
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    while covered.iter().any(|c| !c) {
        let mut best = (0usize, 0usize);
        for i in 0..n {
            let gain = (0..n)
                .filter(|&j| !covered[j] && covers[i * n + j])
                .count();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        debug_assert!(best.1 > 0);
        centers.push(best.0);
        for j in 0..n {
            if covers[best.0 * n + j] {
                covered[j] = true;
            }
        }
    }
    Ok(centers)
}

/// Separated and spanning cardinalities along a T-series. The separated
/// greedy runs incrementally (previous kept points scan first), which makes
/// r_T non-decreasing while each set stays maximal for its T.
pub fn entropy_series<S: Real>(
    space: &Space<S>,
    population: &[GeodesicPath<S>],
    t_list: &[S],
    eps: S,
    description: String,
) -> Result<EntropyReport<S>> {
    if eps <= S::zero() {
        return Err(Error::InvalidParameter("entropy series needs ε > 0".into()));
    }
    let mut series = Vec::with_capacity(t_list.len());
    let mut previous: Vec<usize> = Vec::new();
    for &t in t_list {
        let mut order = previous.clone();
        for i in 0..population.len() {
            if !previous.contains(&i) {
                order.push(i);
            }
        }
        let kept = separated_scan(space, population, t, eps, order)?;
        let spanning = spanning_set(space, population, t, eps)?;
        series.push(EntropySeriesPoint {
            t,
            separated: kept.len(),
            spanning: spanning.len(),
        });
        previous = kept;
    }
    EntropyReport::from_series(eps, series, description)
}

/// The constants of the spanning bound, from the measured Hedlund constant
/// D, equivalence constant A, fundamental-domain diameter a, and net scale ε:
///
///   B = A²(4D + a + 2ε) + 2D,
///   H = 2(B + 2D),
///   β = 2D + H = 10D + 2A²(4D + a + 2ε).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BetaConstants<S> {
    pub b: S,
    pub h: S,
    pub beta: S,
}

pub fn beta_constant<S: Real>(d: S, a_equiv: S, diameter: S, eps: S) -> BetaConstants<S> {
    let core = a_equiv * a_equiv * (S::of(4.0) * d + diameter + S::of(2.0) * eps);
    let b = core + S::of(2.0) * d;
    let h = S::of(2.0) * (b + S::of(2.0) * d);
    let beta = S::of(2.0) * d + h;
    debug_assert!(
        (beta - (S::of(10.0) * d + S::of(2.0) * core)).abs()
            <= S::of(1e-12) * beta.abs().max(S::one()),
        "beta closed form mismatch"
    );
    BetaConstants { b, h, beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{PhasePoint, SAMPLE_SPACING};
    use crate::geometry::MetricField;
    use crate::vec2::Vec2;

    fn flat_space() -> Space<f64> {
        Space::new(MetricField::flat(), 128, 64.0).unwrap()
    }

    /// Five phase points on one line, common direction, footpoints 0.3 apart.
    fn chain(space: &Space<f64>) -> Vec<GeodesicPath<f64>> {
        (0..5)
            .map(|k| {
                let v = PhasePoint::new(Vec2::new(0.0, 0.3 * k as f64), 0.0);
                crate::flow::integrate(space.metric(), v, 22.0, 1e-3).unwrap()
            })
            .collect()
    }

    #[test]
    fn separated_chain_matches_brute_force() {
        let s = flat_space();
        let pop = chain(&s);
        let t = 3.0;
        let eps = 0.5;
        let kept = separated_set(&s, &pop, t, eps).unwrap();
        assert_eq!(kept, vec![0, 2, 4]);

        // brute force over all 2^5 subsets: maximum separated cardinality
        let mut best = 0usize;
        for mask in 0u32..32 {
            let idx: Vec<usize> = (0..5).filter(|i| mask & (1 << i) != 0).collect();
            let ok = idx.iter().enumerate().all(|(a, &i)| {
                idx.iter().skip(a + 1).all(|&j| {
                    s.dynamical_distance_paths(&pop[i], &pop[j], t).unwrap() > eps
                })
            });
            if ok {
                best = best.max(idx.len());
            }
        }
        assert_eq!(best, 3);
        assert_eq!(kept.len(), best);
    }

    #[test]
    fn separated_trivial_cases() {
        let s = flat_space();
        let pop = chain(&s);
        let single = separated_set(&s, &pop[..1], 2.0, 0.5).unwrap();
        assert_eq!(single, vec![0]);
        // ε larger than the set's diameter
        let all = separated_set(&s, &pop, 2.0, 5.0).unwrap();
        assert_eq!(all.len(), 1);
    }

    #[test]
    fn spanning_chain_greedy_at_most_three() {
        let s = flat_space();
        let pop = chain(&s);
        let t = 3.0;
        let centers = spanning_set(&s, &pop, t, 0.5).unwrap();
        assert!(centers.len() <= 3, "greedy cover {centers:?}");
        // brute-force minimum cover is 2 (centers at indices 1 and 3)
        let mut best = usize::MAX;
        for mask in 1u32..32 {
            let centers: Vec<usize> = (0..5).filter(|i| mask & (1 << i) != 0).collect();
            let covers_all = (0..5).all(|j| {
                centers.iter().any(|&c| {
                    s.dynamical_distance_paths(&pop[c], &pop[j], t).unwrap() <= 0.5
                })
            });
            if covers_all {
                best = best.min(centers.len());
            }
        }
        assert_eq!(best, 2);
        assert!(centers.len() >= best);

        let single = spanning_set(&s, &pop[..1], t, 0.5).unwrap();
        assert_eq!(single, vec![0]);
        let coarse = spanning_set(&s, &pop, t, 5.0).unwrap();
        assert_eq!(coarse.len(), 1);
    }

    #[test]
    fn entropy_estimate_canonical_series() {
        let mk = |pts: Vec<(f64, usize)>| {
            let series = pts
                .into_iter()
                .map(|(t, r)| EntropySeriesPoint {
                    t,
                    separated: r,
                    spanning: r,
                })
                .collect::<Vec<_>>();
            EntropyReport::from_series(1.0, series, "test".into()).unwrap()
        };
        // constant cardinality: slope 0
        let flat = mk(vec![(5.0, 7), (10.0, 7), (20.0, 7), (40.0, 7)]);
        assert!(flat.slope_linear.abs() < 1e-12);

        // log r_T = 0.7 T
        let series: Vec<EntropySeriesPoint<f64>> = [5.0f64, 10.0, 20.0, 40.0]
            .iter()
            .map(|&t| EntropySeriesPoint {
                t,
                separated: ((0.7 * t).exp().round()) as usize,
                spanning: 1,
            })
            .collect();
        let exp = EntropyReport::from_series(1.0, series, "test".into()).unwrap();
        assert!((exp.slope_linear - 0.7).abs() < 0.01, "{}", exp.slope_linear);

        // r_T = 3T: linear growth
        let lin = mk(vec![(5.0, 15), (10.0, 30), (20.0, 60), (40.0, 120)]);
        assert!(lin.slope_linear <= 0.05, "slope {}", lin.slope_linear);
        assert!((lin.slope_log - 1.0).abs() < 0.01, "{}", lin.slope_log);

        // too-short series rejected
        let series: Vec<EntropySeriesPoint<f64>> = vec![
            EntropySeriesPoint {
                t: 5.0,
                separated: 3,
                spanning: 3,
            };
            3
        ];
        assert!(EntropyReport::from_series(1.0, series, "x".into()).is_err());
    }

    #[test]
    fn beta_constant_anchor_values() {
        let b = beta_constant(0.0, 1.0, std::f64::consts::SQRT_2, 0.1);
        assert!((b.beta - 2.0 * (std::f64::consts::SQRT_2 + 0.2)).abs() < 1e-12);
        assert!((b.beta - 3.2284271247461903).abs() < 1e-10);

        let b = beta_constant(1.0, 2.0, 1.0, 0.0);
        assert_eq!(b.beta, 50.0);
    }

    #[test]
    fn entropy_series_monotone_cardinality() {
        let s = flat_space();
        // spread of directions from a common footpoint: counts grow with T
        let pop: Vec<GeodesicPath<f64>> = (0..8)
            .map(|k| {
                let v = PhasePoint::new(Vec2::zero(), 0.15 * k as f64);
                crate::flow::integrate(s.metric(), v, 42.0, 1e-3).unwrap()
            })
            .collect();
        let report = entropy_series(&s, &pop, &[5.0, 10.0, 20.0, 40.0], 1.0, "spread".into())
            .unwrap();
        for w in report.series.windows(2) {
            assert!(w[1].separated >= w[0].separated);
        }
        for p in &report.series {
            assert!(p.spanning <= p.separated.max(1));
        }
        let _ = SAMPLE_SPACING;
    }
}
