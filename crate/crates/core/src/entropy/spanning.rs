//! The spanning construction over the fundamental domain: initial conditions
//! v_yz of minimal geodesics shadowing the straight lines between the net
//! F^ε and the shell net F_r^ε, the verification that they (r, β)-span the
//! certified minimal witnesses, and the cardinality/volume-growth series
//! that drives the entropy-vanishing estimate.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{beta_constant, BetaConstants, Net, ShellNet};
use crate::error::{Error, Result};
use crate::geometry::{
    c_epsilon, distance_field, fundamental_domain_diameter, FieldSource,
    FIELD_NODE_BUDGET,
};
use crate::minimal::{
    minimal_geodesic_for_line_with, Line, MinimalRecord, RecordOptions,
};
use crate::scalar::{OrdF, Real};
use crate::space::Space;
use crate::vec2::Vec2;

/// Constants measured on the metric before spanning checks run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeasuredConstants<S> {
    /// Equivalence constant A.
    pub a_equiv: S,
    /// Hedlund constant D measured over a sample of minimal geodesics.
    pub hedlund_d: S,
    /// Fundamental domain diameter a.
    pub diameter: S,
}

impl<S: Real> MeasuredConstants<S> {
    pub fn new(space: &Space<S>, hedlund_d: S) -> Self {
        MeasuredConstants {
            a_equiv: space.equivalence_constant(),
            hedlund_d,
            diameter: fundamental_domain_diameter(),
        }
    }
}

/// One constructed member v_yz of P_r.
#[derive(Clone, Debug, Serialize)]
pub struct PrMember<S> {
    pub y_index: usize,
    pub z_index: usize,
    pub record: MinimalRecord<S>,
    /// Parameter shift applied to bring the footpoint into F̄.
    pub recentered_by: S,
    /// Deck translation applied, if parameter hunting failed.
    pub deck_translated: bool,
}

/// The spanning construction: nets, constants and the constructed members.
#[derive(Clone, Debug, Serialize)]
pub struct SpanningConstruction<S> {
    pub r: S,
    pub eps: S,
    pub diameter: S,
    pub f_eps: Net<S>,
    pub f_r_eps: ShellNet<S>,
    pub beta: BetaConstants<S>,
    pub measured: MeasuredConstants<S>,
    /// #F^ε · #F_r^ε; the paper's counting keeps same-image duplicates.
    pub cardinality: usize,
    pub members: Vec<PrMember<S>>,
    /// (y_index, z_index, reason) of dropped pairs.
    pub dropped: Vec<(usize, usize, String)>,
}

#[derive(Clone, Copy, Debug)]
pub struct BuildPrOptions {
    /// Construct a record for every (y, z) pair; otherwise members are built
    /// lazily by the verification.
    pub construct_all: bool,
    /// Drop members whose R-doubling stability gap exceeds this.
    pub stability_tol: f64,
    /// Certify members by the dyadic minimality check.
    pub certify: bool,
}

impl Default for BuildPrOptions {
    fn default() -> Self {
        BuildPrOptions {
            construct_all: true,
            stability_tol: 1e-2,
            certify: true,
        }
    }
}

/// Build one member record: the minimal geodesic for the line through y and
/// z, re-parametrized so t = 0 sits at the sample nearest y, with the
/// footpoint taken into the closed fundamental domain by parameter hunting
/// (or, failing that, by a deck translation).
fn build_member<S: Real>(
    space: &Space<S>,
    y: Vec2<S>,
    z: Vec2<S>,
    r: S,
    opts: &BuildPrOptions,
) -> Result<(MinimalRecord<S>, S, bool)> {
    let line = Line::through(y, z);
    let span_r = S::of(2.0) * (r + S::of(6.0));
    let rec_opts = RecordOptions {
        stability_check: true,
        certify: opts.certify,
    };
    let rec = minimal_geodesic_for_line_with(space, &line, span_r, &rec_opts)?;

    // parameter origin at the sample nearest y
    let mut best = (S::infinity(), S::zero());
    for s in rec.path.samples() {
        let d = s.position.dist(y);
        if d < best.0 {
            best = (d, s.t);
        }
    }
    let mut rec = rec.reparametrized(best.1);
    let mut shift = best.1;
    let mut deck = false;

    let in_domain = |p: Vec2<S>| {
        p.x >= S::zero() && p.x <= S::one() && p.y >= S::zero() && p.y <= S::one()
    };
    if !in_domain(rec.path.position_at(S::zero())) {
        // hunt the nearest parameter whose footpoint lies in F̄
        let mut found: Option<S> = None;
        for s in rec.path.samples() {
            if s.t.abs() <= S::of(3.0) && in_domain(s.position) {
                if found.map_or(true, |f: S| s.t.abs() < f.abs()) {
                    found = Some(s.t);
                }
            }
        }
        match found {
            Some(dt) => {
                rec = rec.reparametrized(dt);
                shift += dt;
            }
            None => {
                let foot = rec.path.position_at(S::zero());
                let (kx, ky) = foot.floor_lattice();
                rec = rec.translated(Vec2::new(S::of(-(kx as f64)), S::of(-(ky as f64))));
                deck = true;
            }
        }
    }
    Ok((rec, shift, deck))
}

/// Build the spanning construction P_r for the given scale ε.
pub fn build_p_r<S: Real>(
    space: &Space<S>,
    r: S,
    eps: S,
    hedlund_d: S,
    opts: &BuildPrOptions,
) -> Result<SpanningConstruction<S>> {
    let a = fundamental_domain_diameter::<S>();
    if r <= S::of(2.0) * a {
        return Err(Error::InvalidParameter(format!(
            "spanning radius must exceed 2a, got {:.3}",
            r.as_f64()
        )));
    }
    let field = distance_field(
        space.metric(),
        space.grid(),
        FieldSource::UnitSquare,
        r + S::one(),
        FIELD_NODE_BUDGET,
    )?;
    let f_eps = super::build_f_eps(space, eps)?;
    let f_r_eps = super::build_f_r_eps(space, &field, r, eps)?;
    let measured = MeasuredConstants::new(space, hedlund_d);
    let beta = beta_constant(measured.hedlund_d, measured.a_equiv, measured.diameter, eps);
    let cardinality = f_eps.points.len() * f_r_eps.points.len();

    let mut members = Vec::new();
    let mut dropped = Vec::new();
    if opts.construct_all {
        let pairs: Vec<(usize, usize)> = (0..f_eps.points.len())
            .flat_map(|yi| (0..f_r_eps.points.len()).map(move |zi| (yi, zi)))
            .collect();
        let built: Vec<(usize, usize, Result<(MinimalRecord<S>, S, bool)>)> = pairs
            .par_iter()
            .map(|&(yi, zi)| {
                let out = build_member(space, f_eps.points[yi], f_r_eps.points[zi], r, opts);
                (yi, zi, out)
            })
            .collect();
        for (yi, zi, out) in built {
            match out {
                Ok((rec, shift, deck)) => {
                    if rec.stability_gap.as_f64() > opts.stability_tol {
                        dropped.push((
                            yi,
                            zi,
                            format!("stability gap {:.3e}", rec.stability_gap.as_f64()),
                        ));
                    } else {
                        members.push(PrMember {
                            y_index: yi,
                            z_index: zi,
                            record: rec,
                            recentered_by: shift,
                            deck_translated: deck,
                        });
                    }
                }
                Err(e) => dropped.push((yi, zi, e.to_string())),
            }
        }
    }

    Ok(SpanningConstruction {
        r,
        eps,
        diameter: a,
        f_eps,
        f_r_eps,
        beta,
        measured,
        cardinality,
        members,
        dropped,
    })
}

/// One witness row of the spanning verification.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WitnessCheck<S> {
    pub witness: usize,
    pub y_index: usize,
    pub z_index: usize,
    /// d(c_w(0), y)
    pub y_dist: S,
    /// d(c_w(r), z)
    pub z_dist: S,
    pub y_within_tolerance: bool,
    pub z_within_tolerance: bool,
    pub dbar: S,
    pub ratio: S,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningReport<S> {
    pub r: S,
    pub eps: S,
    pub beta: BetaConstants<S>,
    pub checks: Vec<WitnessCheck<S>>,
    pub worst_ratio: S,
    /// Witnesses whose endpoint fell outside every net tolerance.
    pub flagged: usize,
}

/// Nearest net point by exact distance, with equivalence-bound pruning.
fn nearest_net_point<S: Real>(
    space: &Space<S>,
    x: Vec2<S>,
    candidates: &[Vec2<S>],
) -> Result<(usize, S)> {
    let a = space.equivalence_constant();
    let mut order: Vec<(S, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, &p)| (x.dist(p), i))
        .collect();
    order.sort_by(|p, q| OrdF(p.0).cmp(&OrdF(q.0)));
    let mut best = (usize::MAX, S::infinity());
    for (de, i) in order {
        if de / a >= best.1 {
            break;
        }
        let d = space.distance_quick(x, candidates[i])?;
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok((best.0, best.1))
}

/// Verify that P_r (r, β)-spans the witnesses: for each certified witness w
/// pick the net points y, z nearest to c_w(0) and c_w(r), build (or reuse)
/// the member v_yz, and check d̄(w, v_yz)_r against β.
pub fn verify_spanning<S: Real>(
    space: &Space<S>,
    con: &mut SpanningConstruction<S>,
    witnesses: &[MinimalRecord<S>],
) -> Result<SpanningReport<S>> {
    let r = con.r;
    let a_equiv = con.measured.a_equiv;
    let diam = con.diameter;

    // selections first (cheap), then batch-build the missing members
    let mut selections = Vec::with_capacity(witnesses.len());
    for (wi, w) in witnesses.iter().enumerate() {
        let w0 = w.path.position_at(S::zero());
        let wr = w.path.position_at(r);
        let (yi, dy) = nearest_net_point(space, w0, &con.f_eps.points)?;
        let (zi, dz) = nearest_net_point(space, wr, &con.f_r_eps.points)?;
        selections.push((wi, yi, dy, zi, dz));
    }

    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    for (idx, m) in con.members.iter().enumerate() {
        cache.insert((m.y_index, m.z_index), idx);
    }
    let mut missing: Vec<(usize, usize)> = Vec::new();
    for &(_, yi, _, zi, _) in &selections {
        if !cache.contains_key(&(yi, zi)) && !missing.contains(&(yi, zi)) {
            missing.push((yi, zi));
        }
    }
    let opts = BuildPrOptions::default();
    let built: Vec<((usize, usize), Result<(MinimalRecord<S>, S, bool)>)> = missing
        .par_iter()
        .map(|&(yi, zi)| {
            let out = build_member(space, con.f_eps.points[yi], con.f_r_eps.points[zi], r, &opts);
            ((yi, zi), out)
        })
        .collect();
    for ((yi, zi), out) in built {
        let (rec, shift, deck) = out?;
        cache.insert((yi, zi), con.members.len());
        con.members.push(PrMember {
            y_index: yi,
            z_index: zi,
            record: rec,
            recentered_by: shift,
            deck_translated: deck,
        });
    }

    // net coverage tolerances: candidate-lattice slack, and for the shell
    // the band mismatch (A−1)·a plus the field tolerance
    let y_tol = con.eps + a_equiv * con.f_eps.candidate_spacing;
    let z_tol = con.eps
        + a_equiv * con.f_r_eps.candidate_spacing
        + (a_equiv - S::one()) * diam
        + con.f_r_eps.distance_tolerance;

    let rows: Vec<WitnessCheck<S>> = selections
        .par_iter()
        .map(|&(wi, yi, dy, zi, dz)| {
            let member = &con.members[cache[&(yi, zi)]];
            let dbar = space.dynamical_distance_paths(&witnesses[wi].path, &member.record.path, r)?;
            Ok(WitnessCheck {
                witness: wi,
                y_index: yi,
                z_index: zi,
                y_dist: dy,
                z_dist: dz,
                y_within_tolerance: dy <= y_tol,
                z_within_tolerance: dz <= z_tol,
                dbar,
                ratio: dbar / con.beta.beta,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let worst_ratio = rows
        .iter()
        .map(|c| c.ratio)
        .fold(S::neg_infinity(), S::max);
    let flagged = rows
        .iter()
        .filter(|c| !c.y_within_tolerance || !c.z_within_tolerance)
        .count();
    Ok(SpanningReport {
        r,
        eps: con.eps,
        beta: con.beta,
        checks: rows,
        worst_ratio,
        flagged,
    })
}

/// One radius of the cardinality/volume series.
#[derive(Clone, Debug, Serialize)]
pub struct PrSeriesPoint<S> {
    pub r: S,
    pub f_r_cardinality: usize,
    pub p_r_cardinality: usize,
    /// (1/r)·log #P_r
    pub log_rate: S,
    /// (1/r)·log(vol(B(x, r+a+ε/2))/C_ε), worst probe.
    pub ball_bound_log_rate: S,
    /// #F_r^ε · C_ε ≤ vol(B(x, r+a+ε/2)) at every probe x ∈ F^ε.
    pub eq_ball_ok: bool,
    /// max over probes of (#F_r^ε · C_ε) / vol: ≤ 1 when the inequality holds.
    pub worst_eq_ball_ratio: S,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrSeriesReport<S> {
    pub eps: S,
    pub diameter: S,
    pub c_epsilon: S,
    pub f_eps_cardinality: usize,
    pub points: Vec<PrSeriesPoint<S>>,
    /// Tail-half fitted slope of log #P_r against r.
    pub slope: S,
    /// The ball-bound log rate decreases along the series.
    pub bound_curve_decreasing: bool,
}

/// Cardinality of P_r and the packing/volume bound chain over a list of
/// radii. Only cardinalities are needed here, so no geodesics are built:
/// #P_r = #F^ε·#F_r^ε by construction.
pub fn spanning_entropy_series<S: Real>(
    space: &Space<S>,
    eps: S,
    r_list: &[S],
) -> Result<PrSeriesReport<S>> {
    if r_list.len() < 4 {
        return Err(Error::SeriesTooShort(format!(
            "need ≥ 4 radii, got {}",
            r_list.len()
        )));
    }
    if r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("r_list must be increasing".into()));
    }
    let a = fundamental_domain_diameter::<S>();
    let r_max = *r_list.last().unwrap();

    let ce = c_epsilon(space.metric(), space.grid(), eps)?;
    let f_eps = super::build_f_eps(space, eps)?;
    let shell_field = distance_field(
        space.metric(),
        space.grid(),
        FieldSource::UnitSquare,
        r_max + S::one(),
        FIELD_NODE_BUDGET,
    )?;

    // one distance field per probe, reused for every radius
    let ball_radius_max = r_max + a + eps * S::of(0.5);
    let probe_volumes: Vec<Vec<S>> = f_eps
        .points
        .par_iter()
        .map(|&x| {
            let field = distance_field(
                space.metric(),
                space.grid(),
                FieldSource::Point(x),
                ball_radius_max + S::of(0.25),
                FIELD_NODE_BUDGET,
            )?;
            Ok(r_list
                .iter()
                .map(|&r| field.volume_within(space.grid(), r + a + eps * S::of(0.5)))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(r_list.len());
    for (ri, &r) in r_list.iter().enumerate() {
        let shell = super::build_f_r_eps(space, &shell_field, r, eps)?;
        let f_r_cardinality = shell.points.len();
        let p_r_cardinality = f_eps.points.len() * f_r_cardinality;
        let lhs = S::of(f_r_cardinality as f64) * ce.value;
        let mut worst_ratio = S::zero();
        let mut min_vol = S::infinity();
        for vols in &probe_volumes {
            let v = vols[ri];
            min_vol = min_vol.min(v);
            let ratio = lhs / v;
            if ratio > worst_ratio {
                worst_ratio = ratio;
            }
        }
        points.push(PrSeriesPoint {
            r,
            f_r_cardinality,
            p_r_cardinality,
            log_rate: S::of(p_r_cardinality.max(1) as f64).ln() / r,
            ball_bound_log_rate: (min_vol / ce.value).ln() / r,
            eq_ball_ok: worst_ratio <= S::one(),
            worst_eq_ball_ratio: worst_ratio,
        });
    }

    // tail-half fit of log #P_r against r
    let tail = &points[points.len() / 2..];
    let xs: Vec<S> = tail.iter().map(|p| p.r).collect();
    let ys: Vec<S> = tail
        .iter()
        .map(|p| S::of(p.p_r_cardinality.max(1) as f64).ln())
        .collect();
    let slope = super::linear_fit_slope(&xs, &ys);
    let bound_curve_decreasing = points
        .windows(2)
        .all(|w| w[1].ball_bound_log_rate <= w[0].ball_bound_log_rate + S::of(1e-12));

    Ok(PrSeriesReport {
        eps,
        diameter: a,
        c_epsilon: ce.value,
        f_eps_cardinality: f_eps.points.len(),
        points,
        slope,
        bound_curve_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricField;
    use crate::minimal::sample_minimal_conditions;

    fn flat_space() -> Space<f64> {
        Space::new(MetricField::flat(), 128, 64.0).unwrap()
    }

    #[test]
    fn flat_members_follow_their_lines() {
        let s = flat_space();
        let opts = BuildPrOptions {
            construct_all: true,
            stability_tol: 1e-2,
            certify: false,
        };
        let con = build_p_r(&s, 4.0, 1.2, 0.0, &opts).unwrap();
        assert!(con.cardinality > 0);
        assert_eq!(
            con.cardinality,
            con.f_eps.points.len() * con.f_r_eps.points.len()
        );
        assert_eq!(con.members.len() + con.dropped.len(), con.cardinality);
        assert!(con.dropped.is_empty(), "dropped {:?}", con.dropped);
        for m in &con.members {
            let y = con.f_eps.points[m.y_index];
            let z = con.f_r_eps.points[m.z_index];
            let line = Line::through(y, z);
            let foot = m.record.path.position_at(0.0);
            assert!((0.0..=1.0).contains(&foot.x) && (0.0..=1.0).contains(&foot.y));
            let dir_gap = m.record.line.direction.cross(line.direction).abs();
            assert!(dir_gap < 1e-6, "direction gap {dir_gap}");
            // flat: the member is the line itself (up to a deck translation
            // when the line only grazes the corner of the domain)
            if !m.deck_translated {
                assert!(line.euclid_distance(foot) < 1e-6);
            }
        }
    }

    #[test]
    fn flat_spanning_ratio_below_one() {
        let s = flat_space();
        let r = 5.0;
        let eps = 0.5;
        let opts = BuildPrOptions {
            construct_all: false,
            stability_tol: 1e-2,
            certify: false,
        };
        let mut con = build_p_r(&s, r, eps, 0.0, &opts).unwrap();
        // flat: β = 2(a + 2ε)
        let expect_beta = 2.0 * (std::f64::consts::SQRT_2 + 2.0 * eps);
        assert!((con.beta.beta - expect_beta).abs() < 1e-12);

        let mut rng = rand::rngs::mock::StepRng::new(7, 2654435769);
        let witnesses = sample_minimal_conditions(
            &s,
            6,
            &[0.1, 0.5, 0.9, 1.3, 1.9, 2.6],
            2.0 * (r + 2.0),
            &mut rng,
        )
        .unwrap();
        let report = verify_spanning(&s, &mut con, &witnesses).unwrap();
        assert_eq!(report.checks.len(), 6);
        assert_eq!(report.flagged, 0);
        assert!(
            report.worst_ratio <= 1.0,
            "worst ratio {}",
            report.worst_ratio
        );
        // a witness that is itself (numerically) a member gets d̄ ≈ 0
        let member_record = con.members[0].record.clone();
        let self_report = verify_spanning(&s, &mut con, &[member_record]).unwrap();
        assert!(self_report.checks[0].dbar <= 2.0 * eps + 1e-6);
    }

    #[test]
    fn series_rejects_bad_radius_lists() {
        let s = flat_space();
        assert!(spanning_entropy_series(&s, 0.5, &[5.0, 10.0]).is_err());
        assert!(spanning_entropy_series(&s, 0.5, &[5.0, 4.0, 6.0, 7.0]).is_err());
    }
}
