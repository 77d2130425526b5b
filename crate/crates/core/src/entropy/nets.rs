//! Greedy maximal ε-separated nets under the static Riemannian distance:
//! F^ε over the closed fundamental domain (the unit square) and F_r^ε over
//! the shell {z : r − a ≤ d(z, F̄) ≤ r}.
//!
//! Candidates are lattice points scanned in a fixed row-major order, so the
//! constructions are deterministic. Pairwise conflicts are decided through
//! the equivalence bracket and the one-segment chord bound first; only the
//! undecided band pays for an exact distance.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{fundamental_domain_diameter, DistanceField};
use crate::scalar::Real;
use crate::shortening::subdivided_chord;
use crate::space::Space;
use crate::vec2::Vec2;

/// A maximal ε-separated net of the fundamental domain.
#[derive(Clone, Debug, Serialize)]
pub struct Net<S> {
    pub eps: S,
    pub points: Vec<Vec2<S>>,
    /// Spacing of the candidate lattice the greedy scanned; coverage of
    /// arbitrary points holds up to ε + A·(this spacing).
    pub candidate_spacing: S,
}

/// A maximal ε-separated net of the shell F_r.
#[derive(Clone, Debug, Serialize)]
pub struct ShellNet<S> {
    pub eps: S,
    pub r: S,
    pub points: Vec<Vec2<S>>,
    /// d(z, F̄) of each net point, from the distance field.
    pub field_values: Vec<S>,
    /// Distance tolerance of the field the shell was classified with.
    pub distance_tolerance: S,
    pub candidate_spacing: S,
}

struct KeptHash<S> {
    cell: S,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl<S: Real> KeptHash<S> {
    fn new(cell: S) -> Self {
        KeptHash {
            cell,
            map: HashMap::new(),
        }
    }

    fn key(&self, p: Vec2<S>) -> (i64, i64) {
        (
            (p.x / self.cell).floor().as_f64() as i64,
            (p.y / self.cell).floor().as_f64() as i64,
        )
    }

    fn insert(&mut self, p: Vec2<S>, idx: usize) {
        self.map.entry(self.key(p)).or_default().push(idx);
    }

    fn neighbors(&self, p: Vec2<S>) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.key(p);
        (-1..=1).flat_map(move |di| {
            (-1..=1).flat_map(move |dj| {
                self.map
                    .get(&(i + di, j + dj))
                    .into_iter()
                    .flatten()
                    .copied()
            })
        })
    }
}

/// Greedy maximal ε-separated subset of `candidates` in scan order.
fn greedy_separated<S: Real>(
    space: &Space<S>,
    candidates: impl Iterator<Item = Vec2<S>>,
    eps: S,
) -> Result<Vec<Vec2<S>>> {
    let a = space.equivalence_constant();
    let reach = a * eps * S::of(1.0001);
    let mut kept: Vec<Vec2<S>> = Vec::new();
    let mut hash = KeptHash::new(reach);
    'cand: for c in candidates {
        for k_idx in hash.neighbors(c) {
            let k = kept[k_idx];
            let de = c.dist(k);
            if de > reach {
                continue; // d ≥ d_E/A... no: d ≤ A·d_E needed; here d > ε is certain
            }
            if space.distance_upper_bound(c, k) <= eps {
                continue 'cand; // certainly conflicting
            }
            if de / a > eps {
                continue; // certainly separated from this point
            }
            // recursive-subdivision upper bound: microseconds, usually decides
            let rec = subdivided_chord(space.metric(), c, k, S::of(0.05));
            if space.metric().curve_length_unchecked(&rec) <= eps {
                continue 'cand;
            }
            if space.distance_quick(c, k)? <= eps {
                continue 'cand;
            }
        }
        hash.insert(c, kept.len());
        kept.push(c);
    }
    Ok(kept)
}

/// Candidate lattice spacing for the fundamental-domain net.
const F_EPS_CANDIDATE_N: usize = 64;

/// Greedy maximal ε-separated set of the closed unit square under the static
/// Riemannian distance.
pub fn build_f_eps<S: Real>(space: &Space<S>, eps: S) -> Result<Net<S>> {
    if eps <= S::zero() {
        return Err(Error::InvalidParameter("net needs ε > 0".into()));
    }
    let n = F_EPS_CANDIDATE_N;
    let spacing = S::of(1.0 / n as f64);
    let candidates = (0..=n).flat_map(move |j| {
        (0..=n).map(move |i| Vec2::new(S::of(i as f64 / n as f64), S::of(j as f64 / n as f64)))
    });
    let points = greedy_separated(space, candidates, eps)?;
    Ok(Net {
        eps,
        points,
        candidate_spacing: spacing,
    })
}

/// Greedy maximal ε-separated subset of shell lattice points, classified by
/// the distance field d(·, F̄).
pub fn build_f_r_eps<S: Real>(
    space: &Space<S>,
    field: &DistanceField<S>,
    r: S,
    eps: S,
) -> Result<ShellNet<S>> {
    if eps <= S::zero() {
        return Err(Error::InvalidParameter("net needs ε > 0".into()));
    }
    let a = fundamental_domain_diameter::<S>();
    if r <= S::of(2.0) * a {
        return Err(Error::InvalidParameter(format!(
            "shell radius must exceed 2a = {:.4}, got {:.4}",
            (S::of(2.0) * a).as_f64(),
            r.as_f64()
        )));
    }
    if field.stop_radius() < r {
        return Err(Error::RegionTooSmall {
            radius: r.as_f64(),
            halfwidth: field.stop_radius().as_f64(),
        });
    }
    // thin the candidate lattice toward ~ε/5 spacing
    let step = ((eps / S::of(4.0) / field.spacing()).floor().as_f64() as usize).max(1);
    let band = field.band_nodes(r - a, r, step);
    let kept = greedy_separated(space, band.iter().map(|&(p, _)| p), eps)?;
    // recover the field values of kept points in order
    let mut field_values = Vec::with_capacity(kept.len());
    let mut lookup: HashMap<(i64, i64), S> = HashMap::new();
    let h = field.spacing();
    for &(p, v) in &band {
        lookup.insert(
            (
                (p.x / h).round().as_f64() as i64,
                (p.y / h).round().as_f64() as i64,
            ),
            v,
        );
    }
    for &p in &kept {
        let key = (
            (p.x / h).round().as_f64() as i64,
            (p.y / h).round().as_f64() as i64,
        );
        field_values.push(*lookup.get(&key).expect("kept point came from the band"));
    }
    Ok(ShellNet {
        eps,
        r,
        points: kept,
        field_values,
        distance_tolerance: field.tolerance(),
        candidate_spacing: field.spacing() * S::of(step as f64),
    })
}

/// Exact-route distance d(z, F̄) for certification at small radii: golden
/// search of point-to-boundary distances over the four edges (zero inside).
pub fn distance_to_unit_square<S: Real>(space: &Space<S>, z: Vec2<S>) -> Result<S> {
    let zero = S::zero();
    let one = S::one();
    if z.x >= zero && z.x <= one && z.y >= zero && z.y <= one {
        return Ok(zero);
    }
    let corners = [
        Vec2::new(zero, zero),
        Vec2::new(one, zero),
        Vec2::new(one, one),
        Vec2::new(zero, one),
    ];
    let mut best = S::infinity();
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        let ab = b - a;
        let foot = ((z - a).dot(ab) / ab.norm_sq()).max(zero).min(one);
        // coarse scan of the edge parameter around the Euclidean foot
        let mut lo = (foot - S::of(0.45)).max(zero);
        let mut hi = (foot + S::of(0.45)).min(one);
        for k in 0..=6 {
            let t = lo + (hi - lo) * S::of(k as f64 / 6.0);
            let d = space.distance(z, a + ab * t)?;
            if d < best {
                best = d;
            }
        }
        let phi = S::of(0.618_033_988_749_894_9);
        let mut c = hi - (hi - lo) * phi;
        let mut d_pt = lo + (hi - lo) * phi;
        let mut fc = space.distance(z, a + ab * c)?;
        let mut fd = space.distance(z, a + ab * d_pt)?;
        for _ in 0..20 {
            if fc < fd {
                hi = d_pt;
                d_pt = c;
                fd = fc;
                c = hi - (hi - lo) * phi;
                fc = space.distance(z, a + ab * c)?;
            } else {
                lo = c;
                c = d_pt;
                fc = fd;
                d_pt = lo + (hi - lo) * phi;
                fd = space.distance(z, a + ab * d_pt)?;
            }
            best = best.min(fc.min(fd));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_field, FieldSource, MetricField};

    fn flat_space() -> Space<f64> {
        Space::new(MetricField::flat(), 128, 64.0).unwrap()
    }

    #[test]
    fn f_eps_flat_cardinality_in_packing_range() {
        let s = flat_space();
        let net = build_f_eps(&s, 0.6).unwrap();
        assert!(
            (4..=9).contains(&net.points.len()),
            "cardinality {}",
            net.points.len()
        );
        // greedy maximality: every candidate is within eps of a kept point
        for j in 0..=16 {
            for i in 0..=16 {
                let c = Vec2::new(i as f64 / 16.0, j as f64 / 16.0);
                let covered = net.points.iter().any(|&p| p.dist(c) <= 0.6);
                assert!(covered, "uncovered candidate {c:?}");
            }
        }
    }

    #[test]
    fn f_eps_exceeding_diameter_gives_singleton() {
        let s = flat_space();
        let net = build_f_eps(&s, std::f64::consts::SQRT_2 + 1e-9).unwrap();
        assert_eq!(net.points.len(), 1);
    }

    #[test]
    fn greedy_pruning_matches_plain_quadratic_greedy() {
        let m = MetricField::cosine_product(0.3).unwrap();
        let s = Space::new(m, 128, 64.0).unwrap();
        let eps = 0.55;
        let n = 12usize;
        let candidates: Vec<Vec2<f64>> = (0..=n)
            .flat_map(|j| (0..=n).map(move |i| Vec2::new(i as f64 / n as f64, j as f64 / n as f64)))
            .collect();
        let pruned = greedy_separated(&s, candidates.iter().copied(), eps).unwrap();
        // oracle: same scan without hashing or bound pruning
        let mut kept: Vec<Vec2<f64>> = Vec::new();
        for &c in &candidates {
            let conflict = kept.iter().any(|&k| s.distance(c, k).unwrap() <= eps);
            if !conflict {
                kept.push(c);
            }
        }
        assert_eq!(pruned.len(), kept.len());
        for (a, b) in pruned.iter().zip(&kept) {
            assert!(a.dist(*b) < 1e-12);
        }
    }

    #[test]
    fn shell_net_respects_band_and_separation() {
        let s = flat_space();
        let r = 5.0;
        let eps = 0.5;
        let a = std::f64::consts::SQRT_2;
        let field = distance_field(
            s.metric(),
            s.grid(),
            FieldSource::UnitSquare,
            r + 0.5,
            4_000_000,
        )
        .unwrap();
        let net = build_f_r_eps(&s, &field, r, eps).unwrap();
        assert!(!net.points.is_empty());
        for (p, &v) in net.points.iter().zip(&net.field_values) {
            assert!(v >= r - a && v <= r, "field value {v}");
            // flat: exact d(z, F̄) is the Euclidean clamp distance
            let exact = {
                let cx = p.x.clamp(0.0, 1.0);
                let cy = p.y.clamp(0.0, 1.0);
                p.dist(Vec2::new(cx, cy))
            };
            assert!(
                (v - exact).abs() <= net.distance_tolerance + 1e-9,
                "field {v} vs exact {exact}"
            );
        }
        for i in 0..net.points.len() {
            for j in (i + 1)..net.points.len() {
                assert!(net.points[i].dist(net.points[j]) > eps - 1e-9);
            }
        }
        // shell radius must exceed 2a
        assert!(build_f_r_eps(&s, &field, 2.0, eps).is_err());
    }

    #[test]
    fn exact_square_distance_flat() {
        let s = flat_space();
        let d = distance_to_unit_square(&s, Vec2::new(3.0, 0.5)).unwrap();
        assert!((d - 2.0).abs() < 1e-6, "d = {d}");
        let d = distance_to_unit_square(&s, Vec2::new(-1.0, -1.0)).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-6);
        assert_eq!(
            distance_to_unit_square(&s, Vec2::new(0.4, 0.9)).unwrap(),
            0.0
        );
    }
}
