use std::time::Instant;

use mingeo::entropy::{build_p_r, verify_spanning, BuildPrOptions};
use mingeo::geometry::MetricField;
use mingeo::minimal::{is_minimal, minimal_geodesic_for_line, Line};
use mingeo::space::Space;
use mingeo::vec2::Vec2;

fn main() {
    micro();
    let m = MetricField::cosine_product(0.3).unwrap();
    let t0 = Instant::now();
    let s = Space::new(m, 256, 256.0).unwrap();
    println!("space setup: {:?}  A={:.4}", t0.elapsed(), s.equivalence_constant());

    // mid-range distance
    let t0 = Instant::now();
    let d = s.distance(Vec2::new(0.1, 0.2), Vec2::new(2.3, 1.4)).unwrap();
    println!("distance gap~2.5: {:?} -> {d:.6}", t0.elapsed());

    let t0 = Instant::now();
    let d = s.distance(Vec2::new(0.1, 0.2), Vec2::new(14.0, 9.0)).unwrap();
    println!("distance gap~17: {:?} -> {d:.6}", t0.elapsed());

    // witness-scale record (r=20)
    let r = 20.0f64;
    let span = 2.0 * (r + 2.0);
    let t0 = Instant::now();
    let line = Line::from_angle(Vec2::new(0.3, 0.6), 0.55);
    let rec = minimal_geodesic_for_line(&s, &line, span).unwrap();
    println!(
        "witness record span {span}: {:?}  slack={:.4e} dev={:.4} stab={:.2e}",
        t0.elapsed(),
        rec.minimality_slack,
        rec.deviation,
        rec.stability_gap
    );

    let t0 = Instant::now();
    let chk = is_minimal(&s, &rec.path, s.minimality_tolerance()).unwrap();
    println!("re-certify: {:?} pairs={} worst={:.3e}", t0.elapsed(), chk.pairs_tested, chk.worst_slack);

    // spanning nets + verification at r=10 with 4 witnesses
    let t0 = Instant::now();
    let opts = BuildPrOptions { construct_all: false, stability_tol: 1e-2, certify: false };
    let mut con = build_p_r(&s, 10.0, 0.5, rec.deviation, &opts).unwrap();
    println!(
        "nets r=10: {:?}  #F={} #F_r={} beta={:.3}",
        t0.elapsed(),
        con.f_eps.points.len(),
        con.f_r_eps.points.len(),
        con.beta.beta
    );

    let t0 = Instant::now();
    let mut rng = rand::rngs::mock::StepRng::new(99, 0x9E3779B97F4A7C15);
    let witnesses =
        mingeo::minimal::sample_minimal_conditions(&s, 4, &[0.1, 0.7, 1.2, 2.0], 2.0 * 12.0, &mut rng)
            .unwrap();
    println!("4 witnesses r=10: {:?}", t0.elapsed());

    let t0 = Instant::now();
    let rep = verify_spanning(&s, &mut con, &witnesses).unwrap();
    println!(
        "verify 4 witnesses: {:?} worst_ratio={:.4} flagged={}",
        t0.elapsed(),
        rep.worst_ratio,
        rep.flagged
    );
}
fn micro() {
    use mingeo::geometry::{distance_field, FieldSource};
    let m = MetricField::cosine_product(0.3).unwrap();
    let s = Space::new(m, 256, 256.0).unwrap();
    let t0 = Instant::now();
    let field = distance_field(
        s.metric(),
        s.grid(),
        FieldSource::UnitSquare,
        11.0,
        6_000_000,
    )
    .unwrap();
    println!("unit-square field r=11: {:?} h={}", t0.elapsed(), field.spacing());
    let t0 = Instant::now();
    let net = mingeo::entropy::build_f_r_eps(&s, &field, 10.0, 0.5).unwrap();
    println!("shell net r=10: {:?} kept={}", t0.elapsed(), net.points.len());
    let t0 = Instant::now();
    let d = s.distance_quick(Vec2::new(0.1, 0.2), Vec2::new(0.6, 0.55)).unwrap();
    println!("quick gap 0.6: {:?} -> {d}", t0.elapsed());
    let t0 = Instant::now();
    for k in 0..100 {
        let dx = 0.001 * k as f64;
        s.distance_quick(Vec2::new(0.1 + dx, 0.2), Vec2::new(0.6, 0.55)).unwrap();
    }
    println!("quick gap 0.6 x100: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let d = s.distance_with_path(Vec2::new(0.0, 0.0), Vec2::new(30.0, 19.0)).unwrap();
    println!("full distance gap 35: {:?} -> {}", t0.elapsed(), d.value);
}
