//! Standing oracle suites: the enumeration is checked against an
//! independent brute-force implementation, displacement against the
//! geometric route, and the parallel stripe decomposition against
//! single-threaded evaluation.

use std::collections::HashSet;

use shrinktarget::hyperbolic::{ball_area, dist, HPoint};
use shrinktarget::lattice::{enumerate_ball, CountCurve, GroupKind, GroupSpec, LatticeElement};

/// Quadruple-loop oracle: every integer matrix with entries up to the norm
/// bound, det 1, canonicalized and deduplicated. Independent of the stripe
/// enumeration it checks.
fn brute_force_ball(t: f64, kind: GroupKind) -> HashSet<LatticeElement> {
    let m_max = (2.0 * t.cosh()).floor() as i64;
    let bound = (m_max as f64).sqrt().ceil() as i64;
    let group = GroupSpec::from_kind(kind);
    let mut seen = HashSet::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for d in -bound..=bound {
                    if a * d - b * c != 1 || a * a + b * b + c * c + d * d > m_max {
                        continue;
                    }
                    let el = LatticeElement::new(a, b, c, d).unwrap();
                    if group.contains(&el) {
                        seen.insert(el);
                    }
                }
            }
        }
    }
    seen
}

#[test]
fn enumeration_matches_brute_force_as_sets() {
    for kind in [GroupKind::Psl2z, GroupKind::Gamma2] {
        let group = GroupSpec::from_kind(kind);
        for t in [0.0, 0.7, 1.0, 2.0, 2.5, 3.0, 4.0] {
            let listed = enumerate_ball(t, &group).unwrap();
            let fast: HashSet<LatticeElement> = listed.iter().copied().collect();
            assert_eq!(fast.len(), listed.len(), "duplicate elements at t = {t}");
            let brute = brute_force_ball(t, kind);
            assert_eq!(fast, brute, "group {} at t = {t}", kind.name());
        }
    }
}

#[test]
fn displacement_matches_geometric_distance() {
    // the closed form arccosh(norm/2) against the Mobius-action route
    let ball = enumerate_ball(5.0, &GroupSpec::psl2z()).unwrap();
    for el in ball {
        let direct = el.displacement().unwrap();
        let moved = el.mobius().apply(HPoint::I).unwrap();
        assert!((direct - dist(HPoint::I, moved)).abs() < 1e-9, "{el:?}");
    }
}

#[test]
fn stripe_partitioning_does_not_change_results() {
    let group = GroupSpec::gamma2();
    let pools: Vec<rayon::ThreadPool> = [1usize, 2, 4]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
        })
        .collect();
    let results: Vec<Vec<LatticeElement>> = pools
        .iter()
        .map(|pool| pool.install(|| enumerate_ball(6.0, &group).unwrap()))
        .collect();
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
    let curves: Vec<CountCurve> = pools
        .iter()
        .map(|pool| pool.install(|| CountCurve::build(6.0, &group).unwrap()))
        .collect();
    assert_eq!(curves[0], curves[1]);
    assert_eq!(curves[0], curves[2]);
}

#[test]
fn count_growth_tracks_the_exponential_law() {
    // N(t+1)/N(t) within 20% of e on [8, 12]
    let curve = CountCurve::build(13.0, &GroupSpec::psl2z()).unwrap();
    let e = std::f64::consts::E;
    for k in 0..=16 {
        let t = 8.0 + 0.25 * k as f64;
        let ratio = curve.count(t + 1.0).unwrap() as f64 / curve.count(t).unwrap() as f64;
        assert!(
            ratio >= 0.8 * e && ratio <= 1.2 * e,
            "t = {t}: ratio {ratio}"
        );
    }
    // and the absolute counts track kappa * ball_area with kappa near 1/covol
    let kappa = 1.0 / GroupKind::Psl2z.covolume();
    for t in [10.0, 11.0, 12.0] {
        let n = curve.count(t).unwrap() as f64;
        let main = kappa * ball_area(t).unwrap();
        assert!(
            (n / main - 1.0).abs() < 0.02,
            "t = {t}: N = {n}, main = {main}"
        );
    }
}

#[test]
fn quotient_distance_oracle_off_center() {
    // the translate-set scan must agree with direct minimization even when
    // the marked center is not the reduction center
    use rand::{Rng, SeedableRng};
    use shrinktarget::hyperbolic::Frame;
    use shrinktarget::quotient::{Surface, TranslateSet};
    let surface = Surface::gamma2().unwrap();
    let p0 = HPoint::new(0.3, 1.7).unwrap();
    let targets = TranslateSet::build(surface.group(), p0, 6.0).unwrap();
    let ball = shrinktarget::enumerate_ball_capped(8.5, surface.group(), 16.0).unwrap();
    let orbit: Vec<HPoint> = ball
        .iter()
        .map(|el| el.mobius().apply(p0).unwrap())
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(271);
    for _ in 0..500 {
        let p = HPoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.1..6.0)).unwrap();
        let f = Frame::from_point_angle(p, rng.gen_range(0.0..std::f64::consts::TAU)).unwrap();
        let z = surface.reduce(f).unwrap().basepoint();
        let brute = orbit
            .iter()
            .map(|&q| dist(q, z))
            .fold(f64::INFINITY, f64::min);
        let fast = targets.quotient_dist(z);
        assert!((fast - brute).abs() < 1e-9, "at {z:?}: {fast} vs {brute}");
    }
}

#[test]
fn index_six_subgroup_count_ratio() {
    // Gamma(2) has index 6, so its fitted normalization is a sixth of the
    // full group's, validated by enumeration.
    let psl = CountCurve::build(11.0, &GroupSpec::psl2z()).unwrap();
    let g2 = CountCurve::build(11.0, &GroupSpec::gamma2()).unwrap();
    let plateau = |curve: &CountCurve| -> f64 {
        let mut acc = 0.0;
        for k in 0..=4 {
            let t = 10.0 + 0.25 * k as f64;
            acc += curve.count(t).unwrap() as f64 / ball_area(t).unwrap();
        }
        acc / 5.0
    };
    let ratio = plateau(&psl) / plateau(&g2);
    assert!((ratio / 6.0 - 1.0).abs() < 0.03, "kappa ratio {ratio}");
}
