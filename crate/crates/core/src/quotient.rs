//! The quotient surface: fundamental-domain reduction, quotient distance,
//! injectivity radius, and Liouville-measure sampling.
//!
//! PSL(2,Z) uses the classical reduction into `|x| <= 1/2, |z| >= 1`.
//! Gamma(2) reduces into the Dirichlet domain centered at `2i` by descent
//! over generator powers, then certifies optimality against a precomputed
//! translate set. Both groups act on frames by left multiplication, which
//! commutes exactly with the geodesic flow (right multiplication).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hyperbolic::{acosh1p, cosh_dist_m1, dist, Frame, HPoint, Mobius};
use crate::lattice::{enumerate_ball_capped, GroupKind, GroupSpec, LatticeElement};

/// Frames are renormalized after this many flow steps; determinant drift in
/// between is a few ulps per step.
pub const RENORM_INTERVAL: u32 = 64;

/// Default radius of translate sets: all elements moving the center by at
/// most this distance. Quotient distances are certified below half of it.
pub const DEFAULT_TRANSLATE_DELTA: f64 = 6.0;

/// Single-step flow time cap for quotient stepping.
pub const MAX_STEP: f64 = 10.0;

const REDUCE_MOVE_GUARD: u64 = 1_000_000;
const DESCENT_MARGIN: f64 = 1e-12;

/// Reduction center for the Gamma(2) Dirichlet domain.
pub fn gamma2_center() -> HPoint {
    HPoint::new(0.0, 2.0).expect("valid center")
}

/// A point of the unit tangent bundle of the quotient, carried by a reduced
/// representative frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientState {
    frame: Frame,
    kind: GroupKind,
    word_length: u64,
    steps_since_renorm: u32,
}

impl QuotientState {
    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn basepoint(&self) -> HPoint {
        self.frame.basepoint()
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn group(&self) -> GroupSpec {
        GroupSpec::from_kind(self.kind)
    }

    /// Number of reduction moves applied since the trajectory started.
    pub fn word_length(&self) -> u64 {
        self.word_length
    }
}

/// One orbit point of a marked center, with the element producing it.
#[derive(Debug, Clone)]
pub struct TranslateEntry {
    pub element: LatticeElement,
    pub point: HPoint,
    pub displacement: f64,
}

/// The orbit of a marked point under all group elements that move it by at
/// most `delta`, sorted by displacement (identity first).
#[derive(Debug, Clone)]
pub struct TranslateSet {
    kind: GroupKind,
    p0: HPoint,
    delta: f64,
    entries: Vec<TranslateEntry>,
}

impl TranslateSet {
    pub fn build(group: &GroupSpec, p0: HPoint, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!(
                "translate radius {delta} not positive"
            )));
        }
        let slack = 2.0 * dist(HPoint::I, p0);
        let reach = delta + slack + 0.25;
        if reach > 16.0 {
            return Err(Error::Dependency(format!(
                "translate set at {p0:?} needs enumeration radius {reach:.2} > 16"
            )));
        }
        let mut entries = Vec::new();
        for el in enumerate_ball_capped(reach, group, 16.0)? {
            let point = el.mobius().apply(p0)?;
            let displacement = dist(p0, point);
            if displacement <= delta {
                entries.push(TranslateEntry {
                    element: el,
                    point,
                    displacement,
                });
            }
        }
        entries.sort_by(|a, b| a.displacement.total_cmp(&b.displacement));
        if entries.is_empty() || entries[0].displacement > 1e-12 {
            return Err(Error::Dependency("translate set lost the identity".into()));
        }
        Ok(TranslateSet {
            kind: group.kind(),
            p0,
            delta,
            entries,
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn center(&self) -> HPoint {
        self.p0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn entries(&self) -> &[TranslateEntry] {
        &self.entries
    }

    /// Distance from `p` to the orbit of the center, minimized over the
    /// stored translates. Equals the true quotient distance whenever the
    /// result is at most `delta / 2`.
    pub fn quotient_dist(&self, p: HPoint) -> f64 {
        // identity first: d0 = d(p, p0) starts the scan, and any translate
        // with displacement >= d0 + best cannot win (triangle inequality).
        let mut best_u = cosh_dist_m1(p, self.entries[0].point);
        let mut best_d = acosh1p(best_u);
        let d0 = best_d;
        for entry in &self.entries[1..] {
            if entry.displacement >= d0 + best_d {
                break;
            }
            let u = cosh_dist_m1(p, entry.point);
            if u < best_u {
                best_u = u;
                best_d = acosh1p(u);
            }
        }
        best_d
    }
}

/// Injectivity radius at a point: half the minimal displacement under
/// nontrivial elements, zero (flagged) at orbifold points.
#[derive(Debug, Clone, Copy)]
pub struct Injectivity {
    pub radius: f64,
    pub orbifold: bool,
}

/// The quotient surface for one of the two shipped lattices.
#[derive(Debug, Clone)]
pub struct Surface {
    group: GroupSpec,
    /// Gamma(2) only: translate set around the Dirichlet center used to
    /// certify reduction optimality.
    dirichlet: Option<TranslateSet>,
}

impl Surface {
    pub fn new(kind: GroupKind) -> Result<Self> {
        let group = GroupSpec::from_kind(kind);
        let dirichlet = match kind {
            GroupKind::Psl2z => None,
            GroupKind::Gamma2 => Some(TranslateSet::build(
                &group,
                gamma2_center(),
                DEFAULT_TRANSLATE_DELTA,
            )?),
        };
        Ok(Surface { group, dirichlet })
    }

    pub fn psl2z() -> Result<Self> {
        Self::new(GroupKind::Psl2z)
    }

    pub fn gamma2() -> Result<Self> {
        Self::new(GroupKind::Gamma2)
    }

    pub fn kind(&self) -> GroupKind {
        self.group.kind()
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// Hyperbolic area of the surface.
    pub fn area(&self) -> f64 {
        self.kind().covolume()
    }

    /// Reduce a frame to its fundamental-domain representative.
    pub fn reduce(&self, f: Frame) -> Result<QuotientState> {
        Ok(self.reduce_tracked(f)?.0)
    }

    /// [`Surface::reduce`], also returning the accumulated word applied to
    /// the input (so `word * input` is the reduced frame).
    pub fn reduce_tracked(&self, f: Frame) -> Result<(QuotientState, Mobius)> {
        let (frame, word, moves) = match self.kind() {
            GroupKind::Psl2z => reduce_psl2z(f)?,
            GroupKind::Gamma2 => reduce_gamma2(f, self.dirichlet.as_ref().expect("built in new"))?,
        };
        Ok((
            QuotientState {
                frame,
                kind: self.kind(),
                word_length: moves,
                steps_since_renorm: 0,
            },
            word,
        ))
    }

    /// Flow the state time `h` along the geodesic and reduce.
    pub fn step(&self, q: &QuotientState, h: f64) -> Result<QuotientState> {
        if !(0.0..=MAX_STEP).contains(&h) {
            return Err(Error::Domain(format!(
                "step length {h} outside [0, {MAX_STEP}]"
            )));
        }
        if h == 0.0 {
            return Ok(*q);
        }
        let flowed = q.frame.geodesic_step(h)?;
        let (reduced, _) = self.reduce_tracked(flowed)?;
        let mut next = QuotientState {
            frame: reduced.frame,
            kind: q.kind,
            word_length: q.word_length + reduced.word_length,
            steps_since_renorm: q.steps_since_renorm + 1,
        };
        if next.steps_since_renorm >= RENORM_INTERVAL {
            next.frame = next.frame.renormalize()?;
            next.steps_since_renorm = 0;
        }
        Ok(next)
    }

    /// Injectivity radius at `p0`, computed from the enumeration.
    pub fn injectivity_radius(&self, p0: HPoint) -> Result<Injectivity> {
        let slack = 2.0 * dist(HPoint::I, p0);
        let mut reach = 6.0f64;
        loop {
            if reach + slack > 16.0 {
                return Err(Error::Range(format!(
                    "injectivity search at {p0:?} exceeds the enumeration cap"
                )));
            }
            let mut min_disp = f64::INFINITY;
            for el in enumerate_ball_capped(reach + slack, &self.group, 16.0)? {
                if el == LatticeElement::identity() {
                    continue;
                }
                min_disp = min_disp.min(dist(p0, el.mobius().apply(p0)?));
            }
            if min_disp <= 1e-12 {
                return Ok(Injectivity {
                    radius: 0.0,
                    orbifold: true,
                });
            }
            if min_disp <= reach {
                return Ok(Injectivity {
                    radius: min_disp / 2.0,
                    orbifold: false,
                });
            }
            reach = min_disp + 0.5;
        }
    }

    /// The usable target-radius cap `R = min(i_V(p0)/4, 1, h)`.
    pub fn target_radius_cap(&self, p0: HPoint, h: f64) -> Result<f64> {
        let inj = self.injectivity_radius(p0)?;
        Ok((inj.radius / 4.0).min(1.0).min(h))
    }

    /// Draw a state from the Liouville measure: position uniform in the
    /// fundamental domain w.r.t. hyperbolic area, direction uniform.
    pub fn sample_liouville(&self, rng: &mut ChaCha8Rng) -> Result<QuotientState> {
        // PSL(2,Z) domain: x uniform on [-1/2, 1/2], then y by the exact
        // inverse CDF of the density 1/y^2 truncated to y >= sqrt(1 - x^2).
        let x = rng.gen::<f64>() - 0.5;
        let y0 = (1.0 - x * x).sqrt();
        let y = y0 / (1.0 - rng.gen::<f64>());
        let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let frame = Frame::from_point_angle(HPoint::new(x, y)?, theta)?;
        match self.kind() {
            GroupKind::Psl2z => Ok(QuotientState {
                frame,
                kind: GroupKind::Psl2z,
                word_length: 0,
                steps_since_renorm: 0,
            }),
            GroupKind::Gamma2 => {
                // index 6: push the PSL(2,Z) sample through a uniformly
                // chosen coset representative, then reduce.
                let reps = gamma2_coset_reps();
                let pick = rng.gen_range(0..reps.len());
                let moved = frame.transform(&reps[pick].mobius());
                let (state, _) = self.reduce_tracked(moved)?;
                Ok(state)
            }
        }
    }
}

/// Coset representatives of Gamma(2) in PSL(2,Z): their reductions mod 2
/// exhaust the six invertible matrices over F_2.
pub fn gamma2_coset_reps() -> [LatticeElement; 6] {
    let t = LatticeElement::new(1, 1, 0, 1).unwrap();
    let s = LatticeElement::new(0, -1, 1, 0).unwrap();
    let id = LatticeElement::identity();
    let ts = t.mul(&s).unwrap();
    let st = s.mul(&t).unwrap();
    let tst = t.mul(&st).unwrap();
    [id, t, s, ts, st, tst]
}

/// Per-experiment deterministic randomness: trial `j` draws from the stream
/// seeded by `seed XOR j`, independent of execution order.
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub seed: u64,
    pub kind: GroupKind,
}

impl SamplerConfig {
    pub fn stream(&self, trial: u64) -> ChaCha8Rng {
        use rand::SeedableRng;
        ChaCha8Rng::seed_from_u64(self.seed ^ trial)
    }
}

fn reduce_psl2z(f: Frame) -> Result<(Frame, Mobius, u64)> {
    let s = Mobius {
        a: 0.0,
        b: -1.0,
        c: 1.0,
        d: 0.0,
    };
    let mut frame = f;
    let mut word = Mobius::identity();
    let mut moves = 0u64;
    loop {
        if moves > REDUCE_MOVE_GUARD {
            return Err(Error::Corruption("reduction failed to terminate".into()));
        }
        let z = frame.basepoint();
        let shift = (z.x() + 0.5).floor();
        if shift != 0.0 {
            let g = Mobius::translation(-shift);
            frame = frame.transform(&g);
            word = g.compose(&word);
            moves += 1;
            continue;
        }
        if z.x() * z.x() + z.y() * z.y() < 1.0 - 1e-9 {
            frame = frame.transform(&s);
            word = s.compose(&word);
            moves += 1;
            continue;
        }
        return Ok((frame, word, moves));
    }
}

/// Candidate parabolic powers toward the three cusps of the Gamma(2)
/// domain. Each family is a conjugate of the translations, so the optimal
/// power comes from rounding a horocyclic coordinate of `z`.
fn gamma2_cusp_moves(z: HPoint) -> [Option<Mobius>; 3] {
    // cusp infinity: z -> z + 2k, optimal k recenters x at 0
    let k = (-z.x() / 2.0).round();
    let toward_inf = (k != 0.0).then_some(Mobius {
        a: 1.0,
        b: 2.0 * k,
        c: 0.0,
        d: 1.0,
    });
    // cusp 0: conjugate by z -> -1/z; target coordinate 0
    let den0 = z.x() * z.x() + z.y() * z.y();
    let m0 = (-z.x() / den0 / 2.0).round();
    let toward_zero = (m0 != 0.0).then_some(Mobius {
        a: 1.0,
        b: 0.0,
        c: 2.0 * m0,
        d: 1.0,
    });
    // cusp 1: conjugate by z -> 1/(1-z); the center 2i maps to x = 0.2
    let ux = 1.0 - z.x();
    let den1 = ux * ux + z.y() * z.y();
    let m1 = ((ux / den1 - 0.2) / 2.0).round();
    let toward_one = (m1 != 0.0).then(|| Mobius {
        a: 2.0 * m1 + 1.0,
        b: -2.0 * m1,
        c: 2.0 * m1,
        d: 1.0 - 2.0 * m1,
    });
    [toward_inf, toward_zero, toward_one]
}

fn reduce_gamma2(f: Frame, dirichlet: &TranslateSet) -> Result<(Frame, Mobius, u64)> {
    let center = dirichlet.center();
    let mut frame = f;
    let mut word = Mobius::identity();
    let mut moves = 0u64;
    loop {
        if moves > REDUCE_MOVE_GUARD {
            return Err(Error::Corruption("reduction failed to terminate".into()));
        }
        let z = frame.basepoint();
        let current = dist(z, center);
        // Descent over parabolic powers toward each cusp.
        let mut best: Option<(Mobius, f64)> = None;
        for g in gamma2_cusp_moves(z).into_iter().flatten() {
            let cand = dist(g.apply(z)?, center);
            if cand < current - DESCENT_MARGIN && best.as_ref().is_none_or(|&(_, b)| cand < b) {
                best = Some((g, cand));
            }
        }
        if let Some((g, _)) = best {
            frame = frame.transform(&g);
            word = g.compose(&word);
            moves += 1;
            continue;
        }
        // Descent stalled: certify against the translate set, applying any
        // strictly improving element and resuming.
        let mut improved = false;
        for entry in &dirichlet.entries()[1..] {
            if entry.displacement >= 2.0 * current + DESCENT_MARGIN {
                break;
            }
            let g = entry.element.mobius();
            let cand = dist(g.apply(z)?, center);
            if cand < current - DESCENT_MARGIN {
                frame = frame.transform(&g);
                word = g.compose(&word);
                moves += 1;
                improved = true;
                break;
            }
        }
        if !improved {
            return Ok((frame, word, moves));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn random_frame(rng: &mut ChaCha8Rng) -> Frame {
        let p = HPoint::new(rng.gen_range(-8.0..8.0), rng.gen_range(0.05..12.0)).unwrap();
        Frame::from_point_angle(p, rng.gen_range(0.0..std::f64::consts::TAU)).unwrap()
    }

    #[test]
    fn coset_reps_are_a_transversal() {
        let reps = gamma2_coset_reps();
        let mut seen = std::collections::HashSet::new();
        for r in &reps {
            let (a, b, c, d) = r.entries();
            seen.insert((
                a.rem_euclid(2),
                b.rem_euclid(2),
                c.rem_euclid(2),
                d.rem_euclid(2),
            ));
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn psl2z_reduce_examples() {
        let surface = Surface::psl2z().unwrap();
        // pure translation
        let f = Frame::from_point_angle(HPoint::new(5.0, 1.0).unwrap(), 1.0).unwrap();
        let state = surface.reduce(f).unwrap();
        assert!(state.basepoint().x().abs() < 1e-9);
        assert!((state.basepoint().y() - 1.0).abs() < 1e-9);
        // inversion from deep below the unit circle
        let f = Frame::from_point_angle(HPoint::new(0.0, 0.1).unwrap(), 2.0).unwrap();
        let state = surface.reduce(f).unwrap();
        let z = state.basepoint();
        assert!(z.x().abs() <= 0.5 + 1e-9);
        assert!(z.x() * z.x() + z.y() * z.y() >= 1.0 - 1e-9);
        assert!((z.y() - 10.0).abs() < 1e-9);
        // already reduced: unchanged, zero moves
        let f = Frame::from_point_angle(HPoint::new(0.2, 3.0).unwrap(), 0.5).unwrap();
        let state = surface.reduce(f).unwrap();
        assert_eq!(state.word_length(), 0);
        assert_eq!(state.frame(), f);
    }

    #[test]
    fn reduction_preserves_orbit() {
        for surface in [Surface::psl2z().unwrap(), Surface::gamma2().unwrap()] {
            let mut rng = ChaCha8Rng::seed_from_u64(19);
            for _ in 0..500 {
                let f = random_frame(&mut rng);
                let (state, word) = surface.reduce_tracked(f).unwrap();
                let moved = word.apply(f.basepoint()).unwrap();
                assert!(
                    dist(moved, state.basepoint()) < 1e-8,
                    "word does not reproduce the reduced point"
                );
            }
        }
    }

    #[test]
    fn gamma2_reduction_is_dirichlet_optimal() {
        let surface = Surface::gamma2().unwrap();
        let center = gamma2_center();
        let set = TranslateSet::build(surface.group(), center, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let f = random_frame(&mut rng);
            let state = surface.reduce(f).unwrap();
            let z = state.basepoint();
            let d = dist(z, center);
            for entry in set.entries() {
                let moved = entry.element.mobius().apply(z).unwrap();
                assert!(dist(moved, center) >= d - 1e-9);
            }
        }
    }

    #[test]
    fn step_examples() {
        let surface = Surface::gamma2().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = surface.sample_liouville(&mut rng).unwrap();
        // h = 0 is the identity
        assert_eq!(surface.step(&state, 0.0).unwrap(), state);
        assert!(surface.step(&state, 11.0).is_err());
        // semigroup: two half steps meet one full step on the quotient
        let ts = TranslateSet::build(surface.group(), gamma2_center(), 6.0).unwrap();
        for _ in 0..100 {
            let state = surface.sample_liouville(&mut rng).unwrap();
            let twice = surface
                .step(&surface.step(&state, 0.7).unwrap(), 0.7)
                .unwrap();
            let once = surface.step(&state, 1.4).unwrap();
            // compare quotient positions through the translate set
            let gap = ts
                .entries()
                .iter()
                .map(|e| {
                    dist(
                        e.element.mobius().apply(once.basepoint()).unwrap(),
                        twice.basepoint(),
                    )
                })
                .fold(f64::INFINITY, f64::min);
            assert!(gap < 1e-8, "semigroup violated: gap {gap}");
        }
    }

    #[test]
    fn cusp_excursion_returns() {
        // a downward vertical frame high in the cusp descends, crosses the
        // domain boundary, and reduction brings the orbit back to the bulk
        let surface = Surface::psl2z().unwrap();
        let f =
            Frame::from_point_angle(HPoint::new(0.3, 40.0).unwrap(), 1.5 * std::f64::consts::PI)
                .unwrap();
        let mut state = surface.reduce(f).unwrap();
        assert_eq!(state.word_length(), 0, "start already reduced");
        let mut ys = Vec::new();
        for _ in 0..400 {
            state = surface.step(&state, 1.0).unwrap();
            ys.push(state.basepoint().y());
        }
        // strictly decreasing while inside the cusp, then a return to y < 2
        assert!(ys[0] < 40.0 && ys[1] < ys[0] && ys[2] < ys[1]);
        assert!(
            ys.iter().any(|&y| y < 2.0),
            "orbit never returned to the bulk"
        );
    }

    #[test]
    fn quotient_dist_basics() {
        let surface = Surface::gamma2().unwrap();
        let p0 = gamma2_center();
        let ts = TranslateSet::build(surface.group(), p0, 6.0).unwrap();
        assert_eq!(ts.kind(), GroupKind::Gamma2);
        assert!(ts.quotient_dist(p0) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..2000 {
            let state = surface.sample_liouville(&mut rng).unwrap();
            let z = state.basepoint();
            let qd = ts.quotient_dist(z);
            assert!(qd <= dist(z, p0) + 1e-12);
        }
    }

    #[test]
    fn quotient_dist_matches_brute_force() {
        let surface = Surface::gamma2().unwrap();
        let p0 = gamma2_center();
        let ts = TranslateSet::build(surface.group(), p0, 6.0).unwrap();
        let ball = enumerate_ball_capped(8.0, surface.group(), 16.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..500 {
            let state = surface.sample_liouville(&mut rng).unwrap();
            let z = state.basepoint();
            let brute = ball
                .iter()
                .map(|el| dist(el.mobius().apply(p0).unwrap(), z))
                .fold(f64::INFINITY, f64::min);
            assert!((ts.quotient_dist(z) - brute).abs() < 1e-9);
        }
    }

    #[test]
    fn injectivity_examples() {
        let psl = Surface::psl2z().unwrap();
        let at_i = psl.injectivity_radius(HPoint::I).unwrap();
        assert!(at_i.orbifold);
        assert_eq!(at_i.radius, 0.0);

        let g2 = Surface::gamma2().unwrap();
        let at_center = g2.injectivity_radius(gamma2_center()).unwrap();
        assert!(!at_center.orbifold);
        // T^2 realizes the minimum: d(2i, 2+2i) = arccosh(3/2)
        assert!((at_center.radius - 1.5f64.acosh() / 2.0).abs() < 1e-12);

        // R caps at 1 for huge h and i_V on a surface without small loops
        let r = g2.target_radius_cap(gamma2_center(), 9.0).unwrap();
        assert!((r - (1.5f64.acosh() / 8.0)).abs() < 1e-12);
        let big_inj = Injectivity {
            radius: 9.0,
            orbifold: false,
        };
        assert_eq!((big_inj.radius / 4.0).min(1.0).min(9.0), 1.0);
        let r_small_h = g2.target_radius_cap(gamma2_center(), 0.05).unwrap();
        assert!((r_small_h - 0.05).abs() < 1e-15);
    }

    #[test]
    fn sampler_determinism() {
        for kind in [GroupKind::Psl2z, GroupKind::Gamma2] {
            let surface = Surface::new(kind).unwrap();
            let cfg = SamplerConfig { seed: 99, kind };
            let a = surface.sample_liouville(&mut cfg.stream(3)).unwrap();
            let b = surface.sample_liouville(&mut cfg.stream(3)).unwrap();
            assert_eq!(a, b);
            let mut sa = a;
            let mut sb = b;
            for _ in 0..50 {
                sa = surface.step(&sa, 1.0).unwrap();
                sb = surface.step(&sb, 1.0).unwrap();
            }
            assert_eq!(sa, sb);
        }
    }

    #[test]
    fn sampler_mean_inverse_height() {
        // closed form over the PSL(2,Z) domain: E[1/y] = 3 ln 3 / (2 pi)
        let surface = Surface::psl2z().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000usize;
        let values: Vec<f64> = (0..n)
            .map(|_| 1.0 / surface.sample_liouville(&mut rng).unwrap().basepoint().y())
            .collect();
        let mean = crate::stats::mean(&values);
        let se = crate::stats::standard_error(&values);
        let expect = 3.0 * 3.0f64.ln() / (2.0 * std::f64::consts::PI);
        assert!(
            (mean - expect).abs() < 2.0 * se,
            "mean 1/y = {mean}, expected {expect} (se {se})"
        );
    }

    #[test]
    fn sampler_directions_uniform() {
        let surface = Surface::psl2z().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bins = 16usize;
        let n = 40_000usize;
        let mut counts = vec![0u64; bins];
        for _ in 0..n {
            let theta = surface
                .sample_liouville(&mut rng)
                .unwrap()
                .frame()
                .direction();
            let b = ((theta / (2.0 * std::f64::consts::PI)) * bins as f64) as usize;
            counts[b.min(bins - 1)] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 0.99 quantile of chi-square with 15 degrees of freedom
        assert!(chi2 < 30.578, "chi2 = {chi2}");
    }
}
