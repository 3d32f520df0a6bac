//! Geometry of the hyperbolic plane in the upper half-plane model, with
//! unit tangent frames realized as matrices in PSL(2,R).
//!
//! A point is `z = x + iy` with `y > 0` and the metric has constant
//! curvature -1, so `cosh d(p,q) = 1 + ((px-qx)^2 + (py-qy)^2) / (2 py qy)`.
//! A frame is a unimodular 2x2 real matrix `g`; its base point is `g(i)`
//! and its direction is the image of the upward unit vector at `i` under
//! the derivative of `g`. Time-`t` geodesic flow is right multiplication
//! by `diag(e^{t/2}, e^{-t/2})`.
//!
//! Everything is double precision with a validity envelope of
//! `y in [1e-12, 1e12]` for quotient work; cusp excursions at desk-scale
//! horizons stay orders of magnitude inside it (measured heights below
//! `e^13` at 10^5 steps).

use crate::error::{Error, Result};

/// Default tolerance on |det - 1| for frames and isometries.
pub const DET_TOLERANCE: f64 = 1e-9;

/// Cap on a single geodesic flow time; `e^{t/2}` stays comfortably finite.
pub const FLOW_TIME_CAP: f64 = 100.0;

/// Default constant for the exponential volume bound `c3 * e^{(n-1) t}`.
/// For n = 2 the disk area 2*pi*(cosh t - 1) is below `pi * e^t` for all t.
pub const DEFAULT_VOLUME_BOUND_C3: f64 = std::f64::consts::PI;

/// A point of the hyperbolic plane, upper half-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    x: f64,
    y: f64,
}

impl HPoint {
    /// The base point `i`.
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!("non-finite point ({x}, {y})")));
        }
        if y <= 0.0 {
            return Err(Error::Domain(format!(
                "point ({x}, {y}) not in upper half-plane"
            )));
        }
        Ok(HPoint { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

/// `cosh d(p,q) - 1`; cheaper than [`dist`] and monotone in it, which is all
/// that hit tests and nearest-translate scans need.
pub fn cosh_dist_m1(p: HPoint, q: HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    (dx * dx + dy * dy) / (2.0 * p.y * q.y)
}

/// Hyperbolic distance between two points.
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    acosh1p(cosh_dist_m1(p, q))
}

/// `arccosh(1 + u)` for `u >= 0`, accurate near u = 0.
pub fn acosh1p(u: f64) -> f64 {
    // acosh(1+u) = ln(1 + u + sqrt(u(u+2))) = ln_1p(u + sqrt(u(u+2)))
    if u <= 0.0 {
        return 0.0;
    }
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// An orientation-preserving isometry of the plane; a real 2x2 matrix with
/// determinant 1 acting by fractional-linear maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        if (m.det() - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::Domain(format!("determinant {} not 1", m.det())));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Mobius {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Horizontal translation `z -> z + t`.
    pub fn translation(t: f64) -> Self {
        Mobius {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Mobius) -> Self {
        Mobius {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Fractional-linear action on the upper half-plane.
    pub fn apply(&self, p: HPoint) -> Result<HPoint> {
        // (a z + b) / (c z + d) with z = x + iy; the image ordinate is
        // det * y / |cz + d|^2, positive for det = 1 unless the input is bad.
        let re = self.c * p.x + self.d;
        let im = self.c * p.y;
        let den = re * re + im * im;
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Domain("Mobius image degenerate".into()));
        }
        let nx = (self.a * p.x + self.b) * re + self.a * p.y * im;
        let y = self.det() * p.y / den;
        if y <= 0.0 || !y.is_finite() {
            return Err(Error::Domain(
                "Mobius image left the upper half-plane".into(),
            ));
        }
        HPoint::new(nx / den, y)
    }
}

/// A unit tangent vector on the plane, stored as the PSL(2,R) matrix that
/// moves the reference frame at `i` (pointing up) onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    m: Mobius,
}

impl Frame {
    /// The frame at `i` pointing straight up (direction pi/2).
    pub fn identity() -> Self {
        Frame {
            m: Mobius::identity(),
        }
    }

    pub fn new(m: Mobius) -> Result<Self> {
        if (m.det() - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::Domain(format!(
                "frame determinant {} not 1",
                m.det()
            )));
        }
        Ok(Frame { m })
    }

    /// The frame at `p` whose direction makes angle `theta` (radians,
    /// measured from the positive x-axis) at the base point.
    pub fn from_point_angle(p: HPoint, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain("non-finite angle".into()));
        }
        // N maps i -> p with positive real derivative; R(phi) fixes i and
        // rotates the direction by 2*phi.
        let s = p.y.sqrt();
        let phi = 0.5 * (theta - std::f64::consts::FRAC_PI_2);
        let (sin, cos) = phi.sin_cos();
        let n = Mobius {
            a: s,
            b: p.x / s,
            c: 0.0,
            d: 1.0 / s,
        };
        let r = Mobius {
            a: cos,
            b: sin,
            c: -sin,
            d: cos,
        };
        Ok(Frame { m: n.compose(&r) })
    }

    pub fn matrix(&self) -> Mobius {
        self.m
    }

    /// The point the frame sits at: the image of `i`.
    pub fn basepoint(&self) -> HPoint {
        let Mobius { a, b, c, d } = self.m;
        let den = c * c + d * d;
        HPoint {
            x: (a * c + b * d) / den,
            y: self.m.det() / den,
        }
    }

    /// The direction angle in [0, 2*pi): the argument of the tangent image
    /// `g'(i) * i = i / (ci + d)^2`.
    pub fn direction(&self) -> f64 {
        let Mobius { c, d, .. } = self.m;
        // arg(i / (ci+d)^2) = pi/2 - 2 arg(d + ci)
        let theta = std::f64::consts::FRAC_PI_2 - 2.0 * f64::atan2(c, d);
        theta.rem_euclid(2.0 * std::f64::consts::PI)
    }

    /// Flow the frame time `t` along its own geodesic.
    pub fn geodesic_step(&self, t: f64) -> Result<Frame> {
        if !t.is_finite() || t.abs() > FLOW_TIME_CAP {
            return Err(Error::Range(format!(
                "flow time {t} beyond cap {FLOW_TIME_CAP}"
            )));
        }
        let e = (0.5 * t).exp();
        let m = Mobius {
            a: self.m.a * e,
            b: self.m.b / e,
            c: self.m.c * e,
            d: self.m.d / e,
        };
        Ok(Frame { m })
    }

    /// Left-multiply by an isometry: the frame moved by `g`.
    pub fn transform(&self, g: &Mobius) -> Frame {
        Frame {
            m: g.compose(&self.m),
        }
    }

    /// Rescale the matrix so the determinant is exactly 1 again, undoing
    /// accumulated floating-point drift. The base point moves by < 1e-12.
    pub fn renormalize(&self) -> Result<Frame> {
        let det = self.m.det();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::Corruption(format!("frame determinant {det}")));
        }
        let s = det.sqrt();
        Ok(Frame {
            m: Mobius {
                a: self.m.a / s,
                b: self.m.b / s,
                c: self.m.c / s,
                d: self.m.d / s,
            },
        })
    }
}

/// Area of a hyperbolic disk of radius `r`: `2 pi (cosh r - 1)`.
pub fn ball_area(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("negative radius {r}")));
    }
    Ok(2.0 * std::f64::consts::PI * (r.cosh() - 1.0))
}

/// The exponential volume bound `c3 * e^{(n-1) t}` for balls in H^n.
pub fn volume_bound(n: u32, t: f64, c3: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension {n} < 2")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("negative time {t}")));
    }
    Ok(c3 * ((n - 1) as f64 * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng) -> HPoint {
        HPoint::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.05..20.0)).unwrap()
    }

    #[test]
    fn dist_examples() {
        let i = HPoint::I;
        let two_i = HPoint::new(0.0, 2.0).unwrap();
        assert!((dist(i, two_i) - 2.0f64.ln()).abs() < 1e-12);
        assert_eq!(dist(i, i), 0.0);
        let one_i = HPoint::new(1.0, 1.0).unwrap();
        assert!((dist(i, one_i) - 1.5f64.acosh()).abs() < 1e-12);
        assert!(HPoint::new(0.0, f64::NAN).is_err());
        assert!(HPoint::new(f64::INFINITY, 1.0).is_err());
        assert!(HPoint::new(0.0, -1.0).is_err());
    }

    #[test]
    fn mobius_examples() {
        let i = HPoint::I;
        let p = HPoint::new(0.3, 2.5).unwrap();
        let id = Mobius::identity();
        assert_eq!(id.apply(p).unwrap(), p);
        let t = Mobius::translation(1.0);
        let q = t.apply(i).unwrap();
        assert!((q.x() - 1.0).abs() < 1e-15 && (q.y() - 1.0).abs() < 1e-15);
        let s = Mobius::new(0.0, -1.0, 1.0, 0.0).unwrap();
        let fixed = s.apply(i).unwrap();
        assert!(dist(fixed, i) < 1e-12);
        assert!(Mobius::new(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(Mobius::new(2.0, 0.0, 0.0, 1.0).is_err());
        assert!(Mobius::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn isometry_invariance_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let r = random_point(&mut rng);
            let g = Frame::from_point_angle(
                random_point(&mut rng),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
            .unwrap()
            .matrix();
            let dpq = dist(p, q);
            let gd = dist(g.apply(p).unwrap(), g.apply(q).unwrap());
            assert!((gd - dpq).abs() < 1e-9, "isometry violated: {gd} vs {dpq}");
            assert!(
                dpq + dist(q, r) - dist(p, r) > -1e-9,
                "triangle inequality violated"
            );
            assert_eq!(dpq, dist(q, p));
        }
    }

    fn angle_gap(a: f64, b: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        ((a - b + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI).abs()
    }

    #[test]
    fn frame_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let p = random_point(&mut rng);
            let theta = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let f = Frame::from_point_angle(p, theta).unwrap();
            let bp = f.basepoint();
            let err = dist(bp, p).max(angle_gap(f.direction(), theta));
            worst = worst.max(err);
        }
        assert!(worst < 1e-9, "round-trip error {worst}");
    }

    #[test]
    fn identity_frame() {
        let f = Frame::identity();
        assert!(dist(f.basepoint(), HPoint::I) < 1e-15);
        assert!((f.direction() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let g = Frame::from_point_angle(HPoint::I, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(dist(g.basepoint(), HPoint::I) < 1e-15);
    }

    #[test]
    fn flow_unit_speed_and_additivity() {
        let f = Frame::identity();
        let t = 1.75;
        let g = f.geodesic_step(t).unwrap();
        let bp = g.basepoint();
        assert!((bp.y() - t.exp()).abs() < 1e-9 * t.exp());
        assert!((dist(HPoint::I, bp) - t).abs() < 1e-10);
        assert_eq!(f.geodesic_step(0.0).unwrap(), f);
        assert!(f.geodesic_step(1e3).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let f = Frame::from_point_angle(
                random_point(&mut rng),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
            .unwrap();
            let a = rng.gen_range(-3.0..3.0);
            let b = rng.gen_range(-3.0..3.0);
            let two = f.geodesic_step(a).unwrap().geodesic_step(b).unwrap();
            let one = f.geodesic_step(a + b).unwrap();
            assert!(dist(two.basepoint(), one.basepoint()) < 1e-8);
            assert!((dist(f.basepoint(), one.basepoint()) - (a + b).abs()) < 1e-8);
        }
    }

    #[test]
    fn renormalize_restores_det() {
        let f = Frame::identity();
        assert_eq!(f.renormalize().unwrap(), f);
        let drifted = Frame {
            m: Mobius {
                a: 1.0 + 1e-7,
                b: 0.0,
                c: 0.0,
                d: 1.0,
            },
        };
        let fixed = drifted.renormalize().unwrap();
        assert!((fixed.matrix().det() - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let f = Frame::from_point_angle(
                random_point(&mut rng),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
            .unwrap();
            let eps = rng.gen_range(-1e-7..1e-7);
            let m = f.matrix();
            let drifted = Frame {
                m: Mobius {
                    a: m.a * (1.0 + eps),
                    b: m.b,
                    c: m.c * (1.0 + eps),
                    d: m.d,
                },
            };
            let fixed = drifted.renormalize().unwrap();
            // det is a difference of products; "machine precision" scales
            // with the product magnitudes
            let fm = fixed.matrix();
            let scale = (fm.a * fm.d).abs().max((fm.b * fm.c).abs()).max(1.0);
            assert!((fm.det() - 1.0).abs() < 8.0 * f64::EPSILON * scale);
            assert!(dist(fixed.basepoint(), drifted.basepoint()) < 1e-12);
        }

        let bad = Frame {
            m: Mobius {
                a: 1.0,
                b: 0.0,
                c: 0.0,
                d: -1.0,
            },
        };
        assert!(bad.renormalize().is_err());
    }

    #[test]
    fn ball_area_shape() {
        assert_eq!(ball_area(0.0).unwrap(), 0.0);
        assert!(ball_area(-0.1).is_err());
        // Euclidean limit
        let r = 1e-3;
        let ratio = ball_area(r).unwrap() / (std::f64::consts::PI * r * r);
        assert!((ratio - 1.0).abs() < 1e-5);
        // exponential bound with c3 = pi; strictly increasing and convex
        let areas: Vec<f64> = (0..=76)
            .map(|k| {
                let t = 1.0 + 0.25 * k as f64;
                let a = ball_area(t).unwrap();
                assert!(a <= volume_bound(2, t, DEFAULT_VOLUME_BOUND_C3).unwrap());
                a
            })
            .collect();
        for w in areas.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - w[1] > w[1] - w[0]);
        }
        assert!(volume_bound(1, 1.0, 1.0).is_err());
    }
}
