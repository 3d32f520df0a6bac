//! Exact enumeration and counting of PSL(2,Z) and Gamma(2) elements by
//! hyperbolic displacement of the base point `i`.
//!
//! With the base point fixed at `i`, the displacement of an integer matrix
//! `[[a,b],[c,d]]` has the closed form `arccosh((a^2+b^2+c^2+d^2)/2)`, so
//! every ball and shell count reduces to exact integer-norm comparisons.
//! Enumeration walks coprime `(c,d)` pairs in a half-plane (one per
//! projective element), solves `ad - bc = 1` by the extended Euclidean
//! algorithm, and sweeps the integer solution family `(a0+kc, b0+kd)` over
//! the `k`-interval where the norm bound holds.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperbolic::{ball_area, Mobius};
use crate::stats;

/// Default enumeration cap; counts grow like `e^t`, so t = 16 is already
/// ~1e7 elements.
pub const DEFAULT_ENUM_CAP: f64 = 16.0;

/// Hard ceiling: beyond t = 40 the integer norms would overflow i64.
pub const HARD_ENUM_CAP: f64 = 40.0;

/// An element of PSL(2,Z): an integer matrix with `ad - bc = 1`,
/// sign-canonicalized so the first nonzero entry of `(a,b,c,d)` is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeElement {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl LatticeElement {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(Error::Domain(format!(
                "matrix [[{a},{b}],[{c},{d}]] has determinant {det}"
            )));
        }
        Ok(Self::canonical(a, b, c, d))
    }

    fn canonical(a: i64, b: i64, c: i64, d: i64) -> Self {
        for v in [a, b, c, d] {
            if v != 0 {
                return if v < 0 {
                    LatticeElement {
                        a: -a,
                        b: -b,
                        c: -c,
                        d: -d,
                    }
                } else {
                    LatticeElement { a, b, c, d }
                };
            }
        }
        unreachable!("zero matrix has determinant 0")
    }

    pub fn identity() -> Self {
        LatticeElement {
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        }
    }

    pub fn entries(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.c, self.d)
    }

    /// `a^2 + b^2 + c^2 + d^2`, the squared Frobenius norm.
    pub fn norm(&self) -> Result<i64> {
        norm_of(self.a, self.b, self.c, self.d)
            .ok_or_else(|| Error::Range("integer norm overflow".into()))
    }

    /// Hyperbolic displacement of the base point: `d(i, g i) = arccosh(norm/2)`.
    /// Exact function of the integer norm, so equal norms give bit-identical
    /// results.
    pub fn displacement(&self) -> Result<f64> {
        Ok(displacement_of_norm(self.norm()?))
    }

    pub fn mul(&self, rhs: &LatticeElement) -> Result<LatticeElement> {
        let p = |x: i64, y: i64| x.checked_mul(y);
        let a = p(self.a, rhs.a)
            .zip(p(self.b, rhs.c))
            .and_then(|(u, v)| u.checked_add(v));
        let b = p(self.a, rhs.b)
            .zip(p(self.b, rhs.d))
            .and_then(|(u, v)| u.checked_add(v));
        let c = p(self.c, rhs.a)
            .zip(p(self.d, rhs.c))
            .and_then(|(u, v)| u.checked_add(v));
        let d = p(self.c, rhs.b)
            .zip(p(self.d, rhs.d))
            .and_then(|(u, v)| u.checked_add(v));
        match (a, b, c, d) {
            (Some(a), Some(b), Some(c), Some(d)) => Ok(Self::canonical(a, b, c, d)),
            _ => Err(Error::Range("lattice element product overflow".into())),
        }
    }

    pub fn inverse(&self) -> LatticeElement {
        Self::canonical(self.d, -self.b, -self.c, self.a)
    }

    /// The element as a floating-point isometry.
    pub fn mobius(&self) -> Mobius {
        Mobius {
            a: self.a as f64,
            b: self.b as f64,
            c: self.c as f64,
            d: self.d as f64,
        }
    }
}

fn norm_of(a: i64, b: i64, c: i64, d: i64) -> Option<i64> {
    let sq = |x: i64| x.checked_mul(x);
    sq(a)?
        .checked_add(sq(b)?)?
        .checked_add(sq(c)?)?
        .checked_add(sq(d)?)
}

fn displacement_of_norm(norm: i64) -> f64 {
    crate::hyperbolic::acosh1p((norm - 2) as f64 / 2.0)
}

/// Which lattice is being enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// The full modular group PSL(2,Z).
    Psl2z,
    /// The principal congruence subgroup of level 2: a, d odd and b, c even.
    /// Torsion-free, index 6.
    Gamma2,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Psl2z => "psl2z",
            GroupKind::Gamma2 => "gamma2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psl2z" => Ok(GroupKind::Psl2z),
            "gamma2" => Ok(GroupKind::Gamma2),
            other => Err(Error::Input(format!("unknown group '{other}'"))),
        }
    }

    fn accepts_raw(&self, a: i64, b: i64, c: i64, d: i64) -> bool {
        match self {
            GroupKind::Psl2z => true,
            GroupKind::Gamma2 => a & 1 == 1 && d & 1 == 1 && b & 1 == 0 && c & 1 == 0,
        }
    }

    /// Hyperbolic area of the quotient surface.
    pub fn covolume(&self) -> f64 {
        match self {
            GroupKind::Psl2z => std::f64::consts::PI / 3.0,
            GroupKind::Gamma2 => 2.0 * std::f64::consts::PI,
        }
    }
}

/// A lattice together with a generating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    kind: GroupKind,
    generators: Vec<LatticeElement>,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, generators: Vec<LatticeElement>) -> Result<Self> {
        for g in &generators {
            if !kind.accepts_raw(g.a, g.b, g.c, g.d) {
                return Err(Error::Domain(format!(
                    "generator {g:?} violates the congruence constraints of {}",
                    kind.name()
                )));
            }
        }
        Ok(GroupSpec { kind, generators })
    }

    pub fn psl2z() -> Self {
        GroupSpec {
            kind: GroupKind::Psl2z,
            generators: vec![
                LatticeElement {
                    a: 1,
                    b: 1,
                    c: 0,
                    d: 1,
                },
                LatticeElement {
                    a: 0,
                    b: 1,
                    c: -1,
                    d: 0,
                },
            ],
        }
    }

    pub fn gamma2() -> Self {
        GroupSpec {
            kind: GroupKind::Gamma2,
            generators: vec![
                LatticeElement {
                    a: 1,
                    b: 2,
                    c: 0,
                    d: 1,
                },
                LatticeElement {
                    a: 1,
                    b: 0,
                    c: 2,
                    d: 1,
                },
            ],
        }
    }

    pub fn from_kind(kind: GroupKind) -> Self {
        match kind {
            GroupKind::Psl2z => Self::psl2z(),
            GroupKind::Gamma2 => Self::gamma2(),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[LatticeElement] {
        &self.generators
    }

    pub fn contains(&self, el: &LatticeElement) -> bool {
        self.kind.accepts_raw(el.a, el.b, el.c, el.d)
    }
}

fn integer_sqrt(m: i64) -> i64 {
    if m < 0 {
        return -1;
    }
    let mut r = (m as f64).sqrt() as i64;
    while r > 0 && r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

/// Extended gcd: returns `(g, x, y)` with `x*r0 + y*r1 = g`, g = gcd >= 0
/// up to sign of the inputs.
fn ext_gcd(r0: i64, r1: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (r0, r1);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0, s0, t0)
}

fn gcd(a: i64, b: i64) -> i64 {
    ext_gcd(a.abs(), b.abs()).0.abs()
}

/// Integer norm bound corresponding to displacement `t`: an element lies in
/// the ball of radius `t` iff its norm is at most `floor(2 cosh t)`.
pub fn norm_bound(t: f64) -> i64 {
    (2.0 * t.cosh()).floor() as i64
}

/// Visit every canonical element of the group with norm <= `m_max` in the
/// `(c,d)` stripe for one fixed `c`. Each projective element is produced
/// exactly once across the half-plane `c > 0 or (c = 0, d > 0)`.
fn visit_stripe(c: i64, m_max: i64, kind: GroupKind, sink: &mut impl FnMut(LatticeElement)) {
    if kind == GroupKind::Gamma2 && c & 1 == 1 {
        return;
    }
    let d_bound = integer_sqrt(m_max - c * c);
    let d_values: Box<dyn Iterator<Item = i64>> = if c == 0 {
        Box::new(std::iter::once(1))
    } else {
        Box::new(-d_bound..=d_bound)
    };
    for d in d_values {
        if gcd(c, d) != 1 {
            continue;
        }
        // Solve a*d - b*c = 1: ext_gcd gives x*d + y*c = g.
        let (g, x, y) = ext_gcd(d, c);
        debug_assert!(g.abs() == 1);
        let (a0, b0) = if g == 1 { (x, -y) } else { (-x, y) };
        let aa = c * c + d * d;
        let bb = a0 * c + b0 * d;
        let cc = a0 * a0 + b0 * b0;
        let m_rem = m_max - aa;
        if m_rem < 0 {
            continue;
        }
        // quadratic aa*k^2 + 2*bb*k + cc <= m_rem
        let disc = (bb as i128) * (bb as i128) - (aa as i128) * ((cc - m_rem) as i128);
        if disc < 0 {
            continue;
        }
        let root = (disc as f64).sqrt();
        let k_lo = ((-(bb as f64) - root) / aa as f64).floor() as i64 - 1;
        let k_hi = ((-(bb as f64) + root) / aa as f64).ceil() as i64 + 1;
        for k in k_lo..=k_hi {
            let a = a0 + k * c;
            let b = b0 + k * d;
            match norm_of(a, b, c, d) {
                Some(n) if n <= m_max && kind.accepts_raw(a, b, c, d) => {
                    sink(LatticeElement::canonical(a, b, c, d));
                }
                _ => {}
            }
        }
    }
}

fn check_cap(t_max: f64, cap: f64) -> Result<()> {
    if !(t_max >= 0.0) {
        return Err(Error::Domain(format!("negative radius {t_max}")));
    }
    if cap > HARD_ENUM_CAP {
        return Err(Error::Range(format!(
            "cap {cap} beyond hard ceiling {HARD_ENUM_CAP}"
        )));
    }
    if t_max > cap {
        return Err(Error::Range(format!(
            "enumeration radius {t_max} beyond cap {cap}; pass an explicit larger cap"
        )));
    }
    Ok(())
}

/// All canonical elements with displacement <= `t_max`, sorted. Enforces the
/// default cap of t = 16; use [`enumerate_ball_capped`] to override.
pub fn enumerate_ball(t_max: f64, group: &GroupSpec) -> Result<Vec<LatticeElement>> {
    enumerate_ball_capped(t_max, group, DEFAULT_ENUM_CAP)
}

/// [`enumerate_ball`] with an explicit cap. Work parallelizes over `(c,d)`
/// stripes; the sorted result is independent of the partitioning.
pub fn enumerate_ball_capped(
    t_max: f64,
    group: &GroupSpec,
    cap: f64,
) -> Result<Vec<LatticeElement>> {
    check_cap(t_max, cap)?;
    let m_max = norm_bound(t_max);
    let c_max = integer_sqrt(m_max);
    let mut out: Vec<LatticeElement> = (0..=c_max)
        .into_par_iter()
        .fold(Vec::new, |mut acc: Vec<LatticeElement>, c| {
            visit_stripe(c, m_max, group.kind(), &mut |el| acc.push(el));
            acc
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });
    out.par_sort_unstable();
    Ok(out)
}

/// Counts of lattice elements in displacement balls around `i`, stored as
/// exact integer-norm multiplicities. Holds the full resolution of the
/// enumeration: queries at any radius within range are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCurve {
    kind: GroupKind,
    t_max: f64,
    m_max: i64,
    /// (norm, cumulative count of elements with norm <= this norm),
    /// strictly increasing in both components.
    cumulative: Vec<(i64, u64)>,
}

impl CountCurve {
    pub fn build(t_max: f64, group: &GroupSpec) -> Result<Self> {
        Self::build_capped(t_max, group, DEFAULT_ENUM_CAP)
    }

    pub fn build_capped(t_max: f64, group: &GroupSpec, cap: f64) -> Result<Self> {
        check_cap(t_max, cap)?;
        let m_max = norm_bound(t_max);
        let c_max = integer_sqrt(m_max);
        // histogram per stripe, merged by addition: exact and order-independent
        let histogram: HashMap<i64, u64> = (0..=c_max)
            .into_par_iter()
            .fold(HashMap::new, |mut acc: HashMap<i64, u64>, c| {
                visit_stripe(c, m_max, group.kind(), &mut |el| {
                    *acc.entry(el.norm().expect("norm within bound"))
                        .or_insert(0) += 1;
                });
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        let mut norms: Vec<(i64, u64)> = histogram.into_iter().collect();
        norms.sort_unstable();
        let mut cum = 0u64;
        for entry in &mut norms {
            cum += entry.1;
            entry.1 = cum;
        }
        Self::from_parts(group.kind(), t_max, norms)
    }

    /// Reassemble a curve from its stored parts (the cache file format).
    pub fn from_parts(kind: GroupKind, t_max: f64, cumulative: Vec<(i64, u64)>) -> Result<Self> {
        if !(t_max >= 0.0) {
            return Err(Error::Input(format!("bad curve range {t_max}")));
        }
        for w in cumulative.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::Input("count curve not strictly increasing".into()));
            }
        }
        if cumulative.first().map(|&(m, _)| m < 2).unwrap_or(true) {
            return Err(Error::Input("count curve misses the identity norm".into()));
        }
        Ok(CountCurve {
            kind,
            t_max,
            m_max: norm_bound(t_max),
            cumulative,
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// The (norm, cumulative count) table.
    pub fn norm_counts(&self) -> &[(i64, u64)] {
        &self.cumulative
    }

    /// Number of elements with displacement <= t. Zero for t < 0; an error
    /// past the enumerated range (the caller must extend the cache).
    pub fn count(&self, t: f64) -> Result<u64> {
        if t < 0.0 {
            return Ok(0);
        }
        if t > self.t_max {
            return Err(Error::Range(format!(
                "t = {t} beyond enumerated range {}",
                self.t_max
            )));
        }
        let bound = norm_bound(t).min(self.m_max);
        let idx = self.cumulative.partition_point(|&(m, _)| m <= bound);
        Ok(if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1].1
        })
    }

    /// Census of the shell with displacement in `(h*i - r, h*i + r]`.
    pub fn census(&self, h: f64, i: u32, r: f64) -> Result<ShellCensus> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("shell half-width {r} outside (0,1)")));
        }
        if !(h > 0.0) {
            return Err(Error::Domain(format!("step length {h} not positive")));
        }
        let mid = h * i as f64;
        let count = self.count(mid + r)? - self.count(mid - r)?;
        Ok(ShellCensus {
            h,
            i,
            r,
            count,
            elements: None,
        })
    }
}

/// Counts (and optionally the members) of one displacement shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellCensus {
    pub h: f64,
    pub i: u32,
    pub r: f64,
    pub count: u64,
    pub elements: Option<Vec<LatticeElement>>,
}

/// Shell census carrying the member list; enumerates up to `h*i + r`.
pub fn census_with_elements(h: f64, i: u32, r: f64, group: &GroupSpec) -> Result<ShellCensus> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("shell half-width {r} outside (0,1)")));
    }
    let mid = h * i as f64;
    let all = enumerate_ball(mid + r, group)?;
    let lo = if mid - r < 0.0 {
        1
    } else {
        norm_bound(mid - r)
    };
    let hi = norm_bound(mid + r);
    let members: Vec<LatticeElement> = all
        .into_iter()
        .filter(|el| {
            let n = el.norm().expect("norm within bound");
            n > lo && n <= hi
        })
        .collect();
    Ok(ShellCensus {
        h,
        i,
        r,
        count: members.len() as u64,
        elements: Some(members),
    })
}

/// Main term of the counting asymptotics: `kappa * ball_area(t)`, with the
/// normalization `kappa` fitted from an enumeration (see
/// [`fit_error_exponent`]), not asserted a priori.
pub fn main_term(t: f64, kappa: f64) -> Result<f64> {
    Ok(kappa * ball_area(t)?)
}

/// Fitted counting constants: `N(t) ~ kappa * ball_area(t)` with error
/// `O(main^q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorFit {
    pub kappa: f64,
    pub q: f64,
}

impl ErrorFit {
    /// The derived shell-regime constant `c4 = 1 / ((1-q)(n-1))`; `None`
    /// when the fitted exponent is degenerate (q >= 1).
    pub fn c4(&self, n: u32) -> Option<f64> {
        if self.q >= 1.0 || n < 2 {
            return None;
        }
        Some(1.0 / ((1.0 - self.q) * (n - 1) as f64))
    }
}

/// Fit the counting normalization and error exponent on `[t_lo, t_hi]`:
/// `kappa` is the mean of `N(t)/ball_area(t)` over the top quartile of the
/// range, and `q` the least-squares slope of `ln|N - kappa*ball_area|`
/// against `ln(ball_area)` on a grid of spacing 0.25, excluding exact-zero
/// residuals.
pub fn fit_error_exponent(curve: &CountCurve, t_lo: f64, t_hi: f64) -> Result<ErrorFit> {
    if !(t_lo > 0.0) || t_hi > curve.t_max() {
        return Err(Error::Input(format!(
            "fit range [{t_lo}, {t_hi}] outside curve range (0, {}]",
            curve.t_max()
        )));
    }
    let span = t_hi - t_lo;
    if span < 4.0 {
        return Err(Error::Input(format!("fit range span {span} < 4")));
    }
    let steps = (span / 0.25).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| t_lo + 0.25 * k as f64).collect();
    let plateau_lo = t_hi - span / 4.0;
    let plateau: Vec<f64> = grid
        .iter()
        .filter(|&&t| t >= plateau_lo - 1e-12)
        .map(|&t| curve.count(t).map(|n| n as f64 / ball_area(t).unwrap()))
        .collect::<Result<_>>()?;
    let kappa = stats::mean(&plateau);

    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &t in &grid {
        let area = ball_area(t)?;
        let resid = curve.count(t)? as f64 - kappa * area;
        if resid == 0.0 {
            continue;
        }
        xs.push(area.ln());
        ys.push(resid.abs().ln());
    }
    let (q, _) = stats::linear_fit(&xs, &ys)
        .ok_or_else(|| Error::Input("too few usable residuals for the exponent fit".into()))?;
    Ok(ErrorFit { kappa, q })
}

/// Regime gate for the shell bound: the bound is asserted only when
/// `h*i >= max(-c4 ln r, r + t0)`.
#[derive(Debug, Clone, Copy)]
pub struct ShellRegime {
    pub c4: f64,
    pub t0: f64,
}

impl ShellRegime {
    pub fn admits(&self, h: f64, i: u32, r: f64) -> bool {
        h * i as f64 >= (-self.c4 * r.ln()).max(r + self.t0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShellBoundRow {
    pub i: u32,
    pub r: f64,
    pub count: u64,
    /// `count / (r e^{h i})`
    pub ratio: f64,
    pub in_regime: bool,
    /// Ratio exceeded `flag_factor` times the running max over smaller `i`
    /// at the same `r` (within the regime).
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct ShellBoundReport {
    pub h: f64,
    pub rows: Vec<ShellBoundRow>,
    /// Extremes of the ratio over in-regime rows.
    pub max_ratio: f64,
    pub min_ratio: f64,
}

/// Sweep shell censuses over an `(i, r)` table and report the ratios
/// `#shell / (r e^{h i})` whose boundedness the shell estimate asserts.
pub fn verify_shell_bound(
    curve: &CountCurve,
    h: f64,
    i_range: RangeInclusive<u32>,
    r_grid: &[f64],
    regime: ShellRegime,
    flag_factor: f64,
) -> Result<ShellBoundReport> {
    let mut rows = Vec::new();
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    for &r in r_grid {
        let mut running_max: Option<f64> = None;
        for i in i_range.clone() {
            let census = curve.census(h, i, r)?;
            let ratio = census.count as f64 / (r * (h * i as f64).exp());
            let in_regime = regime.admits(h, i, r);
            let mut flagged = false;
            if in_regime {
                max_ratio = max_ratio.max(ratio);
                min_ratio = min_ratio.min(ratio);
                if let Some(m) = running_max {
                    flagged = ratio > flag_factor * m;
                }
                running_max = Some(running_max.unwrap_or(0.0).max(ratio));
            }
            rows.push(ShellBoundRow {
                i,
                r,
                count: census.count,
                ratio,
                in_regime,
                flagged,
            });
        }
    }
    Ok(ShellBoundReport {
        h,
        rows,
        max_ratio,
        min_ratio,
    })
}

/// Well-roundedness defect `(area(t+eps) - area(t-eps)) / (eps * area(t-eps))`.
/// Tends to `(e^{2 eps} - 1)/eps` as t grows and to 2 as eps -> 0.
pub fn well_roundedness_check(t: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon {eps} outside (0,1)")));
    }
    if !(t > eps) {
        return Err(Error::Domain(format!(
            "need t > eps, got t = {t}, eps = {eps}"
        )));
    }
    Ok((ball_area(t + eps)? - ball_area(t - eps)?) / (eps * ball_area(t - eps)?))
}

#[derive(Debug, Clone)]
pub struct WellRoundednessReport {
    pub eps: f64,
    pub c2: f64,
    /// (t, defect, exceeded) rows over the sweep grid.
    pub rows: Vec<(f64, f64, bool)>,
}

/// Sweep the well-roundedness defect over `t in [2, 16]` and flag points
/// exceeding the configured constant (default 10).
pub fn well_roundedness_sweep(eps: f64, c2: f64) -> Result<WellRoundednessReport> {
    let mut rows = Vec::new();
    let mut t = 2.0;
    while t <= 16.0 + 1e-12 {
        let v = well_roundedness_check(t, eps)?;
        rows.push((t, v, v > c2));
        t += 0.5;
    }
    Ok(WellRoundednessReport { eps, c2, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn displacement_examples() {
        let id = LatticeElement::identity();
        assert_eq!(id.displacement().unwrap(), 0.0);
        let s = LatticeElement::new(0, -1, 1, 0).unwrap();
        assert_eq!(s.displacement().unwrap(), 0.0);
        let t = LatticeElement::new(1, 1, 0, 1).unwrap();
        assert!((t.displacement().unwrap() - 1.5f64.acosh()).abs() < 1e-15);
        // equal integer norms give bit-identical displacements
        let l = LatticeElement::new(1, 0, 1, 1).unwrap();
        assert_eq!(
            t.displacement().unwrap().to_bits(),
            l.displacement().unwrap().to_bits()
        );
    }

    #[test]
    fn canonical_sign() {
        let s = LatticeElement::new(0, -1, 1, 0).unwrap();
        assert_eq!(s.entries(), (0, 1, -1, 0));
        assert_eq!(
            LatticeElement::new(-1, 0, 0, -1).unwrap(),
            LatticeElement::identity()
        );
        assert!(LatticeElement::new(1, 1, 1, 1).is_err());
        let t = LatticeElement::new(1, 1, 0, 1).unwrap();
        assert_eq!(t.mul(&t.inverse()).unwrap(), LatticeElement::identity());
        // generator lists must satisfy the congruence constraints
        assert!(GroupSpec::new(GroupKind::Gamma2, vec![t]).is_err());
        assert!(GroupSpec::new(GroupKind::Gamma2, vec![LatticeElement::new(1, 2, 0, 1).unwrap()])
            .is_ok());
    }

    #[test]
    fn stabilizer_ball() {
        let ball = enumerate_ball(0.0, &GroupSpec::psl2z()).unwrap();
        assert_eq!(ball.len(), 2);
        assert!(ball.contains(&LatticeElement::identity()));
        assert!(ball.contains(&LatticeElement::new(0, -1, 1, 0).unwrap()));
        let g2 = enumerate_ball(0.0, &GroupSpec::gamma2()).unwrap();
        assert_eq!(g2, vec![LatticeElement::identity()]);
    }

    /// Counts cross-checked against an independent quadruple-loop
    /// implementation (see tests/oracle.rs for the in-tree oracle itself).
    #[test]
    fn frozen_small_counts() {
        let psl = GroupSpec::psl2z();
        let g2 = GroupSpec::gamma2();
        let expected = [
            (0.0, 2, 1),
            (1.0, 10, 1),
            (2.0, 26, 5),
            (3.0, 66, 13),
            (4.0, 162, 25),
        ];
        for (t, n_psl, n_g2) in expected {
            assert_eq!(enumerate_ball(t, &psl).unwrap().len(), n_psl, "PSL2Z t={t}");
            assert_eq!(enumerate_ball(t, &g2).unwrap().len(), n_g2, "Gamma2 t={t}");
        }
    }

    #[test]
    fn curve_matches_enumeration_and_cap() {
        let psl = GroupSpec::psl2z();
        let curve = CountCurve::build(5.0, &psl).unwrap();
        for t in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0] {
            assert_eq!(
                curve.count(t).unwrap() as usize,
                enumerate_ball(t, &psl).unwrap().len()
            );
        }
        assert_eq!(curve.count(-1.0).unwrap(), 0);
        assert!(curve.count(5.1).is_err());
        assert!(enumerate_ball(17.0, &psl).is_err());
        assert!(enumerate_ball_capped(17.0, &psl, 50.0).is_err());
        // monotone on a grid
        let mut prev = 0;
        for k in 0..=50 {
            let n = curve.count(0.1 * k as f64).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn shell_census_examples() {
        let psl = GroupSpec::psl2z();
        let curve = CountCurve::build(6.0, &psl).unwrap();
        let c = curve.census(1.0, 0, 0.5).unwrap();
        assert_eq!(c.count, 2);
        // frozen from the brute-force oracle
        let c = curve.census(1.0, 5, 0.1).unwrap();
        assert_eq!(c.count, 112);
        let with_members = census_with_elements(1.0, 5, 0.1, &psl).unwrap();
        assert_eq!(with_members.count, 112);
        assert_eq!(with_members.elements.unwrap().len(), 112);
        assert!(curve.census(1.0, 3, 1.5).is_err());
    }

    #[test]
    fn shell_partition_identity() {
        let psl = GroupSpec::psl2z();
        let curve = CountCurve::build(7.0, &psl).unwrap();
        for h in [0.5, 1.0, 1.3] {
            let i_top = (6.0 / h) as u32;
            let mut total = 0u64;
            for i in 0..=i_top {
                total += curve.census(h, i, h / 2.0).unwrap().count;
            }
            assert_eq!(total, curve.count(h * i_top as f64 + h / 2.0).unwrap());
        }
    }

    #[test]
    fn gamma2_subset_of_psl2z() {
        let psl: HashSet<_> = enumerate_ball(5.0, &GroupSpec::psl2z())
            .unwrap()
            .into_iter()
            .collect();
        let g2 = enumerate_ball(5.0, &GroupSpec::gamma2()).unwrap();
        assert!(!g2.is_empty());
        for el in g2 {
            assert!(psl.contains(&el));
        }
    }

    #[test]
    fn synthetic_fit_recovers_exponent() {
        // Synthetic curves stand in for the enumeration; expected values
        // computed once with an independent implementation of the same
        // procedure and frozen here. The one-signed correction e^{t/2}
        // biases the plateau normalization slightly, which drags the
        // fitted exponent below the constructed 0.5; the oscillating
        // variant has an unbiased plateau and recovers it.
        // Entries sit exactly at the fitter's grid points (the same floating
        // expression), so curve.count(t) returns round(f(t)) on the grid.
        let synth = |f: &dyn Fn(f64) -> f64| {
            let mut norms = Vec::new();
            let mut cum = 0u64;
            for k in 0..=56 {
                let t = 8.0 + 0.25 * k as f64;
                let m = norm_bound(t);
                let n = f(t).round() as u64;
                assert!(n > cum, "synthetic curve must increase");
                cum = n;
                norms.push((m, cum));
            }
            CountCurve::from_parts(GroupKind::Psl2z, 22.0, norms).unwrap()
        };
        let one_signed = synth(&|t: f64| 3.0 * t.exp() + (0.5 * t).exp());
        let fit = fit_error_exponent(&one_signed, 8.0, 22.0).unwrap();
        assert!((0.35..=0.50).contains(&fit.q), "one-signed q = {}", fit.q);
        assert!((fit.kappa - 3.0 / std::f64::consts::PI).abs() < 0.01);

        let rounding_only = synth(&|t: f64| 3.0 * t.exp());
        let fit = fit_error_exponent(&rounding_only, 8.0, 22.0).unwrap();
        assert!(fit.q <= 0.1, "rounding-only q = {}", fit.q);

        let oscillating = synth(&|t: f64| 3.0 * t.exp() + (7.0 * t).cos() * (0.5 * t).exp());
        let fit = fit_error_exponent(&oscillating, 8.0, 22.0).unwrap();
        assert!((0.40..=0.60).contains(&fit.q), "oscillating q = {}", fit.q);

        assert!(fit_error_exponent(&one_signed, 8.0, 11.0).is_err());
        assert!(fit_error_exponent(&one_signed, 8.0, 23.0).is_err());
    }

    #[test]
    fn well_roundedness_values() {
        // closed form: (cosh(t+e) - cosh(t-e)) / (e (cosh(t-e) - 1))
        let v = well_roundedness_check(10.0, 0.1).unwrap();
        let expect = 2.0 * 10.0f64.sinh() * 0.1f64.sinh() / (0.1 * (9.9f64.cosh() - 1.0));
        assert!((v - expect).abs() < 1e-12);
        assert!((2.0..2.4).contains(&v));
        // decreasing in t toward (e^{2 eps} - 1)/eps
        let limit = (0.2f64.exp() - 1.0) / 0.1;
        let mut prev = f64::INFINITY;
        for k in 0..=28 {
            let t = 2.0 + 0.5 * k as f64;
            let v = well_roundedness_check(t, 0.1).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!((prev - limit).abs() < 1e-4);
        // eps -> 0 limit equals 2 d/dt ln(area) (approx 2 for large t)
        let v = well_roundedness_check(12.0, 1e-6).unwrap();
        let deriv = 2.0 * 12.0f64.sinh() / (12.0f64.cosh() - 1.0);
        assert!((v - deriv).abs() < 1e-4);
        assert!(well_roundedness_check(10.0, 1.5).is_err());
        assert!(well_roundedness_check(0.05, 0.1).is_err());
        let sweep = well_roundedness_sweep(0.1, 10.0).unwrap();
        assert!(sweep.rows.iter().all(|&(_, _, exceeded)| !exceeded));
    }

    #[test]
    fn main_term_zero() {
        assert_eq!(main_term(0.0, 1.7).unwrap(), 0.0);
        assert!(main_term(-1.0, 1.7).is_err());
    }
}
