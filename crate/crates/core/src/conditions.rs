//! Numeric evaluators for the radius-sequence conditions: the divergence
//! sum, the slope condition `-ln r_t / r_t << t`, the mass condition
//! `mu(B_t) >> ln t / t`, the window condition comparing a short window of
//! `r_t^{n-1}` against the full prefix of `r_t^n`, the explicit-constant
//! implication between the two, and the second-moment bound parts.
//!
//! The conditions quantify over "large enough" indices, so the verdicts
//! here are explicitly empirical: a bounded-ratio condition holds
//! empirically when its running sup gains nothing over the last decade of
//! the tested range, and a bounded-below condition when its running inf
//! loses nothing there. Sweeps shorter than two decades are inconclusive.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::hyperbolic::ball_area;
use crate::lattice::GroupKind;
use crate::stats::KahanSum;
use crate::targets::RadiusSequence;

/// How a condition fared over the tested range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HoldsEmpirically,
    FailsEmpirically,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::HoldsEmpirically => "holds-empirically",
            Verdict::FailsEmpirically => "fails-empirically",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Parameters a condition check ran with.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConditionParams {
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub n: u32,
    pub h: Option<f64>,
    pub r_cap: Option<f64>,
}

/// Outcome of one condition check.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: &'static str,
    pub verdict: Verdict,
    /// subsampled (s, ratio) witness points
    pub witness: Vec<(u64, f64)>,
    pub sup_ratio: f64,
    /// indices excluded from the check (e.g. r_s >= 1 in the slope ratio)
    pub excluded: u64,
    pub params: ConditionParams,
}

fn witness_stride(range: &RangeInclusive<u64>) -> u64 {
    ((range.end() - range.start()) / 512).max(1)
}

/// Decade split for the stabilization rule. None when the range spans less
/// than two decades.
fn decade_split(range: &RangeInclusive<u64>) -> Option<u64> {
    let (lo, hi) = (*range.start(), *range.end());
    if hi < lo.max(1) * 100 {
        return None;
    }
    Some(hi / 10)
}

/// Verdict for a "ratio stays bounded" condition: the sup over the last
/// decade must not exceed the sup over everything before it.
fn bounded_verdict(split: Option<u64>, sup_early: f64, sup_late: f64) -> Verdict {
    match split {
        None => Verdict::Inconclusive,
        Some(_) => {
            if sup_late <= sup_early {
                Verdict::HoldsEmpirically
            } else {
                Verdict::FailsEmpirically
            }
        }
    }
}

/// Prefix sums of `r_t^exponent` for t = 1..=t_max; indices below the
/// sequence cutoff contribute zero. Entry `k` holds the sum through t = k+1.
pub fn partial_sums(seq: &RadiusSequence, exponent: f64, t_max: u64) -> Result<Vec<f64>> {
    if t_max < 1 {
        return Err(Error::Domain("t_max must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(t_max as usize);
    let mut acc = KahanSum::new();
    for t in 1..=t_max {
        if t >= seq.cutoff() {
            acc.add(seq.radius(t)?.powf(exponent));
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// The slope condition: `(-ln r_s / r_s) / s` stays bounded for large s.
/// Records the sup ratio as the working constant C0 (or uses the supplied
/// override as the bound to test against).
pub fn check_condition3(
    seq: &RadiusSequence,
    s_range: RangeInclusive<u64>,
    c0_override: Option<f64>,
) -> Result<ConditionReport> {
    let lo = (*s_range.start()).max(seq.cutoff());
    let hi = *s_range.end();
    if lo > hi {
        return Err(Error::Domain("empty index range".into()));
    }
    let range = lo..=hi;
    let split = decade_split(&range);
    let stride = witness_stride(&range);
    let mut witness = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    let mut sup_early = f64::NEG_INFINITY;
    let mut sup_late = f64::NEG_INFINITY;
    let mut excluded = 0u64;
    for s in lo..=hi {
        let r = seq.radius(s)?;
        if r >= 1.0 {
            excluded += 1;
            continue;
        }
        let ratio = -r.ln() / (r * s as f64);
        sup = sup.max(ratio);
        match split {
            Some(cut) if s > cut => sup_late = sup_late.max(ratio),
            _ => sup_early = sup_early.max(ratio),
        }
        if (s - lo).is_multiple_of(stride) || s == hi {
            witness.push((s, ratio));
        }
    }
    if witness.is_empty() {
        return Ok(ConditionReport {
            condition: "condition3",
            verdict: Verdict::Inconclusive,
            witness,
            sup_ratio: f64::NAN,
            excluded,
            params: ConditionParams {
                n: seq.n(),
                ..Default::default()
            },
        });
    }
    let verdict = match c0_override {
        Some(c0) => {
            if sup_late.max(sup_early) <= c0 {
                Verdict::HoldsEmpirically
            } else {
                Verdict::FailsEmpirically
            }
        }
        None => bounded_verdict(split, sup_early, sup_late),
    };
    Ok(ConditionReport {
        condition: "condition3",
        verdict,
        witness,
        sup_ratio: sup,
        excluded,
        params: ConditionParams {
            c0: Some(c0_override.unwrap_or(sup)),
            n: seq.n(),
            ..Default::default()
        },
    })
}

/// The mass condition: `mu(B_t) * t / ln t` must stay bounded away from 0.
/// Fails empirically when the running inf keeps dropping in the last decade.
/// For n = 2 the measure uses the exact ball area over the surface area of
/// the given group; for higher n it falls back to the `r^n` proxy.
pub fn check_condition4(
    seq: &RadiusSequence,
    kind: Option<GroupKind>,
    s_range: RangeInclusive<u64>,
) -> Result<ConditionReport> {
    let lo = (*s_range.start()).max(seq.cutoff()).max(2);
    let hi = *s_range.end();
    if lo > hi {
        return Err(Error::Domain("empty index range".into()));
    }
    let range = lo..=hi;
    let split = decade_split(&range);
    let stride = witness_stride(&range);
    let mut witness = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    let mut inf_early = f64::INFINITY;
    let mut inf_late = f64::INFINITY;
    for s in lo..=hi {
        let r = seq.radius(s)?;
        let mass = match (seq.n(), kind) {
            (2, Some(k)) => ball_area(r)? / k.covolume(),
            (n, _) => r.powi(n as i32),
        };
        let ratio = mass * s as f64 / (s as f64).ln();
        sup = sup.max(ratio);
        match split {
            Some(cut) if s > cut => inf_late = inf_late.min(ratio),
            _ => inf_early = inf_early.min(ratio),
        }
        if (s - lo).is_multiple_of(stride) || s == hi {
            witness.push((s, ratio));
        }
    }
    let verdict = match split {
        None => Verdict::Inconclusive,
        Some(_) => {
            if inf_late >= inf_early {
                Verdict::HoldsEmpirically
            } else {
                Verdict::FailsEmpirically
            }
        }
    };
    Ok(ConditionReport {
        condition: "condition4",
        verdict,
        witness,
        sup_ratio: sup,
        excluded: 0,
        params: ConditionParams {
            n: seq.n(),
            ..Default::default()
        },
    })
}

/// Window-to-prefix ratio of the general divergence condition:
/// `rho(s) = sum_{t=[s + C1 ln r_s - C2]}^{s} r_t^{n-1} / sum_{t<=s} r_t^n`,
/// with the bracket meaning floor and the window clamped to the cutoff.
pub struct WindowRatios {
    pub ratios: Vec<(u64, f64)>,
    pub sup: f64,
    pub sup_early: f64,
    pub sup_late: f64,
    pub clamped: u64,
    pub split: Option<u64>,
}

fn window_ratios(
    seq: &RadiusSequence,
    c1: f64,
    c2: f64,
    s_range: &RangeInclusive<u64>,
) -> Result<WindowRatios> {
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return Err(Error::Domain("window constants must be nonnegative".into()));
    }
    let lo = (*s_range.start()).max(seq.cutoff());
    let hi = *s_range.end();
    if lo > hi {
        return Err(Error::Domain("empty index range".into()));
    }
    let range = lo..=hi;
    let split = decade_split(&range);
    let n = seq.n();
    // prefix tables over [cutoff, hi]; index t holds the sum through t
    let lower = partial_sums(seq, (n - 1) as f64, hi)?;
    let full = partial_sums(seq, n as f64, hi)?;
    let prefix_low = |t: u64| -> f64 {
        if t < 1 {
            0.0
        } else {
            lower[(t.min(hi) - 1) as usize]
        }
    };
    let mut ratios = Vec::with_capacity((hi - lo + 1) as usize);
    let mut sup = f64::NEG_INFINITY;
    let mut sup_early = f64::NEG_INFINITY;
    let mut sup_late = f64::NEG_INFINITY;
    let mut clamped = 0u64;
    for s in lo..=hi {
        let r = seq.radius(s)?;
        let raw = (s as f64 + c1 * r.ln() - c2).floor();
        let mut start = if raw < 1.0 { 1 } else { raw as u64 };
        if start < seq.cutoff() {
            start = seq.cutoff();
            clamped += 1;
        }
        let window = if start > s {
            0.0
        } else {
            prefix_low(s) - prefix_low(start - 1)
        };
        let denom = full[(s - 1) as usize];
        let rho = if denom > 0.0 { window / denom } else { 0.0 };
        sup = sup.max(rho);
        match split {
            Some(cut) if s > cut => sup_late = sup_late.max(rho),
            _ => sup_early = sup_early.max(rho),
        }
        ratios.push((s, rho));
    }
    Ok(WindowRatios {
        ratios,
        sup,
        sup_early,
        sup_late,
        clamped,
        split,
    })
}

/// Check the window condition with given constants.
pub fn check_condition5(
    seq: &RadiusSequence,
    c1: f64,
    c2: f64,
    s_range: RangeInclusive<u64>,
) -> Result<ConditionReport> {
    let w = window_ratios(seq, c1, c2, &s_range)?;
    let stride = witness_stride(&s_range);
    let witness: Vec<(u64, f64)> = w
        .ratios
        .iter()
        .copied()
        .filter(|&(s, _)| (s - w.ratios[0].0) % stride == 0 || s == *s_range.end())
        .collect();
    Ok(ConditionReport {
        condition: "condition5",
        verdict: bounded_verdict(w.split, w.sup_early, w.sup_late),
        witness,
        sup_ratio: w.sup,
        excluded: w.clamped,
        params: ConditionParams {
            c1: Some(c1),
            c2: Some(c2),
            n: seq.n(),
            ..Default::default()
        },
    })
}

/// Result of the explicit-constant implication test.
#[derive(Debug, Clone)]
pub struct Lemma41Report {
    /// C0 from the slope condition over the same range
    pub c0: f64,
    /// the explicit constant `C3 = 2 C1 C0 + 1`
    pub c3: f64,
    /// indices beyond which the bound must hold: max of the range start and
    /// the thresholds where `-ln r_s >= C2/C1` and `r_s < 1/(4 C1^2 C0^2)`
    pub threshold: u64,
    /// first `(s, rho(s))` with `rho(s) > C3` beyond the threshold, if any
    pub first_violation: Option<(u64, f64)>,
    pub base: ConditionReport,
}

/// Verify the slope condition's explicit constant: beyond a computable
/// threshold, the window-to-prefix ratio stays below `C3 = 2 C1 C0 + 1`.
/// Inconclusive when the slope condition itself does not hold.
pub fn lemma41_check(
    seq: &RadiusSequence,
    c1: f64,
    c2: f64,
    s_range: RangeInclusive<u64>,
) -> Result<Lemma41Report> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Domain("need C1, C2 > 0".into()));
    }
    let cond3 = check_condition3(seq, s_range.clone(), None)?;
    let c0 = cond3.sup_ratio;
    if cond3.verdict != Verdict::HoldsEmpirically {
        return Ok(Lemma41Report {
            c0,
            c3: f64::NAN,
            threshold: u64::MAX,
            first_violation: None,
            base: ConditionReport {
                condition: "lemma41",
                verdict: Verdict::Inconclusive,
                witness: cond3.witness,
                sup_ratio: f64::NAN,
                excluded: cond3.excluded,
                params: ConditionParams {
                    c0: Some(c0),
                    c1: Some(c1),
                    c2: Some(c2),
                    n: seq.n(),
                    ..Default::default()
                },
            },
        });
    }
    let c3 = 2.0 * c1 * c0 + 1.0;
    let lo = (*s_range.start()).max(seq.cutoff());
    let hi = *s_range.end();
    // monotone radii: find the first indices past the two radius thresholds
    let first_below = |level: f64| -> u64 {
        let mut s = lo;
        while s <= hi {
            if seq.radius(s).map(|r| r < level).unwrap_or(false) {
                return s;
            }
            s += 1;
        }
        hi + 1
    };
    let s1 = first_below((-c2 / c1).exp() + f64::EPSILON);
    let s2 = first_below(1.0 / (4.0 * c1 * c1 * c0 * c0));
    let threshold = lo.max(s1).max(s2);
    let w = window_ratios(seq, c1, c2, &s_range)?;
    let mut first_violation = None;
    let mut sup_past = f64::NEG_INFINITY;
    for &(s, rho) in &w.ratios {
        if s <= threshold {
            continue;
        }
        sup_past = sup_past.max(rho);
        if rho > c3 {
            first_violation = Some((s, rho));
            break;
        }
    }
    let verdict = if threshold >= hi {
        Verdict::Inconclusive
    } else if first_violation.is_none() {
        Verdict::HoldsEmpirically
    } else {
        Verdict::FailsEmpirically
    };
    let stride = witness_stride(&s_range);
    let witness: Vec<(u64, f64)> = w
        .ratios
        .iter()
        .copied()
        .filter(|&(s, _)| s > threshold && ((s - threshold - 1) % stride == 0 || s == hi))
        .collect();
    Ok(Lemma41Report {
        c0,
        c3,
        threshold,
        first_violation,
        base: ConditionReport {
            condition: "lemma41",
            verdict,
            witness,
            sup_ratio: sup_past,
            excluded: w.clamped,
            params: ConditionParams {
                c0: Some(c0),
                c1: Some(c1),
                c2: Some(c2),
                n: seq.n(),
                ..Default::default()
            },
        },
    })
}

/// The constant `c_R = (6R + 2) / h` of the second-moment split.
pub fn c_r(r_cap: f64, h: f64) -> f64 {
    (6.0 * r_cap + 2.0) / h
}

/// The index split `V_s = max(-c4 ln r_s / h, (1 + t0) / h) + c_R`.
pub fn v_s(seq: &RadiusSequence, s: u64, c4: f64, h: f64, t0: f64, r_cap: f64) -> Result<f64> {
    let r = seq.radius(s)?;
    Ok((-c4 * r.ln() / h).max((1.0 + t0) / h) + c_r(r_cap, h))
}

/// The three sums bounding the second moment (without their existential
/// constants), plus the normalizer `(sum r_t^n)^2`.
#[derive(Debug, Clone, Copy)]
pub struct BoundParts {
    /// `sum_{t<=T} r_t^n`
    pub first: f64,
    /// `sum_s r_s^n * sum_{t=[s + (c4/h) ln r_s - 6R/h - 2]}^{s} r_t^{n-1}`
    pub second: f64,
    /// `sum_s r_s^n * sum_{t<=s} r_t^n`
    pub third: f64,
    /// `(sum_{t<=T} r_t^n)^2`
    pub normalizer: f64,
}

/// Evaluate the second-moment bound parts at horizon `t_max`.
pub fn bound_rhs(
    seq: &RadiusSequence,
    h: f64,
    r_cap: f64,
    c4: f64,
    t_max: u64,
) -> Result<BoundParts> {
    if !(h > 0.0 && r_cap > 0.0 && c4 > 0.0) {
        return Err(Error::Domain("h, R, c4 must be positive".into()));
    }
    if seq.max_radius()? > r_cap {
        return Err(Error::Domain(format!(
            "radii exceed the cap R = {r_cap}; raise the cutoff"
        )));
    }
    let n = seq.n();
    let lower = partial_sums(seq, (n - 1) as f64, t_max)?;
    let full = partial_sums(seq, n as f64, t_max)?;
    let prefix_low = |t: u64| -> f64 {
        if t < 1 {
            0.0
        } else {
            lower[(t - 1) as usize]
        }
    };
    let shift = 6.0 * r_cap / h + 2.0;
    let mut second = KahanSum::new();
    let mut third = KahanSum::new();
    for s in seq.cutoff()..=t_max {
        let r = seq.radius(s)?;
        let rn = r.powi(n as i32);
        let raw = (s as f64 + (c4 / h) * r.ln() - shift).floor();
        let start = if raw < seq.cutoff() as f64 {
            seq.cutoff()
        } else {
            raw as u64
        };
        let window = if start > s {
            0.0
        } else {
            prefix_low(s) - prefix_low(start - 1)
        };
        second.add(rn * window);
        third.add(rn * full[(s - 1) as usize]);
    }
    let first = full[(t_max - 1) as usize];
    Ok(BoundParts {
        first,
        second: second.value(),
        third: third.value(),
        normalizer: first * first,
    })
}
