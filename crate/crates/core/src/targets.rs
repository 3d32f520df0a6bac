//! Shrinking-target Monte Carlo: radius families, per-orbit hit records,
//! aggregated hit statistics, and the two-ball trajectory-measure estimate.
//!
//! A trial samples a Liouville-random state, iterates the h-step flow, and
//! records the times `t` with `d(orbit point, p0) <= r_t`. The expected hit
//! count has the closed form `I_T = sum ball_area(r_t) / area(V)`, which
//! the reports compare against.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperbolic::{acosh1p, ball_area, cosh_dist_m1, Frame, HPoint};
use crate::lattice::GroupKind;
use crate::quotient::{SamplerConfig, Surface, TranslateSet, DEFAULT_TRANSLATE_DELTA};
use crate::stats;

/// Shape of a target-radius family.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiusFamily {
    /// `r_t = c / t^alpha`
    PowerLaw { c: f64, alpha: f64 },
    /// `r_t = c / (t^{1/n} (ln t)^beta)` with `n` taken from the sequence
    PowerLog { c: f64, beta: f64 },
    /// `r_t = r`
    Constant { r: f64 },
    /// explicit values, `r_t = values[t-1]`
    Table(Vec<f64>),
}

/// A monotone nonincreasing target-radius family with its dimension
/// exponent `n` and the first index in use.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSequence {
    family: RadiusFamily,
    n: u32,
    cutoff: u64,
}

impl RadiusSequence {
    pub fn new(family: RadiusFamily, n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension exponent {n} < 2")));
        }
        let cutoff = match &family {
            RadiusFamily::PowerLaw { c, alpha } => {
                if !(*c > 0.0) || !(*alpha >= 0.0) {
                    return Err(Error::Domain("power law needs c > 0, alpha >= 0".into()));
                }
                1
            }
            RadiusFamily::PowerLog { c, beta } => {
                if !(*c > 0.0) || !(*beta >= 0.0) {
                    return Err(Error::Domain("power-log needs c > 0, beta >= 0".into()));
                }
                2
            }
            RadiusFamily::Constant { r } => {
                if !(*r >= 0.0) {
                    return Err(Error::Domain(format!("constant radius {r} negative")));
                }
                1
            }
            RadiusFamily::Table(values) => {
                if values.is_empty() {
                    return Err(Error::Domain("empty radius table".into()));
                }
                for w in values.windows(2) {
                    if !(w[1] <= w[0]) {
                        return Err(Error::Domain("radius table not nonincreasing".into()));
                    }
                }
                if !values.iter().all(|r| r.is_finite() && *r > 0.0) {
                    return Err(Error::Domain(
                        "radius table entries must be positive".into(),
                    ));
                }
                1
            }
        };
        Ok(RadiusSequence { family, n, cutoff })
    }

    /// Start the family at a later index, mirroring the tail reduction that
    /// caps usable radii.
    pub fn with_cutoff(mut self, cutoff: u64) -> Result<Self> {
        if cutoff < self.cutoff {
            return Err(Error::Domain(format!(
                "cutoff {cutoff} below the family minimum {}",
                self.cutoff
            )));
        }
        self.cutoff = cutoff;
        Ok(self)
    }

    pub fn family(&self) -> &RadiusFamily {
        &self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// `r_t`; an error below the cutoff (and beyond a table's range).
    pub fn radius(&self, t: u64) -> Result<f64> {
        if t < self.cutoff {
            return Err(Error::Domain(format!(
                "index {t} below cutoff {}",
                self.cutoff
            )));
        }
        match &self.family {
            RadiusFamily::PowerLaw { c, alpha } => Ok(c / (t as f64).powf(*alpha)),
            RadiusFamily::PowerLog { c, beta } => {
                let tf = t as f64;
                Ok(c / (tf.powf(1.0 / self.n as f64) * tf.ln().powf(*beta)))
            }
            RadiusFamily::Constant { r } => Ok(*r),
            RadiusFamily::Table(values) => values
                .get((t - 1) as usize)
                .copied()
                .ok_or_else(|| Error::Domain(format!("index {t} beyond radius table"))),
        }
    }

    /// The largest radius in use (families are nonincreasing).
    pub fn max_radius(&self) -> Result<f64> {
        self.radius(self.cutoff)
    }
}

/// Expected hit count `I_T = sum_{t} mu(B_t)` with `mu(B_t)` the exact area
/// fraction of the ball; errors if a ball does not embed (`r_t > i_V`).
pub fn expected_sum_i(
    seq: &RadiusSequence,
    horizon: u64,
    kind: GroupKind,
    i_v: f64,
) -> Result<f64> {
    let max_r = seq.max_radius()?;
    if max_r > i_v {
        return Err(Error::Domain(format!(
            "radius {max_r} exceeds the injectivity radius {i_v}; the ball does not embed"
        )));
    }
    let area = kind.covolume();
    let mut acc = stats::KahanSum::new();
    for t in seq.cutoff()..=horizon {
        acc.add(ball_area(seq.radius(t)?)? / area);
    }
    Ok(acc.value())
}

/// Configuration of one shrinking-target experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: GroupKind,
    pub p0: HPoint,
    pub h: f64,
    /// horizon T
    pub horizon: u64,
    /// number of trials M
    pub trials: u32,
    pub seed: u64,
    pub radius: RadiusSequence,
}

/// Hit data of a single orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u32,
    pub seed: u64,
    pub horizon: u64,
    /// strictly increasing hit times in `[cutoff, horizon]`
    pub hit_times: Vec<u64>,
    /// hits per decile window of `[1, horizon]`
    pub window_hits: [u64; 10],
}

impl TrialRecord {
    /// `S_T`: the total number of hits.
    pub fn s_t(&self) -> u64 {
        self.hit_times.len() as u64
    }

    /// Hits up to an earlier checkpoint `t`.
    pub fn s_at(&self, t: u64) -> u64 {
        self.hit_times.partition_point(|&ht| ht <= t) as u64
    }

    pub fn first_hit(&self) -> Option<u64> {
        self.hit_times.first().copied()
    }

    pub fn last_hit(&self) -> Option<u64> {
        self.hit_times.last().copied()
    }

    /// Whether any hit falls in the late window `[t/2, t]`.
    pub fn hit_in_late_window(&self, t: u64) -> bool {
        self.hit_times.iter().any(|&ht| 2 * ht >= t && ht <= t)
    }
}

/// Aggregated statistics over the trials of one experiment.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentReport {
    pub horizon: u64,
    pub i_t: f64,
    pub mean_s: f64,
    pub se_mean_s: f64,
    /// mean of `S_T / I_T`
    pub mean_ratio: f64,
    /// second moment of `S_T / I_T`
    pub second_moment_ratio: f64,
    pub se_second_moment: f64,
    /// fraction of trials with at least one hit in `[T/2, T]`
    pub frac_late_hit: f64,
}

/// Records plus the report and any soft warnings raised by the validator.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub report: ExperimentReport,
    pub warnings: Vec<String>,
}

/// Run one seeded trial: sample a start state, iterate the h-step flow, and
/// record the target hits. Pure function of `(config, trial index)`.
pub fn run_trial(
    surface: &Surface,
    targets: &TranslateSet,
    cfg: &ExperimentConfig,
    trial: u32,
) -> Result<TrialRecord> {
    let sampler = SamplerConfig {
        seed: cfg.seed,
        kind: cfg.kind,
    };
    let mut rng = sampler.stream(trial as u64);
    let mut state = surface.sample_liouville(&mut rng)?;
    let mut hit_times = Vec::new();
    let mut window_hits = [0u64; 10];
    for t in 1..=cfg.horizon {
        state = surface.step(&state, cfg.h)?;
        if t < cfg.radius.cutoff() {
            continue;
        }
        let r = cfg.radius.radius(t)?;
        if targets.quotient_dist(state.basepoint()) <= r {
            hit_times.push(t);
            let decile = (((t - 1) * 10) / cfg.horizon) as usize;
            window_hits[decile.min(9)] += 1;
        }
    }
    Ok(TrialRecord {
        trial,
        seed: cfg.seed ^ trial as u64,
        horizon: cfg.horizon,
        hit_times,
        window_hits,
    })
}

fn validate(cfg: &ExperimentConfig, surface: &Surface) -> Result<Vec<String>> {
    if !(cfg.h > 0.0 && cfg.h <= 10.0) {
        return Err(Error::Domain(format!(
            "step length {} outside (0, 10]",
            cfg.h
        )));
    }
    if cfg.trials < 2 {
        return Err(Error::Domain("need at least 2 trials".into()));
    }
    if cfg.horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let max_r = cfg.radius.max_radius()?;
    let inj = surface.injectivity_radius(cfg.p0)?;
    if inj.orbifold {
        return Err(Error::Domain(
            "target center is an orbifold point; its injectivity radius is 0".into(),
        ));
    }
    if max_r > inj.radius {
        return Err(Error::Domain(format!(
            "largest radius {max_r} exceeds the injectivity radius {}; raise the cutoff",
            inj.radius
        )));
    }
    if max_r > DEFAULT_TRANSLATE_DELTA / 2.0 {
        return Err(Error::Domain(format!(
            "largest radius {max_r} beyond the certified quotient-distance range"
        )));
    }
    let mut warnings = Vec::new();
    let cap = (inj.radius / 4.0).min(1.0).min(cfg.h);
    if max_r > cap {
        warnings.push(format!(
            "largest radius {max_r:.6} exceeds the theorem cap R = {cap:.6}; \
             statistics remain valid but the divergence theorem hypotheses do not hold \
             until r_t <= R"
        ));
    }
    Ok(warnings)
}

/// Run all trials (in parallel; results are independent of thread count)
/// and aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let surface = Surface::new(cfg.kind)?;
    let warnings = validate(cfg, &surface)?;
    let targets = TranslateSet::build(surface.group(), cfg.p0, DEFAULT_TRANSLATE_DELTA)?;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|j| run_trial(&surface, &targets, cfg, j))
        .collect::<Result<_>>()?;
    let inj = surface.injectivity_radius(cfg.p0)?;
    let i_t = expected_sum_i(&cfg.radius, cfg.horizon, cfg.kind, inj.radius)?;
    let report = report_from_records(&records, cfg.horizon, i_t)?;
    Ok(ExperimentOutput {
        records,
        report,
        warnings,
    })
}

/// Aggregate a report at checkpoint `t <= horizon` with its exact `I_t`.
/// Aggregation runs in trial order with compensated sums, so the result is
/// independent of how the trials were scheduled.
pub fn report_from_records(records: &[TrialRecord], t: u64, i_t: f64) -> Result<ExperimentReport> {
    if records.len() < 2 {
        return Err(Error::Domain("need at least 2 trial records".into()));
    }
    if !(i_t > 0.0) {
        return Err(Error::Domain(format!("I_T = {i_t} not positive")));
    }
    let s_values: Vec<f64> = records.iter().map(|r| r.s_at(t) as f64).collect();
    let ratios: Vec<f64> = s_values.iter().map(|s| s / i_t).collect();
    let squares: Vec<f64> = ratios.iter().map(|r| r * r).collect();
    let late = records.iter().filter(|r| r.hit_in_late_window(t)).count();
    Ok(ExperimentReport {
        horizon: t,
        i_t,
        mean_s: stats::mean(&s_values),
        se_mean_s: stats::standard_error(&s_values),
        mean_ratio: stats::mean(&ratios),
        second_moment_ratio: stats::mean(&squares),
        se_second_moment: stats::standard_error(&squares),
        frac_late_hit: late as f64 / records.len() as f64,
    })
}

/// Configuration of the two-ball discrete-geodesic measure estimate.
#[derive(Debug, Clone, Copy)]
pub struct TwoBallConfig {
    pub o1: HPoint,
    pub r1: f64,
    pub o2: HPoint,
    pub r2: f64,
    pub h: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of the measure of h-step trajectories meeting two
/// balls, with the alignment gate of the discrete bound.
#[derive(Debug, Clone, Copy)]
pub struct TwoBallEstimate {
    pub d: f64,
    /// `dist(d, hZ) <= 2 max(r1, r2)`: whether a discrete trajectory can
    /// meet both balls at all
    pub gate_aligned: bool,
    pub hits: u64,
    pub samples: u64,
    /// hit fraction times the Liouville mass `2 pi ball_area(r1)` of the
    /// sampling set
    pub estimate: f64,
    pub se: f64,
    /// `estimate / (r1 r2 e^{-d} min(r1, r2))`, the shape the bound predicts
    pub bound_ratio: f64,
}

/// Sample frames with base point uniform in the first ball and direction
/// uniform, and test whether any integer step of the h-flow lands in the
/// second ball (both directions, |steps| <= d/h + 2).
pub fn two_ball_experiment(cfg: &TwoBallConfig) -> Result<TwoBallEstimate> {
    let TwoBallConfig {
        o1,
        r1,
        o2,
        r2,
        h,
        samples,
        seed,
    } = *cfg;
    if !(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0) {
        return Err(Error::Domain("ball radii must lie in (0, 1)".into()));
    }
    let d = crate::hyperbolic::dist(o1, o2);
    if !(d > 2.0) {
        return Err(Error::Domain(format!("center distance {d} must exceed 2")));
    }
    if !(h > 2.0 * r1.min(r2)) {
        return Err(Error::Domain(format!(
            "need h > 2 min(r1, r2), got h = {h}"
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let lattice_gap = (d / h - (d / h).round()).abs() * h;
    let gate_aligned = lattice_gap <= 2.0 * r1.max(r2);

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cosh_r1_m1 = r1.cosh() - 1.0;
    let hit_level = r2.cosh() - 1.0;
    let k_max = (d / h + 2.0).floor() as i64;
    let mut hits = 0u64;
    for _ in 0..samples {
        // base point: exact inverse-CDF in hyperbolic polar coordinates
        let rho = acosh1p(rng.gen::<f64>() * cosh_r1_m1);
        let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let base = Frame::from_point_angle(o1, phi)?
            .geodesic_step(rho)?
            .basepoint();
        let frame = Frame::from_point_angle(base, theta)?;
        let mut fwd = frame;
        let mut bwd = frame;
        let mut hit = false;
        for _ in 1..=k_max {
            fwd = fwd.geodesic_step(h)?;
            if cosh_dist_m1(fwd.basepoint(), o2) <= hit_level {
                hit = true;
                break;
            }
            bwd = bwd.geodesic_step(-h)?;
            if cosh_dist_m1(bwd.basepoint(), o2) <= hit_level {
                hit = true;
                break;
            }
        }
        if hit {
            hits += 1;
        }
    }
    let mass = 2.0 * std::f64::consts::PI * ball_area(r1)?;
    let p = hits as f64 / samples as f64;
    let estimate = p * mass;
    let se = mass * (p * (1.0 - p) / samples as f64).sqrt();
    let bound_ratio = estimate / (r1 * r2 * (-d).exp() * r1.min(r2));
    Ok(TwoBallEstimate {
        d,
        gate_aligned,
        hits,
        samples,
        estimate,
        se,
        bound_ratio,
    })
}
