//! Shrinking-target statistics for the discrete-time geodesic flow on
//! modular surfaces.
//!
//! The library has five layers:
//!
//! * [`hyperbolic`] — the upper half-plane, PSL(2,R) frames, the geodesic
//!   flow, and disk areas;
//! * [`lattice`] — exact enumeration and counting of PSL(2,Z) and Gamma(2)
//!   elements by displacement, with shell censuses and error-term fitting;
//! * [`quotient`] — fundamental-domain reduction, quotient distances,
//!   injectivity radii, and Liouville sampling on the quotient surface;
//! * [`targets`] — seeded Monte Carlo trials hitting shrinking balls, their
//!   aggregated statistics, and the two-ball trajectory-measure estimate;
//! * [`conditions`] — numeric evaluators for the radius-sequence conditions
//!   that govern finite versus infinite hit sets.
//!
//! [`io`] serializes all of it: versioned CSV schemas, a bit-exact count
//! cache, and run manifests. The mdbook under `book/` walks through the
//! concepts; its code blocks compile and run as doctests via [`guide`].

// `!(x >= 0.0)` is used deliberately throughout: unlike `x < 0.0` it also
// rejects NaN at the domain boundaries.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod error;
pub mod guide;
pub mod hyperbolic;
pub mod io;
pub mod lattice;
pub mod quotient;
pub mod stats;
pub mod targets;

pub use conditions::{
    bound_rhs, check_condition3, check_condition4, check_condition5, lemma41_check, partial_sums,
    BoundParts, ConditionReport, Lemma41Report, Verdict,
};
pub use error::{Error, Result};
pub use hyperbolic::{ball_area, dist, volume_bound, Frame, HPoint, Mobius};
pub use lattice::{
    enumerate_ball, enumerate_ball_capped, fit_error_exponent, main_term, verify_shell_bound,
    well_roundedness_check, CountCurve, ErrorFit, GroupKind, GroupSpec, LatticeElement,
    ShellCensus, ShellRegime,
};
pub use quotient::{
    Injectivity, QuotientState, SamplerConfig, Surface, TranslateSet, DEFAULT_TRANSLATE_DELTA,
};
pub use targets::{
    expected_sum_i, run_experiment, run_trial, two_ball_experiment, ExperimentConfig,
    ExperimentOutput, ExperimentReport, RadiusFamily, RadiusSequence, TrialRecord, TwoBallConfig,
    TwoBallEstimate,
};
