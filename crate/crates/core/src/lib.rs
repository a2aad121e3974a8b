//! Adversarially robust Gaussian-process optimization on finite domains.
//!
//! The crate is organized bottom-up:
//!
//! - [`kernels`]: covariance functions and Gram matrices.
//! - [`gp`]: posterior inference with incremental Cholesky updates and
//!   likelihood-based hyperparameter search.
//! - [`robust_sets`]: finite domains, distances and perturbation
//!   neighbourhoods, including the group / parameter / estimation reductions.
//! - [`optimizers`]: StableOpt, the GP-UCB family of baselines, β-schedules,
//!   reporting rules, information gain and ε-regret.
//! - [`testbed`]: benchmark objectives with exact robust ground truth.
//! - [`harness`]: config-driven experiments, CSV/SVG outputs and traces.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gp;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod optimizers;
pub mod robust_sets;
pub mod selfcheck;
pub mod testbed;

pub use error::{Error, Result};
pub use gp::{fit_hyperparameters, posterior, DomainPosterior, FitBounds, FitOutcome, GpPosterior, ObservationSet};
pub use kernels::{gram, KernelSpec, Smoothness};
pub use optimizers::{
    baseline_step, confidence_field, eps_regret, information_gain, report_point, run, run_observed, stableopt_step,
    Algorithm, BetaSchedule, ConfidenceField, ReportingRule, RoundEntry, RoundView, RunConfig, RunRecord,
};
pub use robust_sets::{
    build_neighborhoods, estimation_ball, estimation_reduction, group_reduction, parameter_reduction, DistanceSpec,
    FiniteDomain, PerturbationSet,
};
pub use testbed::{f_poly, robust_table, sample_rkhs_function, ObjectiveTable, RkhsFunctionSpec};
