//! Certified volume brackets for Kostka (Gelfand-Tsetlin) polytopes.
//!
//! Given a partition `lambda` with distinct parts and a weight `mu` in its
//! permutohedron, the pipeline
//!
//! 1. normalizes the pair ([`domain`]),
//! 2. computes its conditioning record ([`conditioning`]),
//! 3. minimizes the tilted continuous Schur objective ([`optimize`]) using
//!    certified evaluations of `log S_lambda` ([`schur`]), and
//! 4. assembles rigorous lower and upper bounds on the polytope volume ([`bounds`]).
//!
//! [`oracle`] provides brute-force ground truth at small sizes: Kostka numbers,
//! exact rational polytope volumes, lattice-point scaling and log-concavity probes.

// Dense linear algebra reads most clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod certarith;
pub mod conditioning;
pub mod domain;
pub mod error;
pub mod optimize;
pub mod oracle;
pub mod rational;
pub mod schur;

pub use bounds::{assemble_bracket, ball_volume, psh_volume, PshVolume, VolumeBracket};
pub use certarith::{CertifiedValue, ErrorMode, Interval, RationalMatrix};
pub use conditioning::{condition, ConditioningRecord};
pub use domain::{build_ptilde, majorizes, normalize, HalfspacePolytope, Instance, Partition, Weight};
pub use error::{Error, Result};
pub use optimize::{minimize, OptimizationResult, OptimizeConfig};
pub use rational::Rational;
pub use schur::{grad_log_schur, log_schur, EvalConfig};

/// Runs the full estimation pipeline on an already constructed instance.
pub fn estimate(instance: &Instance, cfg: &OptimizeConfig) -> Result<Estimate> {
    let record = condition(instance)?;
    if record.is_boundary() {
        return Ok(Estimate { bracket: VolumeBracket::boundary(instance, cfg.postnikov_threshold), record, opt: None });
    }
    let opt = minimize(instance, &record, cfg)?;
    let bracket = assemble_bracket(instance, &record, &opt, cfg)?;
    Ok(Estimate { record, opt: Some(opt), bracket })
}

/// Output of [`estimate`]. `opt` is `None` when `mu` lies on the boundary.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub record: ConditioningRecord,
    pub opt: Option<OptimizationResult>,
    pub bracket: VolumeBracket,
}
