//! Tight worst-case contraction factors for forward-backward,
//! Douglas-Rachford, and Davis-Yin splitting.
//!
//! Given operator-class assumptions (strong monotonicity, cocoercivity,
//! Lipschitz continuity) for the operators of a splitting method, the
//! worst-case squared contraction factor of the fixed-point map is the value
//! of a small semidefinite program over the Gram matrix of the iterate
//! differences. This crate builds those programs, solves them with a dense
//! interior-point method, evaluates closed-form Douglas-Rachford rates with
//! sum-of-squares certificates and matching worst-case operators, and selects
//! optimal method parameters `(alpha, theta)`.
//!
//! All numeric code is generic over the [`scalar::Scalar`] trait; `f64` is
//! the scalar the documented tolerances are calibrated for, and the aliases
//! below fix it for the common entry points.

pub mod analytic;
pub mod operators;
pub mod ospep;
pub mod scalar;
pub mod sdp;
pub mod search;

pub use scalar::Scalar;

/// Re-export of the linear-algebra crate used in public types.
pub use nalgebra;

/// Default working scalar.
pub type Real = f64;

pub type OperatorClass = operators::OperatorClass<Real>;
pub type EvaluationPair = operators::EvaluationPair<Real>;
pub type ConstraintMatrix = operators::ConstraintMatrix<Real>;
pub type SdpProblem = sdp::SdpProblem<Real>;
pub type SdpSolution = sdp::SdpSolution<Real>;
pub type SolverSettings = sdp::SolverSettings<Real>;
pub type MethodSpec = ospep::MethodSpec<Real>;
pub type ClassBundle = ospep::ClassBundle<Real>;
pub type ContractionResult = ospep::ContractionResult<Real>;
pub type DualCertificate = ospep::DualCertificate<Real>;
pub type WorstCaseInstance = ospep::WorstCaseInstance<Real>;
pub type SosCertificate = analytic::SosCertificate<Real>;
pub type LowerBoundInstance = analytic::LowerBoundInstance<Real>;
pub type ParamOptResult = search::ParamOptResult<Real>;
