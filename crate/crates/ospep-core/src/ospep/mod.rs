//! Assembly of the performance-estimation SDP for a splitting method and
//! computation of its tight contraction factor.
//!
//! The primal program maximizes the squared output difference
//! `|| z - theta (z_B - z_A) ||^2` over Gram matrices of the difference
//! vectors subject to one trace inequality per declared class parameter and
//! the normalization `||z||^2 = 1`. Its dual minimizes `rho^2` over
//! nonnegative combination weights with a PSD slack; a dual feasible point is
//! a proof of the rate, an optimal primal Gram matrix encodes worst-case
//! operators.

mod contraction;

pub use contraction::{
    certificate_is_feasible, extract_worst_case, quasi_contraction_factor,
    tight_contraction_factor, ComputeOptions, ContractionResult, DualCertificate,
    EvaluationTriple, WorstCaseInstance,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::{
    ConstraintName, GramOrdering, OperatorClass, OperatorError, Role,
};
use crate::scalar::Scalar;
use crate::sdp::{SdpError, SdpProblem, SolveStatus};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OspepError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("method/class mismatch: {0}")]
    MethodInconsistent(String),
    #[error("solver did not return a usable solution: {0:?}")]
    Solver(SolveStatus),
    #[error("Gram matrix unusable for extraction: {0}")]
    BadGram(String),
}

/// Splitting method family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fbs,
    Drs,
    Dys,
}

/// Method with its two scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec<T> {
    pub method: Method,
    pub alpha: T,
    pub theta: T,
}

impl<T: Scalar> MethodSpec<T> {
    pub fn new(method: Method, alpha: T, theta: T) -> Result<Self, OspepError> {
        if alpha <= T::zero() {
            return Err(OspepError::MethodInconsistent("alpha must be positive".into()));
        }
        if theta <= T::zero() {
            return Err(OspepError::MethodInconsistent("theta must be positive".into()));
        }
        Ok(MethodSpec { method, alpha, theta })
    }
}

/// The three operator classes of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBundle<T> {
    pub a: OperatorClass<T>,
    pub b: OperatorClass<T>,
    pub c: OperatorClass<T>,
}

impl<T: Scalar> ClassBundle<T> {
    pub fn new(
        a: OperatorClass<T>,
        b: OperatorClass<T>,
        c: OperatorClass<T>,
    ) -> Result<Self, OspepError> {
        for (class, role) in [(&a, Role::A), (&b, Role::B), (&c, Role::C)] {
            if class.role != role {
                return Err(OspepError::MethodInconsistent(format!(
                    "class declared for role {:?} placed in slot {:?}",
                    class.role, role
                )));
            }
            class.validate()?;
        }
        Ok(ClassBundle { a, b, c })
    }

    pub fn classes(&self) -> [&OperatorClass<T>; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn active(&self) -> impl Iterator<Item = &OperatorClass<T>> {
        self.classes().into_iter().filter(|c| c.is_active())
    }

    /// Smallest Gram ordering consistent with the active roles.
    pub fn ordering(&self) -> GramOrdering {
        GramOrdering::from_active(
            self.a.is_active(),
            self.b.is_active(),
            self.c.is_active(),
        )
    }

    pub fn any_degenerate(&self) -> bool {
        self.active().any(|c| c.is_degenerate())
    }

    /// Method/role consistency. FBS runs the resolvent of A after a forward
    /// step of C (`B = 0`); DRS composes the resolvents of A and B (`C = 0`);
    /// the three-operator method accepts any combination with at least two
    /// active operators, covering its reductions.
    pub fn check_method(&self, method: Method) -> Result<(), OspepError> {
        let (a, b, c) = (self.a.is_active(), self.b.is_active(), self.c.is_active());
        let n_active = a as usize + b as usize + c as usize;
        if n_active < 2 {
            return Err(OspepError::MethodInconsistent(
                "fewer than two active operators: the fixed-point map degenerates".into(),
            ));
        }
        match method {
            Method::Fbs if !(a && !b && c) => Err(OspepError::MethodInconsistent(
                "fbs requires A and C active and B zero".into(),
            )),
            Method::Drs if !(a && b && !c) => Err(OspepError::MethodInconsistent(
                "drs requires A and B active and C zero".into(),
            )),
            _ => Ok(()),
        }
    }

    fn require_nonempty(&self) -> Result<(), OspepError> {
        for class in self.active() {
            if !class.is_nonempty() {
                return Err(OperatorError::EmptyClass {
                    role: class.role,
                    reason: "declared parameters are mutually inconsistent".into(),
                }
                .into());
            }
        }
        Ok(())
    }
}

/// Named constraint matrices plus objective data for one instance.
pub struct OspepComponents<T> {
    pub ordering: GramOrdering,
    pub constraints: Vec<(ConstraintName, DMatrix<T>)>,
    pub identity: DMatrix<T>,
    pub objective: DMatrix<T>,
}

/// Build the Gram-space components shared by the primal and dual programs.
pub fn build_components<T: Scalar>(
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
) -> Result<OspepComponents<T>, OspepError> {
    classes.check_method(method.method)?;
    classes.require_nonempty()?;
    let ordering = classes.ordering();
    let mut constraints = Vec::new();
    for class in classes.active() {
        for cm in class.constraint_matrices(method.alpha, &ordering)? {
            constraints.push((cm.name, cm.matrix));
        }
    }
    Ok(OspepComponents {
        ordering,
        identity: ordering.identity_matrix(),
        objective: ordering.objective_matrix(method.theta),
        constraints,
    })
}

/// Primal program: `max tr(M_O G)` over feasible Gram matrices.
pub fn build_primal<T: Scalar>(
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
) -> Result<SdpProblem<T>, OspepError> {
    let parts = build_components(classes, method)?;
    let ineqs = parts
        .constraints
        .into_iter()
        .map(|(name, m)| (name.key().to_string(), m))
        .collect();
    Ok(SdpProblem::new(
        parts.objective,
        ineqs,
        vec![(ConstraintName::Identity.key().to_string(), parts.identity, T::one())],
    )?)
}

/// Affine description of the dual slack:
/// `S(rho^2, lambda) = rho^2 M_I - M_O - sum_i lambda_i M_i`.
#[derive(Debug, Clone)]
pub struct DualMap<T> {
    pub dim: usize,
    /// `-M_O`.
    pub base: DMatrix<T>,
    /// Coefficient of `rho^2`.
    pub identity: DMatrix<T>,
    /// Multiplier names with their matrices `M_i`.
    pub multipliers: Vec<(ConstraintName, DMatrix<T>)>,
}

impl<T: Scalar> DualMap<T> {
    /// Reconstruct the slack matrix for given dual variables.
    pub fn slack(&self, rho_sq: T, lambdas: &[T]) -> DMatrix<T> {
        assert_eq!(lambdas.len(), self.multipliers.len());
        let mut s = &self.base + &self.identity * rho_sq;
        for ((_, m), lam) in self.multipliers.iter().zip(lambdas) {
            s -= m * *lam;
        }
        s
    }

    pub fn multiplier_names(&self) -> Vec<&'static str> {
        self.multipliers.iter().map(|(n, _)| n.key()).collect()
    }
}

/// Dual program description (minimize `rho^2` s.t. `lambda >= 0`, slack PSD).
pub fn build_dual<T: Scalar>(
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
) -> Result<DualMap<T>, OspepError> {
    let parts = build_components(classes, method)?;
    Ok(DualMap {
        dim: parts.ordering.dim(),
        base: -parts.objective,
        identity: parts.identity,
        multipliers: parts.constraints,
    })
}
