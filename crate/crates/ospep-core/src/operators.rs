//! Operator-class assumptions, two-point interpolation predicates, and the
//! Gram-space constraint matrices they induce.
//!
//! An [`OperatorClass`] records which of the three assumptions (strong
//! monotonicity `mu`, cocoercivity `beta`, Lipschitz continuity `lip`) are
//! declared for one of the roles A, B, C of a splitting method, or marks the
//! operator as identically zero. Each declared parameter contributes one
//! quadratic inequality on the difference vectors of an evaluation pair; in
//! Gram space that inequality is `tr(M G) >= 0` for a fixed symmetric matrix
//! `M` produced by [`OperatorClass::constraint_matrices`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cst, Scalar};

/// Which operator of the splitting method a class describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
    C,
}

impl Role {
    pub fn label(self) -> &'static str {
        match self {
            Role::A => "a",
            Role::B => "b",
            Role::C => "c",
        }
    }
}

/// Errors from class validation, predicates, and matrix construction.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum OperatorError {
    #[error("evaluation pair vectors must share one dimension d >= 1")]
    DimensionMismatch,
    #[error("operator class for role {role:?} is empty: {reason}")]
    EmptyClass { role: Role, reason: String },
    #[error("operator class for role {role:?} declares no assumption")]
    NoAssumptions { role: Role },
    #[error("operator class for role {role:?} marked zero cannot carry parameters")]
    ZeroWithParameters { role: Role },
    #[error("negative or non-positive parameter: {0}")]
    BadParameter(String),
    #[error("role {role:?} is not part of the {ordering} Gram ordering")]
    RoleNotInOrdering { role: Role, ordering: String },
}

/// Declared assumptions for one operator.
///
/// `mu = Some(0)` encodes plain maximal monotonicity; absent parameters mean
/// the corresponding assumption is simply not made. `is_zero` removes the
/// operator from the method entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorClass<T> {
    pub role: Role,
    pub mu: Option<T>,
    pub beta: Option<T>,
    pub lip: Option<T>,
    pub is_zero: bool,
}

impl<T: Scalar> OperatorClass<T> {
    pub fn new(role: Role) -> Self {
        OperatorClass { role, mu: None, beta: None, lip: None, is_zero: false }
    }

    /// The zero operator; contributes no constraints and drops out of the
    /// Gram basis.
    pub fn zero(role: Role) -> Self {
        OperatorClass { role, mu: None, beta: None, lip: None, is_zero: true }
    }

    pub fn strongly_monotone(role: Role, mu: T) -> Self {
        OperatorClass { mu: Some(mu), ..Self::new(role) }
    }

    /// Plain maximal monotone (`mu = 0`).
    pub fn monotone(role: Role) -> Self {
        Self::strongly_monotone(role, T::zero())
    }

    pub fn cocoercive(role: Role, beta: T) -> Self {
        OperatorClass { beta: Some(beta), ..Self::new(role) }
    }

    pub fn lipschitz(role: Role, lip: T) -> Self {
        OperatorClass { lip: Some(lip), ..Self::new(role) }
    }

    pub fn with_mu(mut self, mu: T) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_lip(mut self, lip: T) -> Self {
        self.lip = Some(lip);
        self
    }

    /// Structural validation: at least one assumption (or `is_zero`),
    /// exclusivity of `is_zero`, and parameter sign requirements
    /// (`mu >= 0`, `beta > 0`, `lip > 0`).
    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.is_zero {
            if self.mu.is_some() || self.beta.is_some() || self.lip.is_some() {
                return Err(OperatorError::ZeroWithParameters { role: self.role });
            }
            return Ok(());
        }
        if self.mu.is_none() && self.beta.is_none() && self.lip.is_none() {
            return Err(OperatorError::NoAssumptions { role: self.role });
        }
        if let Some(m) = self.mu {
            if m < T::zero() {
                return Err(OperatorError::BadParameter(format!("mu = {m:?} < 0")));
            }
        }
        if let Some(b) = self.beta {
            if b <= T::zero() {
                return Err(OperatorError::BadParameter(format!("beta = {b:?} <= 0")));
            }
        }
        if let Some(l) = self.lip {
            if l <= T::zero() {
                return Err(OperatorError::BadParameter(format!("lip = {l:?} <= 0")));
            }
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        !self.is_zero
    }

    /// Nonemptiness of the class: `mu <= lip` and `mu <= 1/beta` where both
    /// sides are declared. A cocoercivity/Lipschitz pair never empties the
    /// class (small positive multiples of the identity always remain), so no
    /// `beta`/`lip` test is applied.
    pub fn is_nonempty(&self) -> bool {
        if self.is_zero {
            return true;
        }
        if let (Some(m), Some(l)) = (self.mu, self.lip) {
            if m > l {
                return false;
            }
        }
        if let (Some(m), Some(b)) = (self.mu, self.beta) {
            if m > T::one() / b {
                return false;
            }
        }
        true
    }

    /// A nonempty class is degenerate when tightening any parameter pair by
    /// an arbitrarily small margin empties it, i.e. when `mu = lip` or
    /// `mu = 1/beta` holds with equality. Equality is tested with relative
    /// tolerance `1e-12` since the inputs are floating point.
    pub fn is_degenerate(&self) -> bool {
        if self.is_zero {
            return false;
        }
        let rel = cst::<T>(1e-12);
        let close = |a: T, b: T| {
            let scale = T::one().max(a.abs().max(b.abs()));
            (a - b).abs() <= rel * scale
        };
        if let (Some(m), Some(l)) = (self.mu, self.lip) {
            if close(m, l) {
                return true;
            }
        }
        if let (Some(m), Some(b)) = (self.mu, self.beta) {
            if m > T::zero() && close(m, T::one() / b) {
                return true;
            }
        }
        false
    }

    fn require_nonempty(&self) -> Result<(), OperatorError> {
        self.validate()?;
        if !self.is_nonempty() {
            return Err(OperatorError::EmptyClass {
                role: self.role,
                reason: "declared parameters are mutually inconsistent".into(),
            });
        }
        Ok(())
    }

    /// Two-point interpolation predicate: do the declared inequalities hold
    /// on the difference vectors of `pair` with slack at least `-tol`?
    ///
    /// For a nonempty class this is exactly interpolability of the pair by
    /// some member of the class.
    pub fn check_two_point(&self, pair: &EvaluationPair<T>, tol: T) -> Result<bool, OperatorError> {
        self.require_nonempty()?;
        let dx = &pair.x1 - &pair.x2;
        let dq = &pair.q1 - &pair.q2;
        let xq = dx.dot(&dq);
        let xx = dx.dot(&dx);
        let qq = dq.dot(&dq);
        let mut ok = true;
        if let Some(m) = self.mu {
            ok &= xq - m * xx >= -tol;
        }
        if let Some(b) = self.beta {
            ok &= xq - b * qq >= -tol;
        }
        if let Some(l) = self.lip {
            ok &= l * l * xx - qq >= -tol;
        }
        // The zero operator interpolates a pair iff both values are zero.
        if self.is_zero {
            ok = qq <= tol;
        }
        Ok(ok)
    }

    /// Gram-space constraint matrices for this class, one per declared
    /// parameter, under step size `alpha` and the given Gram ordering.
    ///
    /// Entries follow the fixed templates over the basis
    /// `(z, z_A, z_B, z_C)`, compressed onto the ordering's active basis.
    /// A zero class contributes nothing.
    pub fn constraint_matrices(
        &self,
        alpha: T,
        ordering: &GramOrdering,
    ) -> Result<Vec<ConstraintMatrix<T>>, OperatorError> {
        self.require_nonempty()?;
        if alpha <= T::zero() {
            return Err(OperatorError::BadParameter("alpha must be positive".into()));
        }
        if self.is_zero {
            return Ok(Vec::new());
        }
        if !ordering.role_active(self.role) {
            return Err(OperatorError::RoleNotInOrdering {
                role: self.role,
                ordering: ordering.describe(),
            });
        }
        let embed = ordering.embedding::<T>();
        let mut out = Vec::new();
        let mut push = |name, m4: DMatrix<T>| {
            let m = embed.transpose() * m4 * &embed;
            out.push(ConstraintMatrix { name, matrix: m, sense: ConstraintSense::GeqZero });
        };
        match self.role {
            Role::A => {
                if let Some(mu) = self.mu {
                    push(ConstraintName::MuA, mat_mu_a(alpha, mu));
                }
                if let Some(beta) = self.beta {
                    push(ConstraintName::BetaA, mat_beta_a(alpha, beta));
                }
                if let Some(lip) = self.lip {
                    push(ConstraintName::LipA, mat_lip_a(alpha, lip));
                }
            }
            Role::B => {
                if let Some(mu) = self.mu {
                    push(ConstraintName::MuB, mat_mu_b(alpha, mu));
                }
                if let Some(beta) = self.beta {
                    push(ConstraintName::BetaB, mat_beta_b(alpha, beta));
                }
                if let Some(lip) = self.lip {
                    push(ConstraintName::LipB, mat_lip_b(alpha, lip));
                }
            }
            Role::C => {
                if let Some(mu) = self.mu {
                    push(ConstraintName::MuC, mat_mu_c(alpha, mu));
                }
                if let Some(beta) = self.beta {
                    push(ConstraintName::BetaC, mat_beta_c(alpha, beta));
                }
                if let Some(lip) = self.lip {
                    push(ConstraintName::LipC, mat_lip_c(alpha, lip));
                }
            }
        }
        Ok(out)
    }
}

/// Two operator evaluations `(x1, q1)`, `(x2, q2)` in a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPair<T> {
    pub x1: DVector<T>,
    pub q1: DVector<T>,
    pub x2: DVector<T>,
    pub q2: DVector<T>,
}

impl<T: Scalar> EvaluationPair<T> {
    pub fn new(
        x1: DVector<T>,
        q1: DVector<T>,
        x2: DVector<T>,
        q2: DVector<T>,
    ) -> Result<Self, OperatorError> {
        let d = x1.len();
        if d == 0 || q1.len() != d || x2.len() != d || q2.len() != d {
            return Err(OperatorError::DimensionMismatch);
        }
        Ok(EvaluationPair { x1, q1, x2, q2 })
    }

    pub fn dim(&self) -> usize {
        self.x1.len()
    }
}

/// Two-point interpolation predicate for subdifferentials of `mu`-strongly
/// convex, `lip`-smooth functions (`lip = None` means no smoothness bound).
///
/// Kept separate from [`OperatorClass`]: this class never enters the SDP
/// construction, only the predicate is exposed. Requires `0 <= mu < lip`.
pub fn subdifferential_two_point<T: Scalar>(
    mu: T,
    lip: Option<T>,
    pair: &EvaluationPair<T>,
    tol: T,
) -> Result<bool, OperatorError> {
    if mu < T::zero() {
        return Err(OperatorError::BadParameter("mu must be nonnegative".into()));
    }
    if let Some(l) = lip {
        if l <= mu {
            return Err(OperatorError::BadParameter("need mu < lip".into()));
        }
    }
    let dx = &pair.x1 - &pair.x2;
    let dq = &pair.q1 - &pair.q2;
    let xq = dx.dot(&dq);
    let xx = dx.dot(&dx);
    let mut rhs = mu * xx;
    if let Some(l) = lip {
        let r = &dq - &(dx * mu);
        rhs += r.dot(&r) / (l - mu);
    }
    Ok(xq - rhs >= -tol)
}

/// Names of the Gram-space matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintName {
    MuA,
    BetaA,
    LipA,
    MuB,
    BetaB,
    LipB,
    MuC,
    BetaC,
    LipC,
    Identity,
    Objective,
}

impl ConstraintName {
    /// Stable key used in solver output and serialized certificates.
    pub fn key(self) -> &'static str {
        match self {
            ConstraintName::MuA => "mu_a",
            ConstraintName::BetaA => "beta_a",
            ConstraintName::LipA => "lip_a",
            ConstraintName::MuB => "mu_b",
            ConstraintName::BetaB => "beta_b",
            ConstraintName::LipB => "lip_b",
            ConstraintName::MuC => "mu_c",
            ConstraintName::BetaC => "beta_c",
            ConstraintName::LipC => "lip_c",
            ConstraintName::Identity => "identity",
            ConstraintName::Objective => "objective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    GeqZero,
    EqOne,
    Objective,
}

/// A named symmetric matrix together with its role in the SDP.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix<T> {
    pub name: ConstraintName,
    pub matrix: DMatrix<T>,
    pub sense: ConstraintSense,
}

/// Which of the vectors `(z, z_A, z_B, z_C)` span the Gram basis.
///
/// The basis always contains `z`. An inactive B means `z_B = z` (resolvent of
/// the zero operator is the identity), an inactive C means `z_C = 0`, and an
/// inactive A means `z_A = 2 z_B - z - z_C` (identity resolvent applied to
/// the reflected point). The smallest ordering consistent with the active
/// roles is always used; embedding a reduced method into the full basis
/// forces a singular Gram matrix and is numerically fragile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramOrdering {
    active_a: bool,
    active_b: bool,
    active_c: bool,
}

impl GramOrdering {
    pub fn from_active(active_a: bool, active_b: bool, active_c: bool) -> Self {
        GramOrdering { active_a, active_b, active_c }
    }

    /// Full 4x4 ordering `(z, z_A, z_B, z_C)`.
    pub fn dys() -> Self {
        Self::from_active(true, true, true)
    }

    /// 3x3 ordering `(z, z_A, z_B)` (C absent).
    pub fn drs() -> Self {
        Self::from_active(true, true, false)
    }

    /// 3x3 ordering `(z, z_A, z_C)` (B absent).
    pub fn fbs() -> Self {
        Self::from_active(true, false, true)
    }

    pub fn role_active(&self, role: Role) -> bool {
        match role {
            Role::A => self.active_a,
            Role::B => self.active_b,
            Role::C => self.active_c,
        }
    }

    /// Number of basis vectors (1 + number of active roles).
    pub fn dim(&self) -> usize {
        1 + self.active_a as usize + self.active_b as usize + self.active_c as usize
    }

    /// Basis labels in order.
    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = vec!["z"];
        if self.active_a {
            v.push("z_a");
        }
        if self.active_b {
            v.push("z_b");
        }
        if self.active_c {
            v.push("z_c");
        }
        v
    }

    pub fn describe(&self) -> String {
        format!("({})", self.labels().join(", "))
    }

    /// Column index of a basis vector, if active.
    pub fn index_of(&self, role: Role) -> Option<usize> {
        if !self.role_active(role) {
            return None;
        }
        let mut idx = 1;
        for r in [Role::A, Role::B, Role::C] {
            if r == role {
                return Some(idx);
            }
            if self.role_active(r) {
                idx += 1;
            }
        }
        None
    }

    /// 4 x dim matrix expressing `(z, z_A, z_B, z_C)` in the active basis.
    pub fn embedding<T: Scalar>(&self) -> DMatrix<T> {
        let n = self.dim();
        let mut e = DMatrix::zeros(4, n);
        e[(0, 0)] = T::one();
        // z_B row
        match self.index_of(Role::B) {
            Some(j) => e[(2, j)] = T::one(),
            None => e[(2, 0)] = T::one(),
        }
        // z_C row (zero when inactive)
        if let Some(j) = self.index_of(Role::C) {
            e[(3, j)] = T::one();
        }
        // z_A row: own basis vector, or 2 z_B - z - z_C
        match self.index_of(Role::A) {
            Some(j) => e[(1, j)] = T::one(),
            None => {
                let two = cst::<T>(2.0);
                for k in 0..n {
                    e[(1, k)] = two * e[(2, k)] - e[(0, k)] - e[(3, k)];
                }
            }
        }
        e
    }

    /// Coefficients of the fixed-point residual direction `z_B - z_A` in the
    /// full basis, i.e. the output map is `z - theta * g4` with
    /// `g4 = (0, -1, 1, 0)` applied through the embedding.
    pub fn output_direction<T: Scalar>(&self) -> DVector<T> {
        let e = self.embedding::<T>();
        let mut g4 = DVector::zeros(4);
        g4[1] = -T::one();
        g4[2] = T::one();
        e.transpose() * g4
    }

    /// `M_I` (squared-norm of `z`) in the active basis.
    pub fn identity_matrix<T: Scalar>(&self) -> DMatrix<T> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = T::one();
        m
    }

    /// `M_O(theta)` (squared output difference) in the active basis.
    pub fn objective_matrix<T: Scalar>(&self, theta: T) -> DMatrix<T> {
        let v = self.output_vector(theta);
        let n = v.len();
        DMatrix::from_fn(n, n, |i, j| v[i] * v[j])
    }

    /// Coefficient vector of `z - theta (z_B - z_A)` in the active basis.
    pub fn output_vector<T: Scalar>(&self, theta: T) -> DVector<T> {
        let mut v = self.output_direction::<T>() * (-theta);
        v[0] += T::one();
        v
    }
}

// Constraint-matrix templates over the full basis (z, z_A, z_B, z_C).
// Each encodes "lhs - rhs >= 0" of one scalar inequality as tr(M G).

fn sym4<T: Scalar>(entries: &[(usize, usize, T)]) -> DMatrix<T> {
    let mut m = DMatrix::zeros(4, 4);
    for &(i, j, v) in entries {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    m
}

fn mat_mu_a<T: Scalar>(alpha: T, mu: T) -> DMatrix<T> {
    let h = cst::<T>(0.5);
    sym4(&[
        (0, 1, -h),
        (1, 1, -(alpha * mu) - T::one()),
        (1, 2, T::one()),
        (1, 3, -h),
    ])
}

fn mat_beta_a<T: Scalar>(alpha: T, beta: T) -> DMatrix<T> {
    let ba = beta / alpha;
    let h = cst::<T>(0.5);
    let two = cst::<T>(2.0);
    let four = cst::<T>(4.0);
    sym4(&[
        (0, 0, -ba),
        (0, 1, -ba - h),
        (0, 2, two * ba),
        (0, 3, -ba),
        (1, 1, -ba - T::one()),
        (1, 2, two * ba + T::one()),
        (1, 3, -ba - h),
        (2, 2, -four * ba),
        (2, 3, two * ba),
        (3, 3, -ba),
    ])
}

fn mat_lip_a<T: Scalar>(alpha: T, lip: T) -> DMatrix<T> {
    let al = alpha * lip;
    let two = cst::<T>(2.0);
    let four = cst::<T>(4.0);
    sym4(&[
        (0, 0, -T::one()),
        (0, 1, -T::one()),
        (0, 2, two),
        (0, 3, -T::one()),
        (1, 1, al * al - T::one()),
        (1, 2, two),
        (1, 3, -T::one()),
        (2, 2, -four),
        (2, 3, two),
        (3, 3, -T::one()),
    ])
}

fn mat_mu_b<T: Scalar>(alpha: T, mu: T) -> DMatrix<T> {
    let h = cst::<T>(0.5);
    sym4(&[(0, 2, h), (2, 2, -(alpha * mu) - T::one())])
}

fn mat_beta_b<T: Scalar>(alpha: T, beta: T) -> DMatrix<T> {
    let ba = beta / alpha;
    let h = cst::<T>(0.5);
    sym4(&[(0, 0, -ba), (0, 2, ba + h), (2, 2, -ba - T::one())])
}

fn mat_lip_b<T: Scalar>(alpha: T, lip: T) -> DMatrix<T> {
    let al = alpha * lip;
    sym4(&[(0, 0, -T::one()), (0, 2, T::one()), (2, 2, al * al - T::one())])
}

fn mat_mu_c<T: Scalar>(alpha: T, mu: T) -> DMatrix<T> {
    let h = cst::<T>(0.5);
    sym4(&[(2, 2, -(alpha * mu)), (2, 3, h)])
}

fn mat_beta_c<T: Scalar>(alpha: T, beta: T) -> DMatrix<T> {
    let h = cst::<T>(0.5);
    sym4(&[(2, 3, h), (3, 3, -(beta / alpha))])
}

fn mat_lip_c<T: Scalar>(alpha: T, lip: T) -> DMatrix<T> {
    let al = alpha * lip;
    sym4(&[(2, 2, al * al), (3, 3, -T::one())])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair1(x1: f64, q1: f64, x2: f64, q2: f64) -> EvaluationPair<f64> {
        EvaluationPair::new(
            DVector::from_vec(vec![x1]),
            DVector::from_vec(vec![q1]),
            DVector::from_vec(vec![x2]),
            DVector::from_vec(vec![q2]),
        )
        .unwrap()
    }

    #[test]
    fn strong_monotonicity_boundary_pair_passes() {
        let class = OperatorClass::strongly_monotone(Role::A, 1.0);
        let p = pair1(0.0, 0.0, 1.0, 1.0);
        assert!(class.check_two_point(&p, 0.0).unwrap());
    }

    #[test]
    fn cocoercivity_violating_pair_fails() {
        let class = OperatorClass::cocoercive(Role::B, 1.0);
        let p = pair1(0.0, 0.0, 1.0, 2.0);
        assert!(!class.check_two_point(&p, 1e-12).unwrap());
    }

    #[test]
    fn identical_pair_interpolable_in_every_nonempty_class() {
        let p = pair1(0.3, -0.7, 0.3, -0.7);
        for class in [
            OperatorClass::strongly_monotone(Role::A, 2.0),
            OperatorClass::cocoercive(Role::B, 0.5),
            OperatorClass::lipschitz(Role::C, 3.0),
            OperatorClass::monotone(Role::A).with_lip(1.0),
        ] {
            assert!(class.check_two_point(&p, 0.0).unwrap());
        }
    }

    /// Three points that are pairwise interpolable in M cap L_L but admit no
    /// joint interpolant: the predicate must accept every pair.
    #[test]
    fn pairwise_ok_does_not_imply_joint_interpolability_fixture() {
        let l = 2.0;
        let class = OperatorClass::monotone(Role::B).with_lip(l);
        let pts: [(DVector<f64>, DVector<f64>); 3] = [
            (DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![0.0, 0.0])),
            (DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 0.0])),
            (DVector::from_vec(vec![0.5, 0.0]), DVector::from_vec(vec![0.0, l / 2.0])),
        ];
        for i in 0..3 {
            for j in (i + 1)..3 {
                let p = EvaluationPair::new(
                    pts[i].0.clone(),
                    pts[i].1.clone(),
                    pts[j].0.clone(),
                    pts[j].1.clone(),
                )
                .unwrap();
                assert!(class.check_two_point(&p, 0.0).unwrap(), "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn emptiness_and_degeneracy() {
        // mu = L = 3: nonempty (the single operator 3I) but degenerate.
        let c = OperatorClass::strongly_monotone(Role::A, 3.0).with_lip(3.0);
        assert!(c.is_nonempty());
        assert!(c.is_degenerate());

        let c = OperatorClass::strongly_monotone(Role::A, 1.0).with_beta(0.5);
        assert!(c.is_nonempty());
        assert!(!c.is_degenerate());

        let c = OperatorClass::strongly_monotone(Role::A, 2.0).with_beta(1.0);
        assert!(!c.is_nonempty());

        let c = OperatorClass::strongly_monotone(Role::A, 1.0).with_beta(1.0);
        assert!(c.is_degenerate());

        let c = OperatorClass::strongly_monotone(Role::A, 1.0).with_beta(0.5).with_lip(4.0);
        assert!(!c.is_degenerate());

        // beta/lip pairs never empty or degenerate.
        let c = OperatorClass::cocoercive(Role::B, 2.0).with_lip(5.0);
        assert!(c.is_nonempty());
        assert!(!c.is_degenerate());
    }

    #[test]
    fn mu_a_matrix_matches_template() {
        let alpha = 0.7;
        let mu = 1.3;
        let class = OperatorClass::strongly_monotone(Role::A, mu);
        let ms = class.constraint_matrices(alpha, &GramOrdering::dys()).unwrap();
        assert_eq!(ms.len(), 1);
        let m = &ms[0].matrix;
        assert_eq!(ms[0].name, ConstraintName::MuA);
        assert_eq!(m[(0, 1)], -0.5);
        assert_eq!(m[(1, 1)], -alpha * mu - 1.0);
        assert_eq!(m[(1, 2)], 1.0);
        assert_eq!(m[(1, 3)], -0.5);
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m, &m.transpose());
    }

    #[test]
    fn beta_c_matrix_matches_template() {
        let alpha = 2.0;
        let beta = 3.0;
        let class = OperatorClass::cocoercive(Role::C, beta);
        let ms = class.constraint_matrices(alpha, &GramOrdering::dys()).unwrap();
        let m = &ms[0].matrix;
        assert_eq!(ms[0].name, ConstraintName::BetaC);
        assert_eq!(m[(2, 3)], 0.5);
        assert_eq!(m[(3, 3)], -beta / alpha);
    }

    #[test]
    fn zero_class_contributes_nothing() {
        let class = OperatorClass::<f64>::zero(Role::C);
        let ms = class.constraint_matrices(1.0, &GramOrdering::dys()).unwrap();
        assert!(ms.is_empty());
    }

    #[test]
    fn role_c_in_drs_ordering_is_an_error() {
        let class = OperatorClass::cocoercive(Role::C, 1.0);
        let err = class.constraint_matrices(1.0, &GramOrdering::drs()).unwrap_err();
        assert!(matches!(err, OperatorError::RoleNotInOrdering { role: Role::C, .. }));
    }

    /// alpha-scaling: matrices at (alpha; mu, beta, lip) coincide bit for bit
    /// with matrices at (1; alpha*mu, beta/alpha, alpha*lip).
    #[test]
    fn alpha_scaling_is_exact() {
        let alpha = 0.3137;
        for (role, ord) in [
            (Role::A, GramOrdering::dys()),
            (Role::B, GramOrdering::drs()),
            (Role::C, GramOrdering::fbs()),
        ] {
            let class =
                OperatorClass::strongly_monotone(role, 1.7).with_beta(0.41).with_lip(9.2);
            let scaled = OperatorClass::strongly_monotone(role, alpha * 1.7)
                .with_beta(0.41 / alpha)
                .with_lip(alpha * 9.2);
            let lhs = class.constraint_matrices(alpha, &ord).unwrap();
            let rhs = scaled.constraint_matrices(1.0, &ord).unwrap();
            assert_eq!(lhs.len(), rhs.len());
            for (a, b) in lhs.iter().zip(rhs.iter()) {
                assert_eq!(a.matrix, b.matrix, "{:?}", a.name);
            }
        }
    }

    /// Reduced-ordering matrices are the full-basis matrices with the
    /// inactive rows and columns removed.
    #[test]
    fn drs_matrices_are_row_column_selections_of_full_basis() {
        let class = OperatorClass::strongly_monotone(Role::A, 1.3).with_beta(0.4).with_lip(6.0);
        let full = class.constraint_matrices(0.7, &GramOrdering::dys()).unwrap();
        let reduced = class.constraint_matrices(0.7, &GramOrdering::drs()).unwrap();
        for (f, r) in full.iter().zip(reduced.iter()) {
            assert_eq!(f.name, r.name);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(f.matrix[(i, j)], r.matrix[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn evaluation_pair_requires_common_dimension() {
        let err = EvaluationPair::new(
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0]),
        )
        .unwrap_err();
        assert_eq!(err, OperatorError::DimensionMismatch);
        assert!(EvaluationPair::<f64>::new(
            DVector::zeros(0),
            DVector::zeros(0),
            DVector::zeros(0),
            DVector::zeros(0)
        )
        .is_err());
    }

    #[test]
    fn subdifferential_predicate() {
        // q = x is the gradient of |x|^2/2: mu=1-strongly convex, 1-smooth.
        let p = pair1(0.0, 0.0, 1.0, 1.0);
        assert!(subdifferential_two_point(0.5, Some(2.0), &p, 1e-12).unwrap());
        // Strong convexity 1 with smoothness 1 is excluded (mu < lip required).
        assert!(subdifferential_two_point(1.0, Some(1.0), &p, 0.0).is_err());
        // Smooth case: gradient jump too large for smoothness 1.5 fails.
        let p = pair1(0.0, 0.0, 1.0, 2.0);
        assert!(!subdifferential_two_point(0.0, Some(1.5), &p, 1e-12).unwrap());
        // Without a smoothness bound it is plain strong monotonicity.
        assert!(subdifferential_two_point(0.0, None, &p, 0.0).unwrap());
    }

    #[test]
    fn fbs_embedding_folds_zb_into_z() {
        let ord = GramOrdering::fbs();
        assert_eq!(ord.dim(), 3);
        let e = ord.embedding::<f64>();
        // z_B row equals z row.
        assert_eq!(e.row(2), e.row(0));
        // Output vector is ((1-theta), theta, 0) in (z, z_A, z_C).
        let v = ord.output_vector(0.25);
        assert_eq!(v.as_slice(), &[0.75, 0.25, 0.0]);
    }

    #[test]
    fn a_zero_embedding_substitutes_reflection() {
        let ord = GramOrdering::from_active(false, true, true);
        let e = ord.embedding::<f64>();
        // z_A = 2 z_B - z - z_C in basis (z, z_B, z_C).
        assert_eq!(e.row(1).iter().copied().collect::<Vec<_>>(), vec![-1.0, 2.0, -1.0]);
        let v = ord.output_vector(0.5);
        assert_eq!(v.as_slice(), &[0.5, 0.5, -0.5]);
    }
}
