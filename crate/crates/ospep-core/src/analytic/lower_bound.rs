//! Matching worst-case operators for each closed-form branch.
//!
//! Every branch has an explicit two-dimensional pair `(A, B)` whose DRS map
//! `T = I - theta J_B + theta J_A (2 J_B - I)` attains the branch's factor,
//! proving the upper bound cannot be improved. Scalar constructions are
//! embedded as 2x2 diagonal maps so a single instance shape serves all
//! branches; normal cones enter only through their resolvents.

use nalgebra::Matrix2;
use serde::Serialize;

use super::{classify_mu_coco, classify_mu_lipschitz, AnalyticError, Branch, CaseLabel, RateFamily};
use crate::scalar::{cst, Scalar};

/// Structure of the worst-case operator `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AKind {
    /// Normal cone of the origin (resolvent identically zero).
    NormalConeOrigin,
    /// `mu I` (or `0` for B-side scalar constructions).
    ScaledIdentity,
    /// Rotation-like 2x2 matrix.
    Rotation2x2,
    /// `mu I` plus the normal cone of a coordinate line.
    ScaledIdentityPlusNormalConeLine,
}

/// Explicit 2x2 worst-case instance.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundInstance<T: Scalar> {
    pub label: CaseLabel,
    pub a_kind: AKind,
    /// Matrix of `A` when it is one (normal-cone parts excluded).
    pub a_matrix: Option<Matrix2<T>>,
    pub b_matrix: Option<Matrix2<T>>,
    pub j_a: Matrix2<T>,
    pub j_b: Matrix2<T>,
    pub t: Matrix2<T>,
    pub achieved_rho: T,
    /// Mixing parameter of the rotation constructions, when used.
    pub k: Option<T>,
    /// Off-diagonal entry of the rotation-like `A`, when used.
    pub rotation: Option<T>,
}

fn resolvent<T: Scalar>(m: &Matrix2<T>) -> Matrix2<T> {
    (Matrix2::identity() + m)
        .try_inverse()
        .expect("I + A is invertible for monotone A")
}

/// `T = I - theta J_B + theta J_A (2 J_B - I)`.
pub fn drs_map<T: Scalar>(j_a: &Matrix2<T>, j_b: &Matrix2<T>, theta: T) -> Matrix2<T> {
    let i = Matrix2::identity();
    i - j_b * theta + j_a * (j_b * cst::<T>(2.0) - i) * theta
}

fn spectral_norm<T: Scalar>(m: &Matrix2<T>) -> T {
    let g = m.transpose() * m;
    g.symmetric_eigenvalues().max().max(T::zero()).sqrt()
}

fn sym_min_eig<T: Scalar>(m: &Matrix2<T>) -> T {
    let s = (m + m.transpose()) * cst::<T>(0.5);
    s.symmetric_eigenvalues().min()
}

/// Worst-case instance for the cocoercive family.
pub fn lower_bound_mu_coco<T: Scalar>(
    mu: T,
    beta: T,
    theta: T,
) -> Result<LowerBoundInstance<T>, AnalyticError> {
    let branch = classify_mu_coco(mu, beta, theta)?;
    let label = CaseLabel { family: RateFamily::MuCoco, branch };
    let one = T::one();
    let two = cst::<T>(2.0);
    let i = Matrix2::identity();
    let inst = match branch {
        Branch::A => scalar_instance(label, AKind::NormalConeOrigin, None, Some(i / beta), theta),
        Branch::B => scalar_instance(
            label,
            AKind::ScaledIdentity,
            Some(i * mu),
            Some(i / beta),
            theta,
        ),
        Branch::C => scalar_instance(label, AKind::NormalConeOrigin, None, Some(i * T::zero()), theta),
        Branch::D => scalar_instance(
            label,
            AKind::ScaledIdentity,
            Some(i * mu),
            Some(i * T::zero()),
            theta,
        ),
        Branch::E => {
            let a1 = -theta * (two * beta * mu + beta + mu) + two * (beta * mu + beta + mu);
            let a2 = theta * (-(two * beta + one) * mu * mu + (beta - one) * mu + beta)
                + two * (mu + one) * (beta * (mu - one) + mu);
            let b2 = beta * beta;
            let b3 = b2 * beta;
            let m2 = mu * mu;
            let m3 = m2 * mu;
            let k_den = theta
                * theta
                * (cst::<T>(8.0) * b3 * m3
                    + two * b3 * mu
                    + two * b3
                    + cst::<T>(4.0) * b2 * m3
                    + cst::<T>(4.0) * b2 * m2
                    - b2 * mu
                    + b2
                    - two * beta * m3
                    - m3
                    - m2)
                - cst::<T>(4.0)
                    * theta
                    * (cst::<T>(4.0) * b3 * m3
                        + two * b3 * m2
                        + two * b3 * mu
                        + two * b3
                        + cst::<T>(4.0) * b2 * m3
                        + cst::<T>(3.0) * b2 * m2
                        + b2
                        - beta * m3
                        - m3
                        - m2)
                + cst::<T>(4.0)
                    * (mu + one)
                    * (two * b3 * m2 + two * b3 + cst::<T>(3.0) * b2 * m2 + b2 - m2);
            let k = a1 * a2 / k_den;
            if !(k > T::zero() && k < one / (beta * beta)) {
                return Err(AnalyticError::Inconsistent(format!(
                    "branch-e mixing parameter K = {k:?} outside (0, 1/beta^2)"
                )));
            }
            let s = (k - k * k * beta * beta).sqrt();
            let disc = cst::<T>(4.0) * (theta - two) * (theta - two) * (mu + one) * (mu + one)
                * (k - beta * beta * k * k)
                + ((theta - two) * (k - one) - two * mu * (theta - beta * theta * k + k - one))
                    * ((theta - two) * (k - one)
                        - two * mu * (theta - beta * theta * k + k - one));
            let rot = (two * theta * mu + theta - two * beta * theta * k * mu - theta * k
                + two * k * mu
                + two * k
                - two * mu
                - two
                + disc.sqrt())
                / (two * (theta - two) * s);
            let a_mat = Matrix2::new(mu, -rot, rot, mu);
            let b_mat = Matrix2::new(beta * k, -s, s, beta * k);
            let j_a = resolvent(&a_mat);
            let j_b = resolvent(&b_mat);
            let t = drs_map(&j_a, &j_b, theta);
            LowerBoundInstance {
                label,
                a_kind: AKind::Rotation2x2,
                a_matrix: Some(a_mat),
                b_matrix: Some(b_mat),
                j_a,
                j_b,
                t,
                achieved_rho: spectral_norm(&t),
                k: Some(k),
                rotation: Some(rot),
            }
        }
    };
    Ok(inst)
}

/// Worst-case instance for the Lipschitz family.
pub fn lower_bound_mu_lipschitz<T: Scalar>(
    mu: T,
    lip: T,
    theta: T,
) -> Result<LowerBoundInstance<T>, AnalyticError> {
    let branch = classify_mu_lipschitz(mu, lip, theta)?;
    let label = CaseLabel { family: RateFamily::MuLip, branch };
    let one = T::one();
    let two = cst::<T>(2.0);
    let i = Matrix2::identity();
    let inst = match branch {
        Branch::A => {
            // A = mu Id + normal cone of {0} x R, B = lip * (rotation by 90 deg).
            let b_mat = Matrix2::new(T::zero(), lip, -lip, T::zero());
            let j_a = Matrix2::new(T::zero(), T::zero(), T::zero(), one / (mu + one));
            let j_b = resolvent(&b_mat);
            let t = drs_map(&j_a, &j_b, theta);
            LowerBoundInstance {
                label,
                a_kind: AKind::ScaledIdentityPlusNormalConeLine,
                a_matrix: None,
                b_matrix: Some(b_mat),
                j_a,
                j_b,
                t,
                achieved_rho: spectral_norm(&t),
                k: None,
                rotation: None,
            }
        }
        Branch::B => scalar_instance(
            label,
            AKind::ScaledIdentity,
            Some(i * mu),
            Some(i * lip),
            theta,
        ),
        Branch::C => {
            let l2 = lip * lip;
            let p = two * (theta - one) * mu + theta - two;
            let q = theta - two * (mu + one);
            let k_num = (mu - one) * (l2 * q - p) * (l2 * q - p)
                - cst::<T>(4.0) * (theta - two) * (theta - two) * (mu + one) * l2;
            let k_den = cst::<T>(4.0)
                * mu
                * mu
                * (theta + l2 - one)
                * ((one - theta) * (l2 - mu) + l2 * mu - one)
                + (theta - two) * (theta - two) * (mu + one) * (l2 + one) * (l2 + one);
            let k = (l2 + one) / (two * lip) * k_num / k_den;
            if !(k >= T::zero() && k <= one) {
                return Err(AnalyticError::Inconsistent(format!(
                    "branch-c mixing parameter K = {k:?} outside [0, 1]"
                )));
            }
            let s = (one - k * k).sqrt();
            let b_mat = Matrix2::new(k, -s, s, k) * lip;
            let j_a = Matrix2::new(one / (mu + one), T::zero(), T::zero(), T::zero());
            let j_b = resolvent(&b_mat);
            let t = drs_map(&j_a, &j_b, theta);
            LowerBoundInstance {
                label,
                a_kind: AKind::ScaledIdentityPlusNormalConeLine,
                a_matrix: None,
                b_matrix: Some(b_mat),
                j_a,
                j_b,
                t,
                achieved_rho: spectral_norm(&t),
                k: Some(k),
                rotation: None,
            }
        }
        _ => unreachable!("classification never returns d/e for this family"),
    };
    Ok(inst)
}

/// Diagonal/scalar constructions embedded as 2x2: `A` is either the normal
/// cone of the origin (resolvent 0) or `mu I`; `B` is a scalar multiple of I.
fn scalar_instance<T: Scalar>(
    label: CaseLabel,
    a_kind: AKind,
    a_matrix: Option<Matrix2<T>>,
    b_matrix: Option<Matrix2<T>>,
    theta: T,
) -> LowerBoundInstance<T> {
    let j_a = match (&a_kind, &a_matrix) {
        (AKind::NormalConeOrigin, _) => Matrix2::zeros(),
        (_, Some(a)) => resolvent(a),
        _ => unreachable!(),
    };
    let j_b = match &b_matrix {
        Some(b) => resolvent(b),
        None => Matrix2::identity(),
    };
    let t = drs_map(&j_a, &j_b, theta);
    LowerBoundInstance {
        label,
        a_kind,
        a_matrix,
        b_matrix,
        j_a,
        j_b,
        t,
        achieved_rho: spectral_norm(&t),
        k: None,
        rotation: None,
    }
}

/// Class-membership report for a constructed instance.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport<T> {
    /// `lambda_min(sym A) - mu` where `A` is a matrix (normal-cone parts add
    /// unconstrained directions and are checked through the resolvent).
    pub a_margin: Option<T>,
    /// Cocoercivity margin `lambda_min(sym B^-1) - beta`, or monotonicity
    /// margin `lambda_min(sym B)` plus Lipschitz margin `lip - ||B||`.
    pub b_margins: Vec<T>,
    /// `|| T - (I - theta J_B + theta J_A (2 J_B - I)) ||_max`.
    pub t_consistency: T,
    pub pass: bool,
}

impl<T: Scalar> LowerBoundInstance<T> {
    /// Verify class membership and the construction identity to `tol`.
    pub fn check_membership(&self, mu: T, second: T, theta: T, tol: T) -> MembershipReport<T> {
        let a_margin = self.a_matrix.as_ref().map(|a| sym_min_eig(a) - mu);
        let mut b_margins = Vec::new();
        match self.label.family {
            RateFamily::MuCoco => {
                // beta-cocoercive: sym(B^-1) >= beta (B = 0 is cocoercive for
                // every beta and has no inverse).
                if let Some(b) = &self.b_matrix {
                    if b.norm() == T::zero() {
                        b_margins.push(T::zero());
                    } else {
                        let binv = b.try_inverse().expect("nonzero cocoercive B invertible");
                        b_margins.push(sym_min_eig(&binv) - second);
                    }
                }
            }
            RateFamily::MuLip => {
                if let Some(b) = &self.b_matrix {
                    b_margins.push(sym_min_eig(b)); // monotone
                    b_margins.push(second - spectral_norm(b)); // lip-Lipschitz
                }
            }
        }
        let rebuilt = drs_map(&self.j_a, &self.j_b, theta);
        let t_consistency = (self.t - rebuilt).abs().max();
        let pass = a_margin.is_none_or(|m| m >= -tol)
            && b_margins.iter().all(|m| *m >= -tol)
            && t_consistency <= tol;
        MembershipReport { a_margin, b_margins, t_consistency, pass }
    }
}
