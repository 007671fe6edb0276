//! Per-branch dual certificates in sum-of-squares form.
//!
//! For each closed-form branch the dual multipliers and a rank-two
//! factorization of the slack are given explicitly: in the Gram basis
//! `(z, z_A, z_B)`,
//!
//! `S(rho^2, lambda) = K1 v v' + K2 w w'`,  `v = (m3, m1, m2)`, `w = (m5, 0, m4)`.
//!
//! Nonnegativity of the multipliers and of `K1, K2` over each region is what
//! makes `rho^2` a proven upper bound; [`verify_certificate`] checks all of
//! it numerically.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{classify_mu_coco, classify_mu_lipschitz, AnalyticError, Branch, CaseLabel, RateFamily};
use crate::operators::{OperatorClass, Role};
use crate::ospep::{build_dual, ClassBundle, DualMap, Method, MethodSpec};
use crate::scalar::{cst, Scalar};

/// Dual certificate with explicit sum-of-squares factorization.
#[derive(Debug, Clone, Serialize)]
pub struct SosCertificate<T> {
    pub label: CaseLabel,
    pub mu: T,
    /// `beta` for the cocoercive family, `lip` for the Lipschitz family.
    pub second: T,
    pub theta: T,
    pub rho_sq: T,
    pub lambdas: Vec<(String, T)>,
    pub k1: T,
    pub k2: T,
    pub m: [T; 5],
    /// Slack reconstructed from `(rho_sq, lambdas)` through the dual map.
    pub slack: Vec<Vec<T>>,
}

impl<T: Scalar> SosCertificate<T> {
    pub fn slack_matrix(&self) -> DMatrix<T> {
        DMatrix::from_fn(3, 3, |i, j| self.slack[i][j])
    }

    /// `(v, w)` of the factorization `S = K1 v v' + K2 w w'`.
    pub fn sos_vectors(&self) -> (DVector<T>, DVector<T>) {
        let [m1, m2, m3, m4, m5] = self.m;
        (
            DVector::from_vec(vec![m3, m1, m2]),
            DVector::from_vec(vec![m5, T::zero(), m4]),
        )
    }
}

/// The DRS class bundle a certificate's slack is measured against.
pub(crate) fn family_classes<T: Scalar>(family: RateFamily, mu: T, second: T) -> ClassBundle<T> {
    let b = match family {
        RateFamily::MuCoco => OperatorClass::cocoercive(Role::B, second),
        RateFamily::MuLip => OperatorClass::monotone(Role::B).with_lip(second),
    };
    ClassBundle::new(
        OperatorClass::strongly_monotone(Role::A, mu),
        b,
        OperatorClass::zero(Role::C),
    )
    .expect("family classes are structurally valid")
}

pub(crate) fn family_dual_map<T: Scalar>(
    family: RateFamily,
    mu: T,
    second: T,
    theta: T,
) -> DualMap<T> {
    let classes = family_classes(family, mu, second);
    let spec = MethodSpec { method: Method::Drs, alpha: T::one(), theta };
    build_dual(&classes, &spec).expect("family dual map is structurally valid")
}

/// Explicit dual certificate for a branch; errors if the parameters do not
/// lie in that branch's region.
pub fn dual_certificate<T: Scalar>(
    family: RateFamily,
    branch: Branch,
    mu: T,
    second: T,
    theta: T,
) -> Result<SosCertificate<T>, AnalyticError> {
    let actual = match family {
        RateFamily::MuCoco => classify_mu_coco(mu, second, theta)?,
        RateFamily::MuLip => classify_mu_lipschitz(mu, second, theta)?,
    };
    if actual != branch {
        return Err(AnalyticError::OutsideRegion(format!(
            "parameters classify as branch {} of {:?}, not {}",
            actual.letter(),
            family,
            branch.letter()
        )));
    }
    let one = T::one();
    let two = cst::<T>(2.0);
    let four = cst::<T>(4.0);
    let (rho_sq, lambdas, k1, k2, m): (T, Vec<(String, T)>, T, T, [T; 5]) = match family {
        RateFamily::MuCoco => {
            let beta = second;
            match branch {
                Branch::A => {
                    let d = (two - theta) * (beta + one) + two * mu * (one + beta - theta * beta);
                    let f = one - theta * beta / (beta + one);
                    let lam_a = two * theta * (one + beta) / (one - beta) * f;
                    let lam_b = two * theta * f;
                    let k1 = theta * d / (one - beta);
                    let k2 = two * beta * beta * theta * (one + beta - theta * beta)
                        / ((one - beta) * (beta + one) * (beta + one))
                        * ((beta - one) * mu * (two * beta * (theta - one) + theta - two)
                            - (two - theta) * beta * (beta + one))
                        / d;
                    (
                        f * f,
                        vec![("mu_a".into(), lam_a), ("beta_b".into(), lam_b)],
                        k1,
                        k2,
                        [
                            -one,
                            (two - theta) * (beta + one) / d,
                            -(two - theta) * beta / d,
                            -(beta + one) / beta,
                            one,
                        ],
                    )
                }
                Branch::B => {
                    let d = (two - theta) * (beta + one) + two * mu * (one + beta - theta * beta);
                    let f = one - theta * (one + mu * beta) / ((mu + one) * (beta + one));
                    let lam_a = two * theta * (beta + one) / (beta - one) * f;
                    let lam_b = two * theta * (mu - one) / (mu + one) * f;
                    let k1 = theta * d / (beta - one);
                    let k2 = two * theta * beta * beta
                        * ((beta + one) * (mu + one) - theta * (one + mu * beta))
                        / ((mu + one) * (mu + one) * (beta - one) * (beta + one) * (beta + one))
                        * (mu * beta * beta * (-two * theta * mu + theta + two * mu)
                            + theta * beta * beta
                            + (theta - two) * mu * (mu + one)
                            + beta * (theta * mu * mu + theta - two * mu - two)
                            - two * beta * beta)
                        / d;
                    (
                        f * f,
                        vec![("mu_a".into(), lam_a), ("beta_b".into(), lam_b)],
                        k1,
                        k2,
                        [
                            -one,
                            two / (mu + one) - (two - theta) * (beta + one) / d,
                            -one / (mu + one) + (two - theta) * beta / d,
                            -(beta + one) / beta,
                            one,
                        ],
                    )
                }
                Branch::C => {
                    let d = two * (theta - one) * mu + theta - two;
                    let lam = two * theta * (theta - one);
                    let k1 = theta * d;
                    let k2 = two * (theta - one) * theta
                        * (theta * beta + theta * mu * (one + two * beta)
                            - two * (mu + beta + mu * beta))
                        / d;
                    (
                        (theta - one) * (theta - one),
                        vec![("mu_a".into(), lam), ("beta_b".into(), lam)],
                        k1,
                        k2,
                        [-one, -(two - theta) / d, (two - theta) / d, -one, one],
                    )
                }
                Branch::D => {
                    let d = two * (theta - one) * mu + theta - two;
                    let f = one - theta * mu / (mu + one);
                    let lam_a = two * theta * f;
                    let lam_b = two * theta * (one - mu) / (one + mu) * f;
                    let k1 = -theta * d;
                    let k2 = two * theta * ((theta - one) * mu - one)
                        * (-theta * (beta - mu * mu * (one + two * beta) - mu * (one - beta))
                            - two * (mu + one) * (mu * beta + mu - beta))
                        / ((mu + one) * (mu + one) * d);
                    (
                        f * f,
                        vec![("mu_a".into(), lam_a), ("beta_b".into(), lam_b)],
                        k1,
                        k2,
                        [
                            -one,
                            (two - theta) / d + two / (mu + one),
                            -theta * mu / ((mu + one) * d),
                            -one,
                            one,
                        ],
                    )
                }
                Branch::E => {
                    let d = two * mu * beta * (one - theta) + (two - theta) * (mu + beta + one);
                    let num_a = (two - theta) * mu * (beta + one) + theta * beta * (one - mu);
                    let rho_sq = (two - theta) / four
                        * (num_a * ((two - theta) * beta * (mu + one) + theta * mu * (one - beta)))
                        / (mu * beta * d);
                    let lam_a = theta * num_a / beta;
                    let lam_b = theta * (two - theta) / beta * num_a / d;
                    let k1 = beta / (four * mu) * theta / d;
                    let g = (beta + one) * (theta - two) + beta * theta;
                    (
                        rho_sq,
                        vec![("mu_a".into(), lam_a), ("beta_b".into(), lam_b)],
                        k1,
                        T::zero(),
                        [
                            -two * mu
                                * (two * (theta - one) * mu * beta + theta * beta
                                    + (theta - two) * (mu + one)
                                    - two * beta)
                                / beta,
                            two * mu * g / beta,
                            (theta - two) - mu * g / beta,
                            T::zero(),
                            T::zero(),
                        ],
                    )
                }
            }
        }
        RateFamily::MuLip => {
            let lip = second;
            let l2 = lip * lip;
            match branch {
                Branch::A => {
                    let p = two * (theta - one) * mu + theta - two;
                    let q = theta - two * (mu + one);
                    let c = ((p * p + l2 * q * q) / (l2 + one)).sqrt();
                    let rho = (theta + c) / (two * (mu + one));
                    let lam_a = theta * (theta + c) / (mu + one);
                    let lam_l = (two - theta) * theta * mu / ((mu + one) * (l2 + one))
                        * (theta + c)
                        / c;
                    let lam_mu_b = theta * (theta + c) / ((mu + one) * (mu + one) * c)
                        * (c + mu * (p - l2 * q) / (l2 + one));
                    (
                        rho * rho,
                        vec![
                            ("mu_a".into(), lam_a),
                            ("mu_b".into(), lam_mu_b),
                            ("lip_b".into(), lam_l),
                        ],
                        theta * c,
                        T::zero(),
                        [
                            -one,
                            (c - theta * mu) / (c * (one + mu)),
                            (two * (mu + one) - (c + theta)) / (two * c * (mu + one)),
                            T::zero(),
                            T::zero(),
                        ],
                    )
                }
                Branch::B => {
                    let d = two * (mu + one) * (lip + one) - theta * (two * mu + lip + one);
                    let f = one - theta * (mu + lip) / ((mu + one) * (lip + one));
                    let lam_a = two * theta * (one + lip) / (one - lip) * f;
                    let lam_l = theta / lip * (mu - one) / (mu + one) * f;
                    let k1 = theta * d / (one - lip);
                    let k2 = theta * ((lip + one) * (mu + one) - theta * (lip + mu))
                        / ((mu + one)
                            * (mu + one)
                            * (one - lip)
                            * lip
                            * (lip + one)
                            * (lip + one))
                        * (two * (mu + one)
                            * (lip + one)
                            * (mu * (one - lip) * (one - lip) - (l2 + one))
                            + theta
                                * (mu * (one + lip + cst::<T>(3.0) * l2 - l2 * lip)
                                    + (one + lip + l2 + l2 * lip)
                                    + two * mu * mu * (lip - one)))
                        / d;
                    (
                        f * f,
                        vec![
                            ("mu_a".into(), lam_a),
                            ("mu_b".into(), T::zero()),
                            ("lip_b".into(), lam_l),
                        ],
                        k1,
                        k2,
                        [
                            -one,
                            two / (mu + one) - (two - theta) * (lip + one) / d,
                            (theta * (mu + lip) - two * lip * (mu + one)) / ((one + mu) * d),
                            -(one + lip),
                            one,
                        ],
                    )
                }
                Branch::C => {
                    let e = (two - theta) * (one - l2) - two * mu * (theta + l2 - one);
                    let rho_sq = (two - theta) / (four * mu * (l2 + one))
                        * ((theta * (l2 + one) - two * mu * (theta + l2 - one))
                            * (theta * (one + two * mu + l2) - two * (mu + one) * (l2 + one)))
                        / (two * mu * (theta + l2 - one) - (two - theta) * (one - l2));
                    let lam_a = theta * (theta - two * mu * (theta + l2 - one) / (l2 + one));
                    let lam_l = (two - theta) * theta / (l2 + one)
                        * (theta * (l2 + one) - two * mu * (theta + l2 - one))
                        / e;
                    let k1 = theta / (four * mu * (l2 + one) * e);
                    (
                        rho_sq,
                        vec![
                            ("mu_a".into(), lam_a),
                            ("mu_b".into(), T::zero()),
                            ("lip_b".into(), lam_l),
                        ],
                        k1,
                        T::zero(),
                        [
                            four * mu * mu * (one - l2 - theta)
                                + two * mu * (two - theta) * (one - l2),
                            four * mu * (l2 + theta - one),
                            two * mu * (one - l2 - theta) - (two - theta) * (l2 + one),
                            T::zero(),
                            T::zero(),
                        ],
                    )
                }
                _ => unreachable!("classification never returns d/e for this family"),
            }
        }
    };
    let dual = family_dual_map(family, mu, second, theta);
    let lambda_values: Vec<T> = dual
        .multiplier_names()
        .iter()
        .map(|name| {
            lambdas
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .unwrap_or_else(T::zero)
        })
        .collect();
    let slack = dual.slack(rho_sq, &lambda_values);
    Ok(SosCertificate {
        label: CaseLabel { family, branch },
        mu,
        second,
        theta,
        rho_sq,
        lambdas,
        k1,
        k2,
        m,
        slack: (0..3)
            .map(|i| (0..3).map(|j| slack[(i, j)]).collect())
            .collect(),
    })
}

/// Certificate for whatever branch the parameters fall in.
pub fn dual_certificate_auto<T: Scalar>(
    family: RateFamily,
    mu: T,
    second: T,
    theta: T,
) -> Result<SosCertificate<T>, AnalyticError> {
    let branch = match family {
        RateFamily::MuCoco => classify_mu_coco(mu, second, theta)?,
        RateFamily::MuLip => classify_mu_lipschitz(mu, second, theta)?,
    };
    dual_certificate(family, branch, mu, second, theta)
}

/// Outcome of the four certificate checks.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<T> {
    /// Frobenius residual of `S - K1 v v' - K2 w w'`.
    pub sos_residual: T,
    pub sos_ok: bool,
    /// Smallest of the multipliers and `K1`, `K2`.
    pub min_coefficient: T,
    pub signs_ok: bool,
    pub slack_min_eig: T,
    pub slack_psd_ok: bool,
    /// Dual feasibility established: `rho_sq` is a proven upper bound.
    pub upper_bound_valid: bool,
    pub pass: bool,
}

/// Check a certificate: SOS identity within `1e-9` Frobenius, multiplier and
/// `K` nonnegativity within `-1e-12`, slack PSD within `-1e-10`.
pub fn verify_certificate<T: Scalar>(cert: &SosCertificate<T>) -> VerificationReport<T> {
    let s = cert.slack_matrix();
    let (v, w) = cert.sos_vectors();
    let vv = DMatrix::from_fn(3, 3, |i, j| v[i] * v[j]);
    let ww = DMatrix::from_fn(3, 3, |i, j| w[i] * w[j]);
    let recon = vv * cert.k1 + ww * cert.k2;
    let sos_residual = (&s - recon).norm();
    let sos_ok = sos_residual <= cst(1e-9);
    let mut min_coefficient = cert.k1.min(cert.k2);
    for (_, lam) in &cert.lambdas {
        min_coefficient = min_coefficient.min(*lam);
    }
    let signs_ok = min_coefficient >= cst(-1e-12);
    let slack_min_eig = s.symmetric_eigenvalues().min();
    let slack_psd_ok = slack_min_eig >= cst(-1e-10);
    let upper_bound_valid = signs_ok && slack_psd_ok;
    VerificationReport {
        sos_residual,
        sos_ok,
        min_coefficient,
        signs_ok,
        slack_min_eig,
        slack_psd_ok,
        upper_bound_valid,
        pass: sos_ok && upper_bound_valid,
    }
}
