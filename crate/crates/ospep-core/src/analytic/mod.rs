//! Closed-form tight Douglas-Rachford contraction factors.
//!
//! Two assumption families are covered, both at unit step size (`alpha = 1`;
//! use the `*_alpha` wrappers for general step sizes, which rescale
//! `mu -> alpha mu`, `beta -> beta / alpha`, `lip -> alpha lip`):
//!
//! * `mu`-strongly monotone A with `beta`-cocoercive B (five branches),
//! * `mu`-strongly monotone A with monotone `lip`-Lipschitz B (three
//!   branches).
//!
//! Branch regions are evaluated in order and the first match wins; adjacent
//! branch formulas agree on the shared boundaries, so precedence only affects
//! the label. Each branch comes with a dual certificate in sum-of-squares
//! form ([`certificate`]) and a matching two-dimensional worst-case operator
//! pair ([`lower_bound`]), which together prove tightness.

pub mod certificate;
pub mod lower_bound;
pub mod verify;

pub use certificate::{
    dual_certificate, dual_certificate_auto, verify_certificate, SosCertificate,
    VerificationReport,
};
pub use lower_bound::{lower_bound_mu_coco, lower_bound_mu_lipschitz, AKind, LowerBoundInstance};
pub use verify::{verify_tightness, TightnessReport};

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{cst, Scalar};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalyticError {
    #[error("parameters out of domain: {0}")]
    OutOfDomain(String),
    #[error("parameters outside the requested branch region: {0}")]
    OutsideRegion(String),
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
}

/// Assumption family of a closed-form rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateFamily {
    /// A strongly monotone, B cocoercive.
    MuCoco,
    /// A strongly monotone, B monotone and Lipschitz.
    MuLip,
}

/// Branch label within a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    A,
    B,
    C,
    D,
    E,
}

impl Branch {
    pub fn letter(self) -> char {
        match self {
            Branch::A => 'a',
            Branch::B => 'b',
            Branch::C => 'c',
            Branch::D => 'd',
            Branch::E => 'e',
        }
    }
}

/// Family plus branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseLabel {
    pub family: RateFamily,
    pub branch: Branch,
}

impl CaseLabel {
    pub fn new(family: RateFamily, branch: Branch) -> Result<Self, AnalyticError> {
        let valid = match family {
            RateFamily::MuCoco => true,
            RateFamily::MuLip => matches!(branch, Branch::A | Branch::B | Branch::C),
        };
        if !valid {
            return Err(AnalyticError::OutOfDomain(format!(
                "branch {} not defined for family {:?}",
                branch.letter(),
                family
            )));
        }
        Ok(CaseLabel { family, branch })
    }

    pub fn branches(family: RateFamily) -> &'static [Branch] {
        match family {
            RateFamily::MuCoco => &[Branch::A, Branch::B, Branch::C, Branch::D, Branch::E],
            RateFamily::MuLip => &[Branch::A, Branch::B, Branch::C],
        }
    }
}

fn check_domain<T: Scalar>(mu: T, second: T, theta: T, second_name: &str) -> Result<(), AnalyticError> {
    if mu <= T::zero() {
        return Err(AnalyticError::OutOfDomain(format!("mu = {mu:?} must be positive")));
    }
    if second <= T::zero() {
        return Err(AnalyticError::OutOfDomain(format!(
            "{second_name} = {second:?} must be positive"
        )));
    }
    if theta <= T::zero() || theta >= cst(2.0) {
        return Err(AnalyticError::OutOfDomain(format!(
            "theta = {theta:?} must lie in the open interval (0, 2)"
        )));
    }
    Ok(())
}

/// Branch classification for the cocoercive family (first match wins).
pub fn classify_mu_coco<T: Scalar>(mu: T, beta: T, theta: T) -> Result<Branch, AnalyticError> {
    check_domain(mu, beta, theta, "beta")?;
    let one = T::one();
    let two = cst::<T>(2.0);
    if mu * beta - mu + beta < T::zero()
        && theta
            <= two * (beta + one) * (mu - beta - mu * beta)
                / (mu + mu * beta - beta - beta * beta - two * mu * beta * beta)
    {
        return Ok(Branch::A);
    }
    if mu * beta - mu - beta > T::zero()
        && theta
            <= two * (mu * mu + beta * beta + mu * beta + mu + beta - mu * mu * beta * beta)
                / (mu * mu + beta * beta + mu * mu * beta + mu * beta * beta + mu + beta
                    - two * mu * mu * beta * beta)
    {
        return Ok(Branch::B);
    }
    if theta >= two * (mu * beta + mu + beta) / (two * mu * beta + mu + beta) {
        return Ok(Branch::C);
    }
    if mu * beta + mu - beta < T::zero()
        && theta
            <= two * (mu + one) * (beta - mu - mu * beta)
                / (beta + mu * beta - mu - mu * mu - two * mu * mu * beta)
    {
        return Ok(Branch::D);
    }
    Ok(Branch::E)
}

/// Tight DRS contraction factor for `A` `mu`-strongly monotone and `B`
/// `beta`-cocoercive, at unit step size.
pub fn drs_rate_mu_coco<T: Scalar>(
    mu: T,
    beta: T,
    theta: T,
) -> Result<(T, CaseLabel), AnalyticError> {
    let branch = classify_mu_coco(mu, beta, theta)?;
    let one = T::one();
    let two = cst::<T>(2.0);
    let rho = match branch {
        Branch::A => (one - theta * beta / (beta + one)).abs(),
        Branch::B => (one - theta * (one + mu * beta) / ((mu + one) * (beta + one))).abs(),
        Branch::C => (one - theta).abs(),
        Branch::D => (one - theta * mu / (mu + one)).abs(),
        Branch::E => {
            let num = ((two - theta) * mu * (beta + one) + theta * beta * (one - mu))
                * ((two - theta) * beta * (mu + one) + theta * mu * (one - beta));
            let den = mu * beta * (two * mu * beta * (one - theta) + (two - theta) * (mu + beta + one));
            (two - theta).sqrt() / two * (num / den).sqrt()
        }
    };
    Ok((rho, CaseLabel { family: RateFamily::MuCoco, branch }))
}

/// Branch classification for the Lipschitz family (first match wins).
pub fn classify_mu_lipschitz<T: Scalar>(mu: T, lip: T, theta: T) -> Result<Branch, AnalyticError> {
    check_domain(mu, lip, theta, "lip")?;
    let one = T::one();
    let two = cst::<T>(2.0);
    let l2 = lip * lip;
    let p = two * (theta - one) * mu + theta - two;
    let q = theta - two * (mu + one);
    let denom = (p * p + l2 * q * q).sqrt();
    if mu * (-p + l2 * q) / denom <= (l2 + one).sqrt() {
        return Ok(Branch::A);
    }
    let l3 = l2 * lip;
    if lip < one
        && mu > (l2 + one) / ((lip - one) * (lip - one))
        && theta
            <= two * (mu + one) * (lip + one) * (mu + mu * l2 - l2 - two * mu * lip - one)
                / (two * mu * mu - mu + mu * l3 - l3 - cst::<T>(3.0) * mu * l2 - l2
                    - two * mu * mu * lip
                    - mu * lip
                    - lip
                    - one)
    {
        return Ok(Branch::B);
    }
    Ok(Branch::C)
}

/// Tight DRS contraction factor for `A` `mu`-strongly monotone and `B`
/// monotone and `lip`-Lipschitz, at unit step size.
pub fn drs_rate_mu_lipschitz<T: Scalar>(
    mu: T,
    lip: T,
    theta: T,
) -> Result<(T, CaseLabel), AnalyticError> {
    let branch = classify_mu_lipschitz(mu, lip, theta)?;
    let one = T::one();
    let two = cst::<T>(2.0);
    let l2 = lip * lip;
    let rho = match branch {
        Branch::A => {
            let p = two * (theta - one) * mu + theta - two;
            let q = theta - two * (mu + one);
            let c = ((p * p + l2 * q * q) / (l2 + one)).sqrt();
            (theta + c) / (two * (mu + one))
        }
        Branch::B => (one - theta * (lip + mu) / ((mu + one) * (lip + one))).abs(),
        Branch::C => {
            let num = (theta * (l2 + one) - two * mu * (theta + l2 - one))
                * (theta * (one + two * mu + l2) - two * (mu + one) * (l2 + one));
            let den = two * mu * (theta + l2 - one) - (two - theta) * (one - l2);
            ((two - theta) / (cst::<T>(4.0) * mu * (l2 + one)) * num / den).sqrt()
        }
        _ => unreachable!(),
    };
    Ok((rho, CaseLabel { family: RateFamily::MuLip, branch }))
}

/// General-step-size wrapper: evaluate at the rescaled parameters.
pub fn drs_rate_mu_coco_alpha<T: Scalar>(
    alpha: T,
    mu: T,
    beta: T,
    theta: T,
) -> Result<(T, CaseLabel), AnalyticError> {
    if alpha <= T::zero() {
        return Err(AnalyticError::OutOfDomain("alpha must be positive".into()));
    }
    drs_rate_mu_coco(alpha * mu, beta / alpha, theta)
}

/// General-step-size wrapper: evaluate at the rescaled parameters.
pub fn drs_rate_mu_lipschitz_alpha<T: Scalar>(
    alpha: T,
    mu: T,
    lip: T,
    theta: T,
) -> Result<(T, CaseLabel), AnalyticError> {
    if alpha <= T::zero() {
        return Err(AnalyticError::OutOfDomain("alpha must be positive".into()));
    }
    drs_rate_mu_lipschitz(alpha * mu, alpha * lip, theta)
}

/// Unrelaxed (`theta = 1`) cocoercive-family factor in simplified form; used
/// as an independent oracle against [`drs_rate_mu_coco`].
pub fn unrelaxed_rate_mu_coco<T: Scalar>(mu: T, beta: T) -> Result<T, AnalyticError> {
    check_domain(mu, beta, T::one(), "beta")?;
    let one = T::one();
    let two = cst::<T>(2.0);
    if beta * beta + mu * beta + beta - mu <= T::zero() {
        return Ok((one - beta / (beta + one)).abs());
    }
    if mu * beta - mu - beta >= one {
        return Ok((one - (one + mu * beta) / ((mu + one) * (beta + one))).abs());
    }
    if mu * mu + mu * beta + mu - beta <= T::zero() {
        return Ok((one - mu / (mu + one)).abs());
    }
    Ok((beta + mu) / (two * (beta * mu * (beta + mu + one)).sqrt()))
}

/// Unrelaxed (`theta = 1`) Lipschitz-family factor in simplified form; used
/// as an independent oracle against [`drs_rate_mu_lipschitz`].
pub fn unrelaxed_rate_mu_lipschitz<T: Scalar>(mu: T, lip: T) -> Result<T, AnalyticError> {
    check_domain(mu, lip, T::one(), "lip")?;
    let one = T::one();
    let two = cst::<T>(2.0);
    let l2 = lip * lip;
    let first = (mu - one) * (two * mu + one) * (two * mu + one) * l2
        >= two * mu * mu - two * two.sqrt() * (mu + one).sqrt() * mu + mu + one;
    if first || mu <= one {
        let inner = ((one - two * (mu + one)) * (one - two * (mu + one)) * l2 + one) / (l2 + one);
        return Ok((one + inner.sqrt()) / (two * (one + mu)));
    }
    let cond2 = lip
        <= (two * mu * mu * (lip - one) * l2 + mu * (one - two * lip) - one)
            / ((mu + one) * (l2 + lip + one))
        && lip < one;
    if cond2 {
        return Ok((one + mu * lip) / ((one + mu) * (one + lip)));
    }
    let num = (two * mu * l2 + l2 + one) * (two * mu * l2 - l2 - one);
    let den = cst::<T>(4.0) * mu * (l2 + one) * (two * mu * l2 + l2 - one);
    Ok((num / den).sqrt())
}
