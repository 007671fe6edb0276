//! Cross-validation of closed forms against the SDP and the constructed
//! worst cases.

use serde::Serialize;

use super::certificate::{dual_certificate_auto, family_classes, verify_certificate};
use super::{
    drs_rate_mu_coco, drs_rate_mu_lipschitz, lower_bound_mu_coco, lower_bound_mu_lipschitz,
    AnalyticError, CaseLabel, RateFamily,
};
use crate::ospep::{tight_contraction_factor, ComputeOptions, Method, MethodSpec, OspepError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Ospep(#[from] OspepError),
}
use thiserror::Error;

/// All four routes to the squared factor at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct TightnessReport<T> {
    pub label: CaseLabel,
    pub closed_form: T,
    pub sdp_dual: T,
    pub sdp_primal: T,
    pub lower_bound: T,
    pub certificate_ok: bool,
    /// Largest pairwise discrepancy between the four values.
    pub max_discrepancy: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Compare closed-form rho^2, SDP dual and primal optima, and the achieved
/// ratio of the constructed worst case; pass iff all pairwise gaps are within
/// `tol` and the branch certificate verifies.
pub fn verify_tightness<T: Scalar>(
    family: RateFamily,
    mu: T,
    second: T,
    theta: T,
    opts: &ComputeOptions<T>,
    tol: T,
) -> Result<TightnessReport<T>, VerifyError> {
    let (rho, label, achieved) = match family {
        RateFamily::MuCoco => {
            let (rho, label) = drs_rate_mu_coco(mu, second, theta)?;
            let inst = lower_bound_mu_coco(mu, second, theta)?;
            (rho, label, inst.achieved_rho)
        }
        RateFamily::MuLip => {
            let (rho, label) = drs_rate_mu_lipschitz(mu, second, theta)?;
            let inst = lower_bound_mu_lipschitz(mu, second, theta)?;
            (rho, label, inst.achieved_rho)
        }
    };
    let classes = family_classes(family, mu, second);
    let spec = MethodSpec { method: Method::Drs, alpha: T::one(), theta };
    let result = tight_contraction_factor(&classes, &spec, opts)?;

    let cert = dual_certificate_auto(family, mu, second, theta)?;
    let certificate_ok = verify_certificate(&cert).pass;

    let closed_form = rho * rho;
    let lower_bound = achieved * achieved;
    let values = [closed_form, result.rho_sq, result.primal_value, lower_bound];
    let mut max_discrepancy = T::zero();
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            max_discrepancy = max_discrepancy.max((values[i] - values[j]).abs());
        }
    }
    Ok(TightnessReport {
        label,
        closed_form,
        sdp_dual: result.rho_sq,
        sdp_primal: result.primal_value,
        lower_bound,
        certificate_ok,
        max_discrepancy,
        tolerance: tol,
        pass: max_discrepancy <= tol && certificate_ok,
    })
}
