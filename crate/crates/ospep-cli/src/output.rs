//! JSON and CSV emitters plus the verify sweep.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use ospep_core::analytic::{
    dual_certificate_auto, lower_bound_mu_coco, lower_bound_mu_lipschitz, verify_certificate,
    verify_tightness, Branch, CaseLabel, LowerBoundInstance, RateFamily,
};
use ospep_core::ospep::{ComputeOptions, ContractionResult, DualCertificate, WorstCaseInstance};
use ospep_core::search::{CurvePoint, ParamOptResult};

use crate::{CliError, VerifyArgs};

fn f(v: f64) -> Value {
    json!(v)
}

fn vec_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| f(*x)).collect())
}

fn matrix_rows(m: &ospep_core::nalgebra::Matrix2<f64>) -> Value {
    Value::Array(
        (0..2)
            .map(|i| Value::Array((0..2).map(|j| f(m[(i, j)])).collect()))
            .collect(),
    )
}

fn certificate_json(cert: &DualCertificate<f64>) -> Value {
    let mut lambdas = Map::new();
    for (name, v) in &cert.multipliers {
        lambdas.insert(name.clone(), f(*v));
    }
    json!({
        "rho_sq": cert.rho_sq,
        "lambdas": Value::Object(lambdas),
        "s": cert.slack,
    })
}

pub fn rho_json(result: &ContractionResult<f64>) -> String {
    let out = json!({
        "rho_sq": result.rho_sq,
        "rho": result.rho,
        "strong_duality": result.strong_duality,
        "status": format!("{:?}", result.status),
        "certificate": certificate_json(&result.certificate),
        "primal_value": result.primal_value,
        "applicability_note": result.applicability_note,
    });
    out.to_string()
}

pub fn closed_form_json(rho: f64, label: &CaseLabel) -> String {
    json!({
        "rho": rho,
        "rho_sq": rho * rho,
        "case": label.branch.letter().to_string(),
        "family": match label.family {
            RateFamily::MuCoco => "mu-coco",
            RateFamily::MuLip => "mu-lip",
        },
    })
    .to_string()
}

pub fn gram_worst_case_json(
    result: &ContractionResult<f64>,
    instance: &WorstCaseInstance<f64>,
) -> String {
    let triples: Vec<Value> = instance
        .triples
        .iter()
        .map(|t| {
            json!({
                "role": t.role.label(),
                "x": vec_json(&t.x),
                "q": vec_json(&t.q),
            })
        })
        .collect();
    json!({
        "kind": "gram",
        "rho_sq": result.rho_sq,
        "achieved_ratio": instance.achieved_ratio,
        "z": vec_json(&instance.z),
        "z_a": vec_json(&instance.z_a),
        "z_b": vec_json(&instance.z_b),
        "z_c": vec_json(&instance.z_c),
        "triples": triples,
    })
    .to_string()
}

pub fn lower_bound_json(instance: &LowerBoundInstance<f64>) -> String {
    json!({
        "kind": "explicit",
        "family": match instance.label.family {
            RateFamily::MuCoco => "mu-coco",
            RateFamily::MuLip => "mu-lip",
        },
        "case": instance.label.branch.letter().to_string(),
        "a_kind": format!("{:?}", instance.a_kind),
        "a": instance.a_matrix.as_ref().map(matrix_rows),
        "b": instance.b_matrix.as_ref().map(matrix_rows),
        "j_a": matrix_rows(&instance.j_a),
        "j_b": matrix_rows(&instance.j_b),
        "t": matrix_rows(&instance.t),
        "achieved_rho": instance.achieved_rho,
        "k": instance.k,
        "rotation": instance.rotation,
    })
    .to_string()
}

pub fn optimize_json(result: &ParamOptResult<f64>) -> String {
    json!({
        "alpha_star": result.alpha_star,
        "theta_star": result.theta_star,
        "rho_sq_star": result.rho_sq_star,
        "evaluations": result.trace.len(),
        "bracket": [result.bracket.0, result.bracket.1],
        "status": match result.status {
            ospep_core::search::SearchStatus::Converged => "converged",
            ospep_core::search::SearchStatus::NonUnimodalWarning => "non_unimodal_warning",
        },
    })
    .to_string()
}

/// RFC-4180 CSV (CRLF line endings), full double precision.
pub fn curve_csv(points: &[CurvePoint<f64>]) -> String {
    let mut out = String::from("alpha,rho_sq,theta_opt\r\n");
    for p in points {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\r\n", p.alpha, p.rho_sq, p.theta));
    }
    out
}

/// Aggregate results of one verify sweep.
pub struct VerifySummary {
    pub family: RateFamily,
    pub grid_points: usize,
    pub tightness_failures: usize,
    pub max_closed_vs_dual: f64,
    pub max_primal_vs_dual: f64,
    pub max_closed_vs_lower: f64,
    pub cert_samples: usize,
    pub cert_failures: usize,
    pub max_sos_residual: f64,
    pub min_coefficient: f64,
    pub min_slack_eig: f64,
    pub membership_failures: usize,
    pub pass: bool,
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "family {:?}: tightness points={} failures={} max|closed-dual|={:.3e} \
             max|primal-dual|={:.3e} max|closed-lower|={:.3e}",
            self.family,
            self.grid_points,
            self.tightness_failures,
            self.max_closed_vs_dual,
            self.max_primal_vs_dual,
            self.max_closed_vs_lower,
        )?;
        write!(
            f,
            "family {:?}: certificates samples={} failures={} membership_failures={} \
             max_sos_residual={:.3e} min_coefficient={:.3e} min_slack_eig={:.3e} => {}",
            self.family,
            self.cert_samples,
            self.cert_failures,
            self.membership_failures,
            self.max_sos_residual,
            self.min_coefficient,
            self.min_slack_eig,
            if self.pass { "PASS" } else { "FAIL" },
        )
    }
}

/// Log-spaced grid in [0.1, 10] with optional seeded multiplicative jitter.
fn jittered_grid(n: usize, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = (0.1f64.ln(), 10f64.ln());
    (0..n)
        .map(|i| {
            let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            let j = if jitter > 0.0 { jitter * rng.random_range(-1.0..1.0) } else { 0.0 };
            (lo + (hi - lo) * t + j).exp()
        })
        .collect()
}

pub fn run_verify_sweep(family: RateFamily, args: &VerifyArgs) -> Result<VerifySummary, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let params = jittered_grid(args.grid, args.jitter, &mut rng);
    let thetas: Vec<f64> = (0..args.grid)
        .map(|i| {
            let t = if args.grid == 1 { 0.5 } else { i as f64 / (args.grid - 1) as f64 };
            0.1 + (1.9 - 0.1) * t
        })
        .collect();

    let opts = ComputeOptions::<f64> { want_worst_case: false, ..ComputeOptions::default() };
    let mut summary = VerifySummary {
        family,
        grid_points: 0,
        tightness_failures: 0,
        max_closed_vs_dual: 0.0,
        max_primal_vs_dual: 0.0,
        max_closed_vs_lower: 0.0,
        cert_samples: 0,
        cert_failures: 0,
        max_sos_residual: 0.0,
        min_coefficient: f64::INFINITY,
        min_slack_eig: f64::INFINITY,
        membership_failures: 0,
        pass: true,
    };
    for &mu in &params {
        for &second in &params {
            for &theta in &thetas {
                let report = verify_tightness(family, mu, second, theta, &opts, args.tol)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                summary.grid_points += 1;
                summary.max_closed_vs_dual = summary
                    .max_closed_vs_dual
                    .max((report.closed_form - report.sdp_dual).abs());
                summary.max_primal_vs_dual = summary
                    .max_primal_vs_dual
                    .max((report.sdp_primal - report.sdp_dual).abs());
                summary.max_closed_vs_lower = summary
                    .max_closed_vs_lower
                    .max((report.closed_form - report.lower_bound).abs());
                if !report.pass {
                    summary.tightness_failures += 1;
                }
            }
        }
    }

    let mut injected = args.inject_fault;
    for &branch in CaseLabel::branches(family) {
        let mut found = 0usize;
        let mut attempts = 0usize;
        while found < args.cert_samples && attempts < args.cert_samples * 4000 {
            attempts += 1;
            let mu = (0.1f64.ln() + (10f64.ln() - 0.1f64.ln()) * rng.random::<f64>()).exp();
            let second = (0.1f64.ln() + (10f64.ln() - 0.1f64.ln()) * rng.random::<f64>()).exp();
            let theta = 0.02 + 1.96 * rng.random::<f64>();
            let classified = match family {
                RateFamily::MuCoco => ospep_core::analytic::classify_mu_coco(mu, second, theta),
                RateFamily::MuLip => {
                    ospep_core::analytic::classify_mu_lipschitz(mu, second, theta)
                }
            }
            .map_err(|e| CliError::Config(e.to_string()))?;
            if classified != branch {
                continue;
            }
            found += 1;
            let mut cert = dual_certificate_auto(family, mu, second, theta)
                .map_err(|e| CliError::Solver(e.to_string()))?;
            if injected {
                // Deliberate corruption to prove the failure path is live.
                if let Some((_, lam)) = cert.lambdas.first_mut() {
                    *lam = -lam.abs() - 1.0;
                }
                injected = false;
            }
            let report = verify_certificate(&cert);
            summary.cert_samples += 1;
            summary.max_sos_residual = summary.max_sos_residual.max(report.sos_residual);
            summary.min_coefficient = summary.min_coefficient.min(report.min_coefficient);
            summary.min_slack_eig = summary.min_slack_eig.min(report.slack_min_eig);
            if !report.pass {
                summary.cert_failures += 1;
            }
            let instance = match family {
                RateFamily::MuCoco => lower_bound_mu_coco(mu, second, theta),
                RateFamily::MuLip => lower_bound_mu_lipschitz(mu, second, theta),
            }
            .map_err(|e| CliError::Solver(e.to_string()))?;
            if !instance.check_membership(mu, second, theta, 1e-9).pass {
                summary.membership_failures += 1;
            }
        }
        if found < args.cert_samples {
            return Err(CliError::Config(format!(
                "could not sample {} points in branch {} of {:?} (rare region; \
                 lower --cert-samples)",
                args.cert_samples,
                branch.letter(),
                family
            )));
        }
        let _ = branch;
    }
    let _ = Branch::A;
    summary.pass = summary.tightness_failures == 0
        && summary.cert_failures == 0
        && summary.membership_failures == 0;
    Ok(summary)
}
