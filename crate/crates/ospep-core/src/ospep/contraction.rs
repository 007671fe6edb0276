//! Tight contraction factors with dual certificates and worst-case
//! extraction.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{build_dual, build_primal, ClassBundle, MethodSpec, OspepError};
use crate::operators::{EvaluationPair, Role};
use crate::scalar::{cst, Scalar};
use crate::sdp::{self, SdpBackend, SolveStatus, SolverSettings};

/// Options for [`tight_contraction_factor`].
#[derive(Debug, Clone, Copy)]
pub struct ComputeOptions<T> {
    pub settings: SolverSettings<T>,
    /// Extract a worst-case instance from the optimal Gram matrix when
    /// strong duality holds (default true).
    pub want_worst_case: bool,
}

impl<T: Scalar> Default for ComputeOptions<T> {
    fn default() -> Self {
        ComputeOptions { settings: SolverSettings::default(), want_worst_case: true }
    }
}

/// Proof object: multipliers and the reconstructed PSD slack.
#[derive(Debug, Clone, Serialize)]
pub struct DualCertificate<T> {
    pub rho_sq: T,
    pub multipliers: Vec<(String, T)>,
    /// `rho^2 M_I - M_O - sum_i lambda_i M_i`, rebuilt from the multipliers.
    pub slack: Vec<Vec<T>>,
}

impl<T: Scalar> DualCertificate<T> {
    pub fn slack_matrix(&self) -> DMatrix<T> {
        let n = self.slack.len();
        DMatrix::from_fn(n, n, |i, j| self.slack[i][j])
    }
}

/// One operator evaluation `q in Op(x)` of a worst-case instance.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationTriple<T> {
    pub role: Role,
    pub x: Vec<T>,
    pub q: Vec<T>,
}

/// Worst-case operators encoded by their evaluations at the extracted
/// difference vectors (each also maps 0 to 0).
#[derive(Debug, Clone, Serialize)]
pub struct WorstCaseInstance<T> {
    pub z: Vec<T>,
    pub z_a: Vec<T>,
    pub z_b: Vec<T>,
    pub z_c: Vec<T>,
    pub triples: Vec<EvaluationTriple<T>>,
    /// `|| z - theta (z_B - z_A) ||^2`.
    pub achieved_ratio: T,
}

/// Contraction factor with proof and (optionally) a matching instance.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionResult<T> {
    pub rho_sq: T,
    pub rho: T,
    pub certificate: DualCertificate<T>,
    pub worst_case: Option<WorstCaseInstance<T>>,
    /// False when a degenerate class intersection may break strong duality;
    /// `rho_sq` is then still a valid upper bound.
    pub strong_duality: bool,
    pub status: SolveStatus,
    /// Primal objective of the returned Gram matrix.
    pub primal_value: T,
    /// Exactness caveat tied to the Gram dimension.
    pub applicability_note: String,
}

/// Compute the tight contraction factor for the given classes and method.
///
/// One homogeneous self-dual solve produces matching primal (Gram) and dual
/// (multiplier) solutions; `rho_sq` is read from the dual side, so it is a
/// valid upper bound whenever the returned multipliers are feasible, and the
/// primal side certifies tightness when strong duality applies.
pub fn tight_contraction_factor<T: Scalar>(
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
    opts: &ComputeOptions<T>,
) -> Result<ContractionResult<T>, OspepError> {
    let problem = build_primal(classes, method)?;
    let dual_map = build_dual(classes, method)?;
    let solution = sdp::InteriorPoint.solve(&problem, &opts.settings);
    match solution.status {
        SolveStatus::Optimal | SolveStatus::NumericalFailure => {}
        s => return Err(OspepError::Solver(s)),
    }

    let rho_sq = solution.eq_duals[0].1;
    let lambdas: Vec<T> = solution.ineq_duals.iter().map(|(_, v)| *v).collect();
    let slack = dual_map.slack(rho_sq, &lambdas);
    let n = dual_map.dim;
    let certificate = DualCertificate {
        rho_sq,
        multipliers: solution
            .ineq_duals
            .iter()
            .map(|(name, v)| (name.clone(), *v))
            .collect(),
        slack: (0..n).map(|i| (0..n).map(|j| slack[(i, j)]).collect()).collect(),
    };

    let strong_duality = !classes.any_degenerate();
    let worst_case = if opts.want_worst_case
        && strong_duality
        && solution.status == SolveStatus::Optimal
    {
        extract_worst_case(&solution.gram, classes, method, cst(1e-6)).ok()
    } else {
        None
    };

    let primal_value = (problem.objective() * &solution.gram).trace();
    Ok(ContractionResult {
        rho_sq,
        rho: rho_sq.max(T::zero()).sqrt(),
        certificate,
        worst_case,
        strong_duality,
        status: solution.status,
        primal_value,
        applicability_note: applicability_note(n),
    })
}

/// The contraction factor and the quasi-contraction factor (distance to a
/// fixed point) coincide for these methods; this is the same computation.
pub fn quasi_contraction_factor<T: Scalar>(
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
    opts: &ComputeOptions<T>,
) -> Result<ContractionResult<T>, OspepError> {
    tight_contraction_factor(classes, method, opts)
}

fn applicability_note(gram_dim: usize) -> String {
    format!(
        "value is the exact worst case over spaces of dimension >= {gram_dim}; \
         in lower dimensions it remains a valid upper bound"
    )
}

/// Factor a PSD Gram matrix and read off worst-case operator evaluations.
///
/// Eigenvalues below `1e-9 * lambda_max` are truncated to zero (the optimal
/// Gram matrix is low-rank by complementary slackness); eigenvalues below
/// `-tol * lambda_max` are an error.
pub fn extract_worst_case<T: Scalar>(
    gram: &DMatrix<T>,
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
    tol: T,
) -> Result<WorstCaseInstance<T>, OspepError> {
    let ordering = classes.ordering();
    let n = ordering.dim();
    if gram.nrows() != n || gram.ncols() != n {
        return Err(OspepError::BadGram(format!(
            "expected a {n}x{n} Gram matrix for ordering {}",
            ordering.describe()
        )));
    }
    let eig = gram.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.amax().max(T::one());
    let mut factor = eig.eigenvectors.clone();
    for (k, column) in eig.eigenvalues.iter().enumerate() {
        let lam = *column;
        if lam < -tol * lam_max {
            return Err(OspepError::BadGram(format!(
                "indefinite beyond tolerance: eigenvalue {lam:?}"
            )));
        }
        let scale = if lam < cst::<T>(1e-9) * lam_max { T::zero() } else { lam.sqrt() };
        for i in 0..n {
            factor[(i, k)] *= scale;
        }
    }
    // Row i of `factor` is the coordinate vector of basis element i.
    let row = |i: usize| factor.row(i).transpose().clone_owned();
    let z = row(0);
    let z_b = match ordering.index_of(Role::B) {
        Some(j) => row(j),
        None => z.clone(),
    };
    let z_c = match ordering.index_of(Role::C) {
        Some(j) => row(j),
        None => DVector::zeros(n),
    };
    let z_a = match ordering.index_of(Role::A) {
        Some(j) => row(j),
        None => &z_b * cst::<T>(2.0) - &z - &z_c,
    };

    let norm_err = (z.dot(&z) - T::one()).abs();
    if norm_err > tol {
        return Err(OspepError::BadGram(format!(
            "normalization violated: ||z||^2 - 1 = {norm_err:?}"
        )));
    }

    let inv_alpha = T::one() / method.alpha;
    let mut triples = Vec::new();
    let mut check = |class: &crate::operators::OperatorClass<T>,
                     x: &DVector<T>,
                     q: &DVector<T>|
     -> Result<(), OspepError> {
        if !class.is_active() {
            return Ok(());
        }
        let pair = EvaluationPair::new(x.clone(), q.clone(), DVector::zeros(n), DVector::zeros(n))?;
        if !class.check_two_point(&pair, tol)? {
            return Err(OspepError::BadGram(format!(
                "extracted evaluation for role {:?} violates its class inequalities",
                class.role
            )));
        }
        triples.push(EvaluationTriple {
            role: class.role,
            x: x.as_slice().to_vec(),
            q: q.as_slice().to_vec(),
        });
        Ok(())
    };
    let q_a = (&z_b * cst::<T>(2.0) - &z - &z_c - &z_a) * inv_alpha;
    check(&classes.a, &z_a, &q_a)?;
    let q_b = (&z - &z_b) * inv_alpha;
    check(&classes.b, &z_b, &q_b)?;
    let q_c = &z_c * inv_alpha;
    check(&classes.c, &z_b, &q_c)?;

    let out = &z - (&z_b - &z_a) * method.theta;
    Ok(WorstCaseInstance {
        z: z.as_slice().to_vec(),
        z_a: z_a.as_slice().to_vec(),
        z_b: z_b.as_slice().to_vec(),
        z_c: z_c.as_slice().to_vec(),
        triples,
        achieved_ratio: out.dot(&out),
    })
}

/// Re-check a certificate against a freshly built dual map: multipliers
/// nonnegative and reconstructed slack PSD (within `tol`).
pub fn certificate_is_feasible<T: Scalar>(
    classes: &ClassBundle<T>,
    method: &MethodSpec<T>,
    certificate: &DualCertificate<T>,
    tol: T,
) -> Result<bool, OspepError> {
    let dual = build_dual(classes, method)?;
    let names = dual.multiplier_names();
    if names.len() != certificate.multipliers.len() {
        return Ok(false);
    }
    let mut lambdas = Vec::with_capacity(names.len());
    for (name, (got, lam)) in names.iter().zip(&certificate.multipliers) {
        if *name != got.as_str() {
            return Ok(false);
        }
        if *lam < -tol {
            return Ok(false);
        }
        lambdas.push(*lam);
    }
    let rebuilt = dual.slack(certificate.rho_sq, &lambdas);
    let diff = (&rebuilt - certificate.slack_matrix()).amax();
    if diff > tol * T::one().max(rebuilt.amax()) {
        return Ok(false);
    }
    let min_eig = rebuilt.symmetric_eigenvalues().min();
    Ok(min_eig >= -tol * T::one().max(rebuilt.amax()))
}
