//! Small dense semidefinite programs over one PSD Gram variable.
//!
//! `maximize tr(M_O G)  s.t.  tr(M_i G) >= 0,  tr(E_j G) = c_j,  G >= 0`.
//!
//! [`solve`] runs the reference homogeneous self-dual interior-point backend
//! and returns primal and dual solutions with a slack certificate;
//! [`certify`] re-derives every KKT residual from the returned data alone.

pub(crate) mod conic;
pub(crate) mod ipm;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::{cst, Scalar};
use conic::{svec, ConeLayout};
use ipm::{solve_conic, ConicProblem, ConicSettings, ConicStatus};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SdpError {
    #[error("matrix dimensions disagree with the declared PSD variable size")]
    DimensionMismatch,
    #[error("at least one equality constraint (normalization) is required")]
    MissingEquality,
}

/// Problem data. Matrices are symmetrized on ingestion; the worst asymmetry
/// observed is recorded in `asymmetry` and worth a warning above `1e-12`.
#[derive(Debug, Clone)]
pub struct SdpProblem<T> {
    dim: usize,
    objective: DMatrix<T>,
    inequalities: Vec<(String, DMatrix<T>)>,
    equalities: Vec<(String, DMatrix<T>, T)>,
    asymmetry: T,
}

impl<T: Scalar> SdpProblem<T> {
    pub fn new(
        objective: DMatrix<T>,
        inequalities: Vec<(String, DMatrix<T>)>,
        equalities: Vec<(String, DMatrix<T>, T)>,
    ) -> Result<Self, SdpError> {
        let dim = objective.nrows();
        if objective.ncols() != dim {
            return Err(SdpError::DimensionMismatch);
        }
        if equalities.is_empty() {
            return Err(SdpError::MissingEquality);
        }
        let mut asymmetry = T::zero();
        let mut sym = |m: &DMatrix<T>| -> Result<DMatrix<T>, SdpError> {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(SdpError::DimensionMismatch);
            }
            let a = (m - m.transpose()).amax();
            if a > asymmetry {
                asymmetry = a;
            }
            Ok((m + m.transpose()) * cst::<T>(0.5))
        };
        let objective = sym(&objective)?;
        let inequalities = inequalities
            .into_iter()
            .map(|(n, m)| Ok((n, sym(&m)?)))
            .collect::<Result<Vec<_>, SdpError>>()?;
        let equalities = equalities
            .into_iter()
            .map(|(n, m, c)| Ok((n, sym(&m)?, c)))
            .collect::<Result<Vec<_>, SdpError>>()?;
        Ok(SdpProblem { dim, objective, inequalities, equalities, asymmetry })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &DMatrix<T> {
        &self.objective
    }

    pub fn inequalities(&self) -> &[(String, DMatrix<T>)] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[(String, DMatrix<T>, T)] {
        &self.equalities
    }

    /// Worst asymmetry removed on ingestion.
    pub fn asymmetry(&self) -> T {
        self.asymmetry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings<T> {
    pub feas_tol: T,
    pub gap_tol: T,
    pub max_iters: usize,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        SolverSettings { feas_tol: cst(1e-9), gap_tol: cst(1e-9), max_iters: 200 }
    }
}

/// Primal/dual solution pair.
///
/// The dual multipliers follow the sign convention
/// `S = sum_j y_j E_j - M_O - sum_i lambda_i M_i >= 0`, `lambda >= 0`, whose
/// objective `sum_j c_j y_j` upper-bounds every primal value (weak duality).
#[derive(Debug, Clone)]
pub struct SdpSolution<T> {
    pub status: SolveStatus,
    /// Primal objective `tr(M_O G)`.
    pub value: T,
    /// Dual objective `sum_j c_j y_j`.
    pub dual_value: T,
    pub gram: DMatrix<T>,
    pub ineq_duals: Vec<(String, T)>,
    pub eq_duals: Vec<(String, T)>,
    pub slack: DMatrix<T>,
    /// `|value - dual_value|` as returned by the backend.
    pub gap: T,
    pub iterations: usize,
}

/// Solver backend seam; [`InteriorPoint`] is the reference implementation.
pub trait SdpBackend<T: Scalar> {
    fn solve(&self, problem: &SdpProblem<T>, settings: &SolverSettings<T>) -> SdpSolution<T>;
}

/// Dense homogeneous self-dual interior-point backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPoint;

impl<T: Scalar> SdpBackend<T> for InteriorPoint {
    fn solve(&self, problem: &SdpProblem<T>, settings: &SolverSettings<T>) -> SdpSolution<T> {
        let n = problem.dim;
        let n_ineq = problem.inequalities.len();
        let sv = conic::svec_len(n);
        let cols = n_ineq + sv;
        let rows = n_ineq + problem.equalities.len();

        let mut a = DMatrix::zeros(rows, cols);
        let mut b = nalgebra::DVector::zeros(rows);
        for (i, (_, m)) in problem.inequalities.iter().enumerate() {
            a[(i, i)] = -T::one();
            a.view_mut((i, n_ineq), (1, sv)).copy_from(&svec(m).transpose());
        }
        for (j, (_, m, cj)) in problem.equalities.iter().enumerate() {
            let r = n_ineq + j;
            a.view_mut((r, n_ineq), (1, sv)).copy_from(&svec(m).transpose());
            b[r] = *cj;
        }
        let mut c = nalgebra::DVector::zeros(cols);
        c.rows_mut(n_ineq, sv).copy_from(&(-svec(&problem.objective)));

        let prob = ConicProblem {
            a,
            b,
            c,
            cones: ConeLayout { orthant: n_ineq, psd: vec![n] },
        };
        let conic_settings = ConicSettings {
            feas_tol: settings.feas_tol,
            gap_tol: settings.gap_tol,
            max_iters: settings.max_iters,
        };
        let sol = solve_conic(&prob, &conic_settings);

        let status = match sol.status {
            ConicStatus::Optimal => SolveStatus::Optimal,
            ConicStatus::PrimalInfeasible => SolveStatus::Infeasible,
            ConicStatus::DualInfeasible => SolveStatus::Unbounded,
            ConicStatus::NumericalFailure => SolveStatus::NumericalFailure,
        };
        let gram = conic::smat(&sol.x.as_slice()[n_ineq..], n);
        let slack = conic::smat(&sol.z.as_slice()[n_ineq..], n);
        let ineq_duals = problem
            .inequalities
            .iter()
            .enumerate()
            .map(|(i, (name, _))| (name.clone(), sol.z[i]))
            .collect();
        let eq_duals = problem
            .equalities
            .iter()
            .enumerate()
            .map(|(j, (name, _, _))| (name.clone(), -sol.y[n_ineq + j]))
            .collect();
        let value = -sol.pobj;
        let dual_value = -sol.dobj;
        SdpSolution {
            status,
            value,
            dual_value,
            gram,
            ineq_duals,
            eq_duals,
            slack,
            gap: (value - dual_value).abs(),
            iterations: sol.iterations,
        }
    }
}

/// Solve with the reference backend.
pub fn solve<T: Scalar>(problem: &SdpProblem<T>, settings: &SolverSettings<T>) -> SdpSolution<T> {
    InteriorPoint.solve(problem, settings)
}

/// Independent KKT audit of a returned solution.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport<T> {
    /// Worst violated inequality `max_i max(0, -tr(M_i G))`.
    pub inequality_violation: T,
    /// Worst equality mismatch `max_j |tr(E_j G) - c_j|`.
    pub equality_violation: T,
    pub min_eig_gram: T,
    pub min_eig_slack: T,
    pub min_multiplier: T,
    /// `||S - (sum_j y_j E_j - M_O - sum_i lambda_i M_i)||_F`.
    pub slack_reconstruction: T,
    /// `|sum_j c_j y_j - tr(M_O G)|` recomputed from the returned points.
    pub gap: T,
    /// `max(|tr(S G)|, max_i |lambda_i tr(M_i G)|)`.
    pub complementarity: T,
    pub max_residual: T,
}

/// Recompute all KKT residuals from `(G, lambda, y, S)` without trusting any
/// solver bookkeeping.
pub fn certify<T: Scalar>(problem: &SdpProblem<T>, solution: &SdpSolution<T>) -> CertificateReport<T> {
    let g = &solution.gram;
    let mut ineq_violation = T::zero();
    let mut compl = T::zero();
    let mut min_mult = T::zero();
    let mut recon = -problem.objective.clone();
    for ((_, m), (_, lam)) in problem.inequalities.iter().zip(&solution.ineq_duals) {
        let t = (m * g).trace();
        ineq_violation = ineq_violation.max((-t).max(T::zero()));
        compl = compl.max((*lam * t).abs());
        min_mult = min_mult.min(*lam);
        recon -= m * *lam;
    }
    let mut eq_violation = T::zero();
    let mut dual_obj = T::zero();
    for ((_, m, cj), (_, yj)) in problem.equalities.iter().zip(&solution.eq_duals) {
        let t = (m * g).trace();
        eq_violation = eq_violation.max((t - *cj).abs());
        dual_obj += *cj * *yj;
        recon += m * *yj;
    }
    let primal_obj = (&problem.objective * g).trace();
    let gap = (dual_obj - primal_obj).abs();
    compl = compl.max((&solution.slack * g).trace().abs());
    let min_eig_gram = g.clone().symmetric_eigenvalues().min();
    let min_eig_slack = solution.slack.clone().symmetric_eigenvalues().min();
    let slack_reconstruction = (&recon - &solution.slack).norm();
    let neg = |x: T| (-x).max(T::zero());
    let max_residual = ineq_violation
        .max(eq_violation)
        .max(neg(min_eig_gram))
        .max(neg(min_eig_slack))
        .max(neg(min_mult))
        .max(slack_reconstruction)
        .max(gap)
        .max(compl);
    CertificateReport {
        inequality_violation: ineq_violation,
        equality_violation: eq_violation,
        min_eig_gram,
        min_eig_slack,
        min_multiplier: min_mult,
        slack_reconstruction,
        gap,
        complementarity: compl,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn e11(n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = 1.0;
        m
    }

    #[test]
    fn objective_pinned_by_equality() {
        // maximize tr(M_I G) s.t. tr(M_I G) = 1, G >= 0.
        let p = SdpProblem::new(e11(2), vec![], vec![("norm".into(), e11(2), 1.0)]).unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-8, "value = {}", s.value);
        let report = certify(&p, &s);
        assert!(report.max_residual < 1e-7, "{report:?}");
    }

    #[test]
    fn contradictory_constraints_detected_infeasible() {
        // tr(-M_I G) >= 0 and tr(M_I G) = 1.
        let p = SdpProblem::new(
            e11(2),
            vec![("neg".into(), -e11(2))],
            vec![("norm".into(), e11(2), 1.0)],
        )
        .unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_objective_detected() {
        // maximize G_22 with only G_11 pinned.
        let mut obj = DMatrix::zeros(2, 2);
        obj[(1, 1)] = 1.0;
        let p = SdpProblem::new(obj, vec![], vec![("norm".into(), e11(2), 1.0)]).unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn asymmetry_is_recorded_and_removed() {
        let mut obj = e11(2);
        obj[(0, 1)] = 1e-3;
        let p = SdpProblem::new(obj, vec![], vec![("norm".into(), e11(2), 1.0)]).unwrap();
        assert!(p.asymmetry() >= 1e-3);
        assert_eq!(p.objective()[(0, 1)], p.objective()[(1, 0)]);
    }

    #[test]
    fn missing_equality_rejected() {
        assert_eq!(
            SdpProblem::<f64>::new(e11(2), vec![], vec![]).unwrap_err(),
            SdpError::MissingEquality
        );
    }
}
